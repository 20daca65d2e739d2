"""Energy statistic and the permutation two-sample test."""

import numpy as np
import pytest

from anchorot import (
    AnchorFamily,
    Dist1D,
    ba_generate,
    energy_statistic,
    er_generate,
    graph_feature,
    permutation_test,
)
from anchorot.errors import InvalidParamsError


def _family(dists):
    return AnchorFamily.from_distributions(dists)


def _degree_family(graphs):
    return _family([graph_feature(g, "degree") for g in graphs])


class TestEnergyStatistic:
    def test_identical_families_zero(self):
        F = _family([Dist1D([0.0, 1.0], [0.5, 0.5]), Dist1D([2.0], [1.0])])
        assert abs(energy_statistic(F, F)) <= 1e-9

    def test_singleton_point_masses(self):
        F1 = _family([Dist1D([0.0], [1.0])])
        F2 = _family([Dist1D([2.0], [1.0])])
        assert energy_statistic(F1, F2) == pytest.approx(4.0, abs=1e-12)

    def test_er_vs_ba_positive(self):
        F1 = _degree_family([er_generate(100, 0.05, s) for s in range(20)])
        F2 = _degree_family([ba_generate(100, 2, s) for s in range(20)])
        assert energy_statistic(F1, F2) > 0

    def test_symmetry(self):
        F1 = _degree_family([er_generate(40, 0.2, s) for s in range(6)])
        F2 = _degree_family([er_generate(40, 0.1, s) for s in range(6)])
        assert energy_statistic(F1, F2) == pytest.approx(
            energy_statistic(F2, F1), abs=1e-9
        )

    def test_requires_uniform_weights(self):
        F = AnchorFamily.from_distributions(
            [Dist1D([0.0], [1.0]), Dist1D([1.0], [1.0])], [0.7, 0.3]
        )
        with pytest.raises(InvalidParamsError):
            energy_statistic(F, F)


class TestPermutationTest:
    def test_identical_families_p_one(self):
        F = _family([Dist1D([float(i)], [1.0]) for i in range(4)])
        rep = permutation_test(F, F, n_perm=99, seed=1)
        assert rep.p_value == 1.0
        assert not rep.reject
        assert abs(rep.statistic) <= 1e-9

    def test_extreme_separation(self):
        F1 = _family([Dist1D([0.0], [1.0]) for _ in range(10)])
        F2 = _family([Dist1D([100.0], [1.0]) for _ in range(10)])
        rep = permutation_test(F1, F2, n_perm=199, seed=3)
        assert rep.p_value <= 0.02
        assert rep.reject

    def test_p_value_floor(self):
        F1 = _degree_family([er_generate(60, 0.05, s) for s in range(8)])
        F2 = _degree_family([ba_generate(60, 3, s) for s in range(8)])
        rep = permutation_test(F1, F2, n_perm=199, seed=0)
        assert rep.p_value >= 1.0 / 200.0
        assert rep.reject == (rep.p_value <= rep.alpha)

    def test_deterministic(self):
        F1 = _degree_family([er_generate(40, 0.1, s) for s in range(6)])
        F2 = _degree_family([er_generate(40, 0.1, s + 50) for s in range(6)])
        assert permutation_test(F1, F2, seed=7) == permutation_test(F1, F2, seed=7)

    def test_statistic_matches_sweep(self):
        F1 = _degree_family([er_generate(50, 0.1, s) for s in range(7)])
        F2 = _degree_family([ba_generate(50, 2, s) for s in range(7)])
        rep = permutation_test(F1, F2, n_perm=9, seed=0)
        assert rep.statistic == pytest.approx(energy_statistic(F1, F2), abs=1e-9)

    def test_invalid_params(self):
        F = _family([Dist1D([0.0], [1.0]), Dist1D([1.0], [1.0])])
        with pytest.raises(InvalidParamsError):
            permutation_test(F, F, n_perm=0)
        with pytest.raises(InvalidParamsError):
            permutation_test(F, F, alpha=1.5)
