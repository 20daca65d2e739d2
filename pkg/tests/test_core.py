"""Domain types, 1D OT, anchor features, and the rank transform."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anchorot import Dist1D, anchor_family, ot1d, rank_transform, validate_mmset
from anchorot.errors import (
    InvalidExponentError,
    NegativeWeightError,
    NonFiniteError,
    NonSquareError,
    WeightSumError,
)
from conftest import ot1d_reference, random_mmset


class TestValidateMMSet:
    def test_uniform_default(self):
        S = validate_mmset([[0, 1], [1, 0]])
        assert np.allclose(S.weights, [0.5, 0.5])

    def test_explicit_weights_kept(self):
        S = validate_mmset([[0, 1], [1, 0]], [0.5, 0.5])
        assert np.array_equal(S.weights, [0.5, 0.5])

    def test_non_square_rejected(self):
        with pytest.raises(NonSquareError):
            validate_mmset([[0, 1, 2], [1, 0, 1]])

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteError):
            validate_mmset([[0, np.nan], [1, 0]])

    def test_negative_weight_rejected(self):
        with pytest.raises(NegativeWeightError):
            validate_mmset([[0, 1], [1, 0]], [-0.5, 1.5])

    def test_small_drift_renormalized(self):
        S = validate_mmset([[0, 1], [1, 0]], [0.5, 0.5 + 1e-10])
        assert abs(S.weights.sum() - 1.0) <= 1e-12

    def test_large_drift_rejected(self):
        with pytest.raises(WeightSumError):
            validate_mmset([[0, 1], [1, 0]], [0.5, 0.6])

    def test_immutable(self):
        S = validate_mmset([[0, 1], [1, 0]])
        with pytest.raises(ValueError):
            S.costs[0, 0] = 5.0


class TestAnchorFamily:
    def test_two_point_family(self):
        F = anchor_family(validate_mmset([[0, 1], [1, 0]]))
        assert F.size == 2
        a0 = F.anchor(0)
        assert np.array_equal(a0.values, [0.0, 1.0])
        assert np.allclose(a0.weights, [0.5, 0.5])

    def test_singleton(self):
        F = anchor_family(validate_mmset([[0.0]]))
        assert F.size == 1
        assert np.array_equal(F.anchor(0).values, [0.0])

    def test_weights_attach_to_columns(self):
        F = anchor_family(validate_mmset([[0, 4], [4, 0]], [0.75, 0.25]))
        a1, a2 = F.anchor(0), F.anchor(1)
        assert np.array_equal(a1.values, [0.0, 4.0])
        assert np.allclose(a1.weights, [0.75, 0.25])
        assert np.allclose(a2.weights, [0.25, 0.75])

    def test_atom_mass_preserved(self, rng):
        F = anchor_family(random_mmset(rng, 9, weighted=True))
        for i in range(F.size):
            assert abs(F.anchor(i).weights.sum() - 1.0) <= 1e-12

    def test_atom_values_nondecreasing(self, rng):
        F = anchor_family(random_mmset(rng, 7, ties=True))
        for i in range(F.size):
            assert np.all(np.diff(F.anchor(i).values) >= 0)


class TestOt1d:
    def test_point_masses(self):
        assert ot1d(Dist1D([0.0], [1.0]), Dist1D([5.0], [1.0]), 1) == 5.0

    def test_uniform_pair(self):
        mu = Dist1D([0.0, 1.0], [0.5, 0.5])
        nu = Dist1D([0.0, 2.0], [0.5, 0.5])
        assert ot1d(mu, nu, 1) == pytest.approx(0.5, abs=1e-12)

    def test_mixed_weights(self):
        mu = Dist1D([0.0, 4.0], [0.75, 0.25])
        nu = Dist1D([0.0, 2.0], [0.5, 0.5])
        assert ot1d(mu, nu, 1) == pytest.approx(1.0, abs=1e-12)

    def test_identity(self, rng):
        for p in (1, 2):
            v = np.sort(rng.random(8))
            w = rng.random(8) + 0.1
            mu = Dist1D(v, w / w.sum())
            assert ot1d(mu, mu, p) == 0.0

    def test_bad_exponent(self):
        mu = Dist1D([0.0], [1.0])
        with pytest.raises(InvalidExponentError):
            ot1d(mu, mu, 0)
        with pytest.raises(InvalidExponentError):
            ot1d(mu, mu, 3)

    def test_matches_reference_oracle(self, rng):
        worst = 0.0
        for _ in range(200):
            k1, k2 = rng.integers(1, 16, size=2)
            mu = Dist1D(rng.integers(0, 8, k1).astype(float), np.full(k1, 1.0 / k1))
            nu = Dist1D(rng.random(k2) * 4, np.full(k2, 1.0 / k2))
            for p in (1, 2):
                got = ot1d(mu, nu, p)
                ref = ot1d_reference(mu, nu, p)
                worst = max(worst, abs(got - ref) / max(1e-12, abs(ref)))
        assert worst <= 1e-6

    def test_triangle_inequality(self, rng):
        for _ in range(100):
            dists = []
            for _ in range(3):
                k = int(rng.integers(1, 16))
                dists.append(Dist1D(rng.random(k) * 3, np.full(k, 1.0 / k)))
            a, b, c = dists
            assert ot1d(a, c, 1) <= ot1d(a, b, 1) + ot1d(b, c, 1) + 1e-9

    @settings(deadline=None, max_examples=60)
    @given(
        xs=st.lists(st.floats(-50, 50), min_size=1, max_size=12),
        ys=st.lists(st.floats(-50, 50), min_size=1, max_size=12),
        p=st.sampled_from([1, 2]),
    )
    def test_symmetry(self, xs, ys, p):
        mu = Dist1D(xs, np.full(len(xs), 1.0 / len(xs)))
        nu = Dist1D(ys, np.full(len(ys), 1.0 / len(ys)))
        assert abs(ot1d(mu, nu, p) - ot1d(nu, mu, p)) <= 1e-12


class TestRankTransform:
    # 4x4 distance-like matrix with tied off-diagonal values
    M = np.array(
        [
            [0.0, 4.5, 4.1, 4.3],
            [4.5, 0.0, 0.5, 0.4],
            [4.1, 0.5, 0.0, 0.5],
            [4.3, 0.4, 0.5, 0.0],
        ]
    )

    def test_strict_less_ranks(self):
        R = rank_transform(self.M)
        expected = {0.0: 0.0, 0.4: 4 / 16, 0.5: 6 / 16, 4.1: 10 / 16, 4.3: 12 / 16, 4.5: 14 / 16}
        for v, r in expected.items():
            assert np.all(R[self.M == v] == r)

    def test_singleton(self):
        assert np.array_equal(rank_transform([[0.0]]), [[0.0]])

    def test_scale_invariance(self, rng):
        C = rng.random((6, 6))
        assert np.array_equal(rank_transform(C), rank_transform(3.0 * C))

    def test_entries_in_unit_interval(self, rng):
        R = rank_transform(rng.random((5, 5)))
        assert np.all(R >= 0) and np.all(R < 1)

    @settings(deadline=None, max_examples=40)
    @given(seed=st.integers(0, 10_000), shift=st.floats(0.1, 5.0))
    def test_monotone_transform_invariance(self, seed, shift):
        C = np.random.default_rng(seed).random((4, 4))
        assert np.array_equal(rank_transform(C), rank_transform(np.exp(shift * C)))

    def test_non_square_rejected(self):
        with pytest.raises(NonSquareError):
            rank_transform(np.zeros((2, 3)))
