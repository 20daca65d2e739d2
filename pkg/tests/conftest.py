"""Shared fixtures and reference oracles for the test suite."""

import numpy as np
import pytest

from anchorot import MMSet, validate_mmset


def random_mmset(rng, n, ties=False, weighted=True):
    """A random valid MMSet; ``ties`` draws integer costs so duplicated
    values (including the zero diagonal) are guaranteed."""
    if ties:
        costs = rng.integers(0, 6, size=(n, n)).astype(np.float64)
    else:
        costs = rng.random((n, n))
    np.fill_diagonal(costs, 0.0)
    if weighted:
        w = rng.random(n) + 0.05
        return validate_mmset(costs, w / w.sum())
    return validate_mmset(costs)


def symmetric_mmset(rng, n):
    """Uniform-weight MMSet with a symmetric zero-diagonal cost matrix."""
    A = rng.random((n, n))
    C = A + A.T
    np.fill_diagonal(C, 0.0)
    return validate_mmset(C)


def ot1d_reference(mu, nu, p):
    """Independent oracle for OT_p^p between two sorted 1D distributions.

    For p = 1 integrates |H_mu(x) - H_nu(x)| dx exactly over the merged
    atom-value breakpoints; for p = 2 integrates the squared quantile
    difference exactly over the merged cumulative-weight breakpoints.
    Both avoid the production kernel's two-pointer merge entirely.
    """
    if p == 1:
        xs = np.unique(np.concatenate((mu.values, nu.values)))
        total = 0.0
        for lo, hi in zip(xs[:-1], xs[1:]):
            hm = mu.weights[mu.values <= lo].sum()
            hn = nu.weights[nu.values <= lo].sum()
            total += (hi - lo) * abs(hm - hn)
        return total
    cm = np.cumsum(mu.weights)
    cn = np.cumsum(nu.weights)
    cuts = np.unique(np.concatenate(([0.0], cm, cn, [1.0])))
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo <= 0:
            continue
        u = 0.5 * (lo + hi)
        # cumulative sums can fall a few ulp short of 1.0; clamp the index
        qm = mu.values[min(np.searchsorted(cm, u, side="left"), len(cm) - 1)]
        qn = nu.values[min(np.searchsorted(cn, u, side="left"), len(cn) - 1)]
        total += (hi - lo) * (qm - qn) ** 2
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
