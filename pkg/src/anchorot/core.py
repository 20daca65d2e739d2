"""Domain types, 1D optimal transport and anchor feature construction.

An MMSet is a probability vector over n points together with an n x n
pairwise cost matrix.  Each point is represented by its *anchor feature*:
the 1D distribution of its weighted costs to every point of the set, so an
MMSet becomes a weighted family of 1D empirical distributions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    InvalidExponentError,
    NegativeWeightError,
    NonFiniteError,
    NonSquareError,
    WeightSumError,
)

WEIGHT_REPAIR_TOL = 1e-9  # larger drifts are rejected, smaller ones renormalized
WEIGHT_SUM_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


def _check_weights(weights: np.ndarray, n: int, what: str) -> np.ndarray:
    if weights.ndim != 1 or weights.shape[0] != n:
        raise WeightSumError(f"{what}: expected {n} weights, got shape {weights.shape}")
    if not np.all(np.isfinite(weights)):
        raise NonFiniteError(f"{what}: weights contain NaN or infinity")
    if np.any(weights < 0):
        raise NegativeWeightError(f"{what}: negative weight {weights.min()}")
    total = weights.sum()
    if abs(total - 1.0) > WEIGHT_REPAIR_TOL:
        raise WeightSumError(f"{what}: weights sum to {total}, beyond repair tolerance")
    return weights / total


@dataclass(frozen=True)
class MMSet:
    """A weight vector on n points plus their n x n pairwise cost matrix.

    Immutable after construction; build through :func:`validate_mmset`.
    """

    weights: np.ndarray
    costs: np.ndarray

    @property
    def n(self) -> int:
        return self.weights.shape[0]


def validate_mmset(costs, weights=None) -> MMSet:
    """Validate raw arrays into an MMSet.

    Absent weights default to uniform.  Weight vectors off unit mass by at
    most 1e-9 are renormalized; larger deviations raise
    :class:`WeightSumError` rather than silently corrupting user data.
    """
    costs = np.asarray(costs, dtype=np.float64)
    if costs.ndim != 2 or costs.shape[0] != costs.shape[1]:
        raise NonSquareError(f"cost matrix has shape {costs.shape}")
    if costs.shape[0] < 1:
        raise NonSquareError("cost matrix is empty")
    if not np.all(np.isfinite(costs)):
        raise NonFiniteError("cost matrix contains NaN or infinity")
    n = costs.shape[0]
    if weights is None:
        weights = np.full(n, 1.0 / n)
    else:
        weights = _check_weights(np.asarray(weights, dtype=np.float64), n, "weights")
    return MMSet(weights=_frozen(weights), costs=_frozen(costs))


@dataclass(frozen=True)
class Dist1D:
    """A weighted 1D empirical distribution with atoms sorted ascending.

    Ties in atom values keep the original atom order, so every downstream
    coupling is deterministic.
    """

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        weights = _check_weights(weights, values.shape[0], "atom weights")
        order = np.argsort(values, kind="stable")
        object.__setattr__(self, "values", _frozen(values[order]))
        object.__setattr__(self, "weights", _frozen(weights[order]))

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class AnchorFamily:
    """A weighted family of weighted 1D distributions, stored CSR-style.

    ``atom_values[offsets[i]:offsets[i+1]]`` are the sorted atom values of
    anchor ``i``; ``atom_weights`` holds the matching masses.
    """

    anchor_weights: np.ndarray
    atom_values: np.ndarray
    atom_weights: np.ndarray
    offsets: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.anchor_weights.shape[0]

    def anchor(self, i: int) -> Dist1D:
        lo, hi = self.offsets[i], self.offsets[i + 1]
        return Dist1D(self.atom_values[lo:hi], self.atom_weights[lo:hi])

    @classmethod
    def from_distributions(cls, dists, anchor_weights=None) -> "AnchorFamily":
        dists = [d if isinstance(d, Dist1D) else Dist1D(*d) for d in dists]
        sizes = np.array([len(d) for d in dists], dtype=np.int64)
        offsets = np.zeros(len(dists) + 1, dtype=np.int64)
        np.cumsum(sizes, out=offsets[1:])
        if anchor_weights is None:
            anchor_weights = np.full(len(dists), 1.0 / len(dists))
        else:
            anchor_weights = _check_weights(
                np.asarray(anchor_weights, dtype=np.float64), len(dists), "anchor weights"
            )
        values = np.concatenate([d.values for d in dists])
        weights = np.concatenate([d.weights for d in dists])
        offsets.flags.writeable = False
        return cls(_frozen(anchor_weights), _frozen(values), _frozen(weights), offsets)


def anchor_family(S: MMSet) -> AnchorFamily:
    """Anchor feature of an MMSet: anchor i is row i of the cost matrix,
    weighted by the point masses and sorted by value."""
    n = S.n
    order = np.argsort(S.costs, axis=1, kind="stable")
    values = np.take_along_axis(S.costs, order, axis=1).reshape(-1)
    weights = S.weights[order].reshape(-1)
    offsets = np.arange(0, n * n + 1, n, dtype=np.int64)
    offsets.flags.writeable = False
    return AnchorFamily(S.weights, _frozen(values), _frozen(weights), offsets)


def _check_exponent(p) -> int:
    if not isinstance(p, (int, np.integer)) or p < 1:
        raise InvalidExponentError(f"exponent must be a positive integer, got {p!r}")
    if p > 2:
        raise InvalidExponentError("only p in {1, 2} is supported")
    return int(p)


def ot1d(mu: Dist1D, nu: Dist1D, p: int = 1) -> float:
    """Exact OT_p^p between two 1D distributions.

    Equals the integral of |quantile difference|^p over [0, 1], evaluated
    by a two-pointer merge of the sorted atom lists in O(k1 + k2) steps.
    """
    p = _check_exponent(p)
    if not isinstance(mu, Dist1D):
        mu = Dist1D(*mu)
    if not isinstance(nu, Dist1D):
        nu = Dist1D(*nu)
    return float(_kernels.ot1d_pp(mu.values, mu.weights, nu.values, nu.weights, p))


def rank_transform(costs) -> np.ndarray:
    """Replace each cost entry by its strict-less normalized rank.

    Entry (i, j) becomes #{(k, l) : C_kl < C_ij} / n^2, so tied entries
    share a rank and the output is invariant under any strictly increasing
    transform of the cost values.
    """
    costs = np.asarray(costs, dtype=np.float64)
    if costs.ndim != 2 or costs.shape[0] != costs.shape[1]:
        raise NonSquareError(f"cost matrix has shape {costs.shape}")
    if not np.all(np.isfinite(costs)):
        raise NonFiniteError("cost matrix contains NaN or infinity")
    n = costs.shape[0]
    flat = costs.reshape(-1)
    ranks = np.searchsorted(np.sort(flat), flat, side="left")
    return (ranks / (n * n)).reshape(n, n)
