"""Entropic transport solvers: log-domain Sinkhorn, the anchor Wasserstein
distance, anchor energy plans, and an entropic Gromov-Wasserstein baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import AnchorFamily, MMSet, _check_exponent, anchor_family
from .errors import NonFiniteError

__all__ = [
    "SolverConfig",
    "TransportPlan",
    "SinkhornResult",
    "AWResult",
    "GWResult",
    "sinkhorn_log",
    "anchor_wasserstein",
    "aep",
    "entropic_gw",
    "anchor_cost_matrix",
]

MARGINAL_TOL = 1e-7


@dataclass(frozen=True)
class SolverConfig:
    """Regularization and stopping parameters for the entropic solvers."""

    epsilon: float
    rel_tol: float = 1e-6
    max_iter: int = 10000
    outer_max_iter: int = 200

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")


@dataclass(frozen=True)
class TransportPlan:
    """A nonnegative coupling with prescribed marginals."""

    matrix: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray

    def marginal_residual(self) -> float:
        row = np.abs(self.matrix.sum(axis=1) - self.row_marginal).max()
        col = np.abs(self.matrix.sum(axis=0) - self.col_marginal).max()
        return float(max(row, col))


@dataclass(frozen=True)
class SinkhornResult:
    plan: TransportPlan
    transport_cost: float
    regularized_objective: float
    iterations: int
    converged: bool
    potentials: tuple = field(repr=False, default=None)


def _entropy(P: np.ndarray) -> float:
    mask = P > 0
    return float(-(P[mask] * (np.log(P[mask]) - 1.0)).sum())


def sinkhorn_log(cost, a, b, cfg: SolverConfig, init_potentials=None) -> SinkhornResult:
    """Entropic OT by alternating log-domain potential updates.

    Stops when the relative L1 change of the plan between sweeps drops
    below ``cfg.rel_tol`` and the marginals are tight; hitting
    ``cfg.max_iter`` first returns the last plan with ``converged=False``
    instead of discarding work.
    """
    M = np.ascontiguousarray(cost, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise NonFiniteError("cost matrix contains NaN or infinity")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    eps = cfg.epsilon
    with np.errstate(divide="ignore"):
        loga = np.log(a)
        logb = np.log(b)
    if init_potentials is not None:
        f, g = (np.array(p, dtype=np.float64) for p in init_potentials)
    else:
        f = np.zeros_like(a)
        g = np.zeros_like(b)

    P = np.zeros_like(M)
    it, converged = _kernels.sinkhorn_iterate(
        M, loga, logb, b, eps, cfg.rel_tol, MARGINAL_TOL / 10, cfg.max_iter, f, g, P
    )
    transport_cost = float((P * M).sum())
    reg_obj = transport_cost - eps * _entropy(P)
    plan = TransportPlan(P, a, b)
    return SinkhornResult(plan, transport_cost, reg_obj, it, converged, (f, g))


def anchor_cost_matrix(F1: AnchorFamily, F2: AnchorFamily, p: int = 1) -> np.ndarray:
    """All-pairs OT_p^p between the anchors of two families."""
    p = _check_exponent(p)
    out = np.empty((F1.size, F2.size))
    _kernels.pairwise_ot1d(
        F1.offsets, F1.atom_values, F1.atom_weights,
        F2.offsets, F2.atom_values, F2.atom_weights,
        p, out,
    )
    return out


@dataclass(frozen=True)
class AWResult:
    distance_cost: float
    regularized_objective: float
    plan: TransportPlan
    iterations: int
    converged: bool


def anchor_wasserstein(S1: MMSet, S2: MMSet, p: int, cfg: SolverConfig) -> AWResult:
    """Entropic OT between the anchor families with 1D Wasserstein ground
    cost.  Reports both the plain transport cost and the regularized
    objective; comparisons should use the former."""
    F1 = anchor_family(S1)
    F2 = anchor_family(S2)
    M = anchor_cost_matrix(F1, F2, p)
    res = sinkhorn_log(M, S1.weights, S2.weights, cfg)
    return AWResult(
        res.transport_cost, res.regularized_objective, res.plan, res.iterations, res.converged
    )


def aep(S1: MMSet, S2: MMSet, p: int = 1) -> TransportPlan:
    """Anchor energy plan: the a1_i * a2_j weighted average of the monotone
    local couplings between every anchor pair, scattered back to original
    point indices.  Always lies in U(a1, a2)."""
    _check_exponent(p)
    order1 = np.argsort(S1.costs, axis=1, kind="stable")
    order2 = np.argsort(S2.costs, axis=1, kind="stable")
    plan = np.zeros((S1.n, S2.n))
    _kernels.aep_accumulate(S1.weights, S2.weights, order1, order2, plan)
    return TransportPlan(plan, S1.weights, S2.weights)


@dataclass(frozen=True)
class GWResult:
    gw_objective: float
    plan: TransportPlan
    outer_iterations: int
    converged: bool


def entropic_gw(S1: MMSet, S2: MMSet, cfg: SolverConfig) -> GWResult:
    """Entropic Gromov-Wasserstein with squared loss.

    Alternates between linearizing the quadratic objective at the current
    plan (via the squared-loss decomposition) and a log-domain Sinkhorn
    solve, warm-starting the inner potentials.  Stops when the relative
    change of either the plan or the objective falls below ``cfg.rel_tol``.
    """
    C1 = S1.costs
    C2 = S2.costs
    a = S1.weights
    b = S2.weights
    const = np.add.outer((C1 * C1) @ a, (C2 * C2) @ b)

    def objective(P):
        return float(((const - 2.0 * C1 @ P @ C2.T) * P).sum())

    P = np.outer(a, b)
    obj = objective(P)
    best_P, best_obj = P, obj
    potentials = None
    converged = False
    it = 0
    for it in range(1, cfg.outer_max_iter + 1):
        local_cost = const - 2.0 * C1 @ P @ C2.T
        inner = sinkhorn_log(local_cost, a, b, cfg, init_potentials=potentials)
        potentials = inner.potentials
        P_new = inner.plan.matrix
        obj_new = objective(P_new)
        rel_plan = np.abs(P_new - P).sum() / max(1.0, np.abs(P).sum())
        rel_obj = abs(obj_new - obj) / max(1.0, abs(obj))
        P, obj = P_new, obj_new
        if obj < best_obj:
            best_P, best_obj = P, obj
        if rel_plan < cfg.rel_tol or rel_obj < cfg.rel_tol:
            converged = True
            break
    if not converged:
        P, obj = best_P, best_obj
    return GWResult(obj, TransportPlan(P, a, b), it, converged)
