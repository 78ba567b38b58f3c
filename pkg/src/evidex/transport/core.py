"""Optimal-transport distances between nBOW documents.

emd_exact solves the transportation problem to optimality (simplex on the
bipartite transportation graph) and certifies the solution with dual
potentials. sinkhorn computes the entropically regularized coupling used
as a cheap prefilter; its reported distance is the transport cost
<plan, cost> of the coupling, not the regularized objective, so prefilter
scores are directly comparable with exact distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..embeddings import EmbeddingTable
from ..errors import SinkhornUnderflowError, TransportError
from ..textproc import Document
from . import _backend

_MARGINAL_SUM_TOL = 1e-6


@dataclass(frozen=True)
class CostMatrix:
    """Pairwise word costs between two document supports."""

    costs: np.ndarray

    def __post_init__(self):
        costs = np.ascontiguousarray(self.costs, dtype=np.float64)
        if costs.ndim != 2:
            raise TransportError("cost matrix must be 2-d")
        if not np.isfinite(costs).all() or (costs < 0).any():
            raise TransportError("cost entries must be finite and non-negative")
        costs.setflags(write=False)
        object.__setattr__(self, "costs", costs)

    @property
    def rows(self) -> int:
        return self.costs.shape[0]

    @property
    def cols(self) -> int:
        return self.costs.shape[1]


@dataclass(frozen=True)
class TransportPlan:
    """Coupling with its marginals; row sums match row_marginals, column
    sums match col_marginals (each within 1e-9)."""

    mass: np.ndarray
    row_marginals: np.ndarray
    col_marginals: np.ndarray


@dataclass(frozen=True)
class OTResult:
    """Solver output; iterations is 0 for the exact solver.

    potentials holds the dual variables (alpha, beta) of the exact solve,
    the certificate that reduced costs are non-negative; None for sinkhorn.
    """

    distance: float
    plan: TransportPlan
    iterations: int
    converged: bool
    potentials: tuple[np.ndarray, np.ndarray] | None = None


def cost_matrix(a: Document, b: Document, table: EmbeddingTable) -> CostMatrix:
    """Euclidean distances between the word vectors of the two supports."""
    try:
        va = table.rows(list(a.tokens))
        vb = table.rows(list(b.tokens))
    except KeyError as exc:
        raise TransportError(
            f"document token {exc.args[0]!r} missing from the embedding table"
        ) from None
    costs = np.empty((len(a.tokens), len(b.tokens)))
    # Difference-first form: no cancellation, and identical vectors give an
    # exact zero. Chunked so huge supports do not blow up memory.
    chunk = max(1, int(4e7 / max(1, vb.size)))
    for start in range(0, va.shape[0], chunk):
        d = va[start : start + chunk, None, :] - vb[None, :, :]
        costs[start : start + chunk] = np.sqrt((d * d).sum(axis=2))
    return CostMatrix(costs)


def _as_weights(w, side: str) -> np.ndarray:
    w = np.ascontiguousarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise TransportError(f"{side} weights must be a non-empty vector")
    if not np.isfinite(w).all() or (w <= 0).any():
        raise TransportError(f"{side} weights must be strictly positive")
    return w


def _check_inputs(wa, wb, c: CostMatrix):
    if (c.rows, c.cols) != (wa.size, wb.size):
        raise TransportError(
            f"dimension mismatch: cost is {c.rows}x{c.cols}, "
            f"weights are {wa.size} and {wb.size}"
        )
    if abs(wa.sum() - wb.sum()) > _MARGINAL_SUM_TOL:
        raise TransportError(
            f"marginal sums differ by more than {_MARGINAL_SUM_TOL}: "
            f"{wa.sum()} vs {wb.sum()}"
        )


def _coerce_cost(c) -> CostMatrix:
    return c if isinstance(c, CostMatrix) else CostMatrix(np.asarray(c))


def emd_exact(wa, wb, c, *, kernels=None) -> OTResult:
    """Exact minimum-cost transport between weight vectors wa and wb.

    The returned plan is an optimal basic solution; potentials certify
    optimality (reduced costs >= 0 up to float noise, equality on the
    plan's support).
    """
    c = _coerce_cost(c)
    wa = _as_weights(wa, "row")
    wb = _as_weights(wb, "column")
    _check_inputs(wa, wb, c)
    # Balance exactly so the staircase initialization closes.
    wb = wb * (wa.sum() / wb.sum())
    impl = kernels or _backend.kernels()
    plan, u, v, _pivots, status = impl.emd_kernel(wa, wb, c.costs)
    if status != impl.STATUS_OK:
        raise TransportError("exact solver exceeded its pivot limit")
    distance = float((plan * c.costs).sum())
    return OTResult(
        distance=distance,
        plan=TransportPlan(mass=plan, row_marginals=wa, col_marginals=wb),
        iterations=0,
        converged=True,
        potentials=(u, v),
    )


def _round_to_feasible(P, a, b):
    """Project a near-feasible coupling onto the marginal polytope.

    Scale rows then columns down to their targets and spread the leftover
    mass as a rank-one correction; the result satisfies both marginals to
    float precision, so its cost can never undercut the exact optimum.
    """
    r = P.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        sr = np.where(r > 0, np.minimum(a / r, 1.0), 1.0)
    P = P * sr[:, None]
    col = P.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        sc = np.where(col > 0, np.minimum(b / col, 1.0), 1.0)
    P = P * sc[None, :]
    ea = np.maximum(a - P.sum(axis=1), 0.0)
    eb = np.maximum(b - P.sum(axis=0), 0.0)
    s = ea.sum()
    if s > 0 and eb.sum() > 0:
        P = P + np.outer(ea, eb) / eb.sum()
    return P


def sinkhorn(
    wa,
    wb,
    c,
    epsilon: float,
    tol: float = 1e-6,
    max_iter: int = 10000,
    *,
    log_domain: bool = True,
    kernels=None,
) -> OTResult:
    """Entropically regularized transport via alternating marginal scaling.

    epsilon is the absolute regularization strength (callers typically
    derive it from the cost median, see epsilon_for). converged reports
    whether both L1 marginal violations fell below tol within max_iter.
    """
    c = _coerce_cost(c)
    wa = _as_weights(wa, "row")
    wb = _as_weights(wb, "column")
    _check_inputs(wa, wb, c)
    if not epsilon > 0:
        raise TransportError("epsilon must be positive")
    if not tol > 0:
        raise TransportError("tol must be positive")
    wb = wb * (wa.sum() / wb.sum())
    impl = kernels or _backend.kernels()
    if log_domain:
        P, iters, converged = impl.sinkhorn_log_kernel(
            wa, wb, c.costs, epsilon, tol, max_iter
        )
    else:
        P, iters, converged, status = impl.sinkhorn_plain_kernel(
            wa, wb, c.costs, epsilon, tol, max_iter
        )
        if status == impl.STATUS_UNDERFLOW:
            raise SinkhornUnderflowError(
                "kernel exp(-c/epsilon) underflowed; increase epsilon "
                "or use log-domain mode"
            )
    P = _round_to_feasible(np.asarray(P), wa, wb)
    distance = float((P * c.costs).sum())
    return OTResult(
        distance=distance,
        plan=TransportPlan(mass=P, row_marginals=wa, col_marginals=wb),
        iterations=iters,
        converged=converged,
        potentials=None,
    )


def epsilon_for(c, rel: float) -> float:
    """Scale-free regularization: rel times the median cost entry.

    Falls back to the mean, then to rel itself, when the median vanishes
    (e.g. documents sharing most of their support).
    """
    c = _coerce_cost(c)
    base = float(np.median(c.costs))
    if base <= 0:
        base = float(c.costs.mean())
    if base <= 0:
        return rel
    return rel * base


def wmd(a: Document, b: Document, table: EmbeddingTable) -> float:
    """Word Mover's Distance: exact minimum transport cost between the
    documents' nBOW weights with Euclidean word costs."""
    return emd_exact(a.weights, b.weights, cost_matrix(a, b, table)).distance


def wrd(a: Document, b: Document, table: EmbeddingTable) -> float:
    """Word Rotator's Distance: vector norms carry the mass, angular
    dissimilarity (1 - cosine) carries the cost."""
    va = table.rows(list(a.tokens))
    vb = table.rows(list(b.tokens))
    na = np.sqrt((va * va).sum(axis=1))
    nb = np.sqrt((vb * vb).sum(axis=1))
    for tokens, norms in ((a.tokens, na), (b.tokens, nb)):
        if (norms == 0).any():
            bad = tokens[int(np.argmin(norms))]
            raise TransportError(f"zero-norm vector for token {bad!r}")
    ma = a.weights * na
    mb = b.weights * nb
    ma = ma / ma.sum()
    mb = mb / mb.sum()
    ua = va / na[:, None]
    ub = vb / nb[:, None]
    # 1 - cos(u, v) = |u - v|^2 / 2 on unit vectors; the difference-first
    # form is cancellation-free, so parallel vectors cost exactly zero.
    diff = ua[:, None, :] - ub[None, :, :]
    costs = 0.5 * (diff * diff).sum(axis=2)
    return emd_exact(ma, mb, CostMatrix(costs)).distance
