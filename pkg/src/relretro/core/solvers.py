"""Synchronous solvers: the convex objective (RO), the normalised series (RN)
and the Faruqui baseline (MF)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from relretro.core.objective import RelationalOperator, compute_centroids, compute_loss
from relretro.core.params import ParamSet, RetrofitConfig
from relretro.relations import RelationGroup

log = logging.getLogger(__name__)

DEGENERATE_NORM = 1e-12


class SolverError(RuntimeError):
    pass


@dataclass
class RetrofitResult:
    W: np.ndarray
    loss_trace: list[float] = field(default_factory=list)  # loss_trace[k] is the loss after k steps
    iterations_run: int = 0
    converged: bool = False
    degenerate: np.ndarray | None = None  # RN rows whose combination vanished


def _max_change(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(A - B, axis=1))) if len(A) else 0.0


def _check_finite(W: np.ndarray, k: int) -> None:
    if not np.all(np.isfinite(W)):
        raise SolverError(f"non-finite value at iteration {k}")


def _ro_setup(W0, params, categories, groups):
    op = RelationalOperator(params, groups)
    denom = op.denominator()
    bad = np.flatnonzero(denom <= 0)
    if len(bad):
        raise SolverError(f"non-positive update denominator {denom[bad[0]]:.6g} for term {bad[0]}")
    return op, denom, compute_centroids(W0, categories)


def retrofit_ro(W0: np.ndarray, params: ParamSet, categories, groups: Sequence[RelationGroup],
                config: RetrofitConfig, W_init: np.ndarray | None = None) -> RetrofitResult:
    """Jacobi iteration ``W <- D^-1 (alpha W0 + beta c + W_R)`` on the convex loss."""
    W0 = np.asarray(W0, dtype=np.float64)
    op, denom, c = _ro_setup(W0, params, categories, groups)
    W = W0.copy() if W_init is None else np.array(W_init, dtype=np.float64)
    trace = [compute_loss(W, W0, params, categories, groups, c)]
    base = op.anchor(W0, c)
    converged = False
    k = 0
    for k in range(1, config.iterations + 1):
        W_new = op.numerator(W, W0, c, base)
        W_new /= denom[:, None]
        _check_finite(W_new, k)
        change = _max_change(W_new, W)
        W = W_new
        trace.append(compute_loss(W, W0, params, categories, groups, c))
        if config.convergence_tolerance > 0 and change < config.convergence_tolerance:
            converged = True
            break
    return RetrofitResult(W, trace, k, converged)


def retrofit_rn(W0: np.ndarray, params: ParamSet, categories, groups: Sequence[RelationGroup],
                config: RetrofitConfig) -> RetrofitResult:
    """Normalised series: every row of the combination is scaled to unit length.

    Rows whose combination has norm below ``DEGENERATE_NORM`` keep their
    previous value and are flagged in ``RetrofitResult.degenerate``.
    """
    W0 = np.asarray(W0, dtype=np.float64)
    op = RelationalOperator(params, groups)
    c = compute_centroids(W0, categories)
    base = op.anchor(W0, c)
    W = W0.copy()
    degenerate = np.zeros(len(W), dtype=bool)
    converged = False
    k = 0
    for k in range(1, config.iterations + 1):
        W_new = op.rn_combination(W, W0, c, base)
        _check_finite(W_new, k)
        norms = np.sqrt(np.einsum("ij,ij->i", W_new, W_new))
        degenerate = norms < DEGENERATE_NORM
        if degenerate.any():
            norms[degenerate] = 1.0
            W_new[degenerate] = W[degenerate]
        W_new /= norms[:, None]
        stop = config.convergence_tolerance > 0 and _max_change(W_new, W) < config.convergence_tolerance
        W = W_new
        if stop:
            converged = True
            break
    if degenerate.any():
        log.warning("%d rows had a vanishing series combination and were left unchanged", degenerate.sum())
    return RetrofitResult(W, [], k, converged, degenerate)


def faruqui_loss(W: np.ndarray, W0: np.ndarray, lexicon_edges: np.ndarray, alpha: np.ndarray, beta: np.ndarray) -> float:
    loss = float(np.sum(alpha * np.sum((W - W0) ** 2, axis=1)))
    if len(lexicon_edges):
        i, j = lexicon_edges[:, 0], lexicon_edges[:, 1]
        loss += float(np.sum(beta[i] * np.sum((W[i] - W[j]) ** 2, axis=1)))
    return loss


def mf_weights(n: int, lexicon_edges: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """alpha_i = 1 and beta_i = 1 / outdegree(i); returns ``(alpha, beta, outdegree)``."""
    deg = np.bincount(lexicon_edges[:, 0], minlength=n) if len(lexicon_edges) else np.zeros(n, dtype=np.int64)
    beta = np.zeros(n)
    beta[deg > 0] = 1.0 / deg[deg > 0]
    return np.ones(n), beta, deg


def symmetric_edges(groups: Sequence[RelationGroup]) -> np.ndarray:
    """Union of all relation edges in both directions, duplicate free."""
    parts = [g.edges for g in groups if len(g)]
    if not parts:
        return np.empty((0, 2), dtype=np.int64)
    e = np.concatenate(parts)
    return np.unique(np.concatenate([e, e[:, ::-1]]), axis=0)


def retrofit_mf(W0: np.ndarray, lexicon_edges: np.ndarray, config: RetrofitConfig) -> RetrofitResult:
    """Simplified Faruqui update ``v_i = (a_i v'_i + sum_j b_i v_j) / (a_i + sum_j b_i)``.

    All rows are updated from the previous iterate.  Isolated terms keep
    their initial vector.
    """
    W0 = np.asarray(W0, dtype=np.float64)
    n = len(W0)
    E = np.asarray(lexicon_edges, dtype=np.int64).reshape(-1, 2)
    if len(E):
        rev = {(int(a), int(b)) for a, b in E}
        if any((b, a) not in rev for a, b in rev):
            raise ValueError("lexicon edges must be symmetric")
    alpha, beta, deg = mf_weights(n, E)
    denom = alpha + beta * deg
    W = W0.copy()
    trace = [faruqui_loss(W, W0, E, alpha, beta)]
    converged = False
    k = 0
    for k in range(1, config.iterations + 1):
        nb = np.zeros_like(W)
        if len(E):
            np.add.at(nb, E[:, 0], W[E[:, 1]])
        W_new = (alpha[:, None] * W0 + beta[:, None] * nb) / denom[:, None]
        _check_finite(W_new, k)
        change = _max_change(W_new, W)
        W = W_new
        trace.append(faruqui_loss(W, W0, E, alpha, beta))
        if config.convergence_tolerance > 0 and change < config.convergence_tolerance:
            converged = True
            break
    return RetrofitResult(W, trace, k, converged)


def sequential_update_ro(W: np.ndarray, i: int, W0: np.ndarray, params: ParamSet, categories,
                         groups: Sequence[RelationGroup], centroids: np.ndarray | None = None,
                         operator: RelationalOperator | None = None) -> np.ndarray:
    """Set row ``i`` of ``W`` (in place) to the exact minimiser of the loss in ``v_i``.

    Returns ``W``.  ``operator`` and ``centroids`` can be passed to avoid
    rebuilding them on every call.
    """
    op = operator or RelationalOperator(params, groups)
    c = compute_centroids(W0, categories) if centroids is None else centroids
    d = op.denominator()[i]
    if d <= 0:
        raise SolverError(f"non-positive update denominator {d:.6g} for term {i}")
    W[i] = op.numerator(W, W0, c)[i] / d
    return W
