"""The relational retrofitting objective and its linear structure.

Setting the gradient of the loss to zero gives, for every term ``i``::

    D_i v_i = alpha_i v'_i + beta_i c_i + (L_gamma W)_i - (L_delta W)_i

where ``L_gamma`` collects the symmetrised attraction weights on related
pairs and ``L_delta`` the symmetrised repulsion weights on unrelated pairs
inside a relation group.  ``L_delta`` is applied without ever listing the
unrelated pairs: per group, the sum over all targets minus the sum over a
term's actual neighbours (and minus the term itself when it is also a target).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp

from relretro.core.params import ParamSet, directed_groups
from relretro.relations import RelationGroup, inverse_label


def _members(category) -> Sequence[int]:
    return getattr(category, "members", category)


def compute_centroids(W0: np.ndarray, categories) -> np.ndarray:
    """Row i is the mean of the initial vectors of i's category (i included)."""
    c = np.zeros_like(W0, dtype=np.float64)
    for cat in categories:
        idx = np.asarray(_members(cat), dtype=np.int64)
        if len(idx):
            c[idx] = W0[idx].mean(axis=0)
    return c


def _weighted_adjacency(n: int, directed: Sequence[RelationGroup], weights: dict[str, np.ndarray]) -> sp.csr_matrix:
    """Sparse matrix with ``weights[g][i]`` at every edge ``(i, j)`` of every group ``g``."""
    rows, cols, vals = [], [], []
    for g in directed:
        if len(g):
            rows.append(g.edges[:, 0])
            cols.append(g.edges[:, 1])
            vals.append(weights[g.label][g.edges[:, 0]])
    if not rows:
        return sp.csr_matrix((n, n))
    m = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return m.tocsr()  # sums duplicates in a fixed order


class RelationalOperator:
    """Applies the attraction and repulsion parts of the stationarity system.

    ``gamma_sym`` is ``G + G^T`` with ``G`` holding ``gamma_i^r`` at related
    pairs; ``delta_apply`` evaluates ``sum_{(i,k) in E~_r} (delta_i^r + delta_k^rbar) W_k``.
    """

    def __init__(self, params: ParamSet, groups: Sequence[RelationGroup]):
        n = params.n
        self.n = n
        self.params = params
        self.directed = directed_groups(groups)
        G = _weighted_adjacency(n, self.directed, params.gamma)
        self.gamma_one = G  # one-sided weights, used by the RN series
        self.gamma_sym = (G + G.T).tocsr()
        Dl = _weighted_adjacency(n, self.directed, params.delta)
        self.delta_sym = (Dl + Dl.T).tocsr()

        ng = len(self.directed)
        # per-group source weights, source masks and target weight rows
        self.src_delta = np.zeros((n, ng))
        self.src_mask = np.zeros((n, ng))
        tgt_rows, tgt_cols, tgt_w = [], [], []
        self.self_delta = np.zeros(n)
        for col, g in enumerate(self.directed):
            d = params.delta[g.label]
            dbar = params.delta[inverse_label(g.label)]
            src, tgt = g.sources, g.targets
            self.src_delta[src, col] = d[src]
            self.src_mask[src, col] = 1.0
            tgt_rows.append(np.full(len(tgt), col))
            tgt_cols.append(tgt)
            tgt_w.append(dbar[tgt])
            both = np.intersect1d(src, tgt)
            self.self_delta[both] += d[both] + dbar[both]
        if ng:
            r, c, w = np.concatenate(tgt_rows), np.concatenate(tgt_cols), np.concatenate(tgt_w)
        else:
            r = c = np.empty(0, dtype=np.int64)
            w = np.empty(0)
        self.target_ind = sp.csr_matrix((np.ones(len(r)), (r, c)), shape=(ng, n))
        self.target_delta = sp.csr_matrix((w, (r, c)), shape=(ng, n))

    def gamma_apply(self, W: np.ndarray) -> np.ndarray:
        return self.gamma_sym @ W

    def delta_apply(self, W: np.ndarray) -> np.ndarray:
        total = self.src_delta @ (self.target_ind @ W) + self.src_mask @ (self.target_delta @ W)
        return total - self.delta_sym @ W - self.self_delta[:, None] * W

    def denominator(self) -> np.ndarray:
        ones = np.ones((self.n, 1))
        p = self.params
        return p.alpha + p.beta + (self.gamma_apply(ones) - self.delta_apply(ones))[:, 0]

    def anchor(self, W0: np.ndarray, centroids: np.ndarray) -> np.ndarray:
        """The constant part ``alpha W0 + beta c`` shared by both update rules."""
        p = self.params
        return p.alpha[:, None] * W0 + p.beta[:, None] * centroids

    def numerator(self, W: np.ndarray, W0: np.ndarray, centroids: np.ndarray,
                  anchor: np.ndarray | None = None) -> np.ndarray:
        base = self.anchor(W0, centroids) if anchor is None else anchor
        out = self.gamma_apply(W)
        out -= self.delta_apply(W)
        out += base
        return out

    def rn_combination(self, W: np.ndarray, W0: np.ndarray, centroids: np.ndarray,
                       anchor: np.ndarray | None = None) -> np.ndarray:
        """Un-normalised series step: one-sided gamma, delta times the full target sum."""
        base = self.anchor(W0, centroids) if anchor is None else anchor
        out = self.gamma_one @ W
        out -= self.src_delta @ (self.target_ind @ W)
        out += base
        return out


def compute_loss(W: np.ndarray, W0: np.ndarray, params: ParamSet, categories, groups: Sequence[RelationGroup],
                 centroids: np.ndarray | None = None) -> float:
    """Value of the relational retrofitting loss at ``W``."""
    if centroids is None:
        centroids = compute_centroids(W0, categories)
    loss = float(np.sum(params.alpha * np.sum((W - W0) ** 2, axis=1)))
    loss += float(np.sum(params.beta * np.sum((W - centroids) ** 2, axis=1)))
    sq = np.sum(W * W, axis=1)
    for g in directed_groups(groups):
        if not len(g):
            continue
        i, j = g.edges[:, 0], g.edges[:, 1]
        pair_sq = np.sum((W[i] - W[j]) ** 2, axis=1)
        loss += float(np.sum(params.gamma[g.label][i] * pair_sq))

        d = params.delta[g.label]
        src, tgt = g.sources, g.targets
        S = W[tgt].sum(axis=0)
        Q = sq[tgt].sum()
        # sum over all targets k of ||v_i - v_k||^2, then drop the related ones
        to_all = len(tgt) * sq[src] - 2.0 * (W[src] @ S) + Q
        loss -= float(np.sum(d[src] * to_all))
        loss += float(np.sum(d[i] * pair_sq))
    return loss


def loss_gradient(W: np.ndarray, W0: np.ndarray, params: ParamSet, categories, groups: Sequence[RelationGroup],
                  centroids: np.ndarray | None = None) -> np.ndarray:
    """Analytic gradient: ``2 (D_i v_i - numerator_i)`` row by row."""
    if centroids is None:
        centroids = compute_centroids(W0, categories)
    op = RelationalOperator(params, groups)
    return 2.0 * (op.denominator()[:, None] * W - op.numerator(W, W0, centroids))


def assemble_hessian(params: ParamSet, groups: Sequence[RelationGroup], dim: int, part: str = "hat") -> np.ndarray:
    """Dense Hessian over the flattened ``W`` (index ``i * dim + d``).

    ``part="hat"`` keeps only the anchor and repulsion terms (the part whose
    convexity is in question); ``part="full"`` adds category and attraction terms.
    Unrelated pairs are enumerated explicitly, so use on small instances only.
    """
    n = params.n
    M = np.diag(params.alpha.astype(float).copy())
    directed = directed_groups(groups)
    for g in directed:
        d = params.delta[g.label]
        related = {(int(a), int(b)) for a, b in g.edges}
        for i in g.sources:
            for k in g.targets:
                if i == k or (int(i), int(k)) in related:
                    continue
                # -d_i ||v_i - v_k||^2
                M[i, i] -= d[i]
                M[k, k] -= d[i]
                M[i, k] += d[i]
                M[k, i] += d[i]
        if part == "full":
            gam = params.gamma[g.label]
            for i, j in g.edges:
                M[i, i] += gam[i]
                M[j, j] += gam[i]
                M[i, j] -= gam[i]
                M[j, i] -= gam[i]
    if part == "full":
        M[np.diag_indices(n)] += params.beta
    elif part != "hat":
        raise ValueError(f"unknown part {part!r}")
    return 2.0 * np.kron(M, np.eye(dim))
