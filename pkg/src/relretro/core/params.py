"""Solver configuration and per-term coefficient derivation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from relretro.relations import RelationGroup

MODES = ("MF", "RO", "RN")


@dataclass(frozen=True)
class RetrofitConfig:
    """Four global weights plus iteration control.

    ``convergence_tolerance`` of 0 runs exactly ``iterations`` steps.
    """

    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 3.0
    delta: float = 1.0
    iterations: int = 20
    mode: str = "RN"
    convergence_tolerance: float = 0.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ValueError("iterations must be a positive integer")
        for name in ("alpha", "beta", "gamma", "delta", "convergence_tolerance"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v}")

    @classmethod
    def published_defaults(cls, mode: str, **overrides) -> RetrofitConfig:
        """Weights used for the downstream experiments: delta=3 for RO, delta=1 otherwise."""
        base = dict(alpha=1.0, beta=0.0, gamma=3.0, delta=3.0 if mode == "RO" else 1.0, mode=mode)
        base.update(overrides)
        return cls(**base)


def directed_groups(groups: Sequence[RelationGroup]) -> list[RelationGroup]:
    """Each group followed by its inversion; the solver sums over both."""
    out = []
    for g in groups:
        out.append(g)
        out.append(g.inverted())
    return out


@dataclass(frozen=True)
class ParamSet:
    """Per-term coefficients.  Dict-valued fields are keyed by directed label."""

    mode: str
    alpha: np.ndarray
    beta: np.ndarray
    n_relations: np.ndarray
    gamma: dict[str, np.ndarray]
    delta: dict[str, np.ndarray]
    outdegree: dict[str, np.ndarray]
    mc: dict[str, int]
    mr: dict[str, int]

    @property
    def n(self) -> int:
        return len(self.alpha)


def count_relations(n: int, directed: Sequence[RelationGroup]) -> np.ndarray:
    """|R_i|: number of directed groups in which term i is a source."""
    R = np.zeros(n, dtype=np.int64)
    for g in directed:
        R[g.sources] += 1
    return R


def derive_params(config: RetrofitConfig, n_terms: int, groups: Sequence[RelationGroup]) -> ParamSet:
    """Expand the global weights into per-term, per-group coefficients.

    gamma is split over a term's out-edges and its relation count; delta is
    either normalised by group size and relation count (RO, keeps the
    repulsive term small) or by target count (RN).
    """
    n = n_terms
    directed = directed_groups(groups)
    R = count_relations(n, directed)
    share = 1.0 / (R + 1)

    gamma, delta, od, mc, mr = {}, {}, {}, {}, {}
    for g in directed:
        deg = np.bincount(g.edges[:, 0], minlength=n)
        od[g.label] = deg
        gam = np.zeros(n)
        has = deg > 0
        gam[has] = config.gamma * share[has] / deg[has]
        gamma[g.label] = gam

        sources, targets = g.sources, g.targets
        mc[g.label] = int(max(len(sources), len(targets)))
        endpoints = np.union1d(sources, targets)
        mr[g.label] = int(R[endpoints].max() + 1) if len(endpoints) else 1

        dl = np.zeros(n)
        if config.mode == "RN":
            if len(targets):
                dl[sources] = config.delta * share[sources] / len(targets)
        elif len(sources):
            dl[sources] = config.delta / (mc[g.label] * mr[g.label])
        delta[g.label] = dl

    return ParamSet(
        mode=config.mode,
        alpha=np.full(n, float(config.alpha)),
        beta=config.beta * share,
        n_relations=R,
        gamma=gamma,
        delta=delta,
        outdegree=od,
        mc=mc,
        mr=mr,
    )
