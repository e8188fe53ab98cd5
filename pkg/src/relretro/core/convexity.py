"""Per-term evaluation of the two published convexity conditions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from relretro.core.params import ParamSet, directed_groups
from relretro.relations import RelationGroup


@dataclass(frozen=True)
class ConvexityReport:
    """``strict_ok``: alpha_i >= 4 * sum delta over unrelated pairs (diagonal dominance).
    ``stated_ok``: 4 * alpha_i - sum delta >= 0, the weaker published form.
    ``worst_term`` minimises the strict margin; ``None`` for an empty instance.
    """

    strict_ok: bool
    stated_ok: bool
    nonnegative_ok: bool
    worst_term: int | None
    strict_margin: np.ndarray
    stated_margin: np.ndarray
    repulsion: np.ndarray


def repulsion_mass(params: ParamSet, groups: Sequence[RelationGroup]) -> np.ndarray:
    """sum_r sum_{k:(i,k) unrelated in r} delta_i^r for every term i."""
    n = params.n
    total = np.zeros(n)
    for g in directed_groups(groups):
        src, tgt = g.sources, g.targets
        unrelated = len(tgt) - params.outdegree[g.label][src] - np.isin(src, tgt)
        total[src] += params.delta[g.label][src] * unrelated
    return total


def check_convexity(params: ParamSet, groups: Sequence[RelationGroup]) -> ConvexityReport:
    rep = repulsion_mass(params, groups)
    strict = params.alpha - 4.0 * rep
    stated = 4.0 * params.alpha - rep
    nonneg = bool(np.all(params.alpha >= 0) and np.all(params.beta >= 0)
                  and all(np.all(v >= 0) for v in params.gamma.values()))
    worst = int(np.argmin(strict)) if len(strict) else None
    return ConvexityReport(
        strict_ok=bool(np.all(strict >= 0)) and nonneg,
        stated_ok=bool(np.all(stated >= 0)) and nonneg,
        nonnegative_ok=nonneg,
        worst_term=worst,
        strict_margin=strict,
        stated_margin=stated,
        repulsion=rep,
    )
