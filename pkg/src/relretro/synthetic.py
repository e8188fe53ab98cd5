"""Random relational instances for tests and runtime experiments."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from relretro.core.convexity import repulsion_mass
from relretro.core.params import RetrofitConfig, derive_params
from relretro.relations import RelationGroup


@dataclass
class Instance:
    W0: np.ndarray
    categories: list[np.ndarray]
    groups: list[RelationGroup]

    @property
    def n(self) -> int:
        return len(self.W0)


def random_instance(rng: np.random.Generator, n: int, dim: int, n_categories: int = 3, density: float = 0.4,
                    self_group: bool = False, zero_rows: int = 0) -> Instance:
    """Small dense-ish instance; every ordered category pair gets a group with probability 1/2.

    ``self_group`` adds a group from one category to itself.  ``zero_rows``
    initial vectors are set to zero (out-of-vocabulary terms).
    """
    n_categories = min(n_categories, n)
    labels = np.concatenate([np.arange(n_categories), rng.integers(0, n_categories, n - n_categories)])
    rng.shuffle(labels)
    categories = [np.flatnonzero(labels == c) for c in range(n_categories)]
    pairs = [(a, b) for a in range(n_categories) for b in range(n_categories) if a != b and rng.random() < 0.5]
    if not pairs and n_categories > 1:
        pairs = [(0, 1)]
    if self_group:
        c = int(np.argmax([len(m) for m in categories]))
        if len(categories[c]) > 1:
            pairs.append((c, c))
    groups = []
    for a, b in pairs:
        edges = [(i, j) for i in categories[a] for j in categories[b] if i != j and rng.random() < density]
        if not edges:
            i = rng.choice(categories[a])
            choices = categories[b][categories[b] != i]
            if not len(choices):
                continue
            edges = [(i, rng.choice(choices))]
        groups.append(RelationGroup(f"c{a}→c{b}", f"c{a}", f"c{b}", np.array(edges)))
    W0 = rng.normal(size=(n, dim))
    if zero_rows:
        W0[rng.choice(n, size=min(zero_rows, n), replace=False)] = 0.0
    return Instance(W0, categories, groups)


def convex_config(instance: Instance, base: RetrofitConfig, margin: float = 1.25) -> RetrofitConfig:
    """Raise alpha until alpha >= margin * 4 * repulsion for every term (RO parameters)."""
    params = derive_params(replace(base, mode="RO"), instance.n, instance.groups)
    rep = repulsion_mass(params, instance.groups)
    need = margin * 4.0 * float(rep.max()) if len(rep) else 0.0
    return replace(base, mode="RO", alpha=max(base.alpha, need))


def synthetic_dataset(n_terms: int, avg_degree: float, dim: int, n_categories: int = 4, seed: int = 0) -> Instance:
    """Large sparse instance: equal-size categories chained by relation groups.

    Group ``c -> c+1`` receives ``n_terms * avg_degree / (2 * groups)``
    random edges, so the average number of relation edges per term is about
    ``avg_degree`` once inversions are counted.
    """
    rng = np.random.default_rng(seed)
    bounds = np.linspace(0, n_terms, n_categories + 1).astype(int)
    categories = [np.arange(bounds[c], bounds[c + 1]) for c in range(n_categories)]
    n_groups = n_categories - 1
    m = max(1, int(round(n_terms * avg_degree / (2 * n_groups))))
    groups = []
    for c in range(n_groups):
        a, b = categories[c], categories[c + 1]
        edges = np.stack([rng.choice(a, m), rng.choice(b, m)], axis=1)
        groups.append(RelationGroup(f"c{c}→c{c + 1}", f"c{c}", f"c{c + 1}", edges))
    return Instance(rng.normal(size=(n_terms, dim)), categories, groups)
