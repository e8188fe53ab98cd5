"""Property graph over terms and column blank nodes, exported as an edge list.

Node ids ``0..n-1`` are the catalog terms, ids ``n..n+m-1`` the category
blank nodes.  The graph is undirected; each edge is stored once with the
smaller id first.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from relretro.relations import Category, RelationGroup, TermCatalog


@dataclass(frozen=True)
class TermGraph:
    n_terms: int
    n_categories: int
    edges: np.ndarray  # (m, 2), sorted, min id first
    labels: tuple[str, ...]

    @property
    def n_nodes(self) -> int:
        return self.n_terms + self.n_categories

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_nodes)


def build_graph(catalog: TermCatalog, categories: list[Category], groups: list[RelationGroup]) -> TermGraph:
    n = len(catalog)
    parts = [g.edges for g in groups if len(g)]
    parts.append(np.array([[i, n + catalog.category_of[i]] for i in range(n)], dtype=np.int64).reshape(-1, 2))
    edges = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    edges = np.sort(edges, axis=1)
    edges = np.unique(edges, axis=0) if len(edges) else edges
    labels = tuple(catalog.key(i) for i in range(n)) + tuple(f"category:{c.label}" for c in categories)
    return TermGraph(n, len(categories), edges, labels)


def export_edge_list(graph: TermGraph, path: str | os.PathLike, mapping_path: str | os.PathLike | None = None) -> None:
    """Write ``<u> <v>`` lines plus a ``<id>\\t<key>`` mapping file.

    The mapping goes to ``mapping_path`` or, by default, ``<path>.map``.
    """
    mapping_path = mapping_path or f"{os.fspath(path)}.map"
    _atomic_write(path, "".join(f"{u} {v}\n" for u, v in graph.edges))
    _atomic_write(mapping_path, "".join(f"{i}\t{key}\n" for i, key in enumerate(graph.labels)))


def read_edge_list(path: str | os.PathLike) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        pairs = [tuple(map(int, line.split())) for line in fh if line.strip()]
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def _atomic_write(path, text: str) -> None:
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)
