"""Phrase-aware tokenization of database text against an embedding vocabulary.

Vocabulary entries such as ``bank_account`` are multi-word phrases.  They are
stored in a trie keyed by word tokens so that a scan over the words of a text
value can always consume the longest phrase available at each position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from relretro.embedding_io import EmbeddingSet

# Unicode whitespace plus a fixed punctuation set; hyphens split as well.
_SEPARATORS = re.compile(r"[\s.,;:!?\"()\[\]{}\-]+")


class _Node:
    __slots__ = ("children", "index")

    def __init__(self):
        self.children: dict[str, _Node] = {}
        self.index: int | None = None


class LookupTrie:
    """Prefix tree over word-token sequences; terminal nodes carry a row index."""

    def __init__(self):
        self.root = _Node()
        self._terminals = 0

    def insert(self, words: list[str], index: int) -> None:
        node = self.root
        for w in words:
            node = node.children.setdefault(w, _Node())
        if node.index is None:
            self._terminals += 1
        node.index = index

    def lookup(self, words: list[str]) -> int | None:
        node = self.root
        for w in words:
            node = node.children.get(w)
            if node is None:
                return None
        return node.index

    def __len__(self) -> int:
        return self._terminals

    def longest_match(self, words: list[str], start: int) -> tuple[int, int | None]:
        """Return ``(length, index)`` of the longest terminal path from ``start``.

        Each step tries the word as written, then its lowercase form.  Length 0
        means no vocabulary entry begins at ``start``.
        """
        node = self.root
        best_len, best_idx = 0, None
        for pos in range(start, len(words)):
            w = words[pos]
            child = node.children.get(w)
            if child is None:
                child = node.children.get(w.lower())
            if child is None:
                break
            node = child
            if node.index is not None:
                best_len, best_idx = pos - start + 1, node.index
        return best_len, best_idx


def build_trie(embeddings: EmbeddingSet) -> LookupTrie:
    trie = LookupTrie()
    for token, idx in embeddings.vocab.items():
        words = [w for w in token.split("_") if w]
        if words:
            trie.insert(words, idx)
    return trie


def split_words(text: str) -> list[str]:
    return [w for w in _SEPARATORS.split(text) if w]


def tokenize(text: str, trie: LookupTrie) -> list[int]:
    """Greedy left-to-right longest-match tokenization into vocabulary rows.

    Words that start no vocabulary entry are skipped.
    """
    words = split_words(text)
    out = []
    pos = 0
    while pos < len(words):
        length, idx = trie.longest_match(words, pos)
        if length:
            out.append(idx)
            pos += length
        else:
            pos += 1
    return out


@dataclass(frozen=True)
class InitialVector:
    vector: np.ndarray
    matched_tokens: int

    @property
    def is_null(self) -> bool:
        return self.matched_tokens == 0


def initialize_vector(text: str, trie: LookupTrie, embeddings: EmbeddingSet) -> InitialVector:
    """Mean of the matched token vectors, or the zero vector if nothing matched."""
    rows = tokenize(text, trie)
    if not rows:
        return InitialVector(np.zeros(embeddings.dimension), 0)
    return InitialVector(embeddings.matrix[rows].mean(axis=0), len(rows))


def initial_matrix(texts, trie: LookupTrie, embeddings: EmbeddingSet) -> tuple[np.ndarray, np.ndarray]:
    """Stack initial vectors for ``texts``; returns ``(W0, null_mask)``."""
    texts = list(texts)
    W0 = np.zeros((len(texts), embeddings.dimension))
    null = np.zeros(len(texts), dtype=bool)
    for i, text in enumerate(texts):
        iv = initialize_vector(text, trie, embeddings)
        W0[i] = iv.vector
        null[i] = iv.is_null
    return W0, null
