"""Reading and writing embeddings in word2vec text format.

A file starts with a ``<count> <dimension>`` header followed by one
``<token> <v1> ... <vD>`` line per row.  Retrofitted output uses the same
format with term keys of the form ``table.column#encoded-value``.
"""

from __future__ import annotations

import logging
import math
import os
import re
import tempfile
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING
from urllib.parse import unquote

import numpy as np

if TYPE_CHECKING:
    from relretro.core.solvers import RetrofitResult
    from relretro.relations import TermCatalog

log = logging.getLogger(__name__)

_NAME = re.compile(r"[A-Za-z0-9_]+")


class EmbeddingFormatError(ValueError):
    """Raised when an embedding file cannot be parsed completely."""


@dataclass(frozen=True)
class EmbeddingSet:
    """Token vocabulary plus a dense ``count x dimension`` matrix."""

    dimension: int
    vocab: dict[str, int]
    matrix: np.ndarray
    duplicates: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if self.matrix.ndim != 2 or self.matrix.shape[1] != self.dimension:
            raise ValueError(f"matrix shape {self.matrix.shape} does not match dimension {self.dimension}")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("matrix contains non-finite entries")
        rows = self.matrix.shape[0]
        if any(not 0 <= idx < rows for idx in self.vocab.values()):
            raise ValueError("vocabulary index out of range")
        if len(set(self.vocab.values())) != len(self.vocab):
            raise ValueError("vocabulary indices are not unique")
        self.matrix.setflags(write=False)

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    def vector(self, token: str) -> np.ndarray:
        return self.matrix[self.vocab[token]]


def load_embeddings(path: str | os.PathLike) -> EmbeddingSet:
    """Parse a word2vec text file.

    Duplicate tokens are tolerated: the last occurrence wins and the number of
    shadowed rows is stored on ``EmbeddingSet.duplicates``.  Any malformed line
    raises :class:`EmbeddingFormatError` naming the 1-based line number.
    """
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise EmbeddingFormatError(f"line 1: expected '<count> <dimension>' header, found {header.strip()!r}")
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise EmbeddingFormatError(f"line 1: header values must be integers, found {header.strip()!r}") from None
        if count < 0 or dim < 1:
            raise EmbeddingFormatError(f"line 1: invalid count {count} or dimension {dim}")

        matrix = np.empty((count, dim), dtype=np.float64)
        vocab: dict[str, int] = {}
        duplicates = 0
        row = 0
        for lineno, line in enumerate(fh, start=2):
            fields = line.split()
            if not fields:
                continue
            if row >= count:
                raise EmbeddingFormatError(f"line {lineno}: more rows than the declared count {count}")
            token, values = fields[0], fields[1:]
            if len(values) != dim:
                raise EmbeddingFormatError(f"line {lineno}: expected {dim} values, found {len(values)}")
            try:
                vec = [float(v) for v in values]
            except ValueError as exc:
                raise EmbeddingFormatError(f"line {lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in vec):
                raise EmbeddingFormatError(f"line {lineno}: non-finite value")
            matrix[row] = vec
            if token in vocab:
                duplicates += 1
            vocab[token] = row
            row += 1
    if row != count:
        raise EmbeddingFormatError(f"header declares {count} rows but file contains {row}")
    if duplicates:
        log.warning("%s: %d duplicate tokens, last occurrence kept", path, duplicates)
    return EmbeddingSet(dim, vocab, matrix, duplicates)


def encode_value(text: str) -> str:
    """Percent-encode ``#``, ``%``, whitespace and control characters."""
    out = []
    for ch in text:
        if ch in "#%" or ch.isspace() or unicodedata.category(ch) in ("Cc", "Cf", "Zl", "Zp"):
            out.append("".join(f"%{b:02X}" for b in ch.encode("utf-8")))
        else:
            out.append(ch)
    return "".join(out)


def decode_value(encoded: str) -> str:
    return unquote(encoded, encoding="utf-8", errors="strict")


def term_key(table: str, column: str, text: str) -> str:
    if not _NAME.fullmatch(table) or not _NAME.fullmatch(column):
        raise ValueError(f"table/column names must match [A-Za-z0-9_]+: {table!r}.{column!r}")
    return f"{table}.{column}#{encode_value(text)}"


def parse_term_key(key: str) -> tuple[str, str, str]:
    """Inverse of :func:`term_key`."""
    qualified, sep, encoded = key.partition("#")
    table, dot, column = qualified.partition(".")
    if not sep or not dot or not _NAME.fullmatch(table) or not _NAME.fullmatch(column):
        raise ValueError(f"malformed term key {key!r}")
    return table, column, decode_value(encoded)


def format_real(x: float) -> str:
    """Shortest decimal that round-trips to the same double; integral values drop '.0'."""
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def write_vectors(keys, matrix: np.ndarray, path: str | os.PathLike) -> None:
    """Write ``keys``/``matrix`` atomically: the target only appears once complete."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if len(keys) != matrix.shape[0]:
        raise ValueError(f"{len(keys)} keys for {matrix.shape[0]} rows")
    dim = matrix.shape[1] if matrix.ndim == 2 else 0
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(f"{len(keys)} {dim}\n")
            for key, row in zip(keys, matrix):
                fh.write(key + " " + " ".join(format_real(v) for v in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def save_result(result: RetrofitResult, catalog: TermCatalog, path: str | os.PathLike) -> None:
    if result.W.shape[0] != len(catalog):
        raise ValueError(f"result has {result.W.shape[0]} rows, catalog has {len(catalog)} terms")
    write_vectors([catalog.key(i) for i in range(len(catalog))], result.W, path)
