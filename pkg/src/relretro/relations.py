"""CSV + manifest ingestion, term catalog and relation group extraction.

A manifest is a JSON document::

    {"tables": [
        {"name": "movies", "csv": "movies.csv", "primary_key": "id",
         "text_columns": ["title"],
         "foreign_keys": [{"column": "country_id", "ref_table": "countries", "ref_column": "id"}],
         "is_link_table": false}
    ]}

CSV paths are resolved relative to the manifest.  Every text column becomes a
category; every distinct non-missing value in it becomes one term.  Relation
groups connect text columns that share a row (row-wise), that are joined by a
single foreign key, or that are joined through a link table.
"""

from __future__ import annotations

import csv
import json
import os
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from relretro.embedding_io import term_key

MISSING = ("", "NULL")


class SchemaError(ValueError):
    """The manifest violates its own invariants."""


class DatasetError(ValueError):
    """The CSV data does not match the manifest."""


@dataclass(frozen=True)
class ForeignKey:
    column: str
    ref_table: str
    ref_column: str


@dataclass(frozen=True)
class TableSpec:
    name: str
    csv: str
    primary_key: str | None = None
    text_columns: tuple[str, ...] = ()
    foreign_keys: tuple[ForeignKey, ...] = ()
    is_link_table: bool = False


@dataclass(frozen=True)
class SchemaManifest:
    tables: tuple[TableSpec, ...]
    base_dir: Path = Path(".")

    def table(self, name: str) -> TableSpec:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def problems(self) -> list[str]:
        """All invariant violations, in declaration order."""
        out = []
        names = [t.name for t in self.tables]
        seen = set()
        for n in names:
            if n in seen:
                out.append(f"duplicate table name {n!r}")
            seen.add(n)
        for t in self.tables:
            for fk in t.foreign_keys:
                if fk.ref_table not in seen:
                    out.append(f"{t.name}.{fk.column}: references undeclared table {fk.ref_table!r}")
            if t.is_link_table:
                if len(t.foreign_keys) != 2:
                    out.append(f"link table {t.name!r} must have exactly two foreign keys, has {len(t.foreign_keys)}")
                if t.text_columns:
                    out.append(f"link table {t.name!r} must not declare text columns")
            if len(set(t.text_columns)) != len(t.text_columns):
                out.append(f"table {t.name!r} lists a text column twice")
        return out

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | os.PathLike = ".") -> SchemaManifest:
        try:
            tables = tuple(
                TableSpec(
                    name=t["name"],
                    csv=t["csv"],
                    primary_key=t.get("primary_key"),
                    text_columns=tuple(t.get("text_columns", ())),
                    foreign_keys=tuple(ForeignKey(fk["column"], fk["ref_table"], fk["ref_column"])
                                       for fk in t.get("foreign_keys", ())),
                    is_link_table=bool(t.get("is_link_table", False)),
                )
                for t in data["tables"]
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"manifest is missing required field {exc}") from None
        return cls(tables, Path(base_dir))


def load_manifest(path: str | os.PathLike, strict: bool = True) -> SchemaManifest:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: {exc}") from None
    manifest = SchemaManifest.from_dict(data, path.parent)
    if strict and (problems := manifest.problems()):
        raise SchemaError("; ".join(problems))
    return manifest


@dataclass
class Table:
    spec: TableSpec
    columns: list[str]
    rows: list[dict[str, str | None]]


@dataclass
class Dataset:
    manifest: SchemaManifest
    tables: dict[str, Table]


def _read_csv(path: Path, spec: TableSpec) -> Table:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: missing header row") from None
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise DatasetError(f"{path}: line {lineno}: expected {len(header)} fields, found {len(rec)}")
            rows.append({c: (None if v in MISSING else v) for c, v in zip(header, rec)})
    return Table(spec, header, rows)


def load_dataset(manifest_path: str | os.PathLike) -> Dataset:
    """Read every CSV named by the manifest and check it against the schema."""
    manifest = load_manifest(manifest_path)
    tables: dict[str, Table] = {}
    for spec in manifest.tables:
        table = _read_csv(manifest.base_dir / spec.csv, spec)
        declared = [*spec.text_columns, *(fk.column for fk in spec.foreign_keys)]
        if spec.primary_key:
            declared.append(spec.primary_key)
        for col in declared:
            if col not in table.columns:
                raise DatasetError(f"table {spec.name!r} has no column {col!r}")
        if spec.primary_key:
            seen = set()
            for row in table.rows:
                key = row[spec.primary_key]
                if key is None:
                    raise DatasetError(f"table {spec.name!r}: missing primary key value")
                if key in seen:
                    raise DatasetError(f"table {spec.name!r}: duplicate primary key {key!r}")
                seen.add(key)
        tables[spec.name] = table
    for spec in manifest.tables:
        for fk in spec.foreign_keys:
            if fk.ref_column not in tables[fk.ref_table].columns:
                raise DatasetError(f"{spec.name}.{fk.column}: table {fk.ref_table!r} has no column {fk.ref_column!r}")
    return Dataset(manifest, tables)


@dataclass(frozen=True)
class Term:
    index: int
    table: str
    column: str
    text: str


@dataclass(frozen=True)
class Category:
    id: int
    table: str
    column: str
    members: tuple[int, ...]

    @property
    def label(self) -> str:
        return f"{self.table}.{self.column}"


@dataclass
class TermCatalog:
    terms: list[Term] = field(default_factory=list)
    lookup: dict[tuple[str, str, str], int] = field(default_factory=dict)
    category_of: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.terms)

    def add(self, table: str, column: str, text: str, category: int) -> int:
        k = (table, column, text)
        if k not in self.lookup:
            self.lookup[k] = len(self.terms)
            self.terms.append(Term(len(self.terms), table, column, text))
            self.category_of.append(category)
        return self.lookup[k]

    def index(self, table: str, column: str, text: str) -> int:
        return self.lookup[(table, column, text)]

    def key(self, i: int) -> str:
        t = self.terms[i]
        return term_key(t.table, t.column, t.text)

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.terms]


def build_catalog(dataset: Dataset) -> tuple[TermCatalog, list[Category]]:
    """One term per distinct value of each text column, one category per column."""
    catalog = TermCatalog()
    categories = []
    for spec in dataset.manifest.tables:
        rows = dataset.tables[spec.name].rows
        for col in spec.text_columns:
            cid = len(categories)
            start = len(catalog)
            for row in rows:
                if row[col] is not None:
                    catalog.add(spec.name, col, row[col], cid)
            categories.append(Category(cid, spec.name, col, tuple(range(start, len(catalog)))))
    return catalog, categories


def inverse_label(label: str) -> str:
    return label[:-3] if label.endswith("^-1") else label + "^-1"


@dataclass(frozen=True)
class RelationGroup:
    """Directed, labeled edge set between two categories.

    ``edges`` is an ``(m, 2)`` integer array of ``(source, target)`` term
    indices, sorted and duplicate free.
    """

    label: str
    source: str
    target: str
    edges: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        e = np.unique(e, axis=0) if len(e) else e
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def sources(self) -> np.ndarray:
        return np.unique(self.edges[:, 0])

    @property
    def targets(self) -> np.ndarray:
        return np.unique(self.edges[:, 1])

    def inverted(self) -> RelationGroup:
        return RelationGroup(inverse_label(self.label), self.target, self.source, self.edges[:, ::-1])


def _index_rows(table: Table, column: str) -> dict[str, list[dict]]:
    idx = defaultdict(list)
    for row in table.rows:
        if row[column] is not None:
            idx[row[column]].append(row)
    return idx


def extract_relation_groups(dataset: Dataset, catalog: TermCatalog) -> list[RelationGroup]:
    """Relation groups from row-wise, foreign-key and link-table connections.

    Orientation is column order for row-wise pairs, FK holder to referenced
    table for foreign keys, and first FK to second FK for link tables.  Edges
    with a missing endpoint and self-pairs are dropped.  Groups are returned
    sorted by label.
    """
    edges: dict[tuple[tuple[str, str], tuple[str, str]], set[tuple[int, int]]] = defaultdict(set)

    def connect(rows_a, ta, ca, rows_b, tb, cb):
        for ra, rb in zip(rows_a, rows_b):
            va, vb = ra[ca], rb[cb]
            if va is None or vb is None:
                continue
            i, j = catalog.index(ta, ca, va), catalog.index(tb, cb, vb)
            if i != j:
                edges[(ta, ca), (tb, cb)].add((i, j))

    def joined(table: Table, fk: ForeignKey):
        """Pairs (row, referenced row) along one foreign key."""
        ref = _index_rows(dataset.tables[fk.ref_table], fk.ref_column)
        for row in table.rows:
            if row[fk.column] is not None:
                for target in ref.get(row[fk.column], ()):
                    yield row, target

    for spec in dataset.manifest.tables:
        table = dataset.tables[spec.name]
        for ca, cb in combinations(spec.text_columns, 2):
            connect(table.rows, spec.name, ca, table.rows, spec.name, cb)

        if spec.is_link_table:
            fk1, fk2 = spec.foreign_keys
            left = _index_rows(dataset.tables[fk1.ref_table], fk1.ref_column)
            right = _index_rows(dataset.tables[fk2.ref_table], fk2.ref_column)
            pairs = [(a, b) for row in table.rows if row[fk1.column] is not None and row[fk2.column] is not None
                     for a in left.get(row[fk1.column], ()) for b in right.get(row[fk2.column], ())]
            for ca in dataset.manifest.table(fk1.ref_table).text_columns:
                for cb in dataset.manifest.table(fk2.ref_table).text_columns:
                    connect([p[0] for p in pairs], fk1.ref_table, ca, [p[1] for p in pairs], fk2.ref_table, cb)
            continue

        for fk in spec.foreign_keys:
            pairs = list(joined(table, fk))
            for ca in spec.text_columns:
                for cb in dataset.manifest.table(fk.ref_table).text_columns:
                    connect([p[0] for p in pairs], spec.name, ca, [p[1] for p in pairs], fk.ref_table, cb)

    groups = []
    for ((ta, ca), (tb, cb)), pairs in edges.items():
        src, dst = f"{ta}.{ca}", f"{tb}.{cb}"
        groups.append(RelationGroup(f"{src}→{dst}", src, dst, np.array(sorted(pairs), dtype=np.int64)))
    return sorted(groups, key=lambda g: g.label)
