"""End-to-end pipeline: CSV dataset + base embeddings -> retrofitted term vectors.

Exit statuses: 0 success, 1 validation or solver error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from relretro.core import (
    RetrofitConfig,
    SolverError,
    check_convexity,
    derive_params,
    retrofit_mf,
    retrofit_ro,
    retrofit_rn,
    symmetric_edges,
)
from relretro.core.objective import RelationalOperator
from relretro.embedding_io import EmbeddingFormatError, load_embeddings, save_result
from relretro.graph import build_graph, export_edge_list
from relretro.relations import (
    DatasetError,
    SchemaError,
    build_catalog,
    extract_relation_groups,
    load_dataset,
    load_manifest,
)
from relretro.tokenizer import build_trie, initial_matrix

log = logging.getLogger("relretro")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


@dataclass
class PipelineConfig:
    manifest: Path
    embeddings: Path
    out: Path
    retrofit: RetrofitConfig = field(default_factory=RetrofitConfig)
    export_graph: Path | None = None
    report: Path | None = None

    def __post_init__(self):
        for name in ("manifest", "embeddings", "out"):
            if not str(getattr(self, name)):
                raise ValueError(f"{name} path must be non-empty")


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning" | "info"
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.message}"


def validate(config: PipelineConfig) -> list[Finding]:
    """Dry run: parse and check everything up to the solver, collecting findings."""
    findings: list[Finding] = []
    if not Path(config.embeddings).is_file():
        findings.append(Finding("error", f"embeddings file not found: {config.embeddings}"))
    try:
        manifest = load_manifest(config.manifest, strict=False)
    except (OSError, SchemaError) as exc:
        return findings + [Finding("error", f"cannot read manifest {config.manifest}: {exc}")]
    problems = manifest.problems()
    findings += [Finding("error", p) for p in problems]
    if problems:
        return findings
    try:
        dataset = load_dataset(config.manifest)
    except (OSError, DatasetError, SchemaError) as exc:
        return findings + [Finding("error", str(exc))]
    catalog, categories = build_catalog(dataset)
    groups = extract_relation_groups(dataset, catalog)
    findings.append(Finding("info", f"{len(catalog)} terms, {len(categories)} categories, {len(groups)} relation groups"))

    cfg = config.retrofit
    if cfg.mode == "RO":
        params = derive_params(cfg, len(catalog), groups)
        report = check_convexity(params, groups)
        if not report.strict_ok and report.worst_term is not None:
            w = report.worst_term
            findings.append(Finding(
                "warning",
                f"convexity condition alpha_i >= 4*sum(delta) violated; worst term {w} ({catalog.key(w)}), "
                f"margin {report.strict_margin[w]:.6g}; weaker condition {'holds' if report.stated_ok else 'also fails'}",
            ))
        denom = RelationalOperator(params, groups).denominator()
        bad = np.flatnonzero(denom <= 0)
        if len(bad):
            findings.append(Finding("error", f"non-positive RO update denominator for term {bad[0]} ({catalog.key(bad[0])})"))
    return findings


def _format_report(entries: list[tuple[str, object]], trace: list[float]) -> str:
    lines = [f"{k}: {v}" for k, v in entries]
    lines.append("loss_trace:")
    lines.append("iteration loss")
    lines += [f"{k} {v!r}" for k, v in enumerate(trace)]
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> tuple[dict[str, str], list[float]]:
    """Split a report into its ``key: value`` entries and the loss table."""
    entries: dict[str, str] = {}
    trace: list[float] = []
    lines = iter(text.splitlines())
    for line in lines:
        if line == "loss_trace:":
            next(lines, None)  # column header
            trace = [float(row.split()[1]) for row in lines if row.strip()]
            break
        key, _, value = line.partition(": ")
        entries[key] = value
    return entries, trace


def run_pipeline(config: PipelineConfig) -> int:
    written: list[Path] = []
    try:
        _run(config, written)
    except (OSError, EmbeddingFormatError) as exc:
        status, message = EXIT_IO, str(exc)
    except (SchemaError, DatasetError, SolverError, ValueError) as exc:
        status, message = EXIT_INVALID, str(exc)
    else:
        return EXIT_OK
    for p in written:
        Path(p).unlink(missing_ok=True)
    print(f"relretro: error: {message}", file=sys.stderr)
    return status


def _run(config: PipelineConfig, written: list[Path]) -> None:
    cfg = config.retrofit
    timings: dict[str, float] = {}

    def phase(name, fn, *args):
        t0 = time.perf_counter()
        out = fn(*args)
        timings[name] = time.perf_counter() - t0
        return out

    embeddings = phase("load_embeddings", load_embeddings, config.embeddings)
    dataset = phase("load_dataset", load_dataset, config.manifest)
    catalog, categories = phase("build_catalog", build_catalog, dataset)
    groups = phase("extract_relations", extract_relation_groups, dataset, catalog)
    trie = phase("build_trie", build_trie, embeddings)
    W0, null = phase("tokenize", initial_matrix, catalog.texts, trie, embeddings)

    convexity = None
    if cfg.mode == "MF":
        result = phase("solve", retrofit_mf, W0, symmetric_edges(groups), cfg)
    else:
        params = phase("derive_params", derive_params, cfg, len(catalog), groups)
        if cfg.mode == "RO":
            convexity = check_convexity(params, groups)
            result = phase("solve", retrofit_ro, W0, params, categories, groups, cfg)
        else:
            result = phase("solve", retrofit_rn, W0, params, categories, groups, cfg)

    phase("write_vectors", save_result, result, catalog, config.out)
    written.append(Path(config.out))
    if config.export_graph:
        graph = build_graph(catalog, categories, groups)
        phase("export_graph", export_edge_list, graph, config.export_graph)
        written += [Path(config.export_graph), Path(f"{os.fspath(config.export_graph)}.map")]

    if config.report:
        entries: list[tuple[str, object]] = [
            ("mode", cfg.mode),
            ("alpha", cfg.alpha), ("beta", cfg.beta), ("gamma", cfg.gamma), ("delta", cfg.delta),
            ("n", len(catalog)),
            ("dimension", embeddings.dimension),
            ("oov_terms", int(null.sum())),
            ("categories", len(categories)),
        ]
        entries += [(f"category {c.label}", len(c.members)) for c in categories]
        entries.append(("relation_groups", len(groups)))
        entries += [(f"group {g.label}", len(g)) for g in groups]
        if convexity is None:
            entries += [("convexity_strict_ok", "n/a"), ("convexity_stated_ok", "n/a"), ("convexity_worst_term", "n/a")]
        else:
            entries += [("convexity_strict_ok", convexity.strict_ok), ("convexity_stated_ok", convexity.stated_ok),
                        ("convexity_worst_term", convexity.worst_term)]
        degenerate = 0 if result.degenerate is None else int(result.degenerate.sum())
        entries += [("iterations_run", result.iterations_run), ("converged", result.converged),
                    ("degenerate_rows", degenerate)]
        entries += [(f"time_{k}", f"{v:.6f}") for k, v in timings.items()]
        tmp = Path(f"{os.fspath(config.report)}.tmp")
        tmp.write_text(_format_report(entries, result.loss_trace), encoding="utf-8")
        os.replace(tmp, config.report)
        written.append(Path(config.report))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relretro", description=__doc__.splitlines()[0])
    p.add_argument("--manifest", required=True, type=Path, help="dataset manifest (JSON)")
    p.add_argument("--embeddings", required=True, type=Path, help="base embeddings, word2vec text format")
    p.add_argument("--out", type=Path, help="output vectors file (required unless --validate-only)")
    p.add_argument("--mode", choices=("MF", "RO", "RN"), default="RN")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=3.0)
    p.add_argument("--delta", type=float, default=None, help="default 3 for RO, 1 otherwise")
    p.add_argument("--iterations", type=int, default=20)
    p.add_argument("--tolerance", type=float, default=0.0, help="early stop on max row change; 0 disables")
    p.add_argument("--export-graph", type=Path, help="edge list path; mapping goes to <path>.map")
    p.add_argument("--report", type=Path, help="diagnostics report path")
    p.add_argument("--validate-only", action="store_true", help="check inputs and parameters without solving")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    delta = args.delta if args.delta is not None else (3.0 if args.mode == "RO" else 1.0)
    try:
        rcfg = RetrofitConfig(alpha=args.alpha, beta=args.beta, gamma=args.gamma, delta=delta,
                              iterations=args.iterations, mode=args.mode, convergence_tolerance=args.tolerance)
        config = PipelineConfig(args.manifest, args.embeddings, args.out or Path("-"), rcfg,
                                args.export_graph, args.report)
    except ValueError as exc:
        print(f"relretro: error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if args.validate_only:
        findings = validate(config)
        for f in findings:
            print(f)
        return EXIT_INVALID if any(f.severity == "error" for f in findings) else EXIT_OK
    if args.out is None:
        print("relretro: error: --out is required", file=sys.stderr)
        return EXIT_INVALID
    return run_pipeline(config)


if __name__ == "__main__":
    sys.exit(main())
