"""Sweep delta on the bundled toy dataset and compare both convexity checks
with the actual smallest Hessian eigenvalue and the RO loss trace."""

import argparse
from importlib import resources

import numpy as np

from relretro.core import RetrofitConfig, SolverError, assemble_hessian, check_convexity, derive_params, retrofit_ro
from relretro.embedding_io import load_embeddings
from relretro.relations import build_catalog, extract_relation_groups, load_dataset
from relretro.tokenizer import build_trie, initial_matrix


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--deltas", type=float, nargs="+", default=[0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--gamma", type=float, default=3.0)
    ap.add_argument("--iterations", type=int, default=50)
    args = ap.parse_args()

    toy = resources.files("relretro") / "data" / "toy_movies"
    dataset = load_dataset(toy / "manifest.json")
    catalog, categories = build_catalog(dataset)
    groups = extract_relation_groups(dataset, catalog)
    emb = load_embeddings(toy / "embeddings.txt")
    W0, _ = initial_matrix(catalog.texts, build_trie(emb), emb)

    print(f"{'delta':>6} {'strict':>7} {'stated':>7} {'min_eig':>10} {'final_loss':>14}")
    for delta in args.deltas:
        cfg = RetrofitConfig(alpha=args.alpha, gamma=args.gamma, delta=delta, mode="RO", iterations=args.iterations)
        params = derive_params(cfg, len(catalog), groups)
        report = check_convexity(params, groups)
        eig = np.linalg.eigvalsh(assemble_hessian(params, groups, emb.dimension, part="full")).min()
        try:
            final = f"{retrofit_ro(W0, params, categories, groups, cfg).loss_trace[-1]:.6g}"
        except SolverError as exc:
            final = str(exc).split(" for ")[0]
        print(f"{delta:>6.2f} {str(report.strict_ok):>7} {str(report.stated_ok):>7} {eig:>10.4f} {final:>14}")


if __name__ == "__main__":
    main()
