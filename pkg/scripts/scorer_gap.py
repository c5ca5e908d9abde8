"""Oracle vs confidence-pooling scorer on the same corrupted corpus.

Reports mean edge f1 for each scorer and a bootstrap interval for the
paired difference.
"""

import argparse

import numpy as np

from graphrecon.experiments import bootstrap_mean_ci, make_corpus, recovery
from graphrecon.scoring import PROFILES
from graphrecon.search import SearchConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cases", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--ks", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--blur", type=int, default=2)
    ap.add_argument("--flip", type=float, default=0.05)
    ap.add_argument("--profile", choices=sorted(PROFILES), default="scratch")
    ap.add_argument("--boot", type=int, default=10_000)
    args = ap.parse_args()

    weights = PROFILES[args.profile]
    corpus = make_corpus(args.cases, seed=args.seed, blur=args.blur, flip=args.flip)
    config = SearchConfig(width=5, depth=12, weights=weights)
    oracle = recovery(corpus, args.ks, "oracle", config, weights)
    conf = recovery(corpus, args.ks, "confidence", config, weights)
    diffs = [o.edge_f1_after - c.edge_f1_after for o, c in zip(oracle, conf)]
    lo, hi = bootstrap_mean_ci(diffs, n_boot=args.boot)
    print(f"edge f1 before search  {np.mean([r.edge_f1_before for r in oracle]):.4f}")
    print(f"oracle scorer          {np.mean([r.edge_f1_after for r in oracle]):.4f}")
    print(f"confidence scorer      {np.mean([r.edge_f1_after for r in conf]):.4f}")
    print(f"gap {np.mean(diffs):.4f}, 95% CI [{lo:.4f}, {hi:.4f}]")


if __name__ == "__main__":
    main()
