#!/usr/bin/env python3
"""Write a small synthetic runtime table and instance-feature file.

Stand-in for a real solver benchmark: runtimes depend on a hidden linear
interaction between instance features and the solver parameters in
data/solver_features.csv, plus noise. Output is deterministic.
"""

import argparse
import csv
import math
import pathlib
import random


def main() -> None:
    root = pathlib.Path(__file__).resolve().parent.parent
    ap = argparse.ArgumentParser()
    ap.add_argument("--instances", type=int, default=400)
    ap.add_argument("--features", type=int, default=8)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", type=pathlib.Path, default=root / "data" / "demo")
    args = ap.parse_args()

    with open(root / "data" / "solver_features.csv", newline="") as f:
        solvers = [[float(x) for x in row.values()] for row in csv.DictReader(f)]

    rng = random.Random(args.seed)
    p = args.features
    # Hidden interaction weights, one per (instance feature, solver feature) pair.
    w = [[rng.gauss(0.0, 1.0) for _ in range(4)] for _ in range(p)]

    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "runtimes.csv", "w", newline="") as rt, \
         open(args.out / "instance_features.csv", "w", newline="") as ft:
        rw, fw = csv.writer(rt), csv.writer(ft)
        rw.writerow(["instance_id"] + [f"solver_{j}" for j in range(len(solvers))])
        fw.writerow(["instance_id"] + [f"f{c}" for c in range(p)])
        for i in range(args.instances):
            feats = [rng.random() for _ in range(p - 2)]
            # A near-duplicate and a constant column exercise preprocessing.
            feats.append(2.0 * feats[0] + rng.gauss(0.0, 0.01))
            feats.append(1.0)
            row = []
            for s in solvers:
                score = sum(feats[a] * w[a][b] * s[b] for a in range(p - 1) for b in range(4))
                row.append(0.5 * math.exp(0.3 * score + rng.gauss(0.0, 0.2)))
            iid = f"inst{i:04d}"
            rw.writerow([iid] + [f"{x:.6g}" for x in row])
            fw.writerow([iid] + [f"{x:.6g}" for x in feats])


if __name__ == "__main__":
    main()
