#!/usr/bin/env python3
"""Convergence grid: GD vs heavy ball vs Nesterov over (n, m) cells.

Runs the full grid for spectral and random initialization, writes one
trace CSV per run plus a summary per init mode, and prints the median
iteration counts side by side.
"""

import argparse
import os

from prbench.harness import ExperimentConfig, cmd_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/grid", help="output directory")
    ap.add_argument("--n", type=int, nargs="+", default=[10, 50, 100])
    ap.add_argument("--m", type=int, nargs="+", default=[200, 500, 1000])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--tol", type=float, default=1e-7)
    args = ap.parse_args()

    for init in ("spectral", "random"):
        out = os.path.join(args.out, init)
        cfg = ExperimentConfig(
            experiment="sweep",
            n_list=tuple(args.n),
            m_list=tuple(args.m),
            seed_list=tuple(range(args.seeds)),
            init=init,
            tol=args.tol,
            out=out,
        )
        cmd_sweep(cfg)
        print(f"[{init}] summary:")
        with open(os.path.join(out, "summary.csv")) as fh:
            print(fh.read())


if __name__ == "__main__":
    main()
