#!/usr/bin/env python3
"""Speedup slopes: log-error of the accelerated method against log-error
of gradient descent, fitted per dimension and compared to sqrt(log n)."""

import argparse

from prbench.harness import ExperimentConfig, cmd_slopes


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/slopes.csv")
    ap.add_argument("--n", type=int, nargs="+", default=[16, 32, 64, 128, 256])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--method", default="polyak", choices=["polyak", "nesterov"])
    args = ap.parse_args()

    cfg = ExperimentConfig(
        experiment="slopes",
        n_list=tuple(args.n),
        seed_list=tuple(range(args.seeds)),
        method_b=args.method,
        out=args.out,
    )
    code = cmd_slopes(cfg)
    with open(args.out) as fh:
        print(fh.read())
    raise SystemExit(code)


if __name__ == "__main__":
    main()
