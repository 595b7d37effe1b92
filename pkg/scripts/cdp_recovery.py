#!/usr/bin/env python3
"""Coded diffraction image recovery: Wirtinger flow vs accelerated
Wirtinger flow, reporting phase-aligned relative error per iteration and
writing the recovered images as graymaps."""

import argparse

from prbench.harness import ExperimentConfig, cmd_cdp


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/cdp")
    ap.add_argument("--image", default="", help="P2/P5 graymap; synthetic if empty")
    ap.add_argument("--size", type=int, default=64, help="synthetic image side")
    ap.add_argument("--masks", type=int, default=12)
    ap.add_argument("--iters", type=int, default=140)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = ExperimentConfig(
        experiment="cdp",
        image=args.image,
        cdp_size=args.size,
        mask_count=args.masks,
        cdp_iters=args.iters,
        seed_list=(args.seed,),
        out=args.out,
    )
    code = cmd_cdp(cfg)
    with open(f"{args.out}/errors.csv") as fh:
        tail = [line for line in fh.read().splitlines() if line.startswith("#")]
    print("\n".join(tail))
    print(f"recovered images written under {args.out}/")
    raise SystemExit(code)


if __name__ == "__main__":
    main()
