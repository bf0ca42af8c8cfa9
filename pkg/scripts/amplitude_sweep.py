#!/usr/bin/env python3
"""Sweep the seed amplitude and compare peak growth across tau.

Each tau gets its own run CSV next to the summary; the summary lists
max J / tau^2 so the quadratic scaling of the functional is factored out.
"""

import argparse

from sqgspec.cli import RunConfig, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--taus", default="0.1,0.05,0.02")
    ap.add_argument("--N", type=int, default=64)
    ap.add_argument("--t-max", type=float, default=100.0)
    ap.add_argument("--out", default="sweep.csv")
    ap.add_argument("--parallel", action="store_true")
    args = ap.parse_args()

    cfg = RunConfig(
        N=args.N,
        t_max=args.t_max,
        output_path=args.out,
        sweep_tau=tuple(float(t) for t in args.taus.split(",")),
        parallel=args.parallel,
    )
    for tau, ratio, t_at in run_sweep(cfg):
        print(f"tau = {tau:<6g} max J / tau^2 = {ratio:<10.5g} at t = {t_at:g}")


if __name__ == "__main__":
    main()
