"""Estimated versus exact <sigma_y>, <sigma_z> of the single-spin steady state across h and t."""

import argparse
from pathlib import Path

import numpy as np

from nessqpe.experiments import RunConfig, linear_fit, sweep_expect, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    ap.add_argument("--t-min", type=int, default=4)
    ap.add_argument("--t-max", type=int, default=10)
    ap.add_argument("--shots", type=int, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--out", type=Path, default=Path("results/expectations.csv"))
    args = ap.parse_args()
    args.out.parent.mkdir(parents=True, exist_ok=True)

    config = RunConfig(
        model="single-spin",
        t_range=list(range(args.t_min, args.t_max + 1)),
        h_values=args.h,
        observables=["sigma_y", "sigma_z"],
        shots=args.shots,
        seed=args.seed,
    )
    rows = sweep_expect(config)
    write_csv(rows, config, "expect", args.out)
    for h in args.h:
        for label in config.observables:
            sel = [r for r in rows if r["h"] == h and r["observable"] == label]
            slope, _, _ = linear_fit([r["t"] for r in sel], np.log2([r["rel_error"] for r in sel]))
            last = sel[-1]
            print(f"h={h:g} {label}: exact {last['oracle']:+.5f}, t={last['t']} estimate "
                  f"{last['estimate']:+.5f}, rel err {last['rel_error']:.2e}, slope {slope:+.2f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
