"""Infidelity and success probability versus phase-register size for the single spin.

Writes one CSV per field strength and prints the fitted slope of log2(1-F) in t.
"""

import argparse
from pathlib import Path

import numpy as np

from nessqpe.experiments import RunConfig, linear_fit, sweep_t, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    ap.add_argument("--t-min", type=int, default=4)
    ap.add_argument("--t-max", type=int, default=10)
    ap.add_argument("--oracle", choices=("exact", "trotter"), default="exact")
    ap.add_argument("--trotter-order", type=int, default=2)
    ap.add_argument("--trotter-steps", type=int, default=100)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for h in args.h:
        config = RunConfig(
            model="single-spin",
            model_params={"h": h},
            t_range=list(range(args.t_min, args.t_max + 1)),
            oracle_mode=args.oracle,
            trotter_order=args.trotter_order,
            trotter_steps=args.trotter_steps,
        )
        rows = sweep_t(config)
        path = args.out / f"fidelity_h{h:g}_{args.oracle}.csv"
        write_csv(rows, config, "sweep-t", path)
        ts = [r["t"] for r in rows]
        slope, _, r2 = linear_fit(ts, np.log2([r["one_minus_F"] for r in rows]))
        print(f"h={h:g}: slope log2(1-F) = {slope:+.3f} (R^2 {r2:.3f}), "
              f"p0 range {min(r['p0'] for r in rows):.4f}..{max(r['p0'] for r in rows):.4f} -> {path}")


if __name__ == "__main__":
    main()
