"""Command-line entry point: ``nessqpe {oracle,sweep-t,expect,ising}``.

Exit codes: 0 success, 2 bad model or configuration, 3 invariant violation,
4 postselection failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .errors import ConsistencyError, DimensionError, ModelError, NessError, PostselectionError
from .experiments import (
    RunConfig,
    ising_report,
    oracle_report,
    sweep_expect,
    sweep_t,
    trotter_step_text,
    write_csv,
)

log = logging.getLogger("nessqpe")

EXIT_OK = 0
EXIT_MODEL = 2
EXIT_INVARIANT = 3
EXIT_POSTSELECT = 4


def parse_t_range(text: str) -> list[int]:
    """``"4:10"`` (inclusive) or ``"4,6,8"``."""
    try:
        if ":" in text:
            lo, hi = (int(p) for p in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(p) for p in text.split(",") if p]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad t range {text!r}") from exc


def parse_floats(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", default="single-spin",
                   help="'single-spin', 'ising', or a path to a JSON model file")
    p.add_argument("--h", type=float, help="field strength of a built-in model")
    p.add_argument("--J", type=float, help="Ising coupling")
    p.add_argument("--n", type=int, help="Ising chain length")
    p.add_argument("--topology", choices=("chain", "ring"))
    p.add_argument("--config", type=Path, help="JSON run config; its keys override flags")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t", dest="t_range", type=parse_t_range, default=parse_t_range("4:10"),
                   help="phase-register sizes, '4:10' or '4,6,8'")
    p.add_argument("--t0", type=float, help="evolution scale (default 1/5 for single-spin, "
                   "else 1/(2 x Pauli one-norm of M))")
    p.add_argument("--oracle", dest="oracle_mode", choices=("exact", "trotter"), default="exact")
    p.add_argument("--trotter-order", type=int, choices=(1, 2), default=1)
    p.add_argument("--trotter-steps", type=int, default=1)
    p.add_argument("--postselect", dest="postselect_mode", choices=("exact", "sampled"),
                   default="exact")
    p.add_argument("--max-attempts", type=int, default=16)
    p.add_argument("--observables", type=lambda s: [x for x in s.split(",") if x],
                   default=None, help="comma-separated, e.g. sigma_y,sigma_z1,identity")
    p.add_argument("--shots", type=int, help="sample the estimator with this many shots")
    p.add_argument("--seed", type=int, help="required for sampled modes")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", dest="output_path", help="CSV path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nessqpe", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", help="dense spectral report and invariant checks (JSON)")
    _add_model_args(p)
    p.add_argument("--output", dest="output_path")

    p = sub.add_parser("sweep-t", help="QPE success probability and accuracy versus t (CSV)")
    _add_model_args(p)
    _add_run_args(p)

    p = sub.add_parser("expect", help="estimated versus exact expectations over h and t (CSV)")
    _add_model_args(p)
    _add_run_args(p)
    p.add_argument("--h-values", type=parse_floats, default=None)

    p = sub.add_parser("ising", help="symbolic dilation check, Trotter circuit and gate counts")
    p.add_argument("--n", type=int, default=2, help="chain length of the exported circuit")
    p.add_argument("--n-values", type=parse_t_range, default=parse_t_range("1:3"),
                   help="sizes for the symbolic/dense comparison")
    p.add_argument("--count-values", type=parse_t_range, default=parse_t_range("2:6"))
    p.add_argument("--topology", choices=("chain", "ring"), default="chain")
    p.add_argument("--order", type=int, choices=(1, 2), default=1)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--t0", type=float, default=0.2)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--circuit-out", type=Path, help="write the Trotter-step circuit here")
    p.add_argument("--output", dest="output_path", help="JSON report path (default stdout)")
    return parser


def config_from_args(args: argparse.Namespace, observables=None) -> RunConfig:
    """Flags first, then the ``--config`` file on top."""
    params = {k: getattr(args, k) for k in ("h", "J", "n", "topology")
              if getattr(args, k, None) is not None}
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    values = {k: v for k, v in vars(args).items() if k in fields and v is not None}
    values["model_params"] = params
    if observables is not None and "observables" not in values:
        values["observables"] = list(observables)
    config = RunConfig(**values)
    if args.config is not None:
        data = json.loads(Path(args.config).read_text())
        unknown = set(data) - fields
        if unknown:
            raise ModelError(f"unknown config keys: {sorted(unknown)}")
        if "model_params" in data:
            data["model_params"] = {**config.model_params, **data["model_params"]}
        config = config.replace(**data)
    return config


def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_oracle(args) -> int:
    config = config_from_args(args)
    report, violations = oracle_report(config.build_model())
    report["violations"] = violations
    for warning in report.get("warnings", []):
        log.warning(warning)
    _emit(json.dumps(report, indent=2) + "\n", args.output_path)
    return EXIT_INVARIANT if violations else EXIT_OK


def _sweep_exit(rows) -> int:
    """4 if any row failed postselection, else 3 if any output was degenerate."""
    failed = [r for r in rows if r.get("status", "ok") != "ok"]
    for r in failed:
        log.error("t=%s: %s", r["t"], r["status"])
    if any(r["status"].startswith("postselection") for r in failed):
        return EXIT_POSTSELECT
    return EXIT_INVARIANT if failed else EXIT_OK


def _cmd_sweep_t(args) -> int:
    config = config_from_args(args)
    rows = sweep_t(config)
    _emit(write_csv(rows, config, "sweep-t"), config.output_path)
    return _sweep_exit(rows)


def _cmd_expect(args) -> int:
    config = config_from_args(args, observables=("sigma_y", "sigma_z", "identity"))
    rows = sweep_expect(config)
    _emit(write_csv(rows, config, "expect"), config.output_path)
    return _sweep_exit(rows)


def _cmd_ising(args) -> int:
    report, violations = ising_report(
        n_values=args.n_values, count_values=args.count_values, topology=args.topology,
        order=args.order, J=args.J, h=args.h,
    )
    circuit = trotter_step_text(args.n, args.topology, args.order, args.t0, args.steps,
                                args.J, args.h)
    if args.circuit_out:
        args.circuit_out.write_text(circuit)
        report["circuit_file"] = str(args.circuit_out)
    else:
        report["circuit"] = circuit
    report["violations"] = violations
    _emit(json.dumps(report, indent=2) + "\n", args.output_path)
    return EXIT_INVARIANT if violations else EXIT_OK


COMMANDS = {"oracle": _cmd_oracle, "sweep-t": _cmd_sweep_t, "expect": _cmd_expect,
            "ising": _cmd_ising}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except PostselectionError as exc:
        log.error("%s", exc)
        return EXIT_POSTSELECT
    except ConsistencyError as exc:
        log.error("invariant violated: %s", exc)
        return EXIT_INVARIANT
    except (ModelError, DimensionError, ValueError, json.JSONDecodeError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_MODEL
    except NessError as exc:
        log.error("%s", exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
