"""Parameter sweeps behind the command line: oracle report, t sweep, expectation sweep,
Ising circuit report.  Every function returns plain rows/dicts; CSV emission adds a
self-describing header so a file can be replayed from its own contents.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    DegenerateOutputError,
    ModelError,
    NessError,
    NonUniqueNessError,
    PostselectionError,
)
from .ising import (
    IsingSpec,
    build_M_ising_pauli,
    build_ising_model,
    circuit_to_text,
    count_gates,
    gate_count_table,
    trotter_step,
)
from .models import builtin_model, ising_spec, load_model, single_spin_as_ising
from .observables import (
    ObservableSpec,
    estimate_expectation,
    identity_observable,
    pauli_observable,
    purity_diagnostics,
    sample_expectation,
)
from .operators import LindbladModel, build_liouvillian, model_M, vec
from .oracle import fidelity, left_null_vector, solve_ness, spectral_report
from .qpe import QpeConfig, run, steady_state_overlap

OVERLAP_MIN = 1e-12

SINGLE_SPIN_T0 = 0.2
_OBS_LABEL = re.compile(r"^sigma_([xyz])(\d*)$")


@dataclass
class RunConfig:
    model: str = "single-spin"
    model_params: dict = field(default_factory=dict)
    t_range: list = field(default_factory=lambda: list(range(4, 11)))
    t0: float | None = None
    oracle_mode: str = "exact"
    trotter_order: int = 1
    trotter_steps: int = 1
    postselect_mode: str = "exact"
    max_attempts: int = 16
    observables: list = field(default_factory=lambda: ["sigma_y", "sigma_z"])
    h_values: list = field(default_factory=list)
    shots: int | None = None
    seed: int | None = None
    workers: int = 1
    output_path: str | None = None

    def validate(self) -> None:
        if not self.t_range:
            raise ModelError("t_range must not be empty")
        if any(int(t) < 1 for t in self.t_range):
            raise ModelError("every t must be >= 1")
        if (self.postselect_mode == "sampled" or self.shots) and self.seed is None:
            raise ModelError("--seed is mandatory for sampled modes")
        n_sys = self.build_model().n_sys
        for label in self.observables:
            parse_observable(label, n_sys)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("output_path")
        d.pop("workers")
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def build_model(self, **overrides) -> LindbladModel:
        params = {**self.model_params, **overrides}
        if self.model in ("single-spin", "ising"):
            return builtin_model(self.model, **params)
        return load_model(self.model)

    def resolved_t0(self) -> float | None:
        if self.t0 is None and self.model == "single-spin":
            return SINGLE_SPIN_T0
        return self.t0

    def qpe_config(self, t: int, seed: int | None) -> QpeConfig:
        return QpeConfig(
            t=int(t),
            t0=self.resolved_t0(),
            oracle=self.oracle_mode,
            trotter_order=self.trotter_order,
            trotter_steps=self.trotter_steps,
            postselect=self.postselect_mode,
            seed=seed,
            max_attempts=self.max_attempts,
        )

    def pauli_m(self, **overrides):
        """Symbolic M for built-in models (trotter mode), else None."""
        params = {**self.model_params, **overrides}
        if self.model == "ising":
            return build_M_ising_pauli(ising_spec(**params))
        if self.model == "single-spin":
            return build_M_ising_pauli(single_spin_as_ising(float(params.get("h", 1.0))))
        return None

    @property
    def mode(self) -> str:
        parts = [self.oracle_mode]
        if self.oracle_mode == "trotter":
            parts.append(f"order{self.trotter_order}-r{self.trotter_steps}")
        parts.append(self.postselect_mode)
        if self.shots:
            parts.append(f"shots{self.shots}")
        return "/".join(parts)


def parse_observable(label: str, n_sys: int) -> ObservableSpec:
    if label == "identity":
        return identity_observable(n_sys)
    match = _OBS_LABEL.match(label)
    if not match:
        raise ModelError(f"unknown observable {label!r}; use sigma_<x|y|z>[qubit] or identity")
    qubit = int(match.group(2) or 0)
    if qubit >= n_sys:
        raise ModelError(f"observable {label!r} acts outside the {n_sys}-qubit system")
    obs = pauli_observable(match.group(1).upper(), qubit, n_sys)
    return ObservableSpec(obs.op, label)


def row_seed(seed: int | None, *key: int) -> int | None:
    """Independent per-row seed, stable under any execution order."""
    if seed is None:
        return None
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1)[0])


# --------------------------------------------------------------------------- #
# Oracle report
# --------------------------------------------------------------------------- #


def _complex_list(values) -> list:
    return [[float(np.real(v)), float(np.imag(v))] for v in values]


def oracle_report(model: LindbladModel) -> tuple[dict, list[str]]:
    """Spectral data and invariant checks; returns (report, list of violations)."""
    liou = build_liouvillian(model)
    m = model_M(model)
    violations: list[str] = []
    warnings: list[str] = []
    report: dict = {"model": model.name, "n_sys": model.n_sys}
    try:
        spec = spectral_report(liou, m)
    except NessError as exc:
        return {**report, "error": str(exc)}, [str(exc)]
    report.update(
        liouvillian_eigenvalues=_complex_list(spec.liouvillian_eigs),
        gap=spec.gap,
        singular_values=[float(s) for s in spec.singular_values],
        m_eigenvalues=[float(e) for e in spec.m_eigs],
        min_nonzero_singular_value=spec.min_nonzero_singular,
        null_count=spec.null_count,
    )
    identity = vec(np.eye(2**model.n_sys))
    trace_residual = float(np.linalg.norm(liou.conj().T @ identity))
    positive = [complex(e) for e in spec.liouvillian_eigs if abs(e) > 1e-10 and e.real >= 1e-10]
    checks = {
        "weyl_bound": spec.weyl_bound_holds,
        "trace_preservation": trace_residual < 1e-10,
        "spectral_negativity": not positive,
        "m_spectrum_matches_singular_values": True,
    }
    report["trace_residual"] = trace_residual
    try:
        ness = solve_ness(liou)
        p, inv_p = purity_diagnostics(ness.rho_ss)
        report["ness"] = {
            "rho_ss": [_complex_list(row) for row in ness.rho_ss],
            "residual": ness.residual,
            "purity": p,
            "inverse_purity": inv_p,
        }
        checks["purity_bounds"] = 1 - 1e-12 <= inv_p <= 2**model.n_sys * (1 + 1e-12)
        checks["m_null_space_dim_2"] = int(np.sum(np.abs(spec.m_eigs) < 1e-10)) == 2
    except NonUniqueNessError as exc:
        warnings.append(f"non-unique NESS: {exc}")
    report["left_null_vector_overlap"] = float(
        abs(np.vdot(identity / np.linalg.norm(identity), left_null_vector(liou)))
    )
    report["checks"] = checks
    report["warnings"] = warnings
    violations += [name for name, ok in checks.items() if not ok]
    return report, violations


# --------------------------------------------------------------------------- #
# Sweeps
# --------------------------------------------------------------------------- #


def _label_key(label: str) -> str:
    match = _OBS_LABEL.match(label)
    return f"sigma_{match.group(1)}" if match and match.group(2) in ("", "0") else label


def _sweep_point(args):
    config, h, t = args
    overrides = {} if h is None else {"h": h}
    model = config.build_model(**overrides)
    rho_ss = solve_ness(build_liouvillian(model)).rho_ss
    seed = row_seed(config.seed, int(t), 0 if h is None else int(round(h * 1e6)))
    row = {"t": int(t), "seed": "" if config.seed is None else config.seed, "mode": config.mode}
    if h is not None:
        row = {"h": h, **row}
    c1 = steady_state_overlap(rho_ss)
    row["c1"] = c1
    status = "ok"
    if abs(c1) < OVERLAP_MIN:
        status = "degenerate-output: prepared state has no overlap with the steady state"
    observables = [parse_observable(lbl, model.n_sys) for lbl in config.observables]
    try:
        outcome = run(
            model,
            config.qpe_config(t, seed),
            mpauli=config.pauli_m(**overrides) if config.oracle_mode == "trotter" else None,
        )
    except PostselectionError as exc:
        return row, [], f"postselection-failed: {exc}"
    except DegenerateOutputError as exc:
        return row, [], f"degenerate-output: {exc}"
    row["p0"] = outcome.p0
    row["attempts"] = outcome.attempts
    row["one_minus_F"] = 1.0 - fidelity(rho_ss, _renormalized(outcome.rho_estimate))
    estimates = []
    for k, obs in enumerate(observables):
        if config.shots:
            est = sample_expectation(outcome.psi3, obs, config.shots, row_seed(seed, k))
        else:
            est = estimate_expectation(outcome.psi3, obs)
        exact = float(np.real(np.trace(obs.dense() @ rho_ss)))
        estimates.append((obs.label, est, exact))
        rel = abs(est.value - exact) / abs(exact) if abs(exact) > 1e-14 else float("nan")
        row[f"delta_{_label_key(obs.label)}"] = rel
    return row, estimates, status


def _renormalized(rho: np.ndarray) -> np.ndarray:
    return rho / np.trace(rho).real


def _map(fn, items, workers: int):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def sweep_t(config: RunConfig) -> list[dict]:
    """One row per t: success probability, infidelity and relative estimator errors."""
    config.validate()
    points = [(config, None, t) for t in sorted(set(int(t) for t in config.t_range))]
    rows = []
    for row, _, status in _map(_sweep_point, points, config.workers):
        row["status"] = status
        rows.append(row)
    return sorted(rows, key=lambda r: r["t"])


def sweep_expect(config: RunConfig) -> list[dict]:
    """One row per (h, t, observable) with estimate and exact value."""
    config.validate()
    hs = config.h_values or [float(config.model_params.get("h", 1.0))]
    points = [(config, float(h), int(t)) for h in sorted(hs) for t in sorted(set(config.t_range))]
    rows = []
    for base, estimates, status in _map(_sweep_point, points, config.workers):
        if not estimates:
            rows.append({"h": base["h"], "t": base["t"], "observable": "", "status": status,
                         "seed": base["seed"], "mode": base["mode"]})
            continue
        for label, est, exact in estimates:
            rows.append(
                {
                    "h": base["h"],
                    "t": base["t"],
                    "observable": label,
                    "estimate": est.value,
                    "oracle": exact,
                    "abs_error": abs(est.value - exact),
                    "rel_error": abs(est.value - exact) / abs(exact) if abs(exact) > 1e-14 else float("nan"),
                    "numerator": est.raw_numerator,
                    "denominator": est.raw_denominator,
                    "stderr": est.stderr,
                    "c1": base["c1"],
                    "seed": base["seed"],
                    "mode": base["mode"],
                    "status": status,
                }
            )
    return sorted(rows, key=lambda r: (r["h"], r["t"], r["observable"]))


# --------------------------------------------------------------------------- #
# Ising report
# --------------------------------------------------------------------------- #


def linear_fit(xs, ys) -> tuple[float, float, float]:
    """Least-squares slope, intercept and R^2."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def ising_report(
    n_values=(1, 2, 3),
    count_values=tuple(range(2, 7)),
    topology: str = "chain",
    order: int = 1,
    J: float = 1.0,
    h: float = 1.0,
    dense_max: int = 3,
) -> tuple[dict, list[str]]:
    violations = []
    agreement = []
    for n in n_values:
        if topology == "ring" and n < 3:
            continue
        spec = IsingSpec(n, topology, J, h)
        mp = build_M_ising_pauli(spec)
        entry = {
            "N": n,
            "terms": mp.to_records(),
            "max_weight": mp.max_weight(),
            "has_coupling_terms": any(t.axes.count("Z") == 2 for t in mp.terms),
        }
        if n <= dense_max:
            err = float(np.max(np.abs(mp.to_dense() - model_M(build_ising_model(spec)))))
            entry["dense_max_abs_error"] = err
            if err > 1e-12:
                violations.append(f"symbolic/dense mismatch at N={n}: {err:.2e}")
        if entry["max_weight"] > 3:
            violations.append(f"N={n}: term of weight {entry['max_weight']}")
        agreement.append(entry)
    counts = [r for r in gate_count_table(count_values, topology, order)
              if topology == "chain" or r["N"] >= 3]
    fits = {}
    for key in ("single_qubit", "cnot", "controlled_rz"):
        if len(counts) >= 2:
            slope, intercept, r2 = linear_fit([r["N"] for r in counts], [r[key] for r in counts])
            fits[key] = {"slope": slope, "intercept": intercept, "r2": r2}
            if r2 < 0.999:
                violations.append(f"{key} counts are not linear in N (R^2={r2:.5f})")
    report = {
        "topology": topology,
        "order": order,
        "agreement": agreement,
        "gate_counts": counts,
        "linear_fits": fits,
        "published_per_step": {"single_qubit": "40N", "cnot": "42N", "controlled_rz": 1},
    }
    return report, violations


def trotter_step_text(n: int, topology: str = "chain", order: int = 1, t0: float = 0.2,
                      steps: int = 1, J: float = 1.0, h: float = 1.0) -> str:
    step = trotter_step(build_M_ising_pauli(IsingSpec(n, topology, J, h)),
                        2 * np.pi * t0 / steps, order)
    counts = count_gates(step)
    header = (f"# ising N={n} topology={topology} order={order} t0={t0!r} steps={steps}\n"
              f"# counts single_qubit={counts.single_qubit} cnot={counts.cnot} "
              f"controlled_rz={counts.controlled_rz}\n")
    return header + circuit_to_text(step)


# --------------------------------------------------------------------------- #
# Output
# --------------------------------------------------------------------------- #


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_csv(rows: list[dict], config: RunConfig, command: str, path=None) -> str:
    """CSV text with a ``#`` header carrying the full config and its hash."""
    columns: list[str] = []
    for r in rows:
        for k in r:
            if k not in columns:
                columns.append(k)
    buf = io.StringIO()
    buf.write(f"# nessqpe {__version__} {command}\n")
    buf.write(f"# config {json.dumps(config.to_dict(), sort_keys=True)}\n")
    buf.write(f"# config_sha256 {config.digest()}\n")
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", restval="")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _fmt(v) for k, v in r.items()})
    text = buf.getvalue()
    if path:
        Path(path).write_text(text)
    return text


def read_csv(path) -> tuple[dict, list[dict]]:
    """Inverse of :func:`write_csv`: (config dict, rows as strings)."""
    lines = Path(path).read_text().splitlines()
    config = {}
    body = []
    for line in lines:
        if line.startswith("# config "):
            config = json.loads(line[len("# config "):])
        elif not line.startswith("#"):
            body.append(line)
    return config, list(csv.DictReader(body))
