"""Acceptance criteria, each at its stated tolerance.

Every criterion prints one ``CRITERION <n> PASS|FAIL: ...`` line.  Run as a
script (``python3 tests/test_acceptance.py``) for the summary alone.
"""

from __future__ import annotations

import functools
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from nessqpe.experiments import linear_fit
from nessqpe.ising import (
    IsingSpec,
    build_M_ising_pauli,
    build_ising_model,
    controlled_string_rotation,
    exact_unitary,
    gate_count_table,
    trotter_unitary,
)
from nessqpe.models import single_spin_model
from nessqpe.observables import estimate_expectation, pauli_observable, sample_expectation
from nessqpe.operators import PauliTerm, build_liouvillian, model_M, vec
from nessqpe.oracle import fidelity, solve_ness, spectral_report
from nessqpe.qpe import (
    QpeConfig,
    analyze,
    error_probability,
    prepare_xi_circuit,
    run,
    t_lower_bound,
)
from nessqpe.statevector import StateVector, apply

H_VALUES = (0.5, 1.0, 2.0)
T_VALUES = tuple(range(4, 11))
T0 = 0.2
GAP = 0.5


def report(number: int, passed: bool, detail: str) -> None:
    line = f"CRITERION {number} {'PASS' if passed else 'FAIL'}: {detail}"
    sys.__stdout__.write(line + "\n")
    sys.__stdout__.flush()


@functools.lru_cache(maxsize=None)
def exact_sweep():
    """Single-spin QPE runs over h and t, plus wall time."""
    start = time.perf_counter()
    data = {}
    for h in H_VALUES:
        model = single_spin_model(h)
        m = model_M(model)
        rho = solve_ness(build_liouvillian(model)).rho_ss
        for t in T_VALUES:
            out = run(model, QpeConfig(t, T0), m=m)
            data[h, t] = {
                "p0": out.p0,
                "infidelity": 1 - fidelity(rho, out.rho_estimate),
                "p_e": error_probability(out, m),
                "estimates": {
                    a: estimate_expectation(out.psi3, pauli_observable(a, 0, 1)).value
                    for a in "YZ"
                },
                "exact": {a: float(np.trace(pauli_observable(a, 0, 1).dense() @ rho).real)
                          for a in "YZ"},
            }
    return data, time.perf_counter() - start


def _slope(values) -> float:
    return linear_fit(T_VALUES, np.log2(values))[0]


def criterion_1():
    data, elapsed = exact_sweep()
    slopes = {h: _slope([data[h, t]["infidelity"] for t in T_VALUES]) for h in H_VALUES}
    ok = all(-2.3 <= s <= -1.7 for s in slopes.values()) and elapsed < 120
    detail = ", ".join(f"h={h:g} slope {s:+.3f}" for h, s in slopes.items())
    return ok, f"log2(1-F) slopes {detail} in [-2.3,-1.7]; sweep {elapsed:.2f}s < 120s"


def criterion_2():
    data, _ = exact_sweep()
    parts = []
    ok = True
    for h in H_VALUES:
        for a in "YZ":
            exact = data[h, T_VALUES[0]]["exact"][a]
            rel = [abs(data[h, t]["estimates"][a] - exact) / abs(exact) for t in T_VALUES]
            slope = _slope(rel)
            good = -1.3 <= slope <= -0.7 and rel[-1] < 1e-2
            ok &= good
            parts.append(f"h={h:g} s{a.lower()} slope {slope:+.2f} d(t=10) {rel[-1]:.1e}"
                         f"{'' if good else ' [out]'}")
    return ok, "; ".join(parts)


def criterion_3():
    data, _ = exact_sweep()
    worst = 0.0
    min_p0 = 1.0
    for (h, t), row in data.items():
        predicted = analyze(single_spin_model(h), t, T0).p0
        worst = max(worst, abs(row["p0"] - predicted))
        min_p0 = min(min_p0, row["p0"])
    ok = min_p0 > 0.5 and worst < 1e-9
    return ok, f"min p0 {min_p0:.4f} > 1/2; max |p0 - eig prediction| {worst:.1e} < 1e-9"


def criterion_4():
    data, _ = exact_sweep()
    violations = [
        (h, t, row["p_e"], 1 / (np.pi**2 * GAP**2 * 2 ** (2 * t + 1)))
        for (h, t), row in data.items()
        if row["p_e"] > 1 / (np.pi**2 * GAP**2 * 2 ** (2 * t + 1))
    ]
    t_star = t_lower_bound(GAP, 1e-3)
    at_bound = {}
    for h in H_VALUES:
        model = single_spin_model(h)
        m = model_M(model)
        at_bound[h] = error_probability(run(model, QpeConfig(t_star, T0), m=m), m)
    second = all(p < 1e-3 for p in at_bound.values())
    # Informational: the same bound written in QPE phase units (phases phi * t0).
    rescaled = max(row["p_e"] * 2 * 4**t * np.sin(np.pi * GAP * T0) ** 2
                   for (h, t), row in data.items())
    detail = (f"bound violated at {len(violations)}/{len(data)} (h,t) points"
              + (f", e.g. h={violations[0][0]:g} t={violations[0][1]}: "
                 f"p_e {violations[0][2]:.2e} > {violations[0][3]:.2e}" if violations else "")
              + f"; t_lower_bound(1/2, 1e-3) = {t_star}, max p_e there "
              f"{max(at_bound.values()):.2e} < 1e-3 {'ok' if second else 'NOT MET'}"
              f"; note: with t0 restored, max p_e / bound = {rescaled:.2f}")
    return not violations and second, detail


def criterion_5():
    cases = [(f"single-spin h={h:g}", single_spin_model(h)) for h in H_VALUES]
    cases += [(f"ising N={n}", build_ising_model(IsingSpec(n))) for n in (2, 3)]
    ok = True
    parts = []
    for name, model in cases:
        liou = build_liouvillian(model)
        m = model_M(model)
        try:
            spec = spectral_report(liou, m)
        except Exception as exc:  # a mismatch above 1e-9 raises
            ok = False
            parts.append(f"{name}: {exc}")
            continue
        mism = np.max(np.abs(np.sort(np.abs(spec.m_eigs))
                             - np.sort(np.concatenate([spec.singular_values] * 2))))
        ok &= spec.weyl_bound_holds and mism <= 1e-9
        if name.startswith("single"):
            ok &= abs(spec.gap - 0.5) <= 1e-10
        relation = "<=" if spec.weyl_bound_holds else "> (Weyl bound violated)"
        parts.append(f"{name}: |eig M| vs sv {mism:.0e}, g {spec.gap:.6f} {relation} "
                     f"min nonzero sv {spec.min_nonzero_singular:.6f}")
    return ok, "; ".join(parts)


def criterion_6():
    worst = 0.0
    counts_ok = True
    for n in range(1, 5):
        circuit = prepare_xi_circuit(n)
        state = apply(StateVector.zero(2 * n + 1), circuit).amplitudes
        target = np.zeros(2 ** (2 * n + 1), dtype=complex)
        target[: 4**n] = vec(np.eye(2**n)) / np.sqrt(2**n)
        target[4**n] = 1.0
        target /= np.sqrt(2)
        worst = max(worst, float(np.max(np.abs(state - target))))
        counts_ok &= len(circuit.gates) == 2 * n + 2
    ok = worst <= 1e-12 and counts_ok
    return ok, f"N=1..4 max amplitude error {worst:.1e} <= 1e-12; gate counts 2N+2 {counts_ok}"


def criterion_7(draws: int = 100, seed: int = 7):
    worst_m = 0.0
    for n in (1, 2, 3):
        spec = IsingSpec(n)
        diff = build_M_ising_pauli(spec).to_dense() - model_M(build_ising_model(spec))
        worst_m = max(worst_m, float(np.max(np.abs(diff))))
    rng = np.random.default_rng(seed)
    worst_t = 0.0
    for _ in range(draws):
        length = int(rng.integers(1, 5))
        k = int(rng.integers(1, min(3, length) + 1))
        axes = ["I"] * length
        for q in rng.choice(length, size=k, replace=False):
            axes[q] = "XYZ"[rng.integers(3)]
        term = PauliTerm(1.0, "".join(axes))
        delta = float(rng.uniform(-np.pi, np.pi))
        got = controlled_string_rotation(term, delta).unitary()
        want = np.eye(2 ** (length + 1), dtype=complex)
        want[2**length:, 2**length:] = exact_unitary(term.string_matrix(), delta)
        worst_t = max(worst_t, float(np.max(np.abs(got - want))))
    ok = worst_m <= 1e-12 and worst_t <= 1e-12
    return ok, (f"symbolic vs dense M (N=1..3) {worst_m:.1e}; {draws} random templates vs "
                f"controlled exp(i delta P) {worst_t:.1e}; both <= 1e-12")


def _trotter_error(mp, m, delta, r, order):
    return float(np.linalg.norm(trotter_unitary(mp, delta, r, order) - exact_unitary(m, delta), 2))


def criterion_8():
    spec = IsingSpec(2)
    mp = build_M_ising_pauli(spec)
    m = mp.to_dense()
    delta = 2 * np.pi * T0
    ratios = {}
    for order, target in ((1, 2.0), (2, 4.0)):
        e1 = _trotter_error(mp, m, delta, 16, order)
        e2 = _trotter_error(mp, m, delta, 32, order)
        ratios[order] = (e1 / e2, target)
    conv_ok = all(abs(r - tgt) <= 0.25 * tgt for r, tgt in ratios.values())

    slopes = {}
    for h in H_VALUES:
        model = single_spin_model(h)
        rho = solve_ness(build_liouvillian(model)).rho_ss
        mp1 = build_M_ising_pauli(IsingSpec(1, J=0.0, h=2 * h))
        cfg = dict(t0=T0, oracle="trotter", trotter_order=2, trotter_steps=100)
        inf = [1 - fidelity(rho, run(model, QpeConfig(t, **cfg), mpauli=mp1).rho_estimate)
               for t in T_VALUES]
        slopes[h] = _slope(inf)
    slope_ok = all(-2.3 <= s <= -1.7 for s in slopes.values())

    rows = gate_count_table(range(2, 7))
    fits = {k: linear_fit([r["N"] for r in rows], [r[k] for r in rows])
            for k in ("single_qubit", "cnot", "controlled_rz")}
    linear_ok = all(f[2] > 0.999 for f in fits.values())
    n2 = rows[0]
    detail = (
        f"r 16->32 error ratio order1 {ratios[1][0]:.3f} (2 +/- 25%), order2 {ratios[2][0]:.3f} "
        f"(4 +/- 25%); trotter-mode (order 2, r=100) slopes "
        + ", ".join(f"h={h:g} {s:+.3f}" for h, s in slopes.items())
        + "; per-step counts "
        + ", ".join(f"{k} {f[0]:.0f}N{f[1]:+.0f} R^2 {f[2]:.6f}" for k, f in fits.items())
        + f"; published figures 40N single-qubit, 42N CNOT (N=2: {n2['published_single_qubit']}, "
        f"{n2['published_cnot']}) reported only, measured N=2: {n2['single_qubit']}, {n2['cnot']}"
    )
    return conv_ok and slope_ok and linear_ok, detail


def criterion_9(seeds=range(10)):
    base = Path(tempfile.mkdtemp())
    args = ["--t", "4:7", "--postselect", "sampled", "--shots", "2000", "--seed", "11"]
    texts = []
    for k, extra in enumerate(([], [], ["--workers", "2"])):
        out = base / f"run{k}.csv"
        subprocess.run([sys.executable, "-m", "nessqpe", "sweep-t", *args, *extra,
                        "--output", str(out)], check=True)
        texts.append(out.read_bytes())
    identical = all(t == texts[0] for t in texts)

    model = single_spin_model(1.0)
    psi3 = run(model, QpeConfig(8, T0)).psi3
    obs = pauli_observable("Z", 0, 1)
    exact = estimate_expectation(psi3, obs).value
    shots_grid = (500, 2000, 8000, 32000)
    rms = []
    z_ok = 0
    for shots in shots_grid:
        errs = []
        for s in seeds:
            est = sample_expectation(psi3, obs, shots, s)
            errs.append(est.value - exact)
            z_ok += abs(est.value - exact) <= 3 * est.stderr
        rms.append(float(np.sqrt(np.mean(np.square(errs)))))
    slope = linear_fit(np.log2(shots_grid), np.log2(rms))[0]
    seeds = list(seeds)
    total = len(shots_grid) * len(seeds)
    stat_ok = -0.65 <= slope <= -0.35 and z_ok >= 0.9 * total
    return identical and stat_ok, (
        f"3 CLI runs (1 and 2 workers) byte-identical {identical}; RMS error vs shots slope "
        f"{slope:+.3f} (log-log, in [-0.65,-0.35]) over {len(seeds)} seeds; "
        f"{z_ok}/{total} within 3 stderr"
    )


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9,
}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    passed, detail = CRITERIA[number]()
    report(number, passed, detail)
    assert passed, detail


if __name__ == "__main__":
    failures = 0
    for n, fn in CRITERIA.items():
        passed, detail = fn()
        report(n, passed, detail)
        failures += not passed
    sys.exit(1 if failures else 0)
