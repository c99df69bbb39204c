"""Phase-estimation projection onto the zero eigenspace of the dilation M.

Register layout for a run with ``t`` phase qubits and an N-qubit system:
qubits ``0..t-1`` hold the phase register (qubit 0 most significant), qubit
``t`` is the dilation spin, then the 2N qubits of the vectorized density
matrix.  Phase qubit ``q`` controls ``U^(2^(t-1-q))`` with
``U = exp(2 pi i t0 M)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateOutputError, ModelError, PostselectionError
from .ising import controlled_block, trotter_step
from .operators import (
    LindbladModel,
    PauliSum,
    build_liouvillian,
    model_M,
    num_qubits,
    pauli_decompose,
    unvec,
    vec,
)
from .oracle import null_space, solve_ness
from .statevector import (
    Circuit,
    StateVector,
    apply_gate_inplace,
    apply_matrix_inplace,
    as_rng,
    ch,
    cnot,
    h,
    inverse_qft,
    project_register,
    sample_measure,
    x,
)

ORACLE_MODES = ("exact", "trotter")
POSTSELECT_MODES = ("exact", "sampled")


@dataclass(frozen=True)
class QpeConfig:
    """Run parameters.

    ``t0=None`` picks the scale with :func:`choose_t0`.  In trotter mode
    ``trotter_backend="compiled"`` multiplies out the gate-level step into a
    dense matrix once (identical action, far cheaper for large powers), while
    ``"gates"`` replays every template gate ``r * 2^j`` times.
    """

    t: int
    t0: float | None = None
    oracle: str = "exact"
    trotter_order: int = 1
    trotter_steps: int = 1
    trotter_backend: str = "compiled"
    postselect: str = "exact"
    seed: int | None = None
    max_attempts: int = 16
    strict_locality: bool = True

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if self.t0 is not None and self.t0 <= 0:
            raise ValueError("t0 must be positive")
        if self.oracle not in ORACLE_MODES:
            raise ValueError(f"oracle must be one of {ORACLE_MODES}")
        if self.postselect not in POSTSELECT_MODES:
            raise ValueError(f"postselect must be one of {POSTSELECT_MODES}")
        if self.oracle == "trotter":
            if self.trotter_steps < 1:
                raise ValueError("trotter_steps must be >= 1")
            if self.trotter_order not in (1, 2):
                raise ValueError("trotter_order must be 1 or 2")
            if self.trotter_backend not in ("compiled", "gates"):
                raise ValueError("trotter_backend must be 'compiled' or 'gates'")
        if self.postselect == "sampled":
            if self.seed is None:
                raise ValueError("sampled postselection needs a seed")
            if self.max_attempts < 1:
                raise ValueError("max_attempts must be >= 1")


@dataclass(frozen=True, eq=False)
class QpeOutcome:
    p0: float
    psi3: StateVector
    attempts: int
    rho_estimate: np.ndarray
    t0: float
    t: int


# --------------------------------------------------------------------------- #
# State preparation and scale
# --------------------------------------------------------------------------- #


def prepare_xi_circuit(n_sys: int) -> Circuit:
    """2N+2 gates taking |0...0> to (|0>|I> + |1>|0...0>)/sqrt(2).

    |I> is the normalized vectorized identity, a product of Bell pairs
    between qubits i and N+i.
    """
    if n_sys < 1:
        raise ValueError("N must be >= 1")
    gates = [h(0)]
    for i in range(1, n_sys + 1):
        gates += [ch(0, i), cnot(i, n_sys + i)]
    gates.append(x(0))
    return Circuit(2 * n_sys + 1, tuple(gates))


def xi_state(n_sys: int) -> np.ndarray:
    d = 2**n_sys
    identity = vec(np.eye(d)) / np.sqrt(d)
    zero = np.zeros(d * d, dtype=complex)
    zero[0] = 1.0
    return np.concatenate([identity, zero]) / np.sqrt(2)


def steady_state_overlap(rho_ss: np.ndarray) -> float:
    """``c1 = sqrt(2) <eta1|xi>`` with unit-norm ``eta1 = |1>|rho_ss>``.

    Only the ``|1>|0...0>`` half of the prepared state overlaps ``eta1``, so
    ``c1 = rho_ss[0, 0] / ||rho_ss||_F``; when it vanishes the output carries
    no steady-state signal.
    """
    return float(np.real(rho_ss[0, 0]) / np.linalg.norm(rho_ss))


def choose_t0(m: Union[np.ndarray, PauliSum]) -> float:
    """``1 / (2 B)`` with B the Pauli 1-norm of M, so every ``|phi t0| <= 1/2``."""
    pauli = m if isinstance(m, PauliSum) else pauli_decompose(m)
    bound = pauli.one_norm()
    if bound == 0:
        raise ModelError("M vanishes; nothing to estimate")
    return 1.0 / (2.0 * bound)


def alpha0_squared(phi, t: int):
    """Probability that QPE reads 0 for eigenphase ``phi`` (in turns)."""
    phi = np.asarray(phi, dtype=float)
    num = np.sin(np.pi * 2**t * phi) ** 2
    den = 4.0**t * np.sin(np.pi * phi) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den == 0.0, 1.0, num / np.where(den == 0.0, 1.0, den))
    return out if out.ndim else float(out)


def t_lower_bound(g: float, eps_p: float) -> int:
    """Phase-register size guaranteeing the QPE error probability bound.

    Uses base-2 logarithms; values within 1e-9 of an integer are rounded
    before the ceiling.
    """
    if g <= 0 or not 0 < eps_p <= 1:
        raise ValueError("need g > 0 and 0 < eps_p <= 1")
    value = math.log2(1 / (math.sqrt(2) * math.pi * g)) + math.log2(1 / eps_p)
    nearest = round(value)
    return int(nearest) if abs(value - nearest) < 1e-9 else math.ceil(value)


def error_probability_bound(g: float, t: int) -> float:
    return 1.0 / (math.pi**2 * g**2 * 2 ** (2 * t + 1))


# --------------------------------------------------------------------------- #
# Controlled powers of U
# --------------------------------------------------------------------------- #


class ExactOracle:
    """Controlled ``U^(2^j)`` from one Hermitian eigendecomposition of M."""

    def __init__(self, m: np.ndarray, t0: float):
        self.width = num_qubits(m)
        self.t0 = t0
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(m)

    def power(self, j: int) -> np.ndarray:
        v = self.eigenvectors
        phases = np.exp(2j * np.pi * (2**j) * self.t0 * self.eigenvalues)
        return (v * phases) @ v.conj().T

    def apply_inplace(self, psi, n, control, targets, j):
        apply_matrix_inplace(psi, n, self.power(j), targets, (control,))


class TrotterOracle:
    """Controlled ``U^(2^j)`` built from the controlled Pauli-rotation templates.

    One step is the product formula for ``exp(i (2 pi t0 / r) M)``; ``U`` is r
    steps and ``U^(2^j)`` repeats U ``2^j`` times.
    """

    def __init__(self, mpauli: PauliSum, t0: float, order: int, steps: int,
                 backend: str = "compiled", strict: bool = True):
        self.width = mpauli.width
        self.t0 = t0
        self.steps = steps
        self.backend = backend
        self.step = trotter_step(mpauli, 2 * np.pi * t0 / steps, order, strict=strict)
        self._powers: list[np.ndarray] = []
        if backend == "compiled":
            block = controlled_block(self.step, 0, list(range(1, self.width + 1)))
            self._powers.append(np.linalg.matrix_power(block, steps))

    def power(self, j: int) -> np.ndarray:
        if self.backend != "compiled":
            block = controlled_block(self.step, 0, list(range(1, self.width + 1)))
            return np.linalg.matrix_power(block, self.steps * 2**j)
        while len(self._powers) <= j:
            last = self._powers[-1]
            self._powers.append(last @ last)
        return self._powers[j]

    def apply_inplace(self, psi, n, control, targets, j):
        if self.backend == "compiled":
            apply_matrix_inplace(psi, n, self.power(j), targets, (control,))
            return
        circuit = self.step.remap([control, *targets], n)
        for _ in range(self.steps * 2**j):
            for g in circuit.gates:
                apply_gate_inplace(psi, n, g)


def make_oracle(config: QpeConfig, operator: Union[np.ndarray, PauliSum], t0: float):
    if config.oracle == "exact":
        m = operator.to_dense() if isinstance(operator, PauliSum) else operator
        return ExactOracle(m, t0)
    if not isinstance(operator, PauliSum):
        raise ModelError("trotter mode needs the Pauli form of M")
    return TrotterOracle(operator, t0, config.trotter_order, config.trotter_steps,
                         config.trotter_backend, config.strict_locality)


def controlled_power_u(state: StateVector, oracle, control: int, targets, j: int) -> StateVector:
    psi = state.copy_amplitudes()
    oracle.apply_inplace(psi, state.n, control, list(targets), j)
    return StateVector(psi)


# --------------------------------------------------------------------------- #
# Full algorithm
# --------------------------------------------------------------------------- #


def rho_from_output(psi3: StateVector, n_sys: int) -> np.ndarray:
    """Trace-one Hermitian matrix encoded in the dilation-spin-1 half of ``psi3``."""
    half = 4**n_sys
    m = unvec(psi3.amplitudes[half:])
    tr = np.trace(m)
    if abs(tr) < 1e-12:
        raise DegenerateOutputError("output state carries no trace in the |1> branch")
    m = m / tr
    return (m + m.conj().T) / 2


def qpe_state(model: LindbladModel, config: QpeConfig, oracle, t: int | None = None) -> StateVector:
    """State after preparation, controlled powers and the inverse QFT."""
    t = config.t if t is None else t
    w = 2 * model.n_sys + 1
    n = t + w
    targets = list(range(t, n))
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    prep = prepare_xi_circuit(model.n_sys).shifted(t, n)
    for g in prep.gates + tuple(h(q) for q in range(t)):
        apply_gate_inplace(psi, n, g)
    for q in range(t):
        oracle.apply_inplace(psi, n, q, targets, t - 1 - q)
    for g in inverse_qft(range(t), n).gates:
        apply_gate_inplace(psi, n, g)
    return StateVector(psi)


def run(
    model: LindbladModel,
    config: QpeConfig,
    mpauli: PauliSum | None = None,
    m: np.ndarray | None = None,
) -> QpeOutcome:
    """Prepare, phase-estimate, and postselect the phase register on all zeros.

    ``mpauli`` supplies the Pauli form of M for trotter mode (otherwise it is
    decomposed from the dense M); ``m`` may pass a precomputed dense M.
    """
    if config.oracle == "exact":
        operator = model_M(model) if m is None else m
    else:
        operator = mpauli if mpauli is not None else pauli_decompose(
            model_M(model) if m is None else m
        )
    t0 = config.t0 if config.t0 is not None else choose_t0(operator)
    oracle = make_oracle(config, operator, t0)
    psi2 = qpe_state(model, config, oracle)
    t = config.t
    zeros = "0" * t
    p0, collapsed = project_register(psi2, range(t), zeros)
    attempts = 1
    if config.postselect == "sampled":
        rng = as_rng(config.seed)
        for attempts in range(1, config.max_attempts + 1):
            bits, collapsed = sample_measure(psi2, range(t), rng)
            if bits == zeros:
                break
        else:
            raise PostselectionError(
                f"no all-zero outcome in {config.max_attempts} attempts (p0 = {p0:.4f})"
            )
    w = 2 * model.n_sys + 1
    psi3 = StateVector(collapsed.amplitudes[: 2**w])
    return QpeOutcome(p0, psi3, attempts, rho_from_output(psi3, model.n_sys), t0, t)


# --------------------------------------------------------------------------- #
# Closed-form expectations from the eigendecomposition of M
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class QpeAnalysis:
    p0: float
    p_e: float
    zero_weight: float
    c1: complex
    output: np.ndarray


def analyze(model: LindbladModel, t: int, t0: float, m: np.ndarray | None = None) -> QpeAnalysis:
    """Success probability, error probability and ideal psi3 predicted from eig(M).

    ``zero_weight`` is the squared norm of the projection of |xi> onto the
    null space of M, i.e. ``(1 + c1^2) / 2``.
    """
    m = model_M(model) if m is None else m
    w, v = np.linalg.eigh(m)
    xi = xi_state(model.n_sys)
    c = v.conj().T @ xi
    a0 = alpha0_squared(w * t0, t)
    p0 = float(np.sum(np.abs(c) ** 2 * a0))
    kernel = null_space(m)
    zero_weight = float(np.linalg.norm(kernel.conj().T @ xi) ** 2)
    rho = solve_ness(build_liouvillian(model)).rho_ss
    eta1 = np.concatenate([np.zeros(4**model.n_sys), vec(rho)])
    eta1 /= np.linalg.norm(eta1)
    c1 = complex(np.vdot(eta1, xi) * np.sqrt(2))
    k = np.arange(2**t)
    amp0 = np.exp(2j * np.pi * np.outer(w * t0, k)).mean(axis=1)
    output = v @ (c * amp0)
    return QpeAnalysis(p0, p0 - zero_weight, zero_weight, c1, output / np.linalg.norm(output))


def error_probability(outcome: QpeOutcome, m: np.ndarray) -> float:
    """Probability of reading all zeros while the system lies outside the null space of M.

    This is ``p0 * (1 - |P_0 psi3|^2)`` for the null-space projector ``P_0``.
    """
    kernel = null_space(m)
    inside = float(np.linalg.norm(kernel.conj().T @ outcome.psi3.amplitudes) ** 2)
    return outcome.p0 * max(0.0, 1.0 - inside)
