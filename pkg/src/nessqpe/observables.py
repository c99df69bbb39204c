"""Steady-state expectation values read out from the postselected output state."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateOutputError, ModelError
from .operators import (
    PAULI_MATRICES,
    PauliSum,
    as_dense,
    embed,
    is_hermitian,
    num_qubits,
    pauli_decompose,
)
from .statevector import StateVector, as_rng

OBSERVABLE_TOL = 1e-12
DENOMINATOR_MIN = 1e-12


@dataclass(frozen=True, eq=False)
class ObservableSpec:
    op: Union[PauliSum, np.ndarray]
    label: str = ""

    def __post_init__(self):
        if not is_hermitian(self.dense(), OBSERVABLE_TOL):
            raise ModelError(f"observable {self.label!r} is not Hermitian")

    def dense(self) -> np.ndarray:
        return as_dense(self.op)

    @property
    def n_sys(self) -> int:
        return num_qubits(self.dense())


def pauli_observable(axis: str, qubit: int, n_sys: int) -> ObservableSpec:
    """Single-site Pauli observable such as ``sigma_z`` on ``qubit``."""
    return ObservableSpec(embed(PAULI_MATRICES[axis], qubit, n_sys), f"sigma_{axis.lower()}{qubit}")


def identity_observable(n_sys: int) -> ObservableSpec:
    return ObservableSpec(np.eye(2**n_sys, dtype=complex), "identity")


@dataclass(frozen=True)
class ExpectationEstimate:
    raw_numerator: float
    raw_denominator: float
    value: float
    shots_used: int | None = None
    stderr: float = 0.0

    @property
    def exact(self) -> bool:
        return self.shots_used is None


def build_Q(obs: ObservableSpec) -> np.ndarray:
    """``X (x) I (x) O`` on the 2N+1-qubit second register."""
    o = obs.dense()
    return np.kron(PAULI_MATRICES["X"], np.kron(np.eye(o.shape[0]), o))


def _q_expectation(amplitudes: np.ndarray, o: np.ndarray) -> float:
    d = o.shape[0]
    if amplitudes.size != 2 * d * d:
        raise ModelError("observable and output state sizes do not match")
    t = amplitudes.reshape(2, d, d)
    q_psi = t[::-1] @ o.T
    return float(np.vdot(t, q_psi).real)


def estimate_expectation(psi3: StateVector, obs: ObservableSpec) -> ExpectationEstimate:
    """Ratio of ``<X I O>`` to ``<X I I>`` on the output state."""
    o = obs.dense()
    num = _q_expectation(psi3.amplitudes, o)
    den = _q_expectation(psi3.amplitudes, np.eye(o.shape[0], dtype=complex))
    if abs(den) < DENOMINATOR_MIN:
        raise DegenerateOutputError(f"identity readout {den:.2e} is too small to normalize")
    return ExpectationEstimate(num, den, num / den)


_ROTATE_TO_Z = {
    "X": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "Y": np.array([[1, -1j], [1, 1j]], dtype=complex) / np.sqrt(2),
}


def _sample_pauli(amplitudes: np.ndarray, axes: str, shots: int, rng) -> float:
    """Mean of ``shots`` single-shot +/-1 readouts of a Pauli string."""
    n = len(axes)
    tensor = np.array(amplitudes).reshape((2,) * n)
    active = [q for q, a in enumerate(axes) if a != "I"]
    for q in active:
        if axes[q] in _ROTATE_TO_Z:
            tensor = np.moveaxis(np.tensordot(_ROTATE_TO_Z[axes[q]], tensor, axes=([1], [q])), 0, q)
    probs = np.abs(tensor) ** 2
    others = tuple(q for q in range(n) if q not in active)
    marg = probs.sum(axis=others).reshape(-1)
    counts = rng.multinomial(shots, marg / marg.sum())
    parity = np.array([(-1) ** bin(k).count("1") for k in range(marg.size)])
    return float(counts @ parity) / shots


def sample_expectation(psi3: StateVector, obs: ObservableSpec, shots: int, seed) -> ExpectationEstimate:
    """Shot-based version of :func:`estimate_expectation`.

    ``X I O`` is split into Pauli strings, each measured ``shots`` times in
    its own rotated basis; the standard error comes from the delta method.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = as_rng(seed)
    pauli = obs.op if isinstance(obs.op, PauliSum) else pauli_decompose(obs.dense())
    pad = "I" * pauli.width
    amps = psi3.amplitudes
    num = 0.0
    var_num = 0.0
    for term in pauli.terms:
        mean = _sample_pauli(amps, "X" + pad + term.axes, shots, rng)
        c = term.coefficient.real
        num += c * mean
        var_num += c**2 * (1 - mean**2) / shots
    den = _sample_pauli(amps, "X" + pad + pad, shots, rng)
    var_den = (1 - den**2) / shots
    if abs(den) < DENOMINATOR_MIN:
        raise DegenerateOutputError("sampled identity readout vanished")
    value = num / den
    stderr = float(np.sqrt(var_num / den**2 + value**2 * var_den / den**2))
    return ExpectationEstimate(num, den, value, shots, stderr)


def purity_diagnostics(rho: np.ndarray) -> tuple[float, float]:
    p = float(np.real(np.trace(rho @ rho)))
    return p, 1.0 / p
