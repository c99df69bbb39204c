"""Dense state-vector simulator.

Qubit 0 is the most significant bit of the amplitude index.  Kernels view
the amplitude array as a rank-n tensor of shape ``(2,) * n`` (plus an
optional trailing batch axis) and update it in place; controls are handled
by slicing the control axes at 1 so only the controlled subspace is touched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, PostselectionError
from .operators import PAULI_MATRICES

UNITARY_TOL = 1e-10


def _rx(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _phase(theta):
    return np.diag([1.0, np.exp(1j * theta)])


_FIXED = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "X": PAULI_MATRICES["X"],
    "Y": PAULI_MATRICES["Y"],
    "Z": PAULI_MATRICES["Z"],
    "SWAP": np.eye(4, dtype=complex)[[0, 2, 1, 3]],
}
_ROTATIONS = {"RX": _rx, "RY": _ry, "RZ": _rz, "P": _phase}
_DIAGONAL = {"Z", "RZ", "P"}
GATE_KINDS = tuple(_FIXED) + tuple(_ROTATIONS) + ("U",)


@dataclass(frozen=True, eq=False)
class Gate:
    """A (possibly controlled) gate.

    ``kind`` is one of H, X, Y, Z, RX, RY, RZ, P, SWAP or U (explicit
    unitary in ``unitary``).  Rotations follow ``R_a(t) = exp(-i t a / 2)``;
    P is ``diag(1, e^{it})``.
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    angle: float | None = None
    unitary: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        if len(set(self.qubits)) != len(self.qubits):
            raise DimensionError(f"gate {self.kind} reuses a qubit: {self.qubits}")
        if self.kind in _ROTATIONS and self.angle is None:
            raise ValueError(f"{self.kind} needs an angle")
        if self.kind == "U":
            u = np.array(self.unitary, dtype=complex)
            if u.shape != (2 ** len(self.targets),) * 2:
                raise DimensionError("unitary does not match the number of targets")
            if not np.allclose(u @ u.conj().T, np.eye(len(u)), atol=UNITARY_TOL, rtol=0):
                raise ValueError("gate matrix is not unitary")
            u.setflags(write=False)
            object.__setattr__(self, "unitary", u)
        expected = 2 if self.kind == "SWAP" else (None if self.kind == "U" else 1)
        if expected is not None and len(self.targets) != expected:
            raise DimensionError(f"{self.kind} acts on {expected} target qubit(s)")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    def matrix(self) -> np.ndarray:
        """Matrix on the target qubits (controls excluded)."""
        if self.kind == "U":
            return self.unitary
        if self.kind in _ROTATIONS:
            return _ROTATIONS[self.kind](self.angle)
        return _FIXED[self.kind]

    def inverse(self) -> "Gate":
        if self.kind in _ROTATIONS:
            return Gate(self.kind, self.targets, self.controls, -self.angle)
        if self.kind == "U":
            return Gate("U", self.targets, self.controls, unitary=self.unitary.conj().T)
        return self

    def remap(self, mapping: Sequence[int]) -> "Gate":
        return Gate(
            self.kind,
            tuple(mapping[q] for q in self.targets),
            tuple(mapping[q] for q in self.controls),
            self.angle,
            self.unitary,
        )


# Constructors, named like the usual circuit-library helpers.
def h(q): return Gate("H", (q,))
def x(q): return Gate("X", (q,))
def y(q): return Gate("Y", (q,))
def z(q): return Gate("Z", (q,))
def rx(q, theta): return Gate("RX", (q,), angle=theta)
def ry(q, theta): return Gate("RY", (q,), angle=theta)
def rz(q, theta): return Gate("RZ", (q,), angle=theta)
def phase(q, theta): return Gate("P", (q,), angle=theta)
def swap(a, b): return Gate("SWAP", (a, b))
def cnot(c, t): return Gate("X", (t,), (c,))
def crz(c, t, theta): return Gate("RZ", (t,), (c,), theta)
def cphase(c, t, theta): return Gate("P", (t,), (c,), theta)
def ch(c, t): return Gate("H", (t,), (c,))
def cu(c, t, u): return Gate("U", (t,), (c,), unitary=u)


@dataclass(frozen=True, eq=False)
class Circuit:
    width: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(q < 0 or q >= self.width for q in g.qubits):
                raise DimensionError(f"gate {g.kind} on {g.qubits} outside width {self.width}")

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.width != self.width:
            raise DimensionError("cannot compose circuits of different widths")
        return Circuit(self.width, self.gates + other.gates)

    def inverse(self) -> "Circuit":
        return Circuit(self.width, tuple(g.inverse() for g in reversed(self.gates)))

    def remap(self, mapping: Sequence[int], width: int) -> "Circuit":
        """Relabel qubit ``q`` as ``mapping[q]`` inside a ``width``-qubit circuit."""
        return Circuit(width, tuple(g.remap(mapping) for g in self.gates))

    def shifted(self, offset: int, width: int) -> "Circuit":
        return self.remap([q + offset for q in range(self.width)], width)

    def unitary(self) -> np.ndarray:
        dim = 2**self.width
        out = np.eye(dim, dtype=complex)
        for g in self.gates:
            apply_gate_inplace(out, self.width, g)
        return out


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dim = amps.size
        if dim < 1 or dim & (dim - 1):
            raise DimensionError(f"state length {dim} is not a power of two")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        amps = np.zeros(2**n, dtype=complex)
        amps[0] = 1.0
        return cls(amps)

    @classmethod
    def from_bits(cls, bits: str) -> "StateVector":
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy_amplitudes(self) -> np.ndarray:
        return np.array(self.amplitudes)


# --------------------------------------------------------------------------- #
# Kernels
# --------------------------------------------------------------------------- #


def _controlled_view(psi: np.ndarray, n: int, controls: Iterable[int]):
    tensor = psi.reshape((2,) * n + (-1,))
    index = [slice(None)] * (n + 1)
    for c in controls:
        index[c] = 1
    return tensor[tuple(index)]


def apply_matrix_inplace(
    psi: np.ndarray,
    n: int,
    mat: np.ndarray,
    targets: Sequence[int],
    controls: Sequence[int] = (),
) -> None:
    """Apply ``mat`` to ``targets`` of ``psi`` (shape ``(2**n,)`` or ``(2**n, batch)``)."""
    sub = _controlled_view(psi, n, controls)
    remaining = [q for q in range(n) if q not in controls]
    axes = [remaining.index(q) for q in targets]
    k = len(targets)
    moved = np.moveaxis(sub, axes, list(range(k)))
    shape = moved.shape
    moved[...] = (mat @ moved.reshape(2**k, -1)).reshape(shape)


def _apply_diagonal_inplace(psi, n, diag, target, controls):
    sub = _controlled_view(psi, n, controls)
    remaining = [q for q in range(n) if q not in controls]
    axis = remaining.index(target)
    for bit in (0, 1):
        if diag[bit] != 1.0:
            idx = [slice(None)] * sub.ndim
            idx[axis] = bit
            sub[tuple(idx)] *= diag[bit]


def apply_gate_inplace(psi: np.ndarray, n: int, gate: Gate) -> None:
    if gate.kind in _DIAGONAL:
        _apply_diagonal_inplace(psi, n, np.diag(gate.matrix()), gate.targets[0], gate.controls)
    else:
        apply_matrix_inplace(psi, n, gate.matrix(), gate.targets, gate.controls)


def apply(state: StateVector, circuit: Circuit) -> StateVector:
    if circuit.width != state.n:
        raise DimensionError(f"circuit width {circuit.width} != state width {state.n}")
    psi = state.copy_amplitudes()
    for g in circuit.gates:
        apply_gate_inplace(psi, state.n, g)
    return StateVector(psi)


def apply_controlled_dense(
    state: StateVector,
    control: int | None,
    unitary: np.ndarray,
    targets: Sequence[int],
    check: bool = True,
) -> StateVector:
    """Apply ``unitary`` on ``targets`` in the subspace where ``control`` is 1.

    ``control=None`` applies it unconditionally.
    """
    unitary = np.asarray(unitary, dtype=complex)
    if unitary.shape != (2 ** len(targets),) * 2:
        raise DimensionError("unitary does not match the number of targets")
    if check and not np.allclose(
        unitary @ unitary.conj().T, np.eye(len(unitary)), atol=UNITARY_TOL, rtol=0
    ):
        raise ValueError("controlled operator is not unitary")
    qubits = list(targets) + ([] if control is None else [control])
    if len(set(qubits)) != len(qubits) or any(q < 0 or q >= state.n for q in qubits):
        raise DimensionError(f"invalid qubits {qubits} for width {state.n}")
    psi = state.copy_amplitudes()
    apply_matrix_inplace(psi, state.n, unitary, targets, () if control is None else (control,))
    return StateVector(psi)


# --------------------------------------------------------------------------- #
# Fourier transform
# --------------------------------------------------------------------------- #


def qft(qubits: Sequence[int], width: int | None = None) -> Circuit:
    """Textbook QFT on ``qubits`` (first listed is most significant), with final swaps."""
    qubits = list(qubits)
    width = max(qubits) + 1 if width is None else width
    gates = []
    t = len(qubits)
    for j in range(t):
        gates.append(h(qubits[j]))
        for k in range(j + 1, t):
            gates.append(cphase(qubits[k], qubits[j], np.pi / 2 ** (k - j)))
    for j in range(t // 2):
        gates.append(swap(qubits[j], qubits[t - 1 - j]))
    return Circuit(width, tuple(gates))


def inverse_qft(qubits: Sequence[int], width: int | None = None) -> Circuit:
    return qft(qubits, width).inverse()


# --------------------------------------------------------------------------- #
# Measurement
# --------------------------------------------------------------------------- #


def _register_slice(psi: np.ndarray, n: int, qubits: Sequence[int], bits: str):
    tensor = psi.reshape((2,) * n)
    index = [slice(None)] * n
    for q, b in zip(qubits, bits):
        index[q] = int(b)
    return tuple(index), tensor


def project_register(
    state: StateVector, qubits: Sequence[int], outcome: str
) -> tuple[float, StateVector]:
    """Probability of ``outcome`` on ``qubits`` and the renormalized post-measurement state."""
    if len(outcome) != len(qubits) or set(outcome) - {"0", "1"}:
        raise ValueError(f"outcome {outcome!r} does not match {len(qubits)} qubits")
    index, tensor = _register_slice(state.amplitudes, state.n, qubits, outcome)
    sub = tensor[index]
    prob = float(np.sum(np.abs(sub) ** 2))
    if prob <= 0.0:
        raise PostselectionError(f"outcome {outcome} has zero probability")
    out = np.zeros((2,) * state.n, dtype=complex)
    out[index] = sub / np.sqrt(prob)
    return prob, StateVector(out.reshape(-1))


def marginal_probabilities(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Born-rule distribution over ``qubits`` (index = bitstring in the given order)."""
    probs = np.abs(state.amplitudes.reshape((2,) * state.n)) ** 2
    others = tuple(q for q in range(state.n) if q not in qubits)
    marg = probs.sum(axis=others)
    order = sorted(qubits)
    marg = np.transpose(marg, [order.index(q) for q in qubits])
    return marg.reshape(-1)


def as_rng(seed) -> np.random.Generator:
    """PCG64 generator from an int seed (an existing Generator is passed through)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def sample_measure(state: StateVector, qubits: Sequence[int], rng_seed) -> tuple[str, StateVector]:
    rng = as_rng(rng_seed)
    p = marginal_probabilities(state, qubits)
    k = int(rng.choice(p.size, p=p / p.sum()))
    bits = format(k, f"0{len(qubits)}b")
    _, collapsed = project_register(state, qubits, bits)
    return bits, collapsed


def sample_counts(state: StateVector, qubits: Sequence[int], shots: int, rng_seed) -> np.ndarray:
    """Outcome counts over ``shots`` repetitions, indexed like ``marginal_probabilities``."""
    rng = as_rng(rng_seed)
    p = marginal_probabilities(state, qubits)
    return rng.multinomial(shots, p / p.sum())
