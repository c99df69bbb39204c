"""Pauli-string and dense operator algebra for vectorized Lindblad generators.

Conventions used throughout the package:

* qubit 0 is the most significant bit of a computational-basis index;
* density matrices are vectorized by stacking columns, so the amplitude at
  composite index ``k * 2**N + j`` is ``rho[j, k]``.  With this choice
  ``vec(A @ rho @ B) == kron(B.T, A) @ vec(rho)``, in particular
  ``vec(O @ rho) == kron(I, O) @ vec(rho)``.

Dense operators are plain complex ``numpy`` arrays whose side is a power of two.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ConsistencyError, DimensionError, ModelError, ResourceError

DEDUP_TOL = 1e-12
HERMITICITY_TOL = 1e-10
MAX_DECOMPOSE_QUBITS = 12

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_AXES = "IXYZ"

SIGMA_MINUS = (PAULI_MATRICES["X"] - 1j * PAULI_MATRICES["Y"]) / 2
SIGMA_PLUS = SIGMA_MINUS.conj().T


def num_qubits(op: np.ndarray) -> int:
    """Qubit count of a square operator, or raise if it is not 2^n x 2^n."""
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {op.shape}")
    dim = op.shape[0]
    if dim < 1 or dim & (dim - 1):
        raise DimensionError(f"dimension {dim} is not a power of two")
    return dim.bit_length() - 1


def is_hermitian(op: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    op = np.asarray(op)
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) <= tol)


def embed(op: np.ndarray, qubit: int, width: int) -> np.ndarray:
    """Place a single-qubit operator on ``qubit`` of a ``width``-qubit register."""
    left = np.eye(2**qubit, dtype=complex)
    right = np.eye(2 ** (width - qubit - 1), dtype=complex)
    return np.kron(np.kron(left, op), right)


# --------------------------------------------------------------------------- #
# Pauli sums
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class PauliTerm:
    coefficient: complex
    axes: str

    def __post_init__(self):
        if not self.axes or any(a not in _AXES for a in self.axes):
            raise ModelError(f"invalid Pauli string {self.axes!r}")
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @property
    def width(self) -> int:
        return len(self.axes)

    @property
    def weight(self) -> int:
        return sum(a != "I" for a in self.axes)

    def support(self) -> list[int]:
        return [q for q, a in enumerate(self.axes) if a != "I"]

    def string_matrix(self) -> np.ndarray:
        """Dense matrix of the bare Pauli string (coefficient not applied)."""
        out = np.ones((1, 1), dtype=complex)
        for a in self.axes:
            out = np.kron(out, PAULI_MATRICES[a])
        return out

    def to_dense(self) -> np.ndarray:
        return self.coefficient * self.string_matrix()


TermLike = Union[PauliTerm, tuple]


@dataclass(frozen=True)
class PauliSum:
    """Canonical weighted sum of Pauli strings.

    Duplicate strings are merged (first occurrence fixes the position), terms
    with ``|coefficient| < DEDUP_TOL`` are dropped and imaginary parts below
    the same tolerance are zeroed.  Term order is preserved otherwise, which
    is what lets builders fix a deterministic product-formula ordering.
    """

    terms: tuple[PauliTerm, ...]
    width: int

    def __init__(self, terms: Iterable[TermLike] = (), width: int | None = None):
        merged: dict[str, complex] = {}
        for term in terms:
            if not isinstance(term, PauliTerm):
                coeff, axes = term
                term = PauliTerm(coeff, axes)
            if width is None:
                width = term.width
            elif term.width != width:
                raise ModelError(
                    f"term {term.axes!r} has width {term.width}, expected {width}"
                )
            merged[term.axes] = merged.get(term.axes, 0.0) + term.coefficient
        if width is None:
            raise ModelError("an empty PauliSum needs an explicit width")
        canon = []
        for axes, c in merged.items():
            if abs(c) < DEDUP_TOL:
                continue
            if abs(c.imag) < DEDUP_TOL:
                c = complex(c.real, 0.0)
            canon.append(PauliTerm(c, axes))
        object.__setattr__(self, "terms", tuple(canon))
        object.__setattr__(self, "width", int(width))

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.width != self.width:
            raise ModelError("cannot add PauliSums of different widths")
        return PauliSum(self.terms + other.terms, self.width)

    def __mul__(self, scalar: complex) -> "PauliSum":
        return PauliSum(
            (PauliTerm(t.coefficient * scalar, t.axes) for t in self.terms), self.width
        )

    __rmul__ = __mul__

    def coefficients(self) -> dict[str, complex]:
        return {t.axes: t.coefficient for t in self.terms}

    def is_hermitian(self) -> bool:
        return all(t.coefficient.imag == 0.0 for t in self.terms)

    def max_weight(self) -> int:
        return max((t.weight for t in self.terms), default=0)

    def one_norm(self) -> float:
        return float(sum(abs(t.coefficient) for t in self.terms))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((2**self.width, 2**self.width), dtype=complex)
        for t in self.terms:
            out += t.to_dense()
        return out

    @classmethod
    def from_records(cls, records: Sequence[dict], width: int | None = None) -> "PauliSum":
        """Build from ``[{"coeff": ..., "axes": "XZ"}, ...]`` records."""
        return cls(
            (PauliTerm(parse_coefficient(r["coeff"]), r["axes"]) for r in records), width
        )

    def to_records(self) -> list[dict]:
        return [
            {"coeff": format_coefficient(t.coefficient), "axes": t.axes} for t in self.terms
        ]


def parse_coefficient(value) -> complex:
    """Accept ``1.5``, ``"0.5-0.5j"`` or ``[re, im]``."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ModelError(f"complex coefficient must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError as exc:
            raise ModelError(f"cannot parse coefficient {value!r}") from exc
    if isinstance(value, (int, float, complex)):
        return complex(value)
    raise ModelError(f"cannot parse coefficient {value!r}")


def format_coefficient(c: complex):
    c = complex(c)
    return c.real if c.imag == 0.0 else [c.real, c.imag]


def pauli_decompose(op: np.ndarray, max_qubits: int = MAX_DECOMPOSE_QUBITS) -> PauliSum:
    """Hilbert-Schmidt projection of ``op`` onto all Pauli strings.

    Runs in O(n 4^n) by contracting one qubit at a time instead of forming
    the 4^n string matrices.  Terms come out in lexicographic IXYZ order.
    """
    op = np.asarray(op, dtype=complex)
    n = num_qubits(op)
    if n > max_qubits:
        raise ResourceError(f"pauli_decompose capped at {max_qubits} qubits, got {n}")
    if n == 0:
        return PauliSum([], width=0)
    perm = [ax for k in range(n) for ax in (k, n + k)]
    coeffs = op.reshape((2,) * (2 * n)).transpose(perm).reshape((4,) * n)
    # basis[a, 2 i + j] = P_a[j, i] so that sum_ij basis[a, 2i+j] op[i, j] = Tr(P_a op)
    basis = np.array([PAULI_MATRICES[a].T.reshape(4) for a in _AXES])
    for k in range(n):
        coeffs = np.moveaxis(np.tensordot(basis, coeffs, axes=([1], [k])), 0, k)
    coeffs = coeffs / 2**n
    flat = coeffs.reshape(-1)
    terms = []
    for idx in np.flatnonzero(np.abs(flat) >= DEDUP_TOL):
        digits = np.unravel_index(idx, (4,) * n)
        terms.append(PauliTerm(flat[idx], "".join(_AXES[d] for d in digits)))
    return PauliSum(terms, width=n)


# --------------------------------------------------------------------------- #
# Models and vectorization
# --------------------------------------------------------------------------- #

OperatorLike = Union[PauliSum, np.ndarray]


def as_dense(op: OperatorLike, n: int | None = None) -> np.ndarray:
    mat = op.to_dense() if isinstance(op, PauliSum) else np.asarray(op, dtype=complex)
    width = num_qubits(mat)
    if n is not None and width != n:
        raise DimensionError(f"operator acts on {width} qubits, expected {n}")
    return mat


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian and jump operators on ``n_sys`` qubits (hbar = 1)."""

    n_sys: int
    hamiltonian: OperatorLike
    jumps: tuple = field(default=())
    name: str = "custom"

    def __post_init__(self):
        if self.n_sys < 1:
            raise ModelError("n_sys must be >= 1")
        object.__setattr__(self, "jumps", tuple(self.jumps))
        h = self.hamiltonian_dense()
        if not is_hermitian(h):
            raise ModelError("Hamiltonian is not Hermitian")
        for a in self.jumps:
            as_dense(a, self.n_sys)

    def hamiltonian_dense(self) -> np.ndarray:
        return as_dense(self.hamiltonian, self.n_sys)

    def jumps_dense(self) -> list[np.ndarray]:
        return [as_dense(a, self.n_sys) for a in self.jumps]


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization: ``vec(rho)[k * d + j] == rho[j, k]``."""
    num_qubits(rho)
    return np.asarray(rho).T.reshape(-1).copy()


def unvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size or v.ndim != 1:
        raise DimensionError(f"vector of length {v.size} is not a vectorized square matrix")
    num_qubits(np.empty((d, d)))
    return v.reshape(d, d).T.copy()


CONVENTIONS = ("raw", "unit", "trace")


@dataclass(frozen=True)
class VectorizedDensity:
    """Vectorized operator with an explicit normalization flag.

    ``raw`` keeps the matrix entries as they are, ``unit`` has Euclidean
    norm one (the state a quantum register can hold) and ``trace`` has a
    devectorized trace of one.
    """

    amplitudes: np.ndarray
    norm_convention: str = "raw"

    def __post_init__(self):
        if self.norm_convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {self.norm_convention!r}")
        amps = np.array(self.amplitudes, dtype=complex)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_sys(self) -> int:
        return num_qubits(unvec(self.amplitudes))

    def normalized(self, convention: str) -> "VectorizedDensity":
        amps = np.array(self.amplitudes)
        if convention == "unit":
            amps = amps / np.linalg.norm(amps)
        elif convention == "trace":
            amps = amps / np.trace(unvec(amps))
        return VectorizedDensity(amps, convention)

    def to_density(self) -> np.ndarray:
        """Trace-one Hermitian part of the devectorized matrix."""
        m = unvec(self.amplitudes)
        m = m / np.trace(m)
        return (m + m.conj().T) / 2


def vectorize(rho: np.ndarray, convention: str = "raw") -> VectorizedDensity:
    return VectorizedDensity(vec(rho), "raw").normalized(convention)


def devectorize(v: VectorizedDensity | np.ndarray) -> np.ndarray:
    amps = v.amplitudes if isinstance(v, VectorizedDensity) else v
    return unvec(amps)


def build_liouvillian(model: LindbladModel) -> np.ndarray:
    """Vectorized Lindblad generator on 2N qubits."""
    h = model.hamiltonian_dense()
    ident = np.eye(h.shape[0], dtype=complex)
    liou = -1j * (np.kron(ident, h) - np.kron(h.T, ident))
    for a in model.jumps_dense():
        ada = a.conj().T @ a
        liou -= 0.5 * (
            np.kron(ident, ada) + np.kron(a.T @ a.conj(), ident) - 2 * np.kron(a.conj(), a)
        )
    return liou


def split_hermitian(model: LindbladModel) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(L_H, L_A)``, both Hermitian, with ``L = L_H - 1j * L_A``.

    Assembled term by term from H and the jumps, not from ``L``; the
    Hermiticity check therefore catches encoding mistakes.
    """
    h = model.hamiltonian_dense()
    ident = np.eye(h.shape[0], dtype=complex)
    l_a = np.kron(ident, h) - np.kron(h.T, ident)
    l_h = np.zeros_like(l_a)
    for a in model.jumps_dense():
        cross = np.kron(a.conj(), a)
        cross_t = np.kron(a.T, a.conj().T)
        l_a = l_a + 0.5j * (cross - cross_t)
        l_h = l_h + 0.5 * (
            cross + cross_t - np.kron(ident, a.conj().T @ a) - np.kron(a.T @ a.conj(), ident)
        )
    for name, op in (("L_H", l_h), ("L_A", l_a)):
        if not is_hermitian(op):
            raise ConsistencyError(f"{name} is not Hermitian; model encoding is broken")
    return l_h, l_a


def build_M(l_h: np.ndarray, l_a: np.ndarray) -> np.ndarray:
    """Hermitian dilation ``X (x) L_H + Y (x) L_A``; dilation qubit is qubit 0."""
    return np.kron(PAULI_MATRICES["X"], l_h) + np.kron(PAULI_MATRICES["Y"], l_a)


def dilate(liou: np.ndarray) -> np.ndarray:
    """Block form ``[[0, L], [L^dag, 0]]`` of the same operator."""
    zero = np.zeros_like(liou)
    return np.block([[zero, liou], [liou.conj().T, zero]])


def model_M(model: LindbladModel) -> np.ndarray:
    return build_M(*split_hermitian(model))
