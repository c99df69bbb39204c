"""Dissipative transverse-field Ising model and its Trotterized dilation oracle.

The dilation M of this model is a 3-local Pauli Hamiltonian on 2N+1 qubits:
qubit 0 is the dilation spin, qubits 1..N carry the left (column) factor of
the vectorized density matrix and N+1..2N the right (row) factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import LocalityError, ModelError
from .operators import LindbladModel, PauliSum, PauliTerm
from .statevector import (
    Circuit,
    Gate,
    apply_gate_inplace,
    cnot,
    crz,
    phase,
    rx,
    ry,
)

PUBLISHED_SINGLE_PER_SITE = 40
PUBLISHED_CNOT_PER_SITE = 42
PUBLISHED_CRZ_PER_STEP = 1


@dataclass(frozen=True)
class IsingSpec:
    n: int
    topology: str = "chain"
    J: float = 1.0
    h: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("Ising model needs N >= 1")
        if self.topology not in ("chain", "ring"):
            raise ModelError(f"unknown topology {self.topology!r}")
        if self.topology == "ring" and self.n < 3:
            raise ModelError("a ring needs N >= 3")
        if self.gamma != 1.0:
            raise ModelError("decay rate is fixed to 1")

    def edges(self) -> list[tuple[int, int]]:
        """Nearest-neighbour pairs, 1-based site labels."""
        pairs = [(j, j + 1) for j in range(1, self.n)]
        if self.topology == "ring":
            pairs.append((self.n, 1))
        return pairs


def _string(width: int, ops: dict[int, str]) -> str:
    return "".join(ops.get(q, "I") for q in range(width))


def build_ising_model(spec: IsingSpec) -> LindbladModel:
    n = spec.n
    terms = [(spec.J / 4, _string(n, {j - 1: "Z", k - 1: "Z"})) for j, k in spec.edges()]
    terms += [(spec.h / 2, _string(n, {j: "X"})) for j in range(n)]
    hamiltonian = PauliSum(terms, width=n)
    jumps = [
        PauliSum([(0.5, _string(n, {j: "X"})), (-0.5j, _string(n, {j: "Y"}))], width=n)
        for j in range(n)
    ]
    return LindbladModel(n, hamiltonian, tuple(jumps), name=f"ising-{spec.topology}-{n}")


def build_M_ising_pauli(spec: IsingSpec) -> PauliSum:
    """Pauli form of the dilation operator, in product-formula order.

    Order: coupling terms, field terms, XY cross terms, X0 dissipative terms,
    then the constant -N/2 X0 term.
    """
    n = spec.n
    w = 2 * n + 1
    terms = []
    for j, k in spec.edges():
        terms.append((spec.J / 4, _string(w, {0: "Y", j + n: "Z", k + n: "Z"})))
        terms.append((-spec.J / 4, _string(w, {0: "Y", j: "Z", k: "Z"})))
    for j in range(1, n + 1):
        terms.append((spec.h / 2, _string(w, {0: "Y", j + n: "X"})))
        terms.append((-spec.h / 2, _string(w, {0: "Y", j: "X"})))
    for j in range(1, n + 1):
        terms.append((0.25, _string(w, {0: "Y", j: "X", j + n: "Y"})))
        terms.append((0.25, _string(w, {0: "Y", j: "Y", j + n: "X"})))
    for j in range(1, n + 1):
        terms.append((0.25, _string(w, {0: "X", j: "X", j + n: "X"})))
        terms.append((-0.25, _string(w, {0: "X", j: "Y", j + n: "Y"})))
        terms.append((-0.25, _string(w, {0: "X", j + n: "Z"})))
        terms.append((-0.25, _string(w, {0: "X", j: "Z"})))
    terms.append((-n / 2, _string(w, {0: "X"})))
    return PauliSum(terms, width=w)


# --------------------------------------------------------------------------- #
# Circuit templates
# --------------------------------------------------------------------------- #

# Basis change B with B^dag Z B equal to the axis; B is applied first.
_BASIS_IN = {"X": lambda q: ry(q, -np.pi / 2), "Y": lambda q: rx(q, np.pi / 2)}


def controlled_string_rotation(
    term: Union[PauliTerm, str],
    delta: float,
    control: int = 0,
    offset: int = 1,
    width: int | None = None,
    strict: bool = True,
) -> Circuit:
    """Controlled ``exp(i delta P)`` for the Pauli string of ``term``.

    Only the axes are used; any coefficient must already be folded into
    ``delta``.  String qubit ``q`` lands on circuit qubit ``q + offset``.
    Structure: basis change, CNOT ladder onto the last active qubit, one
    controlled ``Rz(-2 delta)``, then the mirror image.
    """
    axes = term.axes if isinstance(term, PauliTerm) else term
    if width is None:
        width = max(control, offset + len(axes) - 1) + 1
    active = [q + offset for q, a in enumerate(axes) if a != "I"]
    if strict and len(active) > 3:
        raise LocalityError(f"{axes} acts on {len(active)} qubits; 3-local strings expected")
    if control in active:
        raise ModelError("control qubit overlaps the Pauli string")
    if not active:
        return Circuit(width, (phase(control, delta),))
    basis = [_BASIS_IN[axes[q - offset]](q) for q in active if axes[q - offset] != "Z"]
    ladder = [cnot(a, b) for a, b in zip(active, active[1:])]
    gates = (
        basis
        + ladder
        + [crz(control, active[-1], -2 * delta)]
        + [g.inverse() for g in reversed(ladder)]
        + [g.inverse() for g in reversed(basis)]
    )
    return Circuit(width, tuple(gates))


def _factor_sequence(mpauli: PauliSum, order: int) -> list[tuple[PauliTerm, float]]:
    terms = list(mpauli.terms)
    if order == 1:
        return [(t, 1.0) for t in terms]
    if order == 2:
        if len(terms) == 1:
            return [(terms[0], 1.0)]
        head = [(t, 0.5) for t in terms[:-1]]
        return head + [(terms[-1], 1.0)] + head[::-1]
    raise ValueError("only first- and second-order product formulas are supported")


def trotter_step(
    mpauli: PauliSum,
    delta: float,
    order: int = 1,
    control: int = 0,
    offset: int = 1,
    width: int | None = None,
    strict: bool = True,
) -> Circuit:
    """One controlled product-formula step approximating ``C-exp(i delta M)``.

    For ``U = exp(2 pi i t0 M)`` split into r steps use ``delta = 2 pi t0 / r``.
    """
    if not mpauli.is_hermitian():
        raise ModelError("product formula needs real Pauli coefficients")
    if width is None:
        width = max(control, offset + mpauli.width - 1) + 1
    gates: list[Gate] = []
    for term, weight in _factor_sequence(mpauli, order):
        angle = weight * delta * term.coefficient.real
        gates.extend(
            controlled_string_rotation(term, angle, control, offset, width, strict).gates
        )
    return Circuit(width, tuple(gates))


def controlled_block(circuit: Circuit, control: int, targets: Sequence[int]) -> np.ndarray:
    """Matrix the circuit applies to ``targets`` when ``control`` is 1.

    Assumes every other qubit of the circuit is idle.
    """
    n = circuit.width
    k = len(targets)
    rows = []
    for b in range(2**k):
        idx = 1 << (n - 1 - control)
        for pos, q in enumerate(targets):
            if (b >> (k - 1 - pos)) & 1:
                idx |= 1 << (n - 1 - q)
        rows.append(idx)
    cols = np.zeros((2**n, 2**k), dtype=complex)
    cols[rows, np.arange(2**k)] = 1.0
    for g in circuit.gates:
        apply_gate_inplace(cols, n, g)
    return cols[rows, :]


def trotter_unitary(mpauli: PauliSum, delta: float, r: int, order: int = 1, strict: bool = True):
    """Dense r-step product-formula approximation of ``exp(i delta M)`` (gate-derived)."""
    step = trotter_step(mpauli, delta / r, order, strict=strict)
    block = controlled_block(step, 0, list(range(1, mpauli.width + 1)))
    return np.linalg.matrix_power(block, r)


def exact_unitary(m: np.ndarray, delta: float) -> np.ndarray:
    """``exp(i delta m)`` for Hermitian ``m``."""
    w, v = np.linalg.eigh(m)
    return (v * np.exp(1j * delta * w)) @ v.conj().T


# --------------------------------------------------------------------------- #
# Gate accounting and text export
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class GateCount:
    single_qubit: int = 0
    cnot: int = 0
    controlled_rz: int = 0
    other: int = 0

    @property
    def total(self) -> int:
        return self.single_qubit + self.cnot + self.controlled_rz + self.other


def count_gates(circuit: Circuit) -> GateCount:
    single = cx = crz_count = other = 0
    for g in circuit.gates:
        if not g.controls and len(g.targets) == 1:
            single += 1
        elif g.kind == "X" and len(g.controls) == 1:
            cx += 1
        elif g.kind == "RZ" and len(g.controls) == 1:
            crz_count += 1
        else:
            other += 1
    return GateCount(single, cx, crz_count, other)


def gate_count_table(ns: Sequence[int], topology: str = "chain", order: int = 1) -> list[dict]:
    """Per-step gate counts for a range of N alongside the published per-site figures."""
    rows = []
    for n in ns:
        spec = IsingSpec(n, topology)
        counts = count_gates(trotter_step(build_M_ising_pauli(spec), 0.1, order))
        rows.append(
            {
                "N": n,
                "topology": topology,
                "order": order,
                "single_qubit": counts.single_qubit,
                "cnot": counts.cnot,
                "controlled_rz": counts.controlled_rz,
                "published_single_qubit": PUBLISHED_SINGLE_PER_SITE * n,
                "published_cnot": PUBLISHED_CNOT_PER_SITE * n,
                "published_controlled_rz": PUBLISHED_CRZ_PER_STEP,
            }
        )
    return rows


def circuit_to_text(circuit: Circuit) -> str:
    """One gate per line: ``<C*KIND> <angle or -> <comma-separated qubits>``.

    Qubits list controls first, then targets.  ``U`` gates are not exportable.
    """
    lines = [f"# width {circuit.width}"]
    for g in circuit.gates:
        if g.kind == "U":
            raise ValueError("explicit-matrix gates have no text form")
        kind = "C" * len(g.controls) + g.kind
        angle = "-" if g.angle is None else repr(float(g.angle))
        lines.append(f"{kind} {angle} {','.join(str(q) for q in g.qubits)}")
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str) -> Circuit:
    width = None
    gates = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts[:1] == ["width"]:
                width = int(parts[1])
            continue
        kind, angle, qubits = line.split()
        qs = [int(q) for q in qubits.split(",")]
        base = kind.lstrip("C")
        n_controls = len(kind) - len(base)
        gates.append(
            Gate(
                base,
                tuple(qs[n_controls:]),
                tuple(qs[:n_controls]),
                None if angle == "-" else float(angle),
            )
        )
    if width is None:
        raise ValueError("missing '# width' header")
    return Circuit(width, tuple(gates))
