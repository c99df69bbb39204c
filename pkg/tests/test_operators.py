import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_density, random_hermitian
from nessqpe.errors import DimensionError, ModelError
from nessqpe.ising import IsingSpec, build_M_ising_pauli, build_ising_model
from nessqpe.models import single_spin_model
from nessqpe.operators import (
    PAULI_MATRICES,
    SIGMA_MINUS,
    LindbladModel,
    PauliSum,
    PauliTerm,
    build_liouvillian,
    build_M,
    devectorize,
    dilate,
    model_M,
    parse_coefficient,
    pauli_decompose,
    split_hermitian,
    unvec,
    vec,
    vectorize,
)
from nessqpe.oracle import solve_ness

X, Y, Z = (PAULI_MATRICES[a] for a in "XYZ")


def decay_model(h=0.0):
    return LindbladModel(1, h * X, (SIGMA_MINUS,))


# --- vectorization -----------------------------------------------------------


def test_vec_of_half_identity():
    v = vectorize(np.eye(2) / 2)
    assert np.allclose(v.amplitudes, [0.5, 0, 0, 0.5])
    assert v.norm_convention == "raw"


def test_vec_left_multiplication_convention():
    rho = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
    assert np.flatnonzero(vec(rho)).tolist() == [2]
    assert np.allclose(np.kron(np.eye(2), X) @ vec(rho), vec(X @ rho))


def test_vec_sandwich_identity(rng):
    rho = random_density(rng, 4)
    h = random_hermitian(rng, 4)
    assert np.allclose(vec(h @ rho @ h), np.kron(h.T, h) @ vec(rho), atol=1e-12)


@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_vec_roundtrip_and_products(n, seed):
    r = np.random.default_rng(seed)
    d = 2**n
    a, b, rho = (r.normal(size=(d, d)) + 1j * r.normal(size=(d, d)) for _ in range(3))
    assert np.array_equal(unvec(vec(rho)), rho)
    assert np.allclose(vec(a @ rho @ b), np.kron(b.T, a) @ vec(rho), atol=1e-10)


def test_normalization_conventions(rng):
    rho = random_density(rng, 4)
    raw = vectorize(rho)
    unit = raw.normalized("unit")
    tr = unit.normalized("trace")
    assert np.isclose(np.linalg.norm(unit.amplitudes), 1)
    assert np.isclose(np.trace(devectorize(tr)), 1)
    assert np.allclose(tr.to_density(), rho)
    assert unit.n_sys == 2
    with pytest.raises(ValueError):
        raw.normalized("frobenius")


def test_unvec_rejects_bad_lengths():
    with pytest.raises(DimensionError):
        unvec(np.zeros(8))
    with pytest.raises(DimensionError):
        unvec(np.zeros(9))


# --- Pauli sums ----------------------------------------------------------------


def test_pauli_sum_merges_and_drops():
    s = PauliSum([(1.0, "XZ"), (0.5, "YY"), (-1.0, "XZ"), (1e-14, "ZZ")])
    assert s.coefficients() == {"YY": 0.5}
    t = PauliSum([(1, "XI"), (2, "IX")]) + PauliSum([(1, "XI")])
    assert t.coefficients() == {"XI": 2, "IX": 2}
    assert (t * 0.5).coefficients() == {"XI": 1, "IX": 1}


def test_pauli_sum_width_mismatch():
    with pytest.raises(ModelError):
        PauliSum([(1, "X"), (1, "XY")])


def test_pauli_term_dense():
    term = PauliTerm(2.0, "XIZ")
    assert term.weight == 2 and term.support() == [0, 2]
    assert np.allclose(term.to_dense(), 2 * np.kron(X, np.kron(np.eye(2), Z)))


def test_records_roundtrip():
    s = PauliSum([(0.5, "XY"), (0.25j, "ZZ")])
    back = PauliSum.from_records(s.to_records())
    assert back.coefficients() == s.coefficients()


@pytest.mark.parametrize("text, value", [(1, 1), ([0, -0.5], -0.5j), ("0.5-0.5j", 0.5 - 0.5j)])
def test_parse_coefficient(text, value):
    assert parse_coefficient(text) == value


def test_decompose_single_x():
    s = pauli_decompose(X)
    assert s.coefficients() == {"X": 1.0}


@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_decompose_roundtrip_and_real(n, seed):
    h = random_hermitian(np.random.default_rng(seed), 2**n)
    s = pauli_decompose(h)
    assert np.allclose(s.to_dense(), h, atol=1e-12)
    assert all(abs(c.imag) < 1e-12 for c in s.coefficients().values())


def test_decompose_ising_matches_symbolic():
    spec = IsingSpec(2)
    dense = pauli_decompose(model_M(build_ising_model(spec))).coefficients()
    symbolic = build_M_ising_pauli(spec).coefficients()
    assert dense.keys() == symbolic.keys()
    assert all(abs(dense[k] - symbolic[k]) < 1e-12 for k in dense)


# --- models and Liouvillian --------------------------------------------------------


def test_non_hermitian_hamiltonian_rejected():
    with pytest.raises(ModelError):
        LindbladModel(1, SIGMA_MINUS, ())


def test_jump_dimension_checked():
    with pytest.raises(DimensionError):
        LindbladModel(1, X, (np.eye(4),))


def test_pure_decay_spectrum():
    ev = np.sort_complex(np.linalg.eigvals(build_liouvillian(decay_model())))
    assert np.allclose(ev, [-1, -0.5, -0.5, 0], atol=1e-12)


def test_unitary_liouvillian_is_anti_hermitian(rng):
    h = random_hermitian(rng, 4)
    liou = build_liouvillian(LindbladModel(2, h))
    assert np.allclose(liou, -liou.conj().T)
    assert np.allclose(liou @ vec(np.eye(4)), 0)


def test_matches_lindblad_action(rng):
    model = build_ising_model(IsingSpec(2, J=0.7, h=1.3))
    h = model.hamiltonian_dense()
    rho = random_density(rng, 4)
    expect = -1j * (h @ rho - rho @ h)
    for a in model.jumps_dense():
        ad = a.conj().T
        expect += a @ rho @ ad - 0.5 * (ad @ a @ rho + rho @ ad @ a)
    assert np.allclose(build_liouvillian(model) @ vec(rho), vec(expect), atol=1e-12)


def test_trace_preservation():
    liou = build_liouvillian(build_ising_model(IsingSpec(3, "ring")))
    assert np.linalg.norm(liou.conj().T @ vec(np.eye(8))) < 1e-12


def test_ness_is_null_vector():
    liou = build_liouvillian(single_spin_model(1.0))
    assert np.linalg.norm(liou @ vec(solve_ness(liou).rho_ss)) < 1e-10


@pytest.mark.parametrize("model", [decay_model(0.0), single_spin_model(1.0),
                                   build_ising_model(IsingSpec(2))])
def test_split_recombines(model):
    liou = build_liouvillian(model)
    l_h, l_a = split_hermitian(model)
    assert np.allclose(l_h, l_h.conj().T) and np.allclose(l_a, l_a.conj().T)
    assert np.max(np.abs(l_h - (liou + liou.conj().T) / 2)) < 1e-12
    assert np.max(np.abs(l_a - 1j * (liou - liou.conj().T) / 2)) < 1e-12
    assert np.allclose(l_h - 1j * l_a, liou)


def test_split_no_jumps_has_zero_dissipative_part(rng):
    l_h, _ = split_hermitian(LindbladModel(1, random_hermitian(rng, 2)))
    assert np.array_equal(l_h, np.zeros_like(l_h))


def test_split_pure_decay_anti_hermitian_part_is_jump_commutator():
    _, l_a = split_hermitian(decay_model())
    a = SIGMA_MINUS
    want = 0.5j * (np.kron(a.conj(), a) - np.kron(a.T, a.conj().T))
    assert np.allclose(l_a, want)


def test_build_M_blocks_and_zero():
    model = single_spin_model(0.5)
    m = model_M(model)
    liou = build_liouvillian(model)
    assert np.allclose(m, dilate(liou))
    assert np.allclose(m[:4, 4:], liou) and np.allclose(m[4:, :4], liou.conj().T)
    assert not np.any(build_M(np.zeros((4, 4)), np.zeros((4, 4))))


def test_M_spectrum_sign_symmetric_with_two_zeros():
    m = model_M(single_spin_model(1.0))
    w = np.linalg.eigvalsh(m)
    assert np.allclose(np.sort(w), np.sort(-w), atol=1e-10)
    assert int(np.sum(np.abs(w) < 1e-10)) == 2
