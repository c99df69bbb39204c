"""Exact dense reference: steady state, Liouvillian gap and dilation spectrum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, ConvergenceError, NessError, NonUniqueNessError
from .operators import is_hermitian, num_qubits, unvec, vec

NULL_RTOL = 1e-10
PSD_CLIP = -1e-10
RESIDUAL_MAX = 1e-8
SPECTRUM_ATOL = 1e-9
TRACE_TOL = 1e-8


def null_tolerance(eigenvalues: np.ndarray) -> float:
    """Zero threshold relative to the spectral radius."""
    radius = float(np.max(np.abs(eigenvalues), initial=0.0))
    return NULL_RTOL * radius if radius > 0 else NULL_RTOL


@dataclass(frozen=True)
class NessSolution:
    rho_ss: np.ndarray
    residual: float
    purity: float
    eigenvalue: complex


@dataclass(frozen=True)
class SpectralReport:
    liouvillian_eigs: np.ndarray
    gap: float
    singular_values: np.ndarray
    m_eigs: np.ndarray
    null_count: int

    @property
    def min_nonzero_singular(self) -> float:
        tol = null_tolerance(self.singular_values)
        nz = self.singular_values[self.singular_values > tol]
        return float(nz.min()) if nz.size else 0.0

    @property
    def weyl_bound_holds(self) -> bool:
        return self.gap <= self.min_nonzero_singular * (1 + 1e-12)


def clip_psd(rho: np.ndarray) -> np.ndarray:
    """Hermitian part of ``rho`` with negative eigenvalues set to zero."""
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    return (v * np.clip(w, 0.0, None)) @ v.conj().T


def _sqrt_psd(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def solve_ness(liou: np.ndarray) -> NessSolution:
    """Steady state from the eigenvector of ``liou`` closest to zero.

    Raises NonUniqueNessError when more than one eigenvalue is numerically
    zero and ConvergenceError if the cleaned-up state is not a null vector.
    """
    num_qubits(liou)
    w, v = np.linalg.eig(liou)
    tol = null_tolerance(w)
    zeros = np.flatnonzero(np.abs(w) < tol)
    if zeros.size > 1:
        raise NonUniqueNessError(f"{zeros.size} eigenvalues within {tol:.1e} of zero")
    idx = int(np.argmin(np.abs(w)))
    rho = unvec(v[:, idx])
    rho = rho / np.trace(rho)
    rho = (rho + rho.conj().T) / 2
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < PSD_CLIP:
        raise ConvergenceError(f"steady state has eigenvalue {evals.min():.3e} < {PSD_CLIP}")
    rho = clip_psd(rho)
    rho = rho / np.trace(rho).real
    residual = float(np.linalg.norm(liou @ vec(rho)))
    if residual > RESIDUAL_MAX:
        raise ConvergenceError(f"steady-state residual {residual:.3e} exceeds {RESIDUAL_MAX}")
    return NessSolution(rho, residual, purity(rho), complex(w[idx]))


def left_null_vector(liou: np.ndarray) -> np.ndarray:
    """Null vector of ``liou^dag`` (the vectorized identity for trace-preserving maps)."""
    w, v = np.linalg.eig(liou.conj().T)
    return v[:, int(np.argmin(np.abs(w)))]


def liouvillian_gap(eigs: np.ndarray) -> float:
    """Smallest ``|Re lambda|`` over nonzero eigenvalues; real parts below tolerance count as 0."""
    tol = null_tolerance(eigs)
    nonzero = eigs[np.abs(eigs) > tol]
    if not nonzero.size:
        return 0.0
    rates = np.abs(nonzero.real)
    return float(np.min(np.where(rates > tol, rates, 0.0)))


def spectral_report(liou: np.ndarray, m: np.ndarray) -> SpectralReport:
    """Eigenvalues and gap of ``liou``, its singular values and the spectrum of M.

    The eigenvalues of M must coincide with +/- the singular values of the
    Liouvillian; a mismatch above ``SPECTRUM_ATOL`` raises ConsistencyError.
    """
    if m.shape[0] != 2 * liou.shape[0]:
        raise ConsistencyError("M is not the dilation of this Liouvillian")
    if not is_hermitian(m):
        raise ConsistencyError("M is not Hermitian")
    eigs = np.linalg.eigvals(liou)
    sv = np.linalg.svd(liou, compute_uv=False)
    m_eigs = np.linalg.eigvalsh(m)
    doubled = np.sort(np.concatenate([sv, sv]))
    mismatch = np.max(np.abs(np.sort(np.abs(m_eigs)) - doubled))
    if mismatch > SPECTRUM_ATOL:
        raise ConsistencyError(f"|eig(M)| differs from singular values by {mismatch:.2e}")
    sym = np.max(np.abs(np.sort(m_eigs) + np.sort(m_eigs)[::-1]))
    if sym > SPECTRUM_ATOL:
        raise ConsistencyError(f"spectrum of M is not sign-symmetric ({sym:.2e})")
    tol = null_tolerance(eigs)
    return SpectralReport(
        liouvillian_eigs=eigs,
        gap=liouvillian_gap(eigs),
        singular_values=np.sort(sv),
        m_eigs=m_eigs,
        null_count=int(np.sum(np.abs(eigs) < tol)),
    )


def null_space(m: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the numerically-zero eigenspace of Hermitian ``m``."""
    w, v = np.linalg.eigh(m)
    return v[:, np.abs(w) < null_tolerance(w)]


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(a) b sqrt(a)))**2`` of two density matrices."""
    for name, rho in (("a", a), ("b", b)):
        if abs(np.trace(rho) - 1) > TRACE_TOL:
            raise NessError(f"density matrix {name} has trace {np.trace(rho):.6g}")
    sa = _sqrt_psd(a)
    inner = sa @ ((b + b.conj().T) / 2) @ sa
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    f = float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)
    return min(f, 1.0)
