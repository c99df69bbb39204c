"""Steady states of Lindblad dynamics by phase estimation on a Hermitian dilation."""

__version__ = "0.1.0"

from .errors import (
    ConsistencyError,
    ConvergenceError,
    DegenerateOutputError,
    DimensionError,
    LocalityError,
    ModelError,
    NessError,
    NonUniqueNessError,
    PostselectionError,
    ResourceError,
)
from .ising import IsingSpec, build_ising_model, build_M_ising_pauli, trotter_step
from .models import builtin_model, load_model, model_from_dict, single_spin_model
from .observables import ObservableSpec, estimate_expectation, pauli_observable, sample_expectation
from .operators import (
    LindbladModel,
    PauliSum,
    PauliTerm,
    VectorizedDensity,
    build_liouvillian,
    build_M,
    devectorize,
    model_M,
    pauli_decompose,
    split_hermitian,
    vectorize,
)
from .oracle import fidelity, solve_ness, spectral_report
from .qpe import QpeConfig, QpeOutcome, analyze, choose_t0, prepare_xi_circuit, run, t_lower_bound
from .statevector import Circuit, Gate, StateVector, apply, inverse_qft, qft
