"""Built-in models and the JSON model-description format.

A model file looks like::

    {
      "n_sys": 1,
      "hamiltonian": [{"coeff": 1.0, "axes": "X"}],
      "jumps": [
        {"terms": [{"coeff": 0.5, "axes": "X"}, {"coeff": [0, -0.5], "axes": "Y"}]},
        {"sigma_minus": 0},
        {"matrix": [[0, 0], [1, 0]]}
      ]
    }

Coefficients and matrix entries are numbers, ``[re, im]`` pairs or strings
such as ``"0.5-0.5j"``.  Alternatively ``{"builtin": "single-spin", "h": 1}``
or ``{"builtin": "ising", "n": 2, "J": 1, "h": 1, "topology": "chain"}``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ModelError
from .ising import IsingSpec, build_ising_model
from .operators import (
    PAULI_MATRICES,
    SIGMA_MINUS,
    LindbladModel,
    PauliSum,
    embed,
    parse_coefficient,
)

BUILTINS = ("single-spin", "ising")


def single_spin_model(h: float) -> LindbladModel:
    """One spin driven by ``h sigma_x`` and decaying through ``sigma_minus``."""
    return LindbladModel(
        1, PauliSum([(h, "X")], width=1), (SIGMA_MINUS.copy(),), name=f"single-spin(h={h})"
    )


def _parse_jump(spec, n_sys: int):
    if "sigma_minus" in spec:
        return embed(SIGMA_MINUS, int(spec["sigma_minus"]), n_sys)
    if "terms" in spec:
        return PauliSum.from_records(spec["terms"], width=n_sys)
    if "matrix" in spec:
        rows = spec["matrix"]
        return np.array([[parse_coefficient(v) for v in row] for row in rows], dtype=complex)
    raise ModelError(f"jump operator needs 'terms', 'matrix' or 'sigma_minus': {spec!r}")


def model_from_dict(data: dict) -> LindbladModel:
    if "builtin" in data:
        return builtin_model(data["builtin"], **{k: v for k, v in data.items() if k != "builtin"})
    try:
        n_sys = int(data["n_sys"])
        hamiltonian = PauliSum.from_records(data.get("hamiltonian", []), width=n_sys)
        jumps = tuple(_parse_jump(j, n_sys) for j in data.get("jumps", []))
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model description: {exc}") from exc
    return LindbladModel(n_sys, hamiltonian, jumps, name=data.get("name", "custom"))


def load_model(path) -> LindbladModel:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read model file {path}: {exc}") from exc
    return model_from_dict(data)


def builtin_model(name: str, **params) -> LindbladModel:
    if name == "single-spin":
        return single_spin_model(float(params.get("h", 1.0)))
    if name == "ising":
        return build_ising_model(ising_spec(**params))
    raise ModelError(f"unknown builtin model {name!r}; choose from {BUILTINS}")


def ising_spec(**params) -> IsingSpec:
    return IsingSpec(
        int(params.get("n", 2)),
        params.get("topology", "chain"),
        float(params.get("J", 1.0)),
        float(params.get("h", 1.0)),
    )


def single_spin_as_ising(h: float) -> IsingSpec:
    """The same model written as a one-site Ising chain (field term is h/2 X)."""
    return IsingSpec(1, "chain", 0.0, 2.0 * h)


__all__ = [
    "BUILTINS",
    "PAULI_MATRICES",
    "builtin_model",
    "ising_spec",
    "load_model",
    "model_from_dict",
    "single_spin_as_ising",
    "single_spin_model",
]
