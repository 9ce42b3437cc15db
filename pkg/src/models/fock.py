"""
Truncated Fock-space containers: cutoffs, state vectors, density matrices and operators
"""
from math import prod
from typing import Any, Tuple, Union

import numpy as np
import qutip
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.errors import DimensionMismatch

Matrix = Union[np.ndarray, sp.csr_matrix]


def _frozen_array(values: Any, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=complex)
    if array.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {array.shape}")
    array.flags.writeable = False
    return array


class FockCutoff(BaseModel):
    """Photon-number truncation of one mode: basis |0>..|n_max>"""

    model_config = ConfigDict(frozen=True)

    n_max: int = Field(ge=1, description="Highest retained Fock level")

    @property
    def dim(self) -> int:
        return self.n_max + 1


class StateVector(BaseModel):
    """Pure state over a (multi-mode) truncated Fock basis, mode 1 slowest"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dims: Tuple[int, ...]
    amplitudes: np.ndarray

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _copy_amplitudes(cls, value: Any) -> np.ndarray:
        return _frozen_array(value, 1)

    @model_validator(mode="after")
    def _check_length(self) -> "StateVector":
        if self.amplitudes.size != prod(self.dims):
            raise DimensionMismatch(
                f"{self.amplitudes.size} amplitudes for dims {self.dims}"
            )
        return self

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(dims=self.dims, amplitudes=self.amplitudes / self.norm)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per mode"""
        return self.amplitudes.reshape(self.dims)

    def to_qobj(self) -> qutip.Qobj:
        return qutip.Qobj(self.amplitudes.reshape(-1, 1), dims=[list(self.dims), [1] * len(self.dims)])

    @classmethod
    def from_qobj(cls, qobj: qutip.Qobj) -> "StateVector":
        return cls(dims=tuple(qobj.dims[0]), amplitudes=qobj.full().ravel())


class DensityMatrix(BaseModel):
    """Mixed state over a truncated Fock basis.

    Construction only checks shapes; integrator snapshots carry their own
    trace and Hermiticity drift. Use check_physical() where the strict
    invariants must hold.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dims: Tuple[int, ...]
    elements: np.ndarray

    @field_validator("elements", mode="before")
    @classmethod
    def _copy_elements(cls, value: Any) -> np.ndarray:
        return _frozen_array(value, 2)

    @model_validator(mode="after")
    def _check_shape(self) -> "DensityMatrix":
        d = prod(self.dims)
        if self.elements.shape != (d, d):
            raise DimensionMismatch(f"matrix shape {self.elements.shape} for dims {self.dims}")
        return self

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.elements))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.elements - self.elements.conj().T)))

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.elements + self.elements.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def check_physical(self, tol: float = 1e-9, eig_tol: float = 1e-8) -> bool:
        """True when Hermitian and unit-trace within tol and eigenvalues >= -eig_tol"""
        return (
            self.hermiticity_error() <= tol
            and abs(self.trace - 1.0) <= tol
            and self.min_eigenvalue() >= -eig_tol
        )

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.elements))

    def to_qobj(self) -> qutip.Qobj:
        return qutip.Qobj(self.elements, dims=[list(self.dims), list(self.dims)])

    @classmethod
    def from_qobj(cls, qobj: qutip.Qobj) -> "DensityMatrix":
        if qobj.isket:
            qobj = qutip.ket2dm(qobj)
        return cls(dims=tuple(qobj.dims[0]), elements=qobj.full())


class Operator(BaseModel):
    """Linear operator on a truncated Fock space; dense or CSR storage"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dims: Tuple[int, ...]
    matrix: Any

    @field_validator("matrix", mode="before")
    @classmethod
    def _coerce_matrix(cls, value: Any) -> Matrix:
        if sp.issparse(value):
            return sp.csr_matrix(value, dtype=complex)
        return _frozen_array(value, 2)

    @model_validator(mode="after")
    def _check_shape(self) -> "Operator":
        d = prod(self.dims)
        if self.matrix.shape != (d, d):
            raise DimensionMismatch(f"operator shape {self.matrix.shape} for dims {self.dims}")
        return self

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.array(self.matrix)

    def dag(self) -> "Operator":
        return Operator(dims=self.dims, matrix=self.matrix.conj().T)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return np.asarray(self.matrix @ vector)

    def to_qobj(self) -> qutip.Qobj:
        return qutip.Qobj(self.matrix, dims=[list(self.dims), list(self.dims)])

    @classmethod
    def from_qobj(cls, qobj: qutip.Qobj, sparse: bool = False) -> "Operator":
        """Wrap a qutip operator, keeping CSR storage when sparse is set"""
        matrix = qobj.to("csr").data.as_scipy() if sparse else qobj.full()
        return cls(dims=tuple(qobj.dims[0]), matrix=matrix)

    def _check_dims(self, other: "Operator") -> None:
        if other.dims != self.dims:
            raise DimensionMismatch(f"dims {self.dims} vs {other.dims}")

    def __add__(self, other: "Operator") -> "Operator":
        self._check_dims(other)
        return Operator(dims=self.dims, matrix=self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_dims(other)
        return Operator(dims=self.dims, matrix=self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(dims=self.dims, matrix=self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return self * -1.0

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_dims(other)
        return Operator(dims=self.dims, matrix=self.matrix @ other.matrix)
