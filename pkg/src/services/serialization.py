"""
Persistence: Fock-container JSON, deterministic CSV tables, instance files and atomic JSON writes
"""
import csv
import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.errors import DimensionMismatch
from src.models.fock import DensityMatrix, Operator, StateVector
from src.models.ising import IsingInstance

logger = logging.getLogger(__name__)

FOCK_FORMAT = "qbm-sim/fock"
FOCK_VERSION = 1
FLOAT_FORMAT = "%.12e"

FockContainer = Union[StateVector, DensityMatrix, Operator]


class FockDocument(BaseModel):
    """On-disk layout of a state vector, density matrix or operator"""

    model_config = ConfigDict(extra="forbid")

    format: Literal["qbm-sim/fock"] = FOCK_FORMAT
    version: int = FOCK_VERSION
    kind: Literal["state", "density", "operator"]
    dims: List[int]
    layout: Literal["dense-row-major", "csr"] = "dense-row-major"
    shape: List[int]
    data: List[float] = Field(description="Interleaved real and imaginary parts")
    indices: Optional[List[int]] = None
    indptr: Optional[List[int]] = None

    @model_validator(mode="after")
    def _check_layout(self) -> "FockDocument":
        if self.version != FOCK_VERSION:
            raise ValueError(f"unsupported container version {self.version}")
        if len(self.data) % 2:
            raise ValueError("data must hold interleaved (re, im) pairs")
        if self.layout == "csr" and (self.indices is None or self.indptr is None):
            raise ValueError("csr layout requires indices and indptr")
        return self

    def values(self) -> np.ndarray:
        pairs = np.asarray(self.data, dtype=float).reshape(-1, 2)
        return pairs[:, 0] + 1j * pairs[:, 1]


def _interleave(values: np.ndarray) -> List[float]:
    values = np.asarray(values, dtype=complex).ravel()
    return np.column_stack([values.real, values.imag]).ravel().tolist()


def to_document(container: FockContainer) -> FockDocument:
    if isinstance(container, StateVector):
        return FockDocument(
            kind="state", dims=list(container.dims), shape=[container.dim],
            data=_interleave(container.amplitudes),
        )
    if isinstance(container, DensityMatrix):
        return FockDocument(
            kind="density", dims=list(container.dims), shape=list(container.elements.shape),
            data=_interleave(container.elements),
        )
    if container.is_sparse:
        m = sp.csr_matrix(container.matrix)
        m.sort_indices()
        return FockDocument(
            kind="operator", dims=list(container.dims), layout="csr", shape=list(m.shape),
            data=_interleave(m.data), indices=m.indices.tolist(), indptr=m.indptr.tolist(),
        )
    return FockDocument(
        kind="operator", dims=list(container.dims), shape=list(container.matrix.shape),
        data=_interleave(container.matrix),
    )


def from_document(document: FockDocument) -> FockContainer:
    """
    Rebuild the container described by a FockDocument

    Raises:
        DimensionMismatch: If the payload does not fit the declared shape and dims
    """
    values = document.values()
    dims = tuple(document.dims)
    if document.layout == "csr":
        matrix = sp.csr_matrix((values, document.indices, document.indptr), shape=tuple(document.shape))
        return Operator(dims=dims, matrix=matrix)
    if values.size != int(np.prod(document.shape)):
        raise DimensionMismatch(f"{values.size} values for shape {document.shape}")
    if document.kind == "state":
        return StateVector(dims=dims, amplitudes=values)
    array = values.reshape(document.shape)
    if document.kind == "density":
        return DensityMatrix(dims=dims, elements=array)
    return Operator(dims=dims, matrix=array)


def save_fock(container: FockContainer, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_document(container).model_dump_json(exclude_none=True))
    return path


def load_fock(path: Union[str, Path]) -> FockContainer:
    return from_document(FockDocument.model_validate_json(Path(path).read_text()))


def _format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    return str(value)


def write_csv(path: Union[str, Path], columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a table with fixed float formatting so identical data gives identical bytes"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])
    logger.debug("wrote %s", path)
    return path


def read_csv(path: Union[str, Path]) -> tuple:
    """(columns, rows as float arrays) for numeric tables"""
    with Path(path).open(newline="") as handle:
        reader = csv.reader(handle)
        columns = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return columns, np.asarray(rows, dtype=float).reshape(-1, len(columns))


def grid_rows(axis0: np.ndarray, axis1: np.ndarray, values: np.ndarray) -> List[tuple]:
    """Long-format (u, v, value) rows of a 2-D grid, axis0 slowest"""
    return [(u, v, values[i, j]) for i, u in enumerate(axis0) for j, v in enumerate(axis1)]


def save_instance(instance: IsingInstance, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "n": instance.n,
        "J": instance.J.tolist(),
        "seed": instance.seed,
        "ground_energy": instance.ground_energy,
        "ground_states": [list(s) for s in instance.ground_states],
    }
    path.write_text(json.dumps(payload, indent=2))
    return path


def load_instance(path: Union[str, Path]) -> IsingInstance:
    return IsingInstance(**json.loads(Path(path).read_text()))


def sha256_file(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def write_json_atomic(path: Union[str, Path], payload: Dict[str, Any]) -> Path:
    """Write JSON through a temporary file in the target directory and os.replace it into place"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True, default=str)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
