"""
Result containers for evolutions, phase-space grids and fixed-point analysis
"""
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.integrate import trapezoid

from src.models.fock import DensityMatrix, StateVector


class ClassicalState(BaseModel):
    """Classical amplitudes alpha_i = x_i + i y_i of an N-oscillator network"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x: np.ndarray
    y: np.ndarray

    @field_validator("x", "y", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        array = np.atleast_1d(np.array(value, dtype=float))
        if not np.all(np.isfinite(array)):
            raise ValueError("classical amplitudes must be finite")
        array.flags.writeable = False
        return array

    @model_validator(mode="after")
    def _same_length(self) -> "ClassicalState":
        if self.x.shape != self.y.shape:
            raise ValueError(f"x shape {self.x.shape} differs from y shape {self.y.shape}")
        return self

    @property
    def n_modes(self) -> int:
        return self.x.shape[-1]

    @property
    def alpha(self) -> np.ndarray:
        return self.x + 1j * self.y

    def flat(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    @classmethod
    def from_flat(cls, values: np.ndarray) -> "ClassicalState":
        n = values.size // 2
        return cls(x=values[:n], y=values[n:])


Snapshot = Union[StateVector, DensityMatrix, ClassicalState]


class EvolutionResult(BaseModel):
    """Snapshots of one evolution at strictly increasing sample times"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    sample_times: List[float]
    states: List[Any]
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_times(self) -> "EvolutionResult":
        if len(self.sample_times) != len(self.states):
            raise ValueError("one state per sample time required")
        if np.any(np.diff(self.sample_times) <= 0):
            raise ValueError("sample_times must be strictly increasing")
        return self

    @property
    def final_state(self) -> Snapshot:
        return self.states[-1]


class RngSeed(BaseModel):
    """64-bit seed; trajectory k draws from the stream seeded with seed XOR k"""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(ge=0, lt=2**64)

    def for_trajectory(self, index: int) -> int:
        return self.seed ^ index

    def generator(self, index: Optional[int] = None) -> np.random.Generator:
        return np.random.default_rng(self.seed if index is None else self.for_trajectory(index))


class JumpRecord(BaseModel):
    """Jump times and channel labels of one trajectory"""

    model_config = ConfigDict(frozen=True)

    times: List[float] = Field(default_factory=list)
    channels: List[str] = Field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.times)


class TrajectoryEnsemble(BaseModel):
    """Quantum-jump ensemble: per-trajectory results in index order plus their average"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    sample_times: List[float]
    trajectories: List[EvolutionResult]
    jumps: List[JumpRecord]
    averaged: Optional[List[DensityMatrix]] = None
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @property
    def n_traj(self) -> int:
        return len(self.trajectories)

    @property
    def final_density(self) -> Optional[DensityMatrix]:
        return self.averaged[-1] if self.averaged else None

    def final_states(self) -> List[StateVector]:
        return [trajectory.final_state for trajectory in self.trajectories]


class GridAxis(BaseModel):
    """Uniformly sampled axis"""

    model_config = ConfigDict(frozen=True)

    min: float = -4.5
    max: float = 4.5
    resolution: int = Field(default=101, ge=2)

    @model_validator(mode="after")
    def _ordered(self) -> "GridAxis":
        if self.max <= self.min:
            raise ValueError("axis max must exceed min")
        return self

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.resolution)

    @property
    def step(self) -> float:
        return (self.max - self.min) / (self.resolution - 1)


SliceTag = Literal["single", "y1=y2=0", "x1=x2=0", "energy"]


class WignerGrid(BaseModel):
    """Real-valued phase-space function sampled on a rectangular grid.

    values[i, j] belongs to (axis0[i], axis1[j]); for single-mode grids the axes
    are (x, y), for the y1=y2=0 slice (x1, x2) and for x1=x2=0 (y1, y2).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    axis0: GridAxis
    axis1: GridAxis
    values: np.ndarray
    slice_tag: SliceTag = "single"
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("values", mode="before")
    @classmethod
    def _finite(cls, value: Any) -> np.ndarray:
        array = np.array(value, dtype=float)
        if not np.all(np.isfinite(array)):
            raise ValueError("grid values must be finite")
        array.flags.writeable = False
        return array

    @model_validator(mode="after")
    def _shape(self) -> "WignerGrid":
        if self.values.shape != (self.axis0.resolution, self.axis1.resolution):
            raise ValueError(f"values shape {self.values.shape} does not match axes")
        return self

    def integral(self) -> float:
        """Trapezoidal integral over the grid"""
        return float(trapezoid(trapezoid(self.values, dx=self.axis1.step, axis=1), dx=self.axis0.step))

    def value_at(self, u: float, v: float) -> float:
        """Value at the grid point nearest to (u, v)"""
        i = int(np.argmin(np.abs(self.axis0.values() - u)))
        j = int(np.argmin(np.abs(self.axis1.values() - v)))
        return float(self.values[i, j])

    def negativity_volume(self) -> float:
        """(integral |W| - integral W) / 2"""
        absolute = WignerGrid(axis0=self.axis0, axis1=self.axis1, values=np.abs(self.values), slice_tag=self.slice_tag)
        return 0.5 * (absolute.integral() - self.integral())


class FixedPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: float
    y: float
    stable: bool
    classification: Literal["center", "saddle", "attractor", "repeller"]
    eigen_real: Tuple[float, float]
    eigen_imag: Tuple[float, float]


class FixedPointReport(BaseModel):
    """Fixed points of a single classical oscillator at pump rate p"""

    model_config = ConfigDict(frozen=True)

    kind: Literal["kpo", "opo"]
    p: float
    points: List[FixedPoint]

    @property
    def count(self) -> int:
        return len(self.points)

    def stable_points(self) -> List[FixedPoint]:
        return [point for point in self.points if point.stable]

    def as_pairs(self) -> List[Tuple[float, float]]:
        return [(point.x, point.y) for point in self.points]
