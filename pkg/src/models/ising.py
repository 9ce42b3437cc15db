"""
Ising instances and benchmark records
"""
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SpinConfig = Tuple[int, ...]

ModelTag = Literal["qQbM", "cQbM", "qCIM", "cCIM", "qCIM-nojump"]
ALL_MODEL_TAGS: Tuple[str, ...] = ("qQbM", "cQbM", "qCIM", "cCIM", "qCIM-nojump")

# {-1.0, -0.9, ..., 1.0}
COUPLING_VALUES = np.arange(-10, 11) / 10.0


class IsingInstance(BaseModel):
    """Symmetric zero-diagonal couplings with the brute-force ground-state record"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=2)
    J: np.ndarray
    seed: Optional[int] = None
    ground_energy: float
    ground_states: List[SpinConfig]

    @field_validator("J", mode="before")
    @classmethod
    def _coerce_j(cls, value: Any) -> np.ndarray:
        j = np.array(value, dtype=float)
        if j.ndim != 2 or j.shape[0] != j.shape[1]:
            raise ValueError(f"J must be square, got shape {j.shape}")
        if not np.array_equal(j, j.T):
            raise ValueError("J must be symmetric")
        if np.any(np.diag(j) != 0):
            raise ValueError("J must have zero diagonal")
        j.flags.writeable = False
        return j

    @field_validator("ground_states", mode="before")
    @classmethod
    def _coerce_states(cls, value: Any) -> List[SpinConfig]:
        return [tuple(int(s) for s in state) for state in value]

    @model_validator(mode="after")
    def _check_consistency(self) -> "IsingInstance":
        if self.J.shape != (self.n, self.n):
            raise ValueError(f"J shape {self.J.shape} does not match n={self.n}")
        states = set(self.ground_states)
        for state in states:
            if len(state) != self.n or any(s not in (-1, 1) for s in state):
                raise ValueError(f"invalid spin configuration {state}")
            if tuple(-s for s in state) not in states:
                raise ValueError("ground states must be closed under global flip")
        return self

    def is_ground(self, spins: SpinConfig) -> bool:
        return tuple(spins) in set(self.ground_states)


class BenchmarkConfig(BaseModel):
    """Parameters of the four-model benchmark (defaults: four spins, xi0 = 0.25)"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    K: float = 1.0
    Delta: float = 1.0
    kappa: float = 1.0
    kappa2: float = 1.0
    xi0: float = Field(default=0.25, gt=0)
    p_end: float = 4.0
    t_final: float = Field(default=100.0, gt=0)
    cutoff: int = Field(default=9, ge=1, description="Per-mode n_max for quantum models")
    max_cutoff: int = Field(default=13, ge=1)
    leakage_tolerance: Optional[float] = Field(default=None, gt=0)
    n_traj: int = Field(default=20, ge=1)
    n_classical: int = Field(default=1000, ge=1)
    seed: int = Field(default=20180101, ge=0)


class BenchmarkRecord(BaseModel):
    """Success probability and residual energy of one model on one instance"""

    model_config = ConfigDict(frozen=True)

    model_tag: ModelTag
    instance_index: int
    success_probability: float = Field(ge=-1e-12, le=1 + 1e-9)
    residual_energy: float = Field(ge=-1e-9)
    metadata: Dict[str, Any] = Field(default_factory=dict)
