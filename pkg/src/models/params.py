"""
Machine-model parameters: KPO/OPO constants, pump schedules, networks, Lindblad terms
"""
from typing import Any, ClassVar, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.models.fock import Operator


class KpoParams(BaseModel):
    """Kerr coefficient and detuning of a KPO, stored in the K > 0 canonical form.

    A negative K is absorbed by flipping the overall sign of the Hamiltonian:
    K -> -K, Delta -> -Delta and the pump enters with sign -1. `flipped`
    records that this happened.
    """

    model_config = ConfigDict(frozen=True)

    K: float = Field(default=1.0, description="Kerr coefficient (canonical, > 0)")
    Delta: float = Field(default=0.0, description="Detuning (canonical)")
    flipped: bool = Field(default=False, description="Overall phase flip applied")

    @model_validator(mode="before")
    @classmethod
    def _canonicalise(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("flipped", False):
            k = data.get("K", 1.0)
            if k is not None and float(k) < 0:
                data = dict(data)
                data["K"] = -float(k)
                data["Delta"] = -float(data.get("Delta", 0.0))
                data["flipped"] = True
        return data

    @field_validator("K")
    @classmethod
    def _nonzero(cls, value: float) -> float:
        if value == 0:
            raise ValueError("Kerr coefficient must be nonzero")
        return value

    @property
    def pump_sign(self) -> float:
        return -1.0 if self.flipped else 1.0


class OpoParams(BaseModel):
    """One-photon and two-photon loss rates of a degenerate OPO"""

    model_config = ConfigDict(frozen=True)

    kappa: float = Field(default=1.0, ge=0, description="One-photon loss rate")
    kappa2: float = Field(default=1.0, gt=0, description="Two-photon loss rate")


class PumpSchedule(BaseModel):
    """Pump rate ramp p(t) over [0, t_final]"""

    model_config = ConfigDict(frozen=True)

    p_start: float = 0.0
    p_end: float = 4.0
    t_final: float = Field(default=100.0, gt=0)
    shape: Literal["linear", "constant"] = "linear"

    def pump(self, t: float) -> float:
        if self.shape == "constant":
            return self.p_end
        s = min(max(t / self.t_final, 0.0), 1.0)
        return self.p_start + (self.p_end - self.p_start) * s

    def time_at(self, p: float) -> float:
        """Time at which a linear ramp reaches pump rate p"""
        if self.shape == "constant" or self.p_end == self.p_start:
            return self.t_final
        s = (p - self.p_start) / (self.p_end - self.p_start)
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"pump rate {p} not reached by the schedule")
        return s * self.t_final

    @classmethod
    def frozen(cls, p: float, t_final: float) -> "PumpSchedule":
        return cls(p_start=p, p_end=p, t_final=t_final, shape="constant")


class NetworkSpec(BaseModel):
    """Coupled-oscillator network: symmetric zero-diagonal J and coupling scale xi0"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    J: np.ndarray
    xi0: float = Field(ge=0, description="Coupling scale (frequency)")
    lambda_max: Optional[float] = None

    @field_validator("J", mode="before")
    @classmethod
    def _coerce_j(cls, value: Any) -> np.ndarray:
        j = np.array(value, dtype=float)
        if j.ndim != 2 or j.shape[0] != j.shape[1]:
            raise ValueError(f"J must be square, got shape {j.shape}")
        if not np.allclose(j, j.T, atol=1e-12):
            raise ValueError("J must be symmetric")
        if np.any(np.diag(j) != 0):
            raise ValueError("J must have zero diagonal")
        j.flags.writeable = False
        return j

    @model_validator(mode="after")
    def _check_lambda(self) -> "NetworkSpec":
        computed = float(np.linalg.eigvalsh(self.J)[-1])
        if self.lambda_max is None:
            object.__setattr__(self, "lambda_max", computed)
        elif abs(self.lambda_max - computed) > 1e-9:
            raise ValueError(f"lambda_max {self.lambda_max} inconsistent with J ({computed})")
        return self

    @property
    def n_modes(self) -> int:
        return self.J.shape[0]

    def row_abs_sums(self) -> np.ndarray:
        return np.abs(self.J).sum(axis=1)


class LindbladTerm(BaseModel):
    """One dissipator: rate * (2 L rho L^dag - L^dag L rho - rho L^dag L)"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rate: float = Field(ge=0)
    jump_operator: Operator
    label: str = ""


ModelKind = Literal["kpo", "opo", "qbm", "cim"]


class ModelSpec(BaseModel):
    """One of the four machine models with its pump schedule and truncation.

    Serialised as a flat key-value block with keys kind, K, Delta, kappa,
    kappa2, xi0, J (row-major), p_start, p_end, t_final, cutoff.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ModelKind
    K: Optional[float] = None
    Delta: Optional[float] = None
    kappa: Optional[float] = None
    kappa2: Optional[float] = None
    xi0: Optional[float] = None
    J: Optional[List[List[float]]] = None
    p_start: float = 0.0
    p_end: float = 4.0
    t_final: float = Field(default=100.0, gt=0)
    cutoff: Optional[int] = Field(default=None, ge=1)

    REQUIRED_KEYS: ClassVar[Dict[str, Tuple[str, ...]]] = {
        "kpo": ("K", "Delta"),
        "opo": ("kappa", "kappa2"),
        "qbm": ("K", "Delta", "xi0", "J"),
        "cim": ("kappa", "kappa2", "xi0", "J"),
    }

    def missing_keys(self) -> List[str]:
        return [key for key in self.REQUIRED_KEYS[self.kind] if getattr(self, key) is None]

    @property
    def is_kpo_like(self) -> bool:
        return self.kind in ("kpo", "qbm")

    @property
    def is_network(self) -> bool:
        return self.kind in ("qbm", "cim")

    def kpo_params(self) -> KpoParams:
        return KpoParams(K=self.K, Delta=self.Delta)

    def opo_params(self) -> OpoParams:
        return OpoParams(kappa=self.kappa, kappa2=self.kappa2)

    def network(self) -> Optional[NetworkSpec]:
        if not self.is_network:
            return None
        return NetworkSpec(J=self.J, xi0=self.xi0)

    def schedule(self) -> PumpSchedule:
        return PumpSchedule(p_start=self.p_start, p_end=self.p_end, t_final=self.t_final)

    @property
    def n_modes(self) -> int:
        return len(self.J) if self.is_network and self.J is not None else 1
