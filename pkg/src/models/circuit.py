"""
Flux-tunable transmon parameters and the KPO parameters derived from them
"""
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.errors import UnitError
from src.models.params import KpoParams

ENERGY_UNITS = ("GHz", "J", "rad/s")


class TransmonSpec(BaseModel):
    """Flux-tunable transmon with a dc-SQUID.

    E_C, E_J and omega_p share one unit tag: "GHz" (energy / h, in GHz), "J"
    (joules) or "rad/s" (energy / hbar). omega_p is the pump photon energy
    hbar*omega_p in that unit; when omitted the pump sits at twice the
    oscillator transition so that Delta = 0.
    """

    model_config = ConfigDict(frozen=True)

    E_C: float = Field(gt=0, description="Charging energy")
    E_J: float = Field(gt=0, description="Single-junction Josephson energy")
    unit: str = Field(description="Unit tag shared by E_C, E_J and omega_p")
    phi_dc: float = Field(default=0.0, description="dc flux in units of the flux quantum")
    delta_p: float = Field(default=0.0, ge=0, description="ac flux modulation depth")
    omega_p: Optional[float] = Field(default=None, gt=0, description="Pump photon energy")

    @model_validator(mode="after")
    def _check_unit(self) -> "TransmonSpec":
        if self.unit not in ENERGY_UNITS:
            raise UnitError(f"unknown unit {self.unit!r}; expected one of {ENERGY_UNITS}")
        return self

    @field_validator("phi_dc")
    @classmethod
    def _flux_range(cls, value: float) -> float:
        if not -0.5 < value < 0.5:
            raise ValueError("|phi_dc| must be below 0.5 so that the effective Josephson energy stays positive")
        return value


class KpoDerived(BaseModel):
    """Effective KPO parameters as angular frequencies (rad/s, hbar = 1)"""

    model_config = ConfigDict(frozen=True)

    Delta: float
    K: float
    p: float
    omega_kpo: float
    photon_bound: float = Field(gt=0)
    flags: List[str] = Field(default_factory=list)

    @field_validator("K")
    @classmethod
    def _negative_kerr(cls, value: float) -> float:
        if value >= 0:
            raise ValueError("a transmon KPO has K = -E_C / hbar < 0")
        return value

    @property
    def pump_in_kerr_units(self) -> float:
        return self.p / abs(self.K)

    def to_kpo_params(self) -> KpoParams:
        """Dimensionless parameters in units of |K|; the negative Kerr sign is canonicalised"""
        return KpoParams(K=self.K / abs(self.K), Delta=self.Delta / abs(self.K))


class ValidityReport(BaseModel):
    """Small-phase validity of the quartic transmon expansion at a target amplitude"""

    model_config = ConfigDict(frozen=True)

    alpha_squared: float
    phase_variance: float = Field(description="<phi^2> ~ sqrt(2 E_C / E_J_dc) (4|alpha|^2 + 1)")
    photon_bound: float
    phase_flag: Literal["pass", "warn", "fail"] = Field(description="Advisory grade of <phi^2>")
    verdict: Literal["pass", "warn", "fail"] = Field(description="Authoritative grade of |alpha|^2 against the photon bound")
    flags: List[str] = Field(default_factory=list)
