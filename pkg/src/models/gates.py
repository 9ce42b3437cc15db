"""
Cat-qubit gate inputs and results: pulse envelopes, logical basis, detuning excursions
"""
import warnings
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.errors import RegimeWarning
from src.models.fock import FockCutoff, StateVector

MAX_LOGICAL_OVERLAP = 0.01


class PulseEnvelope(BaseModel):
    """Raised-cosine bump amplitude * (1 - cos(2 pi (t - offset) / duration)) / 2"""

    model_config = ConfigDict(frozen=True)

    shape: Literal["raised-cosine"] = "raised-cosine"
    amplitude: float = 0.0
    duration: float = Field(gt=0)
    offset: float = Field(default=0.0, ge=0)

    @classmethod
    def for_area(cls, area: float, duration: float, offset: float = 0.0) -> "PulseEnvelope":
        return cls(amplitude=2.0 * area / duration, duration=duration, offset=offset)

    @property
    def area(self) -> float:
        return 0.5 * self.amplitude * self.duration

    @property
    def end(self) -> float:
        return self.offset + self.duration

    def value(self, t: float) -> float:
        s = (t - self.offset) / self.duration
        if s <= 0.0 or s >= 1.0:
            return 0.0
        return 0.5 * self.amplitude * (1.0 - np.cos(2.0 * np.pi * s))


class DetuningSchedule(BaseModel):
    """Detuning excursion: raised-cosine ramp base -> peak, plateau, ramp back"""

    model_config = ConfigDict(frozen=True)

    base: float = 0.0
    peak: float = 3.0
    ramp_time: float = Field(default=8.0, gt=0)
    plateau_time: float = Field(default=0.0, ge=0)

    @property
    def duration(self) -> float:
        return 2.0 * self.ramp_time + self.plateau_time

    @property
    def is_flat(self) -> bool:
        return self.peak == self.base

    def delta(self, t: float) -> float:
        rise = 0.5 * (1.0 - np.cos(np.pi * min(max(t / self.ramp_time, 0.0), 1.0)))
        fall_start = self.ramp_time + self.plateau_time
        fall = 0.5 * (1.0 - np.cos(np.pi * min(max((t - fall_start) / self.ramp_time, 0.0), 1.0)))
        return self.base + (self.peak - self.base) * (rise - fall)


class CatQubitBasis(BaseModel):
    """Logical states |0> = |alpha_s>, |1> = |-alpha_s> with overlap exp(-2 alpha_s^2)"""

    model_config = ConfigDict(frozen=True)

    alpha_s: float = Field(gt=0)
    cutoff: FockCutoff

    @model_validator(mode="after")
    def _check_overlap(self) -> "CatQubitBasis":
        if self.overlap >= MAX_LOGICAL_OVERLAP:
            warnings.warn(
                f"logical overlap {self.overlap:.3g} is not below {MAX_LOGICAL_OVERLAP}",
                RegimeWarning,
                stacklevel=2,
            )
        return self

    @property
    def overlap(self) -> float:
        return float(np.exp(-2.0 * self.alpha_s ** 2))


class RxCalibration(BaseModel):
    """Branch-phase budget of a detuning excursion shape"""

    model_config = ConfigDict(frozen=True)

    K: float
    p: float
    base: float
    peak: float
    ramp_time: float
    ramp_phase: float = Field(description="theta accumulated over both ramps")
    plateau_rate: float = Field(description="d theta / dt on the plateau (E_even - E_odd at the peak)")
    min_gap: float

    def plateau_for(self, theta: float) -> float:
        """Shortest plateau whose total phase equals theta modulo 2 pi"""
        period = 2.0 * np.pi / abs(self.plateau_rate)
        return float(((theta - self.ramp_phase) / self.plateau_rate) % period)

    def schedule_for(self, theta: float) -> DetuningSchedule:
        return DetuningSchedule(base=self.base, peak=self.peak, ramp_time=self.ramp_time, plateau_time=self.plateau_for(theta))


class GateResult(BaseModel):
    """Outcome of one simulated gate"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    gate: Literal["rz", "uzz", "rx"]
    final_state: StateVector
    logical: np.ndarray = Field(description="Gram-corrected logical coefficients")
    extracted_angle: float
    expected_angle: Optional[float] = None
    leakage: float
    norm_drift: float
    details: Dict[str, Any] = Field(default_factory=dict)

    def report(self, fidelity: Optional[float] = None, pulse: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """JSON-ready gate report"""
        return {
            "gate": self.gate,
            "target_angle": self.expected_angle,
            "extracted_angle": self.extracted_angle,
            "fidelity": fidelity,
            "leakage": self.leakage,
            "norm_drift": self.norm_drift,
            "pulse": pulse or {},
            "logical": [[float(c.real), float(c.imag)] for c in self.logical],
            **self.details,
        }
