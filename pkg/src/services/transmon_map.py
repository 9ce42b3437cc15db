"""
Map flux-tunable transmon parameters to effective KPO parameters and validity bounds
"""
import logging
import warnings
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import constants

from src.errors import RegimeWarning, UnitError
from src.models.circuit import ENERGY_UNITS, KpoDerived, TransmonSpec, ValidityReport

logger = logging.getLogger(__name__)

# Transmon regime: E_C / E_J_dc above this ratio is flagged
CHARGE_RATIO_LIMIT = 1.0 / 20.0
MODULATION_LIMIT = 0.1
SMALL_BOUND_LIMIT = 5.0

# <phi^2> thresholds
PHASE_PASS = 0.1
PHASE_WARN = 0.3

# alpha^2 <= bound / BOUND_MARGIN counts as "much smaller than the bound"
BOUND_MARGIN = 5.0

TYPICAL_E_C_GHZ = 0.2
TYPICAL_E_J_DC_GHZ = 15.625


def to_angular_frequency(value: float, unit: str) -> float:
    """
    Convert an energy in `unit` to angular frequency E / hbar in rad/s

    Raises:
        UnitError: If the unit is unknown
    """
    if unit == "GHz":
        return 2.0 * np.pi * value * 1e9
    if unit == "J":
        return value / constants.hbar
    if unit == "rad/s":
        return value
    raise UnitError(f"unknown unit {unit!r}; expected one of {ENERGY_UNITS}")


def from_angular_frequency(omega: float, unit: str) -> float:
    """Inverse of to_angular_frequency"""
    if unit == "GHz":
        return omega / (2.0 * np.pi * 1e9)
    if unit == "J":
        return omega * constants.hbar
    if unit == "rad/s":
        return omega
    raise UnitError(f"unknown unit {unit!r}; expected one of {ENERGY_UNITS}")


def effective_josephson_dc(spec: TransmonSpec, unit: Optional[str] = None) -> float:
    """
    E_J_dc = 2 E_J cos(pi phi_dc), in the circuit's unit unless another is requested

    Raises:
        UnitError: If the requested unit is unknown
    """
    value = 2.0 * spec.E_J * np.cos(np.pi * spec.phi_dc)
    if unit is None or unit == spec.unit:
        return float(value)
    return float(from_angular_frequency(to_angular_frequency(value, spec.unit), unit))


def pump_rate_forms(spec: TransmonSpec) -> Tuple[float, float]:
    """Both expressions for hbar p: (pi delta_p E_J sin(pi phi), (pi delta_p E_J_dc / 2) tan(pi phi))"""
    e_dc = effective_josephson_dc(spec)
    angle = np.pi * spec.phi_dc
    return (
        float(np.pi * spec.delta_p * spec.E_J * np.sin(angle)),
        float(0.5 * np.pi * spec.delta_p * e_dc * np.tan(angle)),
    )


def kpo_params_from_circuit(spec: TransmonSpec) -> KpoDerived:
    """
    Effective rotating-frame KPO parameters of a flux-pumped transmon

    hbar Delta = sqrt(8 E_C E_J_dc) - E_C - hbar omega_p / 2
    hbar K     = -E_C
    hbar p     = pi delta_p E_J sin(pi phi_dc)
    omega_KPO  = sqrt(8 E_C E_J_dc) / hbar

    Args:
        spec: Circuit parameters with unit tag

    Returns:
        KpoDerived in rad/s with regime flags

    Raises:
        UnitError: If the circuit carries an unknown unit
    """
    e_c = to_angular_frequency(spec.E_C, spec.unit)
    e_dc = to_angular_frequency(effective_josephson_dc(spec), spec.unit)
    plasma = float(np.sqrt(8.0 * e_c * e_dc))
    pump_energy = (
        to_angular_frequency(spec.omega_p, spec.unit) if spec.omega_p is not None else 2.0 * (plasma - e_c)
    )
    delta = plasma - e_c - 0.5 * pump_energy
    kerr = -e_c
    pump = to_angular_frequency(pump_rate_forms(spec)[0], spec.unit)
    bound = plasma / (16.0 * abs(kerr))

    flags: List[str] = []
    if e_c / e_dc > CHARGE_RATIO_LIMIT:
        flags.append("charge-regime: E_C/E_J_dc exceeds 1/20")
    if spec.delta_p > MODULATION_LIMIT:
        flags.append("large-modulation: delta_p exceeds 0.1")
    if bound < SMALL_BOUND_LIMIT:
        flags.append("photon-bound-small: too small for parametric oscillations")
    for flag in flags:
        warnings.warn(flag, RegimeWarning, stacklevel=2)
        logger.warning("transmon map: %s", flag)

    return KpoDerived(Delta=delta, K=kerr, p=pump, omega_kpo=plasma, photon_bound=bound, flags=flags)


def parametric_photon_number(spec: TransmonSpec, derived: KpoDerived) -> Tuple[float, float]:
    """
    Photon number of the Delta = 0 parametric oscillation

    Returns:
        (formula (pi delta_p / 16)(omega_KPO / K)^2 tan(pi phi_dc), direct p / |K|)
    """
    formula = (np.pi * spec.delta_p / 16.0) * (derived.omega_kpo / derived.K) ** 2 * np.tan(np.pi * spec.phi_dc)
    return float(formula), float(derived.p / abs(derived.K))


def _grade(value: float, pass_limit: float, warn_limit: float) -> str:
    if value < pass_limit:
        return "pass"
    if value < warn_limit:
        return "warn"
    return "fail"


def validity_report(spec: TransmonSpec, derived: KpoDerived, alpha: float) -> ValidityReport:
    """
    Small-phase condition <phi^2> ~ sqrt(2 E_C / E_J_dc)(4|alpha|^2 + 1) << 1

    phase_flag grades <phi^2> (pass < 0.1, warn < 0.3, fail otherwise). verdict grades
    |alpha|^2 against the photon bound omega_KPO / (16 |K|): pass when at most a fifth
    of the bound, warn below the bound, fail at or above it.

    verdict is the authoritative grade: the circuit run summary and manifest report it
    alone. phase_flag is advisory and may be stricter for the same input.
    """
    ratio = spec.E_C / effective_josephson_dc(spec)
    alpha_sq = float(abs(alpha) ** 2)
    variance = float(np.sqrt(2.0 * ratio) * (4.0 * alpha_sq + 1.0))
    phase_flag = _grade(variance, PHASE_PASS, PHASE_WARN)
    if alpha_sq <= derived.photon_bound / BOUND_MARGIN:
        verdict = "pass"
    elif alpha_sq < derived.photon_bound:
        verdict = "warn"
    else:
        verdict = "fail"
    return ValidityReport(
        alpha_squared=alpha_sq,
        phase_variance=variance,
        photon_bound=derived.photon_bound,
        phase_flag=phase_flag,
        verdict=verdict,
        flags=list(derived.flags),
    )


def typical_transmon(phi_dc: float = 0.25, delta_p: float = 0.01) -> TransmonSpec:
    """E_C/h = 200 MHz and E_J_dc/h = 15.625 GHz, i.e. omega_KPO/2pi = 5 GHz"""
    e_j = TYPICAL_E_J_DC_GHZ / (2.0 * np.cos(np.pi * phi_dc))
    return TransmonSpec(E_C=TYPICAL_E_C_GHZ, E_J=e_j, unit="GHz", phi_dc=phi_dc, delta_p=delta_p)


def scaled_transmon(phi_dc: float = 0.25, delta_p: float = 0.01, factor: float = 10.0) -> TransmonSpec:
    """Typical transmon with capacitance and critical current scaled up: E_C / factor, E_J * factor"""
    base = typical_transmon(phi_dc, delta_p)
    return base.model_copy(update={"E_C": base.E_C / factor, "E_J": base.E_J * factor})


def sweep_table(spec: TransmonSpec, phi_values: Sequence[float], delta_values: Sequence[float]) -> Tuple[List[str], np.ndarray]:
    """
    Derived parameters over a grid of dc flux and modulation depth

    Returns:
        (column names, rows) with frequencies in the circuit's unit
    """
    columns = ["phi_dc", "delta_p", "E_J_dc", "Delta", "K", "p", "omega_kpo", "photon_bound", "p_over_abs_K"]
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        for phi in phi_values:
            for delta_p in delta_values:
                point = spec.model_copy(update={"phi_dc": float(phi), "delta_p": float(delta_p)})
                derived = kpo_params_from_circuit(point)
                rows.append([
                    phi,
                    delta_p,
                    effective_josephson_dc(point),
                    from_angular_frequency(derived.Delta, spec.unit),
                    from_angular_frequency(derived.K, spec.unit),
                    from_angular_frequency(derived.p, spec.unit),
                    from_angular_frequency(derived.omega_kpo, spec.unit),
                    derived.photon_bound,
                    derived.pump_in_kerr_units,
                ])
    return columns, np.array(rows, dtype=float)


def report_dict(spec: TransmonSpec, alpha: float) -> Dict:
    """JSON-ready circuit report"""
    derived = kpo_params_from_circuit(spec)
    formula, direct = parametric_photon_number(spec, derived)
    validity = validity_report(spec, derived, alpha)
    return {
        "spec": spec.model_dump(),
        "derived_rad_per_s": derived.model_dump(),
        "derived_in_spec_unit": {
            name: from_angular_frequency(getattr(derived, name), spec.unit)
            for name in ("Delta", "K", "p", "omega_kpo")
        },
        "E_J_dc": effective_josephson_dc(spec),
        "photon_number_formula": formula,
        "photon_number_direct": direct,
        "validity": validity.model_dump(),
        "kpo_params": derived.to_kpo_params().model_dump(),
        "pump_in_kerr_units": derived.pump_in_kerr_units,
    }
