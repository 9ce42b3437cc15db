"""
Generators and closed-form quantities for the four machine models (KPO, OPO, QbM, CIM)
"""
import logging
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import BelowThreshold, DimensionMismatch, InvalidRates
from src.models.fock import FockCutoff, Operator, StateVector, DensityMatrix
from src.models.params import KpoParams, LindbladTerm, ModelSpec, NetworkSpec, OpoParams
from src.services import fock_space

logger = logging.getLogger(__name__)

Cutoffs = Union[FockCutoff, Sequence[FockCutoff]]


def _network_dims(spec: NetworkSpec, cutoffs: Cutoffs) -> Tuple[int, ...]:
    if isinstance(cutoffs, FockCutoff):
        return (cutoffs.dim,) * spec.n_modes
    cutoffs = list(cutoffs)
    if len(cutoffs) != spec.n_modes:
        raise DimensionMismatch(f"{len(cutoffs)} cutoffs for {spec.n_modes} modes")
    return tuple(c.dim for c in cutoffs)


# --- single-mode building blocks -------------------------------------------------

def kpo_static_part(params: KpoParams, a: Operator) -> Operator:
    """(K/2) a^dag^2 a^2 + Delta a^dag a on the mode of `a`"""
    ad = a.dag()
    return (ad @ ad @ a @ a) * (params.K / 2.0) + (ad @ a) * params.Delta


def kpo_pump_part(params: KpoParams, a: Operator) -> Operator:
    """Coefficient of p in the KPO Hamiltonian: -(1/2)(a^dag^2 + a^2), sign-flipped if K was negative"""
    ad = a.dag()
    return (ad @ ad + a @ a) * (-0.5 * params.pump_sign)


def opo_pump_part(a: Operator) -> Operator:
    """Coefficient of p in the OPO Hamiltonian: (i/2)(a^dag^2 - a^2)"""
    ad = a.dag()
    return (ad @ ad - a @ a) * 0.5j


def kpo_hamiltonian(params: KpoParams, p: float, cutoff: FockCutoff) -> Operator:
    """
    Single-KPO Hamiltonian in the rotating frame

    H = (K/2) a^dag^2 a^2 + Delta a^dag a - (p/2)(a^dag^2 + a^2), expressed in the
    K > 0 canonical form carried by KpoParams.

    Args:
        params: Kerr coefficient and detuning
        p: Pump rate
        cutoff: Fock truncation

    Returns:
        Hermitian Operator
    """
    a = fock_space.annihilation(cutoff)
    return kpo_static_part(params, a) + kpo_pump_part(params, a) * p


def opo_generator(params: OpoParams, p: float, cutoff: FockCutoff) -> Tuple[Operator, List[LindbladTerm]]:
    """
    Single-OPO Hamiltonian and Lindblad terms

    H = i(p/2)(a^dag^2 - a^2); one-photon loss (kappa, a); two-photon loss (kappa2/2, a^2).
    Each rate multiplies (2 L rho L^dag - L^dag L rho - rho L^dag L).
    """
    a = fock_space.annihilation(cutoff)
    terms = [
        LindbladTerm(rate=params.kappa, jump_operator=a, label="one-photon"),
        LindbladTerm(rate=params.kappa2 / 2.0, jump_operator=a @ a, label="two-photon"),
    ]
    return opo_pump_part(a) * p, terms


# --- networks ---------------------------------------------------------------------

def coupling_hamiltonian(spec: NetworkSpec, annihilators: Sequence[Operator]) -> Operator:
    """H_c = -xi0 sum_ij J_ij a_i^dag a_j"""
    dims = annihilators[0].dims
    total = Operator(dims=dims, matrix=annihilators[0].matrix * 0)
    for i in range(spec.n_modes):
        for j in range(spec.n_modes):
            if spec.J[i, j] != 0:
                total = total + (annihilators[i].dag() @ annihilators[j]) * (-spec.xi0 * spec.J[i, j])
    return total


def qbm_hamiltonian_parts(spec: NetworkSpec, kpo: KpoParams, cutoffs: Cutoffs) -> Tuple[Operator, Operator]:
    """(static part, pump coefficient) of the KPO-network Hamiltonian"""
    dims = _network_dims(spec, cutoffs)
    annihilators = fock_space.mode_annihilators(dims)
    static = coupling_hamiltonian(spec, annihilators)
    pump = Operator(dims=dims, matrix=static.matrix * 0)
    for a in annihilators:
        static = static + kpo_static_part(kpo, a)
        pump = pump + kpo_pump_part(kpo, a)
    return static, pump


def qbm_network_hamiltonian(spec: NetworkSpec, kpo: KpoParams, p: float, cutoffs: Cutoffs) -> Operator:
    """
    KPO-network Hamiltonian sum_i H_i + H_c

    Args:
        spec: Coupling matrix and scale
        kpo: Per-oscillator parameters
        p: Pump rate
        cutoffs: One cutoff for all modes or one per mode

    Returns:
        Multi-mode Hermitian Operator

    Raises:
        DimensionMismatch: If the number of cutoffs differs from the number of modes
    """
    static, pump = qbm_hamiltonian_parts(spec, kpo, cutoffs)
    return static + pump * p


def cim_lindblad_set(spec: NetworkSpec, opo: OpoParams, p: float, cutoffs: Cutoffs) -> Tuple[Operator, List[LindbladTerm]]:
    """
    OPO-network generator rewritten in standard Lindblad form

    Local one-photon loss on mode i has rate kappa - xi0 sum_j |J_ij|; each coupled
    pair i > j contributes L = a_i - sgn(J_ij) a_j with rate xi0 |J_ij|.

    Raises:
        InvalidRates: If any local rate would be negative
    """
    dims = _network_dims(spec, cutoffs)
    annihilators = fock_space.mode_annihilators(dims)
    local_rates = opo.kappa - spec.xi0 * spec.row_abs_sums()
    if np.any(local_rates < 0):
        bad = int(np.argmin(local_rates))
        raise InvalidRates(
            f"local one-photon rate of mode {bad} is {local_rates[bad]:.4g} < 0; "
            f"xi0={spec.xi0} too large for kappa={opo.kappa}"
        )

    hamiltonian = Operator(dims=dims, matrix=annihilators[0].matrix * 0)
    terms: List[LindbladTerm] = []
    for i, a in enumerate(annihilators):
        hamiltonian = hamiltonian + opo_pump_part(a) * p
        terms.append(LindbladTerm(rate=float(local_rates[i]), jump_operator=a, label=f"one-photon:{i}"))
        terms.append(LindbladTerm(rate=opo.kappa2 / 2.0, jump_operator=a @ a, label=f"two-photon:{i}"))
    for i in range(spec.n_modes):
        for j in range(i):
            coupling = spec.J[i, j]
            if coupling == 0:
                continue
            jump = annihilators[i] - annihilators[j] * float(np.sign(coupling))
            terms.append(LindbladTerm(rate=spec.xi0 * abs(coupling), jump_operator=jump, label=f"injection:{i},{j}"))
    return hamiltonian, terms


def _right_multiply(rho: np.ndarray, matrix) -> np.ndarray:
    """rho @ matrix using only left products, so sparse matrices stay on the left"""
    return np.asarray(matrix.conj().T @ rho.conj().T).conj().T


def liouvillian(hamiltonian: Operator, terms: Sequence[LindbladTerm], rho: np.ndarray) -> np.ndarray:
    """rho_dot = -i[H, rho] + sum rate (2 L rho L^dag - L^dag L rho - rho L^dag L)"""
    h = hamiltonian.matrix
    result = -1j * (np.asarray(h @ rho) - _right_multiply(rho, h))
    for term in terms:
        if term.rate == 0:
            continue
        l = term.jump_operator.matrix
        ldl = l.conj().T @ l
        jump = _right_multiply(np.asarray(l @ rho), l.conj().T)
        result = result + term.rate * (2.0 * jump - np.asarray(ldl @ rho) - _right_multiply(rho, ldl))
    return result


def cim_table_generator(spec: NetworkSpec, opo: OpoParams, p: float, cutoffs: Cutoffs) -> Callable[[np.ndarray], np.ndarray]:
    """
    OPO-network Liouvillian in its coupled (non-Lindblad) form

    rho_dot = sum_i L_i rho - xi0 sum_ij J_ij (2 a_i rho a_j^dag - a_j^dag a_i rho - rho a_j^dag a_i)
    """
    dims = _network_dims(spec, cutoffs)
    annihilators = [a.dense() for a in fock_space.mode_annihilators(dims)]
    local_terms = []
    hamiltonian = np.zeros((annihilators[0].shape[0],) * 2, dtype=complex)
    for a in annihilators:
        ad = a.conj().T
        hamiltonian += 0.5j * p * (ad @ ad - a @ a)
        local_terms.append((opo.kappa, a))
        local_terms.append((opo.kappa2 / 2.0, a @ a))

    def generator(rho: np.ndarray) -> np.ndarray:
        out = -1j * (hamiltonian @ rho - rho @ hamiltonian)
        for rate, l in local_terms:
            ld = l.conj().T
            out += rate * (2 * l @ rho @ ld - ld @ l @ rho - rho @ ld @ l)
        for i, ai in enumerate(annihilators):
            for j, aj in enumerate(annihilators):
                coupling = spec.J[i, j]
                if coupling == 0:
                    continue
                ajd = aj.conj().T
                out -= spec.xi0 * coupling * (2 * ai @ rho @ ajd - ajd @ ai @ rho - rho @ ajd @ ai)
        return out

    return generator


# --- closed forms -----------------------------------------------------------------

def threshold(kind: str, params: Union[KpoParams, OpoParams], spec: Optional[NetworkSpec] = None) -> float:
    """
    Classical bifurcation point

    KPO: Delta - xi0 lambda_max; OPO: kappa - xi0 lambda_max (lambda_max term absent
    without a network).
    """
    shift = spec.xi0 * spec.lambda_max if spec is not None else 0.0
    if kind.lower() in ("kpo", "qbm"):
        return params.Delta - shift
    if kind.lower() in ("opo", "cim"):
        return params.kappa - shift
    raise ValueError(f"unknown model kind {kind!r}")


def oscillation_amplitude(
    kind: str,
    params: Union[KpoParams, OpoParams],
    p: float,
    spec: Optional[NetworkSpec] = None,
) -> float:
    """
    Magnitude of the stable branch: sqrt((p - p_th)/K) or sqrt((p - p_th)/kappa2)

    Raises:
        BelowThreshold: If p is below the threshold
    """
    p_th = threshold(kind, params, spec)
    if p < p_th - 1e-12:
        raise BelowThreshold(f"pump {p} below threshold {p_th}")
    stiffness = params.K if kind.lower() in ("kpo", "qbm") else params.kappa2
    return float(np.sqrt(max(p - p_th, 0.0) / stiffness))


def classical_rhs(
    kind: str,
    params: Union[KpoParams, OpoParams],
    p: float,
    x: np.ndarray,
    y: np.ndarray,
    spec: Optional[NetworkSpec] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Classical equations of motion, vectorised over any leading ensemble axes

    Args:
        kind: "kpo"/"qbm" (Hamiltonian) or "opo"/"cim" (gradient flow)
        params: Oscillator parameters
        p: Pump rate
        x, y: Quadratures, last axis indexes modes
        spec: Network coupling, or None for uncoupled oscillators

    Returns:
        (x_dot, y_dot)
    """
    r2 = x * x + y * y
    jx = spec.xi0 * (x @ spec.J) if spec is not None else 0.0
    jy = spec.xi0 * (y @ spec.J) if spec is not None else 0.0
    if kind.lower() in ("kpo", "qbm"):
        pc = params.pump_sign * p
        x_dot = (pc + params.Delta + params.K * r2) * y - jy
        y_dot = (pc - params.Delta - params.K * r2) * x + jx
    elif kind.lower() in ("opo", "cim"):
        x_dot = (p - params.kappa - params.kappa2 * r2) * x + jx
        y_dot = -(p + params.kappa + params.kappa2 * r2) * y + jy
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return x_dot, y_dot


def classical_energy(
    kind: str,
    params: Union[KpoParams, OpoParams],
    p: float,
    x: np.ndarray,
    y: np.ndarray,
    spec: Optional[NetworkSpec] = None,
) -> np.ndarray:
    """
    Classical KPO Hamiltonian H or OPO energy E, summed over modes

    -(p/2)(x^2 - y^2) + (c1/2)(x^2 + y^2) + (c2/4)(x^2 + y^2)^2 per mode with
    (c1, c2) = (Delta, K) or (kappa, kappa2), plus -(xi0/2) sum_ij J_ij (x_i x_j + y_i y_j).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = x * x + y * y
    if kind.lower() in ("kpo", "qbm"):
        pc, c1, c2 = params.pump_sign * p, params.Delta, params.K
    elif kind.lower() in ("opo", "cim"):
        pc, c1, c2 = p, params.kappa, params.kappa2
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    single = -0.5 * pc * (x * x - y * y) + 0.5 * c1 * r2 + 0.25 * c2 * r2 * r2
    energy = single.sum(axis=-1) if single.ndim else single
    if spec is not None:
        coupling = np.einsum("...i,ij,...j->...", x, spec.J, x) + np.einsum("...i,ij,...j->...", y, spec.J, y)
        energy = energy - 0.5 * spec.xi0 * coupling
    return energy


def expectation_value_rhs(
    kind: str,
    params: Union[KpoParams, OpoParams],
    p: float,
    state: Union[StateVector, DensityMatrix],
) -> complex:
    """
    d<a>/dt from low-order moments of a single-mode state

    KPO: i(p <a^dag> - Delta <a> - K <a^dag a^2>)
    OPO: p <a^dag> - kappa <a> - kappa2 <a^dag a^2>
    """
    cutoff = FockCutoff(n_max=state.dims[0] - 1)
    a = fock_space.annihilation(cutoff)
    ad = a.dag()
    m_a = fock_space.expectation(a, state)
    m_ad = fock_space.expectation(ad, state)
    m_ada2 = fock_space.expectation(ad @ a @ a, state)
    if kind.lower() == "kpo":
        return 1j * (params.pump_sign * p * m_ad - params.Delta * m_a - params.K * m_ada2)
    if kind.lower() == "opo":
        return p * m_ad - params.kappa * m_a - params.kappa2 * m_ada2
    raise ValueError(f"expectation equations are single-oscillator; got kind {kind!r}")


def model_cutoff(model: ModelSpec) -> FockCutoff:
    """
    Per-mode truncation for a model: its explicit cutoff, otherwise the truncation
    rule at the final amplitude (single oscillators), 20 levels per mode for two
    modes and 10 levels per mode for three or more
    """
    if model.cutoff is not None:
        return FockCutoff(n_max=model.cutoff)
    if model.n_modes == 2:
        return FockCutoff(n_max=19)
    if model.n_modes >= 3:
        return FockCutoff(n_max=9)
    params = model.kpo_params() if model.is_kpo_like else model.opo_params()
    p_end = max(model.p_start, model.p_end)
    alpha = oscillation_amplitude(model.kind, params, p_end) if p_end >= threshold(model.kind, params) else 0.0
    return fock_space.default_cutoff(alpha)
