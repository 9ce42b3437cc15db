"""
Phase-space analysis: Wigner functions, classical fixed points and portraits,
cat fidelities and quadrature-sign projectors
"""
import logging
from typing import List, Literal, Optional, Union

import numpy as np
import qutip

from src.config import Settings, get_settings
from src.errors import TruncationError
from src.models.fock import DensityMatrix, FockCutoff, Operator, StateVector
from src.models.params import KpoParams, OpoParams
from src.models.results import ClassicalState, FixedPoint, FixedPointReport, GridAxis, WignerGrid
from src.services import fock_space, oscillator_models
from src.services.cache_service import CacheService

logger = logging.getLogger(__name__)

CENTER_TOLERANCE = 1e-9

# Overlap eigenvalues this close to 1/2 are split evenly between the sign projectors
SPECTRAL_TIE_TOLERANCE = 1e-9

QuantumState = Union[StateVector, DensityMatrix]


def default_axis(settings: Optional[Settings] = None) -> GridAxis:
    settings = settings or get_settings()
    return GridAxis(min=-settings.wigner_extent, max=settings.wigner_extent, resolution=settings.wigner_resolution)


def _density(state: QuantumState) -> np.ndarray:
    if isinstance(state, StateVector):
        psi = state.amplitudes
        return np.outer(psi, psi.conj())
    return np.array(state.elements)


def _check_state_truncation(state: QuantumState, settings: Settings) -> None:
    leakage = fock_space.top_level_population(state)
    if leakage > settings.leakage_tolerance:
        raise TruncationError(f"state holds {leakage:.3e} in its top Fock levels; Wigner values unreliable")


def _kernel_table(alpha: np.ndarray, dim: int) -> np.ndarray:
    """
    Fock-basis Wigner kernel F[m, n, k] = (2/pi) Tr[D(-alpha_k)|n><m|D(alpha_k) P]

    W(alpha) = sum_mn rho_mn F[m, n]. Built with the Laguerre recursion on the upper
    triangle; the lower triangle is the complex conjugate.
    """
    alpha = np.asarray(alpha, dtype=complex).ravel()
    table = np.zeros((dim, dim, alpha.size), dtype=complex)
    row = np.zeros((dim, alpha.size), dtype=complex)
    row[0] = (2.0 / np.pi) * np.exp(-2.0 * np.abs(alpha) ** 2)
    for n in range(1, dim):
        row[n] = 2.0 * alpha * row[n - 1] / np.sqrt(n)
    table[0] = row
    for m in range(1, dim):
        previous = row[m].copy()
        row[m] = (2.0 * np.conj(alpha) * previous - np.sqrt(m) * row[m - 1]) / np.sqrt(m)
        for n in range(m + 1, dim):
            updated = (2.0 * alpha * row[n - 1] - np.sqrt(m) * previous) / np.sqrt(n)
            previous = row[n].copy()
            row[n] = updated
        table[m, m:] = row[m:]
    lower = np.tril_indices(dim, -1)
    table[lower[0], lower[1]] = np.conj(table[lower[1], lower[0]])
    return table


def _wigner_by_displacement(rho: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """(2/pi) Tr[D(-alpha) rho D(alpha) P] with padded truncated displacements"""
    dim = rho.shape[0]
    shape = alpha.shape
    values = np.empty(alpha.size)
    for k, a in enumerate(alpha.ravel()):
        padded = FockCutoff(n_max=dim - 1 + 2 * fock_space.required_n_max(a))
        big = np.zeros((padded.dim, padded.dim), dtype=complex)
        big[:dim, :dim] = rho
        d = fock_space.displacement(a, padded).matrix
        displaced = d.conj().T @ big @ d
        signs = np.where(np.arange(padded.dim) % 2 == 0, 1.0, -1.0)
        values[k] = (2.0 / np.pi) * np.real(np.sum(signs * np.diag(displaced)))
    return values.reshape(shape)


def wigner_single(
    state: QuantumState,
    axis_x: Optional[GridAxis] = None,
    axis_y: Optional[GridAxis] = None,
    method: Literal["clenshaw", "displacement"] = "clenshaw",
    settings: Optional[Settings] = None,
) -> WignerGrid:
    """
    Single-mode Wigner function W(alpha) = (2/pi) Tr[D(-alpha) rho D(alpha) P]

    Args:
        state: Single-mode state
        axis_x: Grid along x = Re(alpha) (default from settings)
        axis_y: Grid along y = Im(alpha) (default: same as axis_x)
        method: "clenshaw" evaluates the Laguerre series of the truncated rho with
            qutip.wigner (g = 2, so alpha = x + i y); "displacement" applies padded
            displacement matrices pointwise (slow, used as a cross-check)
        settings: Grid defaults and leakage tolerance

    Returns:
        WignerGrid with values[i, j] = W(x_i + i y_j)

    Raises:
        TruncationError: If the state is not contained in its truncation
    """
    settings = settings or get_settings()
    _check_state_truncation(state, settings)
    axis_x = axis_x or default_axis(settings)
    axis_y = axis_y or axis_x
    if method == "clenshaw":
        # qutip returns rows along y
        values = np.asarray(qutip.wigner(state.to_qobj(), axis_x.values(), axis_y.values(), g=2, method="clenshaw")).T
    else:
        xs, ys = np.meshgrid(axis_x.values(), axis_y.values(), indexing="ij")
        values = _wigner_by_displacement(_density(state), xs + 1j * ys)
    return WignerGrid(axis0=axis_x, axis1=axis_y, values=values, slice_tag="single", metadata={"method": method})


def wigner_two_mode_slice(
    state: QuantumState,
    slice_tag: Literal["y1=y2=0", "x1=x2=0"],
    axis: Optional[GridAxis] = None,
    settings: Optional[Settings] = None,
) -> WignerGrid:
    """
    Two-mode Wigner function (2/pi)^2 Tr[D1(-a1) D2(-a2) rho D1(a1) D2(a2) P1 P2] on a 2-D slice

    Args:
        state: Two-mode state
        slice_tag: "y1=y2=0" samples (x1, x2); "x1=x2=0" samples (y1, y2)
        axis: Grid used for both sampled variables
        settings: Grid defaults and leakage tolerance

    Returns:
        WignerGrid with values[i, j] at (u_i, v_j) of the chosen slice

    Raises:
        TruncationError: If the state is not contained in its truncation
    """
    settings = settings or get_settings()
    if len(state.dims) != 2:
        raise ValueError(f"two-mode slice needs a two-mode state, got dims {state.dims}")
    _check_state_truncation(state, settings)
    axis = axis or default_axis(settings)
    u = axis.values()
    samples = u.astype(complex) if slice_tag == "y1=y2=0" else 1j * u
    d1, d2 = state.dims
    f1 = _kernel_table(samples, d1)
    f2 = _kernel_table(samples, d2)
    rho = _density(state).reshape(d1, d2, d1, d2)
    partial = np.einsum("abcd,aci->bdi", rho, f1)
    values = np.real(np.einsum("bdi,bdj->ij", partial, f2))
    return WignerGrid(axis0=axis, axis1=axis, values=values, slice_tag=slice_tag)


def _jacobian(kind: str, params: Union[KpoParams, OpoParams], p: float, x: float, y: float) -> np.ndarray:
    r2 = x * x + y * y
    if kind == "kpo":
        pc = params.pump_sign * p
        k = params.K
        return np.array([
            [2 * k * x * y, pc + params.Delta + k * r2 + 2 * k * y * y],
            [pc - params.Delta - k * r2 - 2 * k * x * x, -2 * k * x * y],
        ])
    k2 = params.kappa2
    return np.array([
        [p - params.kappa - k2 * r2 - 2 * k2 * x * x, -2 * k2 * x * y],
        [-2 * k2 * x * y, -(p + params.kappa + k2 * r2) - 2 * k2 * y * y],
    ])


def _classify(kind: str, eigenvalues: np.ndarray) -> tuple:
    real = eigenvalues.real
    if kind == "kpo":
        if np.all(np.abs(real) <= CENTER_TOLERANCE):
            return True, "center"
        return False, "saddle"
    if np.all(real < 0):
        return True, "attractor"
    if np.all(real > 0):
        return False, "repeller"
    return False, "saddle"


def classical_fixed_points(kind: str, params: Union[KpoParams, OpoParams], p: float) -> FixedPointReport:
    """
    Fixed points of a single classical KPO or OPO and their stability

    Below threshold only the origin exists; above it the origin loses stability and
    the pair (+-amplitude, 0) appears (pitchfork). Further branches on the y axis
    (KPO with p < -Delta, OPO never for p >= 0) are included when they exist.
    """
    kind = kind.lower()
    candidates = [(0.0, 0.0)]
    if kind == "kpo":
        pc = params.pump_sign * p
        for signed_p, on_x in ((pc, True), (-pc, False)):
            radius2 = (signed_p - params.Delta) / params.K
            if radius2 > 0:
                r = float(np.sqrt(radius2))
                candidates += [(r, 0.0), (-r, 0.0)] if on_x else [(0.0, r), (0.0, -r)]
    else:
        for signed_p, on_x in ((p, True), (-p, False)):
            radius2 = (signed_p - params.kappa) / params.kappa2
            if radius2 > 0:
                r = float(np.sqrt(radius2))
                candidates += [(r, 0.0), (-r, 0.0)] if on_x else [(0.0, r), (0.0, -r)]

    points: List[FixedPoint] = []
    for x, y in candidates:
        eigenvalues = np.linalg.eigvals(_jacobian(kind, params, p, x, y))
        stable, classification = _classify(kind, eigenvalues)
        points.append(FixedPoint(
            x=x, y=y, stable=stable, classification=classification,
            eigen_real=tuple(float(v) for v in eigenvalues.real),
            eigen_imag=tuple(float(v) for v in eigenvalues.imag),
        ))
    return FixedPointReport(kind=kind, p=p, points=points)


def classical_energy(
    kind: str,
    params: Union[KpoParams, OpoParams],
    p: float,
    z: ClassicalState,
    spec=None,
) -> float:
    """Classical KPO Hamiltonian H or OPO energy E at z (network coupling included when spec given)"""
    return float(oscillator_models.classical_energy(kind, params, p, z.x, z.y, spec))


def phase_portrait(
    kind: str,
    params: Union[KpoParams, OpoParams],
    p: float,
    axis: Optional[GridAxis] = None,
) -> WignerGrid:
    """Classical energy landscape H(x, y) or E(x, y) over a grid, with fixed points in metadata"""
    axis = axis or GridAxis(min=-2.5, max=2.5, resolution=101)
    xs, ys = np.meshgrid(axis.values(), axis.values(), indexing="ij")
    values = oscillator_models.classical_energy(kind, params, p, xs[..., None], ys[..., None])
    report = classical_fixed_points(kind, params, p)
    return WignerGrid(
        axis0=axis,
        axis1=axis,
        values=values,
        slice_tag="energy",
        metadata={
            "kind": kind,
            "p": p,
            "fixed_points": [point.model_dump() for point in report.points],
        },
    )


def cat_fidelity(state: StateVector, alpha: float, parity_sign: int = 1) -> float:
    """|<cat(alpha, parity)|psi>|^2 for a single-mode state"""
    cutoff = FockCutoff(n_max=state.dims[0] - 1)
    cat = fock_space.cat_state(alpha, parity_sign, cutoff)
    return fock_space.fidelity(cat, state)


def half_line_overlaps(dim: int) -> np.ndarray:
    """
    I[m, n] = integral_0^inf psi_m(q) psi_n(q) dq for Hermite functions psi_n

    Closed form from the Wronskian identity: 1/2 on the diagonal, 0 when m + n is
    even, and (psi_m'(0) psi_n(0) - psi_m(0) psi_n'(0)) / (2 (m - n)) otherwise.
    """
    psi0 = np.zeros(dim)
    dpsi0 = np.zeros(dim)
    psi0[0] = np.pi ** -0.25
    for n in range(2, dim):
        psi0[n] = -np.sqrt((n - 1) / n) * psi0[n - 2]
    for n in range(1, dim):
        dpsi0[n] = np.sqrt(2.0 * n) * psi0[n - 1]

    overlaps = 0.5 * np.eye(dim)
    m, n = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    odd = (m + n) % 2 == 1
    numerator = np.outer(dpsi0, psi0) - np.outer(psi0, dpsi0)
    overlaps[odd] = numerator[odd] / (2.0 * (m[odd] - n[odd]))
    return overlaps


def quadrature_sign_projector(sign: int, cutoff: FockCutoff, cache: Optional[CacheService] = None) -> Operator:
    """
    Projector onto x > 0 (sign=+1) or x < 0 (sign=-1) of the quadrature x = (a + a^dag)/2

    The truncated half-line overlap matrix T is not idempotent, but parity maps it
    to I - T, so its spectrum pairs lambda with 1 - lambda. Pi_+ keeps the
    eigenvectors with lambda > 1/2 and Pi_- = I - Pi_+ = P Pi_+ P. An odd dimension
    forces one unpaired eigenvalue at exactly 1/2; that eigenvector is shared with
    weight 1/2, so idempotence is exact only for an even dimension.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")

    def build() -> Operator:
        values, vectors = np.linalg.eigh(half_line_overlaps(cutoff.dim))
        weights = np.where(values > 0.5, 1.0, 0.0)
        weights[np.abs(values - 0.5) < SPECTRAL_TIE_TOLERANCE] = 0.5
        plus = (vectors * weights) @ vectors.T
        matrix = plus if sign == 1 else np.eye(cutoff.dim) - plus
        return Operator(dims=(cutoff.dim,), matrix=matrix)

    if cache is None:
        return build()
    return cache.get_or_compute(f"projector:{sign:+d}:{cutoff.n_max}", build)
