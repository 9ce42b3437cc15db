"""
Truncated Fock-space linear algebra: ladder operators, standard states, tensor products

Constructors delegate to qutip and hand back the frozen pydantic containers.
"""
import logging
from math import ceil
from typing import Optional, Sequence, Union

import numpy as np
import qutip

from src.errors import DimensionMismatch, TruncationError
from src.models.fock import DensityMatrix, FockCutoff, Operator, StateVector

logger = logging.getLogger(__name__)

# Modes at or above this count are stored as CSR
SPARSE_MODE_THRESHOLD = 3


def required_n_max(alpha: complex) -> int:
    """Smallest n_max satisfying n_max >= |alpha|^2 + 6|alpha| + 10"""
    r = abs(alpha)
    return int(ceil(r * r + 6.0 * r + 10.0 - 1e-12))


def default_cutoff(alpha_max: float) -> FockCutoff:
    """Truncation rule for states reaching amplitude alpha_max (sqrt(3) -> 24)"""
    return FockCutoff(n_max=required_n_max(alpha_max))


def _check_truncation(alpha: complex, cutoff: FockCutoff) -> None:
    needed = required_n_max(alpha)
    if cutoff.n_max < needed:
        raise TruncationError(
            f"n_max={cutoff.n_max} too small for |alpha|={abs(alpha):.4g}; need >= {needed}"
        )


def _wrap(qobj: qutip.Qobj) -> Operator:
    return Operator.from_qobj(qobj, sparse=len(qobj.dims[0]) >= SPARSE_MODE_THRESHOLD)


def annihilation(cutoff: FockCutoff) -> Operator:
    """Lowering operator with <n-1|a|n> = sqrt(n)"""
    return _wrap(qutip.destroy(cutoff.dim))


def creation(cutoff: FockCutoff) -> Operator:
    return _wrap(qutip.create(cutoff.dim))


def number(cutoff: FockCutoff) -> Operator:
    return _wrap(qutip.num(cutoff.dim))


def parity(cutoff: FockCutoff) -> Operator:
    """exp(i pi a^dag a): diagonal (-1)^n"""
    signs = np.where(np.arange(cutoff.dim) % 2 == 0, 1.0, -1.0)
    return _wrap(qutip.qdiags(signs, 0))


def identity(dims: Sequence[int]) -> Operator:
    return _wrap(qutip.qeye(list(dims)))


def ket(n: int, cutoff: FockCutoff) -> StateVector:
    """Fock basis state |n>"""
    if not 0 <= n <= cutoff.n_max:
        raise TruncationError(f"|{n}> outside truncation n_max={cutoff.n_max}")
    return StateVector.from_qobj(qutip.basis(cutoff.dim, n))


def vacuum(dims: Sequence[int]) -> StateVector:
    return StateVector.from_qobj(qutip.tensor([qutip.basis(d, 0) for d in dims]))


def coherent_state(alpha: complex, cutoff: FockCutoff) -> StateVector:
    """
    Coherent state |alpha> from the analytic Fock amplitudes, renormalized on the truncation

    Args:
        alpha: Complex amplitude
        cutoff: Truncation, must satisfy n_max >= |alpha|^2 + 6|alpha| + 10

    Returns:
        Unit-norm StateVector

    Raises:
        TruncationError: If the cutoff is too small for alpha
    """
    _check_truncation(alpha, cutoff)
    return StateVector.from_qobj(qutip.coherent(cutoff.dim, alpha, method="analytic").unit())


def cat_state(alpha: complex, parity_sign: int, cutoff: FockCutoff) -> StateVector:
    """(|alpha> + parity_sign |-alpha>) / norm, parity_sign in {+1, -1}"""
    if parity_sign not in (1, -1):
        raise ValueError("parity_sign must be +1 or -1")
    _check_truncation(alpha, cutoff)
    plus = qutip.coherent(cutoff.dim, alpha, method="analytic")
    minus = qutip.coherent(cutoff.dim, -alpha, method="analytic")
    return StateVector.from_qobj((plus + parity_sign * minus).unit())


def displacement(alpha: complex, cutoff: FockCutoff) -> Operator:
    """
    D(alpha) = exp(alpha a^dag - alpha* a) on the truncated space

    The exponential of the truncated anti-Hermitian generator is exactly unitary;
    it agrees with the infinite-dimensional D(alpha) on the low-photon subspace.

    Raises:
        TruncationError: If the cutoff is too small for alpha
    """
    _check_truncation(alpha, cutoff)
    return _wrap(qutip.displace(cutoff.dim, alpha))


def tensor_state(parts: Sequence[StateVector]) -> StateVector:
    """Kronecker product of states, first part slowest"""
    if not parts:
        raise DimensionMismatch("tensor_state needs at least one part")
    return StateVector.from_qobj(qutip.tensor([part.to_qobj() for part in parts]))


def tensor_op(ops: Sequence[Optional[Operator]], dims: Sequence[int]) -> Operator:
    """
    Kronecker product over modes; a None slot is the identity on that mode

    Args:
        ops: One single-mode operator (or None) per mode
        dims: Per-mode dimensions

    Returns:
        Multi-mode Operator, CSR when there are three or more modes

    Raises:
        DimensionMismatch: If an operator does not match its mode dimension
    """
    dims = tuple(dims)
    if len(ops) != len(dims):
        raise DimensionMismatch(f"{len(ops)} operators for {len(dims)} modes")
    factors = []
    for op, d in zip(ops, dims):
        if op is None:
            factors.append(qutip.qeye(d))
            continue
        if op.dims != (d,):
            raise DimensionMismatch(f"operator dims {op.dims} placed on a mode of dimension {d}")
        factors.append(op.to_qobj())
    return _wrap(qutip.tensor(factors))


def mode_operator(op: Operator, mode: int, dims: Sequence[int]) -> Operator:
    """Embed a single-mode operator on `mode` (0-based) of a multi-mode space"""
    slots: list = [None] * len(dims)
    slots[mode] = op
    return tensor_op(slots, dims)


def mode_annihilators(dims: Sequence[int]) -> list:
    """a_i embedded on every mode"""
    return [mode_operator(annihilation(FockCutoff(n_max=d - 1)), i, dims) for i, d in enumerate(dims)]


def ket2dm(state: StateVector) -> DensityMatrix:
    return DensityMatrix.from_qobj(qutip.ket2dm(state.to_qobj()))


def expectation(op: Operator, state: Union[StateVector, DensityMatrix]) -> complex:
    """
    <psi|O|psi> for a StateVector or Tr[O rho] for a DensityMatrix

    Raises:
        DimensionMismatch: If operator and state dims differ
    """
    if tuple(op.dims) != tuple(state.dims):
        raise DimensionMismatch(f"operator dims {op.dims} vs state dims {state.dims}")
    return complex(qutip.expect(op.to_qobj(), state.to_qobj()))


def mode_populations(state: Union[StateVector, DensityMatrix]) -> list:
    """Photon-number distribution of every mode"""
    if isinstance(state, StateVector):
        probs = np.abs(state.amplitudes) ** 2
    else:
        probs = state.diagonal()
    probs = probs.reshape(state.dims)
    marginals = []
    for mode in range(len(state.dims)):
        other = tuple(i for i in range(len(state.dims)) if i != mode)
        marginals.append(probs.sum(axis=other) if other else probs)
    return marginals


def top_level_population(state: Union[StateVector, DensityMatrix], levels: int = 2) -> float:
    """Largest population held in the top `levels` Fock levels of any mode"""
    total = float(np.sum(np.abs(state.amplitudes) ** 2)) if isinstance(state, StateVector) else float(np.real(state.trace))
    worst = 0.0
    for marginal in mode_populations(state):
        worst = max(worst, float(np.sum(marginal[-levels:])))
    return worst / total if total > 0 else worst


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for normalized pure states"""
    if a.dims != b.dims:
        raise DimensionMismatch(f"dims {a.dims} vs {b.dims}")
    return float(abs(a.to_qobj().overlap(b.to_qobj())) ** 2)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """(1/2) || rho - sigma ||_1"""
    if rho.dims != sigma.dims:
        raise DimensionMismatch(f"dims {rho.dims} vs {sigma.dims}")
    return float(qutip.tracedist(rho.to_qobj(), sigma.to_qobj()))
