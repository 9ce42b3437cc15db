"""
Time evolution: Schrodinger, Lindblad master equation, quantum-jump trajectories, classical ODEs

Quantum engines run on qutip (sesolve, mesolve, mcsolve); the classical mean-field
equations and trajectories conditioned on suppressed channels use solve_ivp.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from math import prod
from typing import Any, Callable, Collection, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import qutip
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from tqdm import tqdm

from src.config import Settings, get_settings
from src.errors import InvalidRates, StepFailure, TruncationError
from src.models.fock import DensityMatrix, FockCutoff, Operator, StateVector
from src.models.params import KpoParams, LindbladTerm, ModelSpec, NetworkSpec, OpoParams, PumpSchedule
from src.models.results import ClassicalState, EvolutionResult, JumpRecord, RngSeed, TrajectoryEnsemble
from src.services import fock_space, oscillator_models

logger = logging.getLogger(__name__)

Coefficient = Callable[[float], float]


def _constant_one(t: float) -> float:
    return 1.0


class TimeDependentGenerator:
    """H(t) = sum_k c_k(t) H_k together with time-independent Lindblad terms"""

    def __init__(
        self,
        dims: Sequence[int],
        terms: Sequence[Tuple[Operator, Optional[Coefficient]]],
        lindblad: Sequence[LindbladTerm] = (),
    ):
        self.dims = tuple(dims)
        for op, _ in terms:
            if op.dims != self.dims:
                raise ValueError(f"term dims {op.dims} differ from generator dims {self.dims}")
        self._terms = list(terms)
        self._matrices = [op.matrix for op, _ in terms]
        self._coefficients = [c if c is not None else _constant_one for _, c in terms]
        self.lindblad = list(lindblad)
        for term in self.lindblad:
            if term.rate < 0:
                raise InvalidRates(f"negative rate {term.rate} on channel {term.label!r}")

    @classmethod
    def constant(cls, hamiltonian: Operator, lindblad: Sequence[LindbladTerm] = ()) -> "TimeDependentGenerator":
        return cls(hamiltonian.dims, [(hamiltonian, None)], lindblad)

    @classmethod
    def from_model(cls, model: ModelSpec, cutoff: Optional[FockCutoff] = None) -> "TimeDependentGenerator":
        """
        Build the generator of one of the four machine models with its pump schedule

        Args:
            model: Model kind, parameters and schedule
            cutoff: Per-mode truncation; defaults to model.cutoff or the truncation rule

        Returns:
            TimeDependentGenerator whose pump coefficient follows the schedule
        """
        cutoff = cutoff or oscillator_models.model_cutoff(model)
        pump = model.schedule().pump
        if model.kind == "kpo":
            a = fock_space.annihilation(cutoff)
            kpo = model.kpo_params()
            return cls(a.dims, [
                (oscillator_models.kpo_static_part(kpo, a), None),
                (oscillator_models.kpo_pump_part(kpo, a), pump),
            ])
        if model.kind == "opo":
            pump_part, terms = oscillator_models.opo_generator(model.opo_params(), 1.0, cutoff)
            return cls(pump_part.dims, [(pump_part, pump)], terms)
        if model.kind == "qbm":
            static, pump_part = oscillator_models.qbm_hamiltonian_parts(model.network(), model.kpo_params(), cutoff)
            return cls(static.dims, [(static, None), (pump_part, pump)])
        pump_part, terms = oscillator_models.cim_lindblad_set(model.network(), model.opo_params(), 1.0, cutoff)
        return cls(pump_part.dims, [(pump_part, pump)], terms)

    @property
    def dim(self) -> int:
        return prod(self.dims)

    @property
    def has_dissipation(self) -> bool:
        return any(term.rate > 0 for term in self.lindblad)

    def coefficients(self, t: float) -> List[float]:
        return [c(t) for c in self._coefficients]

    def hamiltonian(self, t: float) -> Operator:
        total = None
        for c, m in zip(self.coefficients(t), self._matrices):
            total = m * c if total is None else total + m * c
        return Operator(dims=self.dims, matrix=total)

    def apply_hamiltonian(self, t: float, vectors: np.ndarray) -> np.ndarray:
        """H(t) @ vectors without assembling H(t)"""
        out = np.zeros_like(vectors, dtype=complex)
        for c, m in zip(self.coefficients(t), self._matrices):
            if c != 0:
                out += c * np.asarray(m @ vectors)
        return out

    def decay_operator(self, labels: Optional[Collection[str]] = None) -> Union[np.ndarray, sp.csr_matrix]:
        """sum rate L^dag L over the selected channels (all when labels is None)"""
        total = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for term in self.lindblad:
            if labels is None or term.label in labels:
                l = sp.csr_matrix(term.jump_operator.matrix)
                total = total + term.rate * (l.conj().T @ l)
        return total

    def active_channels(self) -> List[LindbladTerm]:
        return [term for term in self.lindblad if term.rate > 0]

    def qobjevo(self) -> qutip.QobjEvo:
        """H(t) in qutip list form: constant parts bare, pumped parts paired with their coefficient"""
        parts: List[Any] = [op.to_qobj() if c is None else [op.to_qobj(), c] for op, c in self._terms]
        return qutip.QobjEvo(parts)

    def collapse_operators(self, channels: Optional[Sequence[LindbladTerm]] = None) -> List[qutip.Qobj]:
        """sqrt(2 rate) L per channel, matching rate (2 L rho L^dag - L^dag L rho - rho L^dag L)"""
        channels = self.active_channels() if channels is None else channels
        return [np.sqrt(2.0 * term.rate) * term.jump_operator.to_qobj() for term in channels]


def sample_grid(schedule: PumpSchedule, sample_times: Optional[Sequence[float]] = None, n_samples: int = 101) -> np.ndarray:
    """Requested sample times, always spanning [0, t_final]"""
    if sample_times is None:
        return np.linspace(0.0, schedule.t_final, n_samples)
    times = np.unique(np.concatenate([[0.0], np.asarray(sample_times, dtype=float), [schedule.t_final]]))
    if times[0] < 0 or times[-1] > schedule.t_final:
        raise ValueError("sample times must lie within [0, t_final]")
    return times


def _integrate(fun, t_span, y0, t_eval, settings: Settings, rtol=None, atol=None, events=None):
    sol = solve_ivp(
        fun,
        t_span,
        y0,
        method=settings.integrator,
        t_eval=t_eval,
        rtol=rtol if rtol is not None else settings.rtol,
        atol=atol if atol is not None else settings.atol,
        events=events,
    )
    if sol.status == -1:
        raise StepFailure(f"integration failed on [{t_span[0]}, {t_span[1]}]: {sol.message}")
    return sol


def _solver_options(settings: Settings, **extra: Any) -> Dict[str, Any]:
    options: Dict[str, Any] = {
        "method": settings.quantum_method,
        "rtol": settings.rtol,
        "atol": settings.atol,
        "nsteps": settings.nsteps,
        "store_states": True,
        "progress_bar": "",
    }
    options.update(extra)
    return options


def _run_solver(name: str, solve: Callable[[], Any]) -> Any:
    """Call a qutip solver, reporting integrator breakdowns as StepFailure"""
    try:
        return solve()
    except Exception as exc:
        raise StepFailure(f"{name} failed: {exc}") from exc


def _guard_leakage(state: Union[StateVector, DensityMatrix], t: float, settings: Settings) -> float:
    leakage = fock_space.top_level_population(state)
    if leakage > settings.leakage_tolerance:
        raise TruncationError(
            f"top-level population {leakage:.3e} exceeds {settings.leakage_tolerance:.1e} at t={t:.4g}; "
            f"raise the cutoff (dims {state.dims})"
        )
    return leakage


def evolve_schrodinger(
    generator: TimeDependentGenerator,
    psi0: StateVector,
    schedule: PumpSchedule,
    settings: Optional[Settings] = None,
    sample_times: Optional[Sequence[float]] = None,
) -> EvolutionResult:
    """
    Integrate |psi_dot> = -i H(t) |psi> with qutip.sesolve

    Args:
        generator: Time-dependent Hamiltonian (Lindblad terms are ignored)
        psi0: Normalized initial state
        schedule: Pump schedule; fixes t_final
        settings: Tolerances, solver method and leakage guard
        sample_times: Snapshot times (default: 101 uniform samples)

    Returns:
        EvolutionResult of StateVector snapshots

    Raises:
        TruncationError: If the leakage guard trips at a snapshot
        StepFailure: If the solver breaks down or the norm drifts past settings.norm_tolerance
    """
    settings = settings or get_settings()
    times = sample_grid(schedule, sample_times)
    result = _run_solver("sesolve", lambda: qutip.sesolve(
        generator.qobjevo(), psi0.to_qobj(), times, options=_solver_options(settings, normalize_output=False),
    ))
    states = [StateVector.from_qobj(state) for state in result.states]
    leakage = max(_guard_leakage(state, t, settings) for state, t in zip(states, times))
    norm_drift = max(abs(state.norm - 1.0) for state in states)
    if norm_drift > settings.norm_tolerance:
        raise StepFailure(
            f"norm drifted by {norm_drift:.2e} (tolerance {settings.norm_tolerance:.1e}); tighten rtol/atol"
        )
    logger.debug("schrodinger: dim=%d norm_drift=%.2e leakage=%.2e", psi0.dim, norm_drift, leakage)
    return EvolutionResult(
        sample_times=[float(t) for t in times],
        states=states,
        diagnostics={"norm_drift": norm_drift, "max_leakage": leakage, "method": settings.quantum_method},
    )


def evolve_master(
    generator: TimeDependentGenerator,
    rho0: DensityMatrix,
    schedule: PumpSchedule,
    settings: Optional[Settings] = None,
    sample_times: Optional[Sequence[float]] = None,
) -> EvolutionResult:
    """
    Integrate rho_dot = -i[H(t), rho] + sum rate (2 L rho L^dag - L^dag L rho - rho L^dag L)

    Runs qutip.mesolve with collapse operators sqrt(2 rate) L.

    Returns:
        EvolutionResult of DensityMatrix snapshots; diagnostics carry trace drift,
        Hermiticity drift and the most negative eigenvalue of the final state

    Raises:
        TruncationError: If the leakage guard trips at a snapshot
        StepFailure: If the solver cannot reach the requested tolerance
    """
    settings = settings or get_settings()
    times = sample_grid(schedule, sample_times)
    c_ops = generator.collapse_operators()
    result = _run_solver("mesolve", lambda: qutip.mesolve(
        generator.qobjevo(), rho0.to_qobj(), times, c_ops=c_ops,
        options=_solver_options(settings, normalize_output=False),
    ))
    states = [DensityMatrix.from_qobj(state) for state in result.states]
    leakage = max(_guard_leakage(state, t, settings) for state, t in zip(states, times))
    trace_drift = max(abs(state.trace - 1.0) for state in states)
    hermiticity = max(state.hermiticity_error() for state in states)
    min_eig = states[-1].min_eigenvalue()
    logger.debug(
        "master: dim=%d channels=%d trace_drift=%.2e hermiticity=%.2e min_eig=%.2e",
        generator.dim, len(c_ops), trace_drift, hermiticity, min_eig,
    )
    return EvolutionResult(
        sample_times=[float(t) for t in times],
        states=states,
        diagnostics={
            "trace_drift": trace_drift,
            "hermiticity_drift": hermiticity,
            "min_eigenvalue": min_eig,
            "max_leakage": leakage,
            "method": settings.quantum_method,
        },
    )


def _is_suppressed(label: str, suppressed: Collection[str]) -> bool:
    return any(label == prefix or label.startswith(prefix + ":") for prefix in suppressed)


class _McsolveRunner:
    """qutip.mcsolve over contiguous index batches; trajectory k is seeded with seed XOR k"""

    def __init__(
        self,
        generator: TimeDependentGenerator,
        psi0: StateVector,
        times: np.ndarray,
        seed: RngSeed,
        settings: Settings,
    ):
        self.generator = generator
        self.psi0 = psi0
        self.times = times
        self.seed = seed
        self.settings = settings
        self.channels = generator.active_channels()

    def run_batch(self, indices: Sequence[int]) -> List[Tuple[EvolutionResult, JumpRecord]]:
        options = _solver_options(self.settings, keep_runs_results=True, map="serial")
        result = _run_solver("mcsolve", lambda: qutip.mcsolve(
            self.generator.qobjevo(), self.psi0.to_qobj(), self.times,
            c_ops=self.generator.collapse_operators(self.channels),
            ntraj=len(indices), seeds=[self.seed.for_trajectory(int(k)) for k in indices], options=options,
        ))
        outcomes = []
        for states, col_times, col_which in zip(result.runs_states, result.col_times, result.col_which):
            snapshots = []
            for t, qobj in zip(self.times, states):
                state = StateVector.from_qobj(qobj).normalized()
                _guard_leakage(state, t, self.settings)
                snapshots.append(state)
            record = JumpRecord(
                times=[float(t) for t in col_times],
                channels=[self.channels[int(k)].label for k in col_which],
            )
            outcomes.append((EvolutionResult(sample_times=[float(t) for t in self.times], states=snapshots), record))
        return outcomes


class _ConditionedRunner:
    """
    Waiting-time quantum-jump unravelling in which suppressed channels never fire

    Suppressed channels still enter H_eff, so they damp the conditioned state; their
    integrated rate is carried as an extra ODE component so the jump threshold
    compares against the norm of the unsuppressed record only.
    """

    def __init__(
        self,
        generator: TimeDependentGenerator,
        psi0: StateVector,
        times: np.ndarray,
        t_final: float,
        seed: RngSeed,
        settings: Settings,
        suppressed: Collection[str],
    ):
        self.generator = generator
        self.psi0 = psi0
        self.times = times
        self.t_final = t_final
        self.seed = seed
        self.settings = settings
        active = generator.active_channels()
        self.allowed = [t for t in active if not _is_suppressed(t.label, suppressed)]
        self.hidden = [t for t in active if _is_suppressed(t.label, suppressed)]
        self._decay = generator.decay_operator([t.label for t in active])
        self._allowed_ops = [(t.rate, sp.csr_matrix(t.jump_operator.matrix), t.label) for t in self.allowed]
        self._hidden_ops = [(t.rate, sp.csr_matrix(t.jump_operator.matrix)) for t in self.hidden]
        self.dim = generator.dim

    def _rhs(self, t, y):
        psi = y[: self.dim]
        out = np.empty_like(y)
        out[: self.dim] = -1j * self.generator.apply_hamiltonian(t, psi) - np.asarray(self._decay @ psi)
        if self._hidden_ops:
            norm2 = np.vdot(psi, psi).real
            rate = sum(2.0 * r * np.linalg.norm(l @ psi) ** 2 for r, l in self._hidden_ops)
            out[self.dim] = rate / norm2
        return out

    def run(self, index: int) -> Tuple[EvolutionResult, JumpRecord]:
        rng = self.seed.generator(index)
        track_hidden = bool(self._hidden_ops)
        y = self.psi0.amplitudes.astype(complex)
        if track_hidden:
            y = np.append(y, 0.0 + 0.0j)
        t = 0.0
        threshold = rng.random()
        snapshots: List[StateVector] = []
        snapshot_times: List[float] = []
        jump_times: List[float] = []
        jump_channels: List[str] = []

        while True:
            pending = self.times[self.times >= t] if not snapshot_times else self.times[self.times > t]
            events = None
            if self._allowed_ops:
                log_r = np.log(threshold)

                def crossing(_t, state, log_r=log_r):
                    psi = state[: self.dim]
                    hidden = state[self.dim].real if track_hidden else 0.0
                    return np.log(np.vdot(psi, psi).real) + hidden - log_r

                crossing.terminal = True
                crossing.direction = -1
                events = [crossing]

            sol = _integrate(self._rhs, (t, self.t_final), y, pending, self.settings, events=events)
            for k, tk in enumerate(sol.t):
                psi = sol.y[: self.dim, k]
                state = StateVector(dims=self.psi0.dims, amplitudes=psi / np.linalg.norm(psi))
                _guard_leakage(state, tk, self.settings)
                snapshots.append(state)
                snapshot_times.append(float(tk))

            if sol.status != 1:
                break

            t = float(sol.t_events[0][0])
            psi = sol.y_events[0][0][: self.dim]
            weights = np.array([r * np.linalg.norm(l @ psi) ** 2 for r, l, _ in self._allowed_ops])
            channel = int(rng.choice(len(weights), p=weights / weights.sum()))
            _, l, label = self._allowed_ops[channel]
            psi = np.asarray(l @ psi)
            psi = psi / np.linalg.norm(psi)
            jump_times.append(t)
            jump_channels.append(label)
            y = np.append(psi, 0.0 + 0.0j) if track_hidden else psi
            threshold = rng.random()

        result = EvolutionResult(sample_times=snapshot_times, states=snapshots)
        return result, JumpRecord(times=jump_times, channels=jump_channels)


def _pure_batch(generator: TimeDependentGenerator, psi0: StateVector, schedule: PumpSchedule, times, settings):
    """Without active channels every trajectory is the Schrodinger solution"""
    result = evolve_schrodinger(generator, psi0, schedule, settings, sample_times=times)

    def run_batch(indices: Sequence[int]) -> List[Tuple[EvolutionResult, JumpRecord]]:
        return [(result, JumpRecord()) for _ in indices]

    return run_batch


def evolve_trajectories(
    generator: TimeDependentGenerator,
    psi0: StateVector,
    schedule: PumpSchedule,
    n_traj: int,
    seed: RngSeed,
    settings: Optional[Settings] = None,
    sample_times: Optional[Sequence[float]] = None,
    suppressed: Collection[str] = (),
    average: Optional[bool] = None,
) -> TrajectoryEnsemble:
    """
    Quantum-jump Monte Carlo unravelling of the generator's master equation

    Between jumps each trajectory follows H_eff = H - i sum rate L^dag L. A jump
    fires when the squared norm falls below a pre-drawn uniform threshold; the
    channel is drawn with probability proportional to rate ||L psi||^2. Plain
    ensembles run qutip.mcsolve in contiguous batches, one per worker. Channels whose labels are
    listed in `suppressed` never fire: they only damp the conditioned state, which
    is renormalised at every snapshot; those ensembles use a solve_ivp runner with
    a terminal norm event.

    Args:
        generator: Hamiltonian and Lindblad terms
        psi0: Normalized initial state
        schedule: Pump schedule; fixes t_final
        n_traj: Number of trajectories
        seed: Base seed; trajectory k uses seed XOR k
        settings: Tolerances, leakage guard and max_workers
        sample_times: Snapshot times (default: 101 uniform samples)
        suppressed: Channel label prefixes that are never applied as jumps
        average: Build trajectory-averaged density matrices (default: dim <= 1024)

    Returns:
        TrajectoryEnsemble in trajectory-index order

    Raises:
        InvalidRates: If a Lindblad rate is negative
        TruncationError: If the leakage guard trips
    """
    settings = settings or get_settings()
    times = sample_grid(schedule, sample_times)
    active = generator.active_channels()
    batches = [[k] for k in range(n_traj)]
    if any(_is_suppressed(term.label, suppressed) for term in active):
        runner = _ConditionedRunner(generator, psi0, times, schedule.t_final, seed, settings, suppressed)

        def run_batch(indices: Sequence[int]) -> List[Tuple[EvolutionResult, JumpRecord]]:
            return [runner.run(k) for k in indices]
    elif active:
        run_batch = _McsolveRunner(generator, psi0, times, seed, settings).run_batch
        split = np.array_split(np.arange(n_traj), min(n_traj, settings.max_workers))
        batches = [[int(k) for k in chunk] for chunk in split]
    else:
        run_batch = _pure_batch(generator, psi0, schedule, times, settings)

    with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
        done = tqdm(pool.map(run_batch, batches), total=len(batches), desc="trajectories", disable=None, leave=False)
        outcomes = [outcome for batch in done for outcome in batch]

    trajectories = [result for result, _ in outcomes]
    jumps = [record for _, record in outcomes]

    if average is None:
        average = generator.dim <= 1024
    averaged = None
    if average:
        averaged = []
        for k in range(len(times)):
            rho = np.zeros((generator.dim, generator.dim), dtype=complex)
            for trajectory in trajectories:
                psi = trajectory.states[k].amplitudes
                rho += np.outer(psi, psi.conj())
            averaged.append(DensityMatrix(dims=psi0.dims, elements=rho / n_traj))

    mean_jumps = float(np.mean([record.count for record in jumps])) if jumps else 0.0
    logger.debug("trajectories: n=%d dim=%d mean_jumps=%.2f", n_traj, generator.dim, mean_jumps)
    return TrajectoryEnsemble(
        sample_times=list(times),
        trajectories=trajectories,
        jumps=jumps,
        averaged=averaged,
        diagnostics={"mean_jumps": mean_jumps, "seed": seed.seed},
    )


def evolve_classical(
    kind: str,
    params: Union[KpoParams, OpoParams],
    z0: ClassicalState,
    schedule: PumpSchedule,
    spec: Optional[NetworkSpec] = None,
    settings: Optional[Settings] = None,
    sample_times: Optional[Sequence[float]] = None,
) -> EvolutionResult:
    """
    Integrate the classical KPO or OPO (network) equations of motion

    Args:
        kind: "kpo"/"qbm" or "opo"/"cim"
        params: Oscillator parameters
        z0: Initial amplitudes
        schedule: Pump schedule, sampled continuously inside the integrator stages
        spec: Optional network coupling
        settings: Classical tolerances
        sample_times: Snapshot times; None returns every accepted step

    Returns:
        EvolutionResult of ClassicalState snapshots

    Raises:
        StepFailure: If the integrator fails
    """
    settings = settings or get_settings()
    n = z0.n_modes
    t_eval = None if sample_times is None else sample_grid(schedule, sample_times)

    def rhs(t, y):
        x_dot, y_dot = oscillator_models.classical_rhs(kind, params, schedule.pump(t), y[:n], y[n:], spec)
        return np.concatenate([x_dot, y_dot])

    sol = _integrate(
        rhs, (0.0, schedule.t_final), z0.flat(), t_eval, settings,
        rtol=settings.classical_rtol, atol=settings.classical_atol,
    )
    states = [ClassicalState.from_flat(sol.y[:, k]) for k in range(sol.y.shape[1])]
    return EvolutionResult(sample_times=list(sol.t), states=states, diagnostics={"nfev": int(sol.nfev)})


def random_initial_conditions(rng: np.random.Generator, members: int, n_modes: int, half_width: float = 0.1) -> Tuple[np.ndarray, np.ndarray]:
    """Uniform initial amplitudes in (-half_width, half_width) per coordinate"""
    x = rng.uniform(-half_width, half_width, size=(members, n_modes))
    y = rng.uniform(-half_width, half_width, size=(members, n_modes))
    return x, y


def evolve_classical_ensemble(
    kind: str,
    params: Union[KpoParams, OpoParams],
    x0: np.ndarray,
    y0: np.ndarray,
    schedule: PumpSchedule,
    spec: Optional[NetworkSpec] = None,
    settings: Optional[Settings] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Integrate an ensemble (members x modes) as one vectorised system; returns final (x, y)"""
    settings = settings or get_settings()
    shape = x0.shape
    size = x0.size

    def rhs(t, y):
        xs = y[:size].reshape(shape)
        ys = y[size:].reshape(shape)
        x_dot, y_dot = oscillator_models.classical_rhs(kind, params, schedule.pump(t), xs, ys, spec)
        return np.concatenate([x_dot.ravel(), y_dot.ravel()])

    y_init = np.concatenate([np.asarray(x0, dtype=float).ravel(), np.asarray(y0, dtype=float).ravel()])
    sol = _integrate(
        rhs, (0.0, schedule.t_final), y_init, [schedule.t_final], settings,
        rtol=settings.classical_rtol, atol=settings.classical_atol,
    )
    final = sol.y[:, -1]
    logger.debug("classical ensemble: kind=%s members=%d nfev=%d", kind, shape[0], sol.nfev)
    return final[:size].reshape(shape), final[size:].reshape(shape)


def expectation_series(result: EvolutionResult) -> Tuple[List[str], np.ndarray]:
    """
    Per-mode <a> (re, im), <a^dag a> and total parity at every snapshot

    Returns:
        (column names, rows) with time in the first column
    """
    first = result.states[0]
    dims = first.dims
    annihilators = fock_space.mode_annihilators(dims)
    numbers = [a.dag() @ a for a in annihilators]
    parity = fock_space.tensor_op([fock_space.parity(FockCutoff(n_max=d - 1)) for d in dims], dims)

    columns = ["t"]
    for i in range(len(dims)):
        columns += [f"re_a{i + 1}", f"im_a{i + 1}", f"n{i + 1}"]
    columns.append("parity")

    rows = []
    for t, state in zip(result.sample_times, result.states):
        row = [t]
        for a, n_op in zip(annihilators, numbers):
            mean_a = fock_space.expectation(a, state)
            row += [mean_a.real, mean_a.imag, fock_space.expectation(n_op, state).real]
        row.append(fock_space.expectation(parity, state).real)
        rows.append(row)
    return columns, np.array(rows)
