"""
Experiment orchestration: each figure and report is written as CSV/JSON files plus a run manifest
"""
import logging
import math
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from src import __version__
from src.config import Settings, get_settings
from src.errors import ConfigError, QbmSimError
from src.models.circuit import TransmonSpec
from src.models.experiment import ExperimentConfig, RunManifest
from src.models.fock import FockCutoff
from src.models.gates import PulseEnvelope
from src.models.ising import BenchmarkConfig
from src.models.params import PumpSchedule
from src.models.results import ClassicalState, GridAxis, WignerGrid
from src.services import (
    cat_gates,
    dynamics,
    fock_space,
    ising_bench,
    oscillator_models,
    phase_space,
    serialization,
    transmon_map,
)
from src.services.cache_service import CacheService

logger = logging.getLogger(__name__)

MANIFEST_NAME = "run_manifest.json"
CLASSICAL_SAMPLES = 401


def wigner_header(grid: WignerGrid, **extra) -> Dict:
    """JSON header describing a grid file"""
    return {
        "slice": grid.slice_tag,
        "axis0": grid.axis0.model_dump(),
        "axis1": grid.axis1.model_dump(),
        "min": float(grid.values.min()),
        "max": float(grid.values.max()),
        "integral": grid.integral(),
        "negativity_volume": grid.negativity_volume(),
        "metadata": grid.metadata,
        **extra,
    }


class ExperimentRunner:
    """Runs one experiment tag into its own output directory"""

    def __init__(self, settings: Optional[Settings] = None, cache: Optional[CacheService] = None):
        self.settings = settings or get_settings()
        self.cache = cache or CacheService()
        self._files: List[Path] = []
        self._timings: Dict[str, float] = {}
        self._directory: Optional[Path] = None

    # --- output helpers ---------------------------------------------------------

    def _path(self, name: str) -> Path:
        return self._directory / name

    def _csv(self, name: str, columns, rows) -> Path:
        path = serialization.write_csv(self._path(name), columns, rows)
        self._files.append(path)
        return path

    def _json(self, name: str, payload: Dict) -> Path:
        path = serialization.write_json_atomic(self._path(name), payload)
        self._files.append(path)
        return path

    def _grid(self, stem: str, grid: WignerGrid, **extra) -> Path:
        names = {"single": ("x", "y", "W"), "y1=y2=0": ("x1", "x2", "W"),
                 "x1=x2=0": ("y1", "y2", "W"), "energy": ("x", "y", "E")}[grid.slice_tag]
        path = self._csv(f"{stem}.csv", names, serialization.grid_rows(grid.axis0.values(), grid.axis1.values(), grid.values))
        self._json(f"{stem}.json", wigner_header(grid, file=path.name, **extra))
        return path

    def _timed(self, label: str, step: Callable):
        start = time.perf_counter()
        try:
            return step()
        finally:
            self._timings[label] = time.perf_counter() - start

    # --- fig1 -------------------------------------------------------------------

    def _classical_sweep(self, stem: str, kind: str, params, schedule: PumpSchedule, seed: int) -> None:
        rng = np.random.default_rng(seed)
        x0, y0 = dynamics.random_initial_conditions(rng, 1, 1)
        z0 = ClassicalState(x=x0[0], y=y0[0])
        times = np.linspace(0.0, schedule.t_final, CLASSICAL_SAMPLES)
        result = dynamics.evolve_classical(kind, params, z0, schedule, settings=self.settings, sample_times=times)
        rows = []
        for t, z in zip(result.sample_times, result.states):
            p = schedule.pump(t)
            energy = phase_space.classical_energy(kind, params, p, z)
            rows.append((t, p, z.x[0], z.y[0], energy))
        self._csv(f"{stem}.csv", ("t", "p", "x", "y", "energy"), rows)

    def run_fig1(self, config: ExperimentConfig) -> Dict:
        """
        Single KPO versus single OPO under the same linear pump sweep

        Emits the classical time series (a, f), energy landscapes with fixed points at
        the portrait pumps (b, c, g, h) and Wigner functions at the same pumps (d, e, i, j).
        """
        axis = GridAxis(min=-config.wigner_extent, max=config.wigner_extent, resolution=config.wigner_resolution)
        portrait_axis = GridAxis(min=-config.portrait_extent, max=config.portrait_extent, resolution=config.wigner_resolution)
        pumps = list(config.portrait_pumps)
        summary: Dict = {}

        panels = (("kpo", "abcde"), ("opo", "fghij"))
        for kind, letters in panels:
            model = config.model_spec(kind)
            params = model.kpo_params() if kind == "kpo" else model.opo_params()
            schedule = model.schedule()
            self._timed(f"{kind}_classical", lambda: self._classical_sweep(
                f"fig1{letters[0]}_{kind}_classical", kind, params, schedule, config.seed))

            for letter, p in zip(letters[1:3], pumps):
                grid = phase_space.phase_portrait(kind, params, p, portrait_axis)
                self._grid(f"fig1{letter}_{kind}_portrait_p{p:g}", grid)

            generator = dynamics.TimeDependentGenerator.from_model(model)
            psi0 = fock_space.vacuum(generator.dims)
            sample_times = sorted({schedule.time_at(p) for p in pumps} | {schedule.t_final})
            if kind == "kpo":
                result = self._timed("kpo_quantum", lambda: dynamics.evolve_schrodinger(
                    generator, psi0, schedule, self.settings, sample_times))
            else:
                result = self._timed("opo_quantum", lambda: dynamics.evolve_master(
                    generator, fock_space.ket2dm(psi0), schedule, self.settings, sample_times))

            for letter, p in zip(letters[3:5], pumps):
                index = int(np.argmin(np.abs(np.asarray(result.sample_times) - schedule.time_at(p))))
                state = result.states[index]
                grid = phase_space.wigner_single(state, axis, axis, settings=self.settings)
                fixed = phase_space.classical_fixed_points(kind, params, p)
                self._grid(f"fig1{letter}_{kind}_p{p:g}", grid, p=p, fixed_points=[pt.model_dump() for pt in fixed.points])
                summary[f"{kind}_p{p:g}"] = {"wigner_min": float(grid.values.min()), "wigner_origin": grid.value_at(0.0, 0.0)}

            final = result.final_state
            cutoff = FockCutoff(n_max=final.dims[0] - 1)
            parity = fock_space.expectation(fock_space.parity(cutoff), final).real
            entry = {"final_parity": parity, "diagnostics": result.diagnostics}
            if kind == "kpo":
                alpha = oscillator_models.oscillation_amplitude("kpo", params, schedule.pump(schedule.t_final))
                entry["even_cat_fidelity"] = phase_space.cat_fidelity(final, alpha, 1)
            summary[kind] = entry
        return summary

    # --- fig2 -------------------------------------------------------------------

    def run_fig2(self, config: ExperimentConfig) -> Dict:
        """KPO sweeps with negative detunings; Wigner functions at p = 3"""
        axis = GridAxis(min=-config.wigner_extent, max=config.wigner_extent, resolution=config.wigner_resolution)
        p_show = 3.0
        summary: Dict = {}
        for letter, delta in zip("abcdefgh", config.fig2_deltas):
            model = config.model_spec("kpo", Delta=delta)
            params = model.kpo_params()
            schedule = model.schedule()
            generator = dynamics.TimeDependentGenerator.from_model(model)
            t_show = schedule.time_at(p_show)
            result = self._timed(f"kpo_delta{delta:g}", lambda: dynamics.evolve_schrodinger(
                generator, fock_space.vacuum(generator.dims), schedule, self.settings, [t_show]))
            index = int(np.argmin(np.abs(np.asarray(result.sample_times) - t_show)))
            state = result.states[index]
            grid = phase_space.wigner_single(state, axis, axis, settings=self.settings)
            fixed = phase_space.classical_fixed_points("kpo", params, p_show)
            self._grid(f"fig2{letter}_kpo_delta{delta:g}_p3", grid, p=p_show, Delta=delta,
                       fixed_points=[pt.model_dump() for pt in fixed.points])

            cutoff = FockCutoff(n_max=state.dims[0] - 1)
            alpha = oscillator_models.oscillation_amplitude("kpo", params, p_show)
            summary[f"delta{delta:g}"] = {
                "even_cat_fidelity": phase_space.cat_fidelity(state, alpha, 1),
                "parity": fock_space.expectation(fock_space.parity(cutoff), state).real,
                "wigner_min": float(grid.values.min()),
            }
        return summary

    # --- fig3 -------------------------------------------------------------------

    def run_fig3(self, config: ExperimentConfig) -> Dict:
        """Two coupled KPOs (pure state) and two coupled OPOs (master equation): Wigner slices at t_final"""
        settings = self.settings.model_copy(update={"leakage_tolerance": config.fig3_leakage_tolerance})
        axis = GridAxis(min=-config.wigner_extent, max=config.wigner_extent, resolution=config.slice_resolution)
        cutoff = config.cutoff if config.cutoff is not None else config.two_mode_cutoff
        summary: Dict = {}
        for kind, label, letters in (("qbm", "kpo", "ab"), ("cim", "opo", "cd")):
            model = config.model_spec(kind, cutoff=cutoff)
            if model.n_modes != 2:
                raise ConfigError(f"fig3 needs a two-mode J, got {model.n_modes} modes")
            generator = dynamics.TimeDependentGenerator.from_model(model)
            psi0 = fock_space.vacuum(generator.dims)
            schedule = model.schedule()
            if kind == "qbm":
                result = self._timed("kpo_pair", lambda: dynamics.evolve_schrodinger(
                    generator, psi0, schedule, settings, [schedule.t_final]))
            else:
                result = self._timed("opo_pair", lambda: dynamics.evolve_master(
                    generator, fock_space.ket2dm(psi0), schedule, settings, [schedule.t_final]))
            final = result.final_state
            entry: Dict = {"diagnostics": result.diagnostics}
            for letter, tag, short in ((letters[0], "y1=y2=0", "y0"), (letters[1], "x1=x2=0", "x0")):
                grid = phase_space.wigner_two_mode_slice(final, tag, axis, settings)
                self._grid(f"fig3{letter}_{label}_{short}", grid, t=schedule.t_final)
                entry[short] = {"min": float(grid.values.min()), "max": float(grid.values.max()),
                                "max_abs": float(np.abs(grid.values).max())}
            dims = final.dims
            parity = fock_space.tensor_op([fock_space.parity(FockCutoff(n_max=d - 1)) for d in dims], dims)
            entry["parity_product"] = fock_space.expectation(parity, final).real
            summary[label] = entry
        return summary

    # --- fig4 -------------------------------------------------------------------

    def run_fig4(self, config: ExperimentConfig) -> Dict:
        """Four-model Ising benchmark over seeded random instances"""
        instances = self._timed("instances", lambda: ising_bench.instance_set(config.instances, config.n_spins, config.seed))
        for index, instance in enumerate(instances):
            path = serialization.save_instance(instance, self._path(f"instances/instance_{index:03d}.json"))
            self._files.append(path)

        bench = BenchmarkConfig(
            K=config.K, Delta=config.Delta, kappa=config.kappa, kappa2=config.kappa2, xi0=config.xi0,
            p_end=config.p_end, t_final=config.t_final, cutoff=config.bench_cutoff,
            max_cutoff=config.bench_max_cutoff, leakage_tolerance=config.bench_leakage_tolerance,
            n_traj=config.n_traj, n_classical=config.n_classical, seed=config.seed,
        )
        runner = ising_bench.BenchmarkRunner(self.settings, self.cache)
        records = self._timed("benchmark", lambda: runner.run(config.models, instances, bench))

        for tag in config.models:
            subset = [r for r in records if r.model_tag == tag]
            self._csv(f"fig4_{tag}.csv", ("instance", "success", "residual"),
                      [(r.instance_index, r.success_probability, r.residual_energy) for r in subset])
            success_edges, success_counts = ising_bench.histogram([r.success_probability for r in subset])
            residuals = [r.residual_energy for r in subset]
            upper = max(1.0, math.ceil(max(residuals, default=0.0) * 10.0) / 10.0)
            residual_edges, residual_counts = ising_bench.histogram(residuals, 0.1, upper)
            self._csv(f"fig4_{tag}_success_hist.csv", ("bin_lo", "bin_hi", "count"),
                      [(lo, hi, c) for lo, hi, c in zip(success_edges[:-1], success_edges[1:], success_counts)])
            self._csv(f"fig4_{tag}_residual_hist.csv", ("bin_lo", "bin_hi", "count"),
                      [(lo, hi, c) for lo, hi, c in zip(residual_edges[:-1], residual_edges[1:], residual_counts)])

        edges, _ = ising_bench.histogram([])
        columns = ["bin_lo", "bin_hi"] + list(config.models)
        table = [list(pair) for pair in zip(edges[:-1], edges[1:])]
        for tag in config.models:
            _, counts = ising_bench.histogram([r.success_probability for r in records if r.model_tag == tag])
            for row, count in zip(table, counts):
                row.append(int(count))
        self._csv("fig4_success_histograms.csv", columns, table)
        summary: Dict = ising_bench.summarize(records)
        ordering = ising_bench.ordering_checks(summary)
        if ordering:
            failed = [name for name, held in ordering.items() if not held]
            logger.info("fig4 ordering: %d of %d relations hold", len(ordering) - len(failed), len(ordering))
            if failed:
                logger.warning("fig4 ordering violated: %s", ", ".join(failed))
            summary["ordering"] = ordering
        return summary

    # --- circuit ----------------------------------------------------------------

    def _transmon(self, config: ExperimentConfig):
        if config.circuit_preset == "typical":
            return transmon_map.typical_transmon(config.phi_dc, config.delta_p)
        if config.circuit_preset == "scaled":
            return transmon_map.scaled_transmon(config.phi_dc, config.delta_p)
        for key in ("E_C", "E_J"):
            if getattr(config, key) is None:
                raise ConfigError(f"circuit_preset = custom requires key {key!r}")
        return TransmonSpec(E_C=config.E_C, E_J=config.E_J, unit=config.unit, phi_dc=config.phi_dc, delta_p=config.delta_p)

    def run_circuit(self, config: ExperimentConfig) -> Dict:
        """Transmon-to-KPO parameter report and a dc-flux / modulation-depth sweep table"""
        spec = self._transmon(config)
        report = transmon_map.report_dict(spec, config.circuit_alpha)
        self._json("circuit_report.json", report)
        phis = np.linspace(0.0, 0.45, config.sweep_points)
        deltas = np.array([0.005, 0.01, 0.02, 0.05, 0.1])
        columns, rows = transmon_map.sweep_table(spec, phis, deltas)
        self._csv("circuit_sweep.csv", columns, rows)
        return {"photon_bound": report["validity"]["photon_bound"], "verdict": report["validity"]["verdict"]}

    # --- gates ------------------------------------------------------------------

    def run_gates(self, config: ExperimentConfig) -> Dict:
        """R_Z, U_ZZ and R_X on cat qubits, each checked against its ideal logical gate"""
        model = config.model_spec("kpo")
        kpo = model.kpo_params()
        p = config.gate_pump
        basis = cat_gates.basis_for_kpo(kpo, p)
        alpha = basis.alpha_s
        plus = [1 / math.sqrt(2), 1 / math.sqrt(2)]
        summary: Dict = {"alpha_s": alpha, "logical_overlap": basis.overlap}

        pulse = PulseEnvelope.for_area(config.rz_angle / (4.0 * alpha), config.gate_duration)
        rz = self._timed("rz", lambda: cat_gates.rz_gate(basis, kpo, p, pulse, cat_gates.logical_state(basis, plus), self.settings))
        fidelity = cat_gates.gate_fidelity(rz.final_state, cat_gates.rz_matrix(config.rz_angle), plus, basis)
        self._json("gates_rz.json", rz.report(fidelity, pulse.model_dump()))
        summary["rz"] = {"angle": rz.extracted_angle, "fidelity": fidelity, "leakage": rz.leakage}

        plus2 = [0.5, 0.5, 0.5, 0.5]
        coupling = PulseEnvelope.for_area(config.uzz_angle / (4.0 * alpha ** 2), config.gate_duration)
        uzz = self._timed("uzz", lambda: cat_gates.uzz_gate(
            basis, kpo, p, coupling, cat_gates.logical_state(basis, plus2), self.settings))
        fidelity = cat_gates.gate_fidelity(uzz.final_state, cat_gates.uzz_matrix(config.uzz_angle), plus2, basis)
        self._json("gates_uzz.json", uzz.report(fidelity, coupling.model_dump()))
        summary["uzz"] = {"angle": uzz.extracted_angle, "fidelity": fidelity, "leakage": uzz.leakage}

        calibration = cat_gates.calibrate_rx(kpo, p, 0.0, config.rx_peak, config.rx_ramp, basis.cutoff, self.cache)
        schedule = calibration.schedule_for(config.rx_angle)
        zero = [1.0, 0.0]
        rx = self._timed("rx", lambda: cat_gates.rx_gate(
            basis, kpo, p, schedule, cat_gates.logical_state(basis, zero), self.settings))
        fidelity = cat_gates.gate_fidelity(rx.final_state, cat_gates.rx_matrix(config.rx_angle), zero, basis)
        self._json("gates_rx.json", rx.report(fidelity, {**schedule.model_dump(), "calibration": calibration.model_dump()}))
        summary["rx"] = {"angle": rx.extracted_angle, "fidelity": fidelity, "leakage": rx.leakage}
        return summary

    # --- dispatch ---------------------------------------------------------------

    def run(self, config: ExperimentConfig) -> RunManifest:
        """
        Run one experiment into <output_dir>/<experiment>/ and write its manifest

        The manifest is written whether or not the run succeeds; failures are recorded
        in it and re-raised.
        """
        steps: Dict[str, Callable[[ExperimentConfig], Dict]] = {
            "fig1": self.run_fig1,
            "fig2": self.run_fig2,
            "fig3": self.run_fig3,
            "fig4": self.run_fig4,
            "circuit": self.run_circuit,
            "gates": self.run_gates,
        }
        self._directory = Path(config.output_dir) / config.experiment
        self._directory.mkdir(parents=True, exist_ok=True)
        self._files = []
        self._timings = {}
        manifest = RunManifest(
            experiment=config.experiment,
            config=config.snapshot(),
            version=__version__,
            started_at=datetime.now(timezone.utc).isoformat(),
        )
        logger.info("running %s (preset=%s, seed=%d) into %s", config.experiment, config.preset, config.seed, self._directory)
        start = time.perf_counter()
        error: Optional[BaseException] = None
        try:
            manifest.summary = steps[config.experiment](config)
        except Exception as exc:
            error = exc
            manifest.status = "failed"
            manifest.error = {"type": type(exc).__name__, "message": str(exc)}
            if isinstance(exc, (QbmSimError, ValueError)):
                logger.error("%s failed: %s", config.experiment, exc)
            else:
                logger.exception("%s failed unexpectedly", config.experiment)
        finally:
            manifest.wall_seconds = time.perf_counter() - start
            manifest.finished_at = datetime.now(timezone.utc).isoformat()
            manifest.timings = dict(self._timings)
            manifest.files = {
                str(path.relative_to(self._directory)): serialization.sha256_file(path)
                for path in self._files if path.exists()
            }
            serialization.write_json_atomic(self._directory / MANIFEST_NAME, manifest.model_dump(mode="json"))
        if error is not None:
            raise error
        logger.info("%s finished in %.1f s with %d files", config.experiment, manifest.wall_seconds, len(manifest.files))
        return manifest
