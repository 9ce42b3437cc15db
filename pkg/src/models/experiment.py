"""
Experiment configuration (flat key = value files with desk/paper presets) and run manifests
"""
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.errors import ConfigError
from src.models.params import ModelKind, ModelSpec

ExperimentTag = Literal["fig1", "fig2", "fig3", "fig4", "circuit", "gates"]
EXPERIMENTS = ("fig1", "fig2", "fig3", "fig4", "circuit", "gates")
PresetName = Literal["desk", "paper"]

MODEL_KEYS = ("kind", "K", "Delta", "kappa", "kappa2", "xi0", "J", "p_start", "p_end", "t_final", "cutoff")

PRESETS: Dict[str, Dict[str, Any]] = {
    "desk": {
        "wigner_resolution": 61,
        "slice_resolution": 61,
        "two_mode_cutoff": 14,
        "instances": 50,
        "n_traj": 20,
        "n_classical": 1000,
        "bench_cutoff": 9,
        "bench_max_cutoff": 13,
        "bench_leakage_tolerance": 5e-2,
        "sweep_points": 11,
        "fig3_leakage_tolerance": 1e-2,
    },
    "paper": {
        "wigner_resolution": 101,
        "slice_resolution": 101,
        "two_mode_cutoff": 19,
        "instances": 100,
        "n_traj": 100,
        "n_classical": 1000,
        "bench_cutoff": 9,
        "bench_max_cutoff": 15,
        "bench_leakage_tolerance": 5e-2,
        "sweep_points": 41,
        "fig3_leakage_tolerance": 1e-3,
    },
}

# Per-experiment parameter values that differ from the shared defaults
EXPERIMENT_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "fig1": {},
    "fig2": {},
    "fig3": {"xi0": 0.5, "J": [[0.0, 1.0], [1.0, 0.0]]},
    "fig4": {"xi0": 0.25},
    "circuit": {},
    "gates": {"Delta": 0.0},
}


def _split_numbers(value: Any) -> Any:
    if isinstance(value, str):
        parts = value.replace(";", ",").replace(",", " ").split()
        return [float(p) for p in parts]
    return value


class ExperimentConfig(BaseModel):
    """
    All tunables of one CLI run

    The model block (kind, K, Delta, kappa, kappa2, xi0, J, p_start, p_end, t_final,
    cutoff) carries the oscillator parameters shared by the experiment's models. A file
    that sets `kind` declares a complete block and must list every key that kind needs.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment: ExperimentTag
    preset: PresetName = "desk"
    seed: int = Field(default=20180101, ge=0)
    output_dir: str = "results"

    # model block
    kind: Optional[ModelKind] = None
    K: float = 1.0
    Delta: float = 1.0
    kappa: float = Field(default=1.0, ge=0)
    kappa2: float = Field(default=1.0, gt=0)
    xi0: float = Field(default=0.25, ge=0)
    J: Optional[List[List[float]]] = None
    p_start: float = 0.0
    p_end: float = 4.0
    t_final: float = Field(default=100.0, gt=0)
    cutoff: Optional[int] = Field(default=None, ge=1)

    # fig1 / fig2
    portrait_pumps: List[float] = Field(default_factory=lambda: [1.0, 3.0])
    fig2_deltas: List[float] = Field(default_factory=lambda: [-1.0, -0.2])
    wigner_resolution: int = Field(default=101, ge=3)
    wigner_extent: float = Field(default=4.5, gt=0)
    portrait_extent: float = Field(default=2.5, gt=0)

    # fig3
    two_mode_cutoff: int = Field(default=19, ge=1)
    slice_resolution: int = Field(default=101, ge=3)
    fig3_leakage_tolerance: float = Field(default=1e-3, gt=0, lt=1)

    # fig4
    instances: int = Field(default=100, ge=1)
    n_spins: int = Field(default=4, ge=2)
    n_traj: int = Field(default=100, ge=1)
    n_classical: int = Field(default=1000, ge=1)
    bench_cutoff: int = Field(default=9, ge=1)
    bench_max_cutoff: int = Field(default=15, ge=1)
    bench_leakage_tolerance: Optional[float] = Field(default=None, gt=0, lt=1)
    models: List[str] = Field(default_factory=lambda: ["qQbM", "cQbM", "qCIM", "cCIM", "qCIM-nojump"])

    # circuit
    circuit_preset: Literal["typical", "scaled", "custom"] = "typical"
    E_C: Optional[float] = Field(default=None, gt=0)
    E_J: Optional[float] = Field(default=None, gt=0)
    unit: str = "GHz"
    phi_dc: float = 0.25
    delta_p: float = Field(default=0.01, ge=0)
    circuit_alpha: float = Field(default=1.0, gt=0)
    sweep_points: int = Field(default=41, ge=2)

    # gates
    gate_pump: float = Field(default=2.0, gt=0)
    gate_duration: float = Field(default=20.0, gt=0)
    rz_angle: float = math.pi
    uzz_angle: float = math.pi / 4
    rx_angle: float = math.pi / 2
    rx_peak: float = 3.0
    rx_ramp: float = Field(default=10.0, gt=0)

    @field_validator("portrait_pumps", "fig2_deltas", mode="before")
    @classmethod
    def _parse_list(cls, value: Any) -> Any:
        return _split_numbers(value)

    @field_validator("models", mode="before")
    @classmethod
    def _parse_models(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [v.strip() for v in value.split(",") if v.strip()]
        return value

    @field_validator("J", mode="before")
    @classmethod
    def _parse_couplings(cls, value: Any) -> Any:
        values = _split_numbers(value)
        if values is None or (values and isinstance(values[0], (list, tuple))):
            return values
        n = math.isqrt(len(values))
        if n * n != len(values):
            raise ValueError(f"J needs a square number of row-major entries, got {len(values)}")
        return [values[i * n:(i + 1) * n] for i in range(n)]

    def model_spec(self, kind: ModelKind, **overrides: Any) -> ModelSpec:
        """ModelSpec of the given kind from the model block"""
        values = {key: getattr(self, key) for key in MODEL_KEYS if key != "kind"}
        values.update(overrides)
        needed = set(ModelSpec.REQUIRED_KEYS[kind]) | {"p_start", "p_end", "t_final", "cutoff"}
        return ModelSpec(kind=kind, **{k: v for k, v in values.items() if k in needed})

    def snapshot(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def parse_key_values(text: str) -> Dict[str, str]:
    """
    Parse `key = value` lines; blank lines and `#` comments are skipped

    Raises:
        ConfigError: On a line without `=` or a repeated key
    """
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {number}: empty key")
        if key in values:
            raise ConfigError(f"line {number}: key {key!r} given twice")
        values[key] = value
    return values


def build_config(
    experiment: str,
    file_values: Optional[Dict[str, Any]] = None,
    preset: str = "desk",
    overrides: Optional[Dict[str, Any]] = None,
    defaults: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """
    Merge settings defaults, preset, experiment defaults, file values and command-line overrides (later wins)

    Raises:
        ConfigError: On unknown experiments or presets, unknown keys, invalid values, or
            a model block whose kind is missing one of its required keys
    """
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose one of {', '.join(EXPERIMENTS)}")
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose desk or paper")
    file_values = dict(file_values or {})
    kind = file_values.get("kind")
    if kind is not None:
        if kind not in ModelSpec.REQUIRED_KEYS:
            raise ConfigError(f"unknown model kind {kind!r}")
        missing = [key for key in ModelSpec.REQUIRED_KEYS[kind] if key not in file_values]
        if missing:
            raise ConfigError(f"model kind {kind!r} is missing required key(s): {', '.join(missing)}")

    values: Dict[str, Any] = {**(defaults or {}), **PRESETS[preset], **EXPERIMENT_DEFAULTS[experiment], **file_values}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    values.update(experiment=experiment, preset=preset)
    try:
        return ExperimentConfig(**values)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in error['loc']) or 'config'}: {error['msg']}" for error in exc.errors()
        )
        raise ConfigError(f"invalid configuration: {problems}") from exc


def load_config(
    experiment: str,
    path: Optional[Union[str, Path]] = None,
    preset: str = "desk",
    overrides: Optional[Dict[str, Any]] = None,
    defaults: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """Read a key = value file (optional) and build the run configuration"""
    file_values: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        file_values = parse_key_values(path.read_text())
    return build_config(experiment, file_values, preset, overrides, defaults)


class RunManifest(BaseModel):
    """Record of one run: configuration, code version, outputs with checksums, timings, outcome"""

    experiment: str
    config: Dict[str, Any]
    version: str
    started_at: str
    finished_at: Optional[str] = None
    wall_seconds: Optional[float] = None
    timings: Dict[str, float] = Field(default_factory=dict)
    files: Dict[str, str] = Field(default_factory=dict, description="relative path -> sha256")
    status: Literal["ok", "failed"] = "ok"
    error: Optional[Dict[str, str]] = None
    summary: Dict[str, Any] = Field(default_factory=dict)
