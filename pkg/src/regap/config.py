"""Experiment configuration read from a TOML file.

Precedence, lowest to highest: built-in defaults, the config file, then the
command-line flags ``--seed``, ``--tau`` and ``--output``.  Relative paths in
the file are resolved against the file's own directory; ``model``,
``dataset`` and report outputs default to locations inside ``output_dir``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from regap.detector import AggregationRule
from regap.edits import EditConfig, parse_edit_set
from regap.metrics import MetricKind
from regap.model import LatentPrior, TrainConfig, validate_image_shape


class ConfigError(ValueError):
    pass


@dataclass
class PathsSection:
    output_dir: str = "out"
    model: str = ""
    dataset: str = ""
    train_data: str = ""

    def resolved(self, name: str) -> Path:
        value = getattr(self, name)
        if value:
            return Path(value)
        defaults = {"model": "model.rgae", "dataset": "data"}
        if name not in defaults:
            raise ConfigError(f"paths.{name} is not set")
        return Path(self.output_dir) / defaults[name]


@dataclass
class ModelSection:
    kind: str = "linear"  # linear | mlp
    image: tuple = (16, 16, 1)
    latent_dim: int = 8
    prior: str = "standard-normal"
    prior_lo: float = -1.0
    prior_hi: float = 1.0
    scale: float = 0.03
    offset: float = 0.5
    hidden: tuple = (32,)
    activation: str = "tanh"
    epochs: int = 2000
    learning_rate: float = 1e-3
    latent_weight: float = 0.1
    n_train: int = 512


@dataclass
class AssumptionSection:
    n_samples: int = 256
    a1_tol: float = 1e-3
    a2_tol: float = 1e-8
    a3_tol: float = 1e-8


@dataclass
class DataSection:
    n_real: int = 500
    n_generated: int = 500
    offset: tuple = (0.1, 0.3)  # one value = fixed magnitude, two = uniform range
    noise_floor: float = 0.0
    split: float = 0.3


@dataclass
class EditSection:
    kinds: tuple = ("Add", "Fix", "Sem")
    patch_size: int = 8
    placement: str = "max-error-region"
    sem_step: float = 0.5
    sem_direction: str = "top-singular"
    blend_alpha: float = 0.5


@dataclass
class DetectSection:
    metrics: tuple = ("MSE", "PSNR", "SSIM", "SC", "MS-SSIM")
    aggregation: str = "Max"
    aggregations: tuple = ("Max", "Mean", "Min")
    retention: float = 0.95
    tau: float | None = None


@dataclass
class VerifySection:
    magnitudes: tuple = (0.0, 0.01, 0.05, 0.1)
    trials: int = 100
    allowance: float = 0.0


@dataclass
class SweepSection:
    metric: str = "MSE"
    jpeg_quality: tuple = (90, 70, 50, 30)
    crop_ratio: tuple = (1.0, 0.9, 0.8, 0.7, 0.6, 0.5)
    tau_mode: str = "recalibrate"  # recalibrate | unperturbed | fixed


TAU_MODES = ("recalibrate", "unperturbed", "fixed")


@dataclass
class ExperimentConfig:
    seed: int | None = None
    paths: PathsSection = field(default_factory=PathsSection)
    model: ModelSection = field(default_factory=ModelSection)
    assumptions: AssumptionSection = field(default_factory=AssumptionSection)
    data: DataSection = field(default_factory=DataSection)
    edits: EditSection = field(default_factory=EditSection)
    detect: DetectSection = field(default_factory=DetectSection)
    verify: VerifySection = field(default_factory=VerifySection)
    sweep: SweepSection = field(default_factory=SweepSection)

    # derived views -------------------------------------------------------

    @property
    def image_shape(self) -> tuple[int, int, int]:
        return validate_image_shape(self.model.image)

    def prior(self) -> LatentPrior:
        m = self.model
        return LatentPrior(m.prior, m.latent_dim, m.prior_lo, m.prior_hi)

    def edit_config(self) -> EditConfig:
        e = self.edits
        return EditConfig(e.patch_size, e.placement, e.sem_step, e.sem_direction, e.blend_alpha)

    def edit_set(self):
        return parse_edit_set(self.edits.kinds, self.edit_config())

    def train_config(self) -> TrainConfig:
        m = self.model
        return TrainConfig(
            latent_dim=m.latent_dim,
            hidden=tuple(m.hidden),
            activation=m.activation,
            epochs=m.epochs,
            learning_rate=m.learning_rate,
            latent_weight=m.latent_weight,
            seed=self.require_seed(),
        )

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("a seed is required: set 'seed' in the config file or pass --seed")
        return int(self.seed)

    def validate(self) -> "ExperimentConfig":
        if self.model.kind not in ("linear", "mlp"):
            raise ConfigError(f"model.kind must be 'linear' or 'mlp', got {self.model.kind!r}")
        _ = self.image_shape
        try:
            self.prior()
            self.edit_set()
            for k in self.detect.metrics:
                MetricKind(k)
            MetricKind(self.sweep.metric)
            AggregationRule(self.detect.aggregation)
            for a in self.detect.aggregations:
                AggregationRule(a)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not self.detect.metrics:
            raise ConfigError("detect.metrics must not be empty")
        if len(self.data.offset) not in (1, 2):
            raise ConfigError("data.offset takes one value (fixed) or two (uniform range)")
        if self.sweep.tau_mode not in TAU_MODES:
            raise ConfigError(f"sweep.tau_mode must be one of {TAU_MODES}")
        if self.sweep.tau_mode == "fixed" and self.detect.tau is None:
            raise ConfigError("sweep.tau_mode = 'fixed' needs detect.tau or --tau")
        return self

    def offset_distribution(self) -> tuple:
        o = self.data.offset
        return ("fixed", float(o[0])) if len(o) == 1 else ("uniform", float(o[0]), float(o[1]))


_SECTION_TYPES = {
    "paths": PathsSection,
    "model": ModelSection,
    "assumptions": AssumptionSection,
    "data": DataSection,
    "edits": EditSection,
    "detect": DetectSection,
    "verify": VerifySection,
    "sweep": SweepSection,
}


def _build_section(name: str, raw: dict):
    cls = _SECTION_TYPES[name]
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"unknown key [{name}].{key}")
        kwargs[key] = tuple(value) if isinstance(value, list) else value
    return cls(**kwargs)


def config_from_dict(raw: dict, base_dir: Path | None = None) -> ExperimentConfig:
    raw = dict(raw)
    seed = raw.pop("seed", None)
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or seed < 0):
        raise ConfigError("seed must be a non-negative integer")
    sections = {}
    for key, value in raw.items():
        if key not in _SECTION_TYPES:
            raise ConfigError(f"unknown config section or key {key!r}")
        if not isinstance(value, dict):
            raise ConfigError(f"[{key}] must be a table")
        sections[key] = _build_section(key, value)
    cfg = ExperimentConfig(seed=seed, **sections)
    if base_dir is not None:
        p = cfg.paths
        for name in ("output_dir", "model", "dataset", "train_data"):
            value = getattr(p, name)
            if value and not Path(value).is_absolute():
                setattr(p, name, str(base_dir / value))
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(raw, path.parent)


def apply_overrides(cfg: ExperimentConfig, seed=None, tau=None, output=None) -> ExperimentConfig:
    if seed is not None:
        cfg.seed = int(seed)
    if tau is not None:
        cfg.detect.tau = float(tau)
    if output is not None:
        cfg.paths.output_dir = str(output)
    return cfg

