"""JSON run configuration for the batch commands."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .keyrate import TogglingScheme
from .response import AmplitudeSet, ModelParams
from .signal import DetectionSettings, GridAxes

DEFAULT_WINDOWS = ((495.0, 505.0), (515.0, 525.0), (535.0, 545.0))

DEFAULT_AXES = {
    "tau": {"start": 0.0, "stop": 10.0, "step": 0.2},
    "T": {"start": 0.0, "stop": 1000.0, "step": 20.0},
    "lambda": {"start": 490.0, "stop": 550.0, "step": 1.0},
}


def axis_values(spec, name):
    """Expand an axis given as a list or as ``{start, stop, step}`` (stop inclusive)."""
    if isinstance(spec, dict):
        try:
            start, stop, step = float(spec["start"]), float(spec["stop"]), float(spec["step"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"axis {name!r} needs numeric start, stop and step") from None
        if step <= 0 or stop < start:
            raise ConfigError(f"axis {name!r}: need step > 0 and stop >= start")
        n = int(round((stop - start) / step)) + 1
        # rounding keeps values like 0.6 exact-looking on disk
        return np.round(start + step * np.arange(n), 10)
    if isinstance(spec, (list, tuple)):
        return np.asarray(spec, dtype=float)
    raise ConfigError(f"axis {name!r} must be a list or a start/stop/step mapping")


@dataclass
class SynthesisConfig:
    params: ModelParams = field(default_factory=ModelParams)
    amplitudes: AmplitudeSet = None
    axes: GridAxes = None
    pathway: str = None
    noise_level: float = 0.0

    def __post_init__(self):
        if self.amplitudes is None:
            self.amplitudes = AmplitudeSet.from_params(self.params)
        if self.axes is None:
            self.axes = GridAxes(*(axis_values(DEFAULT_AXES[k], k) for k in ("tau", "T", "lambda")))
        if self.noise_level < 0:
            raise ConfigError("noise_level must be >= 0")

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        params = ModelParams.from_dict(data.pop("params", {}))
        amps = data.pop("amplitudes", None)
        amps = AmplitudeSet.from_dict(amps, params.t_spin) if amps else AmplitudeSet.from_params(params)
        axes_spec = {**DEFAULT_AXES, **data.pop("axes", {})}
        axes = GridAxes(*(axis_values(axes_spec[k], k) for k in ("tau", "T", "lambda")))
        pathway = data.pop("pathway", None)
        noise = float(data.pop("noise_level", 0.0))
        if data:
            raise ConfigError(f"unknown synthesis keys: {sorted(data)}")
        return cls(params, amps, axes, pathway, noise)


@dataclass
class MapConfig:
    wavelengths_nm: tuple = (500.0, 520.0, 540.0)
    taus_fs: tuple = (0.0, 10.0)
    Xi_range: tuple = (0.0, 3.0)
    Tnorm_range: tuple = (0.0, 3.0)
    grid_density: int = 200

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        try:
            cfg = cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in data.items()})
        except TypeError as exc:
            raise ConfigError(f"bad interference_map block: {exc}") from None
        if isinstance(cfg.grid_density, list):
            cfg.grid_density = tuple(cfg.grid_density)
        return cfg


@dataclass
class RunConfig:
    """Everything a batch command needs; see README for the JSON schema."""

    dataset: Path = None
    synthesis: SynthesisConfig = None
    windows: tuple = DEFAULT_WINDOWS
    tau0: float = 0.0
    detection: DetectionSettings = field(default_factory=DetectionSettings)
    scheme: TogglingScheme = field(default_factory=TogglingScheme)
    interference_map: MapConfig = field(default_factory=MapConfig)
    output_dir: Path = Path("out")
    output_format: str = "csv"
    seed: int = 0
    dark_floor: float = 1e-12

    def __post_init__(self):
        if self.dataset is not None and self.synthesis is not None:
            raise ConfigError("give either 'dataset' or 'synthesis', not both")
        wins = tuple((float(lo), float(hi)) for lo, hi in self.windows)
        for lo, hi in wins:
            if lo > hi:
                raise ConfigError(f"window ({lo}, {hi}) has lo > hi")
        for (_, hi0), (lo1, _) in zip(wins[:-1], wins[1:]):
            if lo1 <= hi0:
                raise ConfigError("windows must be sorted and non-overlapping")
        self.windows = wins
        if self.output_format not in ("csv", "svg"):
            raise ConfigError("output format must be 'csv' or 'svg'")

    def require_data(self):
        if self.dataset is None and self.synthesis is None:
            raise ConfigError("config needs a 'dataset' path or a 'synthesis' block")

    @classmethod
    def from_dict(cls, data, base_dir=None):
        data = dict(data)
        base_dir = Path(base_dir or ".")
        kwargs = {}
        if "dataset" in data:
            ds = Path(data.pop("dataset"))
            kwargs["dataset"] = ds if ds.is_absolute() else base_dir / ds
        if "synthesis" in data:
            kwargs["synthesis"] = SynthesisConfig.from_dict(data.pop("synthesis"))
        if "windows" in data:
            kwargs["windows"] = data.pop("windows")
        if "tau0" in data:
            kwargs["tau0"] = float(data.pop("tau0"))
        if "detection" in data:
            kwargs["detection"] = DetectionSettings(float(data.pop("detection").get("theta_qwp", 0.0)))
        scheme = dict(data.pop("scheme", {}))
        if "detection" in kwargs:
            # the detection block sets the wave plate unless the scheme overrides it
            scheme.setdefault("theta_qwp", kwargs["detection"].theta_qwp)
        if scheme:
            kwargs["scheme"] = TogglingScheme.from_dict(scheme)
        if "interference_map" in data:
            kwargs["interference_map"] = MapConfig.from_dict(data.pop("interference_map"))
        if "output" in data:
            out = dict(data.pop("output"))
            if "directory" in out:
                d = Path(out.pop("directory"))
                kwargs["output_dir"] = d if d.is_absolute() else base_dir / d
            if "format" in out:
                kwargs["output_format"] = out.pop("format")
            if out:
                raise ConfigError(f"unknown output keys: {sorted(out)}")
        if "seed" in data:
            kwargs["seed"] = int(data.pop("seed"))
        if "dark_floor" in data:
            kwargs["dark_floor"] = float(data.pop("dark_floor"))
        if data:
            raise ConfigError(f"unknown config keys: {sorted(data)}")
        return cls(**kwargs)


def load_config(path):
    """Read a JSON config; relative paths inside resolve against its directory."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return RunConfig.from_dict(data, base_dir=path.parent)
