"""Run configuration: flat ``key = value`` files plus command-line overrides."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .correlations import DEFAULT_RTOL, Mode
from .errors import ConfigError, GridError, ParameterError
from .params import DEFAULT_THRESHOLD, SystemParams
from .susceptibility import GridSpec

PARAM_KEYS = tuple(f.name for f in dataclasses.fields(SystemParams))
GRID_KEYS = tuple(f.name for f in dataclasses.fields(GridSpec))
_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


@dataclass
class RunConfig:
    params: SystemParams = field(default_factory=lambda: SystemParams(kappa=1.0))
    grid: GridSpec = field(default_factory=GridSpec)
    mode: Mode | None = None
    tau_span_W: float = 5.0
    tau_n_log: int = 400
    rtol: float = DEFAULT_RTOL
    threshold: float = DEFAULT_THRESHOLD
    strict: bool = False
    out: Path = Path("out")
    workers: int = 1
    sweep: list = field(default_factory=list)  # [(name, [values...]), ...]
    max_points: int = 10_000
    fig2_Omega: float = 10.0
    delta_min: float | None = None
    delta_max: float | None = None
    delta_n: int = 801

    def mode_or(self, default: Mode) -> Mode:
        return self.mode if self.mode is not None else default

    def echo(self) -> list:
        """Deterministic ``key = value`` lines that rebuild every numeric input."""
        lines = []
        for key in PARAM_KEYS:
            value = getattr(self.params, key)
            if value is not None:
                lines.append(f"{key} = {value!r}")
        for key in GRID_KEYS:
            value = getattr(self.grid, key)
            if value is not None:
                lines.append(f"grid.{key} = {value!r}")
        if self.mode is not None:
            lines.append(f"mode = {self.mode.value}")
        lines += [
            f"tau.span_W = {self.tau_span_W!r}",
            f"tau.n_log = {self.tau_n_log!r}",
            f"rtol = {self.rtol!r}",
            f"threshold = {self.threshold!r}",
            f"strict = {str(self.strict).lower()}",
            f"max_points = {self.max_points!r}",
            f"fig2.Omega = {self.fig2_Omega!r}",
            f"delta.n = {self.delta_n!r}",
        ]
        if self.delta_min is not None:
            lines.append(f"delta.min = {self.delta_min!r}")
        if self.delta_max is not None:
            lines.append(f"delta.max = {self.delta_max!r}")
        for name, values in self.sweep:
            lines.append(f"sweep.{name} = " + ", ".join(repr(v) for v in values))
        return lines


def parse_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment. Later keys win."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value
    return out


def load_file(path) -> dict:
    try:
        return parse_text(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _float(key, value) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def _int(key, value) -> int:
    number = _float(key, value)
    if number != int(number):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    return int(number)


def _values(key, value) -> list:
    items = [v.strip() for v in str(value).split(",") if v.strip()]
    if not items:
        raise ConfigError(f"{key}: empty value list")
    return [_float(key, v) for v in items]


def merge(base: dict, overrides: dict) -> dict:
    """Overlay ``overrides``; a pump key in the overlay replaces the base pump."""
    merged = dict(base)
    if "kappa" in overrides:
        merged.pop("V0", None)
    if "V0" in overrides:
        merged.pop("kappa", None)
    merged.update(overrides)
    return merged


def build(mapping: dict) -> RunConfig:
    """Validate a flat mapping into a :class:`RunConfig`."""
    mapping = dict(mapping)
    cfg = RunConfig()
    param_values = {}
    grid_values = {}
    sweep = []
    for key, value in mapping.items():
        if key in PARAM_KEYS:
            param_values[key] = _float(key, value)
        elif key.startswith("grid."):
            name = key[5:]
            if name not in GRID_KEYS:
                raise ConfigError(f"unknown grid key {key!r}")
            grid_values[name] = _float(key, value)
        elif key.startswith("sweep."):
            name = key[6:]
            if name not in PARAM_KEYS:
                raise ConfigError(f"sweep axis {name!r} is not a parameter; choose from {PARAM_KEYS}")
            sweep.append((name, _values(key, value)))
        elif key == "mode":
            try:
                cfg.mode = Mode.parse(value)
            except ValueError:
                raise ConfigError(f"unknown mode {value!r}") from None
        elif key == "tau.span_W":
            cfg.tau_span_W = _float(key, value)
        elif key == "tau.n_log":
            cfg.tau_n_log = _int(key, value)
        elif key == "rtol":
            cfg.rtol = _float(key, value)
        elif key == "threshold":
            cfg.threshold = _float(key, value)
        elif key == "strict":
            flag = str(value).strip().lower()
            if flag not in _BOOL:
                raise ConfigError(f"strict: expected a boolean, got {value!r}")
            cfg.strict = _BOOL[flag]
        elif key == "out":
            cfg.out = Path(value)
        elif key == "workers":
            cfg.workers = _int(key, value)
        elif key == "max_points":
            cfg.max_points = _int(key, value)
        elif key == "fig2.Omega":
            cfg.fig2_Omega = _float(key, value)
        elif key == "delta.min":
            cfg.delta_min = _float(key, value)
        elif key == "delta.max":
            cfg.delta_max = _float(key, value)
        elif key == "delta.n":
            cfg.delta_n = _int(key, value)
        else:
            raise ConfigError(f"unknown configuration key {key!r}")

    if "V0" in param_values and "kappa" in param_values:
        raise ConfigError("supply exactly one of V0 or kappa")
    if "V0" not in param_values and "kappa" not in param_values:
        param_values["kappa"] = 1.0
    try:
        cfg.params = SystemParams(**param_values)
        cfg.grid = GridSpec(**grid_values)
    except (ParameterError, GridError) as exc:
        raise ConfigError(str(exc)) from exc
    cfg.sweep = sweep
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.tau_span_W <= 0 or cfg.tau_n_log < 2:
        raise ConfigError("tau.span_W must be > 0 and tau.n_log >= 2")
    if not 0 < cfg.rtol < 1:
        raise ConfigError("rtol must lie in (0, 1)")
    if cfg.delta_n < 2:
        raise ConfigError("delta.n must be >= 2")
    return cfg


def read_echo(path) -> dict:
    """Recover the parameter echo embedded in an emitted CSV or JSON file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        import json

        return {k: str(v) for k, v in json.loads(text)["echo"].items()}
    lines = []
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        if line.startswith("# ") and "=" in line:
            lines.append(line[2:])
    return parse_text("\n".join(lines))
