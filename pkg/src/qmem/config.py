"""INI-style run configuration.

Sections and keys (every key optional)::

    [run]        mode, out, formats, workers
    [grid]       n_eps, n_zeta, n_x, x_half_width
    [params]     preset, scenario, C_in, C_out, q, p, detuning_hz, pulse_s,
                 optical_depth, length_m
    [input]      kind (optimal | gaussian), eps_center, eps_width, x_width, spin_wave
    [sweep]      C_in_min, C_in_max, C_in_steps, C_out_min, C_out_max, C_out_steps
    [multimode]  C_m, q, theta_deg, theta_r_deg, length_m, eps_width, x_width, mixing
    [design]     pulse_s, storage_time_s, delta_max_hz, F_min, margin,
                 window_low, window_high, area_m2, length_m, temperature_k
    [preset:NAME]  see qmem.params.preset_from_mapping

``scenario = none`` runs the dimensionless equations with ``C``, ``q`` and
``p`` taken literally and a plain backward read-out.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .grid import GridError, GridSpec
from .params import ParameterError, preset_from_mapping
from .singlemode import Scenario

MODES = ("store", "retrieve", "roundtrip", "sweep", "multimode", "physical", "optimize")
FORMATS = ("json", "csv", "grid")
SCENARIOS = tuple(s.value for s in Scenario) + ("none",)


class ConfigError(ValueError):
    def __init__(self, message: str, lineno: int | None = None, key: str | None = None):
        self.lineno = lineno
        self.key = key
        where = []
        if lineno is not None:
            where.append(f"line {lineno}")
        if key is not None:
            where.append(key)
        super().__init__(f"{': '.join(where)}: {message}" if where else message)


@dataclass(frozen=True)
class InputSettings:
    kind: str = "optimal"
    eps_center: float = 0.5
    eps_width: float = 0.1
    x_width: float = 2.0
    spin_wave: str = ""


@dataclass(frozen=True)
class ModelSettings:
    preset: str = "cs-d2"
    scenario: str = "phasematched"
    C_in: float = 2.0
    C_out: float = 2.0
    q: float = 1.0
    p: float = 0.0
    detuning_hz: float | None = None
    pulse_s: float = 250e-12
    optical_depth: float = 770.0
    length_m: float | None = None


@dataclass(frozen=True)
class SweepSettings:
    C_in_min: float = 0.5
    C_in_max: float = 3.0
    C_in_steps: int = 8
    C_out_min: float = 0.5
    C_out_max: float = 3.0
    C_out_steps: int = 8

    def axis(self, which: str):
        import numpy as np

        lo, hi, n = getattr(self, f"{which}_min"), getattr(self, f"{which}_max"), getattr(self, f"{which}_steps")
        return np.array([lo]) if n == 1 else np.linspace(lo, hi, n)


@dataclass(frozen=True)
class MultimodeSettings:
    C_m: float = 2.0
    q: float = 1.0
    theta_deg: float = 3.0
    theta_r_deg: float = 3.0
    length_m: float = 1e-3
    eps_width: float = 0.12
    x_width: float = 2.0
    mixing: bool = True


@dataclass(frozen=True)
class DesignSettings:
    pulse_s: float = 250e-12
    storage_time_s: float = 100e-9
    delta_max_hz: float = 0.0
    F_min: float = 0.9
    margin: float = 10.0
    window_low: float = 0.2
    window_high: float = 5.0
    area_m2: float | None = None
    length_m: float | None = None
    temperature_k: float | None = None


@dataclass(frozen=True)
class RunConfig:
    mode: str = "roundtrip"
    grid: GridSpec = GridSpec(256, 256, 128, 12.0)
    model: ModelSettings = ModelSettings()
    input: InputSettings = InputSettings()
    sweep: SweepSettings = SweepSettings()
    multimode: MultimodeSettings = MultimodeSettings()
    design: DesignSettings = DesignSettings()
    out: str = ""
    formats: tuple[str, ...] = ("json",)
    workers: int = 0  # 0: all available cores
    presets: tuple[tuple[str, tuple[tuple[str, str], ...]], ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r} (expected one of {', '.join(MODES)})", key="run.mode")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad or not self.formats:
            raise ConfigError(f"formats must be a nonempty subset of {FORMATS}, got {self.formats}", key="run.formats")
        if self.workers < 0:
            raise ConfigError("workers must be >= 0", key="run.workers")
        if self.model.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.model.scenario!r}", key="params.scenario")
        if self.input.kind not in ("optimal", "gaussian"):
            raise ConfigError(f"unknown input kind {self.input.kind!r}", key="input.kind")
        s = self.sweep
        for which in ("C_in", "C_out"):
            lo, hi, n = getattr(s, f"{which}_min"), getattr(s, f"{which}_max"), getattr(s, f"{which}_steps")
            if n < 1:
                raise ConfigError("steps must be >= 1", key=f"sweep.{which}_steps")
            if lo < 0 or hi < lo:
                raise ConfigError(f"empty or negative range [{lo}, {hi}]", key=f"sweep.{which}_min")
        for key in ("C_in", "C_out"):
            if getattr(self.model, key) < 0:
                raise ConfigError("coupling must be >= 0", key=f"params.{key}")

    def preset_table(self):
        return {name: preset_from_mapping(name, dict(items)) for name, items in self.presets}


_SECTIONS = {
    "grid": None,
    "params": ModelSettings,
    "input": InputSettings,
    "sweep": SweepSettings,
    "multimode": MultimodeSettings,
    "design": DesignSettings,
}
_RUN_KEYS = ("mode", "out", "formats", "workers")
_GRID_KEYS = ("n_eps", "n_zeta", "n_x", "x_half_width")


def _convert(raw: str, template, key: str, lineno):
    """Parse ``raw`` to the type of the dataclass default ``template``."""
    try:
        if isinstance(template, bool):
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if isinstance(template, int):
            return int(raw)
        if isinstance(template, float) or template is None:
            if template is None and raw.strip().lower() in ("", "none"):
                return None
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r} as {type(template).__name__ if template is not None else 'float'}",
                          lineno, key) from None


def _line_index(text: str):
    """Map (section, key) -> line number by a light scan of the file."""
    index = {}
    section = None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"\s*([^#;=:\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            index.setdefault((section, m.group(1).strip().lower()), i)
    return index


def parse_config(text: str, strict: bool = True, source: str = "<config>") -> RunConfig:
    cp = configparser.ConfigParser(strict=strict, interpolation=None, empty_lines_in_values=False)
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.DuplicateOptionError as e:
        raise ConfigError(f"duplicate key {e.option!r} in section [{e.section}]", e.lineno,
                          f"{e.section}.{e.option}") from None
    except configparser.DuplicateSectionError as e:
        raise ConfigError(f"duplicate section [{e.section}]", e.lineno) from None
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("content before the first [section] header", e.lineno) from None
    except configparser.ParsingError as e:
        lineno = e.errors[0][0] if e.errors else None
        raise ConfigError("malformed line", lineno) from None

    lines = _line_index(text)
    warnings: list[str] = []

    def unknown(section, key):
        lineno = lines.get((section, key.lower()))
        msg = f"unknown key {key!r}"
        if strict:
            raise ConfigError(msg, lineno, f"{section}.{key}")
        warnings.append(str(ConfigError(msg, lineno, f"{section}.{key}")))

    kwargs = {}
    presets = []
    for section in cp.sections():
        items = cp[section]
        if section.startswith("preset:"):
            name = section.split(":", 1)[1].strip()
            try:
                preset_from_mapping(name, dict(items))
            except ParameterError as e:
                raise ConfigError(str(e), lines.get((section, "")), section) from None
            presets.append((name, tuple(sorted(items.items()))))
        elif section == "run":
            for key, raw in items.items():
                lineno = lines.get((section, key.lower()))
                if key not in _RUN_KEYS:
                    unknown(section, key)
                elif key == "formats":
                    kwargs["formats"] = tuple(f.strip() for f in raw.split(",") if f.strip())
                elif key == "workers":
                    kwargs["workers"] = _convert(raw, 0, "run.workers", lineno)
                else:
                    kwargs[key] = raw.strip()
        elif section == "grid":
            gkw = {}
            for key, raw in items.items():
                if key not in _GRID_KEYS:
                    unknown(section, key)
                    continue
                template = getattr(RunConfig.grid, key)
                gkw[key] = _convert(raw, template, f"grid.{key}", lines.get((section, key.lower())))
            try:
                kwargs["grid"] = replace(RunConfig.grid, **gkw)
            except GridError as e:
                raise ConfigError(str(e), key="grid") from None
        elif section in _SECTIONS:
            cls = _SECTIONS[section]
            names = {f.name: f.default for f in fields(cls)}
            skw = {}
            for key, raw in items.items():
                if key not in names:
                    unknown(section, key)
                    continue
                skw[key] = _convert(raw, names[key], f"{section}.{key}", lines.get((section, key.lower())))
            kwargs["input" if section == "input" else ("model" if section == "params" else section)] = cls(**skw)
        else:
            msg = f"unknown section [{section}]"
            if strict:
                raise ConfigError(msg, lines.get((section, "")) or _section_line(text, section))
            warnings.append(msg)
    kwargs["presets"] = tuple(sorted(presets))
    kwargs["warnings"] = tuple(warnings)
    return RunConfig(**kwargs)


def _section_line(text: str, section: str):
    for i, line in enumerate(text.splitlines(), 1):
        if line.strip() == f"[{section}]":
            return i
    return None


def load_config(path, strict: bool = True) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    return parse_config(text, strict, str(path))


def serialize(cfg: RunConfig) -> str:
    """INI text that parses back to an equal configuration."""
    out = ["[run]", f"mode = {cfg.mode}", f"formats = {', '.join(cfg.formats)}", f"workers = {cfg.workers}"]
    if cfg.out:
        out.append(f"out = {cfg.out}")
    out += ["", "[grid]"] + [f"{k} = {_fmt(getattr(cfg.grid, k))}" for k in _GRID_KEYS]
    for section, attr in (("params", "model"), ("input", "input"), ("sweep", "sweep"),
                          ("multimode", "multimode"), ("design", "design")):
        obj = getattr(cfg, attr)
        out += ["", f"[{section}]"] + [f"{f.name} = {_fmt(getattr(obj, f.name))}" for f in fields(obj)]
    for name, items in cfg.presets:
        out += ["", f"[preset:{name}]"] + [f"{k} = {v}" for k, v in items]
    return "\n".join(out) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)
