"""Experiment configuration: INI text <-> validated dataclasses."""
from __future__ import annotations

import configparser
import dataclasses
import logging
import re
from dataclasses import dataclass, field

from .budget import BudgetInput
from .detector import DetectorConfig, SourceState
from .physics import BeamGeometry
from .sources import GateEnvelope, LaserNoiseModel

log = logging.getLogger(__name__)

# Aggregate 2.68e3 detected photons/ns, split evenly between the two lasers.
DEFAULT_PHOTON_RATE_PER_NS = 1340.0 / (1e-3 * 0.1037)
# ~14 MHz per laser keeps the beat inside +-60 MHz at three sigma
DEFAULT_DRIFT_HZ_PER_S = 1.4e7
MAX_SEED = 2 ** 64 - 1


class ConfigError(ValueError):
    def __init__(self, message, line=None, path=None):
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
        if line is not None:
            prefix += f"line {line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)
        self.message = message
        self.line = line


@dataclass(frozen=True)
class AnalysisSettings:
    margin_ns: float = 15.0
    phase_diffusion_hz: float = 5e3
    z_threshold: float = 5.0

    def __post_init__(self):
        if self.margin_ns < 0 or self.phase_diffusion_hz < 0 or self.z_threshold <= 0:
            raise ValueError("margin and phase diffusion must be non-negative, z_threshold positive")


def _default_source(label: str) -> SourceState:
    noise = LaserNoiseModel(drift_rate_hz_per_s=DEFAULT_DRIFT_HZ_PER_S)
    if label == "A":
        return SourceState("cheb", DEFAULT_PHOTON_RATE_PER_NS, noise,
                           GateEnvelope(delay_ns=202.0, tilt_ns_per_mm=0.5))
    return SourceState("oxeb", DEFAULT_PHOTON_RATE_PER_NS, noise, GateEnvelope(delay_ns=150.0))


@dataclass(frozen=True)
class ExperimentConfig:
    source_a: SourceState = field(default_factory=lambda: _default_source("A"))
    source_b: SourceState = field(default_factory=lambda: _default_source("B"))
    geometry: BeamGeometry = field(default_factory=BeamGeometry)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    analysis: AnalysisSettings = field(default_factory=AnalysisSettings)
    budget: BudgetInput = field(default_factory=BudgetInput)
    mutual_visibility: float = 1.0
    dark_noise: bool = True
    shots: int = 1
    seed: int = 0
    out: str = "out"

    def __post_init__(self):
        if self.shots < 0:
            raise ValueError("shots must be non-negative")
        if not 0 <= self.seed <= MAX_SEED:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if not 0.0 <= self.mutual_visibility <= 1.0:
            raise ValueError("mutual_visibility must lie in [0, 1]")

    @property
    def sources(self) -> tuple[SourceState, SourceState]:
        return self.source_a, self.source_b


_SOURCE_SECTIONS = ("source", "noise", "gate")
_FLAT_SECTIONS = {"geometry": BeamGeometry, "detector": DetectorConfig,
                  "analysis": AnalysisSettings, "budget": BudgetInput}
_EXPERIMENT_KEYS = ("mutual_visibility", "dark_noise", "shots", "seed", "out")


def _key_lines(text: str) -> dict:
    lines, section = {}, None
    for n, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = n
        elif section and s and s[0] not in "#;":
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip().lower()
            lines.setdefault((section, key), n)
    return lines


def _convert(text: str, default, where):
    try:
        if isinstance(default, bool):
            low = text.strip().lower()
            if low not in ("true", "false", "yes", "no", "1", "0", "on", "off"):
                raise ValueError(f"not a boolean: {text!r}")
            return low in ("true", "yes", "1", "on")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return tuple(float(v) for v in text.split(","))
        if default is None:
            return None if text.strip().lower() == "none" else float(text)
        return text.strip()
    except ValueError as exc:
        raise ConfigError(f"bad value for {where}: {exc}") from None


def _build(cls, items: dict, section: str, lines: dict, strict: bool, base=None):
    names = {f.name: f for f in dataclasses.fields(cls)}
    proto = base if base is not None else cls()
    kw = {}
    for key, text in items.items():
        if key not in names or dataclasses.is_dataclass(getattr(proto, key)):
            _unknown(section, key, lines, strict)
            continue
        try:
            kw[key] = _convert(text, getattr(proto, key), f"[{section}] {key}")
        except ConfigError as exc:
            raise ConfigError(exc.message, lines.get((section, key))) from None
    try:
        return dataclasses.replace(proto, **kw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[{section}] {exc}", lines.get((section, None))) from None


def _unknown(section, key, lines, strict):
    msg = f"unknown key '{key}' in [{section}]" if key else f"unknown section [{section}]"
    line = lines.get((section, key))
    if strict:
        raise ConfigError(msg, line)
    log.warning("line %s: %s (ignored)", line, msg)


def parse_config(text: str, *, strict: bool = False, path=None) -> ExperimentConfig:
    """Parse INI text; every missing key takes its default."""
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        cp.read_string(text, source=str(path or "<config>"))
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).splitlines()[0], line, path) from None
    lines = _key_lines(text)
    try:
        return _assemble(cp, lines, strict)
    except ConfigError as exc:
        if path is not None:
            raise ConfigError(exc.message, exc.line, path) from None
        raise


def _assemble(cp, lines, strict) -> ExperimentConfig:
    base = ExperimentConfig()
    kw = {}
    sources = {"A": base.source_a, "B": base.source_b}
    for section in cp.sections():
        items = dict(cp.items(section))
        kind, _, label = section.partition(".")
        if section == "experiment":
            exp = {k: v for k, v in items.items() if k in _EXPERIMENT_KEYS}
            for k in items.keys() - exp.keys():
                _unknown(section, k, lines, strict)
            for k, v in exp.items():
                try:
                    kw[k] = _convert(v, getattr(base, k), f"[experiment] {k}")
                except ConfigError as exc:
                    raise ConfigError(exc.message, lines.get((section, k))) from None
        elif section in _FLAT_SECTIONS:
            attr = section
            kw[attr] = _build(_FLAT_SECTIONS[section], items, section, lines, strict, getattr(base, attr))
        elif kind in _SOURCE_SECTIONS and label in ("A", "B"):
            continue
        else:
            _unknown(section, None, lines, strict)
    # sources: noise and gate first, then the source block itself
    for label in ("A", "B"):
        src = sources[label]
        for kind in ("noise", "gate"):
            name = f"{kind}.{label}"
            if cp.has_section(name):
                sub = _build(type(getattr(src, kind)), dict(cp.items(name)), name, lines, strict, getattr(src, kind))
                src = dataclasses.replace(src, **{kind: sub})
        name = f"source.{label}"
        if cp.has_section(name):
            src = _build(SourceState, dict(cp.items(name)), name, lines, strict, src)
        sources[label] = src
    kw["source_a"], kw["source_b"] = sources["A"], sources["B"]
    try:
        return dataclasses.replace(base, **kw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[experiment] {exc}", lines.get(("experiment", None))) from None


def load_config(path, *, strict: bool = False) -> ExperimentConfig:
    with open(path) as fh:
        text = fh.read()
    return parse_config(text, strict=strict, path=path)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt(float(x)) for x in v)
    if v is None:
        return "none"
    return str(v)


def _section(name: str, obj) -> list[str]:
    out = [f"[{name}]"]
    for f in dataclasses.fields(obj):
        v = getattr(obj, f.name)
        if not dataclasses.is_dataclass(v):
            out.append(f"{f.name} = {_fmt(v)}")
    return out + [""]


def emit_config(cfg: ExperimentConfig) -> str:
    """INI text with every default materialized; ``parse_config`` inverts it."""
    lines = ["[experiment]"] + [f"{k} = {_fmt(getattr(cfg, k))}" for k in _EXPERIMENT_KEYS] + [""]
    for label, src in (("A", cfg.source_a), ("B", cfg.source_b)):
        lines += _section(f"source.{label}", src)
        lines += _section(f"noise.{label}", src.noise)
        lines += _section(f"gate.{label}", src.gate)
    for name in _FLAT_SECTIONS:
        lines += _section(name, getattr(cfg, name))
    return "\n".join(lines)
