"""Typed experiment configuration read from TOML files.

Every section and key is checked against the schema before anything runs;
unknown keys are rejected with the line they appear on.
"""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Any

import tomli
import tomli_w

from .exceptions import ConfigurationError
from .qite import QITE_VARIANTS, TAU_MINUS, TAU_PLUS

EXPERIMENTS = ("schwinger_spectrum", "ssh_spectrum", "tim_otoc", "bracket_selftest")


@dataclass
class SchwingerModel:
    L: int = 6
    m: float = 0.5
    g: float = 0.3
    j0: int = -1  # -1 selects ceil(L/2)
    momenta: list[int] = field(default_factory=list)  # empty selects 0..L/2


@dataclass
class SSHModel:
    L: int = 12
    v: float = 1.0
    delta: float = 0.8
    mu: float = -2.5
    momenta: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4, 5, 6])


@dataclass
class TIMModel:
    L: int = 8
    v_site: int = 0
    w_site: int = -1  # -1 selects L-1


@dataclass
class SelftestModel:
    cases: int = 200
    max_qubits: int = 4
    tolerance: float = 1e-7


@dataclass
class TrotterSettings:
    backend: str = "trotter"
    order: int = 2
    dt: float = 2.0
    t_max: float = 40.0
    grouping: str = "brickwork"


@dataclass
class QiteSettings:
    variant: str = "oracle"
    tau_plus: float = TAU_PLUS
    tau_minus: float = TAU_MINUS
    steps: int = 50
    domain_radius: int = 0


@dataclass
class NoiseSettings:
    p: float = 0.0
    shots: int = 0  # 0 means exact expectation values


@dataclass
class ProcessingSettings:
    window: str = "hamming"
    ca_runs: int = 1
    peak_threshold: float = 0.2


_MODEL_TYPES = {
    "schwinger_spectrum": SchwingerModel,
    "ssh_spectrum": SSHModel,
    "tim_otoc": TIMModel,
    "bracket_selftest": SelftestModel,
}

_DEFAULTS: dict[str, dict[str, dict[str, Any]]] = {
    "schwinger_spectrum": {"trotter": dict(order=2, dt=2.0, t_max=40.0), "qite": {}},
    "ssh_spectrum": {"trotter": dict(order=1, dt=0.4, t_max=23.6), "qite": dict(variant="analytic")},
    "tim_otoc": {"trotter": dict(order=1, dt=0.2, t_max=11.8), "qite": dict(variant="analytic")},
    "bracket_selftest": {"trotter": dict(backend="exact"), "qite": {}},
}

_SECTIONS = {
    "trotter": TrotterSettings,
    "qite": QiteSettings,
    "noise": NoiseSettings,
    "processing": ProcessingSettings,
}


@dataclass
class ExperimentConfig:
    experiment: str
    model: Any
    trotter: TrotterSettings = field(default_factory=TrotterSettings)
    qite: QiteSettings = field(default_factory=QiteSettings)
    noise: NoiseSettings = field(default_factory=NoiseSettings)
    processing: ProcessingSettings = field(default_factory=ProcessingSettings)
    seed: int = 0
    output_dir: str = ""

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"experiment": self.experiment, "seed": self.seed}
        if self.output_dir:
            out["output_dir"] = self.output_dir
        out["model"] = asdict(self.model)
        for name in _SECTIONS:
            out[name] = asdict(getattr(self, name))
        return out

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def digest(self) -> str:
        return hashlib.sha256(self.to_toml().encode()).hexdigest()


# -- parsing -------------------------------------------------------------------

def _line_of(text: str, section: str | None, key: str | None) -> int | None:
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        header = re.match(r"^\[([^\]]+)\]", stripped)
        if header:
            current = header.group(1).strip()
            if key is None and current == section:
                return lineno
            continue
        if key is not None and current == section and re.match(rf"^{re.escape(key)}\s*=", stripped):
            return lineno
    return None


def _fail(text: str, source: str, section: str | None, key: str | None, msg: str):
    line = _line_of(text, section, key) if text else None
    where = f"{source}:{line}" if line else source
    raise ConfigurationError(f"{where}: {msg}")


def _coerce(value, target, text, source, section, key):
    if isinstance(target, bool) or target is bool:
        ok = isinstance(value, bool)
    elif isinstance(target, int) and not isinstance(target, bool):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(target, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    elif isinstance(target, str):
        ok = isinstance(value, str)
    elif isinstance(target, list):
        ok = isinstance(value, list) and all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    else:
        ok = True
    if not ok:
        _fail(text, source, section, key,
              f"'{key}' expects {type(target).__name__}, got {type(value).__name__}")
    return value


def _build(cls, table: dict, overrides: dict, text: str, source: str, section: str):
    if not isinstance(table, dict):
        _fail(text, source, section, None, f"[{section}] must be a table")
    base = cls()
    known = {f.name for f in fields(cls)}
    values = {**{k: getattr(base, k) for k in known}, **overrides}
    for key, value in table.items():
        if key not in known:
            _fail(text, source, section, key,
                  f"unknown key '{key}' in [{section}]; allowed: {', '.join(sorted(known))}")
        values[key] = _coerce(value, getattr(base, key), text, source, section, key)
    return cls(**values)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigurationError(f"{source}: {exc}") from None
    top_keys = {"experiment", "seed", "output_dir", "model", *_SECTIONS}
    for key in data:
        if key not in top_keys:
            if isinstance(data[key], dict):
                _fail(text, source, key, None, f"unknown section [{key}]")
            _fail(text, source, None, key, f"unknown top-level key '{key}'")
    experiment = data.get("experiment")
    if experiment not in EXPERIMENTS:
        _fail(text, source, None, "experiment",
              f"experiment must be one of {', '.join(EXPERIMENTS)}, got {experiment!r}")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        _fail(text, source, None, "seed", "seed must be an integer")
    output_dir = data.get("output_dir", "")
    if not isinstance(output_dir, str):
        _fail(text, source, None, "output_dir", "output_dir must be a string")
    defaults = _DEFAULTS[experiment]
    model = _build(_MODEL_TYPES[experiment], data.get("model", {}), {}, text, source, "model")
    sections = {
        name: _build(cls, data.get(name, {}), defaults.get(name, {}), text, source, name)
        for name, cls in _SECTIONS.items()
    }
    cfg = ExperimentConfig(experiment, model, seed=seed, output_dir=output_dir, **sections)
    validate(cfg, text, source)
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))


def preset_names() -> list[str]:
    root = resources.files("correlator") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def load_preset(name: str) -> ExperimentConfig:
    root = resources.files("correlator") / "presets"
    res = root / f"{name}.toml"
    if not res.is_file():
        raise ConfigurationError(f"no preset named {name!r}; available: {', '.join(preset_names())}")
    return parse_config(res.read_text(), f"preset:{name}")


def resolve_config(ref: str) -> ExperimentConfig:
    """A preset name or a path to a TOML file."""
    if ref in preset_names():
        return load_preset(ref)
    return load_config(ref)


# -- validation ----------------------------------------------------------------

def validate(cfg: ExperimentConfig, text: str = "", source: str = "<config>") -> None:
    def check(cond, section, key, msg):
        if not cond:
            _fail(text, source, section, key, msg)

    tr, q, nz, pr = cfg.trotter, cfg.qite, cfg.noise, cfg.processing
    check(tr.backend in ("trotter", "exact"), "trotter", "backend", "backend must be 'trotter' or 'exact'")
    check(tr.order in (1, 2), "trotter", "order", "Trotter order must be 1 or 2")
    check(tr.dt > 0, "trotter", "dt", "dt must be positive")
    check(tr.t_max > 0, "trotter", "t_max", "t_max must be positive")
    steps = tr.t_max / tr.dt
    check(abs(steps - round(steps)) < 1e-9 * max(1.0, steps), "trotter", "t_max",
          "t_max must be an integer multiple of dt")
    check(tr.grouping in ("brickwork", "canonical"), "trotter", "grouping",
          "grouping must be 'brickwork' or 'canonical'")
    check(q.variant in QITE_VARIANTS, "qite", "variant", f"variant must be one of {', '.join(QITE_VARIANTS)}")
    check(abs(math.sinh(2 * q.tau_plus)) > 1e-12, "qite", "tau_plus", "sinh(2 tau_plus) must be nonzero")
    check(abs(math.sin(2 * q.tau_minus)) > 1e-12, "qite", "tau_minus", "sin(2 tau_minus) must be nonzero")
    check(q.steps >= 1, "qite", "steps", "steps must be positive")
    check(q.domain_radius >= 0, "qite", "domain_radius", "domain_radius must be non-negative")
    check(0 <= nz.p < 1, "noise", "p", "p must lie in [0, 1)")
    check(nz.shots >= 0, "noise", "shots", "shots must be non-negative (0 for exact)")
    check(pr.window in ("hamming", "rectangular"), "processing", "window",
          "window must be 'hamming' or 'rectangular'")
    check(pr.ca_runs in (1, 2), "processing", "ca_runs", "ca_runs must be 1 or 2")
    check(0 < pr.peak_threshold < 1, "processing", "peak_threshold", "peak_threshold must lie in (0, 1)")

    m = cfg.model
    if cfg.experiment == "schwinger_spectrum":
        check(m.L >= 2 and m.L % 2 == 0, "model", "L", "Schwinger L must be even and at least 2")
        check(m.j0 == -1 or 0 <= m.j0 < m.L, "model", "j0", "j0 must be -1 or a site index")
        check(all(abs(n) <= m.L / 2 for n in m.momenta), "model", "momenta", "momenta must lie in [-L/2, L/2]")
    elif cfg.experiment == "ssh_spectrum":
        check(m.L >= 2, "model", "L", "SSH L must be at least 2")
        check(len(m.momenta) > 0 and all(abs(n) <= m.L / 2 for n in m.momenta), "model", "momenta",
              "momenta must be a non-empty list within [-L/2, L/2]")
    elif cfg.experiment == "tim_otoc":
        check(m.L >= 2, "model", "L", "Ising L must be at least 2")
        check(0 <= m.v_site < m.L, "model", "v_site", "v_site out of range")
        check(m.w_site == -1 or 0 <= m.w_site < m.L, "model", "w_site", "w_site out of range")
    else:
        check(m.cases >= 1, "model", "cases", "cases must be positive")
        check(1 <= m.max_qubits <= 6, "model", "max_qubits", "max_qubits must lie in [1, 6]")
        check(m.tolerance > 0, "model", "tolerance", "tolerance must be positive")


__all__ = [
    "ExperimentConfig", "SchwingerModel", "SSHModel", "TIMModel", "SelftestModel",
    "TrotterSettings", "QiteSettings", "NoiseSettings", "ProcessingSettings",
    "parse_config", "load_config", "load_preset", "preset_names", "resolve_config", "validate",
    "EXPERIMENTS",
]
