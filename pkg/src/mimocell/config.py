"""Flat ``section.key = value`` experiment configuration.

A config file holds one assignment per line; ``#`` starts a comment. The
same keys can be overridden on the command line with ``--set key=value``.
Every key is validated against :data:`KEYS`, and errors name the offending
key.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, MimocellError
from .params import SystemParams, parse_snr
from .simulate import SimConfig

__all__ = ["KEYS", "ExperimentConfig", "parse_config_text", "load_config", "parse_values"]


def _float(text) -> float:
    return float(text)


def _int(text) -> int:
    val = float(text)
    if not val.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(val)


def _opt_float(text):
    return None if str(text).strip().lower() in ("", "none", "auto") else float(text)


def _bool(text) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _choice(*options):
    def parse(text):
        t = str(text).strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {t!r}")
        return t
    return parse


_FUNC_RE = re.compile(r"^\s*(logspace|linspace|range)\s*\(([^)]*)\)\s*$")


def parse_values(text) -> list:
    """Number list: ``"1, 2, 4"``, ``"logspace(-3, 2, 21)"``, ``"linspace(a, b, n)"``
    or ``"range(1, 11)"`` (end exclusive)."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    match = _FUNC_RE.match(str(text))
    if match:
        name, args = match.group(1), [float(a) for a in match.group(2).split(",")]
        if name == "logspace":
            start, stop, n = args
            vals = np.logspace(start, stop, int(n))
        elif name == "linspace":
            start, stop, n = args
            vals = np.linspace(start, stop, int(n))
        else:
            vals = np.arange(*args)
        return [float(v) for v in vals]
    parts = [s for s in str(text).replace(";", ",").split(",") if s.strip()]
    return [parse_snr(s) if "db" in s.lower() else float(s) for s in parts]


def _values(text):
    vals = parse_values(text)
    if not vals:
        raise ValueError("empty list")
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise ValueError("list must be sorted ascending")
    return vals


def _snr(text):
    val = parse_snr(text)
    if math.isnan(val) or val <= 0:
        raise ValueError(f"snr must be > 0, got {text!r}")
    return val


def _opt_snr(text):
    return None if str(text).strip().lower() in ("", "none", "auto") else _snr(text)


SWEEPABLE = ("system.m_antennas", "system.lambda_b", "system.lambda_u", "system.mu",
             "system.snr")

# key -> (default, parser)
KEYS: dict[str, tuple[object, Callable]] = {
    "system.m_antennas": (64, _int),
    "system.lambda_b": (1.0, _float),
    "system.lambda_u": (1.0, _float),
    "system.mu": (3.7, _float),
    "system.snr": (math.inf, _snr),
    "sim.trials": (None, _int),
    "sim.seed": (0, _int),
    "sim.window_multiplier": (40.0, _float),
    "sim.exact_multiplier": (8.0, _float),
    "sim.arch": ("mmimo", _choice("mmimo", "smallcell")),
    "sim.fidelity": ("finite-M", _choice("finite-M", "large-system", "large-system-unfaded",
                                         "asymptotic-snr")),
    "sim.activity": ("thinned", _choice("thinned", "exact-occupancy")),
    "sim.snr": (None, _opt_snr),
    "sim.eps": (None, _opt_float),
    "sim.workers": (1, _int),
    "sweep.param": (None, _choice(*SWEEPABLE)),
    "sweep.values": (None, _values),
    "grid.q_min": (0.01, _float),
    "grid.q_max": (1000.0, _float),
    "grid.q_points": (200, _int),
    "grid.q_relative": (True, _bool),
    "grid.s": ([0.1, 1.0, 10.0], _values),
    "bounds.smallcell_q_min": (1e-3, _float),
    "bounds.smallcell_q_max": (1e3, _float),
    "bounds.h_convention": ("power", _choice("power", "literal")),
    "bounds.beta_fd": (None, _opt_float),
    "simulate.estimator": ("cdf", _choice("cdf", "inv_sir_mean", "laplace", "user_rates")),
    "simulate.eta": (1.0, _float),
    "compare.etas": ([0.1, 1.0, 10.0], _values),
    "compare.asymptotic_threshold": (0.01, _float),
    "compare.p_t": (1.0, _float),
    "compare.crossover": (True, _bool),
    "compare.crossover_lo": (1e-3, _float),
    "compare.crossover_hi": (1e2, _float),
    "compare.crossover_tol": (None, _opt_float),
    "scene.side": (20.0, _float),
    "scene.lambda_b": (0.05, _float),
    "scene.lambda_u": (0.15, _float),
    "output.dir": ("out", str),
}

# simulate defaults when sim.trials is unset
DEFAULT_TRIALS = {"cdf": 100_000, "laplace": 100_000, "inv_sir_mean": 10_000,
                  "user_rates": 10_000}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Raw ``{key: value-string}`` from config text; later lines win."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'", None)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}", key)
        out[key] = value
    return out


def _coerce(key, raw):
    default, parser = KEYS[key]
    if raw is None:
        return default
    try:
        return parser(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid value for {key}: {exc}", key) from None


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved configuration (dotted key -> typed value)."""

    values: dict

    @classmethod
    def from_raw(cls, raw: dict) -> "ExperimentConfig":
        for key in raw:
            if key not in KEYS:
                raise ConfigError(f"unknown key {key!r}", key)
        values = {key: _coerce(key, raw.get(key)) for key in KEYS}
        if (values["sweep.param"] is None) != (values["sweep.values"] is None):
            raise ConfigError("sweep.param and sweep.values must be given together",
                              "sweep.param" if values["sweep.param"] is None else "sweep.values")
        if values["grid.q_points"] < 1 or values["grid.q_min"] <= 0 \
                or values["grid.q_max"] < values["grid.q_min"]:
            raise ConfigError("q grid must be non-empty with 0 < q_min <= q_max", "grid.q_min")
        if not 0 < values["compare.asymptotic_threshold"] <= 1:
            raise ConfigError("must lie in (0, 1]", "compare.asymptotic_threshold")
        cfg = cls(values)
        cfg.system()  # validate eagerly
        cfg.sim()
        return cfg

    def __getitem__(self, key):
        return self.values[key]

    def system(self, **overrides) -> SystemParams:
        kwargs = {k.split(".", 1)[1]: self.values[k] for k in KEYS if k.startswith("system.")}
        kwargs.update(overrides)
        try:
            return SystemParams(**kwargs)
        except MimocellError as exc:
            raise ConfigError(str(exc), _guess_key(str(exc), "system.")) from None

    def sim(self, trials: Optional[int] = None) -> SimConfig:
        kwargs = {k.split(".", 1)[1]: self.values[k] for k in KEYS if k.startswith("sim.")}
        if trials is not None and kwargs["trials"] is None:
            kwargs["trials"] = trials
        if kwargs["trials"] is None:
            kwargs["trials"] = DEFAULT_TRIALS["cdf"]
        try:
            return SimConfig(**kwargs)
        except ConfigError:
            raise
        except MimocellError as exc:
            raise ConfigError(str(exc), _guess_key(str(exc), "sim.")) from None

    def sweep_points(self) -> list:
        """``[(sweep value or None, SystemParams)]``."""
        name = self.values["sweep.param"]
        if name is None:
            return [(None, self.system())]
        field_name = name.split(".", 1)[1]
        return [(v, self.system(**{field_name: v})) for v in self.values["sweep.values"]]

    def resolved(self) -> dict:
        """JSON-friendly dict; infinities are written as the string ``"inf"``."""
        def enc(v):
            if isinstance(v, float) and math.isinf(v):
                return "inf"
            if isinstance(v, list):
                return [enc(x) for x in v]
            return v
        return {k: enc(v) for k, v in self.values.items()}


def _guess_key(message, prefix):
    for key in KEYS:
        if key.startswith(prefix) and key.split(".", 1)[1] in message:
            return key
    return None


def load_config(path: Optional[str] = None, overrides: Optional[list] = None,
                flags: Optional[dict] = None) -> ExperimentConfig:
    """Merge file, ``--set`` overrides and dedicated flags (in that order)."""
    raw = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}", None) from None
        raw.update(parse_config_text(text, path))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}", None)
        key, value = (s.strip() for s in item.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", key)
        raw[key] = value
    for key, value in (flags or {}).items():
        if value is not None:
            raw[key] = value
    return ExperimentConfig.from_raw(raw)
