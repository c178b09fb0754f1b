"""Monte Carlo estimation over typical-user scenes.

Every trial ``k`` draws from its own generator ``default_rng([seed, k])``,
so a run can be split into shards, executed in any order or in parallel,
and reassembled into exactly the same per-trial sample. Sums are taken with
``math.fsum`` which is exact and hence independent of summation order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .geometry import (DEFAULT_EXACT_MULTIPLIER, DEFAULT_WINDOW_MULTIPLIER, ActivityMode,
                       TypicalUserScene, typical_scene)
from .params import Arch, SystemParams

__all__ = [
    "Fidelity",
    "SimConfig",
    "EmpiricalCdf",
    "MomentEstimate",
    "UserRates",
    "SampleSet",
    "draw_mmimo_sinr",
    "draw_smallcell_sinr",
    "sample_trials",
    "estimate_cdf",
    "estimate_inv_sir_mean",
    "estimate_laplace",
    "estimate_user_rates",
    "moment",
]

Z95 = 1.959963984540054
SEED_LIMIT = 2 ** 64


class Fidelity(str, Enum):
    FINITE = "finite-M"
    LARGE = "large-system"
    LARGE_UNFADED = "large-system-unfaded"
    ASYMPTOTIC = "asymptotic-snr"

    def __str__(self):
        return self.value


_SMALLCELL_FIDELITIES = (Fidelity.FINITE, Fidelity.ASYMPTOTIC)


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo settings.

    Attributes
    ----------
    trials : int
    seed : int
        Non-negative, below ``2**64``.
    window_multiplier : float
        Interference window radius in units of the active-transmitter spacing
        ``1 / sqrt(pi * lambda_active)``; at least 10.
    arch, fidelity, activity
        Architecture, SINR model and interferer activity model. Small cells
        accept ``finite-M`` (Rayleigh fading) and ``asymptotic-snr`` only.
    snr : float, optional
        Overrides ``SystemParams.snr`` when given.
    exact_multiplier : float
        Radius of the exactly resolved occupancy zone (exact mode).
    eps : float, optional
        Overrides the activity probability used for thinning.
    workers : int
        Processes used to run trial shards; results do not depend on it.
    """

    trials: int = 100_000
    seed: int = 0
    window_multiplier: float = DEFAULT_WINDOW_MULTIPLIER
    arch: Arch = Arch.MMIMO
    fidelity: Fidelity = Fidelity.FINITE
    activity: ActivityMode = ActivityMode.THINNED
    snr: Optional[float] = None
    exact_multiplier: float = DEFAULT_EXACT_MULTIPLIER
    eps: Optional[float] = None
    workers: int = 1

    def __post_init__(self):
        try:
            object.__setattr__(self, "arch", Arch(self.arch))
        except ValueError:
            raise ConfigError(f"unknown architecture {self.arch!r}", "sim.arch") from None
        try:
            object.__setattr__(self, "fidelity", Fidelity(self.fidelity))
        except ValueError:
            raise ConfigError(f"unknown fidelity {self.fidelity!r}", "sim.fidelity") from None
        try:
            object.__setattr__(self, "activity", ActivityMode(self.activity))
        except ValueError:
            raise ConfigError(f"unknown activity mode {self.activity!r}", "sim.activity") from None
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials must be an integer >= 1, got {self.trials}", "sim.trials")
        object.__setattr__(self, "trials", int(self.trials))
        if int(self.seed) != self.seed or not 0 <= self.seed < SEED_LIMIT:
            raise ConfigError(f"seed must be an integer in [0, 2**64), got {self.seed}", "sim.seed")
        object.__setattr__(self, "seed", int(self.seed))
        if not self.window_multiplier >= 10:
            raise ConfigError("window_multiplier must be >= 10", "sim.window_multiplier")
        if not self.exact_multiplier > 0:
            raise ConfigError("exact_multiplier must be > 0", "sim.exact_multiplier")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1", "sim.workers")
        if self.eps is not None and not 0.0 <= self.eps <= 1.0:
            raise ConfigError("eps must lie in [0, 1]", "sim.eps")
        if self.snr is not None and not self.snr > 0:
            raise ConfigError("snr must be > 0", "sim.snr")
        if self.arch is Arch.SMALLCELL and self.fidelity not in _SMALLCELL_FIDELITIES:
            raise ConfigError(f"fidelity {self.fidelity} is not defined for small cells",
                              "sim.fidelity")

    def replace(self, **changes) -> "SimConfig":
        return SimConfig(**{**self.as_dict(raw=True), **changes})

    def as_dict(self, raw: bool = False) -> dict:
        d = asdict(self)
        if not raw:
            d = {k: (str(v) if isinstance(v, Enum) else v) for k, v in d.items()}
        return d


@dataclass(frozen=True)
class EmpiricalCdf:
    thresholds: np.ndarray
    probabilities: np.ndarray
    ci_halfwidth: np.ndarray
    n: int


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    stderr: float
    n: int

    @property
    def ci_halfwidth(self) -> float:
        return Z95 * self.stderr


@dataclass(frozen=True)
class UserRates:
    shannon: MomentEstimate
    outage: MomentEstimate
    mean_inv_n: MomentEstimate


@dataclass(frozen=True)
class SampleSet:
    """Per-trial draws in trial order."""

    sinr: np.ndarray
    occupancy: Optional[np.ndarray]


# ---------------------------------------------------------------------------
# Single-trial draws

def _effective_snr(cfg: Optional[SimConfig], p: SystemParams) -> float:
    return p.snr if cfg is None or cfg.snr is None else cfg.snr


def draw_mmimo_sinr(scene: TypicalUserScene, p: SystemParams, fidelity: Fidelity | str,
                    rng: np.random.Generator) -> float:
    """SINR of the typical M-MIMO user.

    ``finite-M`` draws the beamforming gain as Gamma(M, 1) and each
    interferer's projection as Exp(1). ``large-system`` hardens the gain to
    ``M``; ``large-system-unfaded`` also drops interferer fading.
    ``asymptotic-snr`` ignores interference. Noise enters as
    ``1 / (M * snr)``; an interference- and noise-free draw returns ``inf``.
    """
    fidelity = Fidelity(fidelity)
    if scene.arch is not Arch.MMIMO:
        raise ConfigError("draw_mmimo_sinr needs an M-MIMO scene", "sim.arch")
    m, mu = p.m_antennas, p.mu
    gain = scene.serving_distance ** -mu
    if fidelity is Fidelity.ASYMPTOTIC:
        if p.interference_limited:
            raise ConfigError("asymptotic-snr fidelity needs a finite snr", "system.snr")
        return m * m * p.snr * gain
    path = scene.interferer_distances ** -mu
    if fidelity is Fidelity.FINITE:
        signal = rng.standard_gamma(m) * gain
        interference = float(rng.standard_exponential(len(path)) @ path)
    elif fidelity is Fidelity.LARGE:
        signal = m * gain
        interference = float(rng.standard_exponential(len(path)) @ path)
    else:
        signal = m * gain
        interference = float(path.sum())
    denom = interference + p.noise_to_power / m
    return math.inf if denom == 0 else signal / denom


def draw_smallcell_sinr(scene: TypicalUserScene, p: SystemParams, fidelity: Fidelity | str,
                        rng: np.random.Generator) -> float:
    """SINR of the typical small-cell user under Rayleigh fading."""
    fidelity = Fidelity(fidelity)
    if scene.arch is not Arch.SMALLCELL:
        raise ConfigError("draw_smallcell_sinr needs a small-cell scene", "sim.arch")
    if fidelity not in _SMALLCELL_FIDELITIES:
        raise ConfigError(f"fidelity {fidelity} is not defined for small cells", "sim.fidelity")
    mu = p.mu
    signal = rng.standard_exponential() * scene.serving_distance ** -mu
    if fidelity is Fidelity.ASYMPTOTIC:
        if p.interference_limited:
            raise ConfigError("asymptotic-snr fidelity needs a finite snr", "system.snr")
        return p.snr * signal
    path = scene.interferer_distances ** -mu
    denom = float(rng.standard_exponential(len(path)) @ path) + p.noise_to_power
    return math.inf if denom == 0 else signal / denom


# ---------------------------------------------------------------------------
# Trial engine

def _run_shard(cfg: SimConfig, p: SystemParams, start: int, stop: int):
    draw = draw_mmimo_sinr if cfg.arch is Arch.MMIMO else draw_smallcell_sinr
    sinr = np.empty(stop - start)
    occ = np.zeros(stop - start, dtype=np.int64)
    for k in range(start, stop):
        rng = np.random.default_rng([cfg.seed, k])
        scene = typical_scene(p, cfg.arch, cfg.activity, rng,
                              window_multiplier=cfg.window_multiplier,
                              exact_multiplier=cfg.exact_multiplier, eps=cfg.eps)
        sinr[k - start] = draw(scene, p, cfg.fidelity, rng)
        if scene.serving_occupancy is not None:
            occ[k - start] = scene.serving_occupancy
    return sinr, occ


def _shards(trials: int, workers: int):
    bounds = np.linspace(0, trials, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def sample_trials(cfg: SimConfig, p: SystemParams,
                  trial_range: Optional[tuple] = None) -> SampleSet:
    """Run trials ``[start, stop)`` (all by default) and return their draws in order."""
    if cfg.snr is not None:
        p = p.replace(snr=cfg.snr)
    start, stop = trial_range if trial_range is not None else (0, cfg.trials)
    shards = _shards(stop - start, cfg.workers)
    shards = [(a + start, b + start) for a, b in shards]
    if cfg.workers > 1 and len(shards) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_run_shard, [cfg] * len(shards), [p] * len(shards),
                                  [a for a, _ in shards], [b for _, b in shards]))
    else:
        parts = [_run_shard(cfg, p, a, b) for a, b in shards]
    sinr = np.concatenate([s for s, _ in parts]) if parts else np.zeros(0)
    occ = np.concatenate([o for _, o in parts]) if parts else np.zeros(0, dtype=np.int64)
    exact = cfg.activity is ActivityMode.EXACT
    return SampleSet(sinr=sinr, occupancy=occ if exact else None)


def merge_samples(parts: Sequence[SampleSet]) -> SampleSet:
    """Concatenate shard results given in trial order."""
    sinr = np.concatenate([s.sinr for s in parts])
    occ = None
    if all(s.occupancy is not None for s in parts):
        occ = np.concatenate([s.occupancy for s in parts])
    return SampleSet(sinr, occ)


# ---------------------------------------------------------------------------
# Estimators

def moment(values) -> MomentEstimate:
    """Sample mean and its standard error, with exact (fsum) accumulation."""
    v = np.asarray(values, dtype=float)
    n = v.size
    if n == 0:
        raise DomainError("cannot average an empty sample")
    mean = math.fsum(v) / n
    if not math.isfinite(mean):
        return MomentEstimate(mean, math.nan, n)
    var = math.fsum((v - mean) ** 2) / (n - 1) if n > 1 else 0.0
    return MomentEstimate(mean, math.sqrt(var / n), n)


def cdf_from_samples(sinr, thresholds) -> EmpiricalCdf:
    q = np.asarray(thresholds, dtype=float)
    if q.ndim != 1 or np.any(np.diff(q) < 0):
        raise DomainError("thresholds must be a sorted 1-D sequence")
    ordered = np.sort(np.asarray(sinr, dtype=float))
    n = ordered.size
    probs = np.searchsorted(ordered, q, side="right") / n
    ci = Z95 * np.sqrt(probs * (1.0 - probs) / n)
    return EmpiricalCdf(q, probs, ci, n)


def estimate_cdf(cfg: SimConfig, p: SystemParams, thresholds) -> EmpiricalCdf:
    """Empirical ``P(SINR <= q)`` with 95% binomial half-widths."""
    q = np.asarray(thresholds, dtype=float)
    if q.ndim != 1 or np.any(np.diff(q) < 0):
        raise DomainError("thresholds must be a sorted 1-D sequence")
    return cdf_from_samples(sample_trials(cfg, p).sinr, q)


def _require_mmimo(cfg):
    if cfg.arch is not Arch.MMIMO:
        raise ConfigError("this estimator is defined for M-MIMO only", "sim.arch")


def estimate_inv_sir_mean(cfg: SimConfig, p: SystemParams) -> MomentEstimate:
    """Mean of ``M / SINR``."""
    _require_mmimo(cfg)
    if cfg.fidelity is Fidelity.ASYMPTOTIC:
        raise ConfigError("inverse-SIR mean needs an interference model", "sim.fidelity")
    sinr = sample_trials(cfg, p).sinr
    return moment(p.m_antennas / sinr)


def estimate_laplace(cfg: SimConfig, p: SystemParams, s_grid) -> list:
    """``E[exp(-s / SINR)]`` for each ``s``; one shared sample."""
    _require_mmimo(cfg)
    s = np.asarray(s_grid, dtype=float)
    if np.any(s < 0):
        raise DomainError("Laplace arguments must be >= 0")
    inv = 1.0 / sample_trials(cfg, p).sinr
    return [moment(np.exp(-sv * inv)) for sv in s]


def estimate_user_rates(cfg: SimConfig, p: SystemParams, eta: float) -> UserRates:
    """TDMA-shared Shannon and outage rates of the typical user.

    The typical user shares its BS with ``N - 1`` others, ``N`` being the
    serving occupancy realised in exact-occupancy mode.
    """
    if cfg.activity is not ActivityMode.EXACT:
        raise ConfigError("user rates need activity = exact-occupancy", "sim.activity")
    if eta < 0:
        raise DomainError("eta must be >= 0")
    sample = sample_trials(cfg, p)
    inv_n = 1.0 / sample.occupancy
    with np.errstate(over="ignore"):
        shannon = np.log2(1.0 + sample.sinr) * inv_n
    outage = math.log2(1.0 + eta) * (sample.sinr >= eta) * inv_n
    return UserRates(moment(shannon), moment(outage), moment(inv_n))
