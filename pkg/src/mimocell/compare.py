"""Spectral- and energy-efficiency comparison of the two architectures.

Density regimes, by the load ``lambda_u / lambda_b``:

* ``very-large``: load >= M
* ``intermediate``: 1 < load < M
* ``small``: threshold <= load <= 1 (no closed-form ordering; verdicts are
  flagged ``numeric_only``)
* ``asymptotic``: load < threshold (default 0.01)

Rate verdicts use the Shannon-rate lower bounds of both architectures when
``lambda_u >= lambda_b``. Below that they use the noise-included ergodic
rates of the thinned models, which tend to the noise-limited closed forms as
``lambda_u -> 0`` and are continuous in ``lambda_u``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from . import analytic as an
from .errors import DomainError, NotApplicableError
from .outputs import csv_text
from .params import Arch, SystemParams
from .specfun import beta_fd, beta_nfd

__all__ = [
    "Regime",
    "ComparisonReport",
    "InequalityCheck",
    "AsymptoticComparison",
    "EnergyEfficiency",
    "Crossover",
    "classify_regime",
    "check_rate_inequality",
    "compare_asymptotic_rates",
    "energy_efficiency",
    "rate_difference",
    "rate_verdict",
    "find_rate_crossover",
    "compare",
    "reports_to_csv",
    "reports_to_json",
]

ASYMPTOTIC_RATIO_THRESHOLD = 0.01
DEFAULT_ETAS = (0.1, 1.0, 10.0)


class Regime(str, Enum):
    VERY_LARGE = "very-large"
    INTERMEDIATE = "intermediate"
    SMALL = "small"
    ASYMPTOTIC = "asymptotic"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    holds: bool
    margin: float
    # OR^LB_SM - OR^LB_M, the comparison the inequality certifies
    bound_difference: float


@dataclass(frozen=True)
class AsymptoticComparison:
    eta: float
    mmimo_rate: float
    smallcell_rate_ub: float
    mmimo_outage: float
    smallcell_outage_ub: float
    precondition: bool
    ordering_ok: Optional[bool]
    verdict: Arch


@dataclass(frozen=True)
class EnergyEfficiency:
    """Rates per unit of expected radiated power (``P_T = p_t``)."""

    eta: float
    ee_mmimo: float
    ee_smallcell: float
    ee_shannon_mmimo: float
    ee_shannon_smallcell: float
    power_mmimo: float
    power_smallcell: float
    source: str

    @property
    def verdict(self) -> Arch:
        return Arch.SMALLCELL if self.ee_smallcell > self.ee_mmimo else Arch.MMIMO


@dataclass(frozen=True)
class Crossover:
    density: float
    bracket: tuple
    difference: float


@dataclass(frozen=True)
class ComparisonReport:
    params: SystemParams
    eta: float
    regime: Regime
    mmimo_outage_bounds: an.RateBounds
    smallcell_outage_bounds: an.RateBounds
    mmimo_rate: float
    smallcell_rate: float
    ee_mmimo: float
    ee_smallcell: float
    ee_shannon_mmimo: float
    ee_shannon_smallcell: float
    rate_verdict: Arch
    ee_verdict: Arch
    numeric_only: bool
    inequality_margins: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, val in self.inequality_margins.items():
            if not math.isfinite(val):
                raise DomainError(f"margin {name} is not finite: {val}")

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "eta": self.eta,
            "regime": str(self.regime),
            "mmimo_outage_bounds": self.mmimo_outage_bounds.as_dict(),
            "smallcell_outage_bounds": self.smallcell_outage_bounds.as_dict(),
            "mmimo_rate": self.mmimo_rate,
            "smallcell_rate": self.smallcell_rate,
            "ee_mmimo": self.ee_mmimo,
            "ee_smallcell": self.ee_smallcell,
            "ee_shannon_mmimo": self.ee_shannon_mmimo,
            "ee_shannon_smallcell": self.ee_shannon_smallcell,
            "rate_verdict": str(self.rate_verdict),
            "ee_verdict": str(self.ee_verdict),
            "numeric_only": self.numeric_only,
            "inequality_margins": dict(self.inequality_margins),
        }


# ---------------------------------------------------------------------------

def classify_regime(p: SystemParams, threshold: float = ASYMPTOTIC_RATIO_THRESHOLD) -> Regime:
    if not 0 < threshold <= 1:
        raise DomainError(f"asymptotic threshold must lie in (0, 1], got {threshold}")
    load = p.lambda_u / p.lambda_b
    if load >= p.m_antennas:
        return Regime.VERY_LARGE
    if load > 1:
        return Regime.INTERMEDIATE
    if load < threshold:
        return Regime.ASYMPTOTIC
    return Regime.SMALL


def _outage_lb_difference(eta, p):
    sm = an.smallcell_rate_bounds(eta, p).outage_lower.lower
    mm = an.mmimo_outage_bounds(eta, p).lower
    return sm - mm


def check_rate_inequality(eta: float, p: SystemParams,
                          threshold: float = ASYMPTOTIC_RATIO_THRESHOLD) -> InequalityCheck:
    """Closed-form sufficient condition for ``OR^LB_SM(eta) >= OR^LB_M(eta)``.

    Very large load: ``M + M**(1-2/mu) eps_c b_nfd eta**(2/mu) >= 1 + eps_d b_fd eta**(2/mu)``.
    Intermediate load: ``1 + eps_c b_nfd (eta/M)**(2/mu) >= lambda_b/lambda_u + b_fd eta**(2/mu) / M``.
    """
    regime = classify_regime(p, threshold)
    if regime not in (Regime.VERY_LARGE, Regime.INTERMEDIATE):
        raise NotApplicableError(f"no closed-form rate inequality in the {regime} regime")
    if eta < 0:
        raise DomainError("eta must be >= 0")
    m, mu = p.m_antennas, p.mu
    e = eta ** (2.0 / mu)
    eps = an.activity_probabilities(p)
    if regime is Regime.VERY_LARGE:
        name = "very-large"
        lhs = m + m ** (1.0 - 2.0 / mu) * eps.eps_c * beta_nfd(mu) * e
        rhs = 1.0 + eps.eps_d * beta_fd(mu) * e
    else:
        name = "intermediate"
        lhs = 1.0 + eps.eps_c * beta_nfd(mu) * e / m ** (2.0 / mu)
        rhs = p.lambda_b / p.lambda_u + beta_fd(mu) * e / m
    margin = lhs - rhs
    return InequalityCheck(name, margin >= 0, margin, _outage_lb_difference(eta, p))


def compare_asymptotic_rates(p: SystemParams, eta: float) -> AsymptoticComparison:
    """Noise-limited M-MIMO rates against the small-cell upper bounds.

    The ordering ``R_M >= R^UB_SM`` is guaranteed when ``mu < 4`` and
    ``M**(4/mu - 1) > Gamma(1 + 2/mu)``. For ``mu >= 4`` small cells are
    reported as favoured.
    """
    if p.interference_limited:
        raise DomainError("asymptotic comparison needs a finite snr")
    mm = an.mmimo_asymptotic(eta, p)
    sm = an.smallcell_asymptotic(eta, p)
    mu, m = p.mu, p.m_antennas
    pre = mu < 4 and m ** (4.0 / mu - 1.0) > math.gamma(1.0 + 2.0 / mu)
    ordering = None
    if pre:
        ordering = (mm.shannon_rate >= sm.shannon_upper * (1 - 1e-9)
                    and mm.outage_rate >= sm.outage_upper * (1 - 1e-9))
    if mu >= 4:
        verdict = Arch.SMALLCELL
    else:
        verdict = Arch.MMIMO if mm.shannon_rate >= sm.shannon_rate else Arch.SMALLCELL
    return AsymptoticComparison(eta, mm.shannon_rate, sm.shannon_upper, mm.outage_rate,
                                sm.outage_upper, pre, ordering, verdict)


def energy_efficiency(eta: float, p: SystemParams, *, p_t: float = 1.0,
                      threshold: float = ASYMPTOTIC_RATIO_THRESHOLD) -> EnergyEfficiency:
    """Rate per expected radiated power, ``eps_c M P_T`` against ``eps_d P_T``.

    Lower bounds on the rates are used unless the load is asymptotically
    small and the SNR finite, in which case the noise-limited closed forms
    are used.
    """
    if not p_t > 0:
        raise DomainError("p_t must be > 0")
    eps = an.activity_probabilities(p)
    pow_m = eps.eps_c * p.m_antennas * p_t
    pow_s = eps.eps_d * p_t
    regime = classify_regime(p, threshold)
    if regime is Regime.ASYMPTOTIC and not p.interference_limited:
        mm = an.mmimo_asymptotic(eta, p)
        sm = an.smallcell_asymptotic(eta, p)
        or_m, or_s = mm.outage_rate, sm.outage_rate
        r_m, r_s = mm.shannon_rate, sm.shannon_rate
        source = "noise-limited"
    else:
        or_m = an.mmimo_outage_bounds(eta, p).lower
        sb = an.smallcell_rate_bounds(eta, p)
        or_s = sb.outage_lower.lower
        r_m = an.mmimo_rate_bounds(p).lower
        r_s = sb.shannon_lower.lower
        source = "lower-bounds"
    return EnergyEfficiency(eta, or_m / pow_m, or_s / pow_s, r_m / pow_m, r_s / pow_s,
                            pow_m, pow_s, source)


def _verdict_rates(p: SystemParams):
    if p.lambda_u >= p.lambda_b:
        return an.mmimo_rate_bounds(p).lower, an.smallcell_rate_bounds(1.0, p).shannon_lower.lower
    return an.mmimo_ergodic_rate(p), an.smallcell_ergodic_rate(p)


def rate_difference(p: SystemParams) -> float:
    """M-MIMO minus small-cell user rate, bit/s/Hz (see module docstring)."""
    m, s = _verdict_rates(p)
    return m - s


def rate_verdict(p: SystemParams) -> Arch:
    return Arch.MMIMO if rate_difference(p) > 0 else Arch.SMALLCELL


def find_rate_crossover(p: SystemParams, lo: float, hi: float, *,
                        tol: Optional[float] = None, rate_tol: float = 1e-3,
                        max_iter: int = 200) -> Optional[Crossover]:
    """User density where the rate verdict flips, or ``None``.

    Bisects ``rate_difference`` over ``lambda_u`` in ``[lo, hi]`` (geometric
    midpoints) until the bracket is narrower than ``tol`` (default
    ``1e-3 * lambda_b``) and the difference at the midpoint is within
    ``rate_tol``. Returns ``None`` for ``mu >= 4`` or without a sign change.
    """
    if not 0 < lo < hi:
        raise DomainError("need 0 < lo < hi")
    if p.mu >= 4:
        return None
    tol = 1e-3 * p.lambda_b if tol is None else tol

    def diff(lam):
        return rate_difference(p.replace(lambda_u=lam))

    f_lo, f_hi = diff(lo), diff(hi)
    if f_lo == 0:
        return Crossover(lo, (lo, lo), 0.0)
    if f_hi == 0:
        return Crossover(hi, (hi, hi), 0.0)
    if (f_lo > 0) == (f_hi > 0):
        return None
    mid, f_mid = lo, f_lo
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        f_mid = diff(mid)
        if hi - lo <= tol and abs(f_mid) <= rate_tol:
            break
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return Crossover(mid, (lo, hi), f_mid)


def compare(p: SystemParams, eta: float, *, threshold: float = ASYMPTOTIC_RATIO_THRESHOLD,
            p_t: float = 1.0) -> ComparisonReport:
    """Full comparison at one operating point."""
    regime = classify_regime(p, threshold)
    or_m = an.mmimo_outage_bounds(eta, p)
    or_s = an.smallcell_rate_bounds(eta, p).outage_lower
    r_m, r_s = _verdict_rates(p)
    ee = energy_efficiency(eta, p, p_t=p_t, threshold=threshold)
    margins = {"rate_difference": r_m - r_s,
               "outage_lb_difference": or_s.lower - or_m.lower,
               "ee_difference": ee.ee_smallcell - ee.ee_mmimo}
    if regime in (Regime.VERY_LARGE, Regime.INTERMEDIATE):
        margins["rate_inequality"] = check_rate_inequality(eta, p, threshold).margin
    return ComparisonReport(
        params=p, eta=float(eta), regime=regime,
        mmimo_outage_bounds=or_m, smallcell_outage_bounds=or_s,
        mmimo_rate=r_m, smallcell_rate=r_s,
        ee_mmimo=ee.ee_mmimo, ee_smallcell=ee.ee_smallcell,
        ee_shannon_mmimo=ee.ee_shannon_mmimo, ee_shannon_smallcell=ee.ee_shannon_smallcell,
        rate_verdict=Arch.MMIMO if r_m > r_s else Arch.SMALLCELL,
        ee_verdict=ee.verdict,
        numeric_only=regime is Regime.SMALL,
        inequality_margins=margins,
    )


CSV_COLUMNS = ("lambda_u", "eta", "regime", "mmimo_rate", "smallcell_rate",
               "mmimo_outage_lb", "smallcell_outage_lb", "ee_mmimo", "ee_smallcell",
               "ee_shannon_mmimo", "ee_shannon_smallcell", "rate_verdict", "ee_verdict",
               "numeric_only", "rate_inequality_margin")


def reports_to_csv(reports: Sequence[ComparisonReport]) -> str:
    rows = [(r.params.lambda_u, r.eta, r.regime, r.mmimo_rate, r.smallcell_rate,
             r.mmimo_outage_bounds.lower, r.smallcell_outage_bounds.lower, r.ee_mmimo,
             r.ee_smallcell, r.ee_shannon_mmimo, r.ee_shannon_smallcell, r.rate_verdict,
             r.ee_verdict, r.numeric_only, r.inequality_margins.get("rate_inequality"))
            for r in reports]
    return csv_text(CSV_COLUMNS, rows)


def reports_to_json(reports: Sequence[ComparisonReport], crossover: Optional[Crossover] = None,
                    extra: Optional[dict] = None) -> str:
    doc = {"points": [r.as_dict() for r in reports]}
    if crossover is not None or extra is not None:
        doc["crossover"] = None if crossover is None else {
            "density": crossover.density, "bracket": list(crossover.bracket),
            "difference": crossover.difference}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True)
