"""Closed-form and quadrature-based performance formulas.

Two downlink architectures share the same antenna budget per unit area:

* M-MIMO: base stations of density ``lambda_b``, each with ``M`` antennas and
  conjugate beamforming. In the large-system limit the SIR is
  ``Q_M = M d0**-mu / sum_i d_i**-mu``.
* small cells: single-antenna APs of density ``M * lambda_b`` under Rayleigh
  fading.

Users of density ``lambda_u`` attach to their nearest transmitter, and a
transmitter with no user stays silent. That silence is modelled by thinning
the interferers with the activity probabilities ``eps_c`` / ``eps_d``.
Transmitters serving several users share the channel by TDMA, which
contributes the ``min(1, density / lambda_u)`` factor on every rate.

Most functions take an optional ``eps`` that overrides the activity
probability derived from the parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import specfun
from .errors import ConvergenceError, DomainError
from .params import Arch, SystemParams
from .specfun import QuadratureSpec, beta_fd, beta_nfd

__all__ = [
    "ActivityProbabilities",
    "CdfBoundCurve",
    "RateBounds",
    "activity_prob",
    "activity_prob_mmimo",
    "activity_prob_smallcell",
    "activity_probabilities",
    "cell_area_pdf",
    "users_per_cell_pmf",
    "expected_users_per_cell",
    "tdma_factor",
    "noise_integral",
    "mmimo_laplace_inv_sir",
    "mmimo_cdf_lower",
    "mmimo_cdf_upper",
    "mmimo_upper_rigor",
    "mmimo_cdf_curve",
    "mmimo_inv_sir_mean",
    "mmimo_rate_bounds",
    "mmimo_outage_bounds",
    "mmimo_asymptotic",
    "mmimo_ergodic_rate",
    "smallcell_coverage",
    "smallcell_cdf_exact",
    "smallcell_cdf_bounds",
    "smallcell_cdf_curve",
    "smallcell_rate_bounds",
    "smallcell_asymptotic",
    "smallcell_ergodic_rate",
    "xi_star",
    "beta_nfd_objective",
]

# Gamma shape of the Voronoi cell-area approximation
CELL_SHAPE = 3.5

RATE_FLOOR = 1e-12
RATE_CAP = 200.0

H_CONVENTIONS = ("power", "literal")


# ---------------------------------------------------------------------------
# Records

@dataclass(frozen=True)
class ActivityProbabilities:
    eps_c: float
    eps_d: float

    def __post_init__(self):
        if not (0.0 <= self.eps_d <= self.eps_c <= 1.0):
            raise DomainError(
                f"need 0 <= eps_d <= eps_c <= 1, got eps_c={self.eps_c}, eps_d={self.eps_d}")

    def active_density(self, p: SystemParams, arch: Arch | str) -> float:
        """Density of transmitting BSs/APs after thinning."""
        eps = self.eps_c if Arch(arch) is Arch.MMIMO else self.eps_d
        return eps * p.bs_density(arch)


@dataclass(frozen=True)
class CdfBoundCurve:
    q_grid: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    exact: Optional[np.ndarray] = None
    # "proved" / "conjectured" per grid point, for the upper bound
    rigor: tuple = field(default=())


@dataclass(frozen=True)
class RateBounds:
    """Per-user rate bounds in bit/s/Hz; ``tdma_factor`` already applied."""

    lower: float
    upper: Optional[float] = None
    tdma_factor: float = 1.0

    def __post_init__(self):
        if self.lower < 0:
            raise DomainError(f"rate lower bound must be >= 0, got {self.lower}")
        if self.upper is not None and self.upper < self.lower * (1 - 1e-12):
            raise DomainError(f"upper {self.upper} below lower {self.lower}")
        if not (0 < self.tdma_factor <= 1):
            raise DomainError(f"tdma_factor must be in (0, 1], got {self.tdma_factor}")

    def as_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "tdma_factor": self.tdma_factor}


@dataclass(frozen=True)
class MmimoAsymptotic:
    cdf: float
    shannon_rate: float
    outage_rate: float


@dataclass(frozen=True)
class SmallcellRateBounds:
    shannon_lower: RateBounds
    outage_lower: RateBounds


@dataclass(frozen=True)
class SmallcellAsymptotic:
    cdf: float
    cdf_lower: float
    shannon_rate: float
    shannon_upper: float
    outage_rate: float
    outage_upper: float


# ---------------------------------------------------------------------------
# Activity and cell occupancy

def activity_prob(load: float) -> float:
    """Probability that a transmitter has at least one user.

    ``load`` is users per transmitter; the result is
    ``1 - (1 + load / 3.5) ** -3.5``.
    """
    load = float(load)
    if load < 0:
        raise DomainError(f"load must be >= 0, got {load}")
    return -math.expm1(-CELL_SHAPE * math.log1p(load / CELL_SHAPE))


def activity_prob_mmimo(p: SystemParams) -> float:
    return activity_prob(p.load(Arch.MMIMO))


def activity_prob_smallcell(p: SystemParams) -> float:
    return activity_prob(p.load(Arch.SMALLCELL))


def activity_probabilities(p: SystemParams) -> ActivityProbabilities:
    return ActivityProbabilities(activity_prob_mmimo(p), activity_prob_smallcell(p))


def _eps(p, arch, eps):
    if eps is not None:
        eps = float(eps)
        if not 0.0 <= eps <= 1.0:
            raise DomainError(f"activity probability must be in [0, 1], got {eps}")
        return eps
    return activity_prob(p.load(arch))


def cell_area_pdf(x, lam: float):
    """Gamma(3.5) approximation to the PDF of a typical Voronoi cell area."""
    if not lam > 0:
        raise DomainError(f"density must be > 0, got {lam}")
    x = np.asarray(x, dtype=float)
    k = CELL_SHAPE
    with np.errstate(divide="ignore"):
        logpdf = (k * math.log(k) - math.lgamma(k) + k * math.log(lam)
                  + (k - 1) * np.log(x) - k * lam * x)
    out = np.where(x > 0, np.exp(logpdf), 0.0)
    return float(out) if out.ndim == 0 else out


def _pmf_scalar(n, lam_b, lam_u):
    n = int(n)
    if n < 0:
        return 0.0
    # (2n+5)!! = 2**(n+3) Gamma(n + 3.5) / sqrt(pi)
    log_df = (n + 3) * math.log(2.0) + math.lgamma(n + 3.5) - 0.5 * math.log(math.pi)
    log_p = (log_df - math.lgamma(n + 1)
             + CELL_SHAPE * math.log(CELL_SHAPE) - math.log(15.0) - n * math.log(2.0)
             + CELL_SHAPE * math.log(lam_b) + n * math.log(lam_u)
             - (n + CELL_SHAPE) * math.log(lam_u + CELL_SHAPE * lam_b))
    return math.exp(log_p)


def users_per_cell_pmf(n, p: SystemParams, arch: Arch | str = Arch.MMIMO):
    """Distribution of the number of users in a typical cell.

    ``(2n+5)!!/n! * 3.5**3.5 / (15 * 2**n) * lb**3.5 * lu**n / (lu + 3.5 lb)**(n+3.5)``
    with ``lb`` the architecture's transmitter density.
    """
    lam_b = p.bs_density(arch)
    if np.ndim(n) == 0:
        return _pmf_scalar(n, lam_b, p.lambda_u)
    return np.array([_pmf_scalar(k, lam_b, p.lambda_u) for k in np.asarray(n).ravel()])


def expected_users_per_cell(p: SystemParams, arch: Arch | str = Arch.MMIMO) -> float:
    return p.load(arch)


def tdma_factor(p: SystemParams, arch: Arch | str) -> float:
    """TDMA share ``min(1, density / lambda_u)`` (``E[1/N] ~ 1/E[N]``)."""
    return min(1.0, p.bs_density(arch) / p.lambda_u)


# ---------------------------------------------------------------------------
# Shared integrals

def noise_integral(c, beta: float, spec: QuadratureSpec | None = None):
    """``int_0^inf exp(-z - c z**beta) dz`` for ``c >= 0`` (array allowed).

    Appears whenever a Rayleigh-distributed nearest distance meets a power
    law noise term. Each component is rescaled to its own width so that
    large ``c`` does not hide the integrand near the origin.
    """
    c_arr = np.atleast_1d(np.asarray(c, dtype=float))
    if np.any(c_arr < 0) or np.any(np.isnan(c_arr)):
        raise DomainError("noise_integral needs c >= 0")
    out = np.ones(c_arr.shape)
    todo = (c_arr > 0) & np.isfinite(c_arr)
    out[np.isinf(c_arr)] = 0.0
    if todo.any():
        cc = c_arr[todo]
        scale = np.where(cc > 1.0, cc ** (-1.0 / beta), 1.0)
        coef = cc * scale ** beta

        def integrand(x):
            return scale[:, None] * np.exp(-scale[:, None] * x - coef[:, None] * x ** beta)

        out[todo] = specfun.integrate_semi_infinite(integrand, 0.0, spec)
    return float(out[0]) if np.ndim(c) == 0 else out.reshape(np.shape(c))


def _rate_integral(f, start=0.0, spec=None):
    """``int_start^inf f(t) dt`` for a decaying rate integrand.

    Truncated where ``f`` drops below ``RATE_FLOOR`` (capped at ``RATE_CAP``).
    """
    width = 1.0
    end = start + width
    while end < RATE_CAP and abs(float(np.atleast_1d(f(np.array([end])))[0])) >= RATE_FLOOR:
        width *= 2.0
        end = min(start + width, RATE_CAP)
    return specfun.integrate(f, start, end, spec)


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"threshold must be >= 0, got {x}")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else np.asarray(arr)


# ---------------------------------------------------------------------------
# M-MIMO

def mmimo_laplace_inv_sir(s, p: SystemParams, *, eps=None, convention: str = "derived",
                          spec: QuadratureSpec | None = None):
    """Laplace transform ``E[exp(-s / Q_M)]`` of the inverse large-system SINR.

    Uses unfaded interference from a thinned PPP of density ``eps * lambda_b``
    outside the serving distance, nearest-BS distance from the full PPP, and
    the noise term ``sigma**2 / (M P_T)``.

    ``convention="printed"`` reproduces the published bracket
    ``1 + 1/eps - exp(-s/M) + ...``; the default ``"derived"`` uses
    ``1/eps - 1 + exp(-s/M) + ...``, which is what the interference model
    integrates to and what simulation confirms.
    """
    s_arr = _as_array(s)
    eps = _eps(p, Arch.MMIMO, eps)
    mu, m = p.mu, p.m_antennas
    a = s_arr / m
    gam = specfun.lower_inc_gamma(1.0 - 2.0 / mu, a)
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = a ** (2.0 / mu) * gam
    if convention == "derived":
        extra = np.expm1(-a) + tail
    elif convention == "printed":
        extra = -np.expm1(-a) + tail
    else:
        raise DomainError(f"unknown convention {convention!r}")
    pl = math.pi * p.lambda_b
    big_b = pl * (1.0 + eps * extra)
    noise = s_arr * p.noise_to_power / (m * m)
    c = noise * big_b ** (-mu / 2.0)
    out = pl / big_b * noise_integral(c, mu / 2.0, spec)
    return _out(out, s)


def mmimo_cdf_lower(q, p: SystemParams, *, eps=None):
    """Lower bound on ``P(Q_M <= q)``: zero below ``M``, then
    ``1 - 1 / (eps (q/M)**(2/mu) + 1 - eps)``."""
    q_arr = _as_array(q)
    eps = _eps(p, Arch.MMIMO, eps)
    m, mu = p.m_antennas, p.mu
    z = (q_arr / m) ** (2.0 / mu)
    val = 1.0 - 1.0 / (eps * z + 1.0 - eps)
    out = np.where(q_arr < m, 0.0, np.maximum(val, 0.0))
    return _out(out, q)


def mmimo_cdf_upper(q, p: SystemParams, *, eps=None):
    """Upper bound ``1 - 1 / (1 + eps beta_nfd (q/M)**(2/mu))`` on ``P(Q_M <= q)``.

    Proved for ``q >= M``; below ``M`` it is supported numerically only (see
    :func:`mmimo_upper_rigor`).
    """
    q_arr = _as_array(q)
    eps = _eps(p, Arch.MMIMO, eps)
    z = (q_arr / p.m_antennas) ** (2.0 / p.mu)
    out = 1.0 - 1.0 / (1.0 + eps * beta_nfd(p.mu) * z)
    return _out(out, q)


def mmimo_upper_rigor(q, p: SystemParams) -> str:
    return "proved" if q >= p.m_antennas or q == 0 else "conjectured"


def mmimo_cdf_curve(q_grid, p: SystemParams, *, eps=None) -> CdfBoundCurve:
    q = np.asarray(q_grid, dtype=float)
    return CdfBoundCurve(
        q_grid=q,
        lower=np.atleast_1d(mmimo_cdf_lower(q, p, eps=eps)),
        upper=np.atleast_1d(mmimo_cdf_upper(q, p, eps=eps)),
        rigor=tuple(mmimo_upper_rigor(v, p) for v in q),
    )


def mmimo_inv_sir_mean(p: SystemParams, *, eps=None) -> float:
    """``E[M / SIR] = 2 eps_c / (mu - 2)``."""
    return 2.0 * _eps(p, Arch.MMIMO, eps) / (p.mu - 2.0)


def mmimo_rate_bounds(p: SystemParams, *, eps=None,
                      spec: QuadratureSpec | None = None) -> RateBounds:
    """Bounds on the average user rate from the two CDF bounds."""
    eps = _eps(p, Arch.MMIMO, eps)
    m, mu = p.m_antennas, p.mu
    factor = tdma_factor(p, Arch.MMIMO)
    kappa = eps * beta_nfd(mu) * m ** (-2.0 / mu)

    def lower_integrand(t):
        return 1.0 / (1.0 + kappa * np.expm1(t * math.log(2.0)) ** (2.0 / mu))

    start = math.log2(1.0 + m)

    def upper_integrand(t):
        z = (np.expm1(t * math.log(2.0)) / m) ** (2.0 / mu)
        return 1.0 / (eps * z + 1.0 - eps)

    lower = factor * _rate_integral(lower_integrand, 0.0, spec)
    # without interferers the SIR is unbounded
    tail = _rate_integral(upper_integrand, start, spec) if eps > 0 else math.inf
    upper = factor * (start + tail)
    return RateBounds(lower=lower, upper=upper, tdma_factor=factor)


def mmimo_outage_bounds(eta: float, p: SystemParams, *, eps=None) -> RateBounds:
    """Bounds on ``log2(1 + eta) * P(Q_M >= eta)`` times the TDMA share."""
    eta = float(_as_array(eta))
    eps = _eps(p, Arch.MMIMO, eps)
    m, mu = p.m_antennas, p.mu
    factor = tdma_factor(p, Arch.MMIMO)
    bits = math.log2(1.0 + eta)
    z = (eta / m) ** (2.0 / mu)
    if eta <= m:
        upper = factor * bits
    else:
        upper = factor * bits / (eps * z + 1.0 - eps)
    lower = factor * bits / (1.0 + eps * beta_nfd(mu) * z)
    return RateBounds(lower=lower, upper=upper, tdma_factor=factor)


def _require_noise(p):
    if p.interference_limited:
        raise DomainError("noise-limited formulas need a finite snr")


def _mmimo_snr_scale(p):
    # pi lambda_b M**(4/mu) (P_T/sigma**2)**(2/mu)
    mu = p.mu
    return math.pi * p.lambda_b * p.m_antennas ** (4.0 / mu) * p.snr ** (2.0 / mu)


def mmimo_asymptotic(x: float, p: SystemParams,
                     spec: QuadratureSpec | None = None) -> MmimoAsymptotic:
    """Noise-limited M-MIMO regime (vanishing user density).

    ``cdf`` is ``P(Q_M <= x)``, ``outage_rate`` is evaluated at ``eta = x``.
    """
    _require_noise(p)
    x = float(_as_array(x))
    mu = p.mu
    k = _mmimo_snr_scale(p)

    def cdf_at(q):
        q = np.asarray(q, dtype=float)
        with np.errstate(divide="ignore"):
            return np.exp(-k * q ** (-2.0 / mu))

    def integrand(t):
        return -np.expm1(-k * np.expm1(t * math.log(2.0)) ** (-2.0 / mu))

    cdf = float(cdf_at(x)) if x > 0 else 0.0
    rate = _rate_integral(integrand, 0.0, spec)
    outage = math.log2(1.0 + x) * (1.0 - cdf)
    return MmimoAsymptotic(cdf=cdf, shannon_rate=rate, outage_rate=outage)


def mmimo_ergodic_rate(p: SystemParams, *, eps=None,
                       spec: QuadratureSpec | None = None) -> float:
    """Average user rate of the thinned large-system M-MIMO model, noise included.

    Obtained from the Laplace transform through
    ``E[ln(1 + Q)] = int_0^inf (1 - e^-s) / s * E[exp(-s / Q)] ds``,
    integrated on a logarithmic grid in ``s``. Multiplied by the TDMA share.
    """
    def integrand(x):
        s = np.exp(x)
        return -np.expm1(-s) * mmimo_laplace_inv_sir(s, p, eps=eps, spec=spec)

    lo = -40.0
    hi = 10.0
    while float(integrand(np.array([hi]))[0]) > 1e-13:
        hi += 10.0
        if hi > 400.0:
            raise ConvergenceError("Laplace transform does not decay; is the SIR unbounded?")
    nats = specfun.integrate(integrand, lo, hi, spec)
    return tdma_factor(p, Arch.MMIMO) * nats / math.log(2.0)


# ---------------------------------------------------------------------------
# Small cells

def _sir_tail(q_arr, eps, mu, spec):
    # eps q**(2/mu) rho(q**(-2/mu), mu/2)
    with np.errstate(divide="ignore"):
        lower = np.where(q_arr > 0, q_arr ** (-2.0 / mu), np.inf)
    r = specfun.rho(lower, mu / 2.0, spec)
    return eps * q_arr ** (2.0 / mu) * r


def smallcell_coverage(q, p: SystemParams, *, eps=None, spec: QuadratureSpec | None = None):
    """``P(Q_SM >= q)`` for Rayleigh fading and thinned AP interferers.

    With finite ``snr`` the noise term is integrated numerically; with
    ``snr = inf`` this is ``1 / (1 + eps q**(2/mu) rho(q**(-2/mu), mu/2))``.
    """
    q_arr = np.atleast_1d(_as_array(q))
    eps = _eps(p, Arch.SMALLCELL, eps)
    mu = p.mu
    denom = 1.0 + _sir_tail(q_arr, eps, mu, spec)
    if p.interference_limited:
        out = 1.0 / denom
    else:
        dens = math.pi * p.bs_density(Arch.SMALLCELL)
        c = q_arr * p.noise_to_power * (dens * denom) ** (-mu / 2.0)
        out = noise_integral(c, mu / 2.0, spec) / denom
    return float(out[0]) if np.ndim(q) == 0 else out.reshape(np.shape(q))


def smallcell_cdf_exact(q, p: SystemParams, *, eps=None, spec: QuadratureSpec | None = None):
    """SIR distribution ``1 - 1 / (1 + eps q**(2/mu) rho(q**(-2/mu), mu/2))``."""
    sir = p if p.interference_limited else p.replace(snr=math.inf)
    cov = smallcell_coverage(q, sir, eps=eps, spec=spec)
    return 1.0 - cov


def _h_power(mu, convention):
    if convention == "power":
        return 2.0 / mu
    if convention == "literal":
        return 1.0 / mu
    raise DomainError(f"h_convention must be one of {H_CONVENTIONS}, got {convention!r}")


def _lower_bound_scalar(q, eps, mu, k, spec):
    if q == 0.0:
        return 0.0
    a = 2.0 / mu
    coef = 2.0 * eps * q ** a / mu

    def integrand(g):
        with np.errstate(divide="ignore", over="ignore"):
            gam = specfun.upper_inc_gamma(a, g / q)
            term = coef * gam / g ** k
        return np.exp(-g) / (1.0 + term)

    return 1.0 - specfun.integrate_semi_infinite(integrand, 0.0, spec)


def smallcell_cdf_bounds(q, p: SystemParams, *, eps=None, beta=None,
                         h_convention: str = "power",
                         spec: QuadratureSpec | None = None):
    """Lower and upper bounds on the small-cell SIR distribution.

    The lower bound averages over the serving fading power ``g = |h|**2``;
    ``h_convention="power"`` reads the printed ``|h|**(2/mu)`` as
    ``g**(2/mu)``, ``"literal"`` as ``g**(1/mu)``. ``beta`` overrides
    ``beta_fd``.

    Returns ``(lower, upper)``.
    """
    q_arr = np.atleast_1d(_as_array(q))
    eps = _eps(p, Arch.SMALLCELL, eps)
    mu = p.mu
    k = _h_power(mu, h_convention)
    b = beta_fd(mu) if beta is None else float(beta)
    lower = np.array([_lower_bound_scalar(float(v), eps, mu, k, spec) for v in q_arr])
    upper = 1.0 - 1.0 / (1.0 + eps * b * q_arr ** (2.0 / mu))
    if np.ndim(q) == 0:
        return float(lower[0]), float(upper[0])
    return lower.reshape(np.shape(q)), upper.reshape(np.shape(q))


def smallcell_cdf_curve(q_grid, p: SystemParams, *, eps=None, beta=None,
                        spec: QuadratureSpec | None = None) -> CdfBoundCurve:
    q = np.asarray(q_grid, dtype=float)
    lower, upper = smallcell_cdf_bounds(q, p, eps=eps, beta=beta, spec=spec)
    exact = 1.0 - smallcell_coverage(q, p, eps=eps, spec=spec)
    return CdfBoundCurve(q_grid=q, lower=np.atleast_1d(lower), upper=np.atleast_1d(upper),
                         exact=np.atleast_1d(exact), rigor=("proved",) * q.size)


def smallcell_rate_bounds(eta: float, p: SystemParams, *, eps=None, beta=None,
                          spec: QuadratureSpec | None = None) -> SmallcellRateBounds:
    """Lower bounds on the small-cell Shannon and outage rates."""
    eta = float(_as_array(eta))
    eps = _eps(p, Arch.SMALLCELL, eps)
    mu = p.mu
    b = beta_fd(mu) if beta is None else float(beta)
    factor = tdma_factor(p, Arch.SMALLCELL)
    kappa = eps * b

    def integrand(t):
        return 1.0 / (1.0 + kappa * np.expm1(t * math.log(2.0)) ** (2.0 / mu))

    if kappa > 0:
        shannon = factor * _rate_integral(integrand, 0.0, spec)
    else:
        shannon = math.inf
    outage = factor * math.log2(1.0 + eta) / (1.0 + kappa * eta ** (2.0 / mu))
    return SmallcellRateBounds(
        shannon_lower=RateBounds(lower=shannon, tdma_factor=factor),
        outage_lower=RateBounds(lower=outage, tdma_factor=factor),
    )


def smallcell_asymptotic(x: float, p: SystemParams, *, h_convention: str = "power",
                         spec: QuadratureSpec | None = None) -> SmallcellAsymptotic:
    """Noise-limited small-cell regime (vanishing user density).

    The exact law averages ``exp(-alpha g**(2/mu))`` over the fading power
    ``g``; the bound replaces ``E[g**(2/mu)]`` by ``Gamma(1 + 2/mu)``
    (Jensen), giving a lower CDF and hence upper rates.
    """
    _require_noise(p)
    x = float(_as_array(x))
    mu = p.mu
    k = _h_power(mu, h_convention)
    scale = math.pi * p.bs_density(Arch.SMALLCELL) * p.snr ** (2.0 / mu)
    jensen = math.gamma(1.0 + k)

    def alpha(q):
        with np.errstate(divide="ignore"):
            return scale * np.asarray(q, dtype=float) ** (-2.0 / mu)

    def cdf_exact(q):
        # E_g[exp(-alpha g**k)] = int exp(-g - alpha g**k) dg
        return noise_integral(alpha(q), k, spec)

    def cdf_jensen(q):
        return np.exp(-alpha(q) * jensen)

    cdf = float(cdf_exact(x)) if x > 0 else 0.0
    cdf_lo = float(cdf_jensen(x)) if x > 0 else 0.0

    def rate_exact(t):
        return 1.0 - cdf_exact(np.expm1(t * math.log(2.0)))

    def rate_upper(t):
        return -np.expm1(-alpha(np.expm1(t * math.log(2.0))) * jensen)

    bits = math.log2(1.0 + x)
    return SmallcellAsymptotic(
        cdf=cdf,
        cdf_lower=cdf_lo,
        shannon_rate=_rate_integral(rate_exact, 0.0, spec),
        shannon_upper=_rate_integral(rate_upper, 0.0, spec),
        outage_rate=bits * (1.0 - cdf),
        outage_upper=bits * (1.0 - cdf_lo),
    )


def smallcell_ergodic_rate(p: SystemParams, *, eps=None,
                           spec: QuadratureSpec | None = None) -> float:
    """Average user rate ``int_0^inf P(Q_SM >= 2**t - 1) dt`` with noise, times the TDMA share."""
    def integrand(t):
        return smallcell_coverage(np.expm1(np.asarray(t) * math.log(2.0)), p, eps=eps, spec=spec)

    return tdma_factor(p, Arch.SMALLCELL) * _rate_integral(integrand, 0.0, spec)


# ---------------------------------------------------------------------------
# Bound-constant derivation helpers

def xi_star(mu: float) -> float:
    """Maximiser ``(mu + 2) / (mu - 2)`` of :func:`beta_nfd_objective` over ``xi >= 1``."""
    if not mu > 2:
        raise DomainError(f"mu must exceed 2, got {mu}")
    return (mu + 2.0) / (mu - 2.0)


def beta_nfd_objective(xi, mu: float):
    """``((mu-2) xi - 2) / ((mu-2) xi**(1+2/mu))``, maximised to build ``beta_nfd``."""
    xi = np.asarray(xi, dtype=float)
    out = ((mu - 2.0) * xi - 2.0) / ((mu - 2.0) * xi ** (1.0 + 2.0 / mu))
    return _out(out, xi)
