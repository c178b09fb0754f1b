"""Fast identity checks on the analytic layer."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analytic as an
from .params import SystemParams
from .specfun import beta_nfd, rho


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    expected: float
    tolerance: float

    @property
    def error(self) -> float:
        return abs(self.value - self.expected)

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance


def run_selftest() -> list:
    checks = []
    for load in (0.1, 1.0, 3.0, 10.0):
        p = SystemParams(lambda_b=1.0, lambda_u=load)
        n = np.arange(0, 2000)
        pmf = an.users_per_cell_pmf(n, p)
        checks += [
            Check(f"pmf(0) = 1 - eps_c, load {load:g}", an.users_per_cell_pmf(0, p),
                  1.0 - an.activity_prob_mmimo(p), 1e-12),
            Check(f"sum pmf = 1, load {load:g}", math.fsum(pmf), 1.0, 1e-9),
            Check(f"mean occupancy = load, load {load:g}", math.fsum(n * pmf), load, 1e-6),
        ]
    for mu, snr in ((3.7, math.inf), (3.7, 31.62), (4.0, 10.0)):
        p = SystemParams(mu=mu, snr=snr)
        checks.append(Check(f"laplace(0) = 1, mu {mu:g}, snr {snr:g}",
                            an.mmimo_laplace_inv_sir(0.0, p), 1.0, 1e-8))
    checks += [
        Check("rho(0, 2) = pi/2", rho(0.0, 2.0), math.pi / 2, 1e-10),
        Check("rho(1, 2) = pi/4", rho(1.0, 2.0), math.pi / 4, 1e-10),
        Check("beta_nfd(4)", beta_nfd(4.0), 2.5981, 1e-4),
    ]
    for mu in (3.0, 3.7, 4.0, 5.0):
        b = beta_nfd(mu)
        xi0 = an.xi_star(mu)
        checks.append(Check(f"beta_nfd - xi0^(2/mu) = 2 beta_nfd/(mu+2), mu {mu:g}",
                            b - xi0 ** (2.0 / mu), 2.0 * b / (mu + 2.0), 1e-10))
    return checks


def selftest_rows(checks) -> list:
    return [(c.name, c.value, c.expected, c.tolerance, c.passed) for c in checks]
