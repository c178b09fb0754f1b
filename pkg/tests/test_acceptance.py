"""End-to-end acceptance checks; each prints one PASS/FAIL line in the summary."""

import math
import time

import numpy as np

from mimocell import analytic as an
from mimocell import cli
from mimocell import compare as cmp
from mimocell import simulate as sim
from mimocell.geometry import Window, drop_network
from mimocell.params import Arch, SystemParams
from mimocell.selftest import run_selftest

SNR15 = 10 ** 1.5
GRID_M = (16, 64, 256)
GRID_MU = (3.0, 3.7)
GRID_ETA = (0.1, 1.0, 10.0, 100.0)


def grid_points():
    for m in GRID_M:
        for mu in GRID_MU:
            for eta in GRID_ETA:
                for load in (float(m), math.sqrt(m)):
                    yield eta, SystemParams(m_antennas=m, mu=mu, lambda_u=load)


def test_inverse_sir_mean_sweep(criterion):
    """Simulated mean of M/SINR against 2 eps_C/(mu-2), ten loads, under two minutes."""
    cfg = sim.SimConfig(trials=10_000, seed=2024, activity="exact-occupancy")
    start = time.perf_counter()
    worst = 0.0
    for load in range(1, 11):
        p = SystemParams(m_antennas=64, mu=3.7, lambda_b=1.0, lambda_u=float(load), snr=SNR15)
        est = sim.estimate_inv_sir_mean(cfg, p)
        worst = max(worst, abs(est.mean / an.mmimo_inv_sir_mean(p) - 1))
    elapsed = time.perf_counter() - start
    ok = worst <= 0.05 and elapsed < 120
    criterion(1, ok, f"worst rel. error {worst:.4f} (<= 0.05), runtime {elapsed:.1f} s (< 120)")
    assert ok


def test_large_system_bound_sandwich(criterion):
    q = 64 * np.logspace(0, 3, 60)
    cfg = sim.SimConfig(trials=100_000, seed=7, fidelity="large-system-unfaded")
    worst = math.inf
    for load in (1.0, 64.0):
        p = SystemParams(m_antennas=64, mu=3.7, lambda_u=load)
        est = sim.estimate_cdf(cfg, p, q)
        lo, hi = an.mmimo_cdf_lower(q, p), an.mmimo_cdf_upper(q, p)
        slack = np.minimum(est.probabilities - (lo - est.ci_halfwidth),
                           (hi + est.ci_halfwidth) - est.probabilities)
        worst = min(worst, float(slack.min()))
    ok = worst >= 0
    criterion(2, ok, f"min slack inside [LB - ci, UB + ci] = {worst:.4g} (>= 0)")
    assert ok


def test_smallcell_exact_cdf(criterion):
    p = SystemParams(m_antennas=64, mu=3.7, lambda_b=1.0, lambda_u=64.0)
    q = np.logspace(-2, 3, 80)
    est = sim.estimate_cdf(sim.SimConfig(trials=100_000, seed=11, arch="smallcell"), p, q)
    gap = float(np.max(np.abs(est.probabilities - an.smallcell_cdf_exact(q, p))))
    ok = gap <= 0.02
    criterion(3, ok, f"sup-norm gap {gap:.4f} (<= 0.02)")
    assert ok


def test_selftest_identities(criterion):
    start = time.perf_counter()
    checks = run_selftest()
    elapsed = time.perf_counter() - start
    failed = [c.name for c in checks if not c.passed]
    ok = not failed and elapsed < 1.0
    criterion(4, ok, f"{len(checks) - len(failed)}/{len(checks)} identities, {elapsed * 1e3:.0f} ms"
                     + (f"; failed: {failed}" if failed else ""))
    assert ok


def test_mean_users_per_cell(criterion):
    lam_b, lam_u = 0.05, 0.15
    window = Window.disk(math.sqrt(1000 / (math.pi * lam_b)))
    means = []
    for k in range(500):
        real = drop_network(lam_b, lam_u, window, np.random.default_rng([5, k]))
        means.append(real.occupancy.mean())
    mean = float(np.mean(means))
    rel = abs(mean / (lam_u / lam_b) - 1)
    ok = rel <= 0.02
    criterion(5, ok, f"mean occupancy {mean:.4f} vs 3 (rel. {rel:.4f} <= 0.02)")
    assert ok


def test_smallcell_bound_ordering(criterion):
    q = np.array([0.1, 1.0, 10.0])
    worst = math.inf
    for mu in (3.0, 3.7, 4.0):
        p = SystemParams(m_antennas=64, mu=mu)
        for eps in (0.05, 0.585):
            lo, hi = an.smallcell_cdf_bounds(q, p, eps=eps)
            exact = an.smallcell_cdf_exact(q, p, eps=eps)
            worst = min(worst, float(np.min(exact - lo)), float(np.min(hi - exact)))
    ok = worst >= 0
    criterion(6, ok, f"min margin of lower <= exact <= upper = {worst:.4g} (>= 0)")
    assert ok


def test_rate_inequalities(criterion):
    margins, diffs = [], []
    for eta, p in grid_points():
        chk = cmp.check_rate_inequality(eta, p)
        margins.append(chk.margin)
        diffs.append(chk.bound_difference)
    ok = min(margins) >= 0 and min(diffs) >= 0
    criterion(7, ok, f"{len(margins)} points, min margin {min(margins):.4g}, "
                     f"min OR_LB_SM - OR_LB_M {min(diffs):.4g} (>= 0)")
    assert ok


def test_asymptotic_ordering_and_flips(criterion):
    base = SystemParams(m_antennas=64, mu=3.7, lambda_b=1.0, lambda_u=1e-3, snr=SNR15)
    ordered = all(
        r.mmimo_rate >= r.smallcell_rate_ub and r.mmimo_outage >= r.smallcell_outage_ub * (1 - 1e-9)
        for r in (cmp.compare_asymptotic_rates(base, eta) for eta in (0.1, 1.0, 10.0)))
    steep = cmp.compare_asymptotic_rates(base.replace(mu=4.5), 1.0).verdict is Arch.SMALLCELL
    sweep = np.logspace(-3, 2, 21)

    def flips(mu):
        v = [cmp.rate_verdict(base.replace(mu=mu, lambda_u=float(x))) for x in sweep]
        return sum(a is not b for a, b in zip(v, v[1:]))

    f37, f45 = flips(3.7), flips(4.5)
    ok = ordered and steep and f37 == 1 and f45 == 0
    criterion(8, ok, f"ordering {ordered}, mu=4.5 small-cell {steep}, "
                     f"flips mu=3.7: {f37} (1), mu=4.5: {f45} (0)")
    assert ok


def test_energy_efficiency(criterion):
    points = list(grid_points())
    points += [(eta, SystemParams(m_antennas=64, mu=3.7, lambda_u=1e-3, snr=SNR15))
               for eta in (0.1, 1.0, 10.0)]
    ratios = [cmp.energy_efficiency(eta, p) for eta, p in points]
    worst = min(e.ee_smallcell / e.ee_mmimo for e in ratios)
    ok = worst > 1
    criterion(9, ok, f"{len(points)} points, min EE_SM / EE_M = {worst:.4g} (> 1)")
    assert ok


def test_determinism(criterion, tmp_path):
    def snapshot(*args):
        assert cli.main([*args, "--out", str(tmp_path)]) == 0
        return {f.name: f.read_bytes() for f in sorted(tmp_path.iterdir())}

    same = True
    for args in (["selftest"], ["simulate", "--trials", "2000", "--seed", "99"]):
        first = snapshot(*args)
        same &= first == snapshot(*args)
    ok = bool(same)
    criterion(10, ok, "selftest and fixed-seed simulate reruns byte-identical" if ok
              else "outputs differ between reruns")
    assert ok
