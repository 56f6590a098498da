"""Acceptance suite: one test per numbered criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the verdict lines bypass
output capture).  A criterion fails when either its numeric check or its
runtime budget fails.
"""

import math
import time
import warnings
from fractions import Fraction

import numpy as np
import pytest

from cauchyfourier.analytic import BoundaryMeasure, TaylorSeries, sample_on_circle
from cauchyfourier.bloch import FOURIER_C, embedding_report, fourier_bound_report
from cauchyfourier.innerouter import (
    RieszProductSpec,
    clark_b_from_mu,
    kernel_identity_residual,
    outer_from_log_modulus,
    riesz_product_measure,
)
from cauchyfourier.majorants import Majorant, construct_majorant, psi_node_series, square_dini_partial
from cauchyfourier.modelspace import FiniteBlaschke, dualcyc_gap
from cauchyfourier.orlicz import (
    YoungFunction,
    conjugate_profile_check,
    conjugate_values,
    orlicz_norm,
    young_inequality_check,
)
from cauchyfourier.saconstruct import (
    ExactAtoms,
    SAConfig,
    WeightSequence,
    build_bump,
    pairing_annihilation_demo,
    sa_pipeline,
)


@pytest.fixture
def verdict(capsys):
    """Print the verdict line for a criterion, then assert it."""

    def _emit(number, ok, elapsed, budget, detail):
        in_time = elapsed < budget
        passed = bool(ok) and in_time
        line = f"CRITERION {number:2d}: {'PASS' if passed else 'FAIL'}  ({elapsed:.2f}s / {budget:g}s)  {detail}"
        with capsys.disabled():
            print("\n" + line)
        assert ok, detail
        assert in_time, f"runtime {elapsed:.2f}s exceeds {budget}s"

    return _emit


def brute_sup(phi, x, y_max, n=100_000):
    y = np.linspace(0.0, y_max, n)
    fy = phi.values(y)
    return np.array([np.max(xi * y - fy) for xi in x])


def test_c01_power_conjugates(verdict):
    t0 = time.perf_counter()
    x = np.linspace(0.0, 2.0, 201)[1:]
    worst = 0.0
    for p in (1.5, 2.0, 3.0):
        phi = YoungFunction.power(p)
        closed = (p - 1) * (x / p) ** (p / (p - 1))
        numeric = conjugate_values(phi, x)
        brute = brute_sup(phi, x, y_max=4.0)
        worst = max(worst, np.max(np.abs(numeric - closed)), np.max(np.abs(numeric - brute)))
    elapsed = time.perf_counter() - t0
    verdict(1, worst <= 1e-6, elapsed, 2, f"max deviation {worst:.2e} (tol 1e-6)")


def test_c02_conjugate_profile(verdict):
    t0 = time.perf_counter()
    rep = conjugate_profile_check(YoungFunction.power_log(2), 20)
    elapsed = time.perf_counter() - t0
    rel = rep.ratios[-1] / rep.ratios[0]
    ok = rep.hypothesis_met and rep.nonincreasing and rel < 0.1
    detail = f"nonincreasing={rep.nonincreasing}, ratio(k=20)/ratio(k=1) = {rel:.4f} (needs < 0.1)"
    verdict(2, ok, elapsed, 1, detail)


def test_c03_young_inequality(verdict):
    family = [
        YoungFunction.power(1.5),
        YoungFunction.power(2),
        YoungFunction.power(3),
        YoungFunction.power(4),
        YoungFunction.power_log(2),
        YoungFunction.tabulated(np.linspace(0, 16, 257), np.cosh(np.linspace(0, 16, 257)) - 1),
    ]
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst = -math.inf
    for phi in family:
        pairs = rng.uniform(0, 2, size=(10_000, 2))
        worst = max(worst, young_inequality_check(phi, pairs))
    elapsed = time.perf_counter() - t0
    verdict(3, worst <= 1e-8, elapsed, 1, f"max violation {worst:.2e} over {len(family)} functions")


def test_c04_orlicz_lp(verdict):
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    worst = 0.0
    for p in (1.0, 1.3, 2.0, 3.0, 5.0):
        phi = YoungFunction.power(p)
        for _ in range(100):
            n = int(rng.integers(1, 65))
            a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            exact = np.sum(np.abs(a) ** p) ** (1 / p)
            worst = max(worst, abs(orlicz_norm(a, phi) - exact) / exact)
    elapsed = time.perf_counter() - t0
    verdict(4, worst <= 1e-8, elapsed, 1, f"max relative error {worst:.2e}")


def test_c05_clark_kernel(verdict):
    rng = np.random.default_rng(5)
    r = 0.9 * np.sqrt(rng.uniform(0, 1, (2, 20)))
    pts = r * np.exp(2j * np.pi * rng.uniform(0, 1, (2, 20)))
    t0 = time.perf_counter()
    mu = BoundaryMeasure.atoms([0.1, 0.45, 0.8], [0.3, 0.5, 0.2])
    pair = clark_b_from_mu(mu, 0.0, 1024)
    res = float(np.max(kernel_identity_residual(pair, pts[0][:, None], pts[1][None, :])))
    unit = clark_b_from_mu(BoundaryMeasure.atoms([0.0], [1.0]), 0.0, 64)
    unit_err = float(np.max(np.abs(unit.b.coeffs - np.r_[0, 1, np.zeros(63)])))
    elapsed = time.perf_counter() - t0
    ok = res <= 1e-9 and unit_err <= 1e-10
    verdict(5, ok, elapsed, 1, f"kernel residual {res:.2e}, unit-atom coefficient error {unit_err:.2e}")


def test_c06_outer_synthesis(verdict):
    t0 = time.perf_counter()
    worst_mod = worst_f0 = 0.0
    for gamma, delta in [(0.5, 0.2), (0.1, 0.5), (0.25, 0.3)]:
        for frac in (1 / 8, 1 / 5):
            bump = build_bump(gamma, delta, delta * frac, 4096)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                G = outer_from_log_modulus(bump.grid)
            vals = sample_on_circle(G, bump.M)
            worst_mod = max(worst_mod, float(np.max(np.abs(np.abs(vals) - np.exp(bump.grid.samples)))))
            worst_f0 = max(worst_f0, abs(1 - complex(G.coeffs[0])))
    elapsed = time.perf_counter() - t0
    ok = worst_mod <= 1e-6 and worst_f0 <= 1e-7
    verdict(6, ok, elapsed, 2, f"max ||G|-e^psi| = {worst_mod:.2e}, max |F(0)| = {worst_f0:.2e}")


def test_c07_sa_pipeline(verdict):
    w = WeightSequence.power(0.25, 2)
    cfg = SAConfig(0.1, [2.0**-n for n in range(1, 6)], [0.1 * 2.0**-n for n in range(1, 6)])
    t0 = time.perf_counter()
    run = sa_pipeline(w, cfg)
    elapsed = time.perf_counter() - t0
    checks = {k: run.checks[k] for k in ("completed", "measure_K", "l1w_le_eps", "supK_within", "slack_nonneg")}
    measure = run.stages[-1].K_measure if run.stages else Fraction(0)
    detail = f"stages built {len(run.stages)}/5, measure(K) = {float(measure):.4f}, checks {checks}"
    if run.failure:
        detail += f"; {run.failure}"
    verdict(7, all(checks.values()), elapsed, 60, detail)


def test_c08_pairing_annihilation(verdict):
    w = WeightSequence.power(0.25, 2)
    t0 = time.perf_counter()
    run = sa_pipeline(w, SAConfig(0.9, [2.0**-n for n in range(1, 6)], [0.18] * 5))
    K = run.K
    # second atom fixed in advance: the nonzero sample point of K nearest to angle 0
    pts = [p for p in K.sample_points(64, seed=0) if p != 0]
    tb = min(pts, key=lambda p: min(p, 1 - p))
    mu = ExactAtoms((Fraction(0), tb), (1.0, -1.0))
    raw = [pairing_annihilation_demo(mu, s.lift, w, K=K) for s in run.stages]
    mu = mu.scaled(1 / max(r.sup_ratio for r in raw))
    res = [pairing_annihilation_demo(mu, s.lift, w, K=K) for s in run.stages]
    elapsed = time.perf_counter() - t0
    vals = [abs(r.quadrature) for r in res]
    bounded = all(v <= r.l1w * (1 + 1e-12) and v <= r.bound * (1 + 1e-12) for v, r in zip(vals, res))
    agree = max(r.agree for r in res)
    drop = vals[0] / vals[-1]
    ok = len(res) == 5 and bounded and agree <= 1e-10 and drop >= 10
    detail = f"bounded={bounded}, stage1/stage5 = {drop:.2f} (needs >= 10), agreement {agree:.1e}"
    verdict(8, ok, elapsed, 10, detail)


def test_c09_majorant_construction(verdict):
    psi = YoungFunction.power(4)
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        w, trace = construct_majorant(psi, 50)
    n = np.arange(1, 51)
    t_err = float(np.max(np.abs(trace.t[:50] - 1.0 / n**2)))
    ratio = float(np.max(trace.sequence[:-1] / trace.sequence[1:]))
    terms, _, n0 = psi_node_series(w, psi)
    tail_ok = n0 < w.K and bool(np.all(terms[n0:] < 1e-6))
    dini = square_dini_partial(w, min(w.K, 20_000)).S[-1]
    elapsed = time.perf_counter() - t0
    ok = t_err <= 1e-10 and ratio <= 2 + 1e-12 and tail_ok and dini > 10
    detail = f"t_n error {t_err:.1e}, max ratio {ratio:.4f}, n0 = {n0} of {w.K}, square-Dini sum {dini:.2f}"
    verdict(9, ok, elapsed, 5, detail)


def test_c10_fourier_bound(verdict):
    rng = np.random.default_rng(10)
    t0 = time.perf_counter()
    worst = 0.0
    for a in (0.0, 0.25, 0.5):
        w = Majorant.constant(1.0) if a == 0 else Majorant.power(a)
        for _ in range(100):
            d = int(rng.integers(2, 257))
            f = TaylorSeries(rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1))
            worst = max(worst, fourier_bound_report(f, w).max_sum_ratio)
    elapsed = time.perf_counter() - t0
    verdict(10, worst <= FOURIER_C, elapsed, 10, f"max normalized partial-sum ratio {worst:.3f} (bound {FOURIER_C:g})")


def test_c11_embedding(verdict):
    psi = YoungFunction.power(4)
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        w, _ = construct_majorant(psi, 50)
    ratios = []
    for d in (16, 64, 256):
        n = np.arange(1, d + 1)
        f = TaylorSeries(np.r_[0.0, w(1.0 / n)])
        ratios.append(embedding_report(f, w, psi).ratio)
    elapsed = time.perf_counter() - t0
    spread = max(ratios) / min(ratios)
    detail = f"ratios {', '.join(f'{r:.4f}' for r in ratios)}; max/min = {spread:.2f} (needs <= 4)"
    verdict(11, spread <= 4, elapsed, 10, detail)


def test_c12_model_space(verdict):
    t0 = time.perf_counter()
    z = dualcyc_gap(FiniteBlaschke([0.0]), YoungFunction.power(2), 8, restarts=4)
    z_err = max(abs(z.dist - 1), abs(z.min_norm - 1))
    theta = FiniteBlaschke([0.0, 0.5])
    rep = dualcyc_gap(theta, YoungFunction.power(2), 16, restarts=4)
    pyth = abs(rep.dist**2 + abs(complex(theta(0.0))) ** 2 - 1)
    spec = RieszProductSpec([3**k for k in range(1, 9)], [0.5] * 8, 2**15)
    mass_err = abs(riesz_product_measure(spec)[1].mass - 1)
    elapsed = time.perf_counter() - t0
    ok = z_err <= 1e-12 and pyth <= 1e-6 and mass_err <= 1e-10
    detail = f"theta=z error {z_err:.1e}, Pythagoras defect {pyth:.1e}, depth-8 mass error {mass_err:.1e}"
    verdict(12, ok, elapsed, 10, detail)
