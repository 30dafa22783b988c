"""Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are printed
even when output capture is on.
"""
import io
import json
import math
import time
import warnings

import numpy as np
import pytest

from hormander.bvp import (
    DiskBvpProblem,
    apply_operator,
    apriori_probe,
    fredholm_report,
    mode_rank_analysis,
    regularity_probe,
    solvability_residuals,
    solve,
)
from hormander.cli import run
from hormander.disk import random_field
from hormander.green import GreenCheckInput, green_residual
from hormander.interpolation import build_psi, check_direct_sum, interp_norm
from hormander.spectra import CircleSpectrum, LatticeSpectrum, hnorm
from hormander.weights import Oscillating, Power, PowerLog, Product, embed_criterion, estimate_indices


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, ok: bool, detail: str, elapsed: float, budget: float):
        within = elapsed < budget
        status = "PASS" if ok and within else "FAIL"
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {status}  {title}: {detail}; {elapsed:.2f}s (budget {budget:g}s)")
        assert ok, detail
        assert within, f"runtime {elapsed:.2f}s exceeds {budget}s"

    return emit


def _random_circle(rng, K):
    return CircleSpectrum(K, rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1))


def test_criterion_01_fredholm_cli(verdict):
    t0 = time.perf_counter()
    buf = io.StringIO()
    code = run(["bvp", "fredholm", "--m", "2"], stdout=buf)
    rep = json.loads(buf.getvalue())
    elapsed = time.perf_counter() - t0
    got = (rep["kernel_dim"], rep["cokernel_dim"], rep["index"])
    verdict(1, "Fredholm structure m=2", code == 0 and got == (3, 3, 0), f"exit {code}, (dim N, dim N*, index) = {got}",
            elapsed, 1.0)


def test_criterion_02_index_family(verdict):
    t0 = time.perf_counter()
    bad = []
    for m in range(2, 7):
        for K in range(m - 1, 65):
            rep = fredholm_report(m, K)
            oracle = mode_rank_analysis(m, K)
            want = 2 * m - 1
            if (rep["kernel_dim"], rep["cokernel_dim"], rep["index"]) != (want, want, 0) or (
                oracle["kernel_dim"], oracle["cokernel_dim"]) != (want, want):
                bad.append((m, K, rep, oracle))
    elapsed = time.perf_counter() - t0
    verdict(2, "index family m=2..6, K=m-1..64", not bad,
            f"{len(bad)} mismatches against 2m-1 and the rank oracle", elapsed, 5.0)


def test_criterion_03_green_formula(verdict):
    t0 = time.perf_counter()
    K, R = 16, 12
    worst, worst_drop, floor_pairs = 0.0, math.inf, []
    for seed in range(50):
        rng = np.random.default_rng(seed)
        u = random_field(K, R, seed, 0, decay=1.0)
        v = random_field(K, R, seed, 1, decay=1.0)
        w, h = _random_circle(rng, K), _random_circle(rng, K)
        res128 = green_residual(GreenCheckInput(u, v, w, h, 128, 128))
        worst = max(worst, res128)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            coarse = green_residual(GreenCheckInput(u, v, w, h, 16, 16))
        fine = green_residual(GreenCheckInput(u, v, w, h, 32, 32))
        worst_drop = min(worst_drop, coarse / max(fine, 1e-300))
        if seed < 3:
            floor_pairs.append((res128, green_residual(GreenCheckInput(u, v, w, h, 256, 256))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and worst_drop >= 1e2
    floors = ", ".join(f"{a:.1e}->{b:.1e}" for a, b in floor_pairs)
    verdict(3, "special Green formula", ok,
            f"max residual at 128x128 = {worst:.2e} (<= 1e-8); min drop 16->32 = {worst_drop:.1e} (>= 1e2); "
            f"128->256 already at rounding: {floors}", elapsed, 30.0)


def test_criterion_04_interpolation_norm_identity(verdict):
    t0 = time.perf_counter()
    setups = [
        build_psi(Power(1.2), 0.0, 2.0),
        build_psi(PowerLog(1.0, (1.0,)), 0.0, 2.0),
        build_psi(Oscillating(3.0, 0.1, 1.0), 2.5, 3.5),
        build_psi(Oscillating(1.0, 0.2, 0.5), 0.0, 2.0),
        build_psi(Product(Power(1.0), PowerLog(0.0, (2.0,))), 0.5, 1.5),
    ]
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(100):
        w = _random_circle(rng, 64) if i % 2 else LatticeSpectrum(2, 8, rng.standard_normal((17, 17)))
        for setup in setups:
            ref = hnorm(w, setup.alpha)
            worst = max(worst, abs(interp_norm(w, setup) - ref) / ref)
    elapsed = time.perf_counter() - t0
    verdict(4, "interpolation norm identity", worst <= 1e-12, f"max relative gap {worst:.2e} (<= 1e-12)",
            elapsed, 5.0)


def test_criterion_05_direct_sum(verdict):
    t0 = time.perf_counter()
    setup = build_psi(Oscillating(3.0, 0.1, 1.0), 2.5, 3.5)
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(20):
        trip = [_random_circle(rng, int(rng.integers(1, 40))) for _ in range(3)]
        total = math.sqrt(sum(interp_norm(w, setup) ** 2 for w in trip))
        worst = max(worst, check_direct_sum([setup] * 3, trip) / total)
    elapsed = time.perf_counter() - t0
    verdict(5, "direct-sum identity", worst <= 1e-12, f"max relative residual {worst:.2e} (<= 1e-12)", elapsed, 1.0)


def test_criterion_06_matuszewska_indices(verdict):
    t0 = time.perf_counter()
    osc = estimate_indices(Oscillating(1.0, 0.5, 1.0), 1e8)
    pw = estimate_indices(Power(2.0), 1e8)
    pl = estimate_indices(PowerLog(1.0, (5.0,)), 1e8)
    elapsed = time.perf_counter() - t0
    checks = {
        "oscillating": (osc, (0.5, 1.5), 0.05),
        "power": (pw, (2.0, 2.0), 1e-6),
        "powerlog": (pl, (1.0, 1.0), 0.1),
    }
    parts, ok = [], True
    for name, (est, (a, b), tol) in checks.items():
        err = max(abs(est.sigma0 - a), abs(est.sigma1 - b))
        good = err <= tol
        ok &= good
        parts.append(f"{name} ({est.sigma0:.4f}, {est.sigma1:.4f}) vs ({a:g}, {b:g}) err {err:.2e} "
                     f"tol {tol:g} {'ok' if good else 'MISS'}")
    verdict(6, "Matuszewska index estimates at t_max=1e8", ok, "; ".join(parts), elapsed, 10.0)


def test_criterion_07_embedding_truth_table(verdict):
    t0 = time.perf_counter()
    rows = []
    ok = True
    for s in (0.5, 1.0, 1.5, 2.0):
        status = embed_criterion(Power(s), 0, 2).status
        want = "converges" if s > 1 else "diverges"
        ok &= status == want
        rows.append(f"s={s:g}:{status}")
    T = 1e4
    for r, want in ((0.4, "diverges"), (1.0, "converges")):
        v = embed_criterion(PowerLog(1.0, (r,)), 0, 2, t_cut=T)
        # 1/(t ln^{2r} t) on [e, T]: antiderivative ln^{1-2r} t / (1-2r); t/e^2 on [1, e]
        oracle = (1 - math.e**-2) / 2 + (math.log(T) ** (1 - 2 * r) - 1) / (1 - 2 * r)
        ok &= v.status == want and abs(v.partial_integral - oracle) <= 1e-8 * oracle
        rows.append(f"powerlog r={r:g}:{v.status} (partial {v.partial_integral:.6f} vs {oracle:.6f})")
    elapsed = time.perf_counter() - t0
    verdict(7, "embedding criterion truth table", ok, ", ".join(rows), elapsed, 1.0)


def test_criterion_08_solver_round_trip(verdict):
    t0 = time.perf_counter()
    K, R, m = 32, 12, 2
    worst_err, worst_res = 0.0, 0.0
    for trial in range(100):
        u = random_field(K, R, 8, trial, decay=2.0).orthogonalize(m)
        f, g = apply_operator(u, m)
        rep = solve(DiskBvpProblem(m, f, g))
        worst_err = max(worst_err, (rep.solution - u).l2_norm() / u.l2_norm())
        scale = f.l2_norm() + math.sqrt(2 * math.pi) * float(np.linalg.norm(g.coefficients))
        worst_res = max(worst_res, max(abs(z) for z in solvability_residuals(f, g, m)) / scale)
    elapsed = time.perf_counter() - t0
    ok = worst_err <= 1e-8 and worst_res <= 1e-8
    verdict(8, "solver round trip m=2, K=32", ok,
            f"max relative L2 error {worst_err:.2e} (<= 1e-8); max residual/scale {worst_res:.2e} (<= 1e-8)",
            elapsed, 60.0)


def test_criterion_09_apriori_probe(verdict):
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = apriori_probe(100, 3, 1, seed=9, m=2, K=32)["max_ratio"]
        b = apriori_probe(100, 3, 1, seed=9, m=2, K=64)["max_ratio"]
    elapsed = time.perf_counter() - t0
    change = abs(b - a) / a
    ok = math.isfinite(a) and math.isfinite(b) and change <= 0.10
    verdict(9, "a priori probe s=3, lambda=1, m=2", ok,
            f"max ratio K=32 {a:.6f}, K=64 {b:.6f}, change {100 * change:.3f}% (<= 10%); "
            "the constant itself is not a reproducible number", elapsed, 120.0)


def test_criterion_10_regularity_threshold(verdict):
    t0 = time.perf_counter()
    ladder_K = (16, 32, 64, 128)
    n7, n8, oracle8 = [], [], []
    for K in ladder_K:
        tab = regularity_probe(6.0, m=2, K=K, orders=[0], ladder=(7.0, 8.0))["trace_norm_table"]
        n7.append(tab["j=0|power(s=7)"])
        n8.append(tab["j=0|power(s=8)"])
        k = np.arange(2, K + 1, dtype=float)
        uk = (1 + k * k) ** -3.0 / (k * (k - 1))  # mode decay oracle, ~<k>^-8
        oracle8.append(math.sqrt(2 * math.pi * 2 * np.sum((1 + k * k) ** 8.0 * uk**2)))
    elapsed = time.perf_counter() - t0
    stable7 = abs(n7[-1] - n7[-2]) / n7[-1]
    growth = [b / a for a, b in zip(n8, n8[1:])]
    match = max(abs(a - b) / b for a, b in zip(n8, oracle8))
    ok = stable7 <= 1e-2 and all(g > 1 for g in growth) and match <= 1e-10
    verdict(10, "regularity threshold g_k=<k>^-6, m=2", ok,
            f"t=7 change 64->128 {100 * stable7:.3f}% (<= 1%); t=8 growth per doubling "
            f"{', '.join(f'{g:.3f}' for g in growth)} (> 1, oracle sqrt 2 asymptotically); "
            f"t=8 vs mode-decay oracle {match:.1e}", elapsed, 10.0)
