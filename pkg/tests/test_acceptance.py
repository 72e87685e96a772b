"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is echoed in the terminal summary.
"""

import gc
import itertools
import logging
import math
import time

import numpy as np
import pytest

from irsvlc.approx import lemma1_coeffs
from irsvlc.assign import (KmOptions, assign_rounds, exhaustive_linear, exhaustive_oracle,
                           hungarian_max, iterative_km, random_assignment)
from irsvlc.config import reference_config
from irsvlc.experiments import SweepSpec, random_placement, run_algorithm, run_sweep
from irsvlc.rate import check_assignment, empty_assignment
from irsvlc.scene import build_scene

from conftest import ACCEPTANCE, random_scene, setup

pytestmark = pytest.mark.acceptance


def record(name, ok, detail):
    ACCEPTANCE.append((name, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok


def brute_perm_max(w):
    n = w.shape[0]
    perms = np.array(list(itertools.permutations(range(n))))
    return w[np.arange(n), perms].sum(axis=1).max()


def test_c1_hungarian_brute_force():
    rng = np.random.default_rng(20240101)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(500):
        n = i % 7 + 1
        w = rng.uniform(-10, 10, (n, n))
        worst = max(worst, abs(hungarian_max(w).value - brute_perm_max(w)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 10
    record("1 hungarian", ok, f"500 matrices, max |diff| {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_c2_rounds_match_linearized_oracle():
    logging.getLogger("irsvlc").setLevel(logging.ERROR)
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    scenes, mismatch, worst = 0, 0, 0.0
    for i in range(120):
        n = 4 + i % 6
        scene, g, svc = setup(random_scene(rng, n, n_leds=2, n_users=2))
        res = iterative_km(g, scene, svc)
        w, q = res.approx.weights, res.approx.bias
        _, best = exhaustive_linear(w, q)
        rel = abs(best - res.linearized) / abs(best)
        scenes += 1
        if rel > 1e-9:
            mismatch += 1
            worst = max(worst, rel)
    elapsed = time.perf_counter() - t0
    ok = mismatch == 0 and elapsed < 60
    record("2 rounds vs linearized oracle", ok,
           f"{mismatch}/{scenes} scenes below the linearized optimum "
           f"(worst rel gap {worst:.2e}), {elapsed:.1f} s")
    assert ok


def test_c3_tangent_bound():
    rng = np.random.default_rng(3)
    x = 10 ** rng.uniform(-6, 6, 100_000)
    x0 = 10 ** rng.uniform(-6, 6, 100_000)
    eta, xi = lemma1_coeffs(x0)
    slack = eta * np.log2(x) + xi - np.log2(1 + x)
    at_point = np.abs(eta * np.log2(x0) + xi - np.log2(1 + x0))
    ok = slack.max() <= 1e-12 and at_point.max() <= 1e-12
    record("3 tangent bound", ok,
           f"1e5 pairs, max excess {slack.max():.2e}, max tangency error {at_point.max():.2e}")
    assert ok


def test_c4_constraints_and_round_count():
    rng = np.random.default_rng(4)
    bad_rounds = 0
    for n in range(1, 66):
        for l in range(1, 7):
            g, rounds = assign_rounds(rng.uniform(0, 1, (n, l + 1)))
            check_assignment(g, n, l)
            check_assignment(random_assignment(n, rng, n_leds=l), n, l)
            bad_rounds += rounds != math.ceil(n / (l + 1))
    # full algorithms on physical scenes
    for n in (0, 5, 8, 64):
        scene, gains, svc = setup(build_scene(reference_config(n_units=n)))
        for opts in (KmOptions(), KmOptions(eve_tangent_factor=0.2),
                     KmOptions(strict_weights=True)):
            check_assignment(iterative_km(gains, scene, svc, opts).assignment, n, 4)
        if n <= 8:
            check_assignment(exhaustive_oracle(gains, scene, svc, "exact")[0], n, 4)
    check_assignment(empty_assignment(0, 4), 0, 4)
    ok = bad_rounds == 0
    record("4 constraints", ok, f"N 1..65 x L 1..6 grid, {bad_rounds} wrong round counts")
    assert ok


@pytest.fixture(scope="module")
def power_rows():
    t0 = time.perf_counter()
    out = {}
    for n in (8, 64):
        spec = SweepSpec("power_dbw", list(range(11)), ("proposed", "random", "no-irs"),
                         trials=200, seed=0)
        rows = run_sweep(spec, reference_config(n_units=n))
        out[n] = {a: [r.c_s_bps for r in rows if r.algorithm == a] for a in spec.algorithms}
    return out, time.perf_counter() - t0


def test_c5_power_sweep_trends(power_rows):
    curves, elapsed = power_rows
    c = curves[64]
    gain = (c["proposed"][10] - c["no-irs"][10]) / 1e6
    gain_rand = (c["random"][10] - c["no-irs"][10]) / 1e6
    order = all(p >= r >= b for n in (8, 64)
                for p, r, b in zip(curves[n]["proposed"], curves[n]["random"], curves[n]["no-irs"]))
    ok = 15 <= gain <= 45 and 7 <= gain_rand <= 25 and order and elapsed < 300
    record("5 power sweep", ok,
           f"proposed gain {gain:.1f} Mbps, random gain {gain_rand:.1f} Mbps, "
           f"ordering {'holds' if order else 'broken'} at N=8/64 over 0..10 dBW, {elapsed:.0f} s")
    assert ok


def test_c6_unit_sweep_trends():
    ns = list(range(0, 65, 8))
    curves = {}
    for d in (0.3, 0.5, 0.7):
        rows = run_sweep(SweepSpec("n_units", ns, ("proposed",)), reference_config(reflectance=d))
        curves[d] = [r.c_s_bps for r in rows]
    c = curves[0.5]
    ratio = c[-1] / c[0]
    mono_n = all(b >= a * 0.98 for a, b in zip(c, c[1:]))
    mono_d = all(curves[0.3][i] <= curves[0.5][i] <= curves[0.7][i] for i in range(len(ns)))
    ok = 1.5 <= ratio <= 2.5 and mono_n and mono_d
    record("6 unit sweep", ok,
           f"C_S(64)/C_S(0) = {ratio:.2f}, monotone in N: {mono_n}, monotone in reflectance: {mono_d}")
    assert ok


def _gap(cfg):
    scene, g, svc = setup(build_scene(cfg))
    res = iterative_km(g, scene, svc)
    return abs(res.linearized - res.report.secrecy) / abs(res.report.secrecy)


def test_c7_surrogate_tightness():
    logging.getLogger("irsvlc").setLevel(logging.ERROR)
    gap8 = _gap(reference_config(n_units=8))
    rng = np.random.default_rng(77)
    placed = [random_placement(reference_config(), rng) for _ in range(20)]
    mean = {n: float(np.mean([_gap(apply_n(c, n)) for c in placed])) for n in (8, 64)}
    ok = gap8 <= 0.10 and mean[64] > mean[8]
    record("7 surrogate tightness", ok,
           f"gap at N=8 {gap8:.3f}; mean over 20 placements N=8 {mean[8]:.3f}, N=64 {mean[64]:.3f}")
    assert ok


def apply_n(cfg, n):
    return cfg.model_copy(update={"irs": cfg.irs.model_copy(update={"n_units": n})})


def _best_time(fn, reps):
    fn()                        # warm-up
    best = math.inf
    gc.disable()
    try:
        for _ in range(reps):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
    finally:
        gc.enable()
    return best


def test_c8_complexity_slope():
    # denser wall so 512 units fit; one outer iteration keeps the coefficients fixed
    opts = KmOptions(max_outer=1)
    logging.getLogger("irsvlc").setLevel(logging.ERROR)
    times = {}
    for n, reps in ((64, 25), (512, 5)):
        scene, g, svc = setup(build_scene(reference_config(n_units=n, spacing=0.1)))
        times[n] = _best_time(lambda: iterative_km(g, scene, svc, opts), reps)
    slope = math.log(times[512] / times[64]) / math.log(8)
    ok = 1.3 <= slope <= 2.7
    record("8 complexity", ok,
           f"slope {slope:.2f} ({times[64] * 1e3:.1f} ms at N=64, {times[512] * 1e3:.1f} ms at N=512)")
    assert ok


def test_c9_eve_tangent_insensitivity():
    logging.getLogger("irsvlc").setLevel(logging.ERROR)
    rng = np.random.default_rng(99)
    diffs, base = [], []
    for i in range(20):
        cfg = random_placement(reference_config(), rng)
        prop = run_algorithm(cfg, "proposed")["c_s"]
        blind = run_algorithm(cfg, "proposed-no-eve-sinr", trials=1,
                              rng=np.random.default_rng([99, i]))["c_s"]
        diffs.append(abs(prop - blind))
        base.append(abs(prop))
    ratio = float(np.mean(diffs) / np.mean(base))
    ok = ratio <= 0.05
    record("9 eve tangent insensitivity", ok, f"mean |diff| / mean C_S = {ratio:.4f} over 20 scenes")
    assert ok
