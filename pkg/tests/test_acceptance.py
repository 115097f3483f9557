"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary (see conftest.py), or directly when this file is run as a
script.
"""

import random
import sys
import time
from fractions import Fraction as F

import numpy as np

from curvegen import random_curve
from servicecurve import oracle
from servicecurve.bounds import (BoundsReport, closed_form_link_backlog,
                                 closed_form_link_delay, compute_bounds,
                                 horizontal_deviation, min_capacity, vertical_deviation)
from servicecurve.curve import (Curve, Segment, delay_impulse, link_rate, peak_rate_envelope,
                                pointwise_le, pointwise_min, rate_latency, token_bucket)
from servicecurve.scenario import (mns_supported, reproduce_tables,
                                   sessions_supported, shortcut_bounds, transmission_delay)
from servicecurve.units import fmt_time

MS = F(1, 1000)
KB = 1000
KBPS = 1000

RESULTS = []


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
    RESULTS.append(line)
    assert ok, line


def test_01_table3_mns_supported():
    got = [mns_supported(F("1.2") * 10**6, r * KBPS) for r in (64, 128, 256)]
    record(1, "MNs supported per uplink", got == [18, 9, 4], f"got {got}, want [18, 9, 4]")


def test_02_table2_sessions():
    got = [sessions_supported(r * KBPS, 8 * KBPS) for r in (64, 128, 256)]
    record(2, "voice sessions per link", got == [8, 16, 32], f"got {got}, want [8, 16, 32]")


def test_03_shortcut_bounds():
    s = shortcut_bounds(5 * KB, 200 * KBPS, 20 * MS, 400 * KBPS)
    tx = transmission_delay(8 * KB, F("1.2") * 10**6)
    checks = {
        "min delay 20 ms": s["min_delay"] == 20 * MS,
        "max delay 32.5 ms": s["max_delay"] == F(65, 2000),
        "transmission exact 1/150 s": tx == F(1, 150),
        "transmission renders 6.67 ms": f"{float(tx * 1000):.2f} ms" == "6.67 ms",
        "transmission 6 sig figs": fmt_time(tx) == "6.66667 ms",
    }
    bad = [k for k, v in checks.items() if not v]
    record(3, "closed-form worked-example values", not bad,
           "all exact" if not bad else f"failed: {bad}")


REQUIRED_LEDGER = {
    "table1.min_delay.128": 14 * MS,
    "table1.min_delay.256": 12 * MS,
    "table1.buffer.64": 14 * KB,
    "table1.buffer.128": 56 * KB,
    "table1.buffer.256": 100 * KB,
    "table2.buffer.64": 130 * KB,
    "table2.buffer.128": 250 * KB,
    "table2.buffer.256": 500 * KB,
    "worked.max_buffer": 14 * KB,
    "worked.upper_intercept": F("-72.8") * KB,
    "worked.lower_intercept": F("-26.4") * KB,
}


def test_04_discrepancy_ledger():
    tables = reproduce_tables()
    by_key = {d.key: d for d in tables.discrepancies}
    problems = []
    for key, published in REQUIRED_LEDGER.items():
        d = by_key.get(key)
        if d is None:
            problems.append(f"{key} missing")
            continue
        if d.published != published or not d.citation:
            problems.append(f"{key} published/citation wrong")
        if d.probe is None:
            problems.append(f"{key} has no oracle probe")
            continue
        value, tol = oracle.measure(d.probe)
        if abs(value - float(d.computed)) > tol + 1e-9:
            problems.append(f"{key} oracle {value:.6g} vs computed {float(d.computed):.6g}")
    record(4, "discrepancy ledger, oracle-checked", not problems,
           f"{len(REQUIRED_LEDGER)} entries verified" if not problems else "; ".join(problems))


def test_05_algebra_laws():
    rng = random.Random(20240501)
    n = 1000
    failures = []
    for i in range(n):
        f, g, h = (random_curve(rng, 3) for _ in range(3))
        a, b = F(rng.randint(0, 12), 4), F(rng.randint(0, 12), 4)
        fg = f * g
        if fg != g * f:
            failures.append(("commutativity", i))
        if fg * h != f * (g * h):
            failures.append(("associativity", i))
        if f * delay_impulse(0) != f:
            failures.append(("identity", i))
        if f * delay_impulse(a) * delay_impulse(b) != f * delay_impulse(a + b):
            failures.append(("shift composition", i))
        if pointwise_min(f, g) * h != pointwise_min(f * h, g * h):
            failures.append(("distributivity", i))
        # isotonicity: min(f, h) <= f and min(g, h) <= g
        if not pointwise_le(pointwise_min(f, h) * pointwise_min(g, h), fg):
            failures.append(("isotonicity", i))
    record(5, "min-plus laws on random curve triples", not failures,
           f"{n} triples, 6 laws exact" if not failures else f"first failures {failures[:3]}")


def test_06_rate_latency_composition():
    rng = random.Random(6)
    bad = 0
    for _ in range(1000):
        r1, r2 = rng.randint(1, 2000) * KBPS, rng.randint(1, 2000) * KBPS
        t1, t2 = rng.randint(0, 100) * MS / 2, rng.randint(0, 100) * MS / 2
        if rate_latency(r1, t1) * rate_latency(r2, t2) != rate_latency(min(r1, r2), t1 + t2):
            bad += 1
    instance_ok = all(
        rate_latency(64 * KBPS, 20 * MS) * rate_latency(400 * KBPS, phi)
        == rate_latency(64 * KBPS, 20 * MS + phi)
        for phi in (MS, 10 * MS))
    record(6, "rate-latency composition", bad == 0 and instance_ok,
           f"1000 random pairs, {bad} mismatches; reference instance "
           f"{'ok' if instance_ok else 'WRONG'}")


def _compress(f: Curve, k: F) -> Curve:
    """f(t / k): same values, time axis scaled by k."""
    return Curve([Segment(s.start * k, s.value, s.right,
                          None if s.slope is None else s.slope / k) for s in f.segments])


def test_07_oracle_equivalence():
    rng = random.Random(7)
    # 1/97 puts breakpoints off the 0.1 ms grid, so the grid error is not trivially 0
    step, k = F(1, 10000), F(1, 97)
    worst = 0.0
    bad = 0
    for _ in range(200):
        f = _compress(random_curve(rng, continuous=True), k)
        g = _compress(random_curve(rng, continuous=True), k)
        horizon = max(f.breakpoints[-1], g.breakpoints[-1]) + 2 * k
        exact = oracle.sample(f * g, horizon, step).values
        grid = oracle.grid_convolve(f, g, horizon, step).values
        tol = oracle.grid_tolerance(f, g, step)
        err = float(np.max(np.abs(exact - grid)))
        worst = max(worst, err / tol if tol else err)
        if err > tol + 1e-9:
            bad += 1
    record(7, "grid convolution vs exact convolution", bad == 0,
           f"200 pairs at step 0.1 ms, {bad} outside step*slope, worst err/tol {worst:.3f}")


def test_08_bound_dominance():
    rng = random.Random(8)
    step, horizon = F(1, 1000), F(1, 2)
    failures = []
    for i in range(120):
        case = oracle.random_feasible_case(rng, step)
        verdict, _, _ = oracle.verify_case(case.envelope, case.lower, case.upper, horizon, step)
        if not verdict.passed:
            failures.append((i, verdict.message))
    # negative control: a halved d_max must be caught with a witness
    E, S = token_bucket(5 * KB, 200 * KBPS), rate_latency(400 * KBPS, 20 * MS)
    good = compute_bounds(E, S, S)
    bad_report = BoundsReport(F(0), good.d_max / 2, good.b_max)
    control, _, _ = oracle.verify_case(E, S, S, horizon, F(1, 10000), bad_report)
    caught = not control.passed and control.witness is not None
    record(8, "simulated delay/backlog inside analytic bounds", not failures and caught,
           f"120 random scenarios, {len(failures)} violations; halved-bound control "
           f"{'caught: ' + control.message if caught else 'NOT caught'}")


def test_09_min_capacity_minimality():
    rng = random.Random(9)
    bad = []
    for i in range(100):
        sigma, rho = rng.randint(0, 20000), rng.randint(1, 1000) * KBPS
        E = token_bucket(sigma, rho)
        if rng.random() < 0.4:
            E = pointwise_min(E, link_rate(rho + rng.randint(1, 1000) * KBPS))
        T = rng.randint(1, 200) * MS
        c = min_capacity(E, T)
        if not (horizontal_deviation(E, link_rate(c)) <= T
                and horizontal_deviation(E, link_rate(c - 1)) > T):
            bad.append(i)
    record(9, "C_min is the least rate meeting the target delay", not bad,
           f"100 cases, {len(bad)} non-minimal" + (f" {bad[:5]}" if bad else ""))


def test_10_closed_form_cross_check():
    rng = random.Random(10)
    bad = 0
    for _ in range(1000):
        rho = F(rng.randint(1, 1000) * KBPS)
        peak = rho + rng.randint(1, 1000) * KBPS
        C = F(rng.randint(int(rho), int(peak)))  # rho <= C <= peak
        sigma = F(rng.randint(0, 50000))
        E, S = peak_rate_envelope(peak, sigma, rho), link_rate(C)
        if closed_form_link_delay(sigma, rho, peak, C) != horizontal_deviation(E, S):
            bad += 1
        if closed_form_link_backlog(sigma, rho, peak, C) != vertical_deviation(E, S):
            bad += 1
    record(10, "closed-form link delay/backlog vs deviations", bad == 0,
           f"1000 tuples, {bad} mismatches")


if __name__ == "__main__":
    start = time.perf_counter()
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    print("\n".join(RESULTS))
    print(f"{10 - failed}/10 criteria passed in {time.perf_counter() - start:.1f} s")
    sys.exit(1 if failed else 0)
