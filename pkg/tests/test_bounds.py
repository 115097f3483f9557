import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvegen import curves
from servicecurve.bounds import (UNBOUNDED, BoundsReport, closed_form_link_backlog,
                                 closed_form_link_delay, compute_bounds,
                                 horizontal_deviation, min_capacity, min_delay,
                                 pseudo_inverse, vertical_deviation)
from servicecurve.curve import (INF, CurveError, ZERO, convolve_all, delay_impulse,
                                link_rate, peak_rate_envelope, pointwise_min,
                                rate_latency, token_bucket)

MS = F(1, 1000)
KB = 1000
E_REF = token_bucket(5 * KB, 200 * KB)


def brute_hdev(E, S, ts):
    """Deviation read off a set of trial times, using pseudo_inverse of S."""
    best = F(0)
    for t in ts:
        u = pseudo_inverse(S, E(t))
        if u is INF:
            return INF
        best = max(best, u - t)
    return best


class TestHorizontalDeviation:
    def test_reference_delay(self):
        assert horizontal_deviation(E_REF, rate_latency(400 * KB, 20 * MS)) == F(65, 2000)

    def test_plain_link(self):
        assert horizontal_deviation(E_REF, link_rate(400 * KB)) == F(25, 2000)

    def test_envelope_below_service(self):
        assert horizontal_deviation(link_rate(1), link_rate(2)) == 0
        assert horizontal_deviation(ZERO, rate_latency(1, 5)) == 0

    def test_unbounded_when_rate_too_low(self):
        assert horizontal_deviation(E_REF, link_rate(100 * KB)) is UNBOUNDED

    def test_equal_rates_are_bounded(self):
        assert horizontal_deviation(E_REF, link_rate(200 * KB)) == F(5, 200)

    def test_infinite_envelope_rejected(self):
        with pytest.raises(CurveError):
            horizontal_deviation(delay_impulse(1), link_rate(1))

    def test_impulse_service(self):
        assert horizontal_deviation(E_REF, delay_impulse(20 * MS)) == 20 * MS

    @settings(max_examples=80, deadline=None)
    @given(curves(allow_infinite=False), curves())
    def test_matches_dense_scan(self, E, S):
        d = horizontal_deviation(E, S)
        ts = [F(i, 8) for i in range(0, 8 * 12)]
        scan = brute_hdev(E, S, ts)
        if d is INF:
            return
        assert scan is not INF and scan <= d


class TestVerticalDeviation:
    def test_reference_backlog(self):
        assert vertical_deviation(E_REF, rate_latency(400 * KB, 10 * MS)) == 7 * KB

    def test_envelope_below_service(self):
        assert vertical_deviation(link_rate(1), link_rate(3)) == 0

    def test_unbounded(self):
        assert vertical_deviation(E_REF, link_rate(100 * KB)) is UNBOUNDED

    @settings(max_examples=80, deadline=None)
    @given(curves(allow_infinite=False), curves())
    def test_dominates_samples(self, E, S):
        v = vertical_deviation(E, S)
        if v is INF:
            return
        for i in range(0, 100):
            t = F(i, 8)
            assert E(t) - S(t) <= v


class TestMinDelay:
    def test_rate_latency(self):
        assert min_delay(rate_latency(64 * KB, 20 * MS)) == 20 * MS

    def test_pure_rate(self):
        assert min_delay(link_rate(5)) == 0

    def test_latencies_add(self):
        upper = convolve_all([link_rate(64 * KB), delay_impulse(20 * MS),
                              link_rate(1200 * KB), delay_impulse(25 * MS)])
        assert min_delay(upper) == 45 * MS

    def test_zero_forever(self):
        assert min_delay(ZERO) is INF


class TestMinCapacity:
    def test_examples(self):
        assert min_capacity(E_REF, 10 * MS) == 500 * KB
        assert horizontal_deviation(E_REF, link_rate(500 * KB)) == 10 * MS
        assert min_capacity(E_REF, 35 * MS) == 200 * KB
        assert min_capacity(ZERO, 10 * MS) == 0

    def test_zero_target_with_burst(self):
        assert min_capacity(E_REF, 0) is INF
        assert min_capacity(link_rate(7), 0) == 7

    def test_minimal(self):
        rng = random.Random(9)
        for _ in range(40):
            E = token_bucket(rng.randint(1, 10000), rng.randint(1, 500) * KB)
            if rng.random() < 0.5:
                E = pointwise_min(E, link_rate(rng.randint(501, 900) * KB))
            T = rng.randint(1, 100) * MS
            c = min_capacity(E, T)
            assert horizontal_deviation(E, link_rate(c)) <= T
            assert horizontal_deviation(E, link_rate(c - 1)) > T


class TestClosedForms:
    def test_link_delay_example(self):
        got = closed_form_link_delay(5 * KB, 200 * KB, 400 * KB, 256 * KB)
        assert got == F(5000 * 144000, 256000 * 200000)
        assert got == F(225, 16) * MS

    def test_link_backlog_example(self):
        assert closed_form_link_backlog(5 * KB, 200 * KB, 400 * KB, 256 * KB) == 3600

    def test_edges(self):
        assert closed_form_link_delay(5, 2, 4, 4) == 0
        assert closed_form_link_backlog(5, 2, 4, 4) == 0
        assert closed_form_link_backlog(5, 2, 4, 2) == 5
        assert closed_form_link_delay(5, 2, 4, 1) is INF
        assert closed_form_link_delay(0, 2, 4, 3) == 0

    def test_approaches_burst_over_capacity(self):
        sigma, rho, peak = 5 * KB, 200 * KB, 400 * KB
        near = closed_form_link_delay(sigma, rho, peak, rho + F(1, 10**6))
        assert abs(near - F(sigma) / rho) < F(1, 10**9)

    def test_capacity_must_be_positive(self):
        with pytest.raises(CurveError):
            closed_form_link_delay(1, 1, 2, 0)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 10000), st.integers(0, 500), st.integers(1, 500), st.integers(0, 500))
    def test_matches_deviations(self, sigma, rho, extra, c_off):
        peak = rho + extra
        C = rho + min(c_off, extra)
        if C == 0:
            return
        E = peak_rate_envelope(peak, sigma, rho)
        S = link_rate(C)
        assert closed_form_link_delay(sigma, rho, peak, C) == horizontal_deviation(E, S)
        assert closed_form_link_backlog(sigma, rho, peak, C) == vertical_deviation(E, S)


class TestComputeBounds:
    def test_reference(self):
        b = compute_bounds(E_REF, rate_latency(400 * KB, 20 * MS), link_rate(400 * KB), 10 * MS)
        assert b == BoundsReport(F(0), F(65, 2000), F(9000), F(500 * KB))

    def test_min_delay_from_upper(self):
        b = compute_bounds(E_REF, rate_latency(400 * KB, 30 * MS), rate_latency(400 * KB, 20 * MS))
        assert b.d_min == 20 * MS

    def test_zero_envelope(self):
        b = compute_bounds(ZERO, rate_latency(400 * KB, 20 * MS), rate_latency(400 * KB, 20 * MS))
        assert (b.d_min, b.d_max, b.b_max) == (0, 0, 0)

    def test_report_validation(self):
        with pytest.raises(CurveError):
            BoundsReport(F(2), F(1), F(0))
        with pytest.raises(CurveError):
            BoundsReport(F(0), F(1), F(-1))

    def test_monotone_in_service_and_envelope(self):
        rng = random.Random(4)
        for _ in range(50):
            sigma, rho = rng.randint(0, 5000), rng.randint(0, 300)
            E = token_bucket(sigma, rho)
            E_big = token_bucket(sigma + rng.randint(0, 100), rho + rng.randint(0, 50))
            rate, lat = rng.randint(301, 600), F(rng.randint(0, 20), 10)
            S = rate_latency(rate, lat)
            # more rate and less latency: pointwise larger
            S_big = rate_latency(rate + rng.randint(0, 100), lat * F(rng.randint(0, 10), 10))
            base = compute_bounds(E, S)
            better = compute_bounds(E, S_big)
            worse = compute_bounds(E_big, S)
            assert better.d_max <= base.d_max and better.b_max <= base.b_max
            assert worse.d_max >= base.d_max and worse.b_max >= base.b_max
