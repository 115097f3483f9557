import random
from fractions import Fraction as F

import pytest

from servicecurve import elements as el
from servicecurve.curve import (CurveError, delay_impulse, link_rate, pointwise_le,
                                rate_latency, token_bucket)

MS = F(1, 1000)
KB = 1000


def random_element(rng):
    kind = rng.randrange(5)
    if kind == 0:
        return el.WirelessLink(rng.randint(1, 500) * KB)
    if kind == 1:
        return el.WiredLink(rng.randint(1, 2000) * KB)
    if kind == 2:
        return el.PropagationDelay(rng.randint(0, 40) * MS)
    if kind == 3:
        return el.AccessRouter(rng.randint(1, 800) * KB, rng.randint(0, 20) * MS)
    return el.Multiplexer(rng.randint(1, 64) * KB, rng.randint(1, 2000))


class TestElementCurves:
    def test_wireless_link(self):
        pair = el.element_curves(el.WirelessLink(64 * KB))
        assert pair.lower == pair.upper == link_rate(64 * KB)

    def test_propagation(self):
        pair = el.element_curves(el.PropagationDelay(25 * MS))
        assert pair.lower == pair.upper == delay_impulse(25 * MS)

    def test_multiplexer(self):
        m = el.Multiplexer(8 * KB, 80)
        assert m.max_wait == 10 * MS
        pair = el.element_curves(m)
        assert pair.lower == delay_impulse(10 * MS)
        assert pair.upper == delay_impulse(0)

    def test_access_router(self):
        pair = el.element_curves(el.AccessRouter(400 * KB, 10 * MS))
        assert pair.lower == rate_latency(400 * KB, 10 * MS)
        assert pair.upper == link_rate(400 * KB)
        # the published constant corresponds to a 1 ms latency
        assert el.element_curves(el.AccessRouter(400 * KB, MS)).lower.tail_intercept() == -400

    def test_source_envelope_is_not_a_server(self):
        with pytest.raises(CurveError):
            el.element_curves(el.SourceEnvelope(5 * KB, 200 * KB))

    def test_source_envelope_curve(self):
        assert el.SourceEnvelope(5 * KB, 200 * KB).curve() == token_bucket(5 * KB, 200 * KB)

    @pytest.mark.parametrize("make", [
        lambda: el.WirelessLink(0),
        lambda: el.WiredLink(-1),
        lambda: el.PropagationDelay(-MS),
        lambda: el.AccessRouter(0, MS),
        lambda: el.Multiplexer(8, 0),
        lambda: el.SourceEnvelope(-1, 2),
    ])
    def test_invalid_parameters(self, make):
        with pytest.raises(CurveError):
            make()

    def test_pair_rejects_crossed_curves(self):
        with pytest.raises(CurveError):
            el.ServiceCurvePair(link_rate(2), rate_latency(2, 1))

    def test_lower_below_upper_for_random_elements(self):
        rng = random.Random(3)
        for _ in range(200):
            pair = el.element_curves(random_element(rng))
            assert pointwise_le(pair.lower, pair.upper)


class TestTandem:
    def test_wireless_segment(self):
        chain = [el.WirelessLink(64 * KB), el.PropagationDelay(20 * MS),
                 el.AccessRouter(400 * KB, 10 * MS)]
        assert el.tandem_lower(chain) == rate_latency(64 * KB, 30 * MS)

    def test_upper_segments(self):
        assert el.tandem_upper([el.WirelessLink(64 * KB), el.PropagationDelay(20 * MS)]) \
            == rate_latency(64 * KB, 20 * MS)
        wired = [el.WiredLink(1200 * KB), el.PropagationDelay(25 * MS)]
        assert el.tandem_lower(wired) == rate_latency(1200 * KB, 25 * MS)

    def test_propagation_delays_add(self):
        got = el.tandem_lower([el.PropagationDelay(2 * MS), el.PropagationDelay(3 * MS)])
        assert got == delay_impulse(5 * MS)

    def test_single_element(self):
        e = el.AccessRouter(400 * KB, 10 * MS)
        assert el.tandem_lower([e]) == el.element_curves(e).lower

    def test_pure_links_take_min_rate(self):
        got = el.tandem_lower([el.WirelessLink(64 * KB), el.WiredLink(1200 * KB)])
        assert got == link_rate(64 * KB)

    def test_empty_tandem_rejected(self):
        with pytest.raises(CurveError):
            el.tandem_lower([])

    def test_permutation_invariant(self):
        rng = random.Random(11)
        for _ in range(40):
            chain = [random_element(rng) for _ in range(rng.randint(1, 4))]
            shuffled = chain[:]
            rng.shuffle(shuffled)
            assert el.tandem_lower(chain) == el.tandem_lower(shuffled)
            assert el.tandem_upper(chain) == el.tandem_upper(shuffled)

    def test_adding_an_element_never_raises_the_lower_curve(self):
        rng = random.Random(5)
        for _ in range(40):
            chain = [random_element(rng) for _ in range(rng.randint(1, 3))]
            longer = chain + [random_element(rng)]
            assert pointwise_le(el.tandem_lower(longer), el.tandem_lower(chain))

    def test_rate_latency_tandem(self):
        rng = random.Random(2)
        for _ in range(30):
            k = rng.randint(1, 5)
            rates = [rng.randint(1, 1000) * KB for _ in range(k)]
            lats = [rng.randint(0, 50) * MS for _ in range(k)]
            chain = [el.AccessRouter(r, t) for r, t in zip(rates, lats)]
            assert el.tandem_lower(chain) == rate_latency(min(rates), sum(lats))

    def test_scale_rates(self):
        e = el.scale_rates(el.AccessRouter(400 * KB, 10 * MS), F(1, 8))
        assert e == el.AccessRouter(50 * KB, 10 * MS)
        assert el.scale_rates(el.PropagationDelay(MS), F(1, 2)) == el.PropagationDelay(MS)
        assert el.rate_of(el.PropagationDelay(MS)) is None
