"""Brute-force checks for the exact algebra: grid convolution and a greedy
source feeding the slowest server its lower service curve allows.

Nothing here reuses the breakpoint machinery of :mod:`servicecurve.curve`
beyond point evaluation, so agreement between the two is real evidence.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from . import curve as c
from . import elements as el
from .bounds import BoundsReport, compute_bounds
from .curve import INF, Curve, CurveError, Number, to_fraction

DEFAULT_STEP = Fraction(1, 10000)
DEFAULT_HORIZON = Fraction(2)

# float comparisons on values that were exact rationals before sampling
_REL_TOL = 1e-9


@dataclass
class SampledCurve:
    step: Fraction
    horizon: Fraction
    values: np.ndarray

    def __post_init__(self):
        if len(self.values) != grid_size(self.horizon, self.step):
            raise CurveError("sample count does not match horizon / step")

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.values)) * float(self.step)

    def __len__(self):
        return len(self.values)


def grid_size(horizon: Number, step: Number) -> int:
    horizon, step = to_fraction(horizon), to_fraction(step)
    if step <= 0:
        raise CurveError("grid step must be > 0")
    if horizon < 0:
        raise CurveError("horizon must be >= 0")
    return int(horizon // step) + 1


def sample(f: Curve, horizon: Number, step: Number) -> SampledCurve:
    """f at t = i*step for i = 0 .. horizon/step, as floats (inf allowed)."""
    horizon, step = to_fraction(horizon), to_fraction(step)
    n = grid_size(horizon, step)
    vals = np.empty(n)
    segs = f.segments
    idx = np.arange(n)
    for k, s in enumerate(segs):
        lo = -(-s.start // step)  # first grid index at or after the start
        hi = n if k + 1 == len(segs) else min(n, -(-segs[k + 1].start // step))
        if lo >= hi:
            continue
        if s.right is INF:
            vals[lo:hi] = np.inf
        else:
            offset = idx[lo:hi] * float(step) - float(s.start)
            vals[lo:hi] = float(s.right) + float(s.slope) * offset
        if lo * step == s.start:
            vals[lo] = np.inf if s.value is INF else float(s.value)
    return SampledCurve(step, horizon, vals)


def _grid_min_plus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = len(a)
    out = a[0] + b
    for j in range(1, n):
        np.minimum(out[j:], a[j] + b[:n - j], out=out[j:])
    return out


def grid_convolve(f: Curve, g: Curve, horizon: Number, step: Number) -> SampledCurve:
    """out[i] = min over 0 <= j <= i of f(j*step) + g((i - j)*step)."""
    fs, gs = sample(f, horizon, step), sample(g, horizon, step)
    return SampledCurve(fs.step, fs.horizon, _grid_min_plus(fs.values, gs.values))


def grid_tolerance(f: Curve, g: Curve, step: Number) -> float:
    """step * the largest finite slope of either curve."""
    slopes = [s.slope for h in (f, g) for s in h.segments if s.slope is not None]
    return float(to_fraction(step) * max(slopes, default=0))


@dataclass
class SimulationTrace:
    arrivals: SampledCurve
    departures: SampledCurve
    backlog: np.ndarray
    virtual_delay: np.ndarray  # seconds; NaN where no new data arrives or never served
    truncated: bool = False
    max_slope: float = 0.0

    @property
    def step(self) -> Fraction:
        return self.arrivals.step

    @property
    def max_backlog(self) -> float:
        return float(self.backlog.max(initial=0.0))

    @property
    def max_virtual_delay(self) -> float:
        d = self.virtual_delay[~np.isnan(self.virtual_delay)]
        return float(d.max(initial=0.0))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "arrivals", "departures", "backlog", "virtual_delay"])
            for t, a, d, b, v in zip(self.arrivals.times, self.arrivals.values,
                                     self.departures.values, self.backlog,
                                     self.virtual_delay):
                w.writerow([repr(float(t)), _fmt(a), _fmt(d), _fmt(b),
                            "" if np.isnan(v) else repr(float(v))])


def _fmt(x) -> str:
    return "inf" if np.isinf(x) else repr(float(x))


def simulate_greedy(E: Curve, S_lower: Curve, S_upper: Curve,
                    horizon: Number = DEFAULT_HORIZON,
                    step: Number = DEFAULT_STEP) -> SimulationTrace:
    """Feed a source that emits exactly E into a server that sends exactly
    what S_lower guarantees, and measure backlog and virtual delay.

    The source is silent before t = 0, so departures are
    min(A, A*S_lower, S_lower): the last term is the split point just before
    the origin, where nothing has arrived yet.
    """
    if not E.is_finite():
        raise CurveError("the envelope must be finite")
    last_break = max(max(h.breakpoints) for h in (E, S_lower, S_upper))
    service = sample(S_lower, horizon, step).values
    return _simulate(E, service, horizon, step, last_break)


def _simulate(E: Curve, service: np.ndarray, horizon, step, last_break) -> SimulationTrace:
    A = sample(E, horizon, step)
    a = A.values
    d = np.minimum(np.minimum(a, _grid_min_plus(a, service)), service)
    D = SampledCurve(A.step, A.horizon, d)
    backlog = a - d

    n = len(a)
    delay = np.full(n, np.nan)
    scale = max(1.0, float(np.max(a)))
    fresh = np.empty(n, dtype=bool)
    fresh[0] = a[0] > 0
    fresh[1:] = a[1:] > a[:-1] + _REL_TOL * scale
    unresolved = False
    st = float(A.step)
    for i in np.flatnonzero(fresh):
        k = int(np.searchsorted(d, a[i] - _REL_TOL * scale, side="left"))
        if k >= n:
            unresolved = True
            continue
        delay[i] = max(k - i, 0) * st

    traffic = bool(fresh.any())
    # too short to see past every corner of the curves, or to see any
    # arriving bit leave
    truncated = (to_fraction(horizon) <= last_break
                 or (traffic and unresolved and np.all(np.isnan(delay))))
    slopes = [s.slope for s in E.segments if s.slope is not None]
    return SimulationTrace(A, D, backlog, delay, bool(truncated),
                           float(max(slopes, default=0)))


@dataclass
class Verdict:
    passed: bool
    message: str
    witness: Optional[Tuple[str, float, float, float]] = None  # (kind, t, measured, bound)

    def __bool__(self):
        return self.passed


def check_dominance(trace: SimulationTrace, report: BoundsReport) -> Verdict:
    """Measured backlog and every measured virtual delay must sit inside the
    analytic bounds, up to one grid step."""
    st = float(trace.step)
    times = trace.arrivals.times
    eps = 1e-9
    b_max = report.b_max
    if b_max is not INF:
        slack = st * trace.max_slope + _REL_TOL * max(1.0, float(b_max)) + eps
        over = np.flatnonzero(trace.backlog > float(b_max) + slack)
        if len(over):
            i = int(over[0])
            return Verdict(False, f"backlog {trace.backlog[i]:.6g} exceeds "
                                  f"b_max {float(b_max):.6g} at t = {times[i]:.6g} s",
                           ("backlog", float(times[i]), float(trace.backlog[i]), float(b_max)))
    measured = np.flatnonzero(~np.isnan(trace.virtual_delay))
    vd = trace.virtual_delay
    if report.d_max is not INF:
        hi = float(report.d_max) + st + eps
        bad = measured[vd[measured] > hi]
        if len(bad):
            i = int(bad[0])
            return Verdict(False, f"virtual delay {vd[i]:.6g} s exceeds d_max "
                                  f"{float(report.d_max):.6g} s at t = {times[i]:.6g} s",
                           ("d_max", float(times[i]), float(vd[i]), float(report.d_max)))
    if report.d_min is not INF:
        lo = float(report.d_min) - st - eps
        bad = measured[vd[measured] < lo]
        if len(bad):
            i = int(bad[0])
            return Verdict(False, f"virtual delay {vd[i]:.6g} s is below d_min "
                                  f"{float(report.d_min):.6g} s at t = {times[i]:.6g} s",
                           ("d_min", float(times[i]), float(vd[i]), float(report.d_min)))
    note = " (truncated horizon)" if trace.truncated else ""
    return Verdict(True, f"all {len(measured)} delay samples and backlog within bounds{note}")


@dataclass
class RandomCase:
    envelope: Curve
    elements: List[el.NetworkElement] = field(default_factory=list)

    @property
    def lower(self) -> Curve:
        return el.tandem_lower(self.elements)

    @property
    def upper(self) -> Curve:
        return el.tandem_upper(self.elements)


def random_feasible_case(rng: random.Random, step: Number = Fraction(1, 1000)) -> RandomCase:
    """A random wireless-style chain (link, propagation, router) and a token
    bucket (sometimes peak-limited) whose sustained rate fits every server.

    Latencies land on multiples of *step* so the grid sees the corners.
    """
    step = to_fraction(step)
    link = Fraction(rng.randint(8, 64) * 1000)
    router = Fraction(rng.randint(64, 512) * 1000)
    prop = step * rng.randint(0, 30)
    proc = step * rng.randint(0, 15)
    elems = [el.WirelessLink(link), el.PropagationDelay(prop), el.AccessRouter(router, proc)]
    if rng.random() < 0.3:
        elems.append(el.WiredLink(Fraction(rng.randint(64, 1200) * 1000)))
        elems.append(el.PropagationDelay(step * rng.randint(0, 30)))
    rate_cap = min(el.rate_of(e) for e in elems if el.rate_of(e) is not None)
    rho = rate_cap * Fraction(rng.randint(0, 100), 100)
    sigma = Fraction(rng.randint(0, 8000))
    if rng.random() < 0.3:
        peak = rho + Fraction(rng.randint(1, 200) * 1000)
        env = el.SourceEnvelope(sigma, rho, peak).curve()
    else:
        env = c.token_bucket(sigma, rho)
    return RandomCase(env, elems)


def verify_case(E: Curve, lower: Curve, upper: Curve, horizon: Number = DEFAULT_HORIZON,
                step: Number = DEFAULT_STEP, report: Optional[BoundsReport] = None):
    """Simulate one envelope/server pair and check it against its bounds."""
    if report is None:
        report = compute_bounds(E, lower, upper)
    trace = simulate_greedy(E, lower, upper, horizon, step)
    return check_dominance(trace, report), trace, report


@dataclass(frozen=True)
class Probe:
    """How to re-measure one computed quantity by brute force.

    kinds:
      ``zero_until``  -- last grid time at which the grid convolution of
                         *curves* is still 0 (a minimum delay)
      ``max_delay``   -- max virtual delay of *envelope* through *curves*
      ``max_backlog`` -- max backlog of *envelope* through *curves*, times
                         *multiplier*
      ``intercept``   -- constant term of the grid convolution of *curves*,
                         read off its last two samples
    """

    kind: str
    curves: Tuple[Curve, ...]
    envelope: Optional[Curve] = None
    multiplier: Fraction = Fraction(1)


def _grid_chain(curves, horizon, step) -> np.ndarray:
    out = sample(curves[0], horizon, step).values
    for h in curves[1:]:
        out = _grid_min_plus(out, sample(h, horizon, step).values)
    return out


def measure(probe: Probe, horizon: Number = Fraction(1, 2),
            step: Number = Fraction(1, 10000)) -> Tuple[float, float]:
    """Brute-force value of *probe* and the grid tolerance it carries."""
    step = to_fraction(step)
    st = float(step)
    slope = max([float(s.slope) for h in probe.curves for s in h.segments
                 if s.slope is not None], default=0.0)
    if probe.kind == "zero_until":
        vals = _grid_chain(probe.curves, horizon, step)
        zeros = np.flatnonzero(vals <= 0)
        # zero set is an initial run; its sup is within a step of the last zero
        return float(zeros[-1]) * st if len(zeros) else 0.0, st
    if probe.kind == "intercept":
        vals = _grid_chain(probe.curves, horizon, step)
        n = len(vals)
        t1, t2 = (n - 2) * st, (n - 1) * st
        k = (vals[-1] - vals[-2]) / (t2 - t1)
        return float(vals[-1] - k * t2), 2 * st * slope + 1e-6
    service = _grid_chain(probe.curves, horizon, step)
    last_break = max(max(h.breakpoints) for h in probe.curves + (probe.envelope,))
    trace = _simulate(probe.envelope, service, horizon, step, last_break)
    if probe.kind == "max_delay":
        return trace.max_virtual_delay, st
    if probe.kind == "max_backlog":
        m = float(probe.multiplier)
        return trace.max_backlog * m, m * st * max(slope, trace.max_slope) + 1e-6
    raise ValueError(f"unknown probe kind {probe.kind!r}")
