"""Exact piecewise-linear curves and their min-plus algebra.

A :class:`Curve` is a wide-sense increasing function on ``t >= 0`` whose
values are exact rationals (bits) or ``+inf``.  It is stored as an ordered
tuple of :class:`Segment` objects.  Each segment records the value *at* its
start time separately from the limit just *after* it, so both kinds of jump
can be represented: the right-continuous burst of a token bucket at the
origin and the left-continuous jump of a delay impulse to ``+inf``.

All constructors and operations return canonical curves, so two curves are
equal as functions exactly when they compare equal with ``==``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

try:  # exact rationals, just faster; the kernels fall back to Fraction
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

INF = math.inf

Number = Union[int, float, str, Fraction]
Value = Union[Fraction, float]  # Fraction, or INF


class CurveError(ValueError):
    """Raised for malformed curves or out-of-domain parameters."""


def to_fraction(x: Number) -> Fraction:
    """Convert *x* to an exact Fraction.  Floats go through their repr so
    that ``0.01`` becomes ``1/100`` rather than its binary expansion."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not quantities")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise CurveError(f"expected a finite number, got {x!r}")
        return Fraction(repr(x))
    return Fraction(x)


def _value(x) -> Value:
    if type(x) is Fraction:
        return x
    if isinstance(x, float) and math.isinf(x):
        if x < 0:
            raise CurveError("curve values cannot be -inf")
        return INF
    return to_fraction(x)


@dataclass(frozen=True)
class Segment:
    """One piece of a curve, covering ``[start, next start)``.

    ``value`` is f(start), ``right`` is the limit of f just after start and
    on the open interval f(t) = right + slope * (t - start).  ``slope`` is
    ``None`` when ``right`` is infinite.
    """

    start: Fraction
    value: Value
    right: Value
    slope: Optional[Fraction]

    def at(self, t: Fraction) -> Value:
        if t == self.start:
            return self.value
        if self.right == INF:
            return INF
        return self.right + self.slope * (t - self.start)


def _canonical(segments: Sequence[Segment]) -> Tuple[Segment, ...]:
    if not segments:
        raise CurveError("a curve needs at least one segment")
    if segments[0].start != 0:
        raise CurveError("the first segment must start at t = 0")
    out: List[Segment] = []
    for seg in segments:
        start = to_fraction(seg.start)
        # _value maps every infinity onto the INF object, so `is` tests suffice
        value, right = _value(seg.value), _value(seg.right)
        if value is INF:
            right = INF
        if right is INF:
            slope = None
        else:
            if seg.slope is None:
                raise CurveError("finite segment needs a slope")
            slope = _value(seg.slope)
            if slope < 0:
                raise CurveError("slopes must be non-negative")
        if value is not INF:
            if value < 0:
                raise CurveError("curve values must be non-negative")
            if right is not INF and right < value:
                raise CurveError(f"curve decreases at t = {start}")
        if out:
            prev = out[-1]
            if prev.right is INF:
                # everything after an infinite stretch is infinite as well
                break
            if start <= prev.start:
                raise CurveError("segment starts must strictly increase")
            left = prev.right + prev.slope * (start - prev.start)
            if value is not INF and value < left:
                raise CurveError(f"curve decreases at t = {start}")
            if value == left and right == value and slope == prev.slope:
                continue
        out.append(Segment(start, value, right, slope))
    return tuple(out)


class Curve:
    """Immutable canonical piecewise-linear curve.

    >>> tb = token_bucket(5000, 200000)
    >>> tb(Fraction(1, 100))
    Fraction(7000, 1)
    """

    __slots__ = ("segments", "_starts")

    def __init__(self, segments: Iterable[Segment]):
        segs = _canonical(list(segments))
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "_starts", [s.start for s in segs])

    def __setattr__(self, name, value):
        raise AttributeError("Curve is immutable")

    def __eq__(self, other):
        if not isinstance(other, Curve):
            return NotImplemented
        return self.segments == other.segments

    def __hash__(self):
        return hash(self.segments)

    def __repr__(self):
        parts = []
        for s in self.segments:
            if s.right == INF:
                parts.append(f"[{s.start}: {s.value}, then inf]")
            else:
                parts.append(f"[{s.start}: {s.value}|{s.right} +{s.slope}t]")
        return "Curve(" + " ".join(parts) + ")"

    def __call__(self, t: Number) -> Value:
        return evaluate(self, t)

    def __mul__(self, other: "Curve") -> "Curve":
        if not isinstance(other, Curve):
            return NotImplemented
        return min_plus_convolve(self, other)

    @property
    def breakpoints(self) -> List[Fraction]:
        return list(self._starts)

    def left_limit(self, t: Number) -> Value:
        """Limit of f(u) as u increases to t (t > 0)."""
        t = to_fraction(t)
        if t <= 0:
            raise CurveError("left limit needs t > 0")
        i = bisect.bisect_left(self._starts, t) - 1
        seg = self.segments[i]
        if seg.right == INF:
            return INF
        return seg.right + seg.slope * (t - seg.start)

    @property
    def tail(self) -> Segment:
        return self.segments[-1]

    @property
    def ultimate_slope(self) -> Value:
        """Long-run growth rate: the slope of the last segment, or INF when
        the curve is eventually infinite."""
        tail = self.segments[-1]
        return INF if tail.right == INF else tail.slope

    def is_finite(self) -> bool:
        return self.segments[-1].right != INF

    def tail_intercept(self) -> Value:
        """Constant term of the final affine piece, extended back to t = 0.

        For a rate-latency curve R(t - T)+ this is -R*T.
        """
        tail = self.segments[-1]
        if tail.right == INF:
            return INF
        return tail.right - tail.slope * tail.start


# ---------------------------------------------------------------- evaluation

def evaluate(f: Curve, t: Number) -> Value:
    """Exact value of *f* at time *t* (a Fraction or INF)."""
    t = to_fraction(t)
    if t < 0:
        raise CurveError(f"curves are defined on t >= 0, got {t}")
    i = bisect.bisect_right(f._starts, t) - 1
    return f.segments[i].at(t)


# -------------------------------------------------------------- constructors

def _nonneg(name: str, x: Number) -> Fraction:
    x = to_fraction(x)
    if x < 0:
        raise CurveError(f"{name} must be >= 0, got {x}")
    return x


def _positive(name: str, x: Number) -> Fraction:
    x = to_fraction(x)
    if x <= 0:
        raise CurveError(f"{name} must be > 0, got {x}")
    return x


def affine(value: Number, slope: Number) -> Curve:
    v, k = _nonneg("value", value), _nonneg("slope", slope)
    return Curve([Segment(Fraction(0), v, v, k)])


def token_bucket(sigma: Number, rho: Number) -> Curve:
    """sigma + rho*t on t >= 0 (value sigma at the origin)."""
    return affine(_nonneg("sigma", sigma), _nonneg("rho", rho))


def rate_latency(rate: Number, latency: Number) -> Curve:
    """rate * max(0, t - latency)."""
    R = _positive("rate", rate)
    T = _nonneg("latency", latency)
    if T == 0:
        return Curve([Segment(Fraction(0), Fraction(0), Fraction(0), R)])
    zero = Fraction(0)
    return Curve([Segment(zero, zero, zero, zero), Segment(T, zero, zero, R)])


def link_rate(capacity: Number) -> Curve:
    """capacity * t."""
    return rate_latency(_positive("capacity", capacity), 0)


def delay_impulse(d: Number) -> Curve:
    """0 on [0, d] and +inf afterwards; ``delay_impulse(0)`` is the
    identity element of min-plus convolution."""
    d = _nonneg("delay", d)
    zero = Fraction(0)
    if d == 0:
        return Curve([Segment(zero, zero, INF, None)])
    return Curve([Segment(zero, zero, zero, zero), Segment(d, zero, INF, None)])


def peak_rate_envelope(peak: Number, sigma: Number, rho: Number) -> Curve:
    """min(peak*t, sigma + rho*t)."""
    r = _nonneg("peak rate", peak)
    return pointwise_min(affine(0, r), token_bucket(sigma, rho))


def constant(value: Number) -> Curve:
    return affine(value, 0)


ZERO = constant(0)
INFINITE = Curve([Segment(Fraction(0), INF, INF, None)])


def impulse_delay(f: Curve) -> Optional[Fraction]:
    """Return d when *f* is exactly ``delay_impulse(d)``, else None."""
    segs = f.segments
    zero = Fraction(0)
    if len(segs) == 1 and segs[0] == Segment(zero, zero, INF, None):
        return zero
    if (len(segs) == 2 and segs[0] == Segment(zero, zero, zero, zero)
            and segs[1].value == 0 and segs[1].right == INF):
        return segs[1].start
    return None


# ------------------------------------------------------- elementary pieces
#
# A curve is the pointwise minimum of its elementary pieces, each of which is
# +inf outside its own support: isolated points (t, v) and open affine runs
# (a, b) with f = v + k*(t - a).  Every piece is convex, and convolution
# distributes over min, so f*g is the lower envelope of the piece-by-piece
# convolutions, each of which has a closed form.

@dataclass(frozen=True)
class _Point:
    t: Fraction
    v: Fraction


@dataclass(frozen=True)
class _Run:
    a: Fraction
    b: Value  # may be INF
    v: Fraction
    k: Fraction

    def at(self, t):
        return self.v + self.k * (t - self.a)


def _q(x):
    return INF if x == INF else _Q(x.numerator, x.denominator)


def _fr(x):
    if x == INF or type(x) is Fraction:
        return x
    return Fraction(int(x.numerator), int(x.denominator), _normalize=False)


def _pieces(f: Curve):
    points, runs = [], []
    segs = f.segments
    starts = [_Q(s.start.numerator, s.start.denominator) for s in segs]
    for i, s in enumerate(segs):
        if s.value != INF:
            points.append(_Point(starts[i], _q(s.value)))
        if s.right != INF:
            end = starts[i + 1] if i + 1 < len(segs) else INF
            runs.append(_Run(starts[i], end, _q(s.right), _q(s.slope)))
    return points, runs


def _conv_run_run(p: _Run, q: _Run) -> Tuple[List[_Point], List[_Run]]:
    if q.k < p.k:
        p, q = q, p
    a = p.a + q.a
    first_len = p.b - p.a
    if first_len == INF:
        return [], [_Run(a, INF, p.v + q.v, p.k)]
    mid = a + first_len
    mid_v = p.v + q.v + p.k * first_len
    end = mid + (q.b - q.a) if q.b != INF else INF
    return [_Point(mid, mid_v)], [_Run(a, mid, p.v + q.v, p.k), _Run(mid, end, mid_v, q.k)]


def _convolve_pieces(f: Curve, g: Curve):
    fp, fr = _pieces(f)
    gp, gr = _pieces(g)
    points: List[_Point] = []
    runs: List[_Run] = []
    for p in fp:
        for q in gp:
            points.append(_Point(p.t + q.t, p.v + q.v))
        for q in gr:
            runs.append(_Run(p.t + q.a, p.t + q.b, p.v + q.v, q.k))
    for p in gp:
        for q in fr:
            runs.append(_Run(p.t + q.a, p.t + q.b, p.v + q.v, q.k))
    for p in fr:
        for q in gr:
            pts, rs = _conv_run_run(p, q)
            points.extend(pts)
            runs.extend(rs)
    return points, runs


def _prune(runs: List[_Run]) -> List[_Run]:
    # A run is dropped when another run with the same support starts no
    # higher and rises no faster.  Cheap and keeps the envelope sweep small.
    best = {}
    for r in runs:
        key = (r.a, r.b)
        best.setdefault(key, []).append(r)
    out = []
    for group in best.values():
        keep = []
        for r in sorted(group, key=lambda r: (r.v, r.k)):
            if any(o.v <= r.v and o.k <= r.k for o in keep):
                continue
            keep.append(r)
        out.extend(keep)
    return out


def _envelope(points: List[_Point], runs: List[_Run]) -> Curve:
    """Exact lower envelope of isolated points and open affine runs."""
    runs = _prune([r for r in runs if r.b == INF or r.b > r.a])
    times = {_Q(0)}
    times.update(p.t for p in points)
    for r in runs:
        times.add(r.a)
        if r.b != INF:
            times.add(r.b)
    cuts = sorted(times)
    n = len(cuts)

    # active[k] holds the runs covering the open interval (cuts[k], cuts[k+1])
    active: List[List[_Run]] = [[] for _ in range(n)]
    for r in runs:
        lo = bisect.bisect_left(cuts, r.a)
        hi = n if r.b == INF else bisect.bisect_left(cuts, r.b)
        for k in range(lo, hi):
            active[k].append(r)

    point_min = {}
    for p in points:
        cur = point_min.get(p.t)
        if cur is None or p.v < cur:
            point_min[p.t] = p.v

    segments: List[Segment] = []
    for k, c in enumerate(cuts):
        val = point_min.get(c, INF)
        for r in active[k]:
            if r.a < c:
                v = r.at(c)
                if v < val:
                    val = v
        lines = active[k]
        if not lines:
            segments.append(Segment(_fr(c), _fr(val), INF, None))
            continue
        end = cuts[k + 1] if k + 1 < n else INF
        # sweep the lower envelope of the lines across (c, end)
        x = c
        cur = min(lines, key=lambda r: (r.at(x), r.k))
        cur_v = cur.at(x)
        segments.append(Segment(_fr(c), _fr(val), _fr(cur_v), _fr(cur.k)))
        while True:
            nxt, nxt_x = None, None
            for r in lines:
                if r.k >= cur.k:
                    continue
                # crossing where cur.at(y) == r.at(y)
                y = x + (r.at(x) - cur.at(x)) / (cur.k - r.k)
                if y <= x or (end != INF and y >= end):
                    continue
                if nxt_x is None or y < nxt_x or (y == nxt_x and r.k < nxt.k):
                    nxt, nxt_x = r, y
            if nxt is None:
                break
            x, cur = nxt_x, nxt
            v = _fr(cur.at(x))
            segments.append(Segment(_fr(x), v, v, _fr(cur.k)))
    return Curve(segments)


# ---------------------------------------------------------------- operations

def shift(f: Curve, d: Number) -> Curve:
    """f(max(0, t - d)), which equals ``f * delay_impulse(d)``."""
    d = _nonneg("shift", d)
    if d == 0:
        return f
    first = f.segments[0]
    head = Segment(Fraction(0), first.value, first.value, Fraction(0))
    moved = [Segment(s.start + d, s.value, s.right, s.slope) for s in f.segments]
    if first.value == INF:
        return INFINITE
    return Curve([head, Segment(d, first.value, first.right, first.slope)] + moved[1:])


def min_plus_convolve(f: Curve, g: Curve) -> Curve:
    """(f*g)(t) = inf over 0 <= s <= t of f(s) + g(t - s), exactly."""
    d = impulse_delay(g)
    if d is not None:
        return shift(f, d)
    d = impulse_delay(f)
    if d is not None:
        return shift(g, d)
    return _general_convolve(f, g)


def _general_convolve(f: Curve, g: Curve) -> Curve:
    points, runs = _convolve_pieces(f, g)
    return _envelope(points, runs)


def pointwise_min(f: Curve, g: Curve) -> Curve:
    fp, fr = _pieces(f)
    gp, gr = _pieces(g)
    return _envelope(fp + gp, fr + gr)


def convolve_all(curves: Sequence[Curve]) -> Curve:
    if not curves:
        raise CurveError("nothing to convolve")
    out = curves[0]
    for c in curves[1:]:
        out = min_plus_convolve(out, c)
    return out


def pointwise_le(f: Curve, g: Curve) -> bool:
    """True when f(t) <= g(t) for every t >= 0."""
    return pointwise_min(f, g) == f


# long-form constructor aliases
make_token_bucket = token_bucket
make_rate_latency = rate_latency
make_delay_impulse = delay_impulse
make_link_rate = link_rate
make_peak_rate_envelope = peak_rate_envelope
