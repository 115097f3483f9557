"""Worst-case delay, backlog and capacity bounds from envelope/service curves.

Unbounded results are returned as ``INF`` rather than raised: an admission
check needs to tell "this reservation cannot work" apart from bad input.
Every bound here is exact.  Sups and infs of piecewise-linear expressions
are found by enumerating the finitely many places they can occur, never by
sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

from .curve import INF, Curve, CurveError, Number, Value, _nonneg, to_fraction

UNBOUNDED = INF


@dataclass(frozen=True)
class BoundsReport:
    d_min: Value
    d_max: Value
    b_max: Value
    c_min: Optional[Value] = None

    def __post_init__(self):
        for name in ("d_min", "d_max", "b_max", "c_min"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise CurveError(f"{name} must be >= 0")
        if self.d_min != INF and self.d_max != INF and self.d_min > self.d_max:
            raise CurveError("d_min exceeds d_max")


def _require_finite(E: Curve):
    if not E.is_finite():
        raise CurveError("the envelope must be finite everywhere")


def _levels(S: Curve) -> List[Fraction]:
    """Every finite value S takes at, just after, or just before a breakpoint."""
    out = set()
    segs = S.segments
    for i, s in enumerate(segs):
        for v in (s.value, s.right):
            if v is not INF:
                out.add(v)
        if i + 1 < len(segs) and s.right is not INF:
            out.add(s.right + s.slope * (segs[i + 1].start - s.start))
    return sorted(out)


def pseudo_inverse(S: Curve, y: Fraction) -> Value:
    """inf{u >= 0 : S(u) >= y}, or INF when S never reaches y."""
    segs = S.segments
    for i, s in enumerate(segs):
        if s.value >= y or s.right >= y:
            return s.start
        if s.slope > 0:
            u = s.start + (y - s.right) / s.slope
            if i + 1 == len(segs) or u < segs[i + 1].start:
                return u
    return INF


def _solve(E: Curve, y: Fraction) -> List[Fraction]:
    """Times inside the open runs of E where E(t) == y."""
    out = []
    segs = E.segments
    for i, s in enumerate(segs):
        if s.slope > 0:
            t = s.start + (y - s.right) / s.slope
            end = segs[i + 1].start if i + 1 < len(segs) else None
            if t > s.start and (end is None or t < end):
                out.append(t)
    return out


def _sup_piecewise_affine(g, cuts: List[Fraction]) -> Value:
    """Supremum over t >= 0 of a function that is affine on every open
    interval between consecutive *cuts* and on (cuts[-1], inf).

    Endpoint values are taken exactly; one-sided limits are recovered by
    extrapolating two interior samples, which is exact for affine pieces.
    """
    best = None

    def bump(v):
        nonlocal best
        if best is None or v > best:
            best = v

    for c in cuts:
        bump(g(c))
    for lo, hi in zip(cuts, cuts[1:]):
        w = (hi - lo) / 3
        g1, g2 = g(lo + w), g(lo + 2 * w)
        if g1 is INF or g2 is INF:
            return INF
        bump(2 * g1 - g2)
        bump(2 * g2 - g1)
    last = cuts[-1]
    g1, g2 = g(last + 1), g(last + 2)
    if g1 is INF or g2 is INF or g2 > g1:
        return INF
    bump(2 * g1 - g2)
    return best


def horizontal_deviation(E: Curve, S: Curve) -> Value:
    """Worst-case delay: sup over t of inf{d >= 0 : S(t + d) >= E(t)}.

    This is the least d with E * delta_d <= S once E is read as 0 before the
    origin.  Returns INF when the envelope outgrows the service curve.
    """
    _require_finite(E)
    cuts = set(E.breakpoints)
    for y in _levels(S):
        cuts.update(_solve(E, y))

    def lag(t):
        u = pseudo_inverse(S, E(t))
        return INF if u is INF else u - t

    sup = _sup_piecewise_affine(lag, sorted(cuts))
    return max(sup, Fraction(0)) if sup is not INF else INF


def vertical_deviation(E: Curve, S: Curve) -> Value:
    """Worst-case backlog: sup over t >= 0 of E(t) - S(t), floored at 0."""
    _require_finite(E)
    cuts = sorted(set(E.breakpoints) | set(S.breakpoints))
    # E - S is affine between the merged breakpoints, -inf where S is infinite
    neg = None

    def gap(t):
        s = S(t)
        return neg if s is INF else E(t) - s

    best = Fraction(0)
    for c in cuts:
        v = gap(c)
        if v is not None and v > best:
            best = v
    for lo, hi in zip(cuts, cuts[1:]):
        w = (hi - lo) / 3
        g1, g2 = gap(lo + w), gap(lo + 2 * w)
        if g1 is None or g2 is None:
            continue
        best = max(best, 2 * g1 - g2, 2 * g2 - g1)
    last = cuts[-1]
    g1, g2 = gap(last + 1), gap(last + 2)
    if g1 is not None and g2 is not None:
        if g2 > g1:
            return INF
        best = max(best, 2 * g1 - g2)
    return best


def min_delay(S_upper: Curve) -> Value:
    """sup{t : S_upper(t) == 0}; 0 when the curve is positive at the origin."""
    segs = S_upper.segments
    if segs[0].value > 0:
        return Fraction(0)
    for i, s in enumerate(segs):
        if s.value > 0:
            return s.start
        if s.right > 0 or s.slope > 0:
            return s.start
    return INF


def min_capacity(E: Curve, T: Number) -> Value:
    """Least constant rate C with horizontal_deviation(E, C*t) <= T.

    Equal to sup over t >= 0 of E(t) / (T + t).  On each affine run that ratio
    is monotone, so only run endpoints (and the asymptotic slope) matter.
    """
    _require_finite(E)
    T = _nonneg("target delay", T)
    segs = E.segments
    best = Fraction(0)
    for i, s in enumerate(segs):
        if T + s.start == 0:
            if s.value > 0 or s.right > 0:
                return INF
            best = max(best, s.slope)
        else:
            best = max(best, s.value / (T + s.start), s.right / (T + s.start))
        if i + 1 < len(segs):
            end = segs[i + 1].start
            best = max(best, (s.right + s.slope * (end - s.start)) / (T + end))
        else:
            best = max(best, s.slope)
    return best


def _link_params(sigma, rho, peak, capacity):
    sigma = _nonneg("sigma", sigma)
    rho = _nonneg("rho", rho)
    peak = _nonneg("peak rate", peak)
    capacity = to_fraction(capacity)
    if capacity <= 0:
        raise CurveError("link capacity must be > 0")
    return sigma, rho, peak, capacity


def closed_form_link_delay(sigma: Number, rho: Number, peak: Number,
                           capacity: Number) -> Value:
    """Delay of a peak-rate-limited token bucket on a constant-rate link:
    sigma*(peak - C) / (C*(peak - rho)) for rho <= C < peak."""
    sigma, rho, peak, C = _link_params(sigma, rho, peak, capacity)
    if C >= peak or sigma == 0:
        return Fraction(0)
    if C < rho:
        return INF
    return sigma * (peak - C) / (C * (peak - rho))


def closed_form_link_backlog(sigma: Number, rho: Number, peak: Number,
                             capacity: Number) -> Value:
    """Companion backlog sigma*(peak - C) / (peak - rho) of the same pair."""
    sigma, rho, peak, C = _link_params(sigma, rho, peak, capacity)
    if C >= peak or sigma == 0:
        return Fraction(0)
    if C < rho:
        return INF
    return sigma * (peak - C) / (peak - rho)


def compute_bounds(E: Curve, S_lower: Curve, S_upper: Optional[Curve] = None,
                   target_delay: Optional[Number] = None) -> BoundsReport:
    """All bounds for one envelope/server pair.  Without an upper curve the
    minimum delay is 0."""
    d_min = min_delay(S_upper) if S_upper is not None else Fraction(0)
    d_max = horizontal_deviation(E, S_lower)
    c_min = min_capacity(E, target_delay) if target_delay is not None else None
    if d_max is not INF and d_min is not INF and d_min > d_max:
        # only possible for an all-zero envelope: there is no data to delay
        d_min = d_max
    return BoundsReport(d_min, d_max, vertical_deviation(E, S_lower), c_min)
