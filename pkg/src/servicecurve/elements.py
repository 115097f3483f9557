"""Network elements of a wired-cum-wireless path and their service curves."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from . import curve as c
from .curve import Curve, CurveError, Number, to_fraction


class ElementError(CurveError):
    """An element was used where it makes no sense (e.g. a source as a server)."""


def _pos(name, x):
    x = to_fraction(x)
    if x <= 0:
        raise CurveError(f"{name} must be > 0, got {x}")
    return x


def _nonneg(name, x):
    x = to_fraction(x)
    if x < 0:
        raise CurveError(f"{name} must be >= 0, got {x}")
    return x


@dataclass(frozen=True)
class SourceEnvelope:
    sigma: Fraction
    rho: Fraction
    peak_rate: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "sigma", _nonneg("sigma", self.sigma))
        object.__setattr__(self, "rho", _nonneg("rho", self.rho))
        if self.peak_rate is not None:
            object.__setattr__(self, "peak_rate", _pos("peak rate", self.peak_rate))

    def curve(self) -> Curve:
        if self.peak_rate is None:
            return c.token_bucket(self.sigma, self.rho)
        return c.peak_rate_envelope(self.peak_rate, self.sigma, self.rho)


@dataclass(frozen=True)
class WirelessLink:
    capacity: Fraction

    def __post_init__(self):
        object.__setattr__(self, "capacity", _pos("capacity", self.capacity))


@dataclass(frozen=True)
class WiredLink:
    capacity: Fraction

    def __post_init__(self):
        object.__setattr__(self, "capacity", _pos("capacity", self.capacity))


@dataclass(frozen=True)
class PropagationDelay:
    delay: Fraction

    def __post_init__(self):
        object.__setattr__(self, "delay", _nonneg("delay", self.delay))


@dataclass(frozen=True)
class AccessRouter:
    service_rate: Fraction
    processing_delay: Fraction

    def __post_init__(self):
        object.__setattr__(self, "service_rate", _pos("service rate", self.service_rate))
        object.__setattr__(self, "processing_delay",
                           _nonneg("processing delay", self.processing_delay))


@dataclass(frozen=True)
class Multiplexer:
    """A byte may wait at most max_packet / min_source_rate before leaving."""

    min_source_rate: Fraction
    max_packet: Fraction

    def __post_init__(self):
        object.__setattr__(self, "min_source_rate",
                           _pos("minimum source rate", self.min_source_rate))
        object.__setattr__(self, "max_packet", _pos("maximum packet", self.max_packet))

    @property
    def max_wait(self) -> Fraction:
        return self.max_packet / self.min_source_rate


NetworkElement = Union[SourceEnvelope, WirelessLink, WiredLink, PropagationDelay,
                       AccessRouter, Multiplexer]
SERVERS = (WirelessLink, WiredLink, PropagationDelay, AccessRouter, Multiplexer)


@dataclass(frozen=True)
class ServiceCurvePair:
    lower: Curve
    upper: Curve

    def __post_init__(self):
        if not c.pointwise_le(self.lower, self.upper):
            raise CurveError("lower service curve exceeds the upper one")


def element_curves(e: NetworkElement) -> ServiceCurvePair:
    """Lower and upper service curves of a single server element.

    The access router's upper curve carries no latency, which keeps it an
    over-estimate of what the router can send.
    """
    if isinstance(e, (WirelessLink, WiredLink)):
        link = c.link_rate(e.capacity)
        return ServiceCurvePair(link, link)
    if isinstance(e, PropagationDelay):
        d = c.delay_impulse(e.delay)
        return ServiceCurvePair(d, d)
    if isinstance(e, AccessRouter):
        return ServiceCurvePair(c.rate_latency(e.service_rate, e.processing_delay),
                                c.link_rate(e.service_rate))
    if isinstance(e, Multiplexer):
        return ServiceCurvePair(c.delay_impulse(e.max_wait), c.delay_impulse(0))
    if isinstance(e, SourceEnvelope):
        raise ElementError("a source envelope is not a server and has no service curve")
    raise ElementError(f"unknown element {e!r}")


def _check_chain(elems: Sequence[NetworkElement]):
    if not elems:
        raise CurveError("a tandem needs at least one element")
    for e in elems:
        if isinstance(e, SourceEnvelope):
            raise ElementError("source envelopes cannot sit inside a tandem")


def tandem_lower(elems: Sequence[NetworkElement]) -> Curve:
    _check_chain(elems)
    return c.convolve_all([element_curves(e).lower for e in elems])


def tandem_upper(elems: Sequence[NetworkElement]) -> Curve:
    _check_chain(elems)
    return c.convolve_all([element_curves(e).upper for e in elems])


def tandem_curves(elems: Sequence[NetworkElement]) -> ServiceCurvePair:
    return ServiceCurvePair(tandem_lower(elems), tandem_upper(elems))


def scale_rates(e: NetworkElement, share: Number) -> NetworkElement:
    """The same element with every rate multiplied by *share*; delays and
    packet sizes are untouched."""
    share = _pos("share", share)
    if isinstance(e, WirelessLink):
        return WirelessLink(e.capacity * share)
    if isinstance(e, WiredLink):
        return WiredLink(e.capacity * share)
    if isinstance(e, AccessRouter):
        return AccessRouter(e.service_rate * share, e.processing_delay)
    return e


def rate_of(e: NetworkElement) -> Optional[Fraction]:
    if isinstance(e, (WirelessLink, WiredLink)):
        return e.capacity
    if isinstance(e, AccessRouter):
        return e.service_rate
    return None
