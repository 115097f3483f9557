"""Exact min-plus network calculus for piecewise-linear curves.

Worst-case delay, backlog and capacity bounds for token-bucket sources
crossing chains of links, routers and multiplexers, plus a discrete-time
oracle that checks the bounds by simulation.
"""

from .bounds import (UNBOUNDED, BoundsReport, compute_bounds, horizontal_deviation,
                     min_capacity, min_delay, vertical_deviation)
from .curve import (INF, Curve, CurveError, Segment, affine, constant, delay_impulse,
                    link_rate, min_plus_convolve, peak_rate_envelope, pointwise_min,
                    rate_latency, shift, token_bucket)
from .scenario import Scenario, analyze, reproduce_tables

__all__ = [
    "INF", "UNBOUNDED", "BoundsReport", "Curve", "CurveError", "Scenario", "Segment",
    "affine", "analyze", "compute_bounds", "constant", "delay_impulse",
    "horizontal_deviation", "link_rate", "min_capacity", "min_delay",
    "min_plus_convolve", "peak_rate_envelope", "pointwise_min", "rate_latency",
    "reproduce_tables", "shift", "token_bucket", "vertical_deviation",
]
