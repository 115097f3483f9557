"""Quantity parsing and rendering.  k = 1000 throughout (1 kb = 1000 bits)."""

import re
from fractions import Fraction

from .curve import INF, CurveError

_NUM = r"(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+|\d+/\d+)"
_RE = re.compile(r"^\s*" + _NUM + r"\s*(?P<unit>[A-Za-zµ/]*)\s*$")

TIME_UNITS = {"s": 1, "sec": 1, "ms": Fraction(1, 1000), "us": Fraction(1, 10**6),
              "µs": Fraction(1, 10**6)}
DATA_UNITS = {"b": 1, "bit": 1, "bits": 1, "kb": 1000, "kbit": 1000, "Mb": 10**6,
              "Mbit": 10**6, "B": 8, "byte": 8, "bytes": 8, "kB": 8000}
RATE_UNITS = {"bps": 1, "b/s": 1, "kbps": 1000, "kb/s": 1000, "mbps": 10**6,
              "mb/s": 10**6, "gbps": 10**9}


class UnitError(CurveError):
    pass


def parse_number(text) -> Fraction:
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(repr(text))
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise UnitError(f"not a number: {text!r}") from None


def parse_quantity(text: str, kind: str) -> Fraction:
    """Parse '5kb', '200kbps', '20ms', '1/3s'.  A bare number is taken in
    base units (bits, bits/s, seconds)."""
    m = _RE.match(str(text))
    if not m:
        raise UnitError(f"cannot parse {kind} quantity {text!r}")
    value = parse_number(m.group("num"))
    unit = m.group("unit")
    if not unit:
        return value
    if kind == "time":
        table, key = TIME_UNITS, unit
    elif kind == "data":
        table, key = DATA_UNITS, unit
    elif kind == "rate":
        # "1.2mbps" means megabits here; nobody reserves millibits
        table, key = RATE_UNITS, unit.lower()
    else:
        raise ValueError(kind)
    if key not in table:
        raise UnitError(f"unknown {kind} unit {unit!r} in {text!r}")
    return value * table[key]


def exact(x) -> str:
    """Lossless text form: '13/400', '7000', 'inf'."""
    if x is None:
        return ""
    if x == INF:
        return "inf"
    return str(Fraction(x))


def from_exact(text: str):
    if text == "inf":
        return INF
    return Fraction(text)


def sig6(x) -> str:
    if x == INF:
        return "unbounded"
    return f"{float(x):.6g}"


def fmt_time(x) -> str:
    return "unbounded" if x == INF else f"{sig6(Fraction(x) * 1000)} ms"


def fmt_bits(x) -> str:
    return "unbounded" if x == INF else f"{sig6(Fraction(x) / 1000)} kb"


def fmt_rate(x) -> str:
    return "unbounded" if x == INF else f"{sig6(Fraction(x) / 1000)} kbps"


def fmt_unit(x, unit: str) -> str:
    if unit == "s":
        return fmt_time(x)
    if unit == "bit":
        return fmt_bits(x)
    if unit == "bps":
        return fmt_rate(x)
    return sig6(x) if x is not None else ""
