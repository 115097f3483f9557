"""Scenario configuration files (JSON).

Every quantity key carries its unit as a suffix (``sigma_kb``,
``capacity_kbps``, ``delay_ms``) and the file must declare ``"units":
{"kilo": 1000}``, so the k = 1000 convention cannot be missed.  Numbers may
be JSON numbers or exact strings such as ``"1/3"``; decimals are read
exactly.
"""

import json
from fractions import Fraction

import jsonschema

from . import elements as el
from .curve import CurveError
from .scenario import MODES, Scenario, SessionSpec
from .units import parse_number

MS = Fraction(1, 1000)
K = 1000


class ConfigError(ValueError):
    pass


_QTY = {"oneOf": [{"type": "number", "minimum": 0},
                  {"type": "string", "pattern": r"^\s*\d+(\.\d*)?(/\d+)?\s*$"}]}


def _element(type_name, **fields):
    return {
        "type": "object",
        "properties": {"type": {"const": type_name}, **{k: _QTY for k in fields}},
        "required": ["type", *fields],
        "additionalProperties": False,
    }


ELEMENT_SCHEMA = {"oneOf": [
    _element("wireless_link", capacity_kbps=1),
    _element("wired_link", capacity_kbps=1),
    _element("propagation_delay", delay_ms=1),
    _element("access_router", service_rate_kbps=1, processing_delay_ms=1),
    _element("multiplexer", min_source_rate_kbps=1, max_packet_bits=1),
]}

SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "properties": {
        "units": {
            "type": "object",
            "properties": {"kilo": {"const": 1000}},
            "required": ["kilo"],
            "additionalProperties": False,
        },
        "envelope": {
            "type": "object",
            "properties": {"sigma_kb": _QTY, "rho_kbps": _QTY, "peak_kbps": _QTY},
            "required": ["sigma_kb", "rho_kbps"],
            "additionalProperties": False,
        },
        "wireless_elements": {"type": "array", "items": ELEMENT_SCHEMA, "minItems": 1},
        "wired_elements": {"type": "array", "items": ELEMENT_SCHEMA, "minItems": 1},
        "session": {
            "type": "object",
            "properties": {"rate_kbps": _QTY, "frame_bytes": _QTY,
                           "frame_interval_ms": _QTY, "acceptable_delay_ms": _QTY},
            "additionalProperties": False,
        },
        "analysis": {
            "type": "object",
            "properties": {"mode": {"enum": list(MODES)}, "target_delay_ms": _QTY},
            "additionalProperties": False,
        },
    },
    "required": ["units", "envelope", "wireless_elements", "wired_elements"],
    "additionalProperties": False,
}


def _q(x) -> Fraction:
    return parse_number(x)


def _build_element(d):
    kind = d["type"]
    if kind == "wireless_link":
        return el.WirelessLink(_q(d["capacity_kbps"]) * K)
    if kind == "wired_link":
        return el.WiredLink(_q(d["capacity_kbps"]) * K)
    if kind == "propagation_delay":
        return el.PropagationDelay(_q(d["delay_ms"]) * MS)
    if kind == "access_router":
        return el.AccessRouter(_q(d["service_rate_kbps"]) * K, _q(d["processing_delay_ms"]) * MS)
    if kind == "multiplexer":
        return el.Multiplexer(_q(d["min_source_rate_kbps"]) * K, _q(d["max_packet_bits"]))
    raise ConfigError(f"unknown element type {kind!r}")


def parse_config(doc) -> Scenario:
    """Validate a decoded config document and build its Scenario."""
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    try:
        env = doc["envelope"]
        peak = env.get("peak_kbps")
        envelope = el.SourceEnvelope(_q(env["sigma_kb"]) * K, _q(env["rho_kbps"]) * K,
                                     _q(peak) * K if peak is not None else None)
        session = None
        if "session" in doc:
            s = doc["session"]
            session = SessionSpec(
                rate=_q(s["rate_kbps"]) * K if "rate_kbps" in s else None,
                frame_interval=_q(s["frame_interval_ms"]) * MS if "frame_interval_ms" in s else None,
                frame_size=_q(s["frame_bytes"]) * 8 if "frame_bytes" in s else None,
                acceptable_delay=(_q(s["acceptable_delay_ms"]) * MS
                                  if "acceptable_delay_ms" in s else None),
            )
        analysis = doc.get("analysis", {})
        target = analysis.get("target_delay_ms")
        return Scenario(
            envelope,
            tuple(_build_element(e) for e in doc["wireless_elements"]),
            tuple(_build_element(e) for e in doc["wired_elements"]),
            session=session,
            mode=analysis.get("mode", "aggregate"),
            target_delay=_q(target) * MS if target is not None else None,
        )
    except CurveError as exc:
        raise ConfigError(str(exc)) from None


def loads(text: str) -> Scenario:
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    return parse_config(doc)


def load(path) -> Scenario:
    with open(path) as fh:
        return loads(fh.read())


REFERENCE_CONFIG = {
    "units": {"kilo": 1000},
    "envelope": {"sigma_kb": 5, "rho_kbps": 200},
    "wireless_elements": [
        {"type": "wireless_link", "capacity_kbps": 64},
        {"type": "propagation_delay", "delay_ms": 20},
        {"type": "access_router", "service_rate_kbps": 400, "processing_delay_ms": 10},
    ],
    "wired_elements": [
        {"type": "wired_link", "capacity_kbps": 1200},
        {"type": "propagation_delay", "delay_ms": 25},
    ],
    "session": {"rate_kbps": 8, "frame_bytes": 10, "frame_interval_ms": 10},
    "analysis": {"mode": "per-session"},
}
