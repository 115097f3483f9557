"""Command-line front end.

Exit codes: 0 success, 1 usage, 2 input (missing file, bad config, bad
curve spec, unwritable output), 3 verification failure, 4 analysis error.
"""

import argparse
import csv
import io
import json
import os
import random
import sys
from fractions import Fraction

from . import curve as c
from . import oracle
from .bounds import BoundsReport, compute_bounds, horizontal_deviation, vertical_deviation
from .config import ConfigError, load
from .curve import INF, CurveError
from .scenario import AnalysisReport, analyze, reproduce_tables
from .units import (UnitError, exact, fmt_bits, fmt_rate, fmt_time, fmt_unit,
                    parse_quantity, sig6)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_VERIFY, EXIT_ANALYSIS = 0, 1, 2, 3, 4

SCHEMA_ID = "servicecurve.analysis/1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ rendering

def _curve_doc(f: c.Curve):
    return [[exact(s.start), exact(s.value), exact(s.right), exact(s.slope)]
            for s in f.segments]


def _bounds_doc(b: BoundsReport):
    return {"d_min_s": exact(b.d_min), "d_max_s": exact(b.d_max),
            "b_max_bits": exact(b.b_max),
            "c_min_bps": exact(b.c_min) if b.c_min is not None else None}


_UNIT_KEYS = {"theta": "s", "phi": "s", "theta_total": "s", "phi_total": "s",
              "r": "bps", "p": "bps", "r_total": "bps",
              "min_delay": "s", "max_delay": "s", "max_buffer": "bit"}
_SUFFIX = {"s": "_s", "bps": "_bps", "bit": "_bits"}


def _keyed(d):
    return {k + _SUFFIX[_UNIT_KEYS[k]]: exact(v) if v is not None else None
            for k, v in d.items()}


def _discrepancy_doc(d):
    return {"key": d.key, "quantity": d.quantity, "computed": exact(d.computed),
            "published": exact(d.published), "unit": d.unit, "citation": d.citation,
            "mode": d.mode, "note": d.note}


def report_document(rep: AnalysisReport) -> dict:
    return {
        "schema": SCHEMA_ID,
        "mode": rep.mode,
        "share": exact(rep.share),
        "bounds": _bounds_doc(rep.bounds),
        "segment_bounds": {k: _bounds_doc(v) for k, v in rep.segment_bounds.items()},
        "derived": _keyed(rep.derived),
        "shortcuts": _keyed(rep.shortcuts),
        "sessions_supported": rep.sessions_supported,
        "mns_supported": rep.mns_supported,
        "curves": {k: {"lower": _curve_doc(p.lower), "upper": _curve_doc(p.upper)}
                   for k, p in rep.segments.items()},
        "discrepancies": [_discrepancy_doc(d) for d in rep.discrepancies],
    }


def _report_rows(rep: AnalysisReport):
    """(section, quantity, unit, value) rows shared by the table and CSV forms."""
    rows = []
    for section, b in [("end_to_end", rep.bounds)] + sorted(rep.segment_bounds.items()):
        rows += [(section, "d_min", "s", b.d_min), (section, "d_max", "s", b.d_max),
                 (section, "b_max", "bit", b.b_max)]
        if b.c_min is not None:
            rows.append((section, "c_min", "bps", b.c_min))
    for k, v in rep.derived.items():
        rows.append(("derived", k, _UNIT_KEYS[k], v))
    for k, v in rep.shortcuts.items():
        rows.append(("closed_form", k, _UNIT_KEYS[k], v))
    rows.append(("capacity", "sessions_supported", "count", rep.sessions_supported))
    rows.append(("capacity", "mns_supported", "count", rep.mns_supported))
    return rows


def _decimal(x) -> str:
    if x is None:
        return ""
    if x == INF:
        return "inf"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def render_table(rep: AnalysisReport) -> str:
    out = [f"analysis mode: {rep.mode}"
           + (f" (rate share 1/{1 / rep.share})" if rep.share != 1 else "")]
    width = max(len(f"{s}.{q}") for s, q, _, _ in _report_rows(rep))
    for section, q, unit, v in _report_rows(rep):
        shown = "n/a" if v is None else fmt_unit(v, unit)
        out.append(f"  {section + '.' + q:<{width}}  {shown}")
    out.append("discrepancies:")
    if not rep.discrepancies:
        out.append("  (none)")
    for d in rep.discrepancies:
        out.append(f"  {d.quantity}: computed {fmt_unit(d.computed, d.unit)}, "
                   f"reference {fmt_unit(d.published, d.unit)}  [{d.citation}]")
    return "\n".join(out) + "\n"


def render_csv(rep: AnalysisReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["section", "quantity", "unit", "value", "exact"])
    for section, q, unit, v in _report_rows(rep):
        w.writerow([section, q, unit, _decimal(v), exact(v) if v is not None else ""])
    return buf.getvalue()


# ------------------------------------------------------------------ commands

def cmd_analyze(args):
    rep = analyze(load(args.config))
    if args.format == "json":
        return json.dumps(report_document(rep), indent=2) + "\n"
    if args.format == "csv":
        return render_csv(rep)
    return render_table(rep)


def _service_from_flags(args):
    if args.rate is not None and args.capacity is not None:
        raise UsageError("--rate and --capacity both describe the server; give one")
    if args.capacity is not None:
        if args.latency is not None:
            raise UsageError("--latency applies to --rate, not to a plain --capacity link")
        rate, latency = parse_quantity(args.capacity, "rate"), Fraction(0)
    elif args.rate is not None:
        rate = parse_quantity(args.rate, "rate")
        latency = parse_quantity(args.latency, "time") if args.latency else Fraction(0)
    else:
        raise UsageError("give --rate (with optional --latency) or --capacity")
    min_latency = parse_quantity(args.min_latency, "time") if args.min_latency else Fraction(0)
    if min_latency > latency:
        raise UsageError("--min-latency cannot exceed --latency")
    return c.rate_latency(rate, latency), c.rate_latency(rate, min_latency)


def cmd_bounds(args):
    sigma = parse_quantity(args.sigma, "data")
    rho = parse_quantity(args.rho, "rate")
    if args.peak is not None:
        E = c.peak_rate_envelope(parse_quantity(args.peak, "rate"), sigma, rho)
    else:
        E = c.token_bucket(sigma, rho)
    lower, upper = _service_from_flags(args)
    target = parse_quantity(args.target_delay, "time") if args.target_delay else None
    b = compute_bounds(E, lower, upper, target)
    if args.format == "json":
        return json.dumps(_bounds_doc(b), indent=2) + "\n"
    lines = [f"d_min  {fmt_time(b.d_min)}", f"d_max  {fmt_time(b.d_max)}",
             f"b_max  {fmt_bits(b.b_max)}"]
    if b.c_min is not None:
        lines.append(f"c_min  {fmt_rate(b.c_min)}")
    return "\n".join(lines) + "\n"


def render_tables(t) -> str:
    out = []

    def section(title, header, rows, prefix):
        out.append(title)
        out.append("  " + " | ".join(header))
        for r in rows:
            out.append("  " + " | ".join(r))
        out.append("  discrepancies:")
        ds = t.for_table(prefix)
        if not ds:
            out.append("    (none)")
        for d in ds:
            out.append(f"    {d.quantity}: computed {fmt_unit(d.computed, d.unit)}, "
                       f"published {fmt_unit(d.published, d.unit)} [{d.citation}]"
                       + (f" -- {d.note}" if d.note else ""))
        out.append("")

    kb = lambda r: sig6(r / 1000)
    section("TABLE I: delay and buffer requirement (closed forms)",
            ["wireless kbps", "min delay", "max delay", "buffer"],
            [[kb(r.wireless_rate), fmt_time(r.cells["min_delay"]),
              fmt_time(r.cells["max_delay"]), fmt_bits(r.cells["buffer"])] for r in t.table1],
            "table1.")
    section(f"TABLE II: delay for voice data ({t.mode} analysis)",
            ["wireless kbps", "session delay bound", "buffer", "per-session buffer",
             "sessions"],
            [[kb(r.wireless_rate), fmt_time(r.cells["acceptable_delay"]),
              fmt_bits(r.cells["buffer"]), fmt_bits(r.cells["per_session_buffer"]),
              str(r.cells["sessions"])] for r in t.table2],
            "table2.")
    section("TABLE III: MNs supported",
            ["wireless kbps", "MNs supported", "sessions supported"],
            [[kb(r.wireless_rate), str(r.cells["mns"]), str(r.cells["sessions"])]
             for r in t.table3],
            "table3.")
    w = t.worked
    section("Worked example",
            ["quantity", "value"],
            [["minimum delay theta", fmt_time(w["min_delay"])],
             ["maximum delay theta + sigma/p", fmt_time(w["max_delay"])],
             ["maximum buffer sigma + rho*theta", fmt_bits(w["max_buffer"])],
             ["rho*theta", fmt_bits(w["rho_theta"])],
             ["transmission delay L_max/C", f"{fmt_time(w['transmission_delay'])} (published 6.67 ms, "
              f"exact {exact(w['transmission_delay'])} s)"],
             ["C_con", f"{sig6(w['c_con_exact'])} -> {w['c_con']}"],
             ["wireless upper curve constant", fmt_bits(w["upper_intercept"])],
             ["wireless lower curve constant", fmt_bits(w["lower_intercept"])]],
            "worked.")
    return "\n".join(out)


def cmd_tables(args):
    t = reproduce_tables(mode=args.mode)
    if args.format == "json":
        return json.dumps({
            "mode": t.mode,
            "table1": [{"wireless_bps": exact(r.wireless_rate),
                        **{k: exact(v) for k, v in r.cells.items()}} for r in t.table1],
            "table2": [{"wireless_bps": exact(r.wireless_rate),
                        **{k: exact(v) for k, v in r.cells.items()}} for r in t.table2],
            "table3": [{"wireless_bps": exact(r.wireless_rate), **r.cells} for r in t.table3],
            "worked": {k: exact(v) for k, v in t.worked.items()},
            "discrepancies": [_discrepancy_doc(d) for d in t.discrepancies],
        }, indent=2) + "\n"
    return render_tables(t)


def _verify_targets(scenario):
    rep = analyze(scenario)
    if scenario.mode == "per-session":
        E = scenario.session.envelope()
    else:
        E = scenario.envelope.curve()
    w = rep.segments["wireless"]
    e2e = rep.segments["end_to_end"]
    return [("wireless", E, w.lower, w.upper, rep.segment_bounds["wireless"]),
            ("end_to_end", E, e2e.lower, e2e.upper, rep.bounds)]


def cmd_verify(args):
    step = parse_quantity(args.step, "time")
    horizon = parse_quantity(args.horizon, "time")
    targets = _verify_targets(load(args.config))
    rng = random.Random(args.seed)
    for i in range(args.random):
        case = oracle.random_feasible_case(rng)
        targets.append((f"random[{i}]", case.envelope, case.lower, case.upper, None))
    lines, failed = [], False
    for name, E, lower, upper, report in targets:
        if report is None:
            report = compute_bounds(E, lower, upper)
        if args.corrupt_bound and report.d_max not in (INF, 0):
            report = BoundsReport(min(report.d_min, report.d_max / 2), report.d_max / 2,
                                  report.b_max)
        verdict, trace, _ = oracle.verify_case(E, lower, upper, horizon, step, report)
        flag = " [truncated]" if trace.truncated and "truncated" not in verdict.message else ""
        status = "PASS" if verdict.passed else "FAIL"
        lines.append(f"{status} {name}: {verdict.message}{flag}")
        if not verdict.passed:
            failed = True
            kind, t, measured, bound = verdict.witness
            lines.append(f"  witness: {kind} at t = {t:.6g} s, measured {measured:.6g}, "
                         f"bound {bound:.6g}")
        if args.trace_dir:
            os.makedirs(args.trace_dir, exist_ok=True)
            trace.to_csv(os.path.join(args.trace_dir, f"{name}.csv"))
    lines.append("verification " + ("FAILED" if failed else "passed"))
    return "\n".join(lines) + "\n", (EXIT_VERIFY if failed else EXIT_OK)


_CURVE_KINDS = {
    "token-bucket": (c.token_bucket, ("data", "rate")),
    "rate-latency": (c.rate_latency, ("rate", "time")),
    "rate": (c.link_rate, ("rate",)),
    "impulse": (c.delay_impulse, ("time",)),
    "peak": (c.peak_rate_envelope, ("rate", "data", "rate")),
}


def parse_curve_spec(spec: str):
    """'name=kind:arg,arg' -> (name, Curve)."""
    name, sep, rest = spec.partition("=")
    kind, _, argtext = rest.partition(":")
    if not sep or not name or kind not in _CURVE_KINDS:
        raise UnitError(f"bad curve spec {spec!r}; expected NAME=KIND:ARGS with KIND in "
                        f"{', '.join(_CURVE_KINDS)}")
    make, kinds = _CURVE_KINDS[kind]
    raw = [a for a in argtext.split(",") if a.strip()]
    if len(raw) != len(kinds):
        raise UnitError(f"{kind} takes {len(kinds)} argument(s), got {len(raw)}")
    return name, make(*(parse_quantity(a, k) for a, k in zip(raw, kinds)))


def cmd_export_curve(args):
    step = parse_quantity(args.step, "time")
    horizon = parse_quantity(args.horizon, "time")
    curves = [parse_curve_spec(s) for s in args.curve]
    os.makedirs(args.output_dir, exist_ok=True)
    written = []
    for name, f in curves:
        s = oracle.sample(f, horizon, step)
        path = os.path.join(args.output_dir, f"{name}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "value"])
            for i, v in enumerate(s.values):
                w.writerow([repr(float(i * step)), "inf" if v == float("inf") else repr(float(v))])
        written.append(path)
    if len(curves) >= 2:
        (n1, E), (n2, S) = curves[0], curves[1]
        if E.is_finite():
            h, v = horizontal_deviation(E, S), vertical_deviation(E, S)
            line = (f"{n1} vs {n2}: horizontal_deviation={exact(h)} s ({fmt_time(h)}), "
                    f"vertical_deviation={exact(v)} bit ({fmt_bits(v)})")
        else:
            line = f"{n1} vs {n2}: deviations need a finite first curve"
        path = os.path.join(args.output_dir, "summary.txt")
        with open(path, "w") as fh:
            fh.write(line + "\n")
        written.append(path)
    return "".join(p + "\n" for p in written)


# ------------------------------------------------------------------ wiring

def build_parser():
    p = _Parser(prog="servicecurve",
                description="Worst-case delay, buffer and capacity bounds by min-plus algebra.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="bounds for a scenario config")
    a.add_argument("config")
    a.add_argument("--format", choices=["table", "csv", "json"], default="table")

    b = sub.add_parser("bounds", help="bounds for one envelope and one server")
    b.add_argument("--sigma", required=True, help="burst, e.g. 5kb")
    b.add_argument("--rho", required=True, help="sustained rate, e.g. 200kbps")
    b.add_argument("--peak", help="peak rate limiting the envelope")
    b.add_argument("--rate", help="server rate (rate-latency service)")
    b.add_argument("--latency", help="server latency, e.g. 20ms")
    b.add_argument("--capacity", help="plain constant-rate link instead of --rate")
    b.add_argument("--min-latency", help="latency of the upper service curve (for d_min)")
    b.add_argument("--target-delay", help="also report the minimum capacity for this delay")
    b.add_argument("--format", choices=["table", "json"], default="table")

    t = sub.add_parser("tables", help="reference tables with discrepancy ledger")
    t.add_argument("--mode", choices=["per-session", "aggregate"], default="per-session")
    t.add_argument("--format", choices=["table", "json"], default="table")

    v = sub.add_parser("verify", help="check bounds against a greedy simulation")
    v.add_argument("config")
    v.add_argument("--step", default="0.1ms")
    v.add_argument("--horizon", default="2s")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--random", type=int, default=0, metavar="N",
                   help="also verify N random feasible scenarios")
    v.add_argument("--trace-dir", help="write each simulation trace as CSV here")
    v.add_argument("--corrupt-bound", action="store_true", help=argparse.SUPPRESS)

    e = sub.add_parser("export-curve", help="sample curves to CSV")
    e.add_argument("--curve", action="append", required=True, metavar="NAME=KIND:ARGS",
                   help="e.g. E=token-bucket:5kb,200kbps or S=rate-latency:400kbps,20ms")
    e.add_argument("--step", default="1ms")
    e.add_argument("--horizon", default="100ms")
    e.add_argument("--output-dir", required=True)
    return p


_COMMANDS = {"analyze": cmd_analyze, "bounds": cmd_bounds, "tables": cmd_tables,
             "verify": cmd_verify, "export-curve": cmd_export_curve}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"servicecurve: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, UnitError, OSError) as exc:
        print(f"servicecurve: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CurveError as exc:
        print(f"servicecurve: analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    code = EXIT_OK
    if isinstance(result, tuple):
        result, code = result
    sys.stdout.write(result)
    return code


if __name__ == "__main__":
    sys.exit(main())
