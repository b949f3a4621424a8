"""Command line: msmwc run|sweep|check|emit-plot."""

from __future__ import annotations

import argparse
import json
import sys

from . import harness
from .numerics import ConfigurationError


def _print_diags(diags: dict) -> None:
    for name in sorted(diags):
        d = diags[name]
        ms = d.get("min_slack")
        extra = "" if ms is None else f"  min_slack={ms:.3e}"
        print(f"  {'PASS' if d['ok'] else 'FAIL'} {name}{extra}")


def cmd_run(args) -> int:
    cfg = harness.load_config(args.config)
    tr = harness.run(cfg, T=args.T)
    print(f"{tr.label}: regret {tr.summary['regret']:.6g}")
    _print_diags(tr.summary["diagnostics"])
    return harness.EXIT_OK if tr.ok else harness.EXIT_DIAG


def cmd_sweep(args) -> int:
    cfg = harness.load_config(args.config)
    rep = harness.sweep(cfg, args.horizons)
    for r in rep["rows"]:
        rs = r["regret_over_sqrtV"]
        print(f"T={r['T']:>8d}  regret {r['regret']:.6g}  V {r['V']:.6g}"
              + ("" if rs is None else f"  regret/sqrtV {rs:.4g}"))
    for name, res in rep["properties"].items():
        print(f"  {'PASS' if res['ok'] else 'FAIL'} {name}")
    if args.plot:
        harness.emit_plotdata(rep["traces"], args.plot, axis="T")
    return harness.EXIT_OK if rep["ok"] else harness.EXIT_DIAG


def cmd_check(args) -> int:
    rep = harness.check(args.trace)
    _print_diags(rep["diagnostics"])
    return harness.EXIT_OK if rep["ok"] else harness.EXIT_DIAG


def cmd_emit(args) -> int:
    traces = [harness.load_stored(p) for p in args.traces]
    n = harness.emit_plotdata(traces, args.out, axis=args.axis)
    print(f"wrote {n} rows to {args.out}")
    return harness.EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="msmwc", description="MsMwC experiments and diagnostics")
    sub = ap.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("run", help="run one configured experiment")
    p.add_argument("config")
    p.add_argument("--T", type=int, default=None, help="override the horizon")
    p.set_defaults(fn=cmd_run)
    p = sub.add_parser("sweep", help="run over several horizons and test growth shapes")
    p.add_argument("config")
    p.add_argument("--horizons", type=int, nargs="+", default=None)
    p.add_argument("--plot", default=None, help="also write tidy plot data here")
    p.set_defaults(fn=cmd_sweep)
    p = sub.add_parser("check", help="re-run diagnostics on a stored trace (its .json summary)")
    p.add_argument("trace")
    p.set_defaults(fn=cmd_check)
    p = sub.add_parser("emit-plot", help="tidy CSV (series, metric, x, y) from stored traces")
    p.add_argument("traces", nargs="*")
    p.add_argument("--out", required=True)
    p.add_argument("--axis", choices=("t", "T"), default="t")
    p.set_defaults(fn=cmd_emit)
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as e:
        print(f"config error: {e}", file=sys.stderr)
        return harness.EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return harness.EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
