"""Experiment runner: config loading, runs, sweeps, stored-trace checks and plot data.

Config files are JSON. Top-level keys:

    algorithm    pea_core | pea_adaptive | uol_fullinfo | uol_singlegrad
                 | baselines.hedge_fixed_eta
    stream       {"kind", "K" (PEA) or "d" (OCO), "seed", "params", "domain"}
    T            horizon of a single run
    horizons     list of horizons for ``sweep``
    seeds        replica seeds for ``sweep`` (default [stream.seed])
    diagnostics  true / false, or a list of diagnostic names to enable
    output_dir   where run/sweep write their files
    pea_core     {"B1"}                 (B defaults to the running range)
    pea_adaptive {"B0", "doubling", "M"}
    uol          {"L", "G", "roster", "doubling", "M0", "constants"}
    baselines    {"eta", "optimistic"}
    sweep        {"properties": [...], "growth_factor", "band"}

MSMWC_SEED and MSMWC_OUTPUT_DIR override stream.seed and output_dir.
"""

from __future__ import annotations

import copy
import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import baselines
from .environments import OCO_KINDS, PEA_KINDS, OcoStream, PeaStream, QueryCounter
from .numerics import ConfigurationError, ConvexDomain
from .pea_adaptive import DoublingRunner, RestartWrapper, check_theorem4_shape, drift_statistics
from .pea_core import MsMwC, check_theorem2_bound, one_step_slacks, round_bound_slacks
from .uol_ensemble import run_ensemble, single_gradient_constants

ALGORITHMS = ("pea_core", "pea_adaptive", "uol_fullinfo", "uol_singlegrad", "baselines.hedge_fixed_eta")
PEA_ALGORITHMS = ("pea_core", "pea_adaptive", "baselines.hedge_fixed_eta")
DIAGNOSTICS = {
    "pea_core": ("regret_agreement", "lemma21", "lemma3", "theorem2"),
    "pea_adaptive": ("regret_agreement", "clip_contract", "telescoping", "restart_rule"),
    "uol_fullinfo": ("regret_agreement", "eq7", "lemma25", "binary_search"),
    "uol_singlegrad": ("regret_agreement", "eq7", "lemma25", "gradient_count"),
    "baselines.hedge_fixed_eta": ("regret_agreement",),
}
OPTIONAL_DIAGNOSTICS = {"pea_core": ("lemma3_printed",)}
SLACK_TOL = 1e-9
EXIT_OK, EXIT_DIAG, EXIT_CONFIG = 0, 1, 2


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


def _need(cond, field_name, msg):
    if not cond:
        raise ConfigurationError(f"{field_name}: {msg}")


def validate_config(cfg: dict) -> dict:
    """Fill defaults, apply env overrides and check every field. Returns a new dict."""
    if not isinstance(cfg, dict):
        raise ConfigurationError("config: top level must be an object")
    cfg = copy.deepcopy(cfg)
    algo = cfg.get("algorithm")
    _need(algo in ALGORITHMS, "algorithm", f"must be one of {', '.join(ALGORITHMS)}")
    st = cfg.get("stream")
    _need(isinstance(st, dict), "stream", "missing or not an object")
    kind = st.get("kind")
    pea = algo in PEA_ALGORITHMS
    kinds = PEA_KINDS if pea else OCO_KINDS
    _need(kind in kinds, "stream.kind", f"must be one of {', '.join(kinds)} for {algo}")
    if pea:
        _need(isinstance(st.get("K"), int) and st["K"] >= 1, "stream.K", "positive integer required")
    else:
        _need(isinstance(st.get("d"), int) and st["d"] >= 1, "stream.d", "positive integer required")
    st.setdefault("seed", 0)
    st.setdefault("params", {})
    _need(isinstance(st["params"], dict), "stream.params", "must be an object")
    if "MSMWC_SEED" in os.environ:
        try:
            st["seed"] = int(os.environ["MSMWC_SEED"])
        except ValueError:
            raise ConfigurationError("MSMWC_SEED: not an integer") from None
    _need(isinstance(st["seed"], int), "stream.seed", "integer required")
    dom = st.get("domain")
    if dom is not None:
        _need(isinstance(dom, dict) and dom.get("kind") in ("ball", "box"), "stream.domain.kind", "ball or box")
    cfg["stream"] = st

    cfg.setdefault("T", 0)
    _need(isinstance(cfg["T"], int) and cfg["T"] >= 0, "T", "non-negative integer required")
    hz = cfg.get("horizons")
    if hz is not None:
        _need(isinstance(hz, list) and all(isinstance(h, int) and h >= 1 for h in hz), "horizons",
              "list of positive integers required")
    seeds = cfg.setdefault("seeds", [st["seed"]])
    _need(isinstance(seeds, list) and seeds and all(isinstance(s, int) for s in seeds), "seeds",
          "non-empty list of integers required")
    if "MSMWC_SEED" in os.environ:
        cfg["seeds"] = [st["seed"]]

    diag = cfg.setdefault("diagnostics", True)
    allowed = DIAGNOSTICS[algo] + OPTIONAL_DIAGNOSTICS.get(algo, ())
    if isinstance(diag, list):
        bad = [d for d in diag if d not in allowed]
        _need(not bad, "diagnostics", f"unknown for {algo}: {', '.join(map(str, bad))}")
    else:
        _need(isinstance(diag, bool), "diagnostics", "bool or list of names")
    cfg["output_dir"] = os.environ.get("MSMWC_OUTPUT_DIR", cfg.get("output_dir", "msmwc_out"))

    sec = cfg.setdefault("pea_core", {})
    if "B1" in sec:
        _need(_pos(sec["B1"]), "pea_core.B1", "positive number required")
    sec = cfg.setdefault("pea_adaptive", {})
    sec.setdefault("B0", 1.0)
    sec.setdefault("doubling", False)
    sec.setdefault("M", 1)
    _need(_pos(sec["B0"]), "pea_adaptive.B0", "positive number required")
    _need(isinstance(sec["M"], int) and sec["M"] >= 1, "pea_adaptive.M", "integer >= 1 required")
    sec = cfg.setdefault("baselines", {})
    if sec.get("eta") is not None:
        _need(_pos(sec["eta"]), "baselines.eta", "positive number required")
    sec.setdefault("optimistic", True)
    sec = cfg.setdefault("uol", {})
    sec.setdefault("roster", "standard")
    sec.setdefault("doubling", False)
    sec.setdefault("M0", 1)
    sec.setdefault("constants", {})
    _need(sec["roster"] in ("standard", "sea"), "uol.roster", "standard or sea")
    for k in ("L", "G"):
        if sec.get(k) is not None:
            _need(isinstance(sec[k], (int, float)) and sec[k] >= 0, f"uol.{k}", "non-negative number required")
    if algo == "uol_singlegrad":
        # every constant inequality is checked before anything runs
        stream = build_stream(cfg, max(cfg["T"], 1))
        G = _or(sec.get("G"), stream.truth["G"])
        L = _or(sec.get("L"), stream.truth["L"])
        bad = sorted(set(sec["constants"]) - {"lam", "C0", "gamma_convex", "gamma_exp"})
        _need(not bad, "uol.constants", f"unknown constant(s) {', '.join(bad)}")
        try:
            single_gradient_constants(G, stream.domain.diameter, L, **sec["constants"]).validate()
        except TypeError as e:
            raise ConfigurationError(f"uol.constants: {e}") from None
        except ConfigurationError as e:
            raise ConfigurationError(f"uol.constants: {e}") from None
    sw = cfg.setdefault("sweep", {})
    sw.setdefault("growth_factor", 3.0)
    sw.setdefault("band", 2.0)
    return cfg


def _or(v, default):
    return default if v is None else v


def _pos(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 and math.isfinite(v)


def load_config(path) -> dict:
    try:
        with open(path) as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"config: invalid JSON ({e})") from None
    except OSError as e:
        raise ConfigurationError(f"config: cannot read {path} ({e.strerror})") from None
    return validate_config(raw)


def enabled_diagnostics(cfg) -> tuple:
    d = cfg["diagnostics"]
    if d is True:
        return DIAGNOSTICS[cfg["algorithm"]]
    if d is False:
        return ()
    return tuple(d)


def build_stream(cfg, T: int, seed: int | None = None):
    st = cfg["stream"]
    seed = st["seed"] if seed is None else seed
    params = dict(st.get("params", {}))
    if cfg["algorithm"] in PEA_ALGORITHMS:
        return PeaStream(st["kind"], st["K"], T, seed, **params)
    dom = st.get("domain")
    domain = None
    if dom is not None:
        if dom["kind"] == "ball":
            domain = ConvexDomain.ball(np.asarray(dom.get("center", np.zeros(st["d"])), dtype=float),
                                       float(dom.get("radius", 1.0)))
        else:
            domain = ConvexDomain.box(np.asarray(dom["lower"], dtype=float), np.asarray(dom["upper"], dtype=float))
    for k in ("bias", "v", "c0", "c1", "u", "a"):
        if k in params:
            params[k] = np.asarray(params[k], dtype=float)
    return OcoStream(st["kind"], st["d"], T, seed, domain=domain, **params)


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------


@dataclass
class RegretTrace:
    algorithm: str
    T: int
    seed: int
    columns: dict = field(default_factory=dict)  # name -> per-round list
    summary: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return f"{self.algorithm}/T={self.T}/seed={self.seed}"

    @property
    def ok(self) -> bool:
        return all(d["ok"] for d in self.summary.get("diagnostics", {}).values())


def _diag(min_slack, ok=None, **extra) -> dict:
    ms = float(min_slack) + 0.0
    out = {"min_slack": ms if math.isfinite(ms) else None, "ok": bool(ms >= -SLACK_TOL) if ok is None else bool(ok)}
    out.update(extra)
    return out


def _agreement(r_inc, r_stored) -> dict:
    gap = abs(r_inc - r_stored)
    return {"incremental": r_inc, "stored": r_stored, "gap": gap, "ok": bool(gap <= 1e-9 * max(1.0, abs(r_stored)))}


def _run_pea(cfg, stream, diags) -> RegretTrace:
    algo, T, K = cfg["algorithm"], stream.T, stream.K
    cols = {f"p{i}": [] for i in range(K)}
    cols.update({f"l{i}": [] for i in range(K)})
    cols.update({f"m{i}": [] for i in range(K)})
    cols.update({"B": [], "active": [], "restart": []})
    cum_learner, cum_expert = 0.0, np.zeros(K)
    diagnostics = {}
    prior = np.full(K, 1.0 / K)
    session = wrapper = hedge = None
    if algo == "pea_core":
        B1 = cfg["pea_core"].get("B1")
        if B1 is None:
            B1 = max(float(np.max(np.abs(stream.losses[0] - stream.optimisms[0]))), 1e-12) if T else 1.0
        session = MsMwC(prior, max(T, 1), B1, record=bool(diags))
        B = B1
    elif algo == "pea_adaptive":
        sec = cfg["pea_adaptive"]
        if sec["doubling"]:
            wrapper = DoublingRunner(prior, sec["M"], sec["B0"])
        else:
            wrapper = RestartWrapper(prior, max(T, 1), sec["B0"])
    else:
        sec = cfg["baselines"]
        hedge = baselines.HedgeFixedEta(prior, sec.get("eta") or baselines.default_eta(K, T))
    for t in range(1, T + 1):
        m, loss = stream.next_pea(t)
        restarted = False
        if session is not None:
            # the harness knows the stream, so B_t covers the current error (needed by the end-to-end bound)
            B = max(B, float(np.max(np.abs(loss - m))))
            if not np.any(session.active_mask(B)):
                raise ConfigurationError(f"pea_core.B1: loss range {B:g} at round {t} is beyond the rate grid "
                                         f"built for B1={B1:g}; raise B1 or use pea_adaptive")
            p, _ = session.predict(m, B)
            active = int(np.count_nonzero(session.active_mask(B)))
            session.update(loss)
            Bt = B
        elif wrapper is not None:
            p = wrapper.predict(m)
            info = wrapper.update(loss)
            tr = wrapper.trace
            active, Bt, restarted = tr.active[-1], info["B"], info["restarted"]
        else:
            p = hedge.predict(m if cfg["baselines"]["optimistic"] else None)
            hedge.update(loss)
            active, Bt = K, hedge.trace.B[-1]
        cum_learner += float(loss @ p)
        cum_expert += loss
        for i in range(K):
            cols[f"p{i}"].append(float(p[i]))
            cols[f"l{i}"].append(float(loss[i]))
            cols[f"m{i}"].append(float(m[i]))
        cols["B"].append(float(Bt))
        cols["active"].append(int(active))
        cols["restart"].append(int(restarted))
    best = int(np.argmin(cum_expert)) if T else 0
    r_inc = cum_learner - float(cum_expert[best]) if T else 0.0
    P = np.array([cols[f"p{i}"] for i in range(K)]).T.reshape(T, K)
    L = np.array([cols[f"l{i}"] for i in range(K)]).T.reshape(T, K)
    r_stored = float(np.sum(L * (P - np.eye(K)[best]))) if T else 0.0
    summary = {"regret": r_stored, "best_expert": best}
    stats = stream.exact_statistics()
    summary["V_best"] = stats["V_best"]
    summary["B_T"] = stats["B_T"]
    if "regret_agreement" in diags:
        diagnostics["regret_agreement"] = _agreement(r_inc, r_stored)
    if session is not None and T and session.trace is not None:
        tr = session.trace
        # both sides scale with the loss range, so slacks are reported in units of it
        unit = max(1.0, B)
        if "lemma21" in diags:
            diagnostics["lemma21"] = _diag(min(float(np.min(one_step_slacks(tr, t))) for t in range(1, T + 1)) / unit)
        if "lemma3" in diags:
            diagnostics["lemma3"] = _diag(min(float(np.min(round_bound_slacks(tr, t, "corrected")))
                                              for t in range(0, T + 1)) / unit, form="corrected")
        if "lemma3_printed" in diags:
            diagnostics["lemma3_printed"] = _diag(min(float(np.min(round_bound_slacks(tr, t, "printed")))
                                                      for t in range(0, T + 1)) / unit, form="printed")
        if "theorem2" in diags:
            ok, rows = check_theorem2_bound(tr, np.eye(K)[best])
            diagnostics["theorem2"] = _diag(min(rhs - R for _, R, rhs in rows) if rows else math.inf, ok=ok)
    if wrapper is not None and T:
        tr = wrapper.trace
        ds = drift_statistics(tr)
        summary["restarts"] = list(tr.restart_rounds)
        summary["doubling_rounds"] = list(tr.doubling_rounds)
        summary["drift"] = ds["drift"]
        if "clip_contract" in diags:
            diagnostics["clip_contract"] = _diag(-ds["clip_excess"] / max(1.0, ds["B_T"]))
        if "telescoping" in diags:
            diagnostics["telescoping"] = _diag(2.0 * ds["B_T"] - ds["drift"])
        if "restart_rule" in diags:
            diagnostics["restart_rule"] = _restart_rule(tr, cfg["pea_adaptive"]["B0"], T, cfg["pea_adaptive"]["doubling"])
    summary["diagnostics"] = diagnostics
    return RegretTrace(algo, T, stream.seed, cols, summary)


def _restart_rule(tr, B0, T, doubling) -> dict:
    """First restart must land on the first t with B_t > B0 T (single-horizon runs)."""
    if doubling:
        return {"ok": True, "min_slack": None, "note": "horizon changes under doubling; rule not checked"}
    B = np.asarray(tr.B)
    hits = np.nonzero(B > B0 * T)[0]
    expect = int(hits[0]) + 1 if hits.size else None
    got = tr.restart_rounds[0] if tr.restart_rounds else None
    return {"ok": expect == got, "min_slack": None, "expected": expect, "observed": got}


def _run_uol(cfg, stream, diags) -> RegretTrace:
    algo, T, d = cfg["algorithm"], stream.T, stream.d
    sec = cfg["uol"]
    counter = QueryCounter()
    mode = "fullinfo" if algo == "uol_fullinfo" else "singlegrad"
    kw = {}
    if mode == "singlegrad":
        G = _or(sec.get("G"), stream.truth["G"])
        L = _or(sec.get("L"), stream.truth["L"])
        kw["constants"] = single_gradient_constants(G, stream.domain.diameter, L, **sec["constants"])
        kw["G"] = G
    else:
        # full-info mode only sees L (for the roster); never G or the curvature
        L = _or(sec.get("L"), stream.truth["L"])
        kw["roster"] = sec["roster"]
    cols = {}
    if T:
        tr = run_ensemble(stream, mode, counter=counter, L=L, doubling=sec["doubling"], M0=sec["M0"], **kw)
    else:
        tr = None
    X = tr.decisions() if tr is not None else np.zeros((0, d))
    F = stream.comparator_value()
    # incremental: loss values summed round by round, outside the oracle counter
    cum = 0.0
    vals = []
    for t in range(1, T + 1):
        v = stream.value(t, X[t - 1])
        cum += v
        vals.append(v)
    r_inc = cum - F
    r_stored = stream.regret(X)
    for j in range(d):
        cols[f"x{j}"] = [float(v) for v in X[:, j]]
    cols["f"] = vals
    if tr is not None:
        cols["B"] = [float(b) for b in tr.B_fed]
        cols["eq7_slack"] = [float(s) for s in tr.eq7_slack]
        cols["lemma25_slack"] = [float("nan") if s is None else float(s) for s in tr.lemma25_slack]
        if mode == "fullinfo":
            cols["residual"] = [float(r) for r in tr.residuals]
            cols["tolerance"] = [float(r) for r in tr.tolerances]
    stats = stream.exact_statistics()
    summary = {"regret": r_stored, "F_T": F, "V_T": stats["V_T"], "K": tr.K if tr else 0,
               "gradient_queries": counter.gradients, "value_queries": counter.values,
               "restarts": list(tr.restarts) if tr else [], "doubling_rounds": list(tr.doubling_rounds) if tr else []}
    for k in ("sigma2_1T", "Sigma2_1T"):
        if k in stats:
            summary[k] = stats[k]
    diagnostics = {}
    if "regret_agreement" in diags:
        diagnostics["regret_agreement"] = _agreement(r_inc, r_stored)
    if tr is not None:
        if "eq7" in diags:
            diagnostics["eq7"] = _diag(min(tr.eq7_slack))
        if "lemma25" in diags:
            sl = [s for s in tr.lemma25_slack if s is not None]
            diagnostics["lemma25"] = _diag(min(sl) if sl else math.inf)
        if "binary_search" in diags and mode == "fullinfo":
            gap = min(tl - r for r, tl in zip(tr.residuals, tr.tolerances))
            diagnostics["binary_search"] = _diag(gap, ok=gap >= 0)
    if "gradient_count" in diags and mode == "singlegrad":
        diagnostics["gradient_count"] = {"ok": counter.gradients == T, "min_slack": None,
                                         "calls": counter.gradients, "T": T}
    summary["diagnostics"] = diagnostics
    return RegretTrace(algo, T, stream.seed, cols, summary)


def run(cfg: dict, T: int | None = None, seed: int | None = None, write: bool = True) -> RegretTrace:
    """One run of the configured algorithm; writes <stem>.json and <stem>.csv."""
    T = cfg["T"] if T is None else int(T)
    stream = build_stream(cfg, T, seed)
    diags = enabled_diagnostics(cfg)
    if cfg["algorithm"] in PEA_ALGORITHMS:
        trace = _run_pea(cfg, stream, diags)
    else:
        trace = _run_uol(cfg, stream, diags)
    trace.summary.update({"algorithm": cfg["algorithm"], "T": T, "seed": stream.seed,
                          "stream_fingerprint": stream.fingerprint(), "ok": trace.ok})
    if write:
        out = Path(cfg["output_dir"])
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{cfg['algorithm']}_T{T}_seed{stream.seed}"
        write_trace_csv(trace, out / f"{stem}.csv")
        write_json({"config": cfg, "summary": trace.summary, "csv": f"{stem}.csv"}, out / f"{stem}.json")
    return trace


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def write_trace_csv(trace: RegretTrace, path) -> None:
    names = list(trace.columns)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t"] + names)
        for t in range(trace.T):
            w.writerow([t + 1] + [_fmt(trace.columns[n][t]) for n in names])


def read_trace_csv(path) -> dict:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        return {}
    head, body = rows[0], rows[1:]
    return {h: np.array([float(r[i]) for r in body]) for i, h in enumerate(head)}


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (float, np.floating)):
        f = float(o)
        return f if math.isfinite(f) else None
    return o


def write_json(obj, path) -> None:
    with open(path, "w", newline="\n") as f:
        json.dump(_jsonable(obj), f, sort_keys=True, indent=1, separators=(",", ": "))
        f.write("\n")


# ---------------------------------------------------------------------------
# sweep, check, plot data
# ---------------------------------------------------------------------------


def default_properties(cfg, stream) -> list:
    if cfg["algorithm"] in PEA_ALGORITHMS:
        return ["theorem4_shape"] if cfg["algorithm"] == "pea_adaptive" else []
    curv = stream.truth.get("curvature")
    return ["sqrt_band"] if curv == "convex" else ["log_growth"]


def sweep(cfg: dict, horizons=None, write: bool = True) -> dict:
    """Run every (horizon, seed) and test the growth properties.

    log_growth: mean regret at 16T is at most growth_factor times that at T,
        for every pair (T, 16T) in the sweep.
    sqrt_band: regret / sqrt(V_T) stays within a factor ``band``.
    theorem4_shape: PEA regret over the impossible-tuning shape stays within
        a factor 2 of its first value.
    """
    horizons = list(horizons or cfg.get("horizons") or [])
    if len(horizons) < 3:
        raise ConfigurationError("horizons: need at least 3")
    horizons = sorted(horizons)
    ratios = [horizons[i + 1] / horizons[i] for i in range(len(horizons) - 1)]
    if max(ratios) - min(ratios) > 1e-9 * max(ratios):
        raise ConfigurationError("horizons: must be geometric")
    props = cfg["sweep"].get("properties")
    traces, rows = [], []
    pea_traces = []
    for T in horizons:
        regs, Vs = [], []
        for s in cfg["seeds"]:
            tr = run(cfg, T, s, write=write)
            traces.append(tr)
            regs.append(tr.summary["regret"])
            Vs.append(tr.summary.get("V_T", tr.summary.get("V_best", 0.0)))
        rows.append({"T": T, "regret": float(np.mean(regs)), "V": float(np.mean(Vs)),
                     "regret_over_sqrtV": float(np.mean(regs)) / math.sqrt(np.mean(Vs)) if np.mean(Vs) > 0 else None})
    if props is None:
        props = default_properties(cfg, build_stream(cfg, 1))
    results = {}
    for prop in props:
        if prop == "log_growth":
            gf = cfg["sweep"]["growth_factor"]
            pairs = [(a["T"], b["T"], b["regret"] / a["regret"] if a["regret"] > 0 else math.inf)
                     for a in rows for b in rows if b["T"] == 16 * a["T"]]
            worst = max((g for _, _, g in pairs), default=None)
            results[prop] = {"pairs": pairs, "worst": worst, "ok": worst is not None and worst <= gf}
        elif prop == "sqrt_band":
            vals = [r["regret_over_sqrtV"] for r in rows if r["regret_over_sqrtV"] is not None]
            band = max(vals) / min(vals) if vals and min(vals) > 0 else math.inf
            results[prop] = {"values": vals, "band": band, "ok": band <= cfg["sweep"]["band"]}
        elif prop == "theorem4_shape":
            if not pea_traces:
                pea_traces = [_pea_trace_for(cfg, T, cfg["seeds"][0]) for T in horizons]
            rep = check_theorem4_shape(pea_traces)
            results[prop] = {"rows": rep["rows"], "growth": rep["growth"], "ok": rep["ok"]}
        else:
            raise ConfigurationError(f"sweep.properties: unknown property {prop!r}")
    report = {"algorithm": cfg["algorithm"], "rows": rows, "properties": results,
              "ok": all(r["ok"] for r in results.values()) and all(t.ok for t in traces)}
    if write:
        out = Path(cfg["output_dir"])
        out.mkdir(parents=True, exist_ok=True)
        write_json(report, out / f"sweep_{cfg['algorithm']}.json")
        with open(out / f"sweep_{cfg['algorithm']}.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["T", "regret", "V", "regret_over_sqrtV"])
            for r in rows:
                w.writerow([r["T"], _fmt(r["regret"]), _fmt(r["V"]),
                            "" if r["regret_over_sqrtV"] is None else _fmt(r["regret_over_sqrtV"])])
    report["traces"] = traces
    return report


def _pea_trace_for(cfg, T, seed):
    stream = build_stream(cfg, T, seed)
    w = RestartWrapper(np.full(stream.K, 1.0 / stream.K), T, cfg["pea_adaptive"]["B0"])
    for m, loss in stream:
        w.predict(m)
        w.update(loss)
    return w.trace


def check(summary_path) -> dict:
    """Re-run the diagnostics that a stored trace supports.

    Regret is recomputed from the CSV and compared with the stored summary;
    stored per-round slack columns are re-tested against the tolerance.
    """
    summary_path = Path(summary_path)
    with open(summary_path) as f:
        doc = json.load(f)
    cfg, summ = doc["config"], doc["summary"]
    cols = read_trace_csv(summary_path.parent / doc["csv"])
    results = {}
    T = summ["T"]
    if cfg["algorithm"] in PEA_ALGORITHMS:
        K = cfg["stream"]["K"]
        if T:
            P = np.stack([cols[f"p{i}"] for i in range(K)], axis=1)
            L = np.stack([cols[f"l{i}"] for i in range(K)], axis=1)
            best = int(np.argmin(L.sum(axis=0)))
            r = float(np.sum(L * (P - np.eye(K)[best])))
        else:
            r = 0.0
    else:
        F = summ["F_T"]
        r = float(np.sum(cols["f"])) - F if T else 0.0
    results["regret_agreement"] = _agreement(r, summ["regret"])
    for name in ("eq7_slack", "lemma25_slack"):
        if name in cols and T:
            v = cols[name][np.isfinite(cols[name])]
            results[name.replace("_slack", "")] = _diag(float(v.min()) if v.size else math.inf)
    if "residual" in cols and T:
        gap = float(np.min(cols["tolerance"] - cols["residual"]))
        results["binary_search"] = _diag(gap, ok=gap >= 0)
    for name, d in summ.get("diagnostics", {}).items():
        results.setdefault(name, {"ok": d["ok"], "min_slack": d.get("min_slack"), "stored": True})
    return {"diagnostics": results, "ok": all(d["ok"] for d in results.values())}


def emit_plotdata(traces, path, axis: str = "t") -> int:
    """Tidy CSV with columns series, metric, x, y. Returns the row count.

    axis="t": one row per round of each trace (cumulative loss or regret
    increments); axis="T": one row per trace and metric, x being the horizon,
    which is what a sweep wants.
    """
    n = 0
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["series", "metric", "x", "y"])
        for tr in traces:
            summ = tr.summary if isinstance(tr, RegretTrace) else tr["summary"]
            algo = summ.get("algorithm", getattr(tr, "algorithm", "trace"))
            if axis == "T":
                for metric in ("regret", "V_T", "V_best"):
                    if metric in summ:
                        w.writerow([algo, metric, summ["T"], _fmt(summ[metric])])
                        n += 1
                continue
            cols = tr.columns if isinstance(tr, RegretTrace) else tr["columns"]
            series = f"{algo}/T={summ['T']}/seed={summ['seed']}"
            if "f" in cols:
                y = np.cumsum(cols["f"])
                metric = "cumulative_loss"
            else:
                K = sum(1 for c in cols if c.startswith("p"))
                P = np.stack([cols[f"p{i}"] for i in range(K)], axis=1) if K and len(cols["B"]) else np.zeros((0, 1))
                L = np.stack([cols[f"l{i}"] for i in range(K)], axis=1) if K and len(cols["B"]) else np.zeros((0, 1))
                best = summ.get("best_expert", 0)
                y = np.cumsum(np.einsum("tk,tk->t", L, P) - L[:, best]) if len(P) else np.zeros(0)
                metric = "cumulative_regret"
            for t, v in enumerate(y, 1):
                w.writerow([series, metric, t, _fmt(v)])
                n += 1
    return n


def load_stored(summary_path) -> dict:
    """Summary JSON plus its CSV columns, in the shape emit_plotdata accepts."""
    summary_path = Path(summary_path)
    with open(summary_path) as f:
        doc = json.load(f)
    cols = read_trace_csv(summary_path.parent / doc["csv"])
    cols.pop("t", None)
    return {"summary": doc["summary"], "columns": cols}
