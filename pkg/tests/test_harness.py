import csv
import json

import numpy as np
import pytest

from msmwc import harness
from msmwc.__main__ import main


def cfg_for(tmp_path, **over):
    base = {"algorithm": "pea_core", "stream": {"kind": "drifting_leader", "K": 4, "seed": 1}, "T": 120,
            "output_dir": str(tmp_path / "out")}
    base.update(over)
    return harness.validate_config(base)


def write_cfg(tmp_path, doc, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


PEA_STREAMS = {"kind": "scale_shock", "K": 3, "seed": 2, "params": {"shock_round": 60}}
OPT_STREAM = {"kind": "optimism_quality", "K": 3, "seed": 2}
OCO_STREAM = {"kind": "quadratic_drift", "d": 2, "seed": 2}


@pytest.mark.parametrize("algo,stream", [
    ("pea_core", {"kind": "optimism_quality", "K": 3, "seed": 2}),
    ("pea_adaptive", PEA_STREAMS),
    ("baselines.hedge_fixed_eta", PEA_STREAMS),
    ("uol_fullinfo", OCO_STREAM),
    ("uol_singlegrad", OCO_STREAM),
])
def test_run_every_algorithm(tmp_path, algo, stream):
    cfg = cfg_for(tmp_path, algorithm=algo, stream=stream, T=100)
    tr = harness.run(cfg)
    d = tr.summary["diagnostics"]
    assert set(harness.DIAGNOSTICS[algo]) <= set(d)
    assert d["regret_agreement"]["ok"]
    assert tr.ok
    stem = tmp_path / "out" / f"{algo}_T100_seed2"
    assert (tmp_path / "out" / f"{stem.name}.csv").exists()
    rep = harness.check(tmp_path / "out" / f"{stem.name}.json")
    assert rep["ok"] and rep["diagnostics"]["regret_agreement"]["ok"]


@pytest.mark.parametrize("algo,stream", [("pea_core", PEA_STREAMS), ("uol_fullinfo", OCO_STREAM)])
def test_horizon_zero(tmp_path, algo, stream):
    tr = harness.run(cfg_for(tmp_path, algorithm=algo, stream=stream, T=0))
    assert tr.T == 0 and tr.summary["regret"] == 0.0 and tr.ok


def test_two_way_regret_agreement(tmp_path):
    tr = harness.run(cfg_for(tmp_path))
    a = tr.summary["diagnostics"]["regret_agreement"]
    cols = harness.read_trace_csv(tmp_path / "out" / "pea_core_T120_seed1.csv")
    P = np.stack([cols[f"p{i}"] for i in range(4)], 1)
    L = np.stack([cols[f"l{i}"] for i in range(4)], 1)
    best = int(np.argmin(L.sum(0)))
    assert abs(float(np.sum(L * (P - np.eye(4)[best]))) - tr.summary["regret"]) <= 1e-9
    assert a["ok"]


def test_restart_round_reported(tmp_path):
    cfg = cfg_for(tmp_path, algorithm="pea_adaptive", stream=PEA_STREAMS, T=100)
    tr = harness.run(cfg)
    rr = tr.summary["diagnostics"]["restart_rule"]
    assert rr["ok"] and tr.summary["restarts"] == [60]


def test_reruns_are_byte_identical(tmp_path):
    for algo, stream in (("pea_adaptive", PEA_STREAMS), ("uol_singlegrad", OCO_STREAM)):
        outs = []
        for k in range(2):
            cfg = cfg_for(tmp_path, algorithm=algo, stream=stream, T=64, output_dir=str(tmp_path / f"o{k}"))
            harness.run(cfg)
            stem = f"{algo}_T64_seed2"
            outs.append([(tmp_path / f"o{k}" / (stem + ext)).read_bytes() for ext in (".csv",)])
            outs[-1].append(json.loads((tmp_path / f"o{k}" / (stem + ".json")).read_text())["summary"])
        assert outs[0] == outs[1]


def test_env_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("MSMWC_SEED", "7")
    monkeypatch.setenv("MSMWC_OUTPUT_DIR", str(tmp_path / "env"))
    cfg = harness.load_config(write_cfg(tmp_path, {"algorithm": "pea_core",
                                                   "stream": {"kind": "iid_gap", "K": 2, "seed": 1}, "T": 5}))
    harness.run(cfg)
    assert (tmp_path / "env" / "pea_core_T5_seed7.json").exists()


@pytest.mark.parametrize("doc,field", [
    ({"algorithm": "nope", "stream": {"kind": "iid_gap", "K": 2}, "T": 5}, "algorithm"),
    ({"algorithm": "pea_core", "stream": {"kind": "iid_gap"}, "T": 5}, "stream.K"),
    ({"algorithm": "pea_core", "stream": {"kind": "linear_drift", "d": 2}, "T": 5}, "stream.kind"),
    ({"algorithm": "pea_core", "stream": {"kind": "iid_gap", "K": 2}, "T": -1}, "T"),
    ({"algorithm": "uol_singlegrad", "stream": {"kind": "logistic_drift", "d": 2},
      "T": 5, "uol": {"constants": {"lam": 1e-3}}}, "lambda"),
    ({"algorithm": "uol_singlegrad", "stream": {"kind": "logistic_drift", "d": 2},
      "T": 5, "uol": {"constants": {"zeta": 1}}}, "uol.constants"),
])
def test_config_errors_name_the_field(tmp_path, doc, field, capsys):
    with pytest.raises(harness.ConfigurationError, match=field.replace(".", r"\.")):
        harness.validate_config(doc)
    assert main(["run", write_cfg(tmp_path, doc)]) == 2
    assert field.split(".")[-1] in capsys.readouterr().err


def test_cli_exit_codes(tmp_path, capsys):
    ok = {"algorithm": "pea_core", "stream": {"kind": "drifting_leader", "K": 3, "seed": 0}, "T": 50,
          "output_dir": str(tmp_path / "cli")}
    assert main(["run", write_cfg(tmp_path, ok)]) == 0
    out = capsys.readouterr().out
    assert "PASS lemma21" in out
    # the printed round-zero bound is an optional diagnostic and fails at the auxiliary round
    bad = dict(ok, T=300, diagnostics=["lemma3_printed"])
    assert main(["run", write_cfg(tmp_path, bad, "b.json")]) == 1
    assert main(["check", str(tmp_path / "cli" / "pea_core_T50_seed0.json")]) == 0
    assert main(["run", str(tmp_path / "missing.json")]) == 2


def test_core_range_outgrowing_grid_is_a_config_error(tmp_path, capsys):
    doc = {"algorithm": "pea_core", "stream": PEA_STREAMS, "T": 100, "output_dir": str(tmp_path / "x")}
    assert main(["run", write_cfg(tmp_path, doc)]) == 2
    assert "pea_core.B1" in capsys.readouterr().err
    ok = dict(doc, pea_core={"B1": 1000.0})
    assert main(["run", write_cfg(tmp_path, ok, "ok.json")]) == 0


def test_emit_plot(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["emit-plot", "--out", str(out)]) == 0
    assert out.read_text() == "series,metric,x,y\n"
    traces = []
    for algo, stream in (("pea_core", OPT_STREAM), ("pea_adaptive", PEA_STREAMS),
                         ("baselines.hedge_fixed_eta", PEA_STREAMS)):
        for T in (16, 32, 64, 128, 256):
            traces.append(harness.run(cfg_for(tmp_path, algorithm=algo, stream=stream, T=T), write=False))
    n = harness.emit_plotdata(traces, out, axis="T")
    with open(out) as f:
        rows = list(csv.DictReader(f))
    assert n == len(rows)
    per_metric = {}
    for r in rows:
        per_metric.setdefault(r["metric"], []).append(r)
    assert len(per_metric["regret"]) == 15
    one = tmp_path / "one.csv"
    harness.emit_plotdata(traces[:1], one)
    with open(one) as f:
        rows = list(csv.DictReader(f))
    assert len({r["series"] for r in rows}) == 1 and len(rows) == 16


def test_emit_plot_from_stored(tmp_path):
    harness.run(cfg_for(tmp_path, T=20))
    out = tmp_path / "q.csv"
    assert main(["emit-plot", str(tmp_path / "out" / "pea_core_T20_seed1.json"), "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert [int(r["x"]) for r in rows] == list(range(1, 21))


def test_sweep_rules_and_output(tmp_path):
    cfg = cfg_for(tmp_path, algorithm="uol_fullinfo", stream={"kind": "quadratic_drift", "d": 1, "seed": 0,
                                                             "params": {"drift": "decay"}})
    with pytest.raises(harness.ConfigurationError):
        harness.sweep(cfg, [16, 32])
    with pytest.raises(harness.ConfigurationError):
        harness.sweep(cfg, [16, 32, 128])
    rep = harness.sweep(cfg, [16, 64, 256])
    assert [r["T"] for r in rep["rows"]] == [16, 64, 256]
    assert "log_growth" in rep["properties"]
    assert (tmp_path / "out" / "sweep_uol_fullinfo.csv").exists()
