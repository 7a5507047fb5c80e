import json
import subprocess
import sys

import pytest

from slimnoc import cli, topo
from slimnoc.cli import InfeasibleN, fixed_n, main, n_splits


def test_generate_q_p(tmp_path):
    assert main(["generate", "--topology", "sn", "--q", "5", "--p", "4", "--name", "sns",
                 "--dot", "--out", str(tmp_path)]) == 0
    t = topo.load(tmp_path / "sns.json")
    assert t.n_routers == 50 and t.n_nodes == 200
    assert (tmp_path / "sns.dot").exists()
    man = json.loads((tmp_path / "sns.manifest.json").read_text())
    assert man["command"] == "generate" and man["version"] == cli.__version__
    assert man["outputs"][0].endswith("sns.json")


def test_round_trip_edge_set(tmp_path):
    main(["generate", "--preset", "snl_gr", "--name", "a", "--out", str(tmp_path)])
    main(["generate", "--input", str(tmp_path / "a.json"), "--name", "b", "--out", str(tmp_path)])
    a, b = topo.load(tmp_path / "a.json"), topo.load(tmp_path / "b.json")
    assert a.edge_set() == b.edge_set() and a.labels == b.labels


def test_fixed_n_1296(tmp_path, capsys):
    assert main(["generate", "--N", "1296", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "q=9 p=8" in out and "kappa=2" in out


def test_fixed_n_1000(tmp_path, capsys):
    with pytest.raises(InfeasibleN) as err:
        fixed_n(1000)
    assert 784 in err.value.suggestions and 1024 in err.value.suggestions
    assert main(["generate", "--N", "1000", "--out", str(tmp_path)]) == 3
    assert "784" in capsys.readouterr().err


def test_splits_flag_band():
    # 200 = 2*5^2*4 = 2*2^2*25; only the first is balanced
    splits = {s["q"]: s for s in n_splits(200)}
    assert splits[5]["in_band"] and splits[5]["p"] == 4
    assert not splits[2]["in_band"]


def test_field_command(tmp_path):
    assert main(["field", "--q", "9", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "field_q9.json").read_text())
    assert doc["q"] == 9 and len(doc["mul"]) == 9


def test_layout_and_cost(tmp_path, capsys):
    assert main(["layout", "--preset", "sn_basic", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "sn_s_basic.layout.csv").exists()
    assert main(["cost", "--preset", "sn_subgr", "--out", str(tmp_path)]) == 0
    assert "delta_cb=2400" in capsys.readouterr().out


def test_wires_exit_codes(tmp_path):
    assert main(["wires", "--preset", "sn_subgr", "--out", str(tmp_path)]) == 0
    assert main(["wires", "--preset", "snl_subgr", "--out", str(tmp_path)]) == 3
    assert main(["wires", "--preset", "snl_subgr", "--per-link", "--out", str(tmp_path)]) == 0


def test_route_command(tmp_path, capsys):
    assert main(["route", "--preset", "pfbf4", "--out", str(tmp_path)]) == 0
    assert "acyclic" in capsys.readouterr().out
    assert main(["route", "--topology", "t2d", "--rows", "1", "--cols", "6", "--p", "1",
                 "--vc", "1", "--scheme", "xy", "--out", str(tmp_path)]) == 3


def test_unknown_preset_and_empty_compare(tmp_path):
    assert main(["layout", "--preset", "nope", "--out", str(tmp_path)]) == 2
    assert main(["compare", "--presets", "", "--out", str(tmp_path)]) == 2
    assert main(["compare", "--presets", "sn_subgr,nope", "--out", str(tmp_path)]) == 2


def test_simulate_and_replay_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["simulate", "--preset", "sn_subgr", "--rate", "0.1", "--cycles", "2000",
            "--warmup", "200", "--seed", "3"]
    assert main(args + ["--out", str(a)]) == 0
    rep = next(a.glob("*.report.json"))
    man = next(a.glob("*.manifest.json"))
    assert main(["replay", str(man), "--out", str(b)]) == 0
    assert (b / rep.name).read_bytes() == rep.read_bytes()


def test_sweep_compare_report(tmp_path, capsys):
    common = ["--rates", "0.05,0.1", "--cycles", "1500", "--warmup", "200", "--out", str(tmp_path)]
    assert main(["sweep", "--preset", "sn_subgr"] + common) == 0
    assert main(["compare", "--presets", "sn_subgr,t2d4", "--pattern", "RND"] + common) == 0
    rows = (tmp_path / "compare_RND.csv").read_text().splitlines()
    assert rows[0].split(",") == cli.COMPARE_FIELDS and len(rows) == 5
    man = next(tmp_path.glob("compare_RND.manifest.json"))
    first = (tmp_path / "compare_RND.csv").read_bytes()
    replay = tmp_path / "replay"
    assert main(["replay", str(man), "--out", str(replay)]) == 0
    assert (replay / "compare_RND.csv").read_bytes() == first
    out = tmp_path / "rep"
    assert main(["report", str(tmp_path), "--out", str(out)]) == 0
    for m in ("latency_cycles", "latency_ns", "throughput"):
        head = (out / f"report_{m}.csv").read_text().splitlines()[0]
        assert head.startswith("rate,") and "sn_subgr" in head and "t2d4" in head
    assert main(["report", str(tmp_path), "--format", "json", "--out", str(out)]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert set(doc) == {"latency_cycles", "latency_ns", "throughput"}


def test_pfbf_rev_compare(tmp_path):
    assert main(["compare", "--presets", "pfbf4", "--pattern", "REV", "--rates", "0.05",
                 "--cycles", "1000", "--warmup", "100", "--out", str(tmp_path)]) == 0


def test_report_version_warning(tmp_path, capsys):
    for v, name in (("0.1.0", "x"), ("9.9.9", "y")):
        (tmp_path / f"{name}.csv").write_text("rate,latency_cycles,latency_ns,throughput,saturated\n"
                                              "0.1,10,5,0.1,0\n")
        (tmp_path / f"{name}.manifest.json").write_text(json.dumps({"version": v}))
    assert main(["report", str(tmp_path), "--out", str(tmp_path / "o")]) == 0
    assert "different tool versions" in capsys.readouterr().err


def test_report_missing_input(tmp_path):
    assert main(["report", str(tmp_path / "absent")]) == 3


def test_stall_exit_code(tmp_path, monkeypatch):
    from slimnoc.route import assign_vcs, build_tables
    from slimnoc.sim import SimConfig, run
    ring = topo.build_torus(1, 6, 1)
    tab = build_tables(ring)
    stalling = SimConfig(ring, tables=tab, policy=assign_vcs(ring, tab, 1, "xy"), vc=1,
                         buffering="EB-Small", injection_rate=0.9, stall_bound=2000,
                         measure_cycles=5000, drain_cycles=5000)
    monkeypatch.setattr(cli, "run", lambda cfg: run(stalling, verify=False))
    rc = main(["simulate", "--preset", "t2d4", "--out", str(tmp_path)])
    assert rc == 4
    assert json.loads((tmp_path / "stall.report.json").read_text())["stalled"] is True


def test_entry_point_version():
    out = subprocess.run([sys.executable, "-m", "slimnoc.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and cli.__version__ in out.stdout


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    assert main(["field", "--q", "4"]) == 0
    assert (tmp_path / "env" / "field_q4.json").exists()
