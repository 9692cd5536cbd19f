import csv
import io

import pytest

from artgas import cli
from artgas import config as cfgmod
from artgas.engine import ConfigError, Scheme
from artgas.traffic import ArrivalMode, TrafficClass


def test_parse_text():
    vals = cfgmod.parse_text("""
        # comment
        scheme = FCFS
        superframe.bo = 4   # trailing
        MU_M = 0.4
        device.2.class = heavy
    """)
    assert vals == {"scheme": Scheme.FCFS, "superframe.bo": 4, "allocator.mu_m": 0.4, "device.2.class": TrafficClass.HEAVY}


@pytest.mark.parametrize("text", ["nonsense", "no.such.key = 1", "superframe.bo = three", "device.1.color = red"])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        cfgmod.parse_text(text)


def test_env_override_precedence(tmp_path):
    f = tmp_path / "c.conf"
    f.write_text("superframe.bo = 5\nseed = 3\n")
    env = {"ARTGAS_SUPERFRAME__BO": "6", "ARTGAS_TRAFFIC__MODE": "periodic", "OTHER": "x"}
    vals = cfgmod.load(str(f), {"seed": 8}, environ=env)
    assert vals["superframe.bo"] == 6 and vals["seed"] == 8
    assert vals["traffic.mode"] is ArrivalMode.PERIODIC


def test_build_defaults():
    sim = cfgmod.build(cfgmod.load(environ={}))
    assert len(sim.devices) == 20
    assert sum(d.profile.rate for d in sim.devices) == pytest.approx(4.0)
    assert [d.profile.cls for d in sim.devices[:6]] == [TrafficClass.HEAVY] * 5 + [TrafficClass.LIGHT]


def test_table2_layout():
    vals = cfgmod.load(environ={}, overrides={"scenario": "table2"})
    sim = cfgmod.build(vals)
    d7 = sim.devices[7]  # scenario 3: P_d 25, P_r 15
    assert cfgmod.scenario_of(7, vals) == 3
    assert (d7.base_importance, d7.realtime_prob, d7.exception_prob, d7.initial_rate) == (5, 1.0, 0.0, 15.0)
    groups = {}
    for d in sim.devices:
        groups.setdefault(cfgmod.scenario_of(d.device_id, vals), []).append(d.profile.rate)
    assert all(sum(r) == pytest.approx(0.8) for r in groups.values())


def test_preset_scenario():
    sim = cfgmod.build(cfgmod.load(environ={}, overrides={"scenario": "scenario5"}))
    assert all(d.exception_prob == 1.0 and d.base_importance == 10 for d in sim.devices)


@pytest.mark.parametrize("ov", [{"traffic.n_heavy": 25}, {"superframe.so": 5}, {"device.30.rate": 1.0}, {"allocator.mu_l": 0.1}, {"scenario": "nope"}])
def test_build_rejects(ov):
    with pytest.raises(ConfigError):
        cfgmod.build(cfgmod.load(environ={}, overrides=ov))


def test_int_lists():
    assert cli.parse_int_list("1..5") == [1, 2, 3, 4, 5]
    assert cli.parse_int_list("0,5, 10") == [0, 5, 10]


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_subcommand(tmp_path):
    out = tmp_path / "r.csv"
    assert cli.main(["run", "--scheme", "fcfs", "--seed", "2", "--superframes", "20", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 1 and rows[0]["scheme"] == "fcfs" and rows[0]["seed"] == "2"
    assert list(rows[0]) == ["scheme", "scenario", "n_heavy", "gamma", "seed", "success_prob", "avg_delay_s",
                             "avg_wait_s", "bandwidth_util", "frames_generated", "frames_delivered", "frames_dropped", "error"]


def test_compare_grid(tmp_path):
    out = tmp_path / "c.csv"
    rc = cli.main(["compare", "--superframes", "10", "--loads", "0,5,10,15,20", "--seeds", "1..5", "--out", str(out)])
    assert rc == 0
    rows = read_rows(out)
    assert len(rows) == 50
    keys = [(r["scheme"], int(r["n_heavy"]), int(r["seed"])) for r in rows]
    assert keys == sorted(keys)
    assert {float(r["gamma"]) for r in rows if r["n_heavy"] == "5"} == {4.0}


def test_sweep(tmp_path):
    out = tmp_path / "s.csv"
    rc = cli.main(["sweep", "--param", "mu_m", "--values", "0.3,0.5", "--seeds", "1,2", "--superframes", "10", "--out", str(out)])
    assert rc == 0
    rows = read_rows(out)
    assert [(r["param"], r["value"]) for r in rows] == [("mu_m", "0.3")] * 2 + [("mu_m", "0.5")] * 2


def test_by_scenario_rows(tmp_path, capsys):
    rc = cli.main(["run", "--set", "scenario=table2", "--by-scenario", "--superframes", "10", "--out", "-"])
    assert rc == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [r["scenario"] for r in rows] == ["all", "1", "2", "3", "4", "5"]


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--set", "superframe.bo=banana", "--out", "-"],
        ["run", "--set", "nokey", "--out", "-"],
        ["run", "--config", "/nonexistent.conf", "--out", "-"],
        ["compare", "--set", "traffic.n_heavy=99", "--out", "-"],
        ["sweep", "--param", "bogus", "--values", "1", "--out", "-"],
        ["compare", "--scenarios", "scenario9", "--out", "-"],
    ],
)
def test_config_errors_exit_2(argv):
    assert cli.main(argv) == 2


def test_env_error_exit_2(monkeypatch):
    monkeypatch.setenv("ARTGAS_SEED", "x")
    assert cli.main(["run", "--out", "-"]) == 2


def test_null_written_for_empty_metrics(tmp_path):
    out = tmp_path / "n.csv"
    cli.main(["run", "--superframes", "1", "--out", str(out)])
    row = read_rows(out)[0]
    assert row["avg_delay_s"] == "null" and row["bandwidth_util"] == "null"
