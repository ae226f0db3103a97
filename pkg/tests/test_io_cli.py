import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from ppres import circuit, cli, io
from ppres.errors import ConfigError, FileIOError, SchemaError
from ppres.units import KINDS, format_quantity, parse_quantity

# --- units -----------------------------------------------------------------

@pytest.mark.parametrize("text, kind, value", [
    ("300nm", "length", 300e-9), ("7.5GHz", "frequency", 7.5e9),
    ("0.2pH/sq", "sheet_inductance", 0.2e-12), ("100/s", "rate", 100.0),
    ("-100dBm", "dbm", -100.0), ("15.93pH", "inductance", 15.93e-12),
    ("50Ohm", "impedance", 50.0), ("1e4", "dimensionless", 1e4), ("500mT", "field", 0.5),
    ("2.5us", "time", 2.5e-6), ("20mK", "temperature", 0.02),
])
def test_parse_quantity(text, kind, value):
    assert parse_quantity(text, kind) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text, kind", [
    ("300", "length"), ("300nF", "length"), ("1,000nm", "length"), ("abc", "length"),
    ("3Xm", "length"), ("1e400m", "length"), ("5m", "dimensionless"), ("-100", "dbm"),
    ("7.5 G Hz", "frequency"),
])
def test_parse_quantity_rejects(text, kind):
    with pytest.raises(ConfigError):
        parse_quantity(text, kind)


@settings(max_examples=1000, deadline=None)
@given(v=st.floats(allow_nan=False, allow_infinity=False), kind=st.sampled_from(sorted(KINDS)))
def test_quantity_round_trip(v, kind):
    text = format_quantity(v, kind) if kind != "dimensionless" else repr(v)
    assert parse_quantity(text, kind) == v


# --- config and records ----------------------------------------------------

def test_config_parsing():
    raw = io.parse_config_text("# design\nf_r = 7.5GHz  # resonance\n\nL=15.93pH\n")
    assert raw == {"f_r": "7.5GHz", "L": "15.93pH"}
    for bad in ("f_r 7.5GHz", "f_r = 1GHz\nf_r = 2GHz", " = 3", "x ="):
        with pytest.raises(ConfigError):
            io.parse_config_text(bad)
    with pytest.raises(ConfigError):
        io.typed_config({"nope": "1"}, {"f_r": ("frequency", 1.0)})
    typed = io.typed_config({"n": "7", "host": "all"}, {"n": ("int", 1), "host": ("text", "s"),
                                                        "f": ("frequency", 2.0)})
    assert typed == {"n": 7, "host": "all", "f": 2.0}


def test_record_round_trip(design, params):
    text = io.dump_record(design, io.DESIGN_FIELDS)
    assert io.load_record(circuit.DeviceDesign, text, io.DESIGN_FIELDS) == design
    text = io.dump_record(params, io.CIRCUIT_FIELDS)
    assert io.load_record(circuit.CircuitParams, text, io.CIRCUIT_FIELDS) == params
    with pytest.raises(ConfigError):
        io.load_record(circuit.CircuitParams, "f_r = 1GHz\n", io.CIRCUIT_FIELDS)


# --- CSV ingest ------------------------------------------------------------

def _write(path, text):
    path.write_text(text)
    return path


def test_ingest_trace_three_rows(tmp_path):
    p = _write(tmp_path / "t.csv", "freq_hz,re,im\n1e9,0.5,0.1\n2e9,0.4,-0.2\n3e9,-1,0\n")
    pts = io.ingest_csv(p, "trace")
    assert len(pts) == 3
    assert pts[1] == io.TracePoint(2e9, complex(0.4, -0.2))


def test_ingest_trace_errors(tmp_path):
    with pytest.raises(SchemaError, match="'freq'") as exc:
        io.ingest_csv(_write(tmp_path / "a.csv", "freq,re,im\n1,0,0\n"), "trace")
    assert exc.value.column == "freq"
    with pytest.raises(SchemaError) as exc:
        io.ingest_csv(_write(tmp_path / "b.csv", "freq_hz,re,im\n2,0,0\n1,0,0\n"), "trace")
    assert exc.value.row == 2
    with pytest.raises(SchemaError) as exc:
        io.ingest_csv(_write(tmp_path / "c.csv", "freq_hz,re,im\n1,0\n"), "trace")
    assert exc.value.row == 1
    with pytest.raises(SchemaError):
        io.ingest_csv(_write(tmp_path / "d.csv", "freq_hz,re,im\n1,nan,0\n"), "trace")
    with pytest.raises(FileIOError):
        io.ingest_csv(tmp_path / "missing.csv", "trace")


def test_ingest_sweep(tmp_path):
    rows = ["b_tesla,angle_rad,f_r_hz,q_i,direction"]
    rows += [f"{0.05 * i},,{7.48e9 - i * 1e6},2e4,up" for i in range(10)]
    recs = io.ingest_csv(_write(tmp_path / "s.csv", "\n".join(rows) + "\n"), "sweep")
    assert len(recs) == 10 and recs[0].field_angle is None and recs[3].Q_i == 2e4
    rows[7] = "x0.3,,7.4e9,,up"
    with pytest.raises(SchemaError) as exc:
        io.ingest_csv(_write(tmp_path / "s7.csv", "\n".join(rows) + "\n"), "sweep")
    assert exc.value.row == 7 and exc.value.column == "b_tesla"
    assert "row 7" in str(exc.value)
    rows[7] = "0.3,,7.4e9,,sideways"
    with pytest.raises(SchemaError):
        io.ingest_csv(_write(tmp_path / "s8.csv", "\n".join(rows) + "\n"), "sweep")


def test_json_special_values():
    text = io.dumps_json({"b": math.nan, "a": [math.inf, -math.inf, np.float64(1.5), np.int64(3)]})
    assert json.loads(text) == {"a": ["inf", "-inf", 1.5, 3], "b": "nan"}
    assert text.index('"a"') < text.index('"b"')


# --- CLI -------------------------------------------------------------------

def _run(command, out, *inputs, seed=None, overrides=(), config=None):
    cfg = cli.RunConfig(command, [str(p) for p in inputs], out, list(overrides), seed, config)
    return cli.execute(cfg)


def _assert_units(node, path="results"):
    if isinstance(node, dict):
        if "value" in node:
            assert set(node) == {"value", "unit"}, path
            assert isinstance(node["unit"], str), path
            return
        for k, v in node.items():
            _assert_units(v, f"{path}.{k}")
    elif isinstance(node, list):
        for i, v in enumerate(node):
            _assert_units(v, f"{path}[{i}]")
    else:
        assert not isinstance(node, (int, float)) or isinstance(node, bool), \
            f"bare number at {path}"


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    out = {}
    for cmd in ("design", "protocol-count", "protocol-dispersive", "simulate"):
        out[cmd] = _run(cmd, base / cmd, seed=3)
    out["fit"] = _run("fit", base / "fit", base / "simulate" / "trace.csv")
    out["tune"] = _run("tune", base / "tune", base / "simulate" / "sweep.csv")
    out["_dir"] = base
    return out


def test_every_number_has_a_unit(runs):
    for cmd, doc in runs.items():
        if cmd != "_dir":
            _assert_units(doc["results"])
            on_disk = json.loads((runs["_dir"] / cmd / "results.json").read_text())
            assert on_disk["files"] == doc["files"]
            for name in doc["files"]:
                assert (runs["_dir"] / cmd / name).exists()


def test_design_results(runs):
    r = runs["design"]["results"]
    assert r["delta_I"]["value"] == pytest.approx(394.9e-9, rel=2e-3)
    assert r["g0_er"]["value"] == pytest.approx(30.0e3, rel=0.10)
    assert r["F_P_spin"]["value"] == pytest.approx(4.07e15, rel=0.15)
    assert r["galvanic_Q_c"]["value"] == pytest.approx(66.6, rel=5e-3)


def test_fit_recovers_injected(runs):
    r, inj = runs["fit"]["results"], runs["simulate"]["results"]["injected"]
    for k in ("f_r", "Q_i", "Q_c"):
        assert r[k]["value"] == pytest.approx(inj[k]["value"], rel=1e-6)
    for k in ("a", "phi0", "tau"):
        assert r["deembed"][k]["value"] == pytest.approx(inj[k]["value"], rel=1e-6)


def test_tune_results(runs):
    r = runs["tune"]["results"]
    assert r["detuning_at_max_field"]["value"] == pytest.approx(-121.971828e6, rel=1e-6)
    assert r["events"] == []


def test_protocol_results(runs):
    r = runs["protocol-count"]["results"]
    assert r["tau_m_reduction"]["value"] == pytest.approx(41.2, rel=1e-2)
    assert r["regime_reference"] == "crossover"
    assert abs(r["monte_carlo_reference"]["snr"]["value"] - 2) < \
        3 * r["monte_carlo_reference"]["stderr"]["value"]
    d = runs["protocol-dispersive"]["results"]
    assert d["best"]["fidelity"]["value"] >= 0.80
    rows = (runs["_dir"] / "protocol-dispersive" / "readout.csv").read_text().splitlines()
    assert rows[0].startswith("delta_rad_s,n_bar,tau_m_opt_s,t1_s,fidelity")
    assert len(rows) == 42


def _snapshot(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def test_cli_byte_determinism_all_commands(runs, tmp_path):
    again = tmp_path / "again"
    for cmd in ("design", "protocol-count", "protocol-dispersive", "simulate"):
        _run(cmd, again / cmd, seed=3)
    _run("fit", again / "fit", again / "simulate" / "trace.csv")
    _run("tune", again / "tune", again / "simulate" / "sweep.csv")
    first = _snapshot(runs["_dir"])
    second = _snapshot(again)
    assert first.keys() == second.keys()
    for name in first:
        assert first[name] == second[name], name
    assert any(n.endswith(".svg") for n in first)


@settings(max_examples=1000, deadline=None,
          suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(seed=st.integers(0, 2**31 - 1), noise=st.floats(0, 0.05),
       qi=st.floats(1e3, 1e6), jump=st.booleans())
def test_cli_determinism_property(tmp_path, seed, noise, qi, jump):
    overrides = [f"noise_sigma = {noise!r}", f"Q_i = {qi!r}", "n_points = 64",
                 "n_fields = 12", "noise_hz = 20kHz"]
    if jump:
        overrides.append("jump_field = 200mT")
    a = _run("simulate", tmp_path / f"a{seed}", seed=seed, overrides=overrides)
    b = _run("simulate", tmp_path / f"b{seed}", seed=seed, overrides=overrides)
    assert a == b
    assert _snapshot(tmp_path / f"a{seed}") == _snapshot(tmp_path / f"b{seed}")


def test_config_file_and_overrides(tmp_path):
    cfg = _write(tmp_path / "d.cfg", "eta = 0.5\nalpha = 10/s  # better detector\n")
    doc = _run("protocol-count", tmp_path / "o", config=str(cfg),
               overrides=["mc_trials = 0", "T1 = 1ms"])
    assert doc["results"]["T1"]["value"] == 1e-3
    assert "monte_carlo_reference" not in doc["results"]


def test_run_reports_errors(tmp_path, capsys):
    code = cli.run(cli.RunConfig("design", [], tmp_path, ["L = 3"], None, None))
    out, err = capsys.readouterr()
    assert code == 2
    assert json.loads(out)["error"] == "config-parse"
    assert "L" in err
    bad = _write(tmp_path / "bad.csv", "freq,re,im\n")
    code = cli.run(cli.RunConfig("fit", [str(bad)], tmp_path / "f", [], None, None))
    out, _ = capsys.readouterr()
    assert code == 2 and json.loads(out) == {
        "error": "schema", "column": "freq", "row": 0,
        "message": "header column 1 is 'freq', expected 'freq_hz'"}
    code = cli.run(cli.RunConfig("protocol-count", [], tmp_path / "p", ["eta = 2"], None, None))
    out, _ = capsys.readouterr()
    assert code == 1 and json.loads(out)["error"] == "domain"
    with pytest.raises(ConfigError):
        cli.RunConfig("bogus")


def test_unwritable_output(tmp_path, monkeypatch):
    # permission bits are not enforced for root, so simulate the denial
    monkeypatch.setattr(cli.os, "access", lambda path, mode: False)
    with pytest.raises(FileIOError, match="not writable"):
        _run("simulate", tmp_path / "ro")


def test_output_path_is_a_file(tmp_path):
    blocker = _write(tmp_path / "file", "x")
    with pytest.raises(FileIOError):
        _run("simulate", blocker / "sub")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ppres", "simulate", "--out", str(tmp_path),
                           "--seed", "1", "--set", "n_points=32"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "ppres", "tune", str(tmp_path / "nope.csv"),
                           "--out", str(tmp_path / "t")], capture_output=True, text=True)
    assert proc.returncode == 2
    assert json.loads(proc.stdout)["error"] == "file-io"
    assert proc.stderr.startswith("ppres tune:")
