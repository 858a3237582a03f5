"""Config validation, sweep driver, serialization, preset panels, entry point."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from soqd import (
    CoherentState,
    ConfigError,
    FockState,
    ToleranceExceeded,
    compare_methods,
    load_sweep_config,
    main,
    read_points_csv,
    reproduce_figure,
    run_sweep,
    sweep_config_from_json,
    sweep_config_to_json,
)
from soqd.cli import CSV_HEADER, _coherent_cutoff


def make_config(**overrides):
    obj = {
        "omega1": 0.2, "omega2": 1.3, "d_e": 0.8, "d_g": 0.2, "omega_e": 1.0,
        "apparatus": {"kind": "fock", "n": 3},
        "t_values": [0.0, 2.0],
        "tau_min": 0.0, "tau_max": 4.0, "tau_steps": 9,
        "output_path": "out.csv",
    }
    obj.update(overrides)
    return obj


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def test_config_defaults():
    config = sweep_config_from_json(make_config())
    assert config.method == "closed"
    assert config.output_format == "csv"
    assert config.emit_plot is False
    assert config.state == FockState(3)
    assert config.t_values == (0.0, 2.0)


def test_config_round_trip():
    config = sweep_config_from_json(make_config(method="oracle", emit_plot=True))
    assert sweep_config_from_json(sweep_config_to_json(config)) == config


def test_config_accepts_coherent_shorthand():
    config = sweep_config_from_json(
        make_config(apparatus={"kind": "coherent", "n": 10}))
    assert config.state == CoherentState(0j, complex(math.sqrt(10)))


def test_config_rejects_unknown_key():
    with pytest.raises(ConfigError, match="unknown config keys"):
        sweep_config_from_json(make_config(omega3=1.0))


def test_config_rejects_missing_key():
    obj = make_config()
    del obj["tau_steps"]
    with pytest.raises(ConfigError, match="missing config keys"):
        sweep_config_from_json(obj)


def test_config_rejects_bad_method():
    with pytest.raises(ConfigError, match="unknown method"):
        sweep_config_from_json(make_config(method="magic"))


def test_config_rejects_bad_format():
    with pytest.raises(ConfigError, match="output format"):
        sweep_config_from_json(make_config(output_format="xml"))


def test_config_rejects_reversed_window():
    with pytest.raises(ConfigError, match="tau_min"):
        sweep_config_from_json(make_config(tau_min=5.0, tau_max=1.0))


def test_config_rejects_bad_tau_steps():
    with pytest.raises(ConfigError):
        sweep_config_from_json(make_config(tau_steps=1))
    with pytest.raises(ConfigError):
        sweep_config_from_json(make_config(tau_steps=True))
    with pytest.raises(ConfigError):
        sweep_config_from_json(make_config(tau_steps=4.5))


def test_config_rejects_bad_t_values():
    for bad in ([], [-1.0], ["x"], 3.0):
        with pytest.raises(ConfigError):
            sweep_config_from_json(make_config(t_values=bad))


def test_config_rejects_negative_second_time():
    # t' = t + tau dips below zero for the smallest t
    with pytest.raises(ConfigError, match="t \\+ tau"):
        sweep_config_from_json(make_config(t_values=[0.5], tau_min=-1.0))


def test_config_rejects_nonfinite_parameter():
    with pytest.raises(ConfigError):
        sweep_config_from_json(make_config(omega1=float("inf")))
    with pytest.raises(ConfigError):
        sweep_config_from_json(make_config(omega1=True))


def test_config_rejects_bad_emit_plot():
    with pytest.raises(ConfigError, match="emit_plot"):
        sweep_config_from_json(make_config(emit_plot=1))


def test_config_rejects_empty_output_path():
    with pytest.raises(ConfigError, match="output_path"):
        sweep_config_from_json(make_config(output_path=""))


def test_config_guards_quadrature_method():
    with pytest.raises(ConfigError, match="needs a fock"):
        sweep_config_from_json(make_config(
            method="quadrature", apparatus={"kind": "coherent", "n": 4}))
    with pytest.raises(ConfigError, match="quadrature guard"):
        sweep_config_from_json(make_config(
            method="quadrature", apparatus={"kind": "fock", "n": 300}))


def test_config_guards_oracle_method():
    with pytest.raises(ConfigError, match="dense guard"):
        sweep_config_from_json(make_config(
            method="oracle", apparatus={"kind": "fock", "n": 600}))
    with pytest.raises(ConfigError, match="mode 1 empty"):
        sweep_config_from_json(make_config(
            method="oracle",
            apparatus={"kind": "coherent", "alpha0": [0.5, 0.0], "beta0": [1.0, 0.0]}))
    with pytest.raises(ConfigError, match="too large for the dense oracle"):
        sweep_config_from_json(make_config(
            method="oracle", apparatus={"kind": "coherent", "n": 64}))


def test_load_sweep_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_sweep_config(str(tmp_path / "nope.json"))


def test_load_sweep_config_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_sweep_config(str(path))


def test_coherent_cutoff_floor():
    assert _coherent_cutoff(CoherentState(0j, 0.5 + 0j)) == 20
    assert _coherent_cutoff(CoherentState(0j, 3.0 + 0j)) == 90


# ---------------------------------------------------------------------------
# sweep driver and serialization
# ---------------------------------------------------------------------------

def test_run_sweep_rows_are_t_major(tmp_path):
    config = sweep_config_from_json(
        make_config(output_path=str(tmp_path / "o.csv")))
    points = run_sweep(config)
    assert len(points) == 18
    assert [p.t for p in points] == [0.0] * 9 + [2.0] * 9
    taus = [p.tau for p in points[:9]]
    assert taus == sorted(taus) and taus[0] == 0.0 and taus[-1] == 4.0


def test_csv_round_trip_is_bit_exact(tmp_path):
    path = str(tmp_path / "o.csv")
    config = sweep_config_from_json(make_config(output_path=path))
    points = run_sweep(config)
    back = read_points_csv(path)
    assert len(back) == len(points)
    for a, b in zip(points, back):
        assert (a.t, a.tau, a.f, a.g) == (b.t, b.tau, b.f, b.g)


def test_csv_header_is_stable(tmp_path):
    assert CSV_HEADER == "t,tau,re_F,im_F,abs_F,G"
    path = str(tmp_path / "o.csv")
    run_sweep(sweep_config_from_json(make_config(output_path=path)))
    with open(path, encoding="utf-8") as fh:
        assert fh.readline().rstrip("\n") == CSV_HEADER


def test_read_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "o.csv"
    path.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="bad header"):
        read_points_csv(str(path))


def test_json_output(tmp_path):
    path = str(tmp_path / "o.json")
    config = sweep_config_from_json(
        make_config(output_path=path, output_format="json"))
    points = run_sweep(config)
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    assert set(data) == {"points"}
    assert len(data["points"]) == 18
    first = data["points"][0]
    assert set(first) == {"t", "tau", "re_F", "im_F", "abs_F", "G"}
    assert first["re_F"] == points[0].f.real
    assert first["G"] == points[0].g


def test_sweep_emits_svg_plot(tmp_path):
    path = str(tmp_path / "o.csv")
    config = sweep_config_from_json(
        make_config(output_path=path, emit_plot=True))
    run_sweep(config)
    svg = (tmp_path / "o.svg").read_text(encoding="utf-8")
    assert svg.startswith("<svg")
    assert "polyline" in svg
    assert "&#964;" in svg  # tau axis label
    assert "t = 0" in svg and "t = 2" in svg  # one legend entry per t


def test_equal_couplings_sweep_is_pure_fringe(tmp_path):
    config = sweep_config_from_json(make_config(
        d_e=0.5, d_g=0.5, apparatus={"kind": "coherent", "n": 4},
        t_values=[1.0], output_path=str(tmp_path / "o.csv")))
    for p in run_sweep(config):
        assert abs(abs(p.f) - 1) <= 1e-9
        assert p.g == pytest.approx(0.5 + 0.5 * math.cos(p.tau), abs=1e-9)


def test_sweep_methods_agree(tmp_path):
    points = {}
    for method in ("closed", "quadrature", "oracle"):
        config = sweep_config_from_json(make_config(
            method=method, t_values=[1.0], tau_max=3.0, tau_steps=7,
            output_path=str(tmp_path / f"{method}.csv")))
        points[method] = run_sweep(config)
    for method in ("quadrature", "oracle"):
        for a, b in zip(points["closed"], points[method]):
            assert abs(a.f - b.f) <= 1e-9


# ---------------------------------------------------------------------------
# preset panels
# ---------------------------------------------------------------------------

def test_reproduce_figure_matches_golden_bytes(tmp_path, golden_dir):
    paths = reproduce_figure(2, "a", str(tmp_path))
    with open(paths["csv"], "rb") as fh:
        fresh = fh.read()
    with open(f"{golden_dir}/figures/fig2a.csv", "rb") as fh:
        pinned = fh.read()
    assert fresh == pinned
    assert fresh.decode("utf-8").count("\n") == 601  # header + 600 rows


def test_reproduce_figure_rejects_bad_ids(tmp_path):
    with pytest.raises(ConfigError, match="figure id"):
        reproduce_figure(3, "a", str(tmp_path))
    with pytest.raises(ConfigError, match="panel"):
        reproduce_figure(1, "g", str(tmp_path))


# ---------------------------------------------------------------------------
# method comparison
# ---------------------------------------------------------------------------

def test_compare_methods_report(preset_params):
    grid = np.linspace(0.0, 5.0, 6)
    report = compare_methods(preset_params, 2, 0.0, grid)
    assert len(report.rows) == 6
    assert [r.tau for r in report.rows] == list(grid)
    assert report.max_delta == max(r.max_delta for r in report.rows)
    assert report.max_delta <= 1e-9


def test_compare_methods_raises_on_tight_tolerance(preset_params):
    with pytest.raises(ToleranceExceeded) as excinfo:
        compare_methods(preset_params, 2, 0.0, np.linspace(0.0, 5.0, 6),
                        tolerance=1e-30)
    assert excinfo.value.report is not None
    assert len(excinfo.value.report.rows) == 6


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def write_config(tmp_path, **overrides):
    obj = make_config(output_path=str(tmp_path / "out.csv"), **overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


def test_main_sweep_ok(tmp_path, capsys):
    assert main(["sweep", "--config", write_config(tmp_path)]) == 0
    assert "wrote 18 rows" in capsys.readouterr().out
    assert (tmp_path / "out.csv").exists()


def test_main_missing_config_exits_2(tmp_path, capsys):
    assert main(["sweep", "--config", str(tmp_path / "nope.json")]) == 2
    assert "config error" in capsys.readouterr().err


def test_main_invalid_json_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("[1, 2", encoding="utf-8")
    assert main(["sweep", "--config", str(path)]) == 2


def test_main_unwritable_output_exits_4(tmp_path, capsys):
    cfg = tmp_path / "config.json"
    obj = make_config(output_path=str(tmp_path / "missing_dir" / "out.csv"))
    cfg.write_text(json.dumps(obj), encoding="utf-8")
    assert main(["sweep", "--config", str(cfg)]) == 4
    assert "i/o error" in capsys.readouterr().err


def test_main_compare_ok(capsys):
    rc = main(["compare", "--n", "2", "--t", "0", "--tau-max", "2", "--steps", "5"])
    assert rc == 0
    assert "max pairwise |delta|" in capsys.readouterr().out


def test_main_compare_bad_args_exits_2(capsys):
    rc = main(["compare", "--n", "2", "--t", "0", "--tau-max", "2", "--steps", "1"])
    assert rc == 2


def test_main_compare_disagreement_exits_3(monkeypatch, capsys):
    def forced_failure(*args, **kwargs):
        raise ToleranceExceeded("forced", None)

    monkeypatch.setattr("soqd.cli.compare_methods", forced_failure)
    rc = main(["compare", "--n", "2", "--t", "0", "--tau-max", "2", "--steps", "5"])
    assert rc == 3
    assert "FAIL" in capsys.readouterr().err


def test_main_figure_ok(tmp_path, capsys):
    rc = main(["figure", "--id", "1", "--panel", "a", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "fig1a.csv").exists()
    assert (tmp_path / "fig1a.svg").exists()


def test_main_rejects_unknown_panel(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main(["figure", "--id", "1", "--panel", "z", "--out", str(tmp_path)])
    assert excinfo.value.code == 2


def test_main_golden_regen_reproduces_pinned_values(tmp_path, derived_values):
    out = tmp_path / "golden"
    assert main(["golden", "--regen", "--out", str(out)]) == 0
    with open(out / "derived_values.json", encoding="utf-8") as fh:
        assert json.load(fh) == derived_values
    panels = sorted(p.name for p in (out / "figures").glob("*.csv"))
    assert len(panels) == 12 and panels[0] == "fig1a.csv"


def test_module_entry_point_subprocess(tmp_path):
    cfg = write_config(tmp_path)
    proc = subprocess.run([sys.executable, "-m", "soqd", "sweep", "--config", cfg],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "out.csv").exists()
