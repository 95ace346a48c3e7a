"""Command line behavior: exit codes, CSV output, plot dumps."""
import importlib.resources

import pytest

from alkasim.cli import main
from alkasim.dae import ALL_COLUMNS

HOLD = """
[scenario]
name = "hold"
t_end = 20.0

[plant.separators]
v_sep1 = 25.0
v_sep2 = 25.0

[initial]
t_stack = 346.5703
t_sep1 = 346.5703
fill_sep1 = 0.4
t_sep2 = 346.5703
fill_sep2 = 0.4

[output]
interval = 10.0

[signals.p_in]
unit = "MW"
value = 1.0

[signals.f_sep1_h2o]
value = 59.692614

[signals.f_sep2_h2o]
value = 51.307386

[signals.f_makeup]
value = 2.7950761

[signals.f_tank_h2]
value = 2.7950761

[signals.f_sep1_o2]
value = 1.3975381

[signals.f_sep2_h2]
value = 2.7950761

[signals.q_hx1]
unit = "kW"
value = 92.578441

[signals.q_hx2]
unit = "kW"
value = 79.421559

[signals.t_amb]
unit = "degC"
value = 25.0

[signals.t_makeup]
unit = "degC"
value = 30.0
"""


@pytest.fixture()
def hold_file(tmp_path):
    p = tmp_path / "hold.scenario"
    p.write_text(HOLD)
    return p


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    return lines[0].split(","), lines[1:]


def test_simulate_writes_csv(hold_file, tmp_path, capsys):
    assert main(["simulate", str(hold_file), "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "results written to" in out
    header, rows = read_csv(tmp_path / "hold.csv")
    assert tuple(header) == ALL_COLUMNS
    assert len(rows) == 3  # t = 0, 10, 20
    t = [float(r.split(",")[0]) for r in rows]
    assert t == [0.0, 10.0, 20.0]


def test_simulate_channel_selection(hold_file, tmp_path, capsys):
    assert main(["simulate", str(hold_file), "--out", str(tmp_path),
                 "--channels", "t_s,T_K,z_f_H2_molps"]) == 0
    header, rows = read_csv(tmp_path / "hold.csv")
    assert header == ["t_s", "T_K", "z_f_H2_molps"]
    # near the 1 MW balanced point hydrogen flows at its steady value
    f_h2 = float(rows[-1].split(",")[2])
    assert f_h2 == pytest.approx(2.795, abs=0.01)


def test_simulate_plot_dumps(hold_file, tmp_path, capsys):
    assert main(["simulate", str(hold_file), "--out", str(tmp_path),
                 "--plot-channels", "T_K,z_f_H2_molps"]) == 0
    for name in ("T_K", "z_f_H2_molps"):
        dat = tmp_path / f"hold_{name}.dat"
        lines = dat.read_text().strip().splitlines()
        assert lines[0] == f"# t_s {name}"
        assert len(lines) == 1 + 3
        assert all(len(ln.split()) == 2 for ln in lines[1:])


def test_simulate_sample_interval_override(hold_file, tmp_path, capsys):
    assert main(["simulate", str(hold_file), "--out", str(tmp_path),
                 "--sample-interval", "5"]) == 0
    _, rows = read_csv(tmp_path / "hold.csv")
    assert len(rows) == 5


def test_zero_horizon_header_only(hold_file, tmp_path, capsys):
    p = tmp_path / "zero.scenario"
    p.write_text(HOLD.replace('t_end = 20.0', 't_end = 0.0')
                     .replace('name = "hold"', 'name = "zero"'))
    assert main(["simulate", str(p), "--out", str(tmp_path)]) == 0
    text = (tmp_path / "zero.csv").read_text().strip().splitlines()
    assert text[0].split(",")[0] == "t_s"
    assert len(text) == 1


def test_validate_ok(hold_file, capsys):
    assert main(["validate", str(hold_file)]) == 0
    out = capsys.readouterr().out
    assert "OK" in out
    assert "20 steps" in out


def test_validate_missing_file(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "nope.scenario")]) == 1
    assert "invalid:" in capsys.readouterr().err


def test_validate_bad_scenario(tmp_path, capsys):
    p = tmp_path / "bad.scenario"
    p.write_text('[scenario]\nname = "bad"\nt_end = 10.0\n')
    assert main(["validate", str(p)]) == 1
    assert "p_in" in capsys.readouterr().err


def test_infeasible_scenario_exits_2(tmp_path, capsys):
    ref = importlib.resources.files("alkasim.data") / "paper_step.scenario"
    with importlib.resources.as_file(ref) as p:
        code = main(["simulate", str(p), "--out", str(tmp_path)])
    assert code == 2
    err = capsys.readouterr().err
    assert "error: integration aborted at t = 0.000 s" in err
    assert "heat exchanger 1 duty" in err


def test_steady_state_balance(hold_file, capsys):
    assert main(["steady-state", str(hold_file), "--balance"]) == 0
    out = capsys.readouterr().out
    assert "balanced inputs" in out
    assert "max scaled differential residual" in out
    # the hold scenario sits on the balanced point already
    drift = float(out.rsplit(":", 1)[1])
    assert drift < 1e-6
