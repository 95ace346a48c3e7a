"""Scenario files: schedules, unit conversion, validation, round trips."""
import numpy as np
import pytest

from alkasim.constants import R_GAS
from alkasim.dae import PlantParams, SolverSettings
from alkasim.errors import ScenarioError
from alkasim.scenario import (InitialConditions, ScenarioConfig, Schedule,
                              initial_state, load_scenario, write_scenario)
from alkasim.thermo import Phase, Species, ThermoState


# --------------------------------------------------------------------------
# schedules

def test_schedule_is_right_open():
    s = Schedule(times=(0.0, 600.0), values=(1.0, 2.5))
    assert s.value(0.0) == 1.0
    assert s.value(599.999) == 1.0
    assert s.value(600.0) == 2.5
    assert s.value(1e6) == 2.5
    assert s.breakpoints == (600.0,)
    assert Schedule.constant(4.2).breakpoints == ()


def test_schedule_validation():
    with pytest.raises(ScenarioError, match="nonempty"):
        Schedule(times=(), values=())
    with pytest.raises(ScenarioError, match="start at t = 0"):
        Schedule(times=(10.0,), values=(1.0,))
    with pytest.raises(ScenarioError, match="increase strictly"):
        Schedule(times=(0.0, 5.0, 5.0), values=(1.0, 2.0, 3.0))


def test_initial_conditions_validation():
    with pytest.raises(ScenarioError, match="fill_sep1"):
        InitialConditions(fill_sep1=0.0)
    with pytest.raises(ScenarioError, match="fill_sep2"):
        InitialConditions(fill_sep2=1.0)
    with pytest.raises(ScenarioError, match="positive"):
        InitialConditions(t_stack=-1.0)


def test_power_signal_is_required():
    with pytest.raises(ScenarioError, match="p_in is required"):
        ScenarioConfig(name="x", t_end=10.0)


def test_unknown_channel_rejected():
    with pytest.raises(ScenarioError):
        ScenarioConfig(name="x", t_end=10.0,
                       signals={"p_in": Schedule.constant(1e6),
                                "f_bogus": Schedule.constant(1.0)})


def test_signal_defaults():
    cfg = ScenarioConfig(name="x", t_end=10.0,
                         signals={"p_in": Schedule.constant(1.5e6)})
    assert np.array_equal(cfg.u_of_t(0.0), np.zeros(8))
    d = cfg.d_of_t(0.0)
    assert d[0] == 298.15    # ambient
    assert d[1] == 1.5e6     # electrical power
    assert d[2] == 303.15    # makeup temperature
    # breakpoints collect the union of all schedule switch times
    cfg2 = ScenarioConfig(name="x", t_end=10.0,
                          signals={"p_in": Schedule((0.0, 60.0), (1e6, 2e6)),
                                   "q_hx1": Schedule((0.0, 90.0),
                                                     (1e4, 2e4))})
    assert cfg2.breakpoints == (60.0, 90.0)


# --------------------------------------------------------------------------
# initial state construction

def test_initial_state_oracle(table):
    ic = InitialConditions(t_sep1=340.0, p_sep1=1.2e5, fill_sep1=0.3,
                           t_tank=300.0, p_tank=1.8e6)
    cfg = ScenarioConfig(name="x", t_end=10.0, initial=ic,
                         signals={"p_in": Schedule.constant(1e6)})
    x0 = initial_state(cfg, table)
    plant = cfg.plant
    n_w = 0.3 * plant.v_sep1 / table.v_liq
    v_gas = plant.v_sep1 - n_w * table.v_liq
    n_o2 = 1.2e5 * v_gas / (R_GAS * 340.0)
    assert x0[1] == pytest.approx(n_w, rel=1e-12)
    assert x0[2] == pytest.approx(n_o2, rel=1e-12)
    # holdup energy matches the thermo model at (T, P)
    from alkasim import thermo
    u_liq = thermo.internal_energy(
        ThermoState(340.0, 1.2e5, np.array([n_w, 0.0, 0.0]), Phase.LIQUID),
        table)
    u_gas = thermo.internal_energy(
        ThermoState(340.0, 1.2e5, np.array([0.0, 0.0, n_o2]), Phase.GAS),
        table)
    assert x0[3] == pytest.approx(u_liq + u_gas, rel=1e-12)
    n_tank = 1.8e6 * plant.v_tank / (R_GAS * 300.0)
    assert x0[7] == pytest.approx(n_tank, rel=1e-12)


# --------------------------------------------------------------------------
# file loading

FULL = """
[scenario]
name = "conv"
t_end = 100.0

[initial]
fill_sep1 = 0.4
fill_sep2 = 0.4

[solver]
h = 0.5

[output]
interval = 5.0
channels = ["t_s", "T_K"]

[signals.p_in]
unit = "MW"
schedule = [[0.0, 1.0], [50.0, 2.0]]

[signals.f_sep1_h2o]
unit = "kg/s"
value = 1.0

[signals.q_hx1]
unit = "kW"
value = 90.0

[signals.t_amb]
unit = "degC"
value = 25.0
"""


def test_load_converts_units(tmp_path):
    p = tmp_path / "conv.scenario"
    p.write_text(FULL)
    cfg = load_scenario(p)
    assert cfg.name == "conv"
    assert cfg.solver.h == 0.5
    assert cfg.solver.sample_interval == 5.0
    assert cfg.output_channels == ("t_s", "T_K")
    # 1 kg/s of water, molar mass 18.01528 g/mol
    assert cfg.u_of_t(0.0)[0] == pytest.approx(1.0 / 0.01801528, rel=1e-12)
    assert cfg.u_of_t(0.0)[4] == 90.0e3            # W
    assert cfg.d_of_t(0.0)[0] == pytest.approx(298.15)
    assert cfg.d_of_t(0.0)[1] == 1.0e6             # W
    assert cfg.d_of_t(60.0)[1] == 2.0e6
    assert cfg.breakpoints == (50.0,)


def test_load_rejects_unknown_keys(tmp_path):
    p = tmp_path / "bad.scenario"
    p.write_text(FULL + "\n[plant.separators]\nv_sep3 = 2.0\n")
    with pytest.raises(ScenarioError, match="unknown keys"):
        load_scenario(p)


def test_load_rejects_unknown_signal(tmp_path):
    p = tmp_path / "bad2.scenario"
    p.write_text(FULL + "\n[signals.f_mystery]\nvalue = 1.0\n")
    with pytest.raises(ScenarioError):
        load_scenario(p)


def test_load_requires_power(tmp_path):
    p = tmp_path / "nopower.scenario"
    p.write_text('[scenario]\nname = "np"\nt_end = 10.0\n')
    with pytest.raises(ScenarioError, match="p_in"):
        load_scenario(p)


def test_write_read_round_trip(tmp_path):
    cfg = ScenarioConfig(
        name="rt", t_end=250.0,
        plant=PlantParams(v_sep1=25.0, v_sep2=25.0, v_tank=40.0),
        initial=InitialConditions(t_stack=345.0, fill_sep1=0.37,
                                  fill_sep2=0.41, p_tank=1.9e6),
        signals={"p_in": Schedule((0.0, 50.0), (1.0e6, 2.5e6)),
                 "f_sep1_h2o": Schedule.constant(59.692614),
                 "q_hx1": Schedule.constant(92578.441),
                 "t_amb": Schedule.constant(297.0)},
        solver=SolverSettings(h=0.5, sample_interval=5.0),
        description="round trip probe")
    p = tmp_path / "rt.scenario"
    write_scenario(cfg, p)
    assert load_scenario(p) == cfg


def test_packaged_scenarios(step_config, infeasible_config):
    assert step_config.name == "feasible_step"
    assert step_config.t_end == 3600.0
    assert step_config.breakpoints == (600.0,)
    assert step_config.plant.v_sep1 == 25.0
    assert infeasible_config.name == "paper_step"
    # the literal table drives both coolers at 80 MW
    assert infeasible_config.u_of_t(0.0)[4] == 80.0e6
    assert infeasible_config.u_of_t(0.0)[5] == 80.0e6
