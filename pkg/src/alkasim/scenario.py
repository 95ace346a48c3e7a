"""Scenario files: plant configuration, initial conditions, input schedules.

A scenario is a TOML document with blocks [scenario], [plant.*],
[initial], [solver], [output], and one [signals.<channel>] block per
input channel.  Channels follow :data:`alkasim.dae.U_NAMES` and
:data:`alkasim.dae.D_NAMES`; every channel is a piecewise-constant
schedule ``[[t0, v0], [t1, v1], ...]`` that holds v_k on [t_k, t_{k+1}).
Only p_in is mandatory; everything else gets documented defaults.

Flows accept mol/s or kg/s (converted with the species molar mass),
duties W/kW/MW, temperatures K or degC.  All values are stored in SI
after loading, and write_scenario emits SI, so a write/load round trip
reproduces the configuration exactly.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import thermo
from .constants import M_H2, M_H2O, M_O2, P_ATM, R_GAS
from .correlations import CorrelationTable, default_table
from .dae import (D_NAMES, U_NAMES, ALL_COLUMNS, PlantParams,
                  SolverSettings)
from .electrochem import StackParams
from .errors import ScenarioError
from .thermo import Phase, ThermoState
from .units import CompressorTrain

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SIGNAL_NAMES = U_NAMES + D_NAMES

_POWER_UNITS = {"W": 1.0, "kW": 1.0e3, "MW": 1.0e6}

_CHANNEL_KIND = {
    "f_sep1_h2o": ("flow", M_H2O), "f_sep2_h2o": ("flow", M_H2O),
    "f_makeup": ("flow", M_H2O), "f_tank_h2": ("flow", M_H2),
    "f_sep1_o2": ("flow", M_O2), "f_sep2_h2": ("flow", M_H2),
    "q_hx1": ("power", None), "q_hx2": ("power", None),
    "p_in": ("power", None),
    "t_amb": ("temperature", None), "t_makeup": ("temperature", None),
}

_SIGNAL_DEFAULTS = {
    "f_sep1_h2o": 0.0, "f_sep2_h2o": 0.0, "f_makeup": 0.0,
    "f_tank_h2": 0.0, "q_hx1": 0.0, "q_hx2": 0.0,
    "f_sep1_o2": 0.0, "f_sep2_h2": 0.0,
    "t_amb": 298.15, "t_makeup": 303.15,
}


@dataclass(frozen=True)
class Schedule:
    """Piecewise-constant signal: value k holds on [times[k], times[k+1])."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.values) or not self.times:
            raise ScenarioError("schedule needs matching, nonempty times "
                                "and values")
        if self.times[0] != 0.0:
            raise ScenarioError(
                f"schedule must start at t = 0, got {self.times[0]}")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ScenarioError(
                f"schedule times must increase strictly: {self.times}")

    @classmethod
    def constant(cls, value: float) -> "Schedule":
        return cls(times=(0.0,), values=(float(value),))

    def value(self, t: float) -> float:
        return self.values[bisect_right(self.times, t) - 1]

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.times[1:]


@dataclass(frozen=True)
class InitialConditions:
    """Starting temperatures, pressures, and separator liquid fills."""

    t_stack: float = 343.15   # K
    t_sep1: float = 343.15    # K
    p_sep1: float = P_ATM     # Pa
    fill_sep1: float = 0.5    # liquid volume fraction
    t_sep2: float = 343.15
    p_sep2: float = P_ATM
    fill_sep2: float = 0.5
    t_tank: float = 298.15
    p_tank: float = 2.0e6

    def __post_init__(self):
        for name in ("t_stack", "t_sep1", "t_sep2", "t_tank"):
            if getattr(self, name) <= 0.0:
                raise ScenarioError(f"initial.{name} must be positive")
        for name in ("p_sep1", "p_sep2", "p_tank"):
            if getattr(self, name) <= 0.0:
                raise ScenarioError(f"initial.{name} must be positive")
        for name in ("fill_sep1", "fill_sep2"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ScenarioError(
                    f"initial.{name} must lie in (0, 1), got {v}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one simulation run."""

    name: str
    t_end: float
    plant: PlantParams = field(default_factory=PlantParams)
    initial: InitialConditions = field(default_factory=InitialConditions)
    signals: dict[str, Schedule] = field(default_factory=dict)
    solver: SolverSettings = field(default_factory=SolverSettings)
    output_channels: tuple[str, ...] | None = None
    description: str = ""

    def __post_init__(self):
        if self.t_end < 0.0:
            raise ScenarioError(f"t_end must be nonnegative, "
                                f"got {self.t_end}")
        if "p_in" not in self.signals:
            raise ScenarioError("signal p_in is required")
        unknown = set(self.signals) - set(SIGNAL_NAMES)
        if unknown:
            raise ScenarioError(f"unknown signal channels: "
                                f"{sorted(unknown)}")
        filled = dict(self.signals)
        for name, default in _SIGNAL_DEFAULTS.items():
            filled.setdefault(name, Schedule.constant(default))
        object.__setattr__(self, "signals", filled)
        if self.output_channels is not None:
            bad = set(self.output_channels) - set(ALL_COLUMNS)
            if bad:
                raise ScenarioError(f"unknown output channels: "
                                    f"{sorted(bad)}")

    def u_of_t(self, t: float) -> np.ndarray:
        return np.array([self.signals[n].value(t) for n in U_NAMES])

    def d_of_t(self, t: float) -> np.ndarray:
        return np.array([self.signals[n].value(t) for n in D_NAMES])

    @property
    def breakpoints(self) -> tuple[float, ...]:
        pts: set[float] = set()
        for sched in self.signals.values():
            pts.update(sched.breakpoints)
        return tuple(sorted(pts))


def initial_state(config: ScenarioConfig,
                  table: CorrelationTable | None = None) -> np.ndarray:
    """Build the differential state x0 from the [initial] block."""
    tab = table or default_table()
    ic = config.initial
    plant = config.plant

    def vessel(T, P, fill, v_tot, gas_idx):
        n_w = fill * v_tot / tab.v_liq
        n_g = P * (1.0 - fill) * v_tot / (R_GAS * T)
        n = np.zeros(3)
        n[0] = n_w
        n[gas_idx] = n_g
        liq = ThermoState(T, P, np.array([n_w, 0.0, 0.0]), Phase.LIQUID)
        gas = np.zeros(3)
        gas[gas_idx] = n_g
        gstate = ThermoState(T, P, gas, Phase.GAS)
        U = (thermo.internal_energy(liq, tab)
             + thermo.internal_energy(gstate, tab))
        return n_w, n_g, U

    n1w, n1o, u1 = vessel(ic.t_sep1, ic.p_sep1, ic.fill_sep1,
                          plant.v_sep1, int(thermo.Species.O2))
    n2w, n2h, u2 = vessel(ic.t_sep2, ic.p_sep2, ic.fill_sep2,
                          plant.v_sep2, int(thermo.Species.H2))
    nt = ic.p_tank * plant.v_tank / (R_GAS * ic.t_tank)
    tank = ThermoState(ic.t_tank, ic.p_tank, np.array([0.0, nt, 0.0]),
                       Phase.GAS)
    ut = thermo.internal_energy(tank, tab)
    return np.array([ic.t_stack, n1w, n1o, u1, n2w, n2h, u2, nt, ut])


# --------------------------------------------------------------------------
# TOML loading

def _reject_unknown(block: dict, allowed: set[str], where: str) -> None:
    unknown = set(block) - allowed
    if unknown:
        raise ScenarioError(f"unknown keys in [{where}]: {sorted(unknown)}")


def _get_float(block: dict, key: str, where: str, default: float) -> float:
    v = block.get(key, default)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ScenarioError(f"{where}.{key} must be a number, got {v!r}")
    return float(v)


def _load_schedule(name: str, block: dict) -> Schedule:
    _reject_unknown(block, {"unit", "schedule", "value"},
                    f"signals.{name}")
    kind, molar_mass = _CHANNEL_KIND[name]
    unit = block.get("unit")
    if "value" in block and "schedule" in block:
        raise ScenarioError(f"signals.{name}: give either value or "
                            "schedule, not both")
    if "value" in block:
        raw = [[0.0, block["value"]]]
    elif "schedule" in block:
        raw = block["schedule"]
    else:
        raise ScenarioError(f"signals.{name}: schedule or value required")
    if not isinstance(raw, list) or not all(
            isinstance(p, list) and len(p) == 2 for p in raw):
        raise ScenarioError(
            f"signals.{name}: schedule must be a list of [t, value] pairs")

    def convert(v: float) -> float:
        if kind == "flow":
            u = unit or "mol/s"
            if u == "mol/s":
                return float(v)
            if u == "kg/s":
                return float(v) / molar_mass
            raise ScenarioError(f"signals.{name}: unit must be mol/s or "
                                f"kg/s, got {u!r}")
        if kind == "power":
            u = unit or "W"
            if u not in _POWER_UNITS:
                raise ScenarioError(f"signals.{name}: unit must be one of "
                                    f"{sorted(_POWER_UNITS)}, got {u!r}")
            return float(v) * _POWER_UNITS[u]
        u = unit or "K"
        if u == "K":
            return float(v)
        if u == "degC":
            return float(v) + 273.15
        raise ScenarioError(f"signals.{name}: unit must be K or degC, "
                            f"got {u!r}")

    for p in raw:
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                   for v in p):
            raise ScenarioError(
                f"signals.{name}: schedule entries must be numbers: {p}")
    times = tuple(float(p[0]) for p in raw)
    values = tuple(convert(p[1]) for p in raw)
    for v in values:
        if kind == "flow" and v < 0.0:
            raise ScenarioError(f"signals.{name}: flows must be "
                                f"nonnegative, got {v} mol/s")
        if name == "p_in" and v < 0.0:
            raise ScenarioError(f"signals.{name}: power must be "
                                f"nonnegative, got {v} W")
        if kind == "temperature" and v <= 0.0:
            raise ScenarioError(f"signals.{name}: temperature must be "
                                f"positive, got {v} K")
    return Schedule(times=times, values=values)


def _load_plant(doc: dict) -> PlantParams:
    blk = doc.get("plant", {})
    _reject_unknown(blk, {"stack", "separators", "tank", "compressor",
                          "p_stack"}, "plant")
    stack_blk = blk.get("stack", {})
    stack_fields = {"r1", "r2", "s", "t1", "t2", "t3", "f1", "f2",
                    "area", "n_cells", "c_p_el", "a_s", "h_c",
                    "activation_log"}
    _reject_unknown(stack_blk, stack_fields, "plant.stack")
    kw = {}
    for key in stack_fields - {"n_cells", "activation_log"}:
        if key in stack_blk:
            kw[key] = _get_float(stack_blk, key, "plant.stack", math.nan)
    if "n_cells" in stack_blk:
        n = stack_blk["n_cells"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise ScenarioError("plant.stack.n_cells must be an integer")
        kw["n_cells"] = n
    if "activation_log" in stack_blk:
        mode = stack_blk["activation_log"]
        if mode == "log10":
            kw["act_log_base"] = 10.0
        elif mode == "ln":
            kw["act_log_base"] = math.e
        else:
            raise ScenarioError("plant.stack.activation_log must be "
                                f"'log10' or 'ln', got {mode!r}")
    try:
        stack = StackParams(**kw)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    sep_blk = blk.get("separators", {})
    _reject_unknown(sep_blk, {"v_sep1", "v_sep2"}, "plant.separators")
    tank_blk = blk.get("tank", {})
    _reject_unknown(tank_blk, {"v_tank", "h_tank", "a_tank"}, "plant.tank")
    comp_blk = blk.get("compressor", {})
    _reject_unknown(comp_blk, {"n_stages", "eta", "intercool_to"},
                    "plant.compressor")
    cool = comp_blk.get("intercool_to", "stage1-inlet")
    if cool == "stage1-inlet":
        intercool = None
    elif isinstance(cool, list) and all(isinstance(v, (int, float))
                                        for v in cool):
        intercool = tuple(float(v) for v in cool)
    else:
        raise ScenarioError("plant.compressor.intercool_to must be "
                            "'stage1-inlet' or a list of temperatures")
    n_stages = comp_blk.get("n_stages", 3)
    if not isinstance(n_stages, int) or isinstance(n_stages, bool):
        raise ScenarioError("plant.compressor.n_stages must be an integer")
    try:
        train = CompressorTrain(
            n_stages=n_stages,
            eta=_get_float(comp_blk, "eta", "plant.compressor", 0.75),
            intercool_to=intercool)
        return PlantParams(
            stack=stack,
            v_sep1=_get_float(sep_blk, "v_sep1", "plant.separators", 1.0),
            v_sep2=_get_float(sep_blk, "v_sep2", "plant.separators", 1.0),
            v_tank=_get_float(tank_blk, "v_tank", "plant.tank", 50.0),
            h_tank=_get_float(tank_blk, "h_tank", "plant.tank", 1.0),
            a_tank=_get_float(tank_blk, "a_tank", "plant.tank", 50.0),
            p_stack=_get_float(blk, "p_stack", "plant", P_ATM),
            train=train)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Parse and validate a scenario file.

    Unknown keys anywhere are rejected so typos cannot silently fall back
    to defaults.
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{path}: not valid TOML: {exc}") from exc

    _reject_unknown(doc, {"scenario", "plant", "initial", "signals",
                          "solver", "output"}, "top level")
    meta = doc.get("scenario", {})
    _reject_unknown(meta, {"name", "description", "t_end"}, "scenario")
    if "t_end" not in meta:
        raise ScenarioError("scenario.t_end is required")
    t_end = _get_float(meta, "t_end", "scenario", math.nan)

    init_blk = doc.get("initial", {})
    init_fields = {f.name for f in fields(InitialConditions)}
    _reject_unknown(init_blk, init_fields, "initial")
    try:
        initial = InitialConditions(**{
            k: _get_float(init_blk, k, "initial", math.nan)
            for k in init_blk})
    except TypeError as exc:
        raise ScenarioError(f"bad [initial] block: {exc}") from exc

    solver_blk = doc.get("solver", {})
    solver_fields = {"h", "newton_tol", "newton_maxit", "max_stale_iters",
                     "max_rejections", "fd_eps", "init_tol"}
    _reject_unknown(solver_blk, solver_fields, "solver")
    skw = {}
    for key in ("h", "newton_tol", "fd_eps", "init_tol"):
        if key in solver_blk:
            skw[key] = _get_float(solver_blk, key, "solver", math.nan)
    for key in ("newton_maxit", "max_stale_iters", "max_rejections"):
        if key in solver_blk:
            v = solver_blk[key]
            if not isinstance(v, int) or isinstance(v, bool):
                raise ScenarioError(f"solver.{key} must be an integer")
            skw[key] = v

    out_blk = doc.get("output", {})
    _reject_unknown(out_blk, {"interval", "channels"}, "output")
    if "interval" in out_blk:
        skw["sample_interval"] = _get_float(out_blk, "interval", "output",
                                            math.nan)
    channels = out_blk.get("channels")
    if channels is not None:
        if (not isinstance(channels, list)
                or not all(isinstance(c, str) for c in channels)):
            raise ScenarioError("output.channels must be a list of "
                                "column names")
        channels = tuple(channels)
    try:
        solver = SolverSettings(**skw)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    sig_blk = doc.get("signals", {})
    unknown = set(sig_blk) - set(SIGNAL_NAMES)
    if unknown:
        raise ScenarioError(f"unknown signal channels: {sorted(unknown)}; "
                            f"valid channels: {sorted(SIGNAL_NAMES)}")
    signals = {name: _load_schedule(name, blk)
               for name, blk in sig_blk.items()}

    return ScenarioConfig(
        name=str(meta.get("name", path.stem)),
        description=str(meta.get("description", "")),
        t_end=t_end,
        plant=_load_plant(doc),
        initial=initial,
        signals=signals,
        solver=solver,
        output_channels=channels)


# --------------------------------------------------------------------------
# TOML writing (SI units only, full round trip)

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    raise TypeError(f"cannot format {type(v)} for TOML")


def write_scenario(config: ScenarioConfig, path: str | Path) -> None:
    """Emit the configuration as a TOML scenario file (SI units).

    Loading the written file reproduces the configuration exactly.
    """
    st = config.plant.stack
    tr = config.plant.train
    ic = config.initial
    sv = config.solver
    lines: list[str] = []

    def sec(name: str, pairs: list[tuple[str, object]]):
        lines.append(f"[{name}]")
        for key, val in pairs:
            lines.append(f"{key} = {_fmt(val)}")
        lines.append("")

    sec("scenario", [("name", config.name),
                     ("description", config.description),
                     ("t_end", config.t_end)])
    sec("plant", [("p_stack", config.plant.p_stack)])
    act = "log10" if st.act_log_base == 10.0 else "ln"
    sec("plant.stack", [("r1", st.r1), ("r2", st.r2), ("s", st.s),
                        ("t1", st.t1), ("t2", st.t2), ("t3", st.t3),
                        ("f1", st.f1), ("f2", st.f2), ("area", st.area),
                        ("n_cells", st.n_cells), ("c_p_el", st.c_p_el),
                        ("a_s", st.a_s), ("h_c", st.h_c),
                        ("activation_log", act)])
    sec("plant.separators", [("v_sep1", config.plant.v_sep1),
                             ("v_sep2", config.plant.v_sep2)])
    sec("plant.tank", [("v_tank", config.plant.v_tank),
                       ("h_tank", config.plant.h_tank),
                       ("a_tank", config.plant.a_tank)])
    cool = ("stage1-inlet" if tr.intercool_to is None
            else list(tr.intercool_to))
    sec("plant.compressor", [("n_stages", tr.n_stages), ("eta", tr.eta),
                             ("intercool_to", cool)])
    sec("initial", [(f.name, getattr(ic, f.name))
                    for f in fields(InitialConditions)])
    sec("solver", [("h", sv.h), ("newton_tol", sv.newton_tol),
                   ("newton_maxit", sv.newton_maxit),
                   ("max_stale_iters", sv.max_stale_iters),
                   ("max_rejections", sv.max_rejections),
                   ("fd_eps", sv.fd_eps), ("init_tol", sv.init_tol)])
    out_pairs: list[tuple[str, object]] = [("interval", sv.sample_interval)]
    if config.output_channels is not None:
        out_pairs.append(("channels", list(config.output_channels)))
    sec("output", out_pairs)
    for name in SIGNAL_NAMES:
        sched = config.signals[name]
        pairs = [[t, v] for t, v in zip(sched.times, sched.values)]
        sec(f"signals.{name}", [("schedule", pairs)])

    Path(path).write_text("\n".join(lines), encoding="utf-8")
