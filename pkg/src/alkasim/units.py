"""Unit operations: stack streams, separators, compressor train, tank,
heat exchangers, and the recirculation mixer.

These are the readable, standalone formulations of the balances that the
assembled DAE residual evaluates in kernel form; tests cross-check the two
against each other.  Species vectors follow :class:`alkasim.thermo.Species`
order [H2O, H2, O2].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import kernels, thermo
from .constants import R_GAS
from .correlations import CorrelationTable, default_table
from .errors import ConvergenceError, WaterStarvationError
from .thermo import Phase, Species, ThermoState


# --------------------------------------------------------------------------
# stack streams

def stack_outflows(f_in: np.ndarray, r: float
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Split the stack feed into anode and cathode outlet streams.

    f_in is the liquid feed [f_H2O, 0, 0] (mol/s), r the hydrogen
    production (mol/s).  Water feed splits evenly between the half cells;
    the cathode consumes 2r of water (r by reaction, r carried across to
    the anode), so f_in/2 >= 2r must hold.
    """
    f_in = np.asarray(f_in, dtype=float)
    if f_in.shape != (3,):
        raise ValueError(f"feed must have shape (3,), got {f_in.shape}")
    if f_in[Species.H2] != 0.0 or f_in[Species.O2] != 0.0:
        raise ValueError("stack feed must be pure water")
    if r < 0.0:
        raise ValueError(f"production rate must be nonnegative, got {r}")
    half = 0.5 * f_in[Species.H2O]
    if half < 2.0 * r:
        raise WaterStarvationError(feed=half, required=2.0 * r)
    anode = np.array([half + r, 0.0, 0.5 * r])
    cathode = np.array([half - 2.0 * r, r, 0.0])
    return anode, cathode


def stack_energy_rhs(T: float, T_in: float, P: float, f_in_w: float,
                     r: float, P_el: float, T_amb: float,
                     c_p_el: float, a_s: float, h_c: float,
                     table: CorrelationTable | None = None) -> float:
    """dT/dt of the lumped stack, K/s.

    Electrical power heats the stack; the feed enters at T_in, all outlet
    streams leave at T, and the surface loses a_s*h_c*(T - T_amb) to
    ambient.
    """
    tab = table or default_table()
    anode, cathode = stack_outflows(np.array([f_in_w, 0.0, 0.0]), r)
    h_in = thermo.enthalpy_flow(T_in, P, np.array([f_in_w, 0.0, 0.0]),
                                Phase.LIQUID, tab)
    liq_out = np.array([anode[0] + cathode[0], 0.0, 0.0])
    gas_out = np.array([0.0, cathode[1], anode[2]])
    h_out = (thermo.enthalpy_flow(T, P, liq_out, Phase.LIQUID, tab)
             + thermo.enthalpy_flow(T, P, gas_out, Phase.GAS, tab))
    q_amb = a_s * h_c * (T - T_amb)
    return (h_in - h_out - q_amb + P_el) / c_p_el


# --------------------------------------------------------------------------
# gas/liquid separators

@dataclass(frozen=True)
class SeparatorState:
    """Holdup of one separator: liquid water plus one pure gas phase
    sharing temperature T and pressure P in the fixed volume V_tot."""

    n: np.ndarray        # (3,) mol holdup
    U: float             # J
    T: float             # K
    P: float             # Pa
    V_tot: float         # m^3
    gas: Species         # which species fills the gas space

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float)
        object.__setattr__(self, "n", n)
        if self.gas is Species.H2O:
            raise ValueError("separator gas space must be H2 or O2")
        other = ({Species.H2, Species.O2} - {self.gas}).pop()
        if n[other] != 0.0:
            raise ValueError(
                f"separator holds only H2O and {self.gas.name}; "
                f"n[{other.name}] = {n[other]}")


def separator_rhs(state: SeparatorState, f_in: np.ndarray, T_up: float,
                  f_out: np.ndarray,
                  table: CorrelationTable | None = None
                  ) -> tuple[np.ndarray, float]:
    """Holdup derivatives (ndot, Udot) of a separator.

    The inlet stream arrives at the upstream temperature T_up and the
    separator pressure; outlets leave at the separator temperature.
    """
    tab = table or default_table()
    f_in = np.asarray(f_in, dtype=float)
    f_out = np.asarray(f_out, dtype=float)
    ndot = f_in - f_out

    def split(f):
        liq = np.array([f[Species.H2O], 0.0, 0.0])
        gas = f.copy()
        gas[Species.H2O] = 0.0
        return liq, gas

    liq_in, gas_in = split(f_in)
    liq_out, gas_out = split(f_out)
    h_in = (thermo.enthalpy_flow(T_up, state.P, liq_in, Phase.LIQUID, tab)
            + thermo.enthalpy_flow(T_up, state.P, gas_in, Phase.GAS, tab))
    h_out = (thermo.enthalpy_flow(state.T, state.P, liq_out, Phase.LIQUID,
                                  tab)
             + thermo.enthalpy_flow(state.T, state.P, gas_out, Phase.GAS,
                                    tab))
    return ndot, h_in - h_out


def separator_closure(state: SeparatorState,
                      table: CorrelationTable | None = None) -> np.ndarray:
    """Algebraic closures tying (T, P) to the holdup: [U(T,P,n) - U,
    V(T,P,n) - V_tot]."""
    tab = table or default_table()
    liq = np.array([state.n[Species.H2O], 0.0, 0.0])
    gas = state.n.copy()
    gas[Species.H2O] = 0.0
    liq_state = ThermoState(state.T, state.P, liq, Phase.LIQUID)
    gas_state = ThermoState(state.T, state.P, gas, Phase.GAS)
    u_tl = (thermo.internal_energy(liq_state, tab)
            + thermo.internal_energy(gas_state, tab))
    v_tl = thermo.volume(liq_state, tab) + thermo.volume(gas_state, tab)
    return np.array([u_tl - state.U, v_tl - state.V_tot])


def solve_vessel_state(n: np.ndarray, U: float, V_tot: float, gas: Species,
                       table: CorrelationTable | None = None,
                       T_lo: float = 254.0, T_hi: float = 520.0
                       ) -> tuple[float, float]:
    """Recover (T, P) of a two-phase vessel from its holdup (n, U, V_tot).

    With an incompressible liquid the gas space is V_tot - n_w*v_liq, so
    P(T) = n_gas*R*T/V_gas is explicit and U(T, P(T), n) - U is a strictly
    increasing scalar function of T; solved with brentq.
    """
    tab = table or default_table()
    n = np.asarray(n, dtype=float)
    n_w = n[Species.H2O]
    n_g = n[gas]
    v_gas = V_tot - n_w * tab.v_liq
    if n_g <= 0.0 or v_gas <= 0.0:
        raise ValueError(
            f"vessel needs a gas space: n_gas = {n_g}, V_gas = {v_gas}")

    def u_err(T: float) -> float:
        P = n_g * R_GAS * T / v_gas
        state = SeparatorState(n=n, U=U, T=T, P=P, V_tot=V_tot, gas=gas)
        return separator_closure(state, tab)[0]

    lo = max(T_lo, tab.liq_t_lo) if n_w > 0.0 else T_lo
    lo = max(lo, tab.gas_t_lo[gas])
    hi = min(T_hi, tab.liq_t_hi) if n_w > 0.0 else T_hi
    hi = min(hi, tab.gas_t_hi[gas])
    try:
        T = brentq(u_err, lo, hi, xtol=1e-10, rtol=1e-14)
    except ValueError as exc:
        raise ConvergenceError(
            f"vessel state not bracketed in [{lo}, {hi}] K: {exc}") from exc
    return float(T), float(n_g * R_GAS * T / v_gas)


def solve_tank_state(n: float, U: float, V: float,
                     table: CorrelationTable | None = None,
                     T_lo: float = 254.0, T_hi: float = 900.0
                     ) -> tuple[float, float]:
    """Recover (T, P) of the hydrogen tank from (n, U, V)."""
    tab = table or default_table()
    if n <= 0.0:
        raise ValueError(f"tank holdup must be positive, got {n}")

    def u_err(T: float) -> float:
        state = ThermoState(T, n * R_GAS * T / V,
                            np.array([0.0, n, 0.0]), Phase.GAS)
        return thermo.internal_energy(state, tab) - U

    lo = max(T_lo, tab.gas_t_lo[Species.H2])
    hi = min(T_hi, tab.gas_t_hi[Species.H2])
    try:
        T = brentq(u_err, lo, hi, xtol=1e-10, rtol=1e-14)
    except ValueError as exc:
        raise ConvergenceError(
            f"tank state not bracketed in [{lo}, {hi}] K: {exc}") from exc
    return float(T), float(n * R_GAS * T / V)


def tank_rhs(n: float, T: float, f_in: float, f_out: float, T_amb: float,
             ha: float, table: CorrelationTable | None = None
             ) -> tuple[float, float]:
    """Holdup derivatives (ndot, Udot) of the storage tank.

    The feed has been cooled to tank temperature by the final cooler, so
    both flows carry h(T); the wall loses ha*(T - T_amb).
    """
    tab = table or default_table()
    h = thermo.enthalpy_flow(T, 1.0e5, np.array([0.0, 1.0, 0.0]),
                             Phase.GAS, tab)
    return f_in - f_out, (f_in - f_out) * h - ha * (T - T_amb)


def tank_closure(n: float, U: float, T: float, P: float, V: float,
                 table: CorrelationTable | None = None) -> np.ndarray:
    """Algebraic closures of the tank: [U(T,n) - U, V(T,P,n) - V]."""
    tab = table or default_table()
    state = ThermoState(T, P, np.array([0.0, n, 0.0]), Phase.GAS)
    return np.array([thermo.internal_energy(state, tab) - U,
                     thermo.volume(state, tab) - V])


# --------------------------------------------------------------------------
# compressor train

@dataclass(frozen=True)
class StageResult:
    """One compression stage solved for its isentropic outlet."""
    T_in: float          # K
    P_in: float          # Pa
    P_out: float         # Pa
    T_isentropic: float  # K
    T_out: float         # K, equals T_isentropic in this work accounting
    work: float          # W, shaft power f*(h(T_is) - h(T_in))/eta


@dataclass(frozen=True)
class CompressorTrain:
    """Multistage hydrogen compressor with interstage cooling.

    intercool_to = None cools each interstage back to the stage-1 inlet
    temperature; a tuple of n_stages-1 temperatures fixes the setpoints.
    """
    n_stages: int = 3
    eta: float = 0.75
    intercool_to: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n_stages < 1:
            raise ValueError(f"n_stages must be >= 1, got {self.n_stages}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if (self.intercool_to is not None
                and len(self.intercool_to) != self.n_stages - 1):
            raise ValueError(
                f"intercool_to needs {self.n_stages - 1} temperatures, "
                f"got {len(self.intercool_to)}")


def _isentropic_outlet(T_in: float, P_in: float, P_out: float,
                       tab: CorrelationTable) -> float:
    """Outlet temperature with equal inlet and outlet molar entropy."""
    if P_out == P_in:
        return T_in
    s_in = thermo.entropy_flow(T_in, P_in, np.array([0.0, 1.0, 0.0]),
                               Phase.GAS, tab)

    def s_err(T: float) -> float:
        return thermo.entropy_flow(T, P_out, np.array([0.0, 1.0, 0.0]),
                                   Phase.GAS, tab) - s_in

    # ideal-gas isentrope estimate brackets the root comfortably
    cp = thermo.heat_capacity(
        ThermoState(T_in, P_in, np.array([0.0, 1.0, 0.0]), Phase.GAS), tab)
    t_est = T_in * (P_out / P_in) ** (R_GAS / cp)
    lo = min(T_in, t_est) * 0.8
    hi = max(T_in, t_est) * 1.3
    lo = max(lo, tab.gas_t_lo[Species.H2])
    hi = min(hi, tab.gas_t_hi[Species.H2])
    if s_err(lo) * s_err(hi) > 0.0:
        lo = tab.gas_t_lo[Species.H2]
        hi = tab.gas_t_hi[Species.H2]
    try:
        return float(brentq(s_err, lo, hi, xtol=1e-10, rtol=1e-14))
    except ValueError as exc:
        raise ConvergenceError(
            f"isentropic outlet not bracketed for {P_in} -> {P_out} Pa "
            f"at {T_in} K") from exc


def compressor_stage(f: float, T_in: float, P_in: float, P_out: float,
                     eta: float = 0.75,
                     table: CorrelationTable | None = None) -> StageResult:
    """Solve one stage: isentropic outlet temperature and shaft power.

    The gas leaves at the isentropic temperature; the efficiency eta
    inflates the shaft work only.  Zero flow short-circuits to zero work.
    """
    tab = table or default_table()
    if P_in <= 0.0 or P_out <= 0.0:
        raise ValueError(f"pressures must be positive: {P_in}, {P_out}")
    if f == 0.0:
        return StageResult(T_in, P_in, P_out, T_in, T_in, 0.0)
    t_is = _isentropic_outlet(T_in, P_in, P_out, tab)
    one = np.array([0.0, 1.0, 0.0])
    dh = (thermo.enthalpy_flow(t_is, P_out, one, Phase.GAS, tab)
          - thermo.enthalpy_flow(T_in, P_in, one, Phase.GAS, tab))
    return StageResult(T_in, P_in, P_out, t_is, t_is, f * dh / eta)


@dataclass(frozen=True)
class TrainResult:
    stages: tuple[StageResult, ...]
    work_total: float            # W
    cooler_duties: tuple[float, ...]  # W per cooler, last one to T_end


def compressor_train(f: float, T_in: float, P_in: float, P_end: float,
                     T_end: float, train: CompressorTrain | None = None,
                     table: CorrelationTable | None = None) -> TrainResult:
    """Run the full train from (T_in, P_in) to (T_end, P_end).

    Equal stage pressure ratios (P_end/P_in)^(1/n); each intercooler duty
    is the enthalpy-flow change from the stage outlet to the next stage
    inlet, and the final cooler brings the gas to the tank temperature
    T_end.
    """
    tab = table or default_table()
    tr = train or CompressorTrain()
    if P_in <= 0.0 or P_end <= 0.0:
        raise ValueError(f"pressures must be positive: {P_in}, {P_end}")
    ratio = (P_end / P_in) ** (1.0 / tr.n_stages)
    one = np.array([0.0, 1.0, 0.0])

    stages = []
    duties = []
    t_stage_in = T_in
    p = P_in
    for k in range(tr.n_stages):
        p_out = P_end if k == tr.n_stages - 1 else p * ratio
        stage = compressor_stage(f, t_stage_in, p, p_out, tr.eta, tab)
        stages.append(stage)
        if k < tr.n_stages - 1:
            t_next = (T_in if tr.intercool_to is None
                      else tr.intercool_to[k])
            duties.append(f * (thermo.enthalpy_flow(t_next, p_out, one,
                                                    Phase.GAS, tab)
                               - thermo.enthalpy_flow(stage.T_out, p_out,
                                                      one, Phase.GAS, tab)))
            t_stage_in = t_next
        else:
            duties.append(f * (thermo.enthalpy_flow(T_end, p_out, one,
                                                    Phase.GAS, tab)
                               - thermo.enthalpy_flow(stage.T_out, p_out,
                                                      one, Phase.GAS, tab)))
        p = p_out
    return TrainResult(stages=tuple(stages),
                       work_total=float(sum(s.work for s in stages)),
                       cooler_duties=tuple(float(q) for q in duties))


# --------------------------------------------------------------------------
# heat exchangers and mixer

def heat_exchanger_residual(f: float, T_sep: float, T_hx: float, Q: float,
                            P: float = 1.0e5,
                            table: CorrelationTable | None = None) -> float:
    """Duty equation of a lye cooler: f*(h(T_sep) - h(T_hx)) - Q, in W.

    With the recirculation flow off the duty equation degenerates, so the
    residual pins the outlet to the separator temperature instead.
    """
    tab = table or default_table()
    one = np.array([1.0, 0.0, 0.0])
    if f <= 0.0:
        return T_hx - T_sep
    return (f * (thermo.enthalpy_flow(T_sep, P, one, Phase.LIQUID, tab)
                 - thermo.enthalpy_flow(T_hx, P, one, Phase.LIQUID, tab))
            - Q)


def mixer_residual(streams: list[tuple[float, float]], f_mix: float,
                   T_mix: float, T_pin: float | None = None,
                   table: CorrelationTable | None = None) -> np.ndarray:
    """Adiabatic mixing of liquid-water streams: [mass, energy] residuals.

    streams is a list of (flow mol/s, temperature K) pairs.  The energy
    equation uses sensible enthalpies relative to the reference
    temperature, which is exact once the mass balance closes.  With all
    feeds off the energy equation degenerates and the outlet temperature
    is pinned to T_pin.
    """
    tab = table or default_table()
    f_tot = sum(f for f, _ in streams)
    mass = f_mix - f_tot
    if f_tot <= 0.0:
        if T_pin is None:
            raise ValueError("T_pin required when all mixer feeds are off")
        return np.array([mass, T_mix - T_pin])

    def sens(T: float) -> float:
        return kernels.dh_liq_mol(tab.t_ref, T, tab.cp_liq,
                                  tab.liq_t_lo, tab.liq_t_hi)

    energy = f_mix * sens(T_mix) - sum(f * sens(T) for f, T in streams)
    return np.array([mass, energy])
