"""Stream thermodynamics: ideal-gas mixtures and liquid water.

Properties are built from the correlation set in
:mod:`alkasim.correlations`: cubic cp polynomials for the gases, a quartic
for liquid water, formation enthalpies and standard entropies at 298.15 K
and 1 bar.  Gas-phase entropy evaluates each species at the total pressure
of its chamber; liquid water is incompressible with a constant molar
volume.

Phase is an explicit tag on the state, not a flash result.  Gas data exist
for all three species (water vapor included); the liquid correlations
cover water only, so a liquid state must not carry H2 or O2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from . import kernels
from .constants import R_GAS
from .correlations import SPECIES_NAMES, CorrelationTable, default_table
from .errors import PhaseError, ThermoRangeError


class Species(IntEnum):
    """Index of each species in composition and flow vectors."""
    H2O = 0
    H2 = 1
    O2 = 2


class Phase(Enum):
    LIQUID = "liquid"
    GAS = "gas"


@dataclass(frozen=True)
class ThermoState:
    """A single-phase stream or holdup: T (K), P (Pa), moles per species."""

    T: float
    P: float
    n: np.ndarray
    phase: Phase

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float)
        if n.shape != (3,):
            raise ValueError(f"n must have shape (3,), got {n.shape}")
        if np.any(n < 0.0):
            raise ValueError(f"negative mole numbers: {n}")
        if not (self.T > 0.0 and math.isfinite(self.T)):
            raise ValueError(f"T must be positive and finite, got {self.T}")
        if not (self.P > 0.0 and math.isfinite(self.P)):
            raise ValueError(f"P must be positive and finite, got {self.P}")
        if self.phase is Phase.LIQUID and (n[Species.H2] > 0.0
                                           or n[Species.O2] > 0.0):
            raise PhaseError(
                "liquid correlations cover water only; state has "
                f"n_H2 = {n[Species.H2]}, n_O2 = {n[Species.O2]}")
        object.__setattr__(self, "n", n)


def _check_gas_range(T: float, n: np.ndarray, tab: CorrelationTable) -> None:
    for i in range(3):
        if n[i] > 0.0 and not (tab.gas_t_lo[i] <= T <= tab.gas_t_hi[i]):
            raise ThermoRangeError(SPECIES_NAMES[i], T,
                                   tab.gas_t_lo[i], tab.gas_t_hi[i])


def _check_liq_range(T: float, tab: CorrelationTable) -> None:
    if not (tab.liq_t_lo <= T <= tab.liq_t_hi):
        raise ThermoRangeError("H2O(l)", T, tab.liq_t_lo, tab.liq_t_hi)


def _h_gas(T: float, i: int, tab: CorrelationTable) -> float:
    return kernels.h_gas_mol(T, i, tab.cp_gas, tab.hf_gas,
                             tab.gas_t_lo, tab.gas_t_hi, tab.t_ref)


def _s_gas(T: float, P: float, i: int, tab: CorrelationTable) -> float:
    return kernels.s_gas_mol(T, P, i, tab.cp_gas, tab.s0_gas,
                             tab.gas_t_lo, tab.gas_t_hi, tab.t_ref, tab.p_ref)


def _h_liq(T: float, P: float, tab: CorrelationTable) -> float:
    return kernels.h_liq_mol(T, P, tab.cp_liq, tab.hf_liq, tab.v_liq,
                             tab.liq_t_lo, tab.liq_t_hi, tab.t_ref, tab.p_ref)


def _s_liq(T: float, tab: CorrelationTable) -> float:
    return kernels.s_liq_mol(T, tab.cp_liq, tab.s0_liq,
                             tab.liq_t_lo, tab.liq_t_hi, tab.t_ref)


def enthalpy(state: ThermoState, table: CorrelationTable | None = None
             ) -> float:
    """Total enthalpy of the state, J."""
    tab = table or default_table()
    if state.phase is Phase.GAS:
        if not np.any(state.n > 0.0):
            return 0.0
        _check_gas_range(state.T, state.n, tab)
        return float(sum(state.n[i] * _h_gas(state.T, i, tab)
                         for i in range(3) if state.n[i] > 0.0))
    if state.n[Species.H2O] == 0.0:
        return 0.0
    _check_liq_range(state.T, tab)
    return float(state.n[Species.H2O] * _h_liq(state.T, state.P, tab))


def entropy(state: ThermoState, table: CorrelationTable | None = None
            ) -> float:
    """Total entropy of the state, J/K.  Gas species are evaluated at the
    total pressure of the chamber (pure-chamber convention)."""
    tab = table or default_table()
    if state.phase is Phase.GAS:
        if not np.any(state.n > 0.0):
            return 0.0
        _check_gas_range(state.T, state.n, tab)
        return float(sum(state.n[i] * _s_gas(state.T, state.P, i, tab)
                         for i in range(3) if state.n[i] > 0.0))
    if state.n[Species.H2O] == 0.0:
        return 0.0
    _check_liq_range(state.T, tab)
    return float(state.n[Species.H2O] * _s_liq(state.T, tab))


def volume(state: ThermoState, table: CorrelationTable | None = None
           ) -> float:
    """Volume of the state, m^3: ideal gas or constant-molar-volume liquid."""
    tab = table or default_table()
    if state.phase is Phase.GAS:
        return float(np.sum(state.n) * R_GAS * state.T / state.P)
    return float(state.n[Species.H2O] * tab.v_liq)


def internal_energy(state: ThermoState,
                    table: CorrelationTable | None = None) -> float:
    """Total internal energy, J: U = H - P V."""
    tab = table or default_table()
    return enthalpy(state, tab) - state.P * volume(state, tab)


def gibbs_energy(state: ThermoState,
                 table: CorrelationTable | None = None) -> float:
    """Total Gibbs energy, J: G = H - T S."""
    tab = table or default_table()
    return enthalpy(state, tab) - state.T * entropy(state, tab)


def _flow_state(T: float, P: float, f: np.ndarray, phase: Phase
                ) -> ThermoState:
    f = np.asarray(f, dtype=float)
    if f.shape != (3,):
        raise ValueError(f"flow vector must have shape (3,), got {f.shape}")
    if np.any(f < 0.0):
        raise ValueError(f"negative molar flows: {f}")
    return ThermoState(T=T, P=P, n=f, phase=phase)


def enthalpy_flow(T: float, P: float, f: np.ndarray, phase: Phase,
                  table: CorrelationTable | None = None) -> float:
    """Enthalpy carried by a stream with molar flows f (mol/s), in W."""
    return enthalpy(_flow_state(T, P, f, phase), table)


def entropy_flow(T: float, P: float, f: np.ndarray, phase: Phase,
                 table: CorrelationTable | None = None) -> float:
    """Entropy carried by a stream with molar flows f (mol/s), in W/K."""
    return entropy(_flow_state(T, P, f, phase), table)


def heat_capacity(state: ThermoState,
                  table: CorrelationTable | None = None) -> float:
    """Total isobaric heat capacity of the state, J/K."""
    tab = table or default_table()
    if state.phase is Phase.GAS:
        if not np.any(state.n > 0.0):
            return 0.0
        _check_gas_range(state.T, state.n, tab)
        return float(sum(
            state.n[i] * kernels.cp_gas_mol(state.T, i, tab.cp_gas,
                                            tab.gas_t_lo, tab.gas_t_hi)
            for i in range(3) if state.n[i] > 0.0))
    if state.n[Species.H2O] == 0.0:
        return 0.0
    _check_liq_range(state.T, tab)
    return float(state.n[Species.H2O]
                 * kernels.cp_liq_mol(state.T, tab.cp_liq,
                                      tab.liq_t_lo, tab.liq_t_hi))
