"""Electrochemical stack model.

Cell voltage decomposes into reversible, ohmic, and activation parts:

    xi_cell = xi_rev(T, P) + (r1 + r2*T_c) * j + s * log10(arg(T_c) * j + 1)

with j = I/A the current density and T_c the stack temperature in degC
(temperatures are Kelvin everywhere else; the conversion happens here).
The activation logarithm is base 10 by default (``ACT_LOG_BASE_10``) and
can be switched to natural log through :class:`StackParams`.

Current efficiency uses the current density in mA/cm^2:

    eta_F = j_mA^2 / (f1 + j_mA^2) * f2

and the hydrogen production of n_c series cells is
r = n_c * eta_F * I / (z_e * F).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .constants import ACT_LOG_BASE_10, FARADAY, Z_ELECTRONS
from .correlations import CorrelationTable, default_table
from .errors import ConvergenceError, DomainEvaluationError


@dataclass(frozen=True)
class StackParams:
    """Electrode-kinetics coefficients and stack geometry/thermal lumps."""

    r1: float = 2.18e-4        # ohm m^2
    r2: float = -4.25e-7       # ohm m^2 / degC
    s: float = 117.93e-3       # V
    t1: float = -145.29e-3     # m^2/A
    t2: float = 11.794         # m^2 degC / A
    t3: float = 395.68         # m^2 degC^2 / A
    f1: float = 120.0          # mA^2/cm^4
    f2: float = 0.98           # -
    area: float = 1.25         # m^2 electrode area per cell
    n_cells: int = 230         # series cells
    z_e: int = Z_ELECTRONS     # electrons per mole H2
    faraday: float = FARADAY   # C/mol
    c_p_el: float = 5.0e6      # J/K lumped heat capacity
    a_s: float = 10.0          # m^2 stack surface
    h_c: float = 50.0          # W/m^2/K film coefficient
    act_log_base: float = ACT_LOG_BASE_10

    def __post_init__(self):
        if self.area <= 0.0:
            raise ValueError(f"area must be positive, got {self.area}")
        if self.n_cells < 1:
            raise ValueError(f"n_cells must be >= 1, got {self.n_cells}")
        if self.f1 <= 0.0:
            raise ValueError(f"f1 must be positive, got {self.f1}")
        if not 0.0 < self.f2 <= 1.0:
            raise ValueError(f"f2 must lie in (0, 1], got {self.f2}")
        if self.c_p_el <= 0.0:
            raise ValueError(f"c_p_el must be positive, got {self.c_p_el}")
        if self.z_e < 1:
            raise ValueError(f"z_e must be >= 1, got {self.z_e}")
        if self.act_log_base <= 1.0:
            raise ValueError(
                f"act_log_base must exceed 1, got {self.act_log_base}")

    @property
    def inv_ln_base(self) -> float:
        return 1.0 / math.log(self.act_log_base)

    def with_natural_log(self) -> "StackParams":
        return replace(self, act_log_base=math.e)


@dataclass(frozen=True)
class ReactionThermo:
    """Liquid-water splitting per mole H2: H2O(l) -> H2 + 1/2 O2."""
    dh: float   # J/mol
    ds: float   # J/mol/K
    dg: float   # J/mol


def reaction_thermo(T: float, P: float,
                    table: CorrelationTable | None = None) -> ReactionThermo:
    """Reaction enthalpy/entropy/Gibbs at (T, P), products at pressure P."""
    tab = table or default_table()
    dh, ds, dg = kernels.reaction_gibbs(
        T, P, tab.cp_gas, tab.hf_gas, tab.s0_gas, tab.gas_t_lo, tab.gas_t_hi,
        tab.cp_liq, tab.hf_liq, tab.s0_liq, tab.v_liq,
        tab.liq_t_lo, tab.liq_t_hi, tab.t_ref, tab.p_ref)
    if math.isnan(dg):
        raise DomainEvaluationError(9, "cell voltage decomposition",
                                    f"reaction thermo undefined at T = {T} K")
    return ReactionThermo(dh=dh, ds=ds, dg=dg)


def reversible_voltage(T: float, P: float,
                       params: StackParams | None = None,
                       table: CorrelationTable | None = None) -> float:
    """Thermodynamic minimum cell voltage, V."""
    p = params or StackParams()
    rt = reaction_thermo(T, P, table)
    return rt.dg / (p.z_e * p.faraday)


def ohmic_overvoltage(I: float, T: float, params: StackParams) -> float:
    """Resistive voltage drop at stack temperature T (K), V."""
    return kernels.ohmic_overvoltage_kernel(I, T - 273.15, params.r1,
                                            params.r2, params.area)


def activation_overvoltage(I: float, T: float, params: StackParams) -> float:
    """Electrode kinetics overvoltage at stack temperature T (K), V."""
    eta = kernels.activation_overvoltage_kernel(
        I, T - 273.15, params.s, params.t1, params.t2, params.t3,
        params.area, params.inv_ln_base)
    if math.isnan(eta):
        raise DomainEvaluationError(
            9, "cell voltage decomposition",
            f"activation log argument nonpositive at I = {I} A, T = {T} K")
    return eta


def cell_voltage(I: float, T: float, P: float, params: StackParams,
                 table: CorrelationTable | None = None) -> float:
    """Single-cell voltage at current I, V."""
    return (reversible_voltage(T, P, params, table)
            + ohmic_overvoltage(I, T, params)
            + activation_overvoltage(I, T, params))


def faraday_efficiency(I: float, params: StackParams) -> float:
    """Fraction of the current that produces hydrogen."""
    return kernels.faraday_efficiency_kernel(I, params.area, params.f1,
                                             params.f2)


def production_rate(I: float, params: StackParams) -> float:
    """Stack hydrogen production, mol/s."""
    return kernels.production_rate_kernel(I, params.area, params.n_cells,
                                          params.f1, params.f2, params.z_e,
                                          params.faraday)


def electro_residual(xi_cell: float, I: float, T: float, P: float,
                     P_in: float, params: StackParams,
                     table: CorrelationTable | None = None) -> np.ndarray:
    """The two stack algebraic equations: voltage decomposition and power.

    Returns [xi_cell - xi(I, T, P), P_in - n_c * xi_cell * I].
    """
    return np.array([
        xi_cell - cell_voltage(I, T, P, params, table),
        P_in - params.n_cells * xi_cell * I,
    ])


def solve_operating_point(P_in: float, T: float, P: float,
                          params: StackParams | None = None,
                          table: CorrelationTable | None = None,
                          tol: float = 1e-12, max_iter: int = 60
                          ) -> tuple[float, float]:
    """Solve the stack equations for (xi_cell, I) at electrical power P_in.

    n_c * xi(I) * I is strictly increasing in I for I >= 0, so the scalar
    power equation has a unique root; Newton on I with a numerical
    derivative, safeguarded by bisection on a bracketing interval.
    """
    p = params or StackParams()
    tab = table or default_table()
    if P_in < 0.0:
        raise ValueError(f"P_in must be nonnegative, got {P_in}")
    if P_in == 0.0:
        return cell_voltage(0.0, T, P, p, tab), 0.0

    def power(I: float) -> float:
        return p.n_cells * cell_voltage(I, T, P, p, tab) * I

    # bracket the root
    lo, hi = 0.0, 1000.0
    while power(hi) < P_in:
        hi *= 2.0
        if hi > 1e9:
            raise ConvergenceError(
                f"could not bracket stack current for P_in = {P_in} W")

    I = 0.5 * hi
    for _ in range(max_iter):
        g = power(I) - P_in
        if g > 0.0:
            hi = I
        else:
            lo = I
        dI = max(1e-8 * max(I, 1.0), 1e-10)
        dg = (power(I + dI) - power(I)) / dI
        I_new = I - g / dg if dg > 0.0 else 0.5 * (lo + hi)
        if not lo < I_new < hi:
            I_new = 0.5 * (lo + hi)
        if abs(I_new - I) <= tol * max(I, 1.0):
            I = I_new
            break
        I = I_new
    else:
        raise ConvergenceError(
            f"stack operating point did not converge for P_in = {P_in} W",
            iterations=max_iter)
    return cell_voltage(I, T, P, p, tab), I
