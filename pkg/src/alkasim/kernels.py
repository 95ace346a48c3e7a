"""Scalar numerical kernels: properties, electrochemistry, plant residual.

Everything in this module is flat float arithmetic over numpy arrays so it
can be compiled by numba (see :mod:`alkasim._accel`); with the JIT disabled
the same functions run as plain Python and give bit-identical results.
Correlation data arrive as the unpacked fields of
:meth:`alkasim.correlations.CorrelationTable.pack`.

Domain violations (temperature outside a correlation range, nonpositive
pressure or log argument) are signalled by NaN in the affected residual
rows; the Python layer converts those into typed exceptions with the
offending equation index.

Residual layout (24 rows).  Differential rows are ``dx/dt - f``:

====  =======================================================
row   equation
====  =======================================================
0     stack energy balance (dT/dt)
1     separator 1 water holdup
2     separator 1 oxygen holdup
3     separator 1 energy holdup
4     separator 2 water holdup
5     separator 2 hydrogen holdup
6     separator 2 energy holdup
7     tank hydrogen holdup
8     tank energy holdup
9     cell voltage decomposition
10    electrical power draw
11    separator 1 internal-energy closure
12    separator 1 volume closure
13    separator 2 internal-energy closure
14    separator 2 volume closure
15    compressor stage 1 isentropic relation
16    compressor stage 2 isentropic relation
17    compressor stage 3 isentropic relation
18    tank internal-energy closure
19    tank volume closure
20    heat exchanger 1 duty
21    heat exchanger 2 duty
22    mixer mass balance
23    mixer energy balance
====  =======================================================
"""

import math

import numpy as np

from ._accel import jitted
from .constants import R_GAS

# species positions in the gas-property arrays
I_H2O = 0
I_H2 = 1
I_O2 = 2

N_X = 9
N_Y = 15
N_U = 8
N_D = 3
N_EQ = N_X + N_Y
N_Z = 10

EQUATION_NAMES = (
    "stack energy balance",
    "separator 1 water holdup",
    "separator 1 oxygen holdup",
    "separator 1 energy holdup",
    "separator 2 water holdup",
    "separator 2 hydrogen holdup",
    "separator 2 energy holdup",
    "tank hydrogen holdup",
    "tank energy holdup",
    "cell voltage decomposition",
    "electrical power draw",
    "separator 1 internal-energy closure",
    "separator 1 volume closure",
    "separator 2 internal-energy closure",
    "separator 2 volume closure",
    "compressor stage 1 isentropic relation",
    "compressor stage 2 isentropic relation",
    "compressor stage 3 isentropic relation",
    "tank internal-energy closure",
    "tank volume closure",
    "heat exchanger 1 duty",
    "heat exchanger 2 duty",
    "mixer mass balance",
    "mixer energy balance",
)

# parameter-vector layout (packed by dae.pack_params)
P_R1 = 0          # ohm m^2
P_R2 = 1          # ohm m^2 / degC
P_S = 2           # V
P_T1 = 3          # m^2/A
P_T2 = 4          # m^2 degC / A
P_T3 = 5          # m^2 degC^2 / A
P_F1 = 6          # mA^2/cm^4
P_F2 = 7          # -
P_AREA = 8        # m^2
P_NCELLS = 9      # -
P_FARADAY = 10    # C/mol
P_ZE = 11         # -
P_INV_LN_BASE = 12  # 1/ln(base) of the activation logarithm
P_CPEL = 13       # J/K, lumped stack heat capacity
P_ASHC = 14       # W/K, stack surface area times film coefficient
P_PSTACK = 15     # Pa
P_VSEP1 = 16      # m^3
P_VSEP2 = 17      # m^3
P_VTANK = 18      # m^3
P_HATANK = 19     # W/K
P_ETAC = 20       # -, compressor isentropic efficiency
P_COOLMODE = 21   # 0: intercool to stage-1 inlet T, 1: fixed setpoints
P_TCOOL2 = 22     # K, stage-2 inlet setpoint when COOLMODE = 1
P_TCOOL3 = 23     # K, stage-3 inlet setpoint when COOLMODE = 1
N_PAR = 24


# --------------------------------------------------------------------------
# polynomial helpers

@jitted
def poly_eval(c, T):
    """Evaluate sum_k c[k] T^k."""
    acc = 0.0
    p = 1.0
    for k in range(c.shape[0]):
        acc += c[k] * p
        p *= T
    return acc


@jitted
def poly_int(c, Ta, Tb):
    """Integral of sum_k c[k] T^k from Ta to Tb."""
    acc = 0.0
    pa = Ta
    pb = Tb
    for k in range(c.shape[0]):
        acc += c[k] * (pb - pa) / (k + 1.0)
        pa *= Ta
        pb *= Tb
    return acc


@jitted
def poly_int_over_T(c, Ta, Tb):
    """Integral of sum_k c[k] T^(k-1) from Ta to Tb."""
    if Ta <= 0.0 or Tb <= 0.0:
        return np.nan
    acc = c[0] * math.log(Tb / Ta)
    pa = Ta
    pb = Tb
    for k in range(1, c.shape[0]):
        acc += c[k] * (pb - pa) / k
        pa *= Ta
        pb *= Tb
    return acc


# --------------------------------------------------------------------------
# single-species properties (molar, SI)

@jitted
def cp_gas_mol(T, i, cp_gas, gas_t_lo, gas_t_hi):
    if T < gas_t_lo[i] or T > gas_t_hi[i]:
        return np.nan
    return poly_eval(cp_gas[i], T)


@jitted
def h_gas_mol(T, i, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref):
    """Ideal-gas molar enthalpy, J/mol."""
    if T < gas_t_lo[i] or T > gas_t_hi[i]:
        return np.nan
    return hf_gas[i] + poly_int(cp_gas[i], t_ref, T)


@jitted
def s_gas_mol(T, P, i, cp_gas, s0_gas, gas_t_lo, gas_t_hi, t_ref, p_ref):
    """Ideal-gas molar entropy at the stated total pressure, J/mol/K."""
    if T < gas_t_lo[i] or T > gas_t_hi[i] or P <= 0.0:
        return np.nan
    return (s0_gas[i] + poly_int_over_T(cp_gas[i], t_ref, T)
            - R_GAS * math.log(P / p_ref))


@jitted
def u_gas_mol(T, i, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref):
    """Ideal-gas molar internal energy, J/mol."""
    h = h_gas_mol(T, i, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)
    return h - R_GAS * T


@jitted
def cp_liq_mol(T, cp_liq, liq_t_lo, liq_t_hi):
    if T < liq_t_lo or T > liq_t_hi:
        return np.nan
    return poly_eval(cp_liq, T)


@jitted
def h_liq_mol(T, P, cp_liq, hf_liq, v_liq, liq_t_lo, liq_t_hi, t_ref, p_ref):
    """Incompressible liquid-water molar enthalpy, J/mol."""
    if T < liq_t_lo or T > liq_t_hi:
        return np.nan
    return hf_liq + poly_int(cp_liq, t_ref, T) + v_liq * (P - p_ref)


@jitted
def s_liq_mol(T, cp_liq, s0_liq, liq_t_lo, liq_t_hi, t_ref):
    """Incompressible liquid-water molar entropy, J/mol/K."""
    if T < liq_t_lo or T > liq_t_hi:
        return np.nan
    return s0_liq + poly_int_over_T(cp_liq, t_ref, T)


@jitted
def u_liq_mol(T, P, cp_liq, hf_liq, v_liq, liq_t_lo, liq_t_hi, t_ref, p_ref):
    """Incompressible liquid-water molar internal energy, J/mol."""
    h = h_liq_mol(T, P, cp_liq, hf_liq, v_liq, liq_t_lo, liq_t_hi,
                  t_ref, p_ref)
    return h - P * v_liq


@jitted
def dh_liq_mol(Ta, Tb, cp_liq, liq_t_lo, liq_t_hi):
    """Sensible liquid enthalpy difference h(Tb) - h(Ta) at equal P, J/mol."""
    if Ta < liq_t_lo or Ta > liq_t_hi or Tb < liq_t_lo or Tb > liq_t_hi:
        return np.nan
    return poly_int(cp_liq, Ta, Tb)


# --------------------------------------------------------------------------
# electrochemistry

@jitted
def reaction_gibbs(T, P, cp_gas, hf_gas, s0_gas, gas_t_lo, gas_t_hi,
                   cp_liq, hf_liq, s0_liq, v_liq, liq_t_lo, liq_t_hi,
                   t_ref, p_ref):
    """(dH, dS, dG) of liquid-water splitting per mole H2 at (T, P)."""
    h_h2 = h_gas_mol(T, I_H2, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)
    h_o2 = h_gas_mol(T, I_O2, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)
    h_w = h_liq_mol(T, P, cp_liq, hf_liq, v_liq, liq_t_lo, liq_t_hi,
                    t_ref, p_ref)
    s_h2 = s_gas_mol(T, P, I_H2, cp_gas, s0_gas, gas_t_lo, gas_t_hi,
                     t_ref, p_ref)
    s_o2 = s_gas_mol(T, P, I_O2, cp_gas, s0_gas, gas_t_lo, gas_t_hi,
                     t_ref, p_ref)
    s_w = s_liq_mol(T, cp_liq, s0_liq, liq_t_lo, liq_t_hi, t_ref)
    dh = h_h2 + 0.5 * h_o2 - h_w
    ds = s_h2 + 0.5 * s_o2 - s_w
    return dh, ds, dh - T * ds


@jitted
def ohmic_overvoltage_kernel(I, T_c, r1, r2, area):
    """Ohmic cell overvoltage, V.  T_c in degC."""
    return (r1 + r2 * T_c) * I / area


@jitted
def activation_overvoltage_kernel(I, T_c, s, t1, t2, t3, area, inv_ln_base):
    """Activation cell overvoltage, V.  T_c in degC; NaN outside domain."""
    if T_c <= 0.0:
        return np.nan
    arg = (t1 + t2 / T_c + t3 / (T_c * T_c)) * I / area + 1.0
    if arg <= 0.0:
        return np.nan
    return s * math.log(arg) * inv_ln_base


@jitted
def faraday_efficiency_kernel(I, area, f1, f2):
    """Current efficiency from cell current, dimensionless."""
    j_ma = 0.1 * I / area          # A/m^2 -> mA/cm^2
    j2 = j_ma * j_ma
    return j2 / (f1 + j2) * f2


@jitted
def production_rate_kernel(I, area, n_cells, f1, f2, z_e, faraday):
    """Stack H2 production, mol/s."""
    return n_cells * faraday_efficiency_kernel(I, area, f1, f2) * I \
        / (z_e * faraday)


@jitted
def cell_voltage_kernel(I, T, P, par,
                        cp_gas, hf_gas, s0_gas, gas_t_lo, gas_t_hi,
                        cp_liq, hf_liq, s0_liq, v_liq, liq_t_lo, liq_t_hi,
                        t_ref, p_ref):
    """Reversible plus ohmic plus activation voltage at (I, T, P), V."""
    dh, ds, dg = reaction_gibbs(T, P, cp_gas, hf_gas, s0_gas,
                                gas_t_lo, gas_t_hi, cp_liq, hf_liq, s0_liq,
                                v_liq, liq_t_lo, liq_t_hi, t_ref, p_ref)
    xi_rev = dg / (par[P_ZE] * par[P_FARADAY])
    t_c = T - 273.15
    eta_ohm = ohmic_overvoltage_kernel(I, t_c, par[P_R1], par[P_R2],
                                       par[P_AREA])
    eta_act = activation_overvoltage_kernel(I, t_c, par[P_S], par[P_T1],
                                            par[P_T2], par[P_T3],
                                            par[P_AREA], par[P_INV_LN_BASE])
    return xi_rev + eta_ohm + eta_act


# --------------------------------------------------------------------------
# full plant residual

@jitted
def plant_residual_kernel(x, xdot, y, u, d, par,
                          cp_gas, hf_gas, s0_gas, gas_t_lo, gas_t_hi,
                          cp_liq, hf_liq, s0_liq, v_liq, liq_t_lo, liq_t_hi,
                          t_ref, p_ref):
    """24-equation DAE residual; differential rows are dx/dt - f."""
    res = np.empty(N_EQ)

    T = x[0]
    n1w = x[1]
    n1o = x[2]
    U1 = x[3]
    n2w = x[4]
    n2h = x[5]
    U2 = x[6]
    nt = x[7]
    Ut = x[8]

    xi = y[0]
    I = y[1]
    Ts1 = y[2]
    Ps1 = y[3]
    Ts2 = y[4]
    Ps2 = y[5]
    Tc1 = y[6]
    Tc2 = y[7]
    Tc3 = y[8]
    Tt = y[9]
    Pt = y[10]
    Th1 = y[11]
    Th2 = y[12]
    fin = y[13]
    Tin = y[14]

    T_amb = d[0]
    P_in = d[1]
    T_mk = d[2]

    p_st = par[P_PSTACK]

    # stack production
    r = production_rate_kernel(I, par[P_AREA], par[P_NCELLS], par[P_F1],
                               par[P_F2], par[P_ZE], par[P_FARADAY])

    h_w_stack = h_liq_mol(T, p_st, cp_liq, hf_liq, v_liq, liq_t_lo, liq_t_hi,
                          t_ref, p_ref)
    h_h2_stack = h_gas_mol(T, I_H2, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)
    h_o2_stack = h_gas_mol(T, I_O2, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)

    # row 0: stack energy balance
    h_in = fin * h_liq_mol(Tin, p_st, cp_liq, hf_liq, v_liq,
                           liq_t_lo, liq_t_hi, t_ref, p_ref)
    h_out = ((fin - r) * h_w_stack + r * h_h2_stack + 0.5 * r * h_o2_stack)
    q_amb = par[P_ASHC] * (T - T_amb)
    res[0] = xdot[0] - (h_in - h_out - q_amb + P_in) / par[P_CPEL]

    f_an_w = 0.5 * fin + r        # anode water outflow
    f_cat_w = 0.5 * fin - 2.0 * r  # cathode water outflow

    # rows 1-3: separator 1 (oxygen side)
    res[1] = xdot[1] - (f_an_w - u[0])
    res[2] = xdot[2] - (0.5 * r - u[6])
    h_in1 = (f_an_w * h_liq_mol(T, Ps1, cp_liq, hf_liq, v_liq,
                                liq_t_lo, liq_t_hi, t_ref, p_ref)
             + 0.5 * r * h_o2_stack)
    h_out1 = (u[0] * h_liq_mol(Ts1, Ps1, cp_liq, hf_liq, v_liq,
                               liq_t_lo, liq_t_hi, t_ref, p_ref)
              + u[6] * h_gas_mol(Ts1, I_O2, cp_gas, hf_gas,
                                 gas_t_lo, gas_t_hi, t_ref))
    res[3] = xdot[3] - (h_in1 - h_out1)

    # rows 4-6: separator 2 (hydrogen side)
    res[4] = xdot[4] - (f_cat_w - u[1])
    res[5] = xdot[5] - (r - u[7])
    h_in2 = (f_cat_w * h_liq_mol(T, Ps2, cp_liq, hf_liq, v_liq,
                                 liq_t_lo, liq_t_hi, t_ref, p_ref)
             + r * h_h2_stack)
    h_out2 = (u[1] * h_liq_mol(Ts2, Ps2, cp_liq, hf_liq, v_liq,
                               liq_t_lo, liq_t_hi, t_ref, p_ref)
              + u[7] * h_gas_mol(Ts2, I_H2, cp_gas, hf_gas,
                                 gas_t_lo, gas_t_hi, t_ref))
    res[6] = xdot[6] - (h_in2 - h_out2)

    # rows 7-8: storage tank (inflow arrives cooled to tank temperature)
    res[7] = xdot[7] - (u[7] - u[3])
    h_h2_tank = h_gas_mol(Tt, I_H2, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)
    res[8] = xdot[8] - ((u[7] - u[3]) * h_h2_tank
                        - par[P_HATANK] * (Tt - T_amb))

    # row 9: cell voltage decomposition
    res[9] = xi - cell_voltage_kernel(I, T, p_st, par,
                                      cp_gas, hf_gas, s0_gas,
                                      gas_t_lo, gas_t_hi,
                                      cp_liq, hf_liq, s0_liq, v_liq,
                                      liq_t_lo, liq_t_hi, t_ref, p_ref)

    # row 10: electrical power draw
    res[10] = P_in - par[P_NCELLS] * xi * I

    # rows 11-12: separator 1 closures
    u_w1 = u_liq_mol(Ts1, Ps1, cp_liq, hf_liq, v_liq, liq_t_lo, liq_t_hi,
                     t_ref, p_ref)
    u_o1 = u_gas_mol(Ts1, I_O2, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)
    res[11] = n1w * u_w1 + n1o * u_o1 - U1
    if Ps1 > 0.0:
        res[12] = n1w * v_liq + n1o * R_GAS * Ts1 / Ps1 - par[P_VSEP1]
    else:
        res[12] = np.nan

    # rows 13-14: separator 2 closures
    u_w2 = u_liq_mol(Ts2, Ps2, cp_liq, hf_liq, v_liq, liq_t_lo, liq_t_hi,
                     t_ref, p_ref)
    u_h2 = u_gas_mol(Ts2, I_H2, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)
    res[13] = n2w * u_w2 + n2h * u_h2 - U2
    if Ps2 > 0.0:
        res[14] = n2w * v_liq + n2h * R_GAS * Ts2 / Ps2 - par[P_VSEP2]
    else:
        res[14] = np.nan

    # rows 15-17: compressor stages, equal pressure ratios, isentropic T
    if Pt > 0.0 and Ps2 > 0.0:
        ratio = (Pt / Ps2) ** (1.0 / 3.0)
    else:
        ratio = np.nan
    p1o = Ps2 * ratio
    p2o = p1o * ratio
    if par[P_COOLMODE] == 0.0:
        t2i = Ts2
        t3i = Ts2
    else:
        t2i = par[P_TCOOL2]
        t3i = par[P_TCOOL3]
    s_in1 = s_gas_mol(Ts2, Ps2, I_H2, cp_gas, s0_gas, gas_t_lo, gas_t_hi,
                      t_ref, p_ref)
    res[15] = s_gas_mol(Tc1, p1o, I_H2, cp_gas, s0_gas, gas_t_lo, gas_t_hi,
                        t_ref, p_ref) - s_in1
    res[16] = (s_gas_mol(Tc2, p2o, I_H2, cp_gas, s0_gas, gas_t_lo, gas_t_hi,
                         t_ref, p_ref)
               - s_gas_mol(t2i, p1o, I_H2, cp_gas, s0_gas,
                           gas_t_lo, gas_t_hi, t_ref, p_ref))
    res[17] = (s_gas_mol(Tc3, Pt, I_H2, cp_gas, s0_gas, gas_t_lo, gas_t_hi,
                         t_ref, p_ref)
               - s_gas_mol(t3i, p2o, I_H2, cp_gas, s0_gas,
                           gas_t_lo, gas_t_hi, t_ref, p_ref))

    # rows 18-19: tank closures
    res[18] = nt * u_gas_mol(Tt, I_H2, cp_gas, hf_gas, gas_t_lo, gas_t_hi,
                             t_ref) - Ut
    if Pt > 0.0:
        res[19] = nt * R_GAS * Tt / Pt - par[P_VTANK]
    else:
        res[19] = np.nan

    # rows 20-21: heat exchangers (temperature pin when the lye flow is off)
    if u[0] > 0.0:
        res[20] = u[0] * dh_liq_mol(Th1, Ts1, cp_liq, liq_t_lo, liq_t_hi) \
            - u[4]
    else:
        res[20] = Th1 - Ts1
    if u[1] > 0.0:
        res[21] = u[1] * dh_liq_mol(Th2, Ts2, cp_liq, liq_t_lo, liq_t_hi) \
            - u[5]
    else:
        res[21] = Th2 - Ts2

    # rows 22-23: recirculation mixer (sensible-enthalpy form; the
    # formation and pressure terms cancel exactly once row 22 closes)
    f_tot = u[2] + u[0] + u[1]
    res[22] = fin - f_tot
    if f_tot > 0.0:
        res[23] = (fin * dh_liq_mol(t_ref, Tin, cp_liq, liq_t_lo, liq_t_hi)
                   - u[0] * dh_liq_mol(t_ref, Th1, cp_liq, liq_t_lo, liq_t_hi)
                   - u[1] * dh_liq_mol(t_ref, Th2, cp_liq, liq_t_lo, liq_t_hi)
                   - u[2] * dh_liq_mol(t_ref, T_mk, cp_liq,
                                       liq_t_lo, liq_t_hi))
    else:
        res[23] = Tin - T_mk

    return res


@jitted
def step_residual_kernel(w, x_prev, h, u, d, par,
                         cp_gas, hf_gas, s0_gas, gas_t_lo, gas_t_hi,
                         cp_liq, hf_liq, s0_liq, v_liq, liq_t_lo, liq_t_hi,
                         t_ref, p_ref):
    """Implicit-Euler step residual over the stacked unknowns w = [x, y].

    Differential rows are scaled by h: (x - x_prev) - h*f.
    """
    xdot = np.empty(N_X)
    for i in range(N_X):
        xdot[i] = (w[i] - x_prev[i]) / h
    res = plant_residual_kernel(w[:N_X], xdot, w[N_X:], u, d, par,
                                cp_gas, hf_gas, s0_gas, gas_t_lo, gas_t_hi,
                                cp_liq, hf_liq, s0_liq, v_liq,
                                liq_t_lo, liq_t_hi, t_ref, p_ref)
    for i in range(N_X):
        res[i] *= h
    return res


@jitted
def step_jacobian_kernel(w, f0, x_prev, h, u, d, par, deltas,
                         cp_gas, hf_gas, s0_gas, gas_t_lo, gas_t_hi,
                         cp_liq, hf_liq, s0_liq, v_liq, liq_t_lo, liq_t_hi,
                         t_ref, p_ref):
    """Forward-difference Jacobian of the step residual, column by column."""
    jac = np.empty((N_EQ, N_EQ))
    wp = w.copy()
    for j in range(N_EQ):
        dj = deltas[j]
        wp[j] = w[j] + dj
        fj = step_residual_kernel(wp, x_prev, h, u, d, par,
                                  cp_gas, hf_gas, s0_gas, gas_t_lo, gas_t_hi,
                                  cp_liq, hf_liq, s0_liq, v_liq,
                                  liq_t_lo, liq_t_hi, t_ref, p_ref)
        for i in range(N_EQ):
            jac[i, j] = (fj[i] - f0[i]) / dj
        wp[j] = w[j]
    return jac


@jitted
def derived_outputs_kernel(x, y, u, d, par,
                           cp_gas, hf_gas, s0_gas, gas_t_lo, gas_t_hi,
                           cp_liq, hf_liq, s0_liq, v_liq, liq_t_lo, liq_t_hi,
                           t_ref, p_ref):
    """Output channels z: production rates, compressor and cooler loads.

    Layout: [f_H2, f_O2, eta_F, W_c1, W_c2, W_c3, W_c_total,
    W_hex1, W_hex2, W_hex3].
    """
    z = np.empty(N_Z)
    I = y[1]
    Ts2 = y[4]
    Ps2 = y[5]
    Tc1 = y[6]
    Tc2 = y[7]
    Tc3 = y[8]
    Tt = y[9]
    Pt = y[10]
    f = u[7]

    eta_f = faraday_efficiency_kernel(I, par[P_AREA], par[P_F1], par[P_F2])
    r = par[P_NCELLS] * eta_f * I / (par[P_ZE] * par[P_FARADAY])
    z[0] = r
    z[1] = 0.5 * r
    z[2] = eta_f

    if par[P_COOLMODE] == 0.0:
        t2i = Ts2
        t3i = Ts2
    else:
        t2i = par[P_TCOOL2]
        t3i = par[P_TCOOL3]

    h1i = h_gas_mol(Ts2, I_H2, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)
    h2i = h_gas_mol(t2i, I_H2, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)
    h3i = h_gas_mol(t3i, I_H2, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)
    h1o = h_gas_mol(Tc1, I_H2, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)
    h2o_ = h_gas_mol(Tc2, I_H2, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)
    h3o = h_gas_mol(Tc3, I_H2, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)
    h_tank = h_gas_mol(Tt, I_H2, cp_gas, hf_gas, gas_t_lo, gas_t_hi, t_ref)

    inv_eta = 1.0 / par[P_ETAC]
    z[3] = f * (h1o - h1i) * inv_eta
    z[4] = f * (h2o_ - h2i) * inv_eta
    z[5] = f * (h3o - h3i) * inv_eta
    z[6] = z[3] + z[4] + z[5]
    z[7] = f * (h2i - h1o)
    z[8] = f * (h3i - h2o_)
    z[9] = f * (h_tank - h3o)
    return z
