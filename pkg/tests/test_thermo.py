"""Property model tests.

Enthalpy and entropy are checked against quadrature of the raw cp
polynomials parsed straight from the packaged correlation file, so a
transcription slip in the closed-form integrals cannot hide.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from alkasim import correlations, thermo
from alkasim.constants import R_GAS
from alkasim.errors import PhaseError, ThermoRangeError
from alkasim.thermo import Phase, Species, ThermoState

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

SPECIES = ("H2O", "H2", "O2")


@pytest.fixture(scope="module")
def raw():
    import importlib.resources
    ref = importlib.resources.files("alkasim.data") / "correlations.toml"
    return tomllib.loads(ref.read_text())


# temperature windows safe for every species in either phase
gas_T = st.floats(min_value=280.0, max_value=520.0)
liq_T = st.floats(min_value=280.0, max_value=520.0)
pressures = st.floats(min_value=1.0e4, max_value=1.0e7)
moles = st.lists(st.floats(min_value=0.0, max_value=500.0),
                 min_size=3, max_size=3)


def gas_state(T, P, n):
    return ThermoState(T, P, np.asarray(n, float), Phase.GAS)


# --------------------------------------------------------------------------
# quadrature oracles on the raw coefficients

def test_gas_enthalpy_matches_quadrature(raw, table):
    T, P = 431.7, 2.4e5
    t_ref = raw["reference_temperature"]
    n = np.array([3.0, 7.0, 11.0])
    want = 0.0
    for i, name in enumerate(SPECIES):
        c = raw["species"][name]["cp_coefficients"]
        integ, _ = quad(lambda t: sum(ck * t**k for k, ck in enumerate(c)),
                        t_ref, T)
        want += n[i] * (raw["species"][name]["h_formation"] + integ)
    got = thermo.enthalpy(gas_state(T, P, n), table)
    assert got == pytest.approx(want, rel=1e-12)


def test_liquid_enthalpy_matches_quadrature(raw, table):
    T, P = 354.0, 3.0e5
    t_ref = raw["reference_temperature"]
    p_ref = raw["reference_pressure"]
    w = raw["species"]["H2O"]
    c = w["liquid_cp_coefficients"]
    integ, _ = quad(lambda t: sum(ck * t**k for k, ck in enumerate(c)),
                    t_ref, T)
    v = w["molar_mass"] / w["liquid_density"]  # m^3/mol
    want = 2.5 * (w["liquid_h_formation"] + integ + v * (P - p_ref))
    st_liq = ThermoState(T, P, np.array([2.5, 0.0, 0.0]), Phase.LIQUID)
    assert thermo.enthalpy(st_liq, table) == pytest.approx(want, rel=1e-12)


def test_gas_entropy_matches_quadrature(raw, table):
    T, P = 390.0, 5.0e5
    t_ref = raw["reference_temperature"]
    p_ref = raw["reference_pressure"]
    n = np.array([1.0, 2.0, 0.5])
    want = 0.0
    for i, name in enumerate(SPECIES):
        c = raw["species"][name]["cp_coefficients"]
        integ, _ = quad(
            lambda t: sum(ck * t**k for k, ck in enumerate(c)) / t,
            t_ref, T)
        want += n[i] * (raw["species"][name]["s_standard"] + integ
                        - R_GAS * math.log(P / p_ref))
    got = thermo.entropy(gas_state(T, P, n), table)
    assert got == pytest.approx(want, rel=1e-12)


# --------------------------------------------------------------------------
# identities on randomized valid states

@settings(max_examples=200, deadline=None)
@given(T=gas_T, P=pressures, n=moles)
def test_internal_energy_identity(T, P, n):
    state = gas_state(T, P, n)
    h = thermo.enthalpy(state)
    pv = P * thermo.volume(state)
    u = thermo.internal_energy(state)
    # U = H - PV to machine precision
    assert u == pytest.approx(h - pv, abs=1e-7 * max(1.0, abs(h)))


@settings(max_examples=200, deadline=None)
@given(T=gas_T, P=pressures, n=moles)
def test_gibbs_identity(T, P, n):
    state = gas_state(T, P, n)
    g = thermo.gibbs_energy(state)
    want = thermo.enthalpy(state) - T * thermo.entropy(state)
    assert g == pytest.approx(want, abs=1e-7 * max(1.0, abs(want)))


@settings(max_examples=100, deadline=None)
@given(T=liq_T, P=pressures, n_w=st.floats(min_value=0.1, max_value=1e4))
def test_liquid_identities(T, P, n_w):
    state = ThermoState(T, P, np.array([n_w, 0.0, 0.0]), Phase.LIQUID)
    h = thermo.enthalpy(state)
    u = thermo.internal_energy(state)
    g = thermo.gibbs_energy(state)
    assert u == pytest.approx(h - P * thermo.volume(state),
                              abs=1e-7 * abs(h))
    assert g == pytest.approx(h - T * thermo.entropy(state),
                              abs=1e-7 * abs(h))


@settings(max_examples=100, deadline=None)
@given(T=gas_T, P=pressures, n=moles, alpha=st.floats(min_value=1e-3,
                                                      max_value=1e3))
def test_extensive_homogeneity(T, P, n, alpha):
    # doubling the moles doubles H, S, U, V
    base = gas_state(T, P, n)
    scaled = gas_state(T, P, alpha * np.asarray(n))
    for fn in (thermo.enthalpy, thermo.entropy, thermo.internal_energy,
               thermo.volume):
        a, b = fn(base), fn(scaled)
        # rounding noise scales with the largest term, hence the abs floor
        assert b == pytest.approx(alpha * a, rel=1e-12,
                                  abs=1e-7 * (1.0 + alpha))


def test_heat_capacity_is_enthalpy_slope(table):
    # central difference dH/dT against the analytic cp sum, 1e-6 relative
    n = np.array([4.0, 9.0, 2.0])
    P = 2.0e5
    for T in (300.0, 360.0, 450.0):
        dT = 1e-3
        slope = (thermo.enthalpy(gas_state(T + dT, P, n), table)
                 - thermo.enthalpy(gas_state(T - dT, P, n), table)) / (2 * dT)
        cp = thermo.heat_capacity(gas_state(T, P, n), table)
        assert slope == pytest.approx(cp, rel=1e-6)
    st_liq = ThermoState(330.0, P, np.array([12.0, 0.0, 0.0]), Phase.LIQUID)
    dT = 1e-3
    slope = (thermo.enthalpy(
                 ThermoState(330.0 + dT, P, st_liq.n, Phase.LIQUID), table)
             - thermo.enthalpy(
                 ThermoState(330.0 - dT, P, st_liq.n, Phase.LIQUID), table)
             ) / (2 * dT)
    assert slope == pytest.approx(thermo.heat_capacity(st_liq, table),
                                  rel=1e-6)


def test_entropy_pressure_law(table):
    # ideal gas: S(T, P1) - S(T, P2) = -n_tot R ln(P1/P2), 1e-10 relative
    n = np.array([1.5, 3.0, 0.75])
    T = 410.0
    for p1, p2 in ((1.0e5, 5.0e5), (2.0e4, 8.0e6), (101325.0, 101325.0)):
        ds = (thermo.entropy(gas_state(T, p1, n), table)
              - thermo.entropy(gas_state(T, p2, n), table))
        want = -float(np.sum(n)) * R_GAS * math.log(p1 / p2)
        assert ds == pytest.approx(want, rel=1e-10, abs=1e-10)


def test_evaluation_is_deterministic(table):
    state = gas_state(388.4, 3.3e5, [2.0, 5.0, 1.0])
    assert thermo.enthalpy(state, table) == thermo.enthalpy(state, table)
    assert thermo.entropy(state, table) == thermo.entropy(state, table)


# --------------------------------------------------------------------------
# domain errors

def test_range_errors(table):
    with pytest.raises(ThermoRangeError):
        thermo.enthalpy(gas_state(2000.0, 1e5, [1.0, 0.0, 0.0]), table)
    with pytest.raises(ThermoRangeError):
        thermo.enthalpy(ThermoState(600.0, 1e5, np.array([1.0, 0.0, 0.0]),
                                    Phase.LIQUID), table)
    # zero moles of the offending species is fine at any T in range
    thermo.enthalpy(gas_state(260.0, 1e5, [0.0, 1.0, 1.0]), table)


def test_liquid_rejects_dissolved_gas():
    with pytest.raises(PhaseError):
        ThermoState(300.0, 1e5, np.array([1.0, 0.1, 0.0]), Phase.LIQUID)


def test_negative_moles_rejected():
    with pytest.raises(ValueError):
        ThermoState(300.0, 1e5, np.array([-1.0, 0.0, 0.0]), Phase.GAS)


# --------------------------------------------------------------------------
# water splitting reaction anchors

def test_reaction_thermo_anchors(table):
    from alkasim.electrochem import reaction_thermo, reversible_voltage
    rx = reaction_thermo(298.15, 1.0e5, table=table)
    # liquid water -> H2 + 1/2 O2 at 25 degC
    assert rx.dh == pytest.approx(285830.0, rel=1e-12)
    assert rx.ds == pytest.approx(163.306, rel=1e-5)
    assert rx.dg == pytest.approx(237140.0, rel=1e-5)
    assert reversible_voltage(298.15, 1.0e5, table=table) == pytest.approx(
        1.2288931182595322, rel=1e-13)


# --------------------------------------------------------------------------
# correlation file validation

def test_load_table_roundtrip(tmp_path, raw, table):
    import importlib.resources
    ref = importlib.resources.files("alkasim.data") / "correlations.toml"
    p = tmp_path / "c.toml"
    p.write_text(ref.read_text())
    tab = correlations.load_table(p)
    assert np.array_equal(tab.cp_gas, table.cp_gas)
    assert tab.v_liq == table.v_liq


def test_load_table_rejects_bad_file(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text('schema = "alkasim-correlations"\nversion = 1\n')
    with pytest.raises(ValueError):
        correlations.load_table(p)
