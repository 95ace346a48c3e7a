"""Loading and packing of the property correlation set.

The correlation data ship in ``data/correlations.toml`` so an alternative
set can be swapped in without touching code.  :func:`load_table` parses and
validates a file; :func:`default_table` caches the shipped one.

The numerical kernels take the data as a flat tuple of arrays/floats
(:meth:`CorrelationTable.pack`) to stay compatible with numba.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SPECIES_NAMES = ("H2O", "H2", "O2")
IDX_H2O, IDX_H2, IDX_O2 = 0, 1, 2

_GAS_KEYS = {"molar_mass", "h_formation", "s_standard",
             "cp_coefficients", "cp_valid_range"}
_LIQ_KEYS = {"liquid_h_formation", "liquid_s_standard",
             "liquid_cp_coefficients", "liquid_cp_valid_range",
             "liquid_density"}


@dataclass(frozen=True)
class CorrelationTable:
    """Validated correlation set for the three plant species.

    Gas arrays are indexed by species position in ``SPECIES_NAMES``.
    Liquid data exist for water only.
    """

    molar_mass: np.ndarray          # (3,) kg/mol
    cp_gas: np.ndarray              # (3, 4) cubic cp coefficients
    hf_gas: np.ndarray              # (3,) J/mol
    s0_gas: np.ndarray              # (3,) J/mol/K
    gas_t_lo: np.ndarray            # (3,) K
    gas_t_hi: np.ndarray            # (3,) K
    cp_liq: np.ndarray              # (5,) quartic cp coefficients, water
    hf_liq: float                   # J/mol
    s0_liq: float                   # J/mol/K
    v_liq: float                    # m^3/mol
    liq_t_lo: float                 # K
    liq_t_hi: float                 # K
    t_ref: float                    # K
    p_ref: float                    # Pa
    source: str = "builtin"
    _packed: tuple = field(default=None, repr=False, compare=False)

    def pack(self) -> tuple:
        """Flat tuple of the numeric fields, as the kernels expect."""
        if self._packed is None:
            packed = (self.cp_gas, self.hf_gas, self.s0_gas,
                      self.gas_t_lo, self.gas_t_hi,
                      self.cp_liq, self.hf_liq, self.s0_liq, self.v_liq,
                      self.liq_t_lo, self.liq_t_hi, self.t_ref, self.p_ref)
            object.__setattr__(self, "_packed", packed)
        return self._packed


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(f"correlation file invalid: {msg}")


def load_table(path: str | Path) -> CorrelationTable:
    """Parse and validate a correlation file."""
    path = Path(path)
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)

    _require(doc.get("schema") == "alkasim-correlations",
             f"unexpected schema tag {doc.get('schema')!r}")
    species = doc.get("species", {})
    for name in SPECIES_NAMES:
        _require(name in species, f"species block [{name}] missing")

    mm = np.empty(3)
    cp_gas = np.empty((3, 4))
    hf_gas = np.empty(3)
    s0_gas = np.empty(3)
    t_lo = np.empty(3)
    t_hi = np.empty(3)
    for i, name in enumerate(SPECIES_NAMES):
        blk = species[name]
        allowed = _GAS_KEYS | (_LIQ_KEYS if name == "H2O" else set())
        unknown = set(blk) - allowed
        _require(not unknown, f"unknown keys in [{name}]: {sorted(unknown)}")
        missing = _GAS_KEYS - set(blk)
        _require(not missing, f"missing keys in [{name}]: {sorted(missing)}")
        coeffs = blk["cp_coefficients"]
        _require(len(coeffs) == 4, f"[{name}] cp_coefficients must have 4 terms")
        lo, hi = blk["cp_valid_range"]
        _require(0.0 < lo < hi, f"[{name}] cp_valid_range must be increasing")
        mm[i] = blk["molar_mass"]
        _require(mm[i] > 0.0, f"[{name}] molar_mass must be positive")
        cp_gas[i] = coeffs
        hf_gas[i] = blk["h_formation"]
        s0_gas[i] = blk["s_standard"]
        t_lo[i], t_hi[i] = lo, hi

    water = species["H2O"]
    missing = _LIQ_KEYS - set(water)
    _require(not missing, f"missing liquid keys in [H2O]: {sorted(missing)}")
    cp_liq = np.asarray(water["liquid_cp_coefficients"], dtype=float)
    _require(cp_liq.shape == (5,), "[H2O] liquid_cp_coefficients must have 5 terms")
    llo, lhi = water["liquid_cp_valid_range"]
    _require(0.0 < llo < lhi, "[H2O] liquid_cp_valid_range must be increasing")
    rho = water["liquid_density"]
    _require(rho > 0.0, "[H2O] liquid_density must be positive")

    return CorrelationTable(
        molar_mass=mm,
        cp_gas=cp_gas, hf_gas=hf_gas, s0_gas=s0_gas,
        gas_t_lo=t_lo, gas_t_hi=t_hi,
        cp_liq=cp_liq,
        hf_liq=float(water["liquid_h_formation"]),
        s0_liq=float(water["liquid_s_standard"]),
        v_liq=float(mm[IDX_H2O] / rho),
        liq_t_lo=float(llo), liq_t_hi=float(lhi),
        t_ref=float(doc.get("reference_temperature", 298.15)),
        p_ref=float(doc.get("reference_pressure", 1.0e5)),
        source=str(path),
    )


_DEFAULT: CorrelationTable | None = None


def default_table() -> CorrelationTable:
    """The correlation set shipped with the package (cached)."""
    global _DEFAULT
    if _DEFAULT is None:
        res = importlib.resources.files("alkasim.data") / "correlations.toml"
        with importlib.resources.as_file(res) as path:
            _DEFAULT = load_table(path)
    return _DEFAULT
