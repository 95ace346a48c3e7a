"""Physical constants and reference conditions (SI)."""

R_GAS = 8.314462618        # J/mol/K
FARADAY = 96485.33         # C/mol
T_REF = 298.15             # K, thermodynamic reference temperature
P_REF = 1.0e5              # Pa, thermodynamic reference pressure (1 bar)
P_ATM = 101325.0           # Pa

M_H2O = 0.01801528         # kg/mol
M_H2 = 2.01588e-3          # kg/mol
M_O2 = 0.0319988           # kg/mol

# Electrons transferred per mole of H2 in the water-splitting reaction.
Z_ELECTRONS = 2

# Liquid-water temperature guards: integration aborts outside (K).
T_FREEZE_GUARD = 274.0
T_BOIL_GUARD = 372.0

# Default base of the logarithm in the activation overvoltage term.
ACT_LOG_BASE_10 = 10.0
