"""Dynamic simulation of an alkaline electrolyzer plant.

The plant (electrolyzer stack, gas/liquid separators, multistage hydrogen
compressor, storage tank, lye coolers, and recirculation mixer) is modeled
as a semi-explicit index-1 DAE and integrated with implicit Euler.  See
the README for the scenario file format and CLI usage.
"""

from ._accel import JIT_ENABLED
from .correlations import CorrelationTable, default_table, load_table
from .dae import (PlantParams, PlantState, SolverSettings, Trajectory,
                  algebraic_condition, consistent_init, find_steady_state,
                  residual, simulate, step)
from .electrochem import (StackParams, cell_voltage, faraday_efficiency,
                          production_rate, reaction_thermo,
                          reversible_voltage, solve_operating_point)
from .errors import (AlkasimError, ConvergenceError, DomainEvaluationError,
                     GuardError, InitializationError, IntegrationError,
                     PhaseError, ScenarioError, ThermoRangeError,
                     WaterStarvationError)
from .scenario import (InitialConditions, ScenarioConfig, Schedule,
                       initial_state, load_scenario, write_scenario)
from .thermo import Phase, Species, ThermoState
from .units import CompressorTrain, SeparatorState, compressor_train

__version__ = "0.1.0"

__all__ = [
    "JIT_ENABLED", "CorrelationTable", "default_table", "load_table",
    "PlantParams", "PlantState", "SolverSettings", "Trajectory",
    "algebraic_condition", "consistent_init", "find_steady_state",
    "residual", "simulate", "step",
    "StackParams", "cell_voltage", "faraday_efficiency", "production_rate",
    "reaction_thermo", "reversible_voltage", "solve_operating_point",
    "AlkasimError", "ConvergenceError", "DomainEvaluationError",
    "GuardError", "InitializationError", "IntegrationError", "PhaseError",
    "ScenarioError", "ThermoRangeError", "WaterStarvationError",
    "InitialConditions", "ScenarioConfig", "Schedule", "initial_state",
    "load_scenario", "write_scenario",
    "Phase", "Species", "ThermoState",
    "CompressorTrain", "SeparatorState", "compressor_train",
    "__version__",
]
