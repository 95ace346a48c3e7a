"""Exception types raised by the simulator."""


class AlkasimError(Exception):
    """Base class for all package errors."""


class ThermoRangeError(AlkasimError):
    """Temperature outside the validity range of a property correlation."""

    def __init__(self, species: str, T: float, lo: float, hi: float):
        self.species = species
        self.T = T
        self.lo = lo
        self.hi = hi
        super().__init__(
            f"T = {T:.2f} K outside correlation range "
            f"[{lo:.2f}, {hi:.2f}] K for {species}"
        )


class PhaseError(AlkasimError):
    """Property requested for a phase the species does not support."""


class WaterStarvationError(AlkasimError):
    """Cathode water feed cannot sustain the reaction rate."""

    def __init__(self, feed: float, required: float):
        self.feed = feed
        self.required = required
        super().__init__(
            f"cathode water feed {feed:.6g} mol/s below stoichiometric "
            f"requirement {required:.6g} mol/s (deficit "
            f"{required - feed:.6g} mol/s)"
        )


class ConvergenceError(AlkasimError):
    """A Newton or root-finding iteration failed to converge."""

    def __init__(self, message: str, residual_norm: float | None = None,
                 iterations: int | None = None):
        self.residual_norm = residual_norm
        self.iterations = iterations
        super().__init__(message)


class InitializationError(AlkasimError):
    """Consistent initialization of the algebraic variables failed."""


class DomainEvaluationError(AlkasimError):
    """A model equation left its mathematical domain during evaluation."""

    def __init__(self, equation_index: int, equation_name: str,
                 detail: str = ""):
        self.equation_index = equation_index
        self.equation_name = equation_name
        msg = (f"equation {equation_index} ({equation_name}) evaluated "
               f"outside its domain")
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class GuardError(AlkasimError):
    """A physical guard (freeze/boil on liquid water) tripped."""

    def __init__(self, variable: str, value: float, t: float | None = None):
        self.variable = variable
        self.value = value
        self.t = t
        when = f" at t = {t:.3f} s" if t is not None else ""
        super().__init__(
            f"liquid-water temperature guard tripped{when}: "
            f"{variable} = {value:.2f} K outside (274, 372) K"
        )


class ScenarioError(AlkasimError):
    """Scenario file is malformed or fails validation."""


class IntegrationError(AlkasimError):
    """Time integration aborted before reaching the horizon.

    When raised by simulate, the samples collected so far are attached
    as a Trajectory in ``partial``.
    """

    def __init__(self, message: str, t: float, cause: Exception | None = None):
        self.t = t
        self.cause = cause
        self.partial = None
        super().__init__(f"integration aborted at t = {t:.3f} s: {message}")
