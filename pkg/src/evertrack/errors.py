"""Exception hierarchy shared across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator failures."""


class MembraneError(SimulationError):
    """Base class for chamber equilibrium failures."""


class ConvergenceError(MembraneError):
    """Energy minimization did not reach the gradient tolerance.

    Carries the last iterate diagnostics so callers can inspect how far
    the solve got.
    """

    def __init__(self, message, pressure_kPa=None, grad_norm=None, iterations=None):
        super().__init__(message)
        self.pressure_kPa = pressure_kPa
        self.grad_norm = grad_norm
        self.iterations = iterations


class OverInflationError(MembraneError):
    """Pressure drove a principal stretch past the configured safety cap."""

    def __init__(self, message, pressure_kPa=None, max_stretch=None, stretch_cap=None):
        super().__init__(message)
        self.pressure_kPa = pressure_kPa
        self.max_stretch = max_stretch
        self.stretch_cap = stretch_cap


class StiffnessError(MembraneError):
    """Probe displacement fell below the numerical floor; stiffness unresolvable."""


class ScenarioError(SimulationError):
    """Scenario document failed validation.  `field` names the offending key path."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class StepError(SimulationError):
    """A navigation step failed; wraps the underlying cause with the step index."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index
