"""Exception hierarchy shared by every osclogic module."""


class OscLogicError(Exception):
    """Base class for all library errors."""


class DomainError(OscLogicError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(OscLogicError, ValueError):
    """A network, gate or netlist description is inconsistent."""


class NetlistParseError(ConfigurationError):
    """Syntax or semantic error in a netlist document."""

    def __init__(self, message, line=None, section=None):
        self.line = line
        self.section = section
        where = []
        if line is not None:
            where.append(f"line {line}")
        if section is not None:
            where.append(f"section [{section}]")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class SimulationError(OscLogicError, RuntimeError):
    """Raised when a simulation cannot produce a usable result."""


class IntegrationError(SimulationError):
    """A Runge-Kutta stage produced non-finite values."""

    def __init__(self, message, tau):
        self.tau = tau
        super().__init__(f"{message} (tau={tau:.6g})")


class NotOscillatingError(SimulationError):
    """Amplitude collapsed, so no phase can be extracted."""


class FrameError(DomainError):
    """State is outside the tubular neighbourhood where the phase map is invertible."""


class AmbiguousPhaseError(OscLogicError, ValueError):
    """A phase is too close to pi/2 to be read as a logic level."""
