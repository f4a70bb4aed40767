"""Phase-encoded Boolean logic with coupled nonlinear oscillators."""

from .errors import (AmbiguousPhaseError, ConfigurationError, DomainError, FrameError,
                     IntegrationError, NetlistParseError, NotOscillatingError, OscLogicError,
                     SimulationError)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousPhaseError", "ConfigurationError", "DomainError", "FrameError",
    "IntegrationError", "NetlistParseError", "NotOscillatingError", "OscLogicError",
    "SimulationError", "__version__",
]
