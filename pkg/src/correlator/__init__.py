"""Ancilla-free n-time correlation functions."""
from .correlators import (
    BracketSpec,
    Measurement,
    bracket,
    n_time_correlation,
    nested_bracket,
    otoc,
    otoc_series,
    two_time_bracket_series,
)
from .exceptions import (
    ConfigurationError,
    CorrelatorError,
    DimensionError,
    ProjectionError,
    ResourceError,
    StateError,
)
from .pauli import PauliString, PauliSum
from .statevector import EvolutionBackend, StateVector

__version__ = "0.1.0"

__all__ = [
    "BracketSpec", "Measurement", "bracket", "n_time_correlation", "nested_bracket", "otoc",
    "otoc_series", "two_time_bracket_series", "ConfigurationError", "CorrelatorError",
    "DimensionError", "ProjectionError", "ResourceError", "StateError", "PauliString", "PauliSum",
    "EvolutionBackend", "StateVector", "__version__",
]
