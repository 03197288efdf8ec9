class CorrelatorError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(CorrelatorError, ValueError):
    """Operands act on different numbers of qubits."""


class ConfigurationError(CorrelatorError, ValueError):
    """Invalid evolution or experiment configuration."""


class ResourceError(CorrelatorError):
    """A dense computation would exceed the configured qubit cap."""


class StateError(CorrelatorError, ValueError):
    """The input state violates a precondition of the operation."""


class ProjectionError(StateError):
    """A projective measurement outcome has zero probability."""
