"""Exception types shared across the package.

All public operations raise subclasses of ``TorsolockError`` so callers
can catch one base type. Names describe the violated contract.
"""


class TorsolockError(Exception):
    """Base class for all errors raised by this package."""


# --- trajectory ingestion and generation ---

class MissingColumn(TorsolockError):
    """A required CSV column could not be resolved."""


class NonMonotonicTime(TorsolockError):
    """Timestamps are not strictly increasing."""


class NonUniformSampling(TorsolockError):
    """Sample spacing deviates from 1/sample_rate beyond tolerance."""


class TooFewSamples(TorsolockError):
    """A series has fewer samples than the operation requires."""


class NonFiniteInput(TorsolockError):
    """An input contains NaN or infinity."""


class InvalidProfile(TorsolockError):
    """A motion profile violates its invariants."""


# --- signal processing ---

class SeriesTooShort(TorsolockError):
    """The series is shorter than the filter or derivative stencil."""


class InvalidSpec(TorsolockError):
    """A parameter record violates its invariants."""


# --- device mechanics ---

class NonPositiveRadius(TorsolockError):
    """Capstan radius must be strictly positive."""


class ExtensionOutOfRange(TorsolockError):
    """Blocking-spring extension outside [0, x_block_max]."""


class InvalidDt(TorsolockError):
    """Integration step must be finite and strictly positive."""


class StateInvariantViolation(TorsolockError):
    """A device state breaks a state invariant."""


# --- inverse design ---

class InfeasibleTarget(TorsolockError):
    """The tuning target admits no valid parameter value."""
