"""Exception types raised by the library.

Every failure mode that callers may want to handle separately gets its own
class; all inherit from :class:`KerrSqueezeError` so `except KerrSqueezeError`
catches any library-level failure.
"""


class KerrSqueezeError(Exception):
    """Base class for all library errors."""


class DomainError(KerrSqueezeError, ValueError):
    """An input is outside the mathematical domain (non-finite, wrong sign, ...)."""


class PrecisionEnvelopeError(KerrSqueezeError, ValueError):
    """A requested evaluation lies outside the documented precision envelope."""


class ConstraintInfeasibleError(KerrSqueezeError, ValueError):
    """The photon-number constraint has no real solution for the given inputs."""


class DegeneratePostSelectionError(KerrSqueezeError, ArithmeticError):
    """Post-selection succeeds with numerically zero probability; the state is undefined."""


class TruncationError(KerrSqueezeError, ValueError):
    """A number-basis construction would not fit in the requested cutoff."""


class PathDisagreementError(KerrSqueezeError, RuntimeError):
    """Two independent constructions of the same state disagree beyond tolerance."""


class CutoffMismatchError(KerrSqueezeError, ValueError):
    """Two number-basis vectors with different cutoffs were combined."""


class TargetRangeError(KerrSqueezeError, ValueError):
    """A requested fidelity target is outside the achievable range."""


class MonotonicityError(KerrSqueezeError, RuntimeError):
    """Bracketing detected a non-monotone fidelity-vs-transmissivity relation."""


class NotConvergedError(KerrSqueezeError, RuntimeError):
    """An operation refused to proceed from an unconverged estimate."""


class ConfigError(KerrSqueezeError, ValueError):
    """An experiment configuration is malformed (unknown keys, missing fields)."""
