"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid user input: parameters, states, matrices, or config files."""


class SynthesisError(ValidationError):
    """A pulse sequence could not be synthesized (e.g. negative step time)."""


class TraceWindowError(RuntimeError):
    """A sequence timeline exceeds the span of one 1/f noise trace.

    Traces cover 1/f_min; longer timelines need a fresh trace per sequence.
    """


class FitError(ValidationError):
    """Decay-curve fit rejected its input (too few points, bad values)."""
