"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1,
numerical failures exit 2, and measurement failures (no emergence /
no transmission) exit 3.
"""


class ConfigError(ValueError):
    """A configuration value violates a precondition; message names the field."""


class IntegrationError(RuntimeError):
    """The integrator produced non-finite amplitudes."""


class BoundaryContaminationError(IntegrationError):
    """Probability density reached the edge of the periodic domain.

    Raised only when no absorber is enabled; the run is unusable because
    periodic wraparound would contaminate observables.
    """


class NotEmergedError(RuntimeError):
    """The transmitted packet never satisfied the emergence criterion.

    Usually means t_max is too small; the caller should extend the run.
    """


class NoTransmissionError(NotEmergedError):
    """Transmitted fraction stayed below the detection floor for the whole run."""


class NoTransmittedPacketError(RuntimeError):
    """A region-restricted observable was requested where there is no mass.

    Signals total reflection or a measurement taken before the packet
    reached the region.
    """


class ConvergenceError(RuntimeError):
    """An iterative solver (fixed-point loop) failed to reach tolerance."""
