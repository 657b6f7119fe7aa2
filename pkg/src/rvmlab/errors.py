"""Exception types shared across the package."""


class ConfigurationError(RuntimeError):
    """A run configuration is internally inconsistent (grid too small,
    marker count below the sampling minimum, seeded field violating its
    amplitude budget, ...)."""


class AxisCrossingError(RuntimeError):
    """A marker reached r <= 0 even after the substep count was doubled
    eight times.  The integrator treats this as fatal: the reduced system
    is singular at the axis, and under the focusing setup a marker can
    only get there after the run has overshot the focusing time."""


class DepositError(RuntimeError):
    """Moment deposition found a marker outside the grid or produced a
    negative density.  Both indicate an upstream bug (causality margin or
    sampling), never a recoverable condition."""


class SamplingError(RuntimeError):
    """The sampled ensemble violates a structural property of the initial
    data (support outside the annulus), i.e. the sampler itself is broken."""
