"""Exception hierarchy shared by all gggv modules."""


class GggvError(Exception):
    """Base class for all errors raised by this package."""


class NotOnGridError(GggvError):
    """A (v, a_z, a_x) value is not a node of the sweep grid."""


class OutOfBoundsError(GggvError):
    """A query point lies outside the grid's bounding box."""


class UnfeasibleNeighborhoodError(GggvError):
    """Interpolation would touch a grid cell marked unfeasible."""


class InvalidSpeedError(GggvError):
    """Requested initialization speed is outside the model's validity range."""


class NumericalDivergenceError(GggvError):
    """A model state became non-finite during forward integration."""


class InvalidTableError(GggvError):
    """A look-up table violates the strictly-increasing-abscissa contract."""


class UnfeasibleError(GggvError):
    """A run could not reach the required quasi-steady operating point.

    Raised when the speed controller cannot settle at the target speed
    within the timeout, or when the gain test yields no usable gain.
    run_point maps this to the ``Unfeasible`` cell status.
    """


class NonPositiveGainError(UnfeasibleError):
    """The steering step produced a non-positive lateral acceleration gain."""


class NoLimitFoundError(GggvError):
    """A ramp ended without a confirmed peak or an instability trigger."""


class ConfigError(GggvError):
    """Base class for run-configuration problems."""


class ParseError(ConfigError):
    """The configuration file is not readable as the documented format."""


class ValidationError(ConfigError):
    """The configuration violates a schema constraint (message names the key)."""
