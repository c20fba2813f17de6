"""Exception types shared across the solver modules."""


class MemdiffError(Exception):
    """Base class for all library errors."""


class TimeOrderError(MemdiffError):
    """Raised when an operation requires s < t but received s >= t."""


class NonparabolicCoefficientError(MemdiffError):
    """A diffusion coefficient sample was <= 0 somewhere on the audit grid."""


class DegenerateWentzellError(MemdiffError):
    """q1(s) + q2(s) vanished at some sample time."""


class AtomOnMembraneError(MemdiffError):
    """A jump-measure atom sits on the membrane at some sample time."""


class ConvergenceFailureError(MemdiffError):
    """The correction-kernel series terms stopped decreasing before the depth cap."""


class SeriesDivergenceError(MemdiffError):
    """Successive approximations for the layer densities did not contract."""


class MeshTooCoarseError(MemdiffError):
    """The density mesh cannot resolve the requested solve."""


class MeshMismatchError(MemdiffError):
    """An evaluation point falls outside the span of a density mesh."""


class SingularIntegrandError(MemdiffError):
    """The Holmgren integrand does not decay at the left endpoint."""


class MeasureNotNullError(MemdiffError):
    """An operation defined only for empty jump measures got a nonempty one."""


class StepTooLargeError(MemdiffError):
    """Monte Carlo membrane-crossing resolution is unreliable at this step size."""


class ConfigError(MemdiffError):
    """A problem or run configuration file is malformed."""
