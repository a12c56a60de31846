"""Exception types raised by the simulation pipeline."""


class NVSqueezeError(Exception):
    """Base class for all library errors."""


class NoResonance(NVSqueezeError):
    """No detuning puts the b-c transition on the mechanical frequency."""


class SingularGenerator(NVSqueezeError):
    """A generator has a null space of dimension other than one."""


class DegenerateM(NVSqueezeError):
    """The elimination determinant M = k1*k2 - k3**2 vanishes."""


class ApproxInvalid(NVSqueezeError):
    """Parameters fall outside the validity window of the first-order formulas."""


class Unstable(NVSqueezeError):
    """The moment equations have a non-decaying mode."""


class NonPhysical(NVSqueezeError):
    """A computed variance is negative beyond tolerance."""


class InvalidRates(NVSqueezeError):
    """Spin decay rates imply a negative dephasing rate."""


class DimensionMismatch(NVSqueezeError):
    """An operator does not match the Hilbert space it is realized on."""


class DegenerateKernel(NVSqueezeError):
    """A Liouvillian steady state is not unique."""


class NoConvergence(NVSqueezeError):
    """An iterative solve did not reach its tolerance."""


class StepFailure(NVSqueezeError):
    """Time integration failed."""


class TruncationCapExceeded(NVSqueezeError):
    """The Fock cutoff could not be raised far enough within the size cap."""


class UnknownFigure(NVSqueezeError):
    """No preset exists under the requested name."""


class ConfigError(NVSqueezeError):
    """A configuration document is malformed."""
