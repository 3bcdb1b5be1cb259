"""Exception types shared across the package."""


class TrapModesError(Exception):
    """Base class for all package errors."""


class SpecError(TrapModesError, ValueError):
    """Invalid waveguide geometry or configuration."""


class InadmissibleClass(TrapModesError, ValueError):
    """The requested symmetry class has no usable test function in this setting."""


class OutOfDomain(TrapModesError, ValueError):
    """A point lies outside the open free region of the guide."""


class UnsupportedSetting(TrapModesError, NotImplementedError):
    """The closed-form quotient only covers centered obstacles with Neumann walls."""


class CertificationFailed(TrapModesError):
    """No parameter triple pushed the quotient below the class threshold.

    ``certificates`` holds every certificate produced (valid or not) so the
    caller can report the best negative margin instead of hiding it.
    """

    def __init__(self, message, certificates):
        super().__init__(message)
        self.certificates = list(certificates)

    @property
    def failed(self):
        return [c for c in self.certificates if not c.valid]


class GridMisaligned(TrapModesError, ValueError):
    """Mesh steps do not put obstacle tips and 2-shifts on grid nodes."""


class ConvergenceFailure(TrapModesError, RuntimeError):
    """The sparse eigensolver did not converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
