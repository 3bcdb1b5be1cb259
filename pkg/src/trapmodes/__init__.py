"""Variational certificates and finite-difference checks for trapped modes
in strips obstructed by periodic arrays of obstacles."""
from .certify import BoundCertificate, certify, certify_all, optimize_params
from .errors import (
    CertificationFailed,
    ConvergenceFailure,
    GridMisaligned,
    InadmissibleClass,
    OutOfDomain,
    SpecError,
    TrapModesError,
    UnsupportedSetting,
)
from .geometry import Profile, Variant, WallBC, WaveguideSpec, gap_intervals, in_domain
from .symmetry import SymmetryClass, TransverseFunction, project, threshold
from .testfun import TestParams, admissible_classes, phi, transverse_profile
from .variational import QuotientBreakdown, quotient_closed_form, quotient_quadrature, verify_identities

__version__ = "0.1.0"
