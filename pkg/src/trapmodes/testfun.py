"""Trial functions ``phi(x, y) = chi(x) v(y) + lam psi_alpha(x) T(y)``.

``T`` is ``cos(p y)`` for Neumann walls and ``sin(p y)`` for Dirichlet walls,
``p = m pi / (2N)``. ``v`` is piecewise constant on the gaps of the obstacle
zone and is obtained by projecting an indicator of one gap onto ``S_m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import symmetry
from .errors import InadmissibleClass, OutOfDomain
from .geometry import Variant, WallBC, WaveguideSpec, gap_intervals, in_domain

CLOSED_FORM_TOL = 1e-12


@dataclass(frozen=True)
class TestParams:
    __test__ = False

    lam: float
    alpha: float
    b: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.b >= 0:
            raise ValueError(f"b must be non-negative, got {self.b}")

    def check(self, a):
        if not self.b < a:
            raise ValueError(f"b must be below a = {a}, got {self.b}")
        return self

    def to_dict(self):
        return {"lambda": self.lam, "alpha": self.alpha, "b": self.b}


@dataclass(frozen=True)
class TransverseProfile:
    """Per-gap constants of ``v``, aligned with :func:`gap_intervals`.

    ``source`` is the gap whose indicator was projected and ``orientation``
    is the sign applied to the projection (``-1`` only when a Dirichlet
    source makes the coupling with ``sin(p y)`` negative).
    """

    values: tuple
    m: int
    variant: Variant
    bc: WallBC
    source: int
    orientation: float = 1.0

    @property
    def weights(self):
        # gap lengths at g = 0, i.e. int v^2 dy = norm_sq * (1 - g)
        if self.variant is Variant.SEGMENTS:
            return np.full(len(self.values), 2.0)
        w = np.full(len(self.values), 2.0)
        w[0] = w[-1] = 1.0
        return w


def chi(x, a, b):
    """Plateau cut-off: 1 on ``|x| < b``, linear ramps to 0 at ``|x| = a``."""
    ax = np.abs(np.asarray(x, dtype=float))
    return np.clip((a - ax) / (a - b), 0.0, 1.0)


def chi_prime(x, a, b):
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    ramp = (ax > b) & (ax < a)
    return np.where(ramp, -np.sign(x) / (a - b), 0.0)


def psi(x, alpha, a):
    """Exponential tail ``exp(-alpha (|x| - a))`` outside the obstacle zone."""
    ax = np.abs(np.asarray(x, dtype=float))
    return np.where(ax > a, np.exp(-alpha * (ax - a)), 1.0)


def admissible_classes(spec: WaveguideSpec):
    """Classes for which a trial function exists in this setting."""
    if spec.variant is Variant.UNOBSTRUCTED:
        return []
    if spec.variant is Variant.CENTERED and spec.wall_bc is WallBC.NEUMANN:
        return list(range(1, spec.n + 1))
    return list(range(1, spec.n))


def _check_class(spec, m):
    if m not in admissible_classes(spec):
        raise InadmissibleClass(
            f"class m={m} is not admissible for {spec.variant.value}/{spec.wall_bc.value} with N={spec.n}"
        )


def dirichlet_source(m, big_n):
    """Smallest ``j`` in ``1..N-1`` maximising ``|sin(m pi j / N)|``."""
    vals = [abs(math.sin(m * math.pi * j / big_n)) for j in range(1, big_n)]
    best = max(vals)
    return 1 + next(i for i, v in enumerate(vals) if v >= best - 1e-14)


def _reference_gaps(spec):
    # gap structure is the same for all |x| <= a up to g; use g = 0
    if spec.variant is Variant.SEGMENTS:
        return [(2.0 * k, 2.0 * k + 2.0) for k in range(spec.n)]
    n = spec.n
    return [(max(2.0 * j - 1.0, 0.0), min(2.0 * j + 1.0, 2.0 * n)) for j in range(n + 1)]


def _closed_form(spec, m, source):
    n = spec.n
    gam = symmetry.gamma(m, n)
    if spec.variant is Variant.SEGMENTS:
        return [
            gam / n * math.cos(m * math.pi / (2 * n)) * math.cos(m * math.pi * (0.5 + s) / n)
            for s in range(n)
        ]
    if spec.wall_bc is WallBC.DIRICHLET:
        return [
            gam / n * math.sin(m * math.pi * source / n) * math.sin(m * math.pi * s / n)
            for s in range(n + 1)
        ]
    return [gam / (2 * n) * math.cos(m * math.pi * j / n) for j in range(n + 1)]


def transverse_profile(spec: WaveguideSpec, m: int) -> TransverseProfile:
    _check_class(spec, m)
    if spec.variant is Variant.CENTERED and spec.wall_bc is WallBC.DIRICHLET:
        source = dirichlet_source(m, spec.n)
    else:
        source = 0
    gaps = _reference_gaps(spec)
    lo, hi = gaps[source]

    def indicator(y):
        return ((y > lo) & (y < hi)).astype(float)

    # quarter points never shift onto a wall, where the open indicator is ambiguous
    probes = np.array([l + 0.25 * (h - l) for l, h in gaps])
    values = symmetry.project_pointwise(indicator, m, spec.n, spec.wall_bc, probes)
    expected = np.array(_closed_form(spec, m, source))
    err = float(np.max(np.abs(values - expected)))
    if err > CLOSED_FORM_TOL:
        raise AssertionError(f"projection disagrees with closed-form profile by {err:.3e}")
    if np.max(np.abs(values)) < 1e-12:
        raise InadmissibleClass(f"profile vanishes identically for m={m}")
    orientation = 1.0
    if spec.wall_bc is WallBC.DIRICHLET and math.sin(m * math.pi * source / spec.n) < 0:
        orientation = -1.0
    return TransverseProfile(
        tuple(float(v) for v in orientation * values), m, spec.variant, spec.wall_bc, source, orientation
    )


def v_norm_sq(profile: TransverseProfile) -> float:
    v = np.asarray(profile.values)
    return float(np.sum(profile.weights * v * v))


def transverse_mode(spec: WaveguideSpec, m: int):
    """``(T, T')`` for the class-``m`` transverse mode."""
    p = m * math.pi / (2.0 * spec.n)
    if spec.wall_bc is WallBC.DIRICHLET:
        return (lambda y: np.sin(p * y)), (lambda y: p * np.cos(p * y))
    return (lambda y: np.cos(p * y)), (lambda y: -p * np.sin(p * y))


def phi(spec: WaveguideSpec, m: int, params: TestParams, x: float, y: float, profile=None) -> float:
    if not in_domain(spec, x, y):
        raise OutOfDomain(f"({x}, {y}) is not in the free region")
    params.check(spec.a)
    profile = profile or transverse_profile(spec, m)
    trig, _ = transverse_mode(spec, m)
    tail = params.lam * float(psi(x, params.alpha, spec.a)) * float(trig(y))
    if abs(x) > spec.a:
        return tail
    for j, (lo, hi) in enumerate(gap_intervals(spec, x)):
        if lo < y < hi:
            return float(chi(x, spec.a, params.b)) * profile.values[j] + tail
    raise OutOfDomain(f"({x}, {y}) is not in any gap")  # unreachable after in_domain


def phi_grid(spec, m, params, xs, ys):
    """Sample ``phi`` on a tensor grid; points outside the free region give NaN."""
    profile = transverse_profile(spec, m)
    out = np.full((len(xs), len(ys)), np.nan)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            if in_domain(spec, x, y):
                out[i, j] = phi(spec, m, params, x, y, profile)
    return out


__all__ = [
    "TestParams",
    "TransverseProfile",
    "chi",
    "chi_prime",
    "psi",
    "admissible_classes",
    "transverse_profile",
    "v_norm_sq",
    "transverse_mode",
    "phi",
    "phi_grid",
]
