"""Rayleigh quotients of the trial functions.

Two independent routes are provided:

* :func:`quotient_quadrature` integrates ``|phi|^2`` and ``|grad phi|^2``
  numerically in both ``x`` and ``y`` (composite Gauss-Legendre in ``x``,
  Gauss-Legendre on every gap in ``y``) and adds the exact ``|x| > a``
  tail factor ``1/alpha``. It covers all three settings and is the source
  of every certificate.
* :func:`quotient_closed_form` evaluates the reduced one-dimensional
  formula for centered obstacles with Neumann walls, where all
  ``y``-integrals are done analytically.

The closed form has two variants. ``form="exact"`` uses the transverse
integrals as they actually evaluate: the coupling between ``chi v`` and
``cos(p y)`` is ``2N/(m pi) * int chi sin(p (1 - g)) dx`` for every
``1 <= m <= N``, and for ``m = N`` the sum ``sum_i cos(2 m pi i / N)``
equals ``N`` rather than 0, which leaves an extra ``(N/pi) int sin(pi g)``
in ``int cos^2(p y)``. ``form="printed"`` uses the commonly quoted
constants (``C = 4`` below ``m = N``, ``C = 8`` at ``m = N``, no extra
term) so that hand evaluations of that version can be reproduced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import quadrature
from .errors import UnsupportedSetting
from .geometry import Variant, WallBC, WaveguideSpec, gap_bounds
from .testfun import TestParams, chi, chi_prime, transverse_mode, transverse_profile, v_norm_sq

QUAD_RTOL = 1e-10
Y_ORDER = 24


@dataclass(frozen=True)
class QuotientBreakdown:
    numerator_excess: float
    denominator: float
    quotient: float
    p: float
    c_const: float
    converged: bool = True

    @property
    def gradient(self):
        return self.numerator_excess + self.p ** 2 * self.denominator

    def to_dict(self):
        return {
            "numerator_excess": self.numerator_excess,
            "denominator": self.denominator,
            "quotient": self.quotient,
            "p": self.p,
            "c_const": self.c_const,
        }


@dataclass(frozen=True)
class Moments:
    """``b``-dependent integrals from which ``Q(lam, alpha)`` is assembled.

    Over ``|x| < a``: ``mvv = int chi^2 v^2``, ``kvv = int chi'^2 v^2``,
    ``mvt = int chi v T``, ``mtt = int T^2`` and
    ``ett = int (T'^2 - p^2 T^2)``. Over one cross section of the free
    strip: ``st = int T^2`` and ``etail = int (T'^2 - p^2 T^2)``.
    """

    p: float
    mvv: float
    kvv: float
    mvt: float
    mtt: float
    ett: float
    st: float
    etail: float
    converged: bool

    def mass(self, lam, alpha):
        lam = np.asarray(lam, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        return lam ** 2 * (self.mtt + self.st / alpha) + 2.0 * lam * self.mvt + self.mvv

    def excess(self, lam, alpha):
        lam = np.asarray(lam, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        p2 = self.p ** 2
        return (
            lam ** 2 * (self.ett + self.etail / alpha + alpha * self.st)
            + (self.kvv - p2 * self.mvv)
            - 2.0 * lam * p2 * self.mvt
        )

    def quotient_excess(self, lam, alpha):
        """``Q - p^2``, computed without cancellation against ``p^2``."""
        return self.excess(lam, alpha) / self.mass(lam, alpha)


def _x_breakpoints(spec, b):
    a = spec.a
    return np.concatenate([[-a, -b, 0.0, b, a], spec.profile.breakpoints(a)])


@lru_cache(maxsize=4096)
def _moments_cached(spec, m, b, rtol, order):
    profile = transverse_profile(spec, m)
    v = np.asarray(profile.values)
    trig, dtrig = transverse_mode(spec, m)
    p = m * math.pi / (2.0 * spec.n)
    a = spec.a

    def integrands(x):
        lo, hi = gap_bounds(spec, x)
        lengths = hi - lo
        w_vv = lengths @ (v * v)
        t1 = quadrature.integrate_intervals(trig, lo, hi, Y_ORDER)
        t2 = quadrature.integrate_intervals(lambda y: trig(y) ** 2, lo, hi, Y_ORDER)
        t3 = quadrature.integrate_intervals(lambda y: dtrig(y) ** 2 - p * p * trig(y) ** 2, lo, hi, Y_ORDER)
        c = chi(x, a, b)
        dc = chi_prime(x, a, b)
        return np.stack([c * c * w_vv, dc * dc * w_vv, c * (t1 @ v), t2.sum(axis=-1), t3.sum(axis=-1)], axis=-1)

    scale = 2.0 * spec.n * a
    vals, info = quadrature.integrate(
        integrands, -a, a, _x_breakpoints(spec, b), order=order, rtol=rtol, atol=1e-15 * scale
    )
    st = float(quadrature.integrate_intervals(lambda y: trig(y) ** 2, 0.0, 2.0 * spec.n, 64))
    etail = float(
        quadrature.integrate_intervals(lambda y: dtrig(y) ** 2 - p * p * trig(y) ** 2, 0.0, 2.0 * spec.n, 64)
    )
    return Moments(p, *(float(x) for x in vals), st, etail, bool(info["converged"]))


def moments(spec: WaveguideSpec, m: int, b: float, rtol=1e-12, order=16) -> Moments:
    if not 0 <= b < spec.a:
        raise ValueError(f"b must lie in [0, a), got {b}")
    return _moments_cached(spec, m, float(b), rtol, order)


def exact_cross_constant(spec):
    return 4.0 / spec.n


def printed_cross_constant(spec, m):
    return 8.0 if m in (0, spec.n) else 4.0


def quotient_quadrature(spec: WaveguideSpec, m: int, params: TestParams, rtol=1e-12, order=16) -> QuotientBreakdown:
    params.check(spec.a)
    mom = moments(spec, m, params.b, rtol=rtol, order=order)
    excess = float(mom.excess(params.lam, params.alpha))
    mass = float(mom.mass(params.lam, params.alpha))
    centered_neumann = spec.variant is Variant.CENTERED and spec.wall_bc is WallBC.NEUMANN
    c = exact_cross_constant(spec) if centered_neumann else float("nan")
    return QuotientBreakdown(excess, mass, mom.p ** 2 + excess / mass, mom.p, c, mom.converged)


@dataclass(frozen=True)
class ReducedIntegrals:
    """x-integrals of the reduced formula over ``[-a, a]``."""

    one_minus_g: float
    chi_sin: float
    chi2: float
    dchi2: float
    extra: float


def reduced_integrals(spec: WaveguideSpec, m: int, b: float, rtol=1e-13, order=16) -> ReducedIntegrals:
    n, a = spec.n, spec.a
    p = m * math.pi / (2.0 * n)
    if spec.profile.is_zero:
        return ReducedIntegrals(2.0 * a, math.sin(p) * (a + b), 2.0 * b + 2.0 * (a - b) / 3.0, 2.0 / (a - b), 0.0)

    def integrands(x):
        one_g = 1.0 - spec.g(x)
        c = chi(x, a, b)
        dc = chi_prime(x, a, b)
        extra = n / (2.0 * p) * np.sin(2.0 * p * one_g) if m == n else np.zeros_like(x)
        return np.stack([one_g, c * np.sin(p * one_g), c * c * one_g, dc * dc * one_g, extra], axis=-1)

    vals, _ = quadrature.integrate(integrands, -a, a, _x_breakpoints(spec, b), order=order, rtol=rtol, atol=1e-16)
    return ReducedIntegrals(*(float(v) for v in vals))


def quotient_closed_form(spec: WaveguideSpec, m: int, params: TestParams, form="exact") -> QuotientBreakdown:
    """Reduced quotient for centered obstacles between Neumann walls."""
    if spec.variant is not Variant.CENTERED or spec.wall_bc is not WallBC.NEUMANN:
        raise UnsupportedSetting("closed form covers centered obstacles with Neumann walls; use quotient_quadrature")
    if form not in ("exact", "printed"):
        raise ValueError(f"unknown form {form!r}")
    params.check(spec.a)
    n = spec.n
    profile = transverse_profile(spec, m)
    vn = v_norm_sq(profile)
    p = m * math.pi / (2.0 * n)
    r = reduced_integrals(spec, m, params.b)
    lam, alpha = params.lam, params.alpha
    if form == "exact":
        c, extra = exact_cross_constant(spec), r.extra
    else:
        c, extra = printed_cross_constant(spec, m), 0.0
    cross = c * n * n / (m * math.pi) * r.chi_sin
    numerator = (
        lam ** 2 * alpha * n
        + vn * (r.dchi2 - p * p * r.chi2)
        - lam * p * p * cross
        - 2.0 * lam ** 2 * p * p * extra
    )
    denominator = lam ** 2 * n / alpha + lam ** 2 * (n * r.one_minus_g + extra) + lam * cross + vn * r.chi2
    return QuotientBreakdown(numerator, denominator, p * p + numerator / denominator, p, c)


def _rel(lhs, rhs):
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def _direct_integrals(spec, m, b, rtol, order):
    """Two-dimensional quadrature of the individual identity left-hand sides."""
    profile = transverse_profile(spec, m)
    v = np.asarray(profile.values)
    p = m * math.pi / (2.0 * spec.n)
    a = spec.a

    def integrands(x):
        lo, hi = gap_bounds(spec, x)
        cos2 = quadrature.integrate_intervals(lambda y: np.cos(p * y) ** 2, lo, hi, Y_ORDER).sum(axis=-1)
        cos1 = quadrature.integrate_intervals(lambda y: np.cos(p * y), lo, hi, Y_ORDER) @ v
        v2 = quadrature.integrate_intervals(lambda y: np.ones_like(y), lo, hi, Y_ORDER) @ (v * v)
        c = chi(x, a, b)
        dc = chi_prime(x, a, b)
        return np.stack([cos2, c * cos1, c * c * v2, dc * dc * v2], axis=-1)

    vals, info = quadrature.integrate(integrands, -a, a, _x_breakpoints(spec, b), order=order, rtol=rtol, atol=1e-16)
    return vals, info


def verify_identities(spec: WaveguideSpec, m: int, params: TestParams | None = None, rtol=1e-13, order=16):
    """Check the transverse identities behind the reduced formula.

    Every left-hand side is integrated directly in two dimensions; right-hand
    sides come from :func:`reduced_integrals`. ``residuals`` compares against
    the exact identities, ``printed`` records how far the quoted constants
    are from the same numbers (zero where they agree).
    """
    if spec.variant is not Variant.CENTERED or spec.wall_bc is not WallBC.NEUMANN:
        raise UnsupportedSetting("identities are stated for centered obstacles with Neumann walls")
    n = spec.n
    params = params or TestParams(1.0, 1.0, 0.5 * spec.a)
    params.check(spec.a)
    b = params.b
    p = m * math.pi / (2.0 * n)
    profile = transverse_profile(spec, m)
    vn = v_norm_sq(profile)
    red = reduced_integrals(spec, m, b)
    (cos2, cross, vchi2, vdchi2), info = _direct_integrals(spec, m, b, rtol, order)

    roots = max((abs(sum(math.cos(2 * mm * math.pi * i / n) for i in range(n))) for mm in range(1, n)), default=0.0)

    exact_cross = 2.0 * n / (m * math.pi) * red.chi_sin
    printed_cross = printed_cross_constant(spec, m) / 2.0 * n * n / (m * math.pi) * red.chi_sin
    quad = quotient_quadrature(spec, m, params, rtol=rtol, order=order)
    cf = quotient_closed_form(spec, m, params, form="exact")
    printed = quotient_closed_form(spec, m, params, form="printed")

    residuals = {
        "cos_squared": _rel(cos2, n * red.one_minus_g + red.extra),
        "roots_of_unity": roots,
        "cross_term": _rel(cross, exact_cross),
        "v_chi_squared": _rel(vchi2, vn * red.chi2),
        "v_dchi_squared": _rel(vdchi2, vn * red.dchi2),
        "mass_assembly": _rel(quad.denominator, cf.denominator),
        "gradient_assembly": _rel(quad.gradient, cf.gradient),
    }
    printed_dev = {
        "cos_squared": _rel(cos2, n * red.one_minus_g),
        "cross_term": _rel(cross, printed_cross),
        "mass_assembly": _rel(quad.denominator, printed.denominator),
        "gradient_assembly": _rel(quad.gradient, printed.gradient),
    }
    return {
        "n": n,
        "m": m,
        "profile": spec.profile.label(),
        "params": params.to_dict(),
        "residuals": residuals,
        "max_residual": max(residuals.values()),
        "printed": printed_dev,
        "quadrature_converged": bool(info["converged"]) and quad.converged,
    }
