import math

import numpy as np
import pytest
from scipy.integrate import quad

from trapmodes.errors import InadmissibleClass, UnsupportedSetting
from trapmodes.geometry import Profile, WallBC, WaveguideSpec, gap_intervals
from trapmodes.testfun import TestParams, chi, chi_prime, transverse_profile, v_norm_sq
from trapmodes.variational import (
    moments,
    quotient_closed_form,
    quotient_quadrature,
    reduced_integrals,
    verify_identities,
)

ANCHOR_SPEC = WaveguideSpec(1, 1.0)
ANCHOR = TestParams(10.0, 0.05, 0.5)


def brute_force(spec, m, params, ny=48):
    """Independent Rayleigh quotient: scipy quad in x, Gauss-Legendre per gap in y."""
    prof = transverse_profile(spec, m)
    p = m * math.pi / (2 * spec.n)
    dirichlet = spec.wall_bc is WallBC.DIRICHLET
    T = (lambda y: np.sin(p * y)) if dirichlet else (lambda y: np.cos(p * y))
    dT = (lambda y: p * np.cos(p * y)) if dirichlet else (lambda y: -p * np.sin(p * y))
    t, w = np.polynomial.legendre.leggauss(ny)
    a, b, lam, al = spec.a, params.b, params.lam, params.alpha

    def psi(x):
        return math.exp(-al * (abs(x) - a)) if abs(x) > a else 1.0

    def dpsi(x):
        return -al * math.copysign(1.0, x) * psi(x) if abs(x) > a else 0.0

    def section(x, which):
        total = 0.0
        inside = abs(x) <= a
        gaps = gap_intervals(spec, x)
        for j, (lo, hi) in enumerate(gaps):
            y = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
            v = prof.values[j] if inside else 0.0
            c, dc = float(chi(x, a, b)), float(chi_prime(x, a, b))
            if which == "mass":
                f = (c * v + lam * psi(x) * T(y)) ** 2
            else:
                f = (dc * v + lam * dpsi(x) * T(y)) ** 2 + (lam * psi(x) * dT(y)) ** 2
            total += 0.5 * (hi - lo) * float(w @ f)
        return total

    far = a + 45.0 / al
    out = {}
    for which in ("mass", "grad"):
        inner = quad(section, -a, a, args=(which,), points=[-b, 0.0, b], limit=400, epsabs=0, epsrel=1e-12)[0]
        tail = quad(section, a, far, args=(which,), limit=400, epsabs=0, epsrel=1e-12)[0]
        out[which] = inner + 2 * tail
    return out["grad"] / out["mass"], out["grad"] - p * p * out["mass"]


def test_anchor_printed_form():
    br = quotient_closed_form(ANCHOR_SPEC, 1, ANCHOR, form="printed")
    assert br.numerator_excess == pytest.approx(-88.8927, abs=1e-3)
    assert br.quotient == pytest.approx(2.42775, abs=1e-4)
    assert br.c_const == 8.0
    assert br.denominator == pytest.approx(2238.86, abs=1e-2)


def test_anchor_true_integrals():
    """The actual integrals of the trial function (brute force) match quadrature."""
    q_bf, ex_bf = brute_force(ANCHOR_SPEC, 1, ANCHOR)
    quad_br = quotient_quadrature(ANCHOR_SPEC, 1, ANCHOR)
    exact = quotient_closed_form(ANCHOR_SPEC, 1, ANCHOR)
    assert quad_br.quotient == pytest.approx(q_bf, rel=1e-9)
    assert quad_br.numerator_excess == pytest.approx(ex_bf, rel=1e-7)
    assert exact.quotient == pytest.approx(quad_br.quotient, rel=1e-12)
    assert quad_br.numerator_excess == pytest.approx(-41.7688, abs=1e-3)


@pytest.mark.parametrize(
    "spec,m",
    [
        (WaveguideSpec(2, 0.7, Profile.parabolic(0.5)), 2),
        (WaveguideSpec(3, 1.0, wall_bc="Dirichlet"), 1),
        (WaveguideSpec(3, 0.5, variant="MidlineSegments"), 2),
    ],
)
def test_quadrature_against_brute_force(spec, m):
    params = TestParams(2.0, 0.4, 0.3 * spec.a)
    q_bf, _ = brute_force(spec, m, params)
    assert quotient_quadrature(spec, m, params).quotient == pytest.approx(q_bf, rel=1e-8)


def test_dirichlet_small_lambda_limit():
    a, b = 1.0, 0.25
    spec = WaveguideSpec(2, a, wall_bc="Dirichlet")
    q = quotient_quadrature(spec, 1, TestParams(1e-12, 1.0, b)).quotient
    assert q == pytest.approx((2 / (a - b)) / (2 * b + 2 * (a - b) / 3), rel=1e-9)


def test_small_lambda_excess_reduces_to_profile_term():
    spec = WaveguideSpec(3, 1.2, Profile.cosine(0.3))
    m, b = 2, 0.4
    r = reduced_integrals(spec, m, b)
    vn = v_norm_sq(transverse_profile(spec, m))
    p = m * math.pi / 6
    br = quotient_quadrature(spec, m, TestParams(1e-14, 1.0, b))
    assert br.numerator_excess == pytest.approx(vn * (r.dchi2 - p * p * r.chi2), rel=1e-10)


def test_ramp_blow_up():
    spec = WaveguideSpec(1, 1.0)
    vals = [quotient_quadrature(spec, 1, TestParams(1.0, 1.0, b)).numerator_excess for b in (0.9, 0.99, 0.999)]
    assert vals[0] < vals[1] < vals[2]
    assert vals[2] > 100


def test_denominator_exceeds_tail_mass():
    for n in (1, 2, 3):
        spec = WaveguideSpec(n, 1.0)
        for m in range(1, n + 1):
            br = quotient_quadrature(spec, m, TestParams(1.0, 1.0, 0.5))
            assert br.denominator > n
            assert br.gradient >= 0
            assert br.quotient == pytest.approx(br.p**2 + br.numerator_excess / br.denominator)


def test_tail_share_is_analytic():
    for spec in (WaveguideSpec(3, 1.0), WaveguideSpec(3, 1.0, wall_bc="Dirichlet")):
        mom = moments(spec, 1, 0.2)
        assert mom.st == pytest.approx(spec.n, rel=1e-14)
        assert mom.etail == pytest.approx(0.0, abs=1e-13)


def test_scale_invariance():
    spec = WaveguideSpec(2, 1.0, Profile.parabolic(0.5))
    mom = moments(spec, 1, 0.3)
    c = 7.5
    scaled = type(mom)(mom.p, c * c * mom.mvv, c * c * mom.kvv, c * mom.mvt, mom.mtt, mom.ett, mom.st, mom.etail, True)
    lam, alpha = 1.3, 0.2
    assert scaled.quotient_excess(c * lam, alpha) == pytest.approx(mom.quotient_excess(lam, alpha), rel=1e-12)


def test_closed_form_unsupported_outside_neumann_obstacles():
    with pytest.raises(UnsupportedSetting):
        quotient_closed_form(WaveguideSpec(2, 1.0, wall_bc="Dirichlet"), 1, TestParams(1, 1, 0))
    with pytest.raises(UnsupportedSetting):
        quotient_closed_form(WaveguideSpec(2, 1.0, variant="MidlineSegments"), 1, TestParams(1, 1, 0))


def test_inadmissible_class_propagates():
    with pytest.raises(InadmissibleClass):
        quotient_quadrature(WaveguideSpec(2, 1.0, wall_bc="Dirichlet"), 2, TestParams(1, 1, 0))


def test_zero_profile_closed_integrals():
    r = reduced_integrals(WaveguideSpec(2, 1.5), 1, 0.5)
    general = reduced_integrals(WaveguideSpec(2, 1.5, Profile.sampled(np.zeros(300))), 1, 0.5)
    for field in ("one_minus_g", "chi_sin", "chi2", "dchi2"):
        assert getattr(general, field) == pytest.approx(getattr(r, field), rel=1e-12)


def test_identities_examples():
    rep = verify_identities(WaveguideSpec(2, 1.0), 1)
    assert rep["max_residual"] < 1e-10
    rep = verify_identities(WaveguideSpec(4, 1.0, Profile.parabolic(0.5)), 2)
    assert rep["max_residual"] < 1e-9
    assert rep["quadrature_converged"]
    rep = verify_identities(WaveguideSpec(1, 1.0), 1)
    assert rep["residuals"]["roots_of_unity"] == 0.0


def test_printed_constants_deviate_where_expected():
    rep = verify_identities(WaveguideSpec(1, 1.0), 1)
    assert rep["printed"]["cross_term"] > 0.1
    rep = verify_identities(WaveguideSpec(3, 1.0, Profile.parabolic(0.5)), 3)
    assert rep["printed"]["cos_squared"] > 1e-3
    assert rep["residuals"]["cos_squared"] < 1e-12
