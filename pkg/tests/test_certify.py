import math

import pytest

from trapmodes.certify import CERT_SLACK, certify, certify_all, optimize_params
from trapmodes.errors import CertificationFailed, InadmissibleClass
from trapmodes.geometry import WaveguideSpec
from trapmodes.testfun import TestParams
from trapmodes.variational import quotient_closed_form, quotient_quadrature


def test_optimizer_beats_hand_choice():
    spec = WaveguideSpec(1, 1.0)
    params, br = optimize_params(spec, 1)
    hand = quotient_closed_form(spec, 1, TestParams(10.0, 0.05, 0.5)).quotient
    assert br.quotient < math.pi**2 / 4
    assert br.quotient <= hand
    assert 0 <= params.b < spec.a


def test_budget_one_returns_grid_point():
    from trapmodes.certify import ALPHA_GRID, B_FRACTIONS, LAMBDA_GRID

    spec = WaveguideSpec(2, 1.0)
    params, br = optimize_params(spec, 1, budget=1)
    assert min(abs(params.lam - v) for v in LAMBDA_GRID) < 1e-12 * params.lam
    assert min(abs(params.alpha - v) for v in ALPHA_GRID) < 1e-12 * params.alpha
    assert any(abs(params.b - f * spec.a) < 1e-15 for f in B_FRACTIONS)
    full, _ = optimize_params(spec, 1)
    assert quotient_quadrature(spec, 1, full).quotient <= br.quotient


def test_optimizer_is_deterministic():
    spec = WaveguideSpec(2, 0.5)
    assert optimize_params(spec, 2, budget=300) == optimize_params(spec, 2, budget=300)


def test_inadmissible_class_raises():
    with pytest.raises(InadmissibleClass):
        optimize_params(WaveguideSpec(2, 1.0, wall_bc="Dirichlet"), 2)


def test_certificate_contents():
    spec = WaveguideSpec(2, 1.0)
    cert = certify(spec, 1)
    assert cert.valid
    assert cert.threshold == pytest.approx(math.pi**2 / 16)
    assert cert.margin == pytest.approx(cert.threshold - cert.q_star, rel=1e-8)
    assert cert.margin > CERT_SLACK * cert.threshold
    assert cert.q_star < cert.threshold
    d = cert.to_dict()
    assert d["valid"] and d["m"] == 1 and set(d["params"]) == {"lambda", "alpha", "b"}


def test_segments_certificate():
    cert = certify(WaveguideSpec(2, 1.0, variant="MidlineSegments"), 1)
    assert cert.valid
    assert cert.threshold == pytest.approx(math.pi**2 / 16)


def test_failure_is_reported_not_hidden():
    # a single coarse grid point for a tiny obstacle cannot push below threshold
    spec = WaveguideSpec(3, 0.05)
    cert = certify(spec, 1, budget=1, raise_on_failure=False)
    assert not cert.valid and cert.margin < 0
    with pytest.raises(CertificationFailed) as info:
        certify(spec, 1, budget=1)
    assert info.value.failed[0].margin == cert.margin
    with pytest.raises(CertificationFailed):
        certify_all(spec, budget=1)


@pytest.mark.parametrize(
    "spec,count",
    [
        (WaveguideSpec(3, 1.0), 3),
        (WaveguideSpec(3, 1.0, wall_bc="Dirichlet"), 2),
        (WaveguideSpec(2, 1.0, variant="MidlineSegments"), 1),
        (WaveguideSpec(1, 1.0, wall_bc="Dirichlet"), 0),
    ],
)
def test_certify_all_counts(spec, count):
    certs = certify_all(spec)
    assert [c.m for c in certs] == list(range(1, count + 1))
    assert all(c.valid for c in certs)


def test_parallel_matches_serial():
    spec = WaveguideSpec(3, 0.5)
    a = certify_all(spec, budget=200)
    b = certify_all(spec, budget=200, workers=3)
    assert [(c.m, c.q_star, c.params) for c in a] == [(c.m, c.q_star, c.params) for c in b]
