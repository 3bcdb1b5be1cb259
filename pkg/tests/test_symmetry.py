import math

import numpy as np
import pytest

from trapmodes.geometry import WallBC
from trapmodes.symmetry import (
    SymmetryClass,
    TransverseFunction,
    coefficient,
    decomposition_residuals,
    extend,
    gamma,
    project,
    project_pointwise,
    threshold,
)

BCS = [WallBC.NEUMANN, WallBC.DIRICHLET]


def test_coefficient_examples():
    assert coefficient(1, 0, 2) == pytest.approx(1.0)
    assert coefficient(1, 1, 2) == pytest.approx(0.0, abs=1e-15)
    assert coefficient(3, 2, 3) == pytest.approx(1.0)
    for n in range(-4, 5):
        assert coefficient(2, n, 4) == coefficient(2, -n, 4)


def test_gamma_examples():
    assert gamma(0, 4) == 1
    assert gamma(2, 4) == 2
    assert gamma(4, 4) == 1


def test_threshold_examples():
    assert threshold(1, 2, WallBC.NEUMANN) == pytest.approx(math.pi**2 / 16)
    assert threshold(0, 3, WallBC.DIRICHLET) == pytest.approx(math.pi**2)
    assert threshold(0, 5, WallBC.NEUMANN) == 0.0
    assert SymmetryClass(2, "Dirichlet", 3).threshold == pytest.approx((2 * math.pi / 6) ** 2)


def test_symmetry_class_range():
    with pytest.raises(ValueError):
        SymmetryClass(4, WallBC.NEUMANN, 3)


def test_extend_examples():
    one = TransverseFunction.from_callable(lambda y: np.ones_like(y), 2)
    ev = extend(one, WallBC.NEUMANN)
    assert np.allclose(ev(np.array([-7.3, -0.5, 3.0, 9.1, 21.0])), 1.0)
    assert extend(one, WallBC.DIRICHLET)(np.array([-0.5]))[0] == pytest.approx(-1.0)
    n = 3
    f = TransverseFunction.from_callable(lambda y: np.cos(np.pi * y / (2 * n)), n)
    t = np.array([0.25, 1.0, 2.5])
    got = extend(f, WallBC.NEUMANN)(2 * n + t)
    assert np.allclose(got, np.cos(np.pi * (2 * n - t) / (2 * n)), atol=1e-14)


def test_extension_is_periodic():
    n = 2
    f = TransverseFunction.from_callable(lambda y: y**2 + np.sin(y), n)
    y = np.linspace(0.1, 3.9, 11)
    for bc in BCS:
        ev = extend(f, bc)
        assert np.allclose(ev(y + 4 * n), ev(y), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_cosines_are_fixed_points(n):
    for m in range(n + 1):
        f = TransverseFunction.from_callable(lambda y: np.cos(m * np.pi * y / (2 * n)), n, k=4096 // (2 * n))
        assert np.max(np.abs(project(f, m, WallBC.NEUMANN).values - f.values)) < 1e-12


def test_constants_live_in_class_zero():
    f = TransverseFunction.from_callable(lambda y: np.ones_like(y), 3)
    for m in range(1, 4):
        assert np.max(np.abs(project(f, m, WallBC.NEUMANN).values)) < 1e-14


@pytest.mark.parametrize("n,m", [(2, 1), (3, 2), (4, 3)])
def test_indicator_of_first_gap(n, m):
    def ind(y):
        return ((y > 0) & (y < 1)).astype(float)

    for j in range(n + 1):
        y0 = 2 * j - 0.5 if j else 0.5
        val = project_pointwise(ind, m, n, WallBC.NEUMANN, np.array([y0]))[0]
        assert val == pytest.approx(gamma(m, n) / (2 * n) * math.cos(m * math.pi * j / n), abs=1e-14)


@pytest.mark.parametrize("bc", BCS)
def test_dirichlet_projections_vanish_at_walls(bc):
    n = 3
    f = TransverseFunction.from_callable(lambda y: np.sin(np.pi * y / 6) + 0.3 * np.sin(np.pi * y / 2), n)
    for m in range(n + 1):
        p = project(f, m, bc)
        if bc is WallBC.DIRICHLET:
            assert p.values[0] == 0.0 and p.values[-1] == 0.0


@pytest.mark.parametrize("bc", BCS)
@pytest.mark.parametrize("n", [1, 2, 5])
def test_decomposition_of_random_function(bc, n):
    rng = np.random.default_rng(n)
    c = rng.standard_normal(6)
    f = TransverseFunction.from_callable(lambda y: sum(ci * np.cos((i + 0.3) * y) for i, ci in enumerate(c)), n)
    res = decomposition_residuals(f, bc)
    assert max(res.values()) < 1e-10


def test_projection_is_linear():
    n = 2
    f = TransverseFunction.from_callable(np.sin, n)
    g = TransverseFunction.from_callable(np.cos, n)
    fg = TransverseFunction(n, f.k, 2 * f.values - 3 * g.values)
    for m in range(n + 1):
        lhs = project(fg, m, WallBC.NEUMANN).values
        rhs = 2 * project(f, m, WallBC.NEUMANN).values - 3 * project(g, m, WallBC.NEUMANN).values
        assert np.allclose(lhs, rhs, atol=1e-13)


def test_transverse_function_shape_checked():
    with pytest.raises(ValueError):
        TransverseFunction(2, 4, np.zeros(5))
