"""Reflection extension and the projection onto the invariant classes ``S_m``.

A function ``f`` on ``(0, 2N)`` is extended to the real line by reflection
about ``y = 0`` and ``y = 2N`` (even for Neumann walls, odd for Dirichlet
walls), giving a ``4N``-periodic function. Its class-``m`` component is

    f_m(y) = gamma_m / (2N) * sum_{n=-N}^{N-1} cos(m n pi / N) f_ext(y + 2n).

On a grid with ``K`` nodes per unit length a shift by 2 is a shift by ``2K``
nodes, so the sum is evaluated exactly at nodes by index arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import WallBC


@dataclass(frozen=True)
class SymmetryClass:
    m: int
    bc: WallBC
    n: int

    def __post_init__(self):
        if not 0 <= self.m <= self.n:
            raise ValueError(f"class index must lie in [0, {self.n}], got {self.m}")
        object.__setattr__(self, "bc", WallBC.parse(self.bc))

    @property
    def threshold(self):
        return threshold(self.m, self.n, self.bc)


@dataclass(frozen=True)
class TransverseFunction:
    """Uniform samples of a function of ``y`` on ``[0, 2N]``.

    ``k`` is the number of grid cells per unit length. ``func``, when given,
    is used for off-grid evaluation; otherwise samples are linearly
    interpolated.
    """

    n: int
    k: int
    values: np.ndarray
    func: Optional[Callable] = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (2 * self.n * self.k + 1,):
            raise ValueError(f"expected {2 * self.n * self.k + 1} samples, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, func, n, k=64):
        y = np.linspace(0.0, 2.0 * n, 2 * n * k + 1)
        return cls(n, k, np.asarray(func(y), dtype=float) * np.ones_like(y), func)

    @property
    def y(self):
        return np.linspace(0.0, 2.0 * self.n, 2 * self.n * self.k + 1)

    def __call__(self, y):
        if self.func is not None:
            return np.asarray(self.func(np.asarray(y, dtype=float)), dtype=float)
        return np.interp(y, self.y, self.values)


def coefficient(m, n, big_n):
    return math.cos(m * n * math.pi / big_n)


def gamma(m, big_n):
    return 2.0 / (1 + (m == 0) + (m == big_n))


def threshold(m, big_n, bc):
    """Bottom of the essential spectrum of the Laplacian restricted to ``S_m``."""
    if not 0 <= m <= big_n:
        raise ValueError(f"class index must lie in [0, {big_n}], got {m}")
    bc = WallBC.parse(bc)
    if bc is WallBC.DIRICHLET and m == 0:
        return math.pi ** 2
    return (m * math.pi / (2.0 * big_n)) ** 2


def fold(y, big_n, bc):
    """Map real ``y`` into ``[0, 2N]``; returns ``(y_folded, sign)``."""
    period = 4.0 * big_n
    r = np.mod(np.asarray(y, dtype=float), period)
    upper = r > 2.0 * big_n
    r = np.where(upper, period - r, r)
    if WallBC.parse(bc) is WallBC.DIRICHLET:
        sign = np.where(upper, -1.0, 1.0)
    else:
        sign = np.ones_like(r)
    return r, sign


def extend(f, bc):
    """Evaluator for the ``4N``-periodic reflection extension of ``f``."""
    big_n = f.n

    def evaluate(y):
        r, sign = fold(y, big_n, bc)
        return sign * f(r)

    return evaluate


def fold_index(i, size, bc):
    """Index analogue of :func:`fold` on nodes ``0..size`` (``size = 2N K``)."""
    period = 2 * size
    r = np.mod(i, period)
    upper = r > size
    r = np.where(upper, period - r, r)
    if WallBC.parse(bc) is WallBC.DIRICHLET:
        sign = np.where(upper, -1.0, 1.0)
        # odd extension vanishes at the walls
        sign = np.where((r == 0) | (r == size), 0.0, sign)
    else:
        sign = np.ones(np.shape(r))
    return r, sign


def project(f: TransverseFunction, m, bc):
    """Class-``m`` component of ``f`` on the same grid (exact at nodes)."""
    big_n, k = f.n, f.k
    if not 0 <= m <= big_n:
        raise ValueError(f"class index must lie in [0, {big_n}], got {m}")
    size = 2 * big_n * k
    idx = np.arange(size + 1)
    out = np.zeros(size + 1)
    for n in range(-big_n, big_n):
        r, sign = fold_index(idx + 2 * k * n, size, bc)
        out += coefficient(m, n, big_n) * sign * f.values[r]
    out *= gamma(m, big_n) / (2.0 * big_n)
    return TransverseFunction(big_n, k, out)


def project_pointwise(func, m, big_n, bc, y):
    """Evaluate the class-``m`` component of ``func`` at arbitrary ``y``.

    ``func`` is defined on ``[0, 2N]``; used for discontinuous inputs whose
    projections are wanted at interior points of their continuity intervals.
    """
    y = np.asarray(y, dtype=float)
    total = np.zeros_like(y)
    for n in range(-big_n, big_n):
        r, sign = fold(y + 2.0 * n, big_n, bc)
        total = total + coefficient(m, n, big_n) * sign * func(r)
    return gamma(m, big_n) / (2.0 * big_n) * total


def decomposition_residuals(f: TransverseFunction, bc, other: Optional[TransverseFunction] = None):
    """Completeness, orthogonality and idempotence residuals for one input.

    Orthogonality pairs the components of ``f`` with those of ``other``
    (defaults to ``f``) using composite trapezoid quadrature, which is exact
    for the discrete inner product that the node projection preserves. With
    Dirichlet walls completeness is measured on interior nodes, since every
    component vanishes on the walls by construction.
    """
    other = f if other is None else other
    parts = [project(f, m, bc) for m in range(f.n + 1)]
    oparts = [project(other, m, bc) for m in range(f.n + 1)]
    total = np.sum([p.values for p in parts], axis=0)
    diff = np.abs(total - f.values)
    if WallBC.parse(bc) is WallBC.DIRICHLET:
        # the odd extension is zero on the walls whatever f is there
        diff = diff[1:-1]
    completeness = float(np.max(diff))
    h = 1.0 / f.k
    w = np.full(f.values.shape, h)
    w[0] = w[-1] = 0.5 * h
    ortho = 0.0
    for i, p in enumerate(parts):
        for j, q in enumerate(oparts):
            if i != j:
                ortho = max(ortho, abs(float(np.sum(w * p.values * q.values))))
    idem = max(float(np.max(np.abs(project(p, m, bc).values - p.values))) for m, p in enumerate(parts))
    return {"completeness": completeness, "orthogonality": ortho, "idempotence": idem}
