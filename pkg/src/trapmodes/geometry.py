"""Obstructed strip geometry.

The guide occupies ``y in (0, 2N)``. Layouts:

* ``CenteredObstacles``: for ``|x| <= a`` obstacle ``k = 1..N`` fills
  ``y in [2k-1-g(x), 2k-1+g(x)]``. With ``g == 0`` the obstacles degenerate to
  slits on ``y = 1, 3, ..., 2N-1``.
* ``MidlineSegments``: slits ``{|x| <= a, y = 2k}`` for ``k = 1..N-1``.
* ``Unobstructed``: the bare strip, used as a no-trapping control.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import SpecError

MIN_SAMPLES = 257


class WallBC(str, Enum):
    NEUMANN = "NeumannWalls"
    DIRICHLET = "DirichletWalls"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for member in cls:
            if key in (member.value.lower(), member.value.lower().replace("walls", "")):
                return member
        raise SpecError(f"unknown wall boundary condition {value!r}")


class Variant(str, Enum):
    CENTERED = "CenteredObstacles"
    SEGMENTS = "MidlineSegments"
    UNOBSTRUCTED = "Unobstructed"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for member in cls:
            if str(value).strip().lower() == member.value.lower():
                return member
        raise SpecError(f"unknown variant {value!r}")


@dataclass(frozen=True)
class Profile:
    """Gap profile ``g`` on ``[-a, a]``.

    ``kind`` is one of ``zero``, ``parabolic`` (``c (1 - (x/a)^2)``), ``cosine``
    (``c (1 + cos(pi x / a)) / 2``) or ``samples`` (uniform nodes on
    ``[-a, a]``, linear interpolation).
    """

    kind: str = "zero"
    amplitude: float = 0.0
    values: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("zero", "parabolic", "cosine", "samples"):
            raise SpecError(f"unknown profile kind {self.kind!r}")
        if self.kind in ("parabolic", "cosine") and not 0.0 <= self.amplitude < 1.0:
            raise SpecError(f"profile amplitude must lie in [0, 1), got {self.amplitude}")
        if self.kind == "samples":
            if self.values is None or len(self.values) < MIN_SAMPLES:
                raise SpecError(f"sampled profile needs at least {MIN_SAMPLES} values")
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def parabolic(cls, amplitude):
        return cls("parabolic", float(amplitude))

    @classmethod
    def cosine(cls, amplitude):
        return cls("cosine", float(amplitude))

    @classmethod
    def sampled(cls, values: Sequence[float]):
        return cls("samples", 0.0, tuple(values))

    @property
    def is_zero(self):
        if self.kind == "zero":
            return True
        if self.kind == "samples":
            return not any(self.values)
        return self.amplitude == 0.0

    def __call__(self, x, a):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) <= a
        if self.kind == "zero":
            out = np.zeros_like(x)
        elif self.kind == "parabolic":
            out = self.amplitude * (1.0 - (x / a) ** 2)
        elif self.kind == "cosine":
            out = 0.5 * self.amplitude * (1.0 + np.cos(np.pi * x / a))
        else:
            nodes = np.linspace(-a, a, len(self.values))
            out = np.interp(x, nodes, np.asarray(self.values))
        return np.where(inside, out, 0.0)

    def breakpoints(self, a):
        """Points in ``[-a, a]`` where ``g`` may fail to be smooth."""
        if self.kind == "samples":
            return np.linspace(-a, a, len(self.values))
        return np.array([-a, a])

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind in ("parabolic", "cosine"):
            d["amplitude"] = self.amplitude
        if self.kind == "samples":
            d["values"] = list(self.values)
        return d

    def label(self):
        if self.kind in ("parabolic", "cosine"):
            return f"{self.kind}:{self.amplitude:g}"
        if self.kind == "samples":
            return f"samples[{len(self.values)}]"
        return "zero"


@dataclass(frozen=True)
class WaveguideSpec:
    n: int
    a: float
    profile: Profile = field(default_factory=Profile)
    wall_bc: WallBC = WallBC.NEUMANN
    variant: Variant = Variant.CENTERED

    def __post_init__(self):
        object.__setattr__(self, "wall_bc", WallBC.parse(self.wall_bc))
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if int(self.n) != self.n or self.n < 1:
            raise SpecError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not self.a > 0:
            raise SpecError(f"a must be positive, got {self.a}")
        object.__setattr__(self, "a", float(self.a))
        xs = np.linspace(-self.a, self.a, 4097)
        gs = self.profile(xs, self.a)
        if np.any(gs < 0) or np.any(gs >= 1) or not np.all(np.isfinite(gs)):
            raise SpecError("profile must satisfy 0 <= g < 1 on [-a, a]")
        if abs(gs[0]) > 1e-12 or abs(gs[-1]) > 1e-12:
            raise SpecError("profile must vanish at x = -a and x = a")
        if self.variant is Variant.UNOBSTRUCTED and not self.profile.is_zero:
            raise SpecError("Unobstructed guides take the zero profile")
        if self.variant is Variant.SEGMENTS:
            if not self.profile.is_zero:
                raise SpecError("MidlineSegments requires the zero profile")
            if self.wall_bc is not WallBC.NEUMANN:
                raise SpecError("MidlineSegments is only treated with Neumann walls")
            if self.n < 2:
                raise SpecError("MidlineSegments requires n >= 2")

    @property
    def height(self):
        return 2.0 * self.n

    def g(self, x):
        return self.profile(x, self.a)

    @classmethod
    def from_dict(cls, d):
        prof = d.get("profile", {"kind": "zero"})
        if isinstance(prof, str):
            prof = {"kind": prof}
        profile = Profile(
            prof.get("kind", "zero"),
            float(prof.get("amplitude", 0.0)),
            tuple(prof["values"]) if prof.get("values") is not None else None,
        )
        return cls(
            n=d["n"],
            a=d["a"],
            profile=profile,
            wall_bc=d.get("wall_bc", WallBC.NEUMANN),
            variant=d.get("variant", Variant.CENTERED),
        )

    def to_dict(self):
        return {
            "variant": self.variant.value,
            "wall_bc": self.wall_bc.value,
            "n": self.n,
            "a": self.a,
            "profile": self.profile.to_dict(),
        }


def n_gaps(spec: WaveguideSpec) -> int:
    """Number of free intervals in a cross section with ``|x| <= a``."""
    if spec.variant is Variant.UNOBSTRUCTED:
        return 1
    return spec.n + 1 if spec.variant is Variant.CENTERED else spec.n


def gap_bounds(spec: WaveguideSpec, x):
    """Vectorised gap endpoints for cross sections inside the obstacle zone.

    Returns ``(lo, hi)`` arrays of shape ``x.shape + (J,)``; the caller is
    responsible for ``|x| <= a``.
    """
    x = np.asarray(x, dtype=float)
    n = spec.n
    if spec.variant is Variant.UNOBSTRUCTED:
        lo = np.zeros(x.shape + (1,))
        return lo, lo + 2.0 * n
    if spec.variant is Variant.SEGMENTS:
        k = np.arange(n, dtype=float)
        lo = np.broadcast_to(2.0 * k, x.shape + (n,)).copy()
        return lo, lo + 2.0
    g = spec.g(x)[..., None]
    j = np.arange(n + 1, dtype=float)
    lo = np.maximum(2.0 * j - 1.0 + g, 0.0)
    hi = np.minimum(2.0 * j + 1.0 - g, 2.0 * n)
    return lo, hi


def gap_intervals(spec: WaveguideSpec, x: float):
    """Ordered open y-intervals of the free cross section at abscissa ``x``."""
    if abs(x) > spec.a or spec.variant is Variant.UNOBSTRUCTED:
        return [(0.0, spec.height)]
    lo, hi = gap_bounds(spec, np.array(float(x)))
    return [(float(l), float(h)) for l, h in zip(lo, hi)]


def in_domain(spec: WaveguideSpec, x: float, y: float) -> bool:
    """True iff ``(x, y)`` lies in the open free region."""
    return any(lo < y < hi for lo, hi in gap_intervals(spec, x))
