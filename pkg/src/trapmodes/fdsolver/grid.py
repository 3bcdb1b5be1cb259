"""Five-point discretisation of the guide truncated to ``|x| <= L``.

The operator is assembled as a weighted graph Laplacian: node ``i`` carries
the mass of its dual cell and every grid edge contributes
``w (u_i - u_j)^2`` to the energy, with ``w = hy/hx`` for horizontal and
``hx/hy`` for vertical edges. Neumann boundaries (walls, obstacle faces)
simply have no edges across them, which is the mirror-ghost scheme;
Dirichlet nodes are dropped and their edges go to the diagonal.

Zero-thickness slits duplicate every node on the slit line into a copy
attached to the cells below it and a copy attached to the cells above it,
each with half mass and half-weight edges along the slit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..errors import GridMisaligned
from ..geometry import Variant, WallBC, WaveguideSpec

BELOW, REGULAR, ABOVE = -1, 0, 1
_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    l: float = 8.0
    hx: float = 1.0 / 16
    hy: float = 1.0 / 16
    truncation_bc: str = "dirichlet"

    def __post_init__(self):
        if not (self.l > 0 and self.hx > 0 and self.hy > 0):
            raise GridMisaligned("grid lengths must be positive")
        if self.truncation_bc not in ("dirichlet", "neumann"):
            raise GridMisaligned(f"truncation_bc must be 'dirichlet' or 'neumann', got {self.truncation_bc!r}")

    def coarsened(self, factor=2):
        return GridSpec(self.l, self.hx * factor, self.hy * factor, self.truncation_bc)

    def to_dict(self):
        d = {"hx": self.hx, "hy": self.hy, "l": self.l}
        if self.truncation_bc != "dirichlet":
            d["truncation_bc"] = self.truncation_bc
        return d


def _ratio(num, den, what):
    r = num / den
    k = int(round(r))
    if k < 1 or abs(r - k) > _TOL * max(1.0, r):
        raise GridMisaligned(f"{what} = {r:.6g} is not an integer")
    return k


def check_grid(spec: WaveguideSpec, grid: GridSpec):
    """Validate divisibility; returns ``(shift, rows, half_columns)``."""
    shift = _ratio(2.0, grid.hy, "2/hy")
    if spec.variant is Variant.CENTERED:
        # obstacle centres sit on odd y
        _ratio(1.0, grid.hy, "1/hy")
    if spec.variant is not Variant.UNOBSTRUCTED:
        _ratio(spec.a, grid.hx, "a/hx")
    half = _ratio(grid.l, grid.hx, "L/hx")
    if not grid.l > spec.a:
        raise GridMisaligned(f"L = {grid.l} must exceed a = {spec.a}")
    return shift, shift * spec.n, half


def _centres(spec):
    if spec.variant is Variant.CENTERED:
        return np.arange(1, 2 * spec.n, 2, dtype=float)
    if spec.variant is Variant.SEGMENTS:
        return np.arange(2, 2 * spec.n, 2, dtype=float)
    return np.zeros(0)


def column_layout(spec, x, rows, hy):
    """Unknowns of one grid column as a tuple of ``(row, side)`` pairs."""
    dirichlet = spec.wall_bc is WallBC.DIRICHLET
    js = range(1, rows) if dirichlet else range(rows + 1)
    centres = _centres(spec)
    inside = abs(x) <= spec.a + _TOL and len(centres) > 0
    g = float(spec.g(x)) if (inside and spec.variant is Variant.CENTERED) else 0.0
    out = []
    for j in js:
        if not inside:
            out.append((j, REGULAR))
            continue
        d = float(np.min(np.abs(j * hy - centres)))
        if g <= _TOL:
            if d < _TOL:
                out.extend([(j, BELOW), (j, ABOVE)])
            else:
                out.append((j, REGULAR))
        elif d < g - _TOL:
            continue  # interior of a thick obstacle
        else:
            out.append((j, REGULAR))
    return tuple(out)


@dataclass
class DiscreteOperator:
    """Symmetric stiffness ``K`` and diagonal mass ``M`` for ``K u = mu M u``."""

    spec: WaveguideSpec
    grid: GridSpec
    stiffness: sp.csr_matrix
    mass: np.ndarray
    x: np.ndarray
    column: np.ndarray
    row: np.ndarray
    side: np.ndarray
    layouts: list = field(repr=False)
    columns: list = field(repr=False)
    rows: int = 0
    shift: int = 0

    @property
    def size(self):
        return len(self.mass)

    def y(self):
        return self.row * self.grid.hy


def _add_edge(rows, cols, vals, diag, i, j, w):
    diag[i] += w
    if j is None:
        return
    diag[j] += w
    rows.extend((i, j))
    cols.extend((j, i))
    vals.extend((-w, -w))


def _ports(layout):
    """Per row: node for the up-going and down-going vertical edges."""
    up, down = {}, {}
    for k, (j, s) in enumerate(layout):
        if s != BELOW:
            up[j] = k
        if s != ABOVE:
            down[j] = k
    return up, down


def assemble(spec: WaveguideSpec, grid: GridSpec) -> DiscreteOperator:
    shift, rows, half = check_grid(spec, grid)
    hx, hy = grid.hx, grid.hy
    neumann_walls = spec.wall_bc is WallBC.NEUMANN
    # Dirichlet truncation removes the columns at x = +-L; Neumann keeps them
    # as half cells with no edges leaving the domain
    open_ends = grid.truncation_bc == "neumann"
    xs = -grid.l + hx * (np.arange(0, 2 * half + 1) if open_ends else np.arange(1, 2 * half))
    layouts = [column_layout(spec, x, rows, hy) for x in xs]

    offsets = np.cumsum([0] + [len(lay) for lay in layouts])
    n = int(offsets[-1])
    column = np.empty(n, dtype=int)
    row = np.empty(n, dtype=int)
    side = np.empty(n, dtype=int)
    mass = np.empty(n)
    columns = []
    for c, lay in enumerate(layouts):
        idx = np.arange(offsets[c], offsets[c + 1])
        columns.append(idx)
        column[idx] = c
        for k, (j, s) in zip(idx, lay):
            row[k], side[k] = j, s
            vol = hx * hy
            if j in (0, rows):
                vol *= 0.5
            if s != REGULAR:
                vol *= 0.5
            if open_ends and c in (0, len(layouts) - 1):
                vol *= 0.5
            mass[k] = vol

    er, ec, ev = [], [], []
    diag = np.zeros(n)
    wv, wh = hx / hy, hy / hx
    for c, lay in enumerate(layouts):
        base = offsets[c]
        up, down = _ports(lay)
        # vertical edges
        for j, k in up.items():
            if j + 1 in down:
                _add_edge(er, ec, ev, diag, base + k, base + down[j + 1], wv)
            elif j + 1 == rows and not neumann_walls:
                _add_edge(er, ec, ev, diag, base + k, None, wv)
        if not neumann_walls and 1 in down:
            _add_edge(er, ec, ev, diag, base + down[1], None, wv)
        # horizontal edges to the right neighbour (or the truncation boundary)
        by_row = {}
        for k, (j, s) in enumerate(lay):
            by_row.setdefault(j, []).append((s, base + k))
        if c + 1 < len(layouts):
            nbase = offsets[c + 1]
            nrow = {}
            for k, (j, s) in enumerate(layouts[c + 1]):
                nrow.setdefault(j, []).append((s, nbase + k))
        else:
            nrow = None
        for j, here in by_row.items():
            w = wh * (0.5 if j in (0, rows) else 1.0)
            if nrow is None:
                if open_ends:
                    continue
                for s, k in here:
                    _add_edge(er, ec, ev, diag, k, None, w * (0.5 if s != REGULAR else 1.0))
                continue
            there = nrow.get(j)
            if there is None:
                continue
            for s, k in here:
                for t, l in there:
                    if s == REGULAR and t == REGULAR:
                        _add_edge(er, ec, ev, diag, k, l, w)
                    elif s == REGULAR or t == REGULAR or s == t:
                        _add_edge(er, ec, ev, diag, k, l, 0.5 * w)
        if c == 0 and not open_ends:
            for j, here in by_row.items():
                w = wh * (0.5 if j in (0, rows) else 1.0)
                for s, k in here:
                    _add_edge(er, ec, ev, diag, k, None, w * (0.5 if s != REGULAR else 1.0))

    er.extend(range(n))
    ec.extend(range(n))
    ev.extend(diag)
    stiff = sp.coo_matrix((ev, (er, ec)), shape=(n, n)).tocsr()
    stiff.sum_duplicates()
    return DiscreteOperator(spec, grid, stiff, mass, xs, column, row, side, layouts, columns, rows, shift)
