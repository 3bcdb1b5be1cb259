"""Trapped-mode extraction, decay fits and grid-convergence tables.

Each symmetry class ``m = 1..N`` is solved separately on its restricted
operator, so every candidate mode is already confined to one class; the
classification of the lifted vector is still recomputed from scratch as an
independent check.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import GridMisaligned
from ..geometry import WaveguideSpec
from ..symmetry import threshold as class_threshold
from .classes import classify_mode, restrict
from .eigen import lowest_eigenpairs
from .grid import DiscreteOperator, GridSpec, assemble, check_grid

log = logging.getLogger(__name__)

ACCEPT_FRACTION = 0.9


@dataclass
class ModeResult:
    """One eigenpair of a class-restricted problem.

    ``retained`` means the mode passed the trapping test
    ``mu < threshold - 2 * disc_error`` and sits below the discrete
    continuum edge of its class.
    """

    mu: float
    m: int
    class_energy_fraction: float
    decay_rate: float
    grid: GridSpec
    threshold: float
    disc_error: float = 0.0
    retained: bool = False
    index: int = 0
    vector: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def accepted(self):
        return self.class_energy_fraction >= ACCEPT_FRACTION

    @property
    def predicted_decay(self):
        gap = self.threshold - self.mu
        return float(np.sqrt(gap)) if gap > 0 else 0.0

    def to_dict(self):
        return {
            "m": self.m,
            "index": self.index,
            "mu": self.mu,
            "threshold": self.threshold,
            "fraction": self.class_energy_fraction,
            "decay_rate": self.decay_rate,
            "disc_error": self.disc_error,
            "retained": self.retained,
            "grid": self.grid.to_dict(),
        }


def discrete_threshold(m, big_n, hy, bc):
    """Bottom of the discrete continuum of class ``m``: the transverse
    five-point eigenvalue ``(2/hy^2)(1 - cos(p hy))``."""
    cont = class_threshold(m, big_n, bc)
    p = np.sqrt(cont)
    return float(2.0 / hy**2 * (1.0 - np.cos(p * hy)))


def column_norms(op: DiscreteOperator, u):
    """``||u(x, .)||`` for every grid column (mass-weighted in y)."""
    u = np.asarray(u, dtype=float)
    w = op.mass * u * u / op.grid.hx
    return np.sqrt(np.bincount(op.column, weights=w, minlength=len(op.x)))


def fit_decay(op: DiscreteOperator, u):
    """Exponential rate of ``||u(x, .)||`` in ``a + 1 <= |x| <= L - 1``.

    Under Dirichlet truncation the far field of a trapped mode is
    ``sinh(kappa (L - |x|))`` rather than a bare exponential (``cosh`` for
    Neumann truncation), so ``kappa`` is fitted to that model in log space
    with a free amplitude; a plain slope would be biased by the end effect. Returns ``nan`` if the window
    holds fewer than four columns.
    """
    big_l = op.grid.l
    ax = np.abs(op.x)
    sel = (ax >= op.spec.a + 1.0 - 1e-9) & (ax <= big_l - 1.0 + 1e-9)
    norms = column_norms(op, u)
    sel &= norms > 0
    if np.count_nonzero(sel) < 4:
        return float("nan")
    dist = big_l - ax[sel]
    logs = np.log(norms[sel])

    shape = np.cosh if op.grid.truncation_bc == "neumann" else np.sinh

    def misfit(kappa):
        model = np.log(shape(kappa * dist))
        r = logs - model
        r = r - r.mean()
        return float(r @ r)

    res = minimize_scalar(misfit, bounds=(1e-4, 20.0), method="bounded", options={"xatol": 1e-10})
    return float(res.x)


def _class_spectrum(op, m, count):
    thr = class_threshold(m, op.spec.n, op.spec.wall_bc)
    r = restrict(op, m)
    count = min(count, r.size)
    return lowest_eigenpairs(r, count, shift=0.5 * thr)


def class_eigenvalues(spec: WaveguideSpec, grid: GridSpec, classes, count):
    """``{m: [mu_0, mu_1, ...]}`` of the lowest ``count`` values per class."""
    op = assemble(spec, grid)
    return {m: [mu for mu, _ in _class_spectrum(op, m, count)] for m in classes}


def _coarse_grid(grid, spec):
    coarse = grid.coarsened(2)
    try:
        check_grid(spec, coarse)
    except GridMisaligned:
        return None
    return coarse


def trapped_modes(
    spec: WaveguideSpec,
    grid: GridSpec = GridSpec(),
    k: Optional[int] = None,
    disc_error: Optional[dict] = None,
    keep_vectors: bool = True,
):
    """Lowest eigenpairs of every class ``m = 1..N``, classified and fitted.

    Up to ``k`` (default ``2N``) eigenpairs are computed per class and all
    that lie below the discrete continuum edge are returned, ordered by
    ``(m, mu)``. ``disc_error`` maps ``(m, index)`` to a discretisation error
    estimate; by default it is ``|mu_h - mu_2h|`` from a solve on the grid
    coarsened by two (zero, with a warning, if that grid is misaligned).
    """
    big_n = spec.n
    k = 2 * big_n if k is None else int(k)
    if k < 1:
        raise ValueError("k must be at least 1")
    classes = list(range(1, big_n + 1))
    op = assemble(spec, grid)
    candidates = []
    for m in classes:
        edge = discrete_threshold(m, big_n, grid.hy, spec.wall_bc)
        pairs = [(mu, u) for mu, u in _class_spectrum(op, m, k) if mu < edge]
        candidates.extend((m, i, mu, u) for i, (mu, u) in enumerate(pairs))

    if disc_error is None:
        disc_error = {}
        coarse = _coarse_grid(grid, spec)
        if coarse is None:
            log.warning("grid cannot be coarsened by 2; discretisation error taken as 0")
        elif candidates:
            used = sorted({m for m, *_ in candidates})
            counts = max(i for _, i, _, _ in candidates) + 1
            coarse_vals = class_eigenvalues(spec, coarse, used, counts)
            for m, i, mu, _ in candidates:
                vals = coarse_vals[m]
                disc_error[(m, i)] = abs(mu - vals[i]) if i < len(vals) else float("nan")

    out = []
    for m, i, mu, u in candidates:
        thr = class_threshold(m, big_n, spec.wall_bc)
        mc, frac = classify_mode(op, u)
        eps = float(disc_error.get((m, i), 0.0))
        retained = bool(np.isfinite(eps) and mu < thr - 2.0 * eps and mc == m and frac >= ACCEPT_FRACTION)
        out.append(
            ModeResult(
                mu=float(mu),
                m=mc,
                class_energy_fraction=frac,
                decay_rate=fit_decay(op, u),
                grid=grid,
                threshold=thr,
                disc_error=eps,
                retained=retained,
                index=i,
                vector=u if keep_vectors else None,
            )
        )
    return out


def _observed_order(v):
    """Order and Richardson value from three values on grids ``h, h/2, h/4``."""
    d1, d2 = v[1] - v[0], v[2] - v[1]
    if d1 == 0.0 or d2 == 0.0 or d1 * d2 < 0:
        return float("nan"), float("nan")
    order = float(np.log2(abs(d1 / d2)))
    if order <= 0:
        return order, float("nan")
    return order, float(v[2] + d2 / (2.0**order - 1.0))


def convergence_study(spec: WaveguideSpec, grids: Sequence[GridSpec], count: int = 1):
    """Per-mode eigenvalue table across grids.

    ``grids`` must contain at least two mesh sizes at the reference length
    ``L`` (that of the first grid) and at least two distinct values of ``L``.
    Returns a list of row dictionaries keyed by ``m`` and ``index`` with the
    raw eigenvalues, the Richardson estimate and observed order (from the
    three finest grids at the reference ``L``; with only two, order 1 is
    assumed, which is conservative when slit tips limit the accuracy),
    and the change in ``mu`` between the two largest ``L`` at their common
    finest mesh.
    """
    grids = list(grids)
    if not grids:
        raise ValueError("no grids given")
    ref_l = grids[0].l
    at_ref = sorted({g for g in grids if g.l == ref_l}, key=lambda g: -g.hy)
    lengths = sorted({g.l for g in grids})
    if len(at_ref) < 2 or len(lengths) < 2:
        raise ValueError("need two mesh sizes at the reference L and two values of L")
    classes = list(range(1, spec.n + 1))
    values = {g: class_eigenvalues(spec, g, classes, count) for g in sorted(set(grids), key=lambda g: (g.l, -g.hy))}

    # L sensitivity on the finest mesh shared by the two longest domains
    l_lo, l_hi = lengths[-2], lengths[-1]
    shared = sorted(
        {(g.hx, g.hy) for g in grids if g.l == l_lo} & {(g.hx, g.hy) for g in grids if g.l == l_hi},
        key=lambda h: h[1],
    )
    rows = []
    for m in classes:
        for i in range(count):
            seq = [values[g][m][i] if i < len(values[g][m]) else float("nan") for g in at_ref]
            if len(seq) >= 3:
                order, extrap = _observed_order(seq[-3:])
            else:
                order, extrap = 1.0, seq[-1] + (seq[-1] - seq[-2])
            if shared:
                hx, hy = shared[0]
                pick = {g.l: g for g in grids if (g.hx, g.hy) == (hx, hy)}
                l_change = abs(values[pick[l_hi]][m][i] - values[pick[l_lo]][m][i])
            else:
                l_change = float("nan")
            rows.append(
                {
                    "m": m,
                    "index": i,
                    "threshold": class_threshold(m, spec.n, spec.wall_bc),
                    "h": [g.hy for g in at_ref],
                    "mu": seq,
                    "richardson": extrap,
                    "observed_order": order,
                    "disc_error": abs(seq[-1] - seq[-2]),
                    "l_pair": (l_lo, l_hi),
                    "l_change": l_change,
                }
            )
    return rows
