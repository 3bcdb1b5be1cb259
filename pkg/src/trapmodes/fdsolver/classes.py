"""Discrete projection onto ``S_m`` and the class-restricted operator.

Within one grid column the shift ``y -> y + 2`` moves node ``j`` to node
``j + 2/hy``; reflection about a wall maps row ``j`` to ``2M - j`` and
swaps the below/above copies of slit nodes. The discrete projector is
therefore a small matrix per column layout, and it is orthogonal for the
mass inner product and commutes with the assembled stiffness.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from ..geometry import WallBC
from ..symmetry import coefficient, gamma
from .grid import DiscreteOperator


@lru_cache(maxsize=256)
def column_projector(layout, m, big_n, rows, shift, bc):
    """Dense class-``m`` projector acting on the unknowns of one column."""
    index = {key: k for k, key in enumerate(layout)}
    size = len(layout)
    proj = np.zeros((size, size))
    period = 2 * rows
    dirichlet = bc is WallBC.DIRICHLET
    scale = gamma(m, big_n) / (2.0 * big_n)
    for k, (j, s) in enumerate(layout):
        for n in range(-big_n, big_n):
            r = (j + n * shift) % period
            t, sign = s, 1.0
            if r > rows:
                r, t = period - r, -s
                if dirichlet:
                    sign = -1.0
            if dirichlet and r in (0, rows):
                continue
            target = index.get((r, t))
            if target is None:
                continue
            proj[k, target] += scale * coefficient(m, n, big_n) * sign
    proj.setflags(write=False)
    return proj


def _column_proj(op, c, m):
    return column_projector(op.layouts[c], m, op.spec.n, op.rows, op.shift, op.spec.wall_bc)


@lru_cache(maxsize=256)
def _column_basis(layout, vol, m, big_n, rows, shift, bc):
    proj = column_projector(layout, m, big_n, rows, shift, bc)
    d = np.sqrt(np.asarray(vol))
    sym = d[:, None] * proj / d[None, :]
    sym = 0.5 * (sym + sym.T)
    w, v = np.linalg.eigh(sym)
    q = v[:, w > 0.5]
    # fix the sign of each basis vector for reproducible output
    pivots = np.argmax(np.abs(q), axis=0)
    q = q * np.sign(q[pivots, np.arange(q.shape[1])])
    basis = q / d[:, None]
    basis.setflags(write=False)
    return basis


@dataclass
class RestrictedOperator:
    """The stiffness restricted to ``S_m`` in an M-orthonormal basis.

    ``basis`` maps reduced coordinates to grid unknowns, so ``basis @ c`` lifts
    a reduced eigenvector and ``basis.T @ M @ basis`` is the identity.
    """

    parent: DiscreteOperator
    m: int
    matrix: sp.csr_matrix
    basis: sp.csr_matrix = field(repr=False)

    @property
    def size(self):
        return self.matrix.shape[0]

    def lift(self, coords):
        return self.basis @ coords


def restrict(op: DiscreteOperator, m: int) -> RestrictedOperator:
    rows, cols, vals = [], [], []
    offset = 0
    for c, idx in enumerate(op.columns):
        vol = tuple(op.mass[idx])
        basis = _column_basis(op.layouts[c], vol, m, op.spec.n, op.rows, op.shift, op.spec.wall_bc)
        nz = np.nonzero(np.abs(basis) > 0)
        rows.append(idx[nz[0]])
        cols.append(offset + nz[1])
        vals.append(basis[nz])
        offset += basis.shape[1]
    b = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(op.size, offset)
    )
    reduced = (b.T @ op.stiffness @ b).tocsr()
    reduced = ((reduced + reduced.T) * 0.5).tocsr()
    reduced.eliminate_zeros()
    return RestrictedOperator(op, m, reduced, b)


def project_field(op: DiscreteOperator, u, m):
    """Apply the class-``m`` projector column by column."""
    out = np.empty_like(np.asarray(u, dtype=float))
    for c, idx in enumerate(op.columns):
        out[idx] = _column_proj(op, c, m) @ u[idx]
    return out


def class_fractions(op: DiscreteOperator, u):
    u = np.asarray(u, dtype=float)
    total = float(u @ (op.mass * u))
    fr = []
    for m in range(op.spec.n + 1):
        pu = project_field(op, u, m)
        fr.append(float(pu @ (op.mass * pu)) / total)
    return np.array(fr)


def classify_mode(op: DiscreteOperator, u):
    """Return ``(m, fraction)`` for the class carrying most of ``u``'s energy."""
    fr = class_fractions(op, u)
    m = int(np.argmax(fr))
    return m, float(fr[m])
