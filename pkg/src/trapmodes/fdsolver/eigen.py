"""Lowest eigenpairs of sparse symmetric pencils by shift-invert Lanczos."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from ..errors import ConvergenceFailure

EIG_RTOL = 1e-8
_SEED = 20240607


def _as_standard(op):
    """``(A, scale)`` with ``A`` symmetric and eigenvectors ``u = scale * w``."""
    if hasattr(op, "basis"):
        return op.matrix, None
    if hasattr(op, "stiffness"):
        s = 1.0 / np.sqrt(op.mass)
        d = sp.diags(s)
        return (d @ op.stiffness @ d).tocsc(), s
    mat = sp.csc_matrix(op) if sp.issparse(op) else np.asarray(op)
    return mat, None


def lowest_eigenpairs(op, k: int, shift: float = 0.0, max_rounds: int = 6):
    """The ``k`` smallest eigenpairs, nondecreasing.

    ``op`` is a :class:`DiscreteOperator` (pencil ``K u = mu M u``, vectors
    returned M-orthonormal), a :class:`RestrictedOperator` or a plain
    symmetric positive semidefinite matrix; restricted eigenvectors are
    lifted back to grid unknowns. Eigenvalues closest to
    ``shift`` are computed and the window is widened until it provably
    contains the bottom of the spectrum.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    mat, scale = _as_standard(op)
    n = mat.shape[0]
    if n <= max(2 * k + 1, 40):
        dense = mat.toarray() if sp.issparse(mat) else np.asarray(mat)
        w, v = np.linalg.eigh(0.5 * (dense + dense.T))
        w, v = w[:k], v[:, :k]
    else:
        v0 = np.random.default_rng(_SEED).standard_normal(n)
        want = k
        sigma = shift
        # a shift sitting exactly on an eigenvalue (0 for pure Neumann
        # problems) makes the factorisation singular; step just below it
        nudge = 1e-6 * max(float(abs(mat.diagonal()).max()), 1.0)
        for rnd in range(max_rounds):
            nev = min(want, n - 2)
            try:
                w, v = eigsh(mat, k=nev, sigma=sigma, which="LM", v0=v0, tol=EIG_RTOL * 1e-2, maxiter=20 * n)
            except (ArpackNoConvergence, ArpackError) as exc:
                raise ConvergenceFailure(
                    f"shift-invert Lanczos failed: {exc}", {"k": nev, "shift": shift, "size": n, "round": rnd}
                ) from exc
            except RuntimeError as exc:
                if "singular" not in str(exc) or sigma != shift:
                    raise ConvergenceFailure(f"shift-invert factorisation failed: {exc}", {"shift": sigma}) from exc
                sigma = shift - nudge
                continue
            order = np.argsort(w)
            w, v = w[order], v[:, order]
            radius = float(np.max(np.abs(w - sigma)))
            # everything within `radius` of the shift was found; the spectrum is >= 0
            if sigma - radius <= 0.0 or nev >= n - 2:
                break
            want *= 2
        else:
            raise ConvergenceFailure(
                "could not bracket the bottom of the spectrum", {"k": k, "shift": shift, "size": n}
            )
        w, v = w[:k], v[:, :k]
    if scale is not None:
        v = v * scale[:, None]
    if hasattr(op, "basis"):
        v = op.basis @ v
    # deterministic sign: largest-magnitude entry positive
    piv = np.argmax(np.abs(v), axis=0)
    v = v * np.sign(v[piv, np.arange(v.shape[1])])
    return [(float(w[i]), v[:, i]) for i in range(len(w))]
