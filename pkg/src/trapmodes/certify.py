"""Parameter search and existence certificates.

The quotient of a trial function in ``S_m`` bounds the bottom of the
spectrum of the Laplacian restricted to ``S_m`` from above; a value strictly
below the class threshold therefore certifies an eigenvalue there.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import CertificationFailed
from .geometry import Variant, WallBC, WaveguideSpec
from .symmetry import threshold as class_threshold
from .testfun import TestParams, admissible_classes, transverse_profile
from .variational import QUAD_RTOL, QuotientBreakdown, moments, quotient_closed_form, quotient_quadrature

log = logging.getLogger(__name__)

LAMBDA_GRID = np.logspace(-2, 4, 25)
ALPHA_GRID = np.logspace(-4, 2, 25)
B_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 0.95)
DEFAULT_BUDGET = 2000
CERT_SLACK = 10.0 * QUAD_RTOL

# refinement box in (log10 lam, log10 alpha, b / a)
_BOUNDS = [(-4.0, 6.0), (-8.0, 3.0), (0.0, 0.999)]


@dataclass(frozen=True)
class BoundCertificate:
    spec: WaveguideSpec
    m: int
    threshold: float
    q_star: float
    params: TestParams
    margin: float
    verified_by_quadrature: bool
    breakdown: QuotientBreakdown = field(repr=False, default=None)
    evaluations: int = 0

    @property
    def valid(self):
        return self.verified_by_quadrature and self.margin > CERT_SLACK * self.threshold

    def to_dict(self):
        return {
            "spec": self.spec.to_dict(),
            "m": self.m,
            "threshold": self.threshold,
            "q_star": self.q_star,
            "margin": self.margin,
            "relative_margin": self.margin / self.threshold,
            "params": self.params.to_dict(),
            "verified_by_quadrature": self.verified_by_quadrature,
            "valid": self.valid,
            "evaluations": self.evaluations,
            "breakdown": self.breakdown.to_dict() if self.breakdown is not None else None,
        }


def _grid_search(spec, m):
    lam, alpha = np.meshgrid(LAMBDA_GRID, ALPHA_GRID, indexing="ij")
    best = None
    for frac in B_FRACTIONS:
        b = frac * spec.a
        vals = moments(spec, m, b).quotient_excess(lam, alpha)
        i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
        if best is None or vals[i, j] < best[0]:
            best = (float(vals[i, j]), float(lam[i, j]), float(alpha[i, j]), b)
    return best


def optimize_params(spec: WaveguideSpec, m: int, budget: int = DEFAULT_BUDGET):
    """Coarse grid over ``(lam, alpha, b)`` followed by Nelder-Mead refinement.

    ``budget`` bounds the number of refinement evaluations; with ``budget <= 1``
    the best grid point is returned. Fully deterministic. Returns
    ``(params, breakdown)`` with the breakdown from quadrature.
    """
    params, breakdown, _ = _search(spec, m, budget)
    return params, breakdown


def _search(spec, m, budget):
    transverse_profile(spec, m)  # raises InadmissibleClass early
    a = spec.a
    f0, lam0, alpha0, b0 = _grid_search(spec, m)
    best = TestParams(lam0, alpha0, b0)
    evals = 0
    if budget > 1:

        def objective(z):
            b = min(max(z[2], 0.0), _BOUNDS[2][1]) * a
            return float(moments(spec, m, b).quotient_excess(10.0 ** z[0], 10.0 ** z[1]))

        z0 = np.array([np.log10(lam0), np.log10(alpha0), b0 / a])
        steps = np.diag([0.25, 0.25, 0.1])
        simplex = np.vstack([z0, z0 + steps])
        # keep the starting simplex inside the box
        simplex[:, 2] = np.clip(simplex[:, 2], 0.0, _BOUNDS[2][1])
        res = minimize(
            objective,
            z0,
            method="Nelder-Mead",
            bounds=_BOUNDS,
            options={"maxfev": int(budget), "initial_simplex": simplex, "xatol": 1e-10, "fatol": 0.0},
        )
        evals = int(res.nfev)
        if res.fun < f0:
            z = res.x
            best = TestParams(10.0 ** z[0], 10.0 ** z[1], min(max(z[2], 0.0), _BOUNDS[2][1]) * a)
    return best, quotient_quadrature(spec, m, best), evals


def certify(spec: WaveguideSpec, m: int, budget: int = DEFAULT_BUDGET, raise_on_failure=True) -> BoundCertificate:
    params, _, evals = _search(spec, m, budget)
    quad = quotient_quadrature(spec, m, params, rtol=QUAD_RTOL * 1e-2)
    thr = class_threshold(m, spec.n, spec.wall_bc)
    # margin from the excess avoids cancellation against p^2 (= threshold)
    margin = -quad.numerator_excess / quad.denominator
    cert = BoundCertificate(spec, m, thr, quad.quotient, params, margin, quad.converged, quad, evals)
    if spec.variant is Variant.CENTERED and spec.wall_bc is WallBC.NEUMANN:
        cf = quotient_closed_form(spec, m, params)
        if abs(cf.quotient - quad.quotient) > 1e-8 * quad.quotient:
            log.warning("closed form and quadrature disagree for m=%d: %.15g vs %.15g", m, cf.quotient, quad.quotient)
    if raise_on_failure and not cert.valid:
        raise CertificationFailed(f"class m={m}: best margin {margin:.3e} (threshold {thr:.6g})", [cert])
    return cert


def certify_all(spec: WaveguideSpec, budget: int = DEFAULT_BUDGET, workers: int = 1, raise_on_failure=True):
    """Certificates for every admissible class, ordered by ``m``."""
    classes = admissible_classes(spec)

    def job(m):
        return certify(spec, m, budget, raise_on_failure=False)

    if workers > 1 and len(classes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            certs = list(pool.map(job, classes))
    else:
        certs = [job(m) for m in classes]
    bad = [c for c in certs if not c.valid]
    if raise_on_failure and bad:
        ms = ", ".join(str(c.m) for c in bad)
        raise CertificationFailed(f"classes {ms} not certified", certs)
    return certs
