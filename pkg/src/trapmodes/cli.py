"""Command-line driver: ``certify``, ``solve``, ``verify`` and ``report``.

Every command reads a JSON config (see :mod:`trapmodes.config`), writes its
artifacts into ``--out`` and returns an exit status:

* 0 - success (including "nothing to certify" and coarse-quadrature warnings)
* 1 - configuration, grid or input-directory problems
* 2 - a class failed certification, an identity residual exceeded tolerance,
  or a certified class has no retained trapped mode
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .certify import certify_all
from .errors import GridMisaligned, TrapModesError
from .fdsolver import assemble, check_grid, convergence_study, trapped_modes
from .geometry import Variant, WallBC, WaveguideSpec
from .symmetry import TransverseFunction, decomposition_residuals
from .testfun import admissible_classes
from .variational import moments, verify_identities

log = logging.getLogger("trapmodes")

SIG_DIGITS = 12
IDENTITY_TOL = 1e-9
DECOMPOSITION_TOL = 1e-10
N_RANDOM = 20
L_STEP = 4.0

SUMMARY_COLUMNS = ["variant", "wall_bc", "N", "a", "profile", "m", "threshold", "q_star", "margin", "lambda", "alpha", "b"]
MODE_COLUMNS = ["N", "variant", "wall_bc", "m", "mu", "threshold", "q_star", "fraction", "decay_rate", "hx", "hy", "L"]
RESIDUAL_COLUMNS = ["suite", "N", "m", "profile", "check", "residual", "tolerance", "status"]
CONVERGENCE_COLUMNS = ["m", "index", "threshold", "h", "mu", "richardson", "observed_order", "disc_error", "L_pair", "L_change"]


# -- serialisation ---------------------------------------------------------


def _num(x):
    """Round to ``SIG_DIGITS`` significant digits; non-finite -> ``None``."""
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        r = _num(v)
        return "nan" if r is None else repr(r)
    if isinstance(v, (list, tuple)):
        return ";".join(_cell(x) for x in v)
    return str(v)


def write_json(path: Path, obj):
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, columns, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row[c]) for c in columns])


def _spec_columns(spec: WaveguideSpec):
    return {"variant": spec.variant.value, "wall_bc": spec.wall_bc.value, "N": spec.n, "a": spec.a}


# -- certify ----------------------------------------------------------------


def run_certify(cfg: cfgmod.RunConfig, out: Path):
    spec = cfg.spec
    certs = certify_all(spec, cfg.budget, raise_on_failure=False)
    doc = {"config": cfg.to_dict(), "certificates": [c.to_dict() for c in certs]}
    if not certs:
        doc["notice"] = "no admissible symmetry classes for this configuration"
        print(f"notice: {doc['notice']}", file=sys.stderr)
    write_json(out / "certificates.json", doc)
    rows = []
    for c in certs:
        row = _spec_columns(spec)
        row.update(
            profile=spec.profile.label(),
            m=c.m,
            threshold=c.threshold,
            q_star=c.q_star,
            margin=c.margin,
            **{"lambda": c.params.lam, "alpha": c.params.alpha, "b": c.params.b},
        )
        rows.append(row)
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, rows)
    return certs


def cmd_certify(cfg, out: Path, **_):
    certs = run_certify(cfg, out)
    bad = [c for c in certs if not c.valid]
    for c in certs:
        status = "certified" if c.valid else "FAILED"
        print(f"m={c.m}: q*={c.q_star:.10g} threshold={c.threshold:.10g} margin={c.margin:.3e} {status}")
    return 2 if bad else 0


# -- solve ------------------------------------------------------------------


def _study_grids(spec, grid):
    coarse = grid.coarsened(2)
    try:
        check_grid(spec, coarse)
    except GridMisaligned:
        return None
    return [coarse, grid, replace(grid, l=grid.l + L_STEP)]


def cmd_solve(cfg, out: Path, study=True, **_):
    spec, grid = cfg.spec, cfg.grid
    check_grid(spec, grid)
    certs = certify_all(spec, cfg.budget, raise_on_failure=False)
    q_star = {c.m: c.q_star for c in certs if c.valid}
    modes = trapped_modes(spec, grid, cfg.modes_k)
    op = assemble(spec, grid)

    rows, fields = [], []
    for r in modes:
        if not r.retained:
            continue
        row = _spec_columns(spec)
        row.update(
            m=r.m,
            mu=r.mu,
            threshold=r.threshold,
            q_star=q_star.get(r.m, float("nan")),
            fraction=r.class_energy_fraction,
            decay_rate=r.decay_rate,
            hx=grid.hx,
            hy=grid.hy,
            L=grid.l,
        )
        rows.append(row)
        name = f"field_m{r.m}_{r.index}.csv"
        fields.append(name)
        y = op.row * grid.hy
        x = op.x[op.column]
        frows = [{"x": xi, "y": yi, "side": int(si), "u": ui} for xi, yi, si, ui in zip(x, y, op.side, r.vector)]
        write_csv(out / name, ["x", "y", "side", "u"], frows)
    write_csv(out / "modes.csv", MODE_COLUMNS, rows)

    conv = []
    if study:
        grids = _study_grids(spec, grid)
        if grids is None:
            log.warning("grid cannot be coarsened by 2; convergence study skipped")
        else:
            count = max([r.index + 1 for r in modes] + [1])
            conv = convergence_study(spec, grids, count)
            crow = [
                {
                    "m": c["m"],
                    "index": c["index"],
                    "threshold": c["threshold"],
                    "h": c["h"],
                    "mu": c["mu"],
                    "richardson": c["richardson"],
                    "observed_order": c["observed_order"],
                    "disc_error": c["disc_error"],
                    "L_pair": list(c["l_pair"]),
                    "L_change": c["l_change"],
                }
                for c in conv
            ]
            write_csv(out / "convergence.csv", CONVERGENCE_COLUMNS, crow)

    doc = {
        "config": cfg.to_dict(),
        "modes": [dict(r.to_dict(), q_star=q_star.get(r.m)) for r in modes],
        "fields": fields,
        "convergence": conv,
    }
    write_json(out / "modes.json", doc)

    retained = {r.m for r in modes if r.retained}
    missing = sorted(set(q_star) - retained)
    for r in modes:
        tag = "retained" if r.retained else "rejected"
        print(f"m={r.m} #{r.index}: mu={r.mu:.10g} threshold={r.threshold:.10g} fraction={r.class_energy_fraction:.4f} {tag}")
    if missing:
        print(f"certified classes without a retained mode: {missing}", file=sys.stderr)
        return 2
    return 0


# -- verify -----------------------------------------------------------------


def _random_smooth(rng, n):
    """A random trigonometric polynomial plus a quadratic on ``[0, 2N]``."""
    q = np.arange(1, 9)
    ca = rng.standard_normal(len(q)) / q
    cb = rng.standard_normal(len(q)) / q
    c0, c1, c2 = rng.standard_normal(3)
    width = 2.0 * n

    def f(y):
        y = np.asarray(y, dtype=float)
        t = np.pi * y[..., None] * q / width
        return c0 + c1 * y / width + c2 * (y / width) ** 2 + np.cos(t) @ ca + np.sin(t) @ cb

    return f


def run_verify(cfg, coarse=False):
    spec = cfg.spec
    rng = np.random.default_rng(cfg.seed)
    rows = []
    decomposition = {"completeness": 0.0, "orthogonality": 0.0, "idempotence": 0.0}
    for _ in range(N_RANDOM):
        f = TransverseFunction.from_callable(_random_smooth(rng, spec.n), spec.n)
        g = TransverseFunction.from_callable(_random_smooth(rng, spec.n), spec.n)
        res = decomposition_residuals(f, spec.wall_bc, g)
        for k, v in res.items():
            decomposition[k] = max(decomposition[k], v)
    for k, v in decomposition.items():
        rows.append(
            {"suite": "decomposition", "N": spec.n, "m": "all", "profile": "random", "check": k,
             "residual": v, "tolerance": DECOMPOSITION_TOL, "status": "pass" if v < DECOMPOSITION_TOL else "fail"}
        )

    if spec.variant is Variant.CENTERED and spec.wall_bc is WallBC.NEUMANN:
        kw = {"rtol": 1e-2, "order": 2} if coarse else {}
        for m in admissible_classes(spec):
            rep = verify_identities(spec, m, **kw)
            for k, v in rep["residuals"].items():
                rows.append(
                    {"suite": "identities", "N": spec.n, "m": m, "profile": rep["profile"], "check": k,
                     "residual": v, "tolerance": IDENTITY_TOL, "status": "pass" if v < IDENTITY_TOL else "fail"}
                )
            for k, v in rep["printed"].items():
                rows.append(
                    {"suite": "printed_constants", "N": spec.n, "m": m, "profile": rep["profile"], "check": k,
                     "residual": v, "tolerance": float("nan"), "status": "info"}
                )
    else:
        log.info("closed-form identities apply to centered obstacles with Neumann walls only; skipped")
    return rows


def cmd_verify(cfg, out: Path, coarse=False, **_):
    rows = run_verify(cfg, coarse)
    write_csv(out / "residuals.csv", RESIDUAL_COLUMNS, rows)
    write_json(out / "residuals.json", {"config": cfg.to_dict(), "coarse_quadrature": coarse, "rows": rows})
    failed = [r for r in rows if r["status"] == "fail"]
    for r in failed:
        print(f"warning: {r['suite']} {r['check']} m={r['m']}: residual {r['residual']:.3e}", file=sys.stderr)
    worst = max((r["residual"] for r in rows if r["status"] != "info"), default=0.0)
    print(f"{len(rows)} checks, {len(failed)} above tolerance, worst residual {worst:.3e}")
    if failed and not coarse:
        return 2
    return 0


# -- report -----------------------------------------------------------------


def _slices(spec, m, params, points=61):
    mom = moments(spec, m, params["b"])
    out = []
    for lam in np.logspace(-2, 4, points):
        q = mom.p**2 + float(mom.quotient_excess(lam, params["alpha"]))
        out.append({"m": m, "slice": "lambda", "lambda": lam, "alpha": params["alpha"], "b": params["b"], "quotient": q})
    for alpha in np.logspace(-4, 2, points):
        q = mom.p**2 + float(mom.quotient_excess(params["lambda"], alpha))
        out.append({"m": m, "slice": "alpha", "lambda": params["lambda"], "alpha": alpha, "b": params["b"], "quotient": q})
    return out


def cmd_report(cfg, out: Path, **_):
    cert_path = out / "certificates.json"
    modes_path = out / "modes.json"
    if not out.is_dir() or not any(out.iterdir()):
        print(f"error: output directory {out} is missing or empty", file=sys.stderr)
        return 1
    if not cert_path.exists():
        print(f"error: {cert_path} not found; run certify first", file=sys.stderr)
        return 1
    certdoc = json.loads(cert_path.read_text())
    spec = cfgmod.from_dict(_strip_defaults(certdoc["config"])).spec
    modes = []
    if modes_path.exists():
        modes = json.loads(modes_path.read_text())["modes"]
    else:
        print("warning: no solver output found; report lists certificates only", file=sys.stderr)

    by_m = {}
    for md in modes:
        if md["retained"]:
            by_m.setdefault(md["m"], md)

    lines = [
        "# Trapped-mode report",
        "",
        f"- variant: {spec.variant.value}",
        f"- walls: {spec.wall_bc.value}",
        f"- N = {spec.n}, a = {spec.a:g}, profile = {spec.profile.label()}",
        "",
        "| m | threshold | q_star | margin | valid | mu | mu <= q_star + eps | fraction | decay | sqrt(threshold - mu) |",
        "|---|---|---|---|---|---|---|---|---|---|",
    ]
    slices = []
    for c in certdoc["certificates"]:
        m = c["m"]
        md = by_m.get(m)
        if md is not None:
            eps = md["disc_error"] or 0.0
            ok = "yes" if md["mu"] <= c["q_star"] + eps else "no"
            pred = math.sqrt(max(c["threshold"] - md["mu"], 0.0))
            tail = f"{md['mu']:.8f} | {ok} | {md['fraction']:.4f} | {md['decay_rate']:.4f} | {pred:.4f}"
        else:
            tail = "- | - | - | - | -"
        lines.append(
            f"| {m} | {c['threshold']:.8f} | {c['q_star']:.8f} | {c['margin']:.3e} | {'yes' if c['valid'] else 'no'} | {tail} |"
        )
        slices.extend(_slices(spec, m, c["params"]))
    if not certdoc["certificates"]:
        lines.append("")
        lines.append("No admissible classes.")
    fields = json.loads(modes_path.read_text()).get("fields", []) if modes_path.exists() else []
    lines += ["", "## Plot data", "", "- `quotient_slices.csv`: quotient against lambda and alpha through the optimum"]
    lines += [f"- `{name}`: eigenfunction samples (x, y, side, u)" for name in fields]
    (out / "report.md").write_text("\n".join(lines) + "\n")
    write_csv(out / "quotient_slices.csv", ["m", "slice", "lambda", "alpha", "b", "quotient"], slices)
    print(f"wrote {out / 'report.md'}")
    return 0


def _strip_defaults(resolved):
    keep = ("variant", "wall_bc", "n", "a", "profile", "budget", "seed", "grid", "k")
    return {k: resolved[k] for k in keep if k in resolved}


# -- entry point ------------------------------------------------------------


COMMANDS = {"certify": cmd_certify, "solve": cmd_solve, "verify": cmd_verify, "report": cmd_report}


def build_parser():
    p = argparse.ArgumentParser(prog="trapmodes", description="Certify and compute trapped modes in obstructed strips.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, required=name != "report", help="JSON run configuration")
        s.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        s.add_argument("--budget", type=int, help="optimizer evaluation budget")
        s.add_argument("--grid", help="finite-difference grid as hx,hy,L")
        s.add_argument("--k", type=int, help="eigenpairs computed per class")
        s.add_argument("-v", "--verbose", action="store_true")
        if name == "verify":
            s.add_argument("--coarse-quadrature", action="store_true", help="use a deliberately coarse rule")
        if name == "solve":
            s.add_argument("--no-study", action="store_true", help="skip the convergence study")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = None
        if args.config is not None:
            cfg = cfgmod.with_overrides(cfgmod.load(args.config), args.budget, args.grid, args.k)
    except TrapModesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = args.out
    if args.command != "report":
        out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.command](
            cfg,
            out,
            coarse=getattr(args, "coarse_quadrature", False),
            study=not getattr(args, "no_study", False),
        )
    except (GridMisaligned, cfgmod.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
