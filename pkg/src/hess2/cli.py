"""Command-line entry points: campaigns, solves, verdicts, identity scans.

Reports are deterministic for a fixed configuration and seed: floats are
written with repr precision, JSON keys are sorted, and no timestamps or
machine identifiers enter any output file.

Exit codes: 0 all checks passed, 1 numerical or invariant failure,
2 hypothesis not met or bad input, 3 solver failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, domain, fields, matineq, solver
from .errors import (
    HypothesisError,
    InputError,
    NumericalError,
    SolverError,
    ToolkitError,
)

REPORT_SCHEMA = 1


@dataclass(frozen=True)
class RunConfig:
    """Resolved options of one command, as a flat canonical key/value map."""

    command: str
    options: dict = field(default_factory=dict)

    def canonical_text(self) -> str:
        lines = [f"command={self.command}"]
        lines += [f"{k}={self.options[k]}" for k in sorted(self.options)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        command = ""
        options = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"bad config line: {line!r}")
            key, value = line.split("=", 1)
            if key == "command":
                command = value
            else:
                options[key] = value
        return cls(command=command, options=options)


def _fmt(x) -> str:
    return repr(float(x))


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


def parse_dims(text: str) -> tuple[int, ...]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(tok) for tok in text.split(","))


def parse_source(text: str) -> solver.SourceTerm:
    name, _, arg = text.partition(":")
    if name == "const":
        return solver.constant_source(float(arg) if arg else 1.0)
    if name == "exp-dec":
        return solver.exp_decreasing_source(float(arg)) if arg else solver.exp_decreasing_source()
    if name == "exp-inc":
        return solver.exp_increasing_source(float(arg)) if arg else solver.exp_increasing_source()
    if name == "eigen":
        return solver.eigen_source(float(arg))
    if name == "power":
        lam, p = (float(tok) for tok in arg.split(","))
        return solver.power_source(lam, p)
    raise InputError(f"unknown source preset {text!r}")


def parse_domain(text: str) -> domain.DomainSpec:
    name, _, arg = text.partition(":")
    if name in ("disk", "ball"):
        return domain.ball(float(arg) if arg else 1.0)
    if name == "ellipse":
        a, b = (float(tok) for tok in arg.split(","))
        return domain.ellipse(a, b)
    if name == "polygon":
        verts = [[float(v) for v in pair.split(",")] for pair in arg.split(";")]
        return domain.convex_polygon(verts)
    raise InputError(f"unknown domain {text!r}")


def _domain_label(spec: domain.DomainSpec) -> str:
    if spec.kind == "ball":
        return f"disk:{spec.radius:g}"
    if spec.kind == "ellipse":
        return f"ellipse:{spec.semi_axes[0]:g},{spec.semi_axes[1]:g}"
    return f"polygon:{len(spec.vertices)}v"


# ----------------------------------------------------------------------
# ineq
# ----------------------------------------------------------------------

def cmd_ineq(args) -> int:
    dims = parse_dims(args.dims)
    config = RunConfig("ineq", {"seed": args.seed, "dims": args.dims,
                                "count": args.count, "sign": args.sign,
                                "scale": args.scale, "records": args.records})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = matineq.inequality_campaign(args.seed, dims, args.count, args.sign,
                                         scale=args.scale,
                                         keep_records=args.records)
    summary = {
        "schema": REPORT_SCHEMA,
        "config": config.canonical_text(),
        "sign": args.sign,
        "ok": result.ok,
        "per_dim": {
            str(s.dim): {
                "count": s.count,
                "min_residual_over_scale": s.min_residual_over_scale,
                "max_residual_over_scale": s.max_residual_over_scale,
                "max_discrepancy_over_scale": s.max_discrepancy_over_scale,
                "ok": s.ok,
            } for s in result.summaries
        },
    }
    _write_json(out / "summary.json", summary)
    if args.records:
        for dim, table in sorted(result.records.items()):
            path = out / f"records_dim{dim}.csv"
            with path.open("w") as fh:
                fh.write("seed,dim,sign,index,lhs,rhs,residual_direct,"
                         "residual_closed,scale\n")
                prefix = f"{args.seed},{dim},{args.sign},"
                for i, row in enumerate(table):
                    fh.write(prefix + f"{i}," + ",".join(_fmt(v) for v in row) + "\n")
    for s in result.summaries:
        status = "ok" if s.ok else "FAIL"
        print(f"dim {s.dim}: min {s.min_residual_over_scale:+.3e} "
              f"max {s.max_residual_over_scale:+.3e} "
              f"disc {s.max_discrepancy_over_scale:.3e} [{status}]")
    if not result.ok:
        bad = [s.dim for s in result.summaries if not s.ok]
        print(f"invariant violations in dims {bad} (seed {args.seed})")
        return 1
    return 0


# ----------------------------------------------------------------------
# solve
# ----------------------------------------------------------------------

def _solve_config(args) -> solver.SolveConfig:
    kwargs = {}
    if getattr(args, "nodes", None):
        kwargs["radial_nodes"] = args.nodes
    return solver.SolveConfig(**kwargs)


def _solve_from_args(args):
    """Returns (solution, source, extras) for solve/verify style commands."""
    cfg = _solve_config(args)
    if args.eigen:
        lam, prof = solver.solve_eigen_radial(args.dim, args.radius, cfg)
        return prof, solver.eigen_source(lam), {"lambda1": lam}
    f = parse_source(args.f)
    if args.radial:
        prof = solver.solve_radial(args.dim, args.radius, f, cfg)
        return prof, f, {}
    spec = parse_domain(args.domain)
    sol = solver.solve_grid2d(spec, f, args.h, cfg)
    return sol, f, {}


def _solution_summary(sol, f, extras) -> dict:
    report = solver.admissibility_report(sol)
    if isinstance(sol, solver.RadialProfile):
        body = {
            "kind": "radial", "dim": sol.dim, "radius": sol.radius,
            "u_min": sol.u_min,
            "boundary_gradient_min": sol.boundary_gradient,
            "boundary_gradient_max": sol.boundary_gradient,
            "iterations": sol.picard_iterations,
            "ode_residual_sup": sol.ode_residual_sup,
        }
    else:
        pts, vals = analysis.boundary_gradient_samples(sol)
        body = {
            "kind": "grid2d", "h": sol.mask.h,
            "domain": _domain_label(sol.mask.spec),
            "u_min": sol.u_min,
            "boundary_gradient_min": float(np.min(vals)),
            "boundary_gradient_max": float(np.max(vals)),
            "iterations": sol.newton_iterations,
            "newton_residual_sup": sol.residual_sup,
        }
    body.update(extras)
    body["source"] = f.label()
    body["admissibility"] = {
        "min_s1": report.min_s1, "min_s2": report.min_s2,
        "min_cofactor_eigenvalue": report.min_cofactor_eigenvalue,
        "admissible": report.admissible,
    }
    return body


def _write_profile_data(sol, path: Path, pf_list=()) -> None:
    """Whitespace-separated columns for plotting: positions, u, then fields."""
    with path.open("w") as fh:
        if isinstance(sol, solver.RadialProfile):
            header = "# r u up" + "".join(f" phi_a{pf.alpha:g}_g{pf.gamma:g}"
                                          for pf in pf_list)
            fh.write(header + "\n")
            cols = [sol.r, sol.u, sol.up] + [pf.phi for pf in pf_list]
            for row in zip(*cols):
                fh.write(" ".join(_fmt(v) for v in row) + "\n")
        else:
            header = "# x y u" + "".join(f" phi_a{pf.alpha:g}_g{pf.gamma:g}"
                                         for pf in pf_list)
            fh.write(header + "\n")
            cols = [sol.mask.node_xy[:, 0], sol.mask.node_xy[:, 1], sol.u]
            cols += [pf.phi for pf in pf_list]
            for row in zip(*cols):
                fh.write(" ".join(_fmt(v) for v in row) + "\n")


def cmd_solve(args) -> int:
    config = RunConfig("solve", {
        "mode": "eigen" if args.eigen else ("radial" if args.radial else "grid2d"),
        "dim": args.dim, "radius": args.radius, "f": args.f,
        "domain": args.domain, "h": args.h, "nodes": args.nodes})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sol, f, extras = _solve_from_args(args)
    summary = {"schema": REPORT_SCHEMA, "config": config.canonical_text()}
    summary.update(_solution_summary(sol, f, extras))
    solver.save_solution(sol, out / "solution.npz")
    _write_json(out / "summary.json", summary)
    _write_profile_data(sol, out / "profile.dat")
    print(f"u_min = {summary['u_min']:.9f}")
    print(f"boundary |grad u| in [{summary['boundary_gradient_min']:.9f}, "
          f"{summary['boundary_gradient_max']:.9f}]")
    adm = summary["admissibility"]
    print(f"admissible = {adm['admissible']} "
          f"(min S1 {adm['min_s1']:.3e}, min S2 {adm['min_s2']:.3e}, "
          f"min cofactor {adm['min_cofactor_eigenvalue']:.3e})")
    if "lambda1" in extras:
        print(f"lambda1 = {extras['lambda1']:.9f} "
              f"(equation residual {summary['ode_residual_sup']:.3e})")
    return 0


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------

def _gamma_list(text: str) -> tuple[float, ...]:
    if text == "both":
        return (0.5, 1.0)
    value = float(text)
    return (value,)


def cmd_verify(args) -> int:
    config = RunConfig("verify", {
        "app": args.app, "mode": "radial" if args.radial else
        ("eigen" if args.app == 2 else "grid2d"),
        "dim": args.dim, "radius": args.radius, "f": args.f,
        "domain": args.domain, "h": args.h, "nodes": args.nodes,
        "alpha": ",".join(f"{a:g}" for a in args.alpha),
        "gamma": args.gamma, "p": args.p, "lam": args.lam})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    # Hypothesis gate first: the transform must exist and be increasing.
    transform = analysis.transform_preset(args.app, args.p)

    args_eigen = args.app == 2
    if args_eigen:
        cfg = _solve_config(args)
        lam, sol = solver.solve_eigen_radial(args.dim, args.radius, cfg)
        f = solver.eigen_source(lam)
        extras = {"lambda1": lam}
    elif args.radial:
        if args.app == 3:
            f = solver.power_source(args.lam, args.p)
        else:
            f = parse_source(args.f)
        sol = solver.solve_radial(args.dim, args.radius, f, _solve_config(args))
        extras = {}
    else:
        if args.app == 3:
            f = solver.power_source(args.lam, args.p)
        else:
            f = parse_source(args.f)
        sol = solver.solve_grid2d(parse_domain(args.domain), f, args.h,
                                  _solve_config(args))
        extras = {}

    scan = analysis.convexity_scan_solution(sol, transform)
    if not scan.convex:
        print(f"hypothesis not met: {transform.name} composition is not convex "
              f"(min eigenvalue {scan.min_eigenvalue:.3e})")
        _write_json(out / "report.json", {
            "schema": REPORT_SCHEMA, "config": config.canonical_text(),
            "skipped": f"convexity hypothesis failed for {transform.name}"})
        return 2

    gammas = _gamma_list(args.gamma)
    dom_label = (f"ball:{args.radius:g}(dim{args.dim})"
                 if isinstance(sol, solver.RadialProfile)
                 else _domain_label(sol.mask.spec))
    h_eff = (sol.radius / (sol.r.size - 1) if isinstance(sol, solver.RadialProfile)
             else sol.mask.h)

    rows = []
    pf_saved = []
    all_hold = True
    report_bounds = {}
    for gamma in gammas:
        rep = analysis.bounds_report(sol, f, args.app, p=args.p, gamma=gamma)
        report_bounds[f"gamma={gamma:g}"] = dataclasses.asdict(rep)
        for alpha in args.alpha:
            pf = analysis.pfunction_field(
                sol, f, analysis.PFunctionSpec(alpha=alpha, gamma=gamma))
            pf_saved.append(pf)
            tol = 5.0 * h_eff**2 * pf.scale()
            verdict = analysis.verify_principle(pf, "min", tol)
            rows.append((dom_label, f.label(), alpha, gamma, verdict.margin,
                         rep.slack, verdict.holds and rep.holds))
            all_hold &= bool(verdict.holds and rep.holds)

    with (out / "verdicts.csv").open("w") as fh:
        fh.write("domain,f,alpha,gamma,margin,slack,holds\n")
        for dom, flabel, alpha, gamma, margin, slack, holds in rows:
            fh.write(f"{dom},{flabel},{alpha:g},{gamma:g},{_fmt(margin)},"
                     f"{_fmt(slack)},{str(holds).lower()}\n")
    payload = {
        "schema": REPORT_SCHEMA, "config": config.canonical_text(),
        "application": args.app, "transform": transform.name,
        "solution": _solution_summary(sol, f, extras),
        "bounds": {k: {kk: (vv if not isinstance(vv, float) else vv)
                       for kk, vv in v.items()} for k, v in report_bounds.items()},
        "all_hold": all_hold,
    }
    _write_json(out / "report.json", payload)
    _write_profile_data(sol, out / "pfunction.dat", pf_saved)
    for dom, flabel, alpha, gamma, margin, slack, holds in rows:
        print(f"{dom} f={flabel} alpha={alpha:g} gamma={gamma:g}: "
              f"margin={margin:+.6e} slack={slack:+.6e} holds={holds}")
    return 0 if all_hold else 1


# ----------------------------------------------------------------------
# identity-scan
# ----------------------------------------------------------------------

def cmd_identity_scan(args) -> int:
    config = RunConfig("identity-scan", {"seed": args.seed, "count": args.count})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    euler_worst = 0.0
    for dim in range(2, 7):
        pts = fields.sample_points_in_ball(args.seed + dim, dim, args.count,
                                           radius=0.9, min_radius=0.05)
        for fld in fields.standard_menagerie(dim):
            for x in pts:
                h = fld.hess(x)
                scale = 1.0 + float(np.linalg.norm(h)) ** 2
                euler_worst = max(euler_worst,
                                  abs(fields.euler_identity_gap(fld, x)) / scale)

    ps_worst = 0.0
    n_ps = 0
    for dim in (2, 3, 4):
        pts = fields.sample_points_in_ball(args.seed + 10 + dim, dim, args.count,
                                           radius=0.95)
        for fld in fields.standard_menagerie(dim):
            for x in pts:
                h = fld.hess(x)
                lam = np.linalg.eigvalsh(h)
                if lam[0] < -1e-12 * max(1.0, abs(lam[-1])):
                    continue
                scale = (1.0 + float(np.linalg.norm(h)) ** 2
                         * (1.0 + float(x @ x)))
                ps_worst = min(ps_worst, fields.philippin_safoui_gap(fld, x) / scale)
                n_ps += 1

    # Curvature convention fit on radial fields in dimension 3: the extracted
    # value equals |grad u| times the shape-operator S2.
    ratios = []
    fit_resid = 0.0
    for _ in range(args.count):
        amp = float(rng.uniform(0.1, 1.0))
        fld = fields.ball_quadratic_field(3, amp)
        x = fields.sample_points_in_ball(int(rng.integers(2**32)), 3, 1,
                                         radius=1.2, min_radius=0.2)[0]
        probe = fields.levelset_curvature_probe(fld, x)
        denom = probe.grad_norm * probe.s2_kappa_geometric
        ratios.append(probe.h2_extracted / denom)
    factor = float(np.mean(ratios))
    fit_resid = float(np.max(np.abs(np.asarray(ratios) - factor)))

    payload = {
        "schema": REPORT_SCHEMA, "config": config.canonical_text(),
        "euler_gap_worst_over_scale": euler_worst,
        "philippin_safoui_min_gap_over_scale": ps_worst,
        "philippin_safoui_samples": n_ps,
        "h2_convention": {
            "factor_vs_gradnorm_times_s2kappa": factor,
            "fit_residual": fit_resid,
            "closes_with_gradient_factor": bool(abs(factor - 1.0) <= 1e-8),
        },
    }
    _write_json(out / "identities.json", payload)
    print(f"homogeneity contraction worst gap/scale: {euler_worst:.3e}")
    print(f"gradient-Hessian inequality min gap/scale: {ps_worst:+.3e} "
          f"({n_ps} admissible samples)")
    print(f"curvature convention factor: {factor:.12f} "
          f"(fit residual {fit_resid:.3e})")
    ok = (euler_worst <= 1e-10 and ps_worst >= -1e-9 and fit_resid <= 1e-8)
    return 0 if ok else 1


# ----------------------------------------------------------------------
# argument plumbing
# ----------------------------------------------------------------------

def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="hess2",
        description="Verification toolkit for 2-Hessian problems: matrix "
                    "inequalities, solvers, extreme principles, a priori bounds.")
    sub = parser.add_subparsers(dest="command", required=True)
    registry = {}

    q = sub.add_parser("ineq", help="run a comatrix-inequality sampling campaign")
    q.add_argument("--seed", type=int, default=42)
    q.add_argument("--dims", default="2..8")
    q.add_argument("--count", type=int, default=10000)
    q.add_argument("--sign", choices=["positive", "negative", "indefinite"],
                   default="positive")
    q.add_argument("--scale", type=float, default=1.0)
    q.add_argument("--records", action=argparse.BooleanOptionalAction, default=True)
    q.add_argument("--out", default="ineq-report")
    q.set_defaults(func=cmd_ineq)

    s = sub.add_parser("solve", help="solve a Dirichlet problem")
    mode = s.add_mutually_exclusive_group(required=True)
    mode.add_argument("--radial", action="store_true")
    mode.add_argument("--grid2d", action="store_true")
    mode.add_argument("--eigen", action="store_true")
    s.add_argument("--dim", type=int, default=3)
    s.add_argument("--radius", type=float, default=1.0)
    s.add_argument("--f", default="const:1")
    s.add_argument("--domain", default="disk:1")
    s.add_argument("--h", type=float, default=1.0 / 64)
    s.add_argument("--nodes", type=int, default=1024)
    s.add_argument("--out", default="solve-report")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="verify principles and a priori bounds")
    v.add_argument("--app", type=int, choices=[1, 2, 3], required=True)
    vmode = v.add_mutually_exclusive_group()
    vmode.add_argument("--radial", action="store_true")
    vmode.add_argument("--grid2d", action="store_true")
    v.add_argument("--dim", type=int, default=3)
    v.add_argument("--radius", type=float, default=1.0)
    v.add_argument("--f", default="const:1")
    v.add_argument("--domain", default="disk:1")
    v.add_argument("--h", type=float, default=1.0 / 64)
    v.add_argument("--nodes", type=int, default=1024)
    v.add_argument("--alpha", type=float, action="append", default=None)
    v.add_argument("--gamma", default="both")
    v.add_argument("--p", type=float, default=None)
    v.add_argument("--lam", type=float, default=1.0)
    v.add_argument("--out", default="verify-report")
    v.set_defaults(func=cmd_verify)

    i = sub.add_parser("identity-scan", help="scan pointwise identities on "
                                             "closed-form fields")
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--count", type=int, default=100)
    i.add_argument("--out", default="identity-report")
    i.set_defaults(func=cmd_identity_scan)
    registry.update({"ineq": q, "solve": s, "verify": v, "identity-scan": i})
    return parser, registry


_CONFIG_COERCIONS = {
    "seed": int, "count": int, "dim": int, "nodes": int,
    "radius": float, "h": float, "scale": float, "p": float, "lam": float,
    "app": int,
    "records": lambda s: s.lower() in ("1", "true", "yes"),
    "radial": lambda s: s.lower() in ("1", "true", "yes"),
    "grid2d": lambda s: s.lower() in ("1", "true", "yes"),
    "eigen": lambda s: s.lower() in ("1", "true", "yes"),
    "alpha": lambda s: [float(tok) for tok in s.split(",")],
}


def _apply_config_file(registry, argv):
    """Pull --config out of argv and install its values as subparser defaults.

    Command-line flags still win: explicit arguments override the defaults
    installed here.
    """
    argv = list(argv)
    if "--config" not in argv:
        return argv
    k = argv.index("--config")
    path = argv[k + 1]
    del argv[k:k + 2]
    cfg = RunConfig.from_text(Path(path).read_text())
    if cfg.command and (not argv or argv[0].startswith("-")):
        argv.insert(0, cfg.command)
    command = argv[0] if argv and not argv[0].startswith("-") else cfg.command
    if command not in registry:
        raise InputError(f"config names no known command (got {command!r})")
    defaults = {}
    for key, value in cfg.options.items():
        coerce = _CONFIG_COERCIONS.get(key, str)
        defaults[key] = coerce(value)
    registry[command].set_defaults(**defaults)
    return argv


def main(argv=None) -> int:
    parser, registry = build_parser()
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        argv = _apply_config_file(registry, argv)
    except (OSError, InputError) as exc:
        print(f"config error: {exc}")
        return 2
    args = parser.parse_args(argv)
    if args.command == "verify":
        if args.alpha is None:
            args.alpha = [1.0]
        if not args.radial and not args.grid2d:
            args.radial = True
    try:
        return args.func(args)
    except HypothesisError as exc:
        print(f"hypothesis not met: {exc}")
        return 2
    except InputError as exc:
        print(f"input error: {exc}")
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}")
        return 1
    except SolverError as exc:
        print(f"solver failure: {exc}")
        return 3
    except ToolkitError as exc:
        print(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
