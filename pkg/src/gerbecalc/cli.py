"""Command-line interface.

Exit codes: 0 success, 1 a check or pipeline stage failed, 2 parse/usage error.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import connective, gerbedata, holonomy, io, liecore
from .complexes import StarCover, build_complex, icosahedron_mesh, sphere_mesh, torus3_mesh, torus_mesh
from .errors import GerbeError, IncompatibleCurving, ParseError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _threads():
    raw = os.environ.get("GERBECALC_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ParseError(f"GERBECALC_THREADS must be an integer, got {raw!r}", "environment")
    if n < 1:
        raise ParseError("GERBECALC_THREADS must be positive", "environment")
    return n


def _emit(args, report: dict):
    report.setdefault("command", args.command)
    report["tolerances"] = {"tol_alg": args.tol_alg, "tol_grp": args.tol_grp}
    report["threads"] = _threads()
    text = io.dumps(report)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    print(text)


def _load(args, validate_curving=False):
    if not args.mesh:
        raise ParseError("--mesh is required", "arguments")
    if not args.data:
        raise ParseError("--data is required", "arguments")
    mesh = io.load_mesh(io.read_json(args.mesh), where=str(args.mesh))
    cover = StarCover(mesh)
    data = io.load_data(io.read_json(args.data), cover, group=args.group, tol_alg=args.tol_alg,
                        where=str(args.data), validate_curving=validate_curving)
    return cover, data


def _curving_map(args, cover, data):
    """L per patch from the data file (without validation)."""
    raw = io.read_json(args.data).get("L") or {}
    return {int(k): io.cochain_from_json(v, cover.subdivision, 2, (int(k),), data.gc.band, f"{args.data}/L/{k}")
            for k, v in raw.items()}


# ----------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    cover, data = _load(args)
    checks = [gerbedata.check_cocycle(data.gc, tol=args.tol_alg).as_dict(),
              connective.boundary_identity_check(data.cb, tol=args.tol_alg).as_dict()]
    try:
        cur = connective.CurvingData(data.cb, _curving_map(args, cover, data), tol=args.tol_alg)
        dev = cur.max_residual
    except IncompatibleCurving as e:
        dev = e.deviation
    checks.append({"check": "curving_compatibility", "status": "PASS" if dev <= args.tol_alg else "FAIL",
                   "max_deviation": dev, "tol": args.tol_alg})
    ok = all(c["status"] == "PASS" for c in checks)
    _emit(args, {"status": "PASS" if ok else "FAIL", "checks": checks})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_lift(args) -> int:
    if not args.mesh or not args.data:
        raise ParseError("--mesh and --data are required", "arguments")
    ext = gerbedata.EXTENSIONS.get(args.extension)
    if ext is None:
        raise ParseError(f"unknown extension {args.extension!r}; choose from {sorted(gerbedata.EXTENSIONS)}", "--extension")
    cover = StarCover(io.load_mesh(io.read_json(args.mesh), where=str(args.mesh)))
    raw = io.read_json(args.data)
    edges = raw.get("edges") if isinstance(raw, dict) else None
    if not isinstance(edges, dict):
        raise ParseError("quotient transitions must be given under 'edges'", f"{args.data}/edges")
    u = {}
    for e in cover.base.simplices[1]:
        key = "-".join(map(str, e))
        u[e] = io._group_function_from_json(edges.get(key, {}), cover.subdivision, e, ext.Q, f"{args.data}/edges/{key}")
    twist = None
    if args.twist is not None:
        twist = gerbedata.random_twist(cover, ext.H, np.random.default_rng(args.twist))
    lg = gerbedata.build_lifting_gerbe(ext, u, cover, twist=twist, tol=args.tol_alg)
    report = {"status": "PASS", "extension": ext.name, "central": lg.central,
              "quotient_deviation": lg.quotient_deviation, "lift_defect": lg.lift_defect,
              "data": io.data_to_json(lg.gerbe)}
    _emit(args, report)
    return EXIT_OK


def cmd_holonomy(args) -> int:
    cover, data = _load(args, validate_curving=True)
    stage = "setup"
    try:
        problem = holonomy.HolonomyProblem(data.cb, data.cur)
        stage = "pipeline"
        rep = holonomy.holonomy(problem, tol=args.tol_alg)
    except GerbeError as e:
        _emit(args, {"status": "FAIL", "stage": stage, "error": type(e).__name__, "message": str(e)})
        return EXIT_FAIL
    out = {"status": "PASS"}
    out.update(rep.as_dict())
    _emit(args, out)
    return EXIT_OK


def cmd_charclass(args) -> int:
    cover, data = _load(args, validate_curving=True)
    try:
        omega = connective.curvature3(data.cb, data.cur, tol=args.tol_alg)
    except GerbeError as e:
        _emit(args, {"status": "FAIL", "stage": "curvature3", "error": type(e).__name__, "message": str(e)})
        return EXIT_FAIL
    poly = liecore.InvariantPolynomial(args.degree)
    form = connective.characteristic_form(poly, omega)
    from .dcalc import integrate
    value = integrate(form) if form.degree == cover.base.dim else 0.0
    _emit(args, {"status": "PASS", "degree": args.degree, "part": poly.part_for(data.cb.spec),
                 "integral": float(np.real(value)), "integral_over_2pi": float(np.real(value)) / (2 * np.pi)})
    return EXIT_OK


def cmd_gen(args) -> int:
    from . import generators as gen
    target = args.target
    p = args.params
    data = None
    if target == "sphere":
        mesh = sphere_mesh(int(p[0]) if p else args.level)
    elif target == "torus":
        if len(p) != 2:
            raise ParseError("gen torus needs two sizes, e.g. 'gen torus 4 4'", "arguments")
        mesh = torus_mesh(int(p[0]), int(p[1]))
    elif target == "torus3":
        mesh = torus3_mesh(int(p[0]) if p else 3)
    elif target == "monopole":
        mesh = sphere_mesh(args.level)
        cover = StarCover(build_complex(mesh))
        lg = gen.monopole_gerbe(cover, args.charge, args.twist)
        data = io.data_to_json(lg.gerbe, connective.ConnectiveBundle(lg.gerbe))
    elif target == "trivial-curving":
        mesh = torus_mesh(*(int(x) for x in p)) if len(p) == 2 else torus_mesh(8, 8)
        cover = StarCover(build_complex(mesh))
        cb, cur, _ = gen.trivial_curving_data(cover, args.total)
        data = io.data_to_json(cb.gc, cb, cur.L)
    elif target == "abelian-class":
        mesh = torus3_mesh(int(p[0]) if p else 3)
        cover = StarCover(build_complex(mesh))
        cb, cur, _ = gen.abelian_class_data(cover, args.n)
        data = io.data_to_json(cb.gc, cb, cur.L)
    else:
        raise ParseError(f"unknown generator {target!r}; choose from {list(gen.GENERATORS)}", "arguments")
    k = build_complex(mesh)
    if args.mesh:
        io.write_json(args.mesh, mesh)
    if data is not None and args.data:
        io.write_json(args.data, data)
    _emit(args, {"status": "PASS", "target": target, "dimension": k.dim, "counts": k.counts(),
                 "euler_characteristic": k.euler_characteristic(), "mesh": args.mesh,
                 "data": args.data if data is not None else None})
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "lift": cmd_lift, "holonomy": cmd_holonomy,
            "charclass": cmd_charclass, "gen": cmd_gen}


def _positive(s):
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mesh", help="mesh JSON (input; output for gen)")
    common.add_argument("--data", help="gerbe data JSON (input; output for gen)")
    common.add_argument("--out", help="write the JSON report here as well as to stdout")
    common.add_argument("--tol-alg", type=_positive, default=liecore.TOL_ALG)
    common.add_argument("--tol-grp", type=_positive, default=liecore.TOL_GRP)
    common.add_argument("--group", help="override the band group (U1, SU2, U2, SO3)")

    parser = argparse.ArgumentParser(prog="gerbecalc", description="Discrete non-abelian gerbe computations.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check cocycle, boundary identity and curving")
    lift = sub.add_parser("lift", parents=[common], help="lifting gerbe of quotient transitions in --data")
    lift.add_argument("--extension", default="U2/SU2")
    lift.add_argument("--twist", type=int, help="seed for a random H-valued twist of the lifts")
    sub.add_parser("holonomy", parents=[common], help="surface holonomy exp(integral of the density)")
    cc = sub.add_parser("charclass", parents=[common], help="integral of P(Omega) on a 3-complex")
    cc.add_argument("--degree", type=int, default=1)
    g = sub.add_parser("gen", parents=[common], help="generate example meshes and data")
    g.add_argument("target")
    g.add_argument("params", nargs="*")
    g.add_argument("--charge", type=int, default=1)
    g.add_argument("--twist", type=int, help="seed for an SU2 twist of the monopole lifts")
    g.add_argument("--level", type=int, default=0, help="sphere refinement level")
    g.add_argument("--total", type=float, default=0.25, help="integral of B in units of 2 pi i")
    g.add_argument("--n", type=int, default=1, help="Cech class for abelian-class")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    liecore.TOL_GRP = args.tol_grp
    try:
        return COMMANDS[args.command](args)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (GerbeError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
