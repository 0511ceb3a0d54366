"""Command-line front end.

Every subcommand prints one JSON object on standard output and logs to
standard error.  Settings come from built-in defaults, then an optional
``--config`` file of ``key = value`` lines, then explicit flags.  Exit codes:
0 success, 1 a verification check failed, 2 bad input or usage, 3 a numerical
failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Callable

import numpy as np

from . import __version__
from .errors import InputError, NumericalError, NonFiniteResult
from .expr import CoefficientField
from .fem import eigenvalues, integral_functional, solve_source
from .geometry import Box, bonnesen_check, hausdorff_distance, inradius_center, minkowski_dilate, project_to_class
from .io import read_config, read_points, read_polygon, write_polygon, write_profile
from .optimizer import ShapeProblem, newton_optimize, optimize

log = logging.getLogger("shapeopt")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass(frozen=True)
class Opt:
    key: str
    kind: Callable[[str], Any]
    default: Any
    help: str


def _int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise InputError(f"expected an integer, got {text!r}") from None
    return v


def _float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise InputError(f"expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise InputError(f"expected a finite number, got {text!r}")
    return v


def default_seed() -> int:
    raw = os.environ.get("SHAPEOPT_SEED")
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"SHAPEOPT_SEED must be an integer, got {raw!r}") from None


SEED = object()  # placeholder resolved from the environment at run time

COEFF_OPTS = [
    Opt("a11", str, "1", "coefficient a11(x1, x2)"),
    Opt("a12", str, "0", "coefficient a12(x1, x2)"),
    Opt("a22", str, "1", "coefficient a22(x1, x2)"),
    Opt("c0", str, "0", "zero-order coefficient c0(x1, x2) >= 0"),
    Opt("box", str, None, "container 'xmin ymin xmax ymax' used for the ellipticity check"),
]

COMMANDS: dict[str, list[Opt]] = {
    "eigen": [
        Opt("polygon", str, None, "polygon file"),
        Opt("k", _int, 1, "number of eigenvalues"),
        Opt("h", _float, 0.05, "mesh size"),
        *COEFF_OPTS,
    ],
    "solve": [
        Opt("polygon", str, None, "polygon file"),
        Opt("f", str, "1", "source term f(x1, x2)"),
        Opt("j", str, "u", "integrand j(x1, x2, u)"),
        Opt("h", _float, 0.05, "mesh size"),
        Opt("out", str, "solution.csv", "CSV file for the nodal solution"),
        *COEFF_OPTS,
    ],
    "newton": [
        Opt("M", _float, 1.0, "height bound"),
        Opt("R", _float, 1.0, "base radius"),
        Opt("nr", _int, 200, "number of radial cells"),
        Opt("budget", _int, 20000, "objective evaluations"),
        Opt("seed", _int, SEED, "random seed (default: $SHAPEOPT_SEED or 0)"),
        Opt("out", str, "newton.profile", "profile file to write"),
    ],
    "optimize": [
        Opt("objective", str, "lambda1", "lambda1, eigenvalue, perimeter, boundary or source"),
        Opt("box", str, "0 0 4 4", "container 'xmin ymin xmax ymax'"),
        Opt("m", _float, math.pi, "prescribed area"),
        Opt("budget", _int, 500, "objective evaluations"),
        Opt("seed", _int, SEED, "random seed (default: $SHAPEOPT_SEED or 0)"),
        Opt("n_theta", _int, 64, "radial samples"),
        Opt("h", _float, 0.05, "mesh size for PDE objectives"),
        Opt("k", _int, 1, "eigenvalue index for --objective eigenvalue"),
        Opt("f", str, None, "boundary integrand (x1, x2, n1, n2) or source term"),
        Opt("j", str, "u", "integrand for --objective source"),
        Opt("a11", str, "1", "coefficient a11(x1, x2)"),
        Opt("a12", str, "0", "coefficient a12(x1, x2)"),
        Opt("a22", str, "1", "coefficient a22(x1, x2)"),
        Opt("c0", str, "0", "zero-order coefficient c0(x1, x2)"),
        Opt("out", str, None, "polygon file for the best body"),
        Opt("trace", str, None, "CSV file for the evaluation history"),
    ],
    "verify": [
        Opt("suite", str, "all", "all, geometry, expr, spectral, newton or optimizer"),
        Opt("seed", _int, SEED, "random seed (default: $SHAPEOPT_SEED or 0)"),
    ],
}

GEOMETRY_OPS = ("area", "perimeter", "inradius", "hausdorff", "bonnesen", "dilate", "project")


class _Parser(argparse.ArgumentParser):
    """Usage errors become ``InputError`` so that a single handler sets the exit code."""

    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


HELP = {
    "eigen": "first k Dirichlet eigenvalues of a polygon",
    "solve": "source problem and an integral functional of its solution",
    "newton": "optimal radial profile for minimal resistance",
    "optimize": "minimize an objective over convex bodies of area m in a box",
    "verify": "run the property checks",
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shapeopt", description="Shape optimization over convex planar domains.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-q", "--quiet", action="store_true", help="only warnings on standard error")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("geometry", help="polygon measures and operations")
    g.add_argument("op", choices=GEOMETRY_OPS)
    g.add_argument("polygons", nargs="+", help="polygon file(s)")
    g.add_argument("--eps", type=float, help="dilation radius (dilate)")
    g.add_argument("--arc-segments", type=int, default=16, help="chords per corner arc (dilate)")
    g.add_argument("--box", help="container 'xmin ymin xmax ymax' (project)")
    g.add_argument("--m", type=float, help="prescribed area (project)")

    for name, opts in COMMANDS.items():
        s = sub.add_parser(name, help=HELP[name])
        s.add_argument("--config", help="file of 'key = value' settings; flags take precedence")
        for o in opts:
            flag = "--" + o.key.replace("_", "-")
            # None marks "not given" so that the config file can fill it in
            s.add_argument(flag, dest=o.key, default=None, help=o.help)
    return p


def resolve(command: str, ns: argparse.Namespace) -> dict[str, Any]:
    """Merge defaults, the config file and flags; reject unknown config keys."""
    opts = {o.key: o for o in COMMANDS[command]}
    raw: dict[str, Any] = {}
    if getattr(ns, "config", None):
        cfg = read_config(ns.config)
        unknown = sorted(set(cfg) - set(opts))
        if unknown:
            raise InputError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
        raw.update(cfg)
    for key in opts:
        value = getattr(ns, key)
        if value is not None:
            raw[key] = value
    out = {}
    for key, o in opts.items():
        if key in raw:
            out[key] = o.kind(raw[key])
        elif o.default is SEED:
            out[key] = default_seed()
        else:
            out[key] = o.default
    return out


def _coeff(cfg: dict) -> tuple[CoefficientField, Box | None]:
    coeff = CoefficientField(cfg["a11"], cfg["a12"], cfg["a22"], cfg["c0"])
    return coeff, Box.parse(cfg["box"]) if cfg.get("box") else None


def _require(cfg: dict, key: str) -> Any:
    if cfg.get(key) is None:
        raise InputError(f"--{key.replace('_', '-')} is required")
    return cfg[key]


def emit(payload: dict) -> None:
    try:
        text = json.dumps(payload, sort_keys=True, allow_nan=False)
    except ValueError:
        raise NonFiniteResult("result contains a non-finite number") from None
    sys.stdout.write(text + "\n")
    sys.stdout.flush()


# commands --------------------------------------------------------------------

def cmd_geometry(ns) -> int:
    op = ns.op
    want = 2 if op == "hausdorff" else 1
    if len(ns.polygons) != want:
        raise InputError(f"geometry {op} takes {want} polygon file(s), got {len(ns.polygons)}")
    if op == "project":
        # any point set is admissible here; the projection takes its hull
        points = read_points(ns.polygons[0])
    else:
        polys = [read_polygon(p) for p in ns.polygons]
        poly = polys[0]
    log.info("config: %s", json.dumps({"op": op, "polygons": ns.polygons, "eps": ns.eps,
                                       "arc_segments": ns.arc_segments, "box": ns.box, "m": ns.m}))
    if op == "area":
        out = {"area": poly.area}
    elif op == "perimeter":
        out = {"perimeter": poly.perimeter}
    elif op == "inradius":
        c, rho = inradius_center(poly)
        out = {"inradius": rho, "center": c.tolist()}
    elif op == "hausdorff":
        out = {"d": hausdorff_distance(polys[0], polys[1])}
    elif op == "bonnesen":
        out = bonnesen_check(poly).to_json()
    elif op == "dilate":
        if ns.eps is None:
            raise InputError("geometry dilate needs --eps")
        out = minkowski_dilate(poly, ns.eps, ns.arc_segments).to_json()
    else:
        if ns.box is None or ns.m is None:
            raise InputError("geometry project needs --box and --m")
        out = project_to_class(points, Box.parse(ns.box), ns.m).to_json()
    emit(out)
    return EXIT_OK


def cmd_eigen(cfg) -> int:
    poly = read_polygon(_require(cfg, "polygon"))
    coeff, box = _coeff(cfg)
    spectrum = eigenvalues(poly, coeff, cfg["k"], cfg["h"], box=box)
    emit({**spectrum.to_json(), "config": cfg})
    return EXIT_OK


def cmd_solve(cfg) -> int:
    poly = read_polygon(_require(cfg, "polygon"))
    coeff, box = _coeff(cfg)
    sol = solve_source(poly, coeff, cfg["f"], cfg["h"], box=box)
    value = integral_functional(sol, cfg["j"])
    with open(cfg["out"], "w") as fh:
        fh.write(sol.to_csv())
    emit({
        "value": value,
        "csv": cfg["out"],
        "max_u": sol.max_value(),
        "energy": sol.energy,
        "residual": sol.residual,
        "dof": sol.mesh.dof,
        "config": cfg,
    })
    return EXIT_OK


def cmd_newton(cfg) -> int:
    res = newton_optimize(cfg["M"], cfg["R"], cfg["nr"], cfg["budget"], cfg["seed"])
    write_profile(cfg["out"], res.profile)
    emit({**res.to_json(), "profile": cfg["out"], "config": cfg})
    return EXIT_OK


_OBJECTIVES = {
    # cli name -> (problem objective, default f)
    "lambda1": ("eigenvalue", "1"),
    "eigenvalue": ("eigenvalue", "1"),
    "perimeter": ("boundary_integral", "1"),
    "boundary": ("boundary_integral", None),
    "source": ("source_integral", "1"),
}


def problem_from_config(cfg: dict) -> ShapeProblem:
    name = cfg["objective"]
    if name not in _OBJECTIVES:
        raise InputError(f"--objective must be one of {', '.join(_OBJECTIVES)}, got {name!r}")
    objective, f_default = _OBJECTIVES[name]
    f = cfg["f"] if cfg["f"] is not None else f_default
    if f is None:
        raise InputError("--objective boundary needs --f")
    if name == "perimeter" and cfg["f"] not in (None, "1"):
        raise InputError("--objective perimeter fixes f = 1; use --objective boundary")
    k = 1 if name == "lambda1" else cfg["k"]
    box = Box.parse(cfg["box"])
    coeff = CoefficientField(cfg["a11"], cfg["a12"], cfg["a22"], cfg["c0"])
    if objective != "boundary_integral":
        coeff.check(box.lower, box.upper)
    return ShapeProblem(objective, box, cfg["m"], n_theta=cfg["n_theta"], h=cfg["h"],
                        budget=cfg["budget"], seed=cfg["seed"], k=k, coeff=coeff, f=f, j=cfg["j"])


def cmd_optimize(cfg) -> int:
    problem = problem_from_config(cfg)

    def progress(i, poly, value):
        if i % 50 == 0:
            log.info("evaluation %d: %.10g", i, value)

    res = optimize(problem, on_evaluate=progress)
    if cfg["out"]:
        write_polygon(cfg["out"], res.best)
    if cfg["trace"]:
        with open(cfg["trace"], "w") as fh:
            fh.write(res.trace_csv())
    emit({**res.to_json(), "area": res.best.area, "config": cfg})
    return EXIT_OK


def cmd_verify(cfg) -> int:
    from . import verify  # heavy imports stay off the other commands' path

    suite, seed = cfg["suite"], cfg["seed"]
    try:
        verify.select(suite)
    except ValueError as exc:
        raise InputError(str(exc)) from None

    def report(r):
        log.info("%s %s (%.2fs)", "PASS" if r.passed else "FAIL", r.id, r.seconds)

    results = verify.run_suite(suite, seed, on_result=report)
    sys.stderr.write(verify.format_table(results) + "\n")
    out = verify.summary(results, suite, seed)
    emit({**out, "config": cfg})
    return EXIT_OK if out["failed"] == 0 else EXIT_FAIL


HANDLERS = {
    "eigen": cmd_eigen,
    "solve": cmd_solve,
    "newton": cmd_newton,
    "optimize": cmd_optimize,
    "verify": cmd_verify,
}


def _setup_logging(quiet: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.WARNING if quiet else logging.INFO)
    log.propagate = False


def main(argv: list[str] | None = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    _setup_logging(ns.quiet)
    log.info("started %s", datetime.now(timezone.utc).isoformat(timespec="seconds"))
    try:
        with np.errstate(all="ignore"):
            if ns.command == "geometry":
                return cmd_geometry(ns)
            cfg = resolve(ns.command, ns)
            log.info("config: %s", json.dumps(cfg, sort_keys=True))
            return HANDLERS[ns.command](cfg)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except NumericalError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
