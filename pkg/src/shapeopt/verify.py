"""Property checks for every module, grouped in suites with stable identifiers.

Each check draws its instances from ``numpy.random.default_rng(seed)`` mixed
with a per-check salt, so a check's outcome depends only on the seed and its
own id, never on which other checks ran.
"""
from __future__ import annotations

import hashlib
import math
import time
import traceback
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ShapeOptError, MeshQualityFailure, NonFiniteResult
from .expr import CoefficientField, parse_expr, eval_expr
from .fem import eigenvalues, solve_source
from .functionals import (
    POSITIVE_PART_CUBE,
    RadialProfile,
    boundary_functional_2d,
    resistance_boundary_axisym,
    resistance_profile,
)
from .geometry import (
    Box,
    ConvexPolygon,
    bonnesen_check,
    contains,
    convex_hull,
    edge_normals,
    hausdorff_distance,
    inradius_center,
    minkowski_dilate,
    project_to_class,
    radial_parametrization,
    random_convex_polygon,
    random_hull,
    regular_polygon,
    scale_about,
)
from .mesh import triangulate
from .optimizer import ShapeProblem, blaschke_select, newton_optimize, optimize, project_profile

SLACK = 0.02
INSTANCES = 50
SPECTRAL_H = 0.05


@dataclass
class CheckResult:
    id: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {"id": self.id, "passed": self.passed, "seconds": round(self.seconds, 3), "detail": self.detail}


@dataclass(frozen=True)
class Check:
    id: str
    suite: str
    summary: str
    fn: Callable


REGISTRY: dict[str, Check] = {}
SUITES = ("geometry", "expr", "spectral", "newton", "optimizer")


def check(id: str, summary: str):
    suite = id.split(".", 1)[0]

    def deco(fn):
        REGISTRY[id] = Check(id, suite, summary, fn)
        return fn

    return deco


def rng_for(seed: int, check_id: str) -> np.random.Generator:
    salt = int.from_bytes(hashlib.sha256(check_id.encode()).digest()[:8], "little")
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, salt])


def _fixed_jitter(poly: ConvexPolygon, rng) -> np.ndarray:
    """Unit-bounded offsets; ``v + eps * xi`` gives a sequence with Hausdorff gap <= eps."""
    k = len(poly.vertices)
    ang = rng.uniform(0.0, 2.0 * np.pi, k)
    rad = np.sqrt(rng.uniform(0.0, 1.0, k))
    return rad[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def _jitter_sequence(poly: ConvexPolygon, xi: np.ndarray, levels):
    """``hull(v + eps xi)`` for each eps; None where the vertex set is not kept."""
    out = []
    for eps in levels:
        q = convex_hull(poly.vertices + eps * xi)
        out.append(q if len(q) == len(poly) else None)
    return out


def _meshable(poly: ConvexPolygon, h: float) -> bool:
    try:
        triangulate(poly, h)
    except MeshQualityFailure:
        return False
    return True


def _draw_meshable(rng, h=SPECTRAL_H, **kw) -> ConvexPolygon:
    while True:
        p = random_convex_polygon(rng, **kw)
        if _meshable(p, h):
            return p


# geometry --------------------------------------------------------------------

@check("geometry.bonnesen", "area < inradius * perimeter for random convex polygons")
def _bonnesen(seed, n=100):
    rng = rng_for(seed, "geometry.bonnesen")
    worst = math.inf
    for _ in range(n):
        p = random_convex_polygon(rng, roundness=float(rng.uniform(0.05, 1.0)))
        worst = min(worst, bonnesen_check(p).slack / p.area)
    return worst > 0, {"instances": n, "min_relative_slack": worst}


@check("geometry.perimeter_monotonicity", "perimeter does not increase under inclusion")
def _perimeter_mono(seed, n=INSTANCES):
    rng = rng_for(seed, "geometry.perimeter_monotonicity")
    worst = -math.inf
    for _ in range(n):
        outer = random_convex_polygon(rng)
        bb = outer.bounding_box()
        inner = convex_hull(np.array(bb.lower) + (np.array(bb.upper) - bb.lower) * rng.random((12, 2)))
        inner = _intersect(outer, inner)
        if inner is None or not contains(outer, inner):
            continue
        worst = max(worst, inner.perimeter - outer.perimeter)
    return worst <= 1e-12, {"instances": n, "max_perimeter_excess": worst}


def _intersect(a: ConvexPolygon, b: ConvexPolygon):
    """Intersection of two convex polygons (Sutherland-Hodgman), None if thin."""
    pts = b.vertices
    n, off = a.edge_lines()
    for k in range(len(n)):
        if len(pts) == 0:
            return None
        s = pts @ n[k] - off[k]
        nxt = np.roll(pts, -1, axis=0)
        sn = np.roll(s, -1)
        keep = []
        for p, q, sp_, sq in zip(pts, nxt, s, sn):
            if sp_ <= 0:
                keep.append(p)
            if (sp_ < 0 < sq) or (sq < 0 < sp_):
                keep.append(p + (q - p) * (sp_ / (sp_ - sq)))
        pts = np.array(keep)
    if len(pts) < 3:
        return None
    try:
        out = convex_hull(pts)
    except ShapeOptError:
        return None
    return out if out.area > 1e-6 * a.area else None


@check("geometry.measure_convergence", "area and perimeter gaps vanish along jitter sequences")
def _measures(seed, n=INSTANCES):
    rng = rng_for(seed, "geometry.measure_convergence")
    ok = True
    worst_ratio = 0.0
    levels = [1.0 / k for k in (4, 8, 16, 32, 64, 128)]
    for _ in range(n):
        p = random_convex_polygon(rng)
        xi = _fixed_jitter(p, rng)
        gaps_a, gaps_p = [], []
        for eps in levels:
            q = convex_hull(p.vertices + eps * xi)
            da, dp = abs(q.area - p.area), abs(q.perimeter - p.perimeter)
            # Hausdorff gap <= eps gives these Steiner-type bounds
            bound_a = max(p.perimeter, q.perimeter) * eps + math.pi * eps * eps
            bound_p = 2 * math.pi * eps
            worst_ratio = max(worst_ratio, da / bound_a, dp / bound_p)
            ok &= da <= bound_a * (1 + 1e-9) and dp <= bound_p * (1 + 1e-9)
            gaps_a.append(da)
            gaps_p.append(dp)
        # bounds are O(eps); the finest level must also be small in absolute terms
        ok &= gaps_a[-1] <= 0.05 * p.area and gaps_p[-1] <= 0.05 * p.perimeter
    return ok, {"instances": n, "max_gap_over_bound": worst_ratio}


@check("geometry.hausdorff_metric", "Hausdorff distance is symmetric and obeys the triangle inequality")
def _metric(seed, n=INSTANCES):
    rng = rng_for(seed, "geometry.hausdorff_metric")
    ok = True
    worst = 0.0
    for _ in range(n):
        a, b, c = (random_convex_polygon(rng, center=rng.uniform(-0.5, 0.5, 2)) for _ in range(3))
        ab, ba = hausdorff_distance(a, b), hausdorff_distance(b, a)
        ac, cb = hausdorff_distance(a, c), hausdorff_distance(c, b)
        ok &= ab == ba and hausdorff_distance(a, a) == 0.0
        excess = ab - (ac + cb)
        worst = max(worst, excess / max(ab, 1e-300))
        ok &= excess <= 1e-12 * max(ab, 1.0)
    return ok, {"instances": n, "max_triangle_excess": worst}


@check("geometry.dilation_inclusion", "poly within its eps-dilation within the (1 + eps/rho) scaled copy")
def _dilation(seed, n=INSTANCES):
    rng = rng_for(seed, "geometry.dilation_inclusion")
    ok = True
    for _ in range(n):
        p = random_convex_polygon(rng)
        c, rho = inradius_center(p)
        eps = float(rng.uniform(0.0, 1.0)) * rho
        d = minkowski_dilate(p, eps, int(rng.integers(1, 65)))
        s = scale_about(p, c, 1.0 + eps / rho)
        ok &= contains(d, p) and contains(s, d)
    return ok, {"instances": n}


@check("geometry.normal_convergence", "edge normals converge along jitter sequences")
def _normals(seed, n=INSTANCES):
    rng = rng_for(seed, "geometry.normal_convergence")
    ok = True
    last = 0.0
    levels = [2.0 ** -k for k in range(3, 11)]
    used = 0
    while used < n:
        p = random_convex_polygon(rng)
        xi = _fixed_jitter(p, rng)
        seq = _jitter_sequence(p, xi, levels)
        if any(q is None for q in seq):
            continue
        used += 1
        nu, lengths = edge_normals(p)
        for eps, q in zip(levels, seq):
            nq, _ = edge_normals(q)
            # both loops start at the lexicographic minimum; align by nearest vertex
            shift = int(np.argmin(np.hypot(*(q.vertices - p.vertices[0]).T)))
            nq = np.roll(nq, -shift, axis=0)
            ang = np.arccos(np.clip(np.einsum("ij,ij->i", nu, nq), -1.0, 1.0))
            # endpoints move by <= eps, so the edge turns by <= asin(2 eps / L)
            bound = np.arcsin(np.minimum(1.0, 2.0 * eps / (lengths - 2.0 * eps).clip(1e-300)))
            ok &= bool(np.all(ang <= bound + 1e-12))
        last = max(last, float(ang.max()))
    return ok and last < 0.05, {"instances": n, "max_angle_at_finest": last}


@check("geometry.radial_reconstruction", "radial reconstruction error shrinks on a dyadic ladder")
def _radial(seed, n=INSTANCES):
    rng = rng_for(seed, "geometry.radial_reconstruction")
    ok = True
    for _ in range(n):
        p = random_convex_polygon(rng, n_vertices=int(rng.integers(3, 40)))
        errs = [hausdorff_distance(p, radial_parametrization(p, m).to_polygon()) for m in (16, 32, 64, 128, 256, 512)]
        ok &= all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))
    return ok, {"instances": n}


@check("geometry.edge_closure", "sum of length * outward normal vanishes")
def _closure(seed, n=INSTANCES):
    rng = rng_for(seed, "geometry.edge_closure")
    worst = 0.0
    for _ in range(n):
        p = random_convex_polygon(rng)
        nu, ln = edge_normals(p)
        worst = max(worst, float(np.abs((ln[:, None] * nu).sum(axis=0)).max()) / p.perimeter)
    return worst <= 1e-13, {"instances": n, "max_relative_residual": worst}


@check("geometry.projection", "project_to_class lands in the admissible class")
def _projection(seed, n=INSTANCES):
    rng = rng_for(seed, "geometry.projection")
    box = Box((0.0, 0.0), (4.0, 4.0))
    ok = True
    for _ in range(n):
        m = float(rng.uniform(0.5, 8.0))
        pts = rng.uniform(-2.0, 6.0, (int(rng.integers(3, 30)), 2))
        q = project_to_class(pts, box, m)
        ok &= box.contains(q) and abs(q.area - m) <= 1e-9 * m
    return ok, {"instances": n}


# expressions -----------------------------------------------------------------

_REF_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "sqrt": math.sqrt, "abs": abs}


def random_expression(rng, depth: int, env: dict) -> tuple[str, float]:
    """A random expression text and its value computed directly from the template."""
    roll = rng.random()
    if depth == 0 or roll < 0.25:
        if rng.random() < 0.5:
            name = str(rng.choice(sorted(env)))
            return name, env[name]
        x = round(float(rng.uniform(0.0, 5.0)), int(rng.integers(0, 4)))
        return repr(x), x
    if roll < 0.4:
        fname = str(rng.choice(sorted(_REF_FUNCS)))
        t, v = random_expression(rng, depth - 1, env)
        if fname == "sqrt":
            v = abs(v)
            t = f"abs({t})"
        try:
            return f"{fname}({t})", _REF_FUNCS[fname](v)
        except (OverflowError, ValueError):
            return t, v
    if roll < 0.5:
        t, v = random_expression(rng, depth - 1, env)
        return f"-({t})", -v
    op = str(rng.choice(["+", "-", "*", "/"]))
    lt, lv = random_expression(rng, depth - 1, env)
    rt, rv = random_expression(rng, depth - 1, env)
    if op == "/" and abs(rv) < 1e-3:
        op = "*"
    if op == "+":
        value = lv + rv
    elif op == "-":
        value = lv - rv
    elif op == "*":
        value = lv * rv
    else:
        value = lv / rv
    return f"({lt}){op}({rt})", value


@check("expr.fuzz_oracle", "evaluator matches direct evaluation of 1000 random templates")
def _fuzz(seed, n=1000):
    rng = rng_for(seed, "expr.fuzz_oracle")
    worst = 0.0
    tested = 0
    for _ in range(n):
        env = {k: float(rng.uniform(-2.0, 2.0)) for k in ("x1", "x2", "u", "ux", "uy")}
        text, ref = random_expression(rng, int(rng.integers(1, 6)), env)
        if not math.isfinite(ref) or abs(ref) > 1e100:
            continue
        try:
            got = eval_expr(parse_expr(text), env)
        except NonFiniteResult:
            continue
        tested += 1
        worst = max(worst, abs(got - ref) / max(1.0, abs(ref)))
    return worst <= 1e-12 and tested >= 0.9 * n, {"tested": tested, "max_relative_error": worst}


@check("expr.roundtrip", "pretty-print after parse is a fixed point")
def _roundtrip(seed, n=1000):
    rng = rng_for(seed, "expr.roundtrip")
    ok = True
    for _ in range(n):
        env = {k: 1.0 for k in ("x1", "x2", "u", "ux", "uy")}
        text, _ = random_expression(rng, int(rng.integers(1, 6)), env)
        once = str(parse_expr(text))
        ok &= str(parse_expr(once)) == once and parse_expr(once) == parse_expr(text)
    return ok, {"instances": n}


# spectral --------------------------------------------------------------------

LAPLACE = CoefficientField.laplacian()


def _eigs(poly, k, coeff=LAPLACE, h=SPECTRAL_H):
    return np.array(eigenvalues(poly, coeff, k, h).eigenvalues)


@check("spectral.monotonicity", "eigenvalues do not increase when the domain grows")
def _mono(seed, n=INSTANCES):
    rng = rng_for(seed, "spectral.monotonicity")
    worst = -math.inf
    used = 0
    while used < n:
        outer = _draw_meshable(rng)
        c, _ = inradius_center(outer)
        # pull each vertex towards the centre by its own factor: contained by convexity
        pull = rng.uniform(0.85, 1.0, len(outer))[:, None]
        inner = convex_hull(c + pull * (outer.vertices - c))
        if not contains(outer, inner) or not _meshable(inner, SPECTRAL_H):
            continue
        used += 1
        k = int(rng.integers(1, 6))
        lo, hi = _eigs(inner, k), _eigs(outer, k)
        worst = max(worst, float(np.max((hi - lo) / hi)))
    return worst <= SLACK, {"instances": n, "max_relative_violation": worst, "slack": SLACK}


@check("spectral.boundedness", "box eigenvalue <= domain eigenvalue <= inscribed-ball eigenvalue")
def _bounded(seed, n=20):
    rng = rng_for(seed, "spectral.boundedness")
    worst = -math.inf
    for _ in range(n):
        p = _draw_meshable(rng)
        bb = p.bounding_box()
        c, rho = inradius_center(p)
        ball = regular_polygon(64, rho * (1 - 1e-9), c)
        lam_box = _eigs(bb.as_polygon(), 2)
        lam = _eigs(p, 2)
        lam_ball = _eigs(ball, 2, h=min(SPECTRAL_H, rho / 4))
        worst = max(worst, float(np.max((lam_box - lam) / lam)), float(np.max((lam - lam_ball) / lam_ball)))
    return worst <= SLACK, {"instances": n, "max_relative_violation": worst}


@check("spectral.homogeneity", "lambda_1(2 Omega) * 4 = lambda_1(Omega)")
def _homog(seed, n=INSTANCES):
    rng = rng_for(seed, "spectral.homogeneity")
    worst = 0.0
    for _ in range(n):
        p = _draw_meshable(rng, h=0.1)
        big = scale_about(p, p.centroid, 2.0)
        # the coarse and the doubled mesh share no nodes, so this is a real check
        a = _eigs(p, 1, h=0.05)[0]
        b = _eigs(big, 1, h=0.07)[0]
        worst = max(worst, abs(4 * b - a) / a)
    return worst <= 0.005, {"instances": n, "max_relative_error": worst}


@check("spectral.continuity_bracket", "(1 + t eps)^-2 lam <= lam_n <= (1 + t eps)^2 lam along jitter")
def _bracket(seed, n=INSTANCES):
    rng = rng_for(seed, "spectral.continuity_bracket")
    levels = [2.0 ** -k for k in range(2, 7)]
    worst = -math.inf
    used = 0
    while used < n:
        p = _draw_meshable(rng)
        xi = _fixed_jitter(p, rng)
        seq = [convex_hull(p.vertices + e * xi) for e in levels]
        if not all(_meshable(q, SPECTRAL_H) for q in seq):
            continue
        used += 1
        _, rho = inradius_center(p)
        lam = _eigs(p, 3)
        for eps, q in zip(levels, seq):
            _, rho_n = inradius_center(q)
            t = 1.0 / min(rho, rho_n)
            f = (1 + t * eps) ** 2
            lam_n = _eigs(q, 3)
            worst = max(worst, float(np.max(lam / f - lam_n) / lam.max()), float(np.max(lam_n - f * lam) / lam.max()))
    return worst <= SLACK, {"instances": n, "max_relative_violation": worst}


@check("spectral.nonconstant_continuity", "lambda_1 deviation vanishes for variable coefficients")
def _nonconst(seed, n=10):
    rng = rng_for(seed, "spectral.nonconstant_continuity")
    coeff = CoefficientField("1+0.5*x1*x1", "0", "1+0.5*x1*x1")
    levels = [2.0 ** -k for k in range(3, 11)]
    ok = True
    worst_tail = 0.0
    used = 0
    while used < n:
        p = _draw_meshable(rng)
        xi = _fixed_jitter(p, rng)
        seq = [convex_hull(p.vertices + e * xi) for e in levels]
        if not all(_meshable(q, SPECTRAL_H) for q in seq):
            continue
        used += 1
        lam = _eigs(p, 1, coeff)[0]
        dev = np.array([abs(_eigs(q, 1, coeff)[0] - lam) for q in seq])
        # from eps = 2^-4 on the deviations must shrink, up to mesh noise
        noise = 2e-4 * lam
        ok &= bool(np.all(np.diff(dev[1:]) <= noise)) and dev[-1] <= 0.1 * dev[1] + noise
        worst_tail = max(worst_tail, float(dev[-1] / lam))
    return ok, {"instances": n, "max_final_relative_deviation": worst_tail}


@check("spectral.zero_order_shift", "c0 = 1 shifts every Laplacian eigenvalue by exactly 1")
def _shift(seed, n=10):
    rng = rng_for(seed, "spectral.zero_order_shift")
    worst = 0.0
    ok = True
    for _ in range(n):
        p = _draw_meshable(rng)
        base = _eigs(p, 4)
        shifted = _eigs(p, 4, CoefficientField.laplacian("1"))
        varying = _eigs(p, 4, CoefficientField.laplacian("x1*x1+x2*x2"))
        worst = max(worst, float(np.max(np.abs(shifted - base - 1) / (base + 1))))
        ok &= bool(np.all(varying >= base * (1 - 1e-10)))
    return ok and worst <= 1e-6, {"instances": n, "max_relative_error": worst}


@check("spectral.galerkin_orthogonality", "discrete source residual below 1e-10")
def _galerkin(seed, n=10):
    rng = rng_for(seed, "spectral.galerkin_orthogonality")
    worst = 0.0
    worst_energy = 0.0
    for _ in range(n):
        p = _draw_meshable(rng)
        f = f"{rng.uniform(0.5, 2):.3f}+x1*x2*{rng.uniform(-1, 1):.3f}"
        sol = solve_source(p, CoefficientField("1+0.5*x1*x1", "0.1", "1"), f, SPECTRAL_H)
        worst = max(worst, sol.residual)
        worst_energy = max(worst_energy, abs(sol.energy - sol.work) / abs(sol.work))
    return worst <= 1e-10 and worst_energy <= 1e-8, {"instances": n, "max_residual": worst, "max_energy_gap": worst_energy}


@check("spectral.convergence_order", "lambda_1 of the unit square converges at order >= 1.7")
def _order(seed):
    sq = convex_hull([[0, 0], [1, 0], [1, 1], [0, 1]])
    hs = np.array([0.08, 0.04, 0.02])
    exact = 2 * math.pi ** 2
    err = np.array([_eigs(sq, 1, h=h)[0] - exact for h in hs]) / exact
    order = float(np.polyfit(np.log(hs), np.log(err), 1)[0])
    return order >= 1.7 and bool(np.all(err > 0)), {"errors": err.tolist(), "order": order}


# Newton / boundary functionals -------------------------------------------------

def random_profile(rng, n_r: int = 400) -> RadialProfile:
    R = float(rng.uniform(0.5, 2.0))
    M = float(rng.uniform(0.1, 3.0))
    raw = M * rng.random(n_r + 1)
    return RadialProfile(R, M, project_profile(raw + np.linspace(M, 0, n_r + 1), M, R / n_r))


@check("newton.positivity", "resistances are nonnegative and bounded by the flat disk")
def _positivity(seed, n=INSTANCES):
    rng = rng_for(seed, "newton.positivity")
    ok = True
    for _ in range(n):
        p = random_profile(rng)
        r = resistance_profile(p)
        ok &= 0 <= r <= math.pi * p.R ** 2 * (1 + 1e-12) and resistance_boundary_axisym(p) >= 0
        poly = random_convex_polygon(rng)
        ok &= boundary_functional_2d(poly, POSITIVE_PART_CUBE) >= 0
    return ok, {"instances": n}


@check("newton.profile_boundary_agreement", "profile and surface forms agree on random profiles")
def _agreement(seed, n=20):
    rng = rng_for(seed, "newton.profile_boundary_agreement")
    worst = 0.0
    for _ in range(n):
        p = random_profile(rng)
        a, b = resistance_profile(p), resistance_boundary_axisym(p)
        worst = max(worst, abs(a - b) / a)
    return worst <= 1e-6, {"instances": n, "max_relative_gap": worst}


@check("newton.slope_law", "optimized profile: flat top, outside slopes >= 0.95")
def _slopes(seed):
    res = newton_optimize(1.0, 1.0, 200, 20000, seed)
    p = res.profile
    r_star = p.flat_radius()
    outside = np.abs(p.slopes[(np.arange(p.n_r) + 1) * p.dr > r_star + 1e-12])
    min_slope = float(outside.min()) if outside.size else math.inf
    ok = res.value < math.pi / 2 and r_star >= 0.2 and min_slope >= 0.95
    return ok, {"resistance": res.value, "flat_radius": r_star, "min_outside_slope": min_slope}


@check("newton.lower_semicontinuity", "boundary functional is lower semicontinuous along jitter")
def _lsc(seed, n=INSTANCES):
    rng = rng_for(seed, "newton.lower_semicontinuity")
    worst = -math.inf
    levels = [2.0 ** -k for k in range(3, 21)]
    for _ in range(n):
        p = random_convex_polygon(rng)
        xi = _fixed_jitter(p, rng)
        base = boundary_functional_2d(p, POSITIVE_PART_CUBE)
        tail = [boundary_functional_2d(convex_hull(p.vertices + e * xi), POSITIVE_PART_CUBE) for e in levels]
        worst = max(worst, base - min(tail[-4:]))
    return worst <= 1e-3, {"instances": n, "max_shortfall": worst}


# optimizer -------------------------------------------------------------------

def _small_problem(seed: int, objective: str = "boundary_integral") -> ShapeProblem:
    box = Box((0.0, 0.0), (3.0, 2.0))
    return ShapeProblem(objective, box, 2.0, n_theta=16, h=0.2, budget=60, seed=seed,
                        f="1+0.3*x1" if objective == "boundary_integral" else "1")


@check("optimizer.feasibility", "every evaluated candidate lies in the admissible class")
def _feasible(seed):
    prob = _small_problem(seed)
    bad = []
    floor_bad = []
    per_d = prob.m / prob.box.perimeter

    def hook(i, poly, value):
        if not (prob.box.contains(poly) and abs(poly.area - prob.m) <= 1e-6 * prob.m):
            bad.append(i)
        _, rho = inradius_center(poly)
        if not (rho >= prob.m / poly.perimeter and prob.m / poly.perimeter > 0.99 * per_d):
            floor_bad.append(i)

    res = optimize(prob, hook)
    return not bad and not floor_bad, {"evaluations": res.evaluations, "infeasible": bad, "inradius_floor_violations": floor_bad}


@check("optimizer.monotone_trace", "accepted objective values never increase")
def _trace(seed):
    res = optimize(_small_problem(seed))
    vals = [v for _, v in res.trace]
    return all(b <= a for a, b in zip(vals, vals[1:])), {"accepted": len(vals)}


@check("optimizer.determinism", "identical problems give identical results")
def _determinism(seed):
    import json

    a = json.dumps(optimize(_small_problem(seed)).to_json())
    b = json.dumps(optimize(_small_problem(seed)).to_json())
    c = json.dumps(optimize(_small_problem(seed, "eigenvalue")).to_json())
    d = json.dumps(optimize(_small_problem(seed, "eigenvalue")).to_json())
    return a == b and c == d, {}


@check("optimizer.selection_nesting", "selection levels are nested and pairwise eps-close")
def _nesting(seed, n=100):
    rng = rng_for(seed, "optimizer.selection_nesting")
    box = Box((0.0, 0.0), (4.0, 4.0))
    bodies = [project_to_class(random_hull(rng, 8, box), box, 2.0) for _ in range(n)]
    ladder = [0.5, 0.25, 0.125, 0.0625]
    sel = blaschke_select(bodies, ladder, box=box)
    ok = all(set(b) <= set(a) for a, b in zip(sel.indices, sel.indices[1:]))
    for eps, ix in zip(ladder, sel.indices):
        ok &= all(hausdorff_distance(bodies[i], bodies[j]) <= eps for i in ix for j in ix)
    ok &= all(hausdorff_distance(sel.limit, bodies[i]) <= ladder[-1] for i in sel.final)
    return ok, {"sizes": [len(ix) for ix in sel.indices]}


# running ---------------------------------------------------------------------

def select(suite: str = "all") -> list[Check]:
    if suite == "all":
        checks = list(REGISTRY.values())
    elif suite in SUITES:
        checks = [c for c in REGISTRY.values() if c.suite == suite]
    else:
        raise ValueError(f"unknown suite {suite!r}; choose from all, {', '.join(SUITES)}")
    return sorted(checks, key=lambda c: c.id)


def run_check(c: Check, seed: int) -> CheckResult:
    t0 = time.perf_counter()
    try:
        passed, detail = c.fn(seed)
    except Exception as exc:  # a crashing check is a failing check
        passed, detail = False, {"error": f"{type(exc).__name__}: {exc}", "trace": traceback.format_exc(limit=3)}
    return CheckResult(c.id, bool(passed), _plain(detail), time.perf_counter() - t0)


def run_suite(suite: str = "all", seed: int = 0, on_result=None) -> list[CheckResult]:
    out = []
    for c in select(suite):
        r = run_check(c, seed)
        if on_result is not None:
            on_result(r)
        out.append(r)
    return out


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def format_table(results: list[CheckResult]) -> str:
    width = max((len(r.id) for r in results), default=10)
    return "\n".join(f"{'PASS' if r.passed else 'FAIL'}  {r.id:<{width}}  {r.seconds:8.2f}s" for r in results)


def summary(results: list[CheckResult], suite: str, seed: int) -> dict:
    return {
        "suite": suite,
        "seed": seed,
        "passed": sum(r.passed for r in results),
        "failed": sum(not r.passed for r in results),
        "checks": [{"id": r.id, "passed": r.passed, "detail": r.detail} for r in results],
    }


__all__ = ["REGISTRY", "SUITES", "Check", "CheckResult", "format_table", "run_check", "run_suite", "select", "summary"]
