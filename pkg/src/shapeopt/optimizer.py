"""Shape optimization over convex bodies of fixed area inside a box.

``optimize`` runs a derivative-free coordinate search on the radial samples of
the current body; every candidate is pushed back into the admissible class by
``project_to_class`` before it is evaluated.  ``newton_optimize_profile``
does the same for radial height profiles, and ``blaschke_select`` extracts
nested Hausdorff-clustered subsequences from a family of bodies.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import EmptySelection, InfeasibleVolume, InputError, NumericalError, ObjectiveFailure, ShapeOptError
from .expr import BOUNDARY_VARIABLES, FIELD_VARIABLES, CoefficientField, as_expr
from .fem import eigenvalues, integral_functional, solve_source
from .functionals import RadialProfile, boundary_functional_2d, resistance_profile
from .geometry import (
    Box,
    ConvexPolygon,
    RadialFunction,
    _project,
    hausdorff_distance,
    inradius_center,
    minkowski_mean,
    radial_parametrization,
)

OBJECTIVES = ("eigenvalue", "source_integral", "boundary_integral")
DELTA_START = 0.1
DELTA_FLOOR = 1e-3
PROJECTION_TOL = 1e-9


@dataclass(frozen=True)
class ShapeProblem:
    """Objective plus the constraint data ``(box, m)`` and search settings.

    ``objective`` is one of ``eigenvalue`` (uses ``k`` and ``coeff``),
    ``source_integral`` (``coeff``, ``f``, ``j``) or ``boundary_integral``
    (``f`` over ``x1, x2, n1, n2``).
    """

    objective: str
    box: Box
    m: float
    n_theta: int = 64
    h: float = 0.05
    budget: int = 500
    seed: int = 0
    k: int = 1
    coeff: CoefficientField = field(default_factory=CoefficientField.laplacian)
    f: str = "1"
    j: str = "u"

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise InputError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if not self.m > 0:
            raise InputError(f"area m must be positive, got {self.m}")
        if self.m > self.box.area:
            raise InfeasibleVolume(f"area m = {self.m} exceeds area(D) = {self.box.area}")
        if int(self.n_theta) != self.n_theta or self.n_theta < 16:
            raise InputError(f"n_theta must be an integer >= 16, got {self.n_theta}")
        if int(self.budget) != self.budget or self.budget < 1:
            raise InputError(f"budget must be a positive integer, got {self.budget}")
        if not self.h > 0:
            raise InputError(f"mesh size must be positive, got {self.h}")
        if self.objective == "eigenvalue" and (int(self.k) != self.k or self.k < 1):
            raise InputError(f"k must be a positive integer, got {self.k}")
        # parse eagerly so that bad expressions fail before any work is done
        if self.objective == "boundary_integral":
            as_expr(self.f, BOUNDARY_VARIABLES)
        elif self.objective == "source_integral":
            as_expr(self.f, frozenset({"x1", "x2"}))
            as_expr(self.j, FIELD_VARIABLES)

    def evaluate(self, poly: ConvexPolygon) -> float:
        if self.objective == "eigenvalue":
            spectrum = eigenvalues(poly, self.coeff, int(self.k), self.h, box=self.box)
            return spectrum.eigenvalues[-1]
        if self.objective == "source_integral":
            sol = solve_source(poly, self.coeff, self.f, self.h, box=self.box)
            return integral_functional(sol, self.j)
        return boundary_functional_2d(poly, self.f)

    def to_json(self) -> dict:
        out = {
            "objective": self.objective,
            "box": [*self.box.lower, *self.box.upper],
            "m": self.m,
            "n_theta": self.n_theta,
            "h": self.h,
            "budget": self.budget,
            "seed": self.seed,
        }
        if self.objective == "eigenvalue":
            out.update(k=self.k, coeff=self.coeff.to_json())
        elif self.objective == "source_integral":
            out.update(coeff=self.coeff.to_json(), f=str(self.f), j=str(self.j))
        else:
            out.update(f=str(self.f))
        return out


@dataclass
class ProjectionStats:
    projections: int = 0
    failures: int = 0
    iterations: int = 0
    max_area_error: float = 0.0

    def to_json(self) -> dict:
        return {
            "projections": self.projections,
            "failures": self.failures,
            "mean_iterations": self.iterations / self.projections if self.projections else 0.0,
            "max_relative_area_error": self.max_area_error,
        }


@dataclass(frozen=True, eq=False)
class OptResult:
    best: ConvexPolygon
    best_value: float
    trace: list
    evaluations: int
    stats: ProjectionStats
    history: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "best_value": self.best_value,
            "vertices": self.best.vertices.tolist(),
            "trace": [[i, v] for i, v in self.trace],
            "evaluations": self.evaluations,
            "projection": self.stats.to_json(),
        }

    def trace_csv(self) -> str:
        """Every evaluation as ``evaluation,value,accepted``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["evaluation", "value", "accepted"])
        for i, v, acc in self.history:
            w.writerow([i, repr(v), int(acc)])
        return buf.getvalue()


def initial_body(problem: ShapeProblem) -> ConvexPolygon:
    """Regular ``n_theta``-gon of area ``m`` centred in the box."""
    c = problem.box.center
    n = problem.n_theta
    radius = math.sqrt(2.0 * problem.m / (n * math.sin(2.0 * math.pi / n)))
    pts = RadialFunction(c, np.full(n, radius)).points()
    poly, _ = _project(pts, problem.box, problem.m, PROJECTION_TOL, 200)
    return poly


def _sample_center(poly: ConvexPolygon, box: Box) -> np.ndarray:
    c = np.asarray(box.center, dtype=np.float64)
    _, rho = inradius_center(poly)
    # keep the box centre while it is comfortably inside, else fall back
    if poly.signed_depth(c[None, :])[0] >= 0.25 * rho:
        return c
    return inradius_center(poly)[0]


def optimize(problem: ShapeProblem,
             on_evaluate: Callable[[int, ConvexPolygon, float], None] | None = None) -> OptResult:
    """Projected cyclic coordinate search over radial samples.

    Starting from the centred disk, each sweep visits the ``n_theta`` samples
    in a seeded random order and tries the factors ``1 + delta`` then
    ``1 - delta``; the first strict improvement is accepted.  A sweep without
    improvement halves ``delta``; the run ends when ``delta`` drops below
    1e-3 or the evaluation budget is spent.
    """
    rng = np.random.default_rng(problem.seed)
    stats = ProjectionStats()
    history: list = []
    trace: list = []
    count = 0

    def partial():
        return OptResult(best, best_value, list(trace), count, stats, list(history))

    def evaluate(poly):
        nonlocal count
        count += 1
        try:
            value = float(problem.evaluate(poly))
        except NumericalError as exc:
            raise ObjectiveFailure(f"objective failed at evaluation {count}: {exc}", partial()) from exc
        if not math.isfinite(value):
            raise ObjectiveFailure(f"objective returned {value} at evaluation {count}", partial())
        if on_evaluate is not None:
            on_evaluate(count, poly, value)
        return value

    best = initial_body(problem)
    best_value = math.nan
    best_value = evaluate(best)
    history.append((count, best_value, True))
    trace.append((count, best_value))
    delta = DELTA_START
    n = problem.n_theta
    while count < problem.budget and delta >= DELTA_FLOOR:
        improved = False
        for i in rng.permutation(n):
            if count >= problem.budget:
                break
            radial = radial_parametrization(best, n, _sample_center(best, problem.box))
            for factor in (1.0 + delta, 1.0 - delta):
                if count >= problem.budget:
                    break
                samples = radial.samples.copy()
                samples[i] *= factor
                stats.projections += 1
                try:
                    cand, iters = _project(RadialFunction(radial.center, samples).points(),
                                           problem.box, problem.m, PROJECTION_TOL, 200)
                except ShapeOptError:
                    stats.failures += 1
                    continue
                stats.iterations += iters
                stats.max_area_error = max(stats.max_area_error, abs(cand.area - problem.m) / problem.m)
                value = evaluate(cand)
                accepted = value < best_value - 1e-12 * abs(best_value)
                history.append((count, value, accepted))
                if accepted:
                    best, best_value = cand, value
                    trace.append((count, value))
                    improved = True
                    break
        if not improved:
            delta /= 2.0
    return partial()


# Newton's problem ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NewtonResult:
    profile: RadialProfile
    value: float
    evaluations: int
    trace: list

    def to_json(self) -> dict:
        return {
            "resistance": self.value,
            "R": self.profile.R,
            "M": self.profile.M,
            "n_r": self.profile.n_r,
            "flat_radius": self.profile.flat_radius(),
            "evaluations": self.evaluations,
            "trace": [[i, v] for i, v in self.trace],
        }


def project_profile(u, M: float, dr: float) -> np.ndarray:
    """Nearest-ish point of ``{0 <= u <= M, nonincreasing, concave}``."""
    out, _ = _kernels.project_concave_profile(np.asarray(u, dtype=np.float64), M, dr)
    return out


def newton_optimize(M: float, R: float, n_r: int = 200, budget: int = 20000, seed=0,
                    delta_floor: float = 1e-7) -> NewtonResult:
    """Projected coordinate descent on the heights, starting from the cone.

    Steps of ``+-delta`` (``delta = 0.1 M`` initially, halved after a sweep with
    no improvement) are projected back onto the concave class before the
    resistance is evaluated.
    """
    if not (M > 0 and math.isfinite(M)):
        raise InputError(f"M must be positive, got {M}")
    if not (R > 0 and math.isfinite(R)):
        raise InputError(f"R must be positive, got {R}")
    if int(n_r) != n_r or n_r < 50:
        raise InputError(f"n_r must be an integer >= 50, got {n_r}")
    if int(budget) != budget or budget < 1:
        raise InputError(f"budget must be a positive integer, got {budget}")
    n_r = int(n_r)
    dr = R / n_r
    rng = np.random.default_rng(seed)
    u = project_profile(M * (1.0 - np.arange(n_r + 1) * dr / R), M, dr)
    value = _kernels.profile_resistance(u, dr)
    count = 1
    trace = [(count, value)]
    delta = 0.1 * M
    while count < budget and delta > delta_floor * M:
        improved = False
        for i in rng.permutation(n_r + 1):
            if count >= budget:
                break
            for sign in (1.0, -1.0):
                if count >= budget:
                    break
                cand = u.copy()
                cand[i] += sign * delta
                cand = project_profile(cand, M, dr)
                v = _kernels.profile_resistance(cand, dr)
                count += 1
                if v < value - 1e-15:
                    u, value = cand, v
                    trace.append((count, value))
                    improved = True
                    break
        if not improved:
            delta /= 2.0
    profile = RadialProfile(R, M, u)
    return NewtonResult(profile, resistance_profile(profile), count, trace)


def newton_optimize_profile(M: float, R: float, n_r: int = 200, budget: int = 20000, seed=0) -> RadialProfile:
    return newton_optimize(M, R, n_r, budget, seed).profile


# selection -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Selection:
    indices: list
    limit: ConvexPolygon
    levels: list
    diameters: list

    @property
    def final(self) -> list:
        return self.indices[-1]

    def to_json(self) -> dict:
        return {
            "levels": [
                {"epsilon": e, "indices": ix, "max_pairwise": d}
                for e, ix, d in zip(self.levels, self.indices, self.diameters)
            ],
            "limit": self.limit.vertices.tolist(),
        }


def pairwise_hausdorff(bodies: Sequence[ConvexPolygon]) -> np.ndarray:
    n = len(bodies)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = hausdorff_distance(bodies[i], bodies[j])
    return d


def _largest_cluster(pool: list[int], dist: np.ndarray, eps: float) -> list[int]:
    best: list[int] = []
    for seed in pool:
        cluster = [seed]
        for j in pool:
            if j != seed and all(dist[j, c] <= eps for c in cluster):
                cluster.append(j)
        # strict comparison: ties go to the earliest seed
        if len(cluster) > len(best):
            best = cluster
    return sorted(best)


def blaschke_select(bodies: Sequence[ConvexPolygon], ladder: Sequence[float], *,
                    box: Box | None = None, min_size: int = 1) -> Selection:
    """Nested clusters of bodies that are pairwise eps-close in Hausdorff distance.

    For each ``eps`` of the strictly decreasing ladder the largest pairwise
    ``eps``-close cluster of the surviving bodies is kept (greedy per seed,
    ties to the earliest seed).  The limit candidate is the Minkowski mean of
    the final cluster, which lies within the final ``eps`` of every member.
    """
    bodies = list(bodies)
    ladder = [float(e) for e in ladder]
    if not ladder:
        raise InputError("epsilon ladder is empty")
    if any(e <= 0 for e in ladder) or any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise InputError(f"epsilon ladder must be positive and strictly decreasing, got {ladder}")
    if box is not None:
        outside = [i for i, b in enumerate(bodies) if not box.contains(b)]
        if outside:
            raise InputError(f"bodies {outside[:5]} are not inside the box")
    if not bodies:
        raise EmptySelection("no bodies to select from")
    dist = pairwise_hausdorff(bodies)
    pool = list(range(len(bodies)))
    levels, diam = [], []
    for eps in ladder:
        pool = _largest_cluster(pool, dist, eps)
        if len(pool) < max(1, min_size):
            raise EmptySelection(f"selection at eps={eps} has {len(pool)} bodies, need {min_size}")
        levels.append(list(pool))
        sub = dist[np.ix_(pool, pool)]
        diam.append(float(sub.max()) if len(pool) > 1 else 0.0)
    limit = minkowski_mean([bodies[i] for i in pool])
    return Selection(levels, limit, ladder, diam)


__all__ = [
    "OBJECTIVES",
    "NewtonResult",
    "OptResult",
    "ProjectionStats",
    "Selection",
    "ShapeProblem",
    "blaschke_select",
    "initial_body",
    "newton_optimize",
    "newton_optimize_profile",
    "optimize",
    "pairwise_hausdorff",
    "project_profile",
]
