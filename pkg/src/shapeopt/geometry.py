"""Exact geometry of convex polygons.

Everything here works on :class:`ConvexPolygon`, an immutable CCW vertex loop
starting at its lexicographically smallest vertex. Distances between bodies
are Hausdorff distances; since every body is convex, each directed distance
is attained at a vertex of the source polygon and is computed exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import (
    DegenerateInput,
    InfeasibleVolume,
    InputError,
    NegativeEpsilon,
    NonConvergence,
    NonConvexInput,
    NonPositiveScale,
)

EPS_GEOM = 1e-12


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InputError(f"expected an (n, 2) array of points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise InputError("points must be finite")
    return pts


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _monotone_chain(pts: np.ndarray) -> np.ndarray:
    """Strict convex hull, CCW from the lexicographic minimum."""
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    span = float(np.max(np.ptp(pts, axis=0))) if len(pts) else 0.0
    tol = EPS_GEOM * span * span

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= tol:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= tol:
            upper.pop()
        upper.append(p)
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) == 0:
        return pts[:1]
    # drop near-duplicate consecutive vertices
    keep = [0]
    for i in range(1, len(hull)):
        if np.hypot(*(hull[i] - hull[keep[-1]])) > EPS_GEOM * max(span, 1e-300):
            keep.append(i)
    if len(keep) > 1 and np.hypot(*(hull[keep[-1]] - hull[0])) <= EPS_GEOM * span:
        keep.pop()
    return hull[keep]


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """A convex body in the plane, stored as a CCW loop of vertices.

    Build instances with :func:`polygon_from_vertices` or :func:`convex_hull`;
    the constructor trusts its input.
    """

    vertices: np.ndarray
    area: float
    perimeter: float

    @classmethod
    def _from_hull(cls, hull: np.ndarray) -> "ConvexPolygon":
        v = np.array(hull, dtype=np.float64)
        v.setflags(write=False)
        edges = np.roll(v, -1, axis=0) - v
        return cls(v, _shoelace(v), float(np.sum(np.hypot(edges[:, 0], edges[:, 1]))))

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        return f"ConvexPolygon(n={len(self)}, area={self.area:.6g}, perimeter={self.perimeter:.6g})"

    @cached_property
    def diameter(self) -> float:
        d = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", d, d))))

    @property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        c = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        return np.array([np.sum((v[:, 0] + w[:, 0]) * c), np.sum((v[:, 1] + w[:, 1]) * c)]) / (
            6.0 * self.area
        )

    def bounding_box(self) -> "Box":
        return Box(tuple(self.vertices.min(axis=0)), tuple(self.vertices.max(axis=0)))

    def edge_lines(self) -> tuple[np.ndarray, np.ndarray]:
        """Outward unit normals ``n`` and offsets ``b`` with the body = {n.x <= b}."""
        return self._lines

    @cached_property
    def _lines(self):
        normals, _ = edge_normals(self)
        normals.setflags(write=False)
        b = np.einsum("ij,ij->i", normals, self.vertices)
        b.setflags(write=False)
        return normals, b

    def signed_depth(self, points) -> np.ndarray:
        """Distance from each point to the nearest edge line; positive inside."""
        n, b = self.edge_lines()
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return np.min(b[None, :] - pts @ n.T, axis=1)

    def distance(self, points) -> np.ndarray:
        """Euclidean distance from points to the body (zero inside)."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return _kernels.convex_polygon_distance(pts, self.vertices)

    def translate(self, offset) -> "ConvexPolygon":
        return ConvexPolygon._from_hull(self.vertices + np.asarray(offset, dtype=np.float64))

    def to_json(self) -> dict:
        return {
            "vertices": self.vertices.tolist(),
            "area": self.area,
            "perimeter": self.perimeter,
        }


@dataclass(frozen=True)
class Box:
    """Axis-aligned container ``[lower, upper]``."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(x) for x in self.lower)
        hi = tuple(float(x) for x in self.upper)
        if len(lo) != 2 or len(hi) != 2:
            raise InputError("box corners must be 2-D points")
        if not (lo[0] < hi[0] and lo[1] < hi[1]):
            raise InputError(f"box lower {lo} must be below upper {hi} componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def parse(cls, text: str) -> "Box":
        parts = text.split()
        if len(parts) != 4:
            raise InputError(f"box needs 'xmin ymin xmax ymax', got {text!r}")
        try:
            x0, y0, x1, y1 = (float(p) for p in parts)
        except ValueError as exc:
            raise InputError(f"bad box {text!r}: {exc}") from None
        return cls((x0, y0), (x1, y1))

    @property
    def area(self) -> float:
        return (self.upper[0] - self.lower[0]) * (self.upper[1] - self.lower[1])

    @property
    def perimeter(self) -> float:
        return 2.0 * ((self.upper[0] - self.lower[0]) + (self.upper[1] - self.lower[1]))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.array(self.lower) + np.array(self.upper))

    def as_polygon(self) -> ConvexPolygon:
        (x0, y0), (x1, y1) = self.lower, self.upper
        return ConvexPolygon._from_hull(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]))

    def contains(self, poly: ConvexPolygon, tol: float | None = None) -> bool:
        if tol is None:
            tol = EPS_GEOM * max(self.upper[0] - self.lower[0], self.upper[1] - self.lower[1])
        v = poly.vertices
        return bool(
            np.all(v >= np.array(self.lower) - tol) and np.all(v <= np.array(self.upper) + tol)
        )


def convex_hull(points) -> ConvexPolygon:
    """Convex hull of arbitrary points (no convex-position check)."""
    pts = _as_points(points)
    if len(pts) < 3:
        raise DegenerateInput(f"need at least 3 points, got {len(pts)}")
    hull = _monotone_chain(pts)
    if len(hull) < 3 or _shoelace(hull) <= 0.0:
        raise DegenerateInput("points are collinear or coincident; hull has no area")
    return ConvexPolygon._from_hull(hull)


def polygon_from_vertices(points) -> ConvexPolygon:
    """Build a polygon from points in convex position, in any order.

    Raises :class:`NonConvexInput` if some input point lies strictly inside the
    hull of the others (deeper than ``EPS_GEOM`` times the diameter).
    """
    pts = _as_points(points)
    poly = convex_hull(pts)
    depth = poly.signed_depth(pts)
    worst = int(np.argmax(depth))
    if depth[worst] > EPS_GEOM * poly.diameter:
        raise NonConvexInput(
            f"point {pts[worst].tolist()} lies inside the hull (depth {depth[worst]:.3g})"
        )
    return poly


def area(poly: ConvexPolygon) -> float:
    return poly.area


def perimeter(poly: ConvexPolygon) -> float:
    return poly.perimeter


def edge_normals(poly: ConvexPolygon) -> tuple[np.ndarray, np.ndarray]:
    """Per-edge outward unit normals and edge lengths.

    Edge ``i`` runs from vertex ``i`` to vertex ``i+1``. The closure identity
    ``sum(lengths[:, None] * normals) == 0`` holds up to rounding.
    """
    v = poly.vertices
    e = np.roll(v, -1, axis=0) - v
    lengths = np.hypot(e[:, 0], e[:, 1])
    normals = np.stack([e[:, 1], -e[:, 0]], axis=1) / lengths[:, None]
    return normals, lengths


# Chebyshev centre ------------------------------------------------------------

def _triple_center(n: np.ndarray, b: np.ndarray, i: int, j: int, k: int):
    """Point equidistant (distance t) from three edge lines, inside all three."""
    a = np.array([[n[i, 0], n[i, 1], 1.0], [n[j, 0], n[j, 1], 1.0], [n[k, 0], n[k, 1], 1.0]])
    rhs = np.array([b[i], b[j], b[k]])
    if abs(np.linalg.det(a)) < 1e-14:
        return None
    sol = np.linalg.solve(a, rhs)
    if not np.all(np.isfinite(sol)):
        return None
    return sol


def inradius_center(poly: ConvexPolygon) -> tuple[np.ndarray, float]:
    """Chebyshev centre and radius of the largest inscribed disk.

    Maximises ``rho`` subject to ``rho <= b_k - n_k.c`` for every edge. The
    optimum is the last collapse event of the inward-offset wavefront: each
    active edge vanishes when it and its two active neighbours become
    concurrent, an edge-triple candidate solved exactly as a 3x3 system. When
    the maximisers form a segment (two antiparallel tight edges) the
    lexicographically smallest endpoint is returned.
    """
    n, b = poly.edge_lines()
    m = len(b)
    prev = [(i - 1) % m for i in range(m)]
    nxt = [(i + 1) % m for i in range(m)]
    times = np.full(m, np.inf)
    for i in range(m):
        sol = _triple_center(n, b, prev[i], i, nxt[i])
        if sol is not None:
            times[i] = sol[2]
    alive = m
    t_now = 0.0
    last = 0
    while alive > 3:
        k = int(np.argmin(times))
        t_now = max(t_now, float(times[k]))
        p, q = prev[k], nxt[k]
        nxt[p] = q
        prev[q] = p
        times[k] = np.inf
        alive -= 1
        for e in (p, q):
            sol = _triple_center(n, b, prev[e], e, nxt[e])
            times[e] = np.inf if sol is None else max(float(sol[2]), t_now)
        last = p
    sol = _triple_center(n, b, prev[last], last, nxt[last])
    if sol is None:
        raise DegenerateInput("could not locate the inscribed disk")
    center, rho = sol[:2], float(sol[2])
    # ties: the maximiser set is a segment when two antiparallel edges are tight
    slack = b - n @ center - rho
    tol = 1e-9 * max(poly.diameter, 1e-300)
    tight = np.flatnonzero(slack <= tol)
    for ii in range(len(tight)):
        for jj in range(ii + 1, len(tight)):
            na, nb_ = n[tight[ii]], n[tight[jj]]
            if float(na @ nb_) < -1.0 + 1e-12:
                d = np.array([-na[1], na[0]])
                ends = []
                for direction in (d, -d):
                    rate = n @ direction
                    room = (b - rho - n @ center)
                    mask = rate > 1e-15
                    s = float(np.min(np.maximum(room[mask], 0.0) / rate[mask])) if mask.any() else 0.0
                    ends.append(center + s * direction)
                center = min(ends, key=lambda c: (round(c[0], 12), round(c[1], 12)))
                return np.asarray(center, dtype=np.float64), rho
    return np.asarray(center, dtype=np.float64), rho


# distances -------------------------------------------------------------------

def directed_hausdorff(a: ConvexPolygon, b: ConvexPolygon) -> float:
    """``sup_{x in a} d(x, b)``; attained at a vertex of ``a``."""
    return float(np.max(_kernels.convex_polygon_distance(a.vertices, b.vertices)))


def hausdorff_distance(a: ConvexPolygon, b: ConvexPolygon) -> float:
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


def contains(outer: ConvexPolygon, inner: ConvexPolygon) -> bool:
    """True iff every vertex of ``inner`` lies in ``outer`` (up to EPS_GEOM * diameter)."""
    n, b = outer.edge_lines()
    slack = b[None, :] - inner.vertices @ n.T
    return bool(np.all(slack >= -EPS_GEOM * outer.diameter))


# transforms ------------------------------------------------------------------

def scale_about(poly: ConvexPolygon, center, alpha: float) -> ConvexPolygon:
    """Homothety ``v -> center + alpha (v - center)``."""
    if not alpha > 0:
        raise NonPositiveScale(f"scale factor must be positive, got {alpha}")
    c = np.asarray(center, dtype=np.float64)
    return ConvexPolygon._from_hull(c + alpha * (poly.vertices - c))


def minkowski_dilate(poly: ConvexPolygon, eps: float, arc_segments: int = 16) -> ConvexPolygon:
    """Inscribed polygonal approximation of ``poly + B(eps)``.

    Edges are pushed out by ``eps``; each corner arc is replaced by
    ``arc_segments`` chords whose endpoints lie on the exact arc, so the
    result is contained in the true dilation.
    """
    if eps < 0:
        raise NegativeEpsilon(f"dilation radius must be >= 0, got {eps}")
    if arc_segments < 1:
        raise InputError("arc_segments must be >= 1")
    if eps == 0:
        return poly
    normals, _ = edge_normals(poly)
    v = poly.vertices
    pts = []
    for i in range(len(v)):
        n0 = normals[i - 1]
        n1 = normals[i]
        phi0 = math.atan2(n0[1], n0[0])
        turn = math.atan2(n0[0] * n1[1] - n0[1] * n1[0], float(n0 @ n1))
        phis = phi0 + turn * np.arange(arc_segments + 1) / arc_segments
        pts.append(v[i] + eps * np.stack([np.cos(phis), np.sin(phis)], axis=1))
    return convex_hull(np.concatenate(pts))


def clip_to_box(poly: ConvexPolygon, box: Box) -> ConvexPolygon:
    """Intersection with an axis-aligned box (Sutherland-Hodgman)."""
    pts = [tuple(p) for p in poly.vertices]
    (x0, y0), (x1, y1) = box.lower, box.upper
    planes = [(0, x0, 1.0), (0, x1, -1.0), (1, y0, 1.0), (1, y1, -1.0)]
    for axis, level, sign in planes:
        if not pts:
            break
        out = []
        for i in range(len(pts)):
            cur = pts[i]
            nxt_ = pts[(i + 1) % len(pts)]
            fc = sign * (cur[axis] - level)
            fn = sign * (nxt_[axis] - level)
            if fc >= 0:
                out.append(cur)
            if (fc >= 0) != (fn >= 0):
                t = fc / (fc - fn)
                p = (cur[0] + t * (nxt_[0] - cur[0]), cur[1] + t * (nxt_[1] - cur[1]))
                p = list(p)
                p[axis] = level
                out.append(tuple(p))
        pts = out
    if len(pts) < 3:
        raise DegenerateInput("polygon does not meet the box")
    return convex_hull(np.array(pts))


# radial parametrization ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Boundary as ``center + r(theta) (cos theta, sin theta)`` at uniform angles."""

    center: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        c = np.array(self.center, dtype=np.float64).reshape(2)
        s = np.array(self.samples, dtype=np.float64).reshape(-1)
        if len(s) < 3:
            raise InputError("a radial function needs at least 3 samples")
        if not (np.all(np.isfinite(s)) and np.all(s > 0)):
            raise InputError("radial samples must be positive and finite")
        c.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "samples", s)

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(len(self.samples)) / len(self.samples)

    def points(self) -> np.ndarray:
        th = self.angles
        return self.center + self.samples[:, None] * np.stack([np.cos(th), np.sin(th)], axis=1)

    def to_polygon(self) -> ConvexPolygon:
        """Reconstruct the body; the hull repairs samples that are not convex."""
        return convex_hull(self.points())


def ray_exit(poly: ConvexPolygon, origin, directions) -> tuple[np.ndarray, np.ndarray]:
    """Distance along each unit direction from an interior origin to the boundary,
    and the index of the edge that is hit."""
    n, b = poly.edge_lines()
    o = np.asarray(origin, dtype=np.float64)
    d = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    rate = d @ n.T
    room = b - n @ o
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(rate > 1e-300, room[None, :] / rate, np.inf)
    edge = np.argmin(t, axis=1)
    return t[np.arange(len(d)), edge], edge


def radial_parametrization(poly: ConvexPolygon, n_theta: int, center=None) -> RadialFunction:
    """Sample the boundary on ``n_theta`` uniform rays from ``center``
    (default: the Chebyshev centre, which is always interior)."""
    if n_theta < 8:
        raise InputError(f"n_theta must be >= 8, got {n_theta}")
    if center is None:
        center, _ = inradius_center(poly)
    else:
        center = np.asarray(center, dtype=np.float64)
        if poly.signed_depth(center[None, :])[0] <= 0:
            raise InputError("radial centre must lie inside the polygon")
    th = 2.0 * np.pi * np.arange(n_theta) / n_theta
    r, _ = ray_exit(poly, center, np.stack([np.cos(th), np.sin(th)], axis=1))
    return RadialFunction(center, r)


def minkowski_mean(polys) -> ConvexPolygon:
    """``(P_1 + ... + P_K) / K`` by merging edge vectors in angular order."""
    polys = list(polys)
    if not polys:
        raise InputError("need at least one polygon")
    start = np.zeros(2)
    edges = []
    for p in polys:
        v = p.vertices
        # lowest vertex, leftmost among ties: edge angles then run through [0, 2 pi)
        i0 = np.lexsort((v[:, 0], v[:, 1]))[0]
        start += v[i0]
        edges.append(np.roll(v, -1, axis=0) - v)
    e = np.concatenate(edges)
    ang = np.mod(np.arctan2(e[:, 1], e[:, 0]), 2.0 * np.pi)
    e = e[np.argsort(ang, kind="stable")]
    k = len(polys)
    pts = start / k + np.concatenate([np.zeros((1, 2)), np.cumsum(e, axis=0)[:-1]]) / k
    return convex_hull(pts)


# Bonnesen --------------------------------------------------------------------

@dataclass(frozen=True)
class BonnesenReport:
    area: float
    perimeter: float
    inradius: float
    slack: float

    def to_json(self) -> dict:
        return {
            "area": self.area,
            "perimeter": self.perimeter,
            "inradius": self.inradius,
            "slack": self.slack,
        }


def bonnesen_check(poly: ConvexPolygon) -> BonnesenReport:
    """Report ``inradius * perimeter - area``, positive for every convex body."""
    _, rho = inradius_center(poly)
    return BonnesenReport(poly.area, poly.perimeter, rho, rho * poly.perimeter - poly.area)


# admissible class ------------------------------------------------------------

def _project(points, box: Box, m: float, tol: float, max_iter: int):
    if not m > 0:
        raise InputError(f"target area must be positive, got {m}")
    if not tol > 0:
        raise InputError(f"tolerance must be positive, got {tol}")
    if m > box.area:
        raise InfeasibleVolume(f"area {m} exceeds the box area {box.area}")
    if isinstance(points, ConvexPolygon):
        poly = points
    else:
        poly = convex_hull(points)
    if box.contains(poly) and abs(poly.area - m) <= tol * m:
        return poly, 0
    poly = clip_to_box(poly, box)
    for it in range(1, max_iter + 1):
        if abs(poly.area - m) <= tol * m:
            return poly, it - 1
        center, _ = inradius_center(poly)
        poly = clip_to_box(scale_about(poly, center, math.sqrt(m / poly.area)), box)
    if abs(poly.area - m) <= tol * m:
        return poly, max_iter
    raise NonConvergence(
        f"area {poly.area:.12g} did not reach {m} within {max_iter} scale-and-clip iterations"
    )


def project_to_class(points, box: Box, m: float, tol: float = 1e-9,
                     max_iter: int = 200) -> ConvexPolygon:
    """Map any point set to a convex polygon inside ``box`` with area ``m``.

    Convex hull, clip to the box, then alternate rescaling about the Chebyshev
    centre by ``sqrt(m / area)`` with re-clipping until the area is within
    ``tol * m`` of the target.
    """
    return _project(points, box, m, tol, max_iter)[0]


# constructors used by tests, the optimizer and the verification suite --------

def regular_polygon(n: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0) -> ConvexPolygon:
    th = phase + 2.0 * np.pi * np.arange(n) / n
    c = np.asarray(center, dtype=np.float64)
    return convex_hull(c + radius * np.stack([np.cos(th), np.sin(th)], axis=1))


def disk_polygon(area_: float, n: int = 256, center=(0.0, 0.0)) -> ConvexPolygon:
    """Regular ``n``-gon of the given area."""
    radius = math.sqrt(2.0 * area_ / (n * math.sin(2.0 * math.pi / n)))
    return regular_polygon(n, radius, center)


def random_convex_polygon(rng: np.random.Generator, n_vertices: int | None = None,
                          radius: float = 1.0, center=(0.0, 0.0),
                          roundness: float = 0.7) -> ConvexPolygon:
    """Jittered regular polygon: angles perturbed by < 40% of the spacing, radii
    drawn from ``[roundness * radius, radius]``."""
    if n_vertices is None:
        n_vertices = int(rng.integers(5, 13))
    spacing = 2.0 * np.pi / n_vertices
    th = spacing * (np.arange(n_vertices) + rng.uniform(-0.4, 0.4, n_vertices))
    r = radius * rng.uniform(roundness, 1.0, n_vertices)
    c = np.asarray(center, dtype=np.float64)
    return convex_hull(c + r[:, None] * np.stack([np.cos(th), np.sin(th)], axis=1))


def random_hull(rng: np.random.Generator, n_points: int, box: Box) -> ConvexPolygon:
    """Hull of uniform random points in a box (thin or skewed bodies included)."""
    lo, hi = np.array(box.lower), np.array(box.upper)
    while True:
        pts = lo + (hi - lo) * rng.random((n_points, 2))
        try:
            return convex_hull(pts)
        except DegenerateInput:
            continue


def jitter(poly: ConvexPolygon, eps: float, rng: np.random.Generator) -> ConvexPolygon:
    """Hull of the vertices moved by uniform offsets of length at most ``eps``."""
    k = len(poly.vertices)
    ang = rng.uniform(0.0, 2.0 * np.pi, k)
    rad = eps * np.sqrt(rng.uniform(0.0, 1.0, k))
    return convex_hull(poly.vertices + rad[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=1))


__all__ = [
    "EPS_GEOM",
    "BonnesenReport",
    "Box",
    "ConvexPolygon",
    "RadialFunction",
    "area",
    "bonnesen_check",
    "clip_to_box",
    "contains",
    "convex_hull",
    "directed_hausdorff",
    "disk_polygon",
    "edge_normals",
    "hausdorff_distance",
    "inradius_center",
    "jitter",
    "minkowski_dilate",
    "minkowski_mean",
    "perimeter",
    "polygon_from_vertices",
    "project_to_class",
    "radial_parametrization",
    "random_convex_polygon",
    "random_hull",
    "ray_exit",
    "regular_polygon",
    "scale_about",
]
