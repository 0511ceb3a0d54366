"""Triangle meshes of convex polygons.

Boundary edges are split uniformly into pieces no longer than ``h``; the
interior is filled with a hexagonal lattice of spacing ``h`` kept at least
``h/2`` away from the boundary, then Delaunay-triangulated and relaxed by a
few rounds of Laplacian smoothing.  Boundary nodes always come first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.spatial import Delaunay

from .errors import DegenerateInput, MeshQualityFailure
from .geometry import ConvexPolygon

MIN_ANGLE_DEG = 20.0
MAX_EDGE_FACTOR = 1.5
SMOOTHING_ROUNDS = 3
REFINE_ROUNDS = 40
# lattice depth thresholds tried in turn when the first mesh is poor
_DEPTH_FACTORS = (0.5, 0.6, 0.4, 0.7)


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Conforming P1 mesh; nodes ``[0, n_boundary)`` lie on the boundary."""

    nodes: np.ndarray
    triangles: np.ndarray
    n_boundary: int
    h: float
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.triangles.setflags(write=False)

    @property
    def boundary_nodes(self) -> np.ndarray:
        return np.arange(self.n_boundary)

    @property
    def interior_nodes(self) -> np.ndarray:
        return np.arange(self.n_boundary, len(self.nodes))

    @property
    def dof(self) -> int:
        return len(self.nodes) - self.n_boundary

    @cached_property
    def areas(self) -> np.ndarray:
        return triangle_areas(self.nodes, self.triangles)

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted index pairs."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def min_angle(self) -> float:
        return float(np.degrees(triangle_angles(self.nodes, self.triangles).min()))

    def max_edge(self) -> float:
        d = self.nodes[self.edges[:, 1]] - self.nodes[self.edges[:, 0]]
        return float(np.hypot(d[:, 0], d[:, 1]).max())

    def euler_characteristic(self) -> int:
        return len(self.nodes) - len(self.edges) + len(self.triangles)

    def boundary_edges(self) -> np.ndarray:
        """Edges used by exactly one triangle."""
        t = self.triangles
        e = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        return uniq[counts == 1]


def triangle_areas(nodes: np.ndarray, tri: np.ndarray) -> np.ndarray:
    x = nodes[tri]
    d1 = x[:, 1] - x[:, 0]
    d2 = x[:, 2] - x[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def triangle_angles(nodes: np.ndarray, tri: np.ndarray) -> np.ndarray:
    """``(n_tri, 3)`` interior angles in radians."""
    x = nodes[tri]
    out = np.empty((len(tri), 3))
    for k in range(3):
        a = x[:, (k + 1) % 3] - x[:, k]
        c = x[:, (k + 2) % 3] - x[:, k]
        cosang = np.einsum("ij,ij->i", a, c) / (np.hypot(a[:, 0], a[:, 1]) * np.hypot(c[:, 0], c[:, 1]))
        out[:, k] = np.arccos(np.clip(cosang, -1.0, 1.0))
    return out


def polygon_angles(poly: ConvexPolygon) -> np.ndarray:
    """Interior corner angles (radians) of a convex polygon."""
    v = poly.vertices
    a = np.roll(v, 1, axis=0) - v
    b = np.roll(v, -1, axis=0) - v
    cosang = np.einsum("ij,ij->i", a, b) / (np.hypot(a[:, 0], a[:, 1]) * np.hypot(b[:, 0], b[:, 1]))
    return np.arccos(np.clip(cosang, -1.0, 1.0))


def _boundary_points(v: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Split every edge into equal pieces <= h; also flag which nodes are corners."""
    e = np.roll(v, -1, axis=0) - v
    lengths = np.hypot(e[:, 0], e[:, 1])
    pieces = []
    corner = []
    for i in range(len(v)):
        k = max(1, math.ceil(lengths[i] / h - 1e-9))
        t = np.arange(k) / k
        pieces.append(v[i] + t[:, None] * e[i])
        corner.extend([True] + [False] * (k - 1))
    return np.concatenate(pieces), np.array(corner)


def _lattice(poly: ConvexPolygon, h: float, min_depth: float) -> np.ndarray:
    v = poly.vertices
    c = v.mean(axis=0)
    lo, hi = v.min(axis=0), v.max(axis=0)
    dy = h * math.sqrt(3.0) / 2.0
    j = np.arange(math.floor((lo[1] - c[1]) / dy) - 1, math.ceil((hi[1] - c[1]) / dy) + 2)
    i = np.arange(math.floor((lo[0] - c[0]) / h) - 2, math.ceil((hi[0] - c[0]) / h) + 3)
    J, I = np.meshgrid(j, i, indexing="ij")
    pts = np.stack([(c[0] + h * (I + 0.5 * (J % 2))).ravel(), (c[1] + dy * J).ravel()], axis=1)
    return pts[poly.signed_depth(pts) >= min_depth]


def _orient(nodes: np.ndarray, tri: np.ndarray) -> np.ndarray:
    a = triangle_areas(nodes, tri)
    tri = tri.copy()
    neg = a < 0
    tri[neg, 1], tri[neg, 2] = tri[neg, 2].copy(), tri[neg, 1].copy()
    return tri


def _boundary_run(p: int, q: int, corner: np.ndarray) -> list[int] | None:
    """Nodes from ``p`` to ``q`` along one polygon edge, or None if they span a corner."""
    nb = len(corner)
    for step in (1, -1):
        run = [p]
        j = p
        while True:
            j = (j + step) % nb
            run.append(j)
            if j == q:
                return run
            if corner[j]:
                break
    return None


def _repair_boundary(nodes: np.ndarray, tri: np.ndarray, corner: np.ndarray) -> np.ndarray:
    """Make the triangulation conform to the subdivided boundary.

    Nodes inserted on a polygon edge are exactly collinear with its ends, so
    Delaunay may return zero-area triangles made of such nodes or use a chord
    that skips over them.  The former are dropped, the latter fanned out.
    """
    nb = len(corner)
    keep = []
    pending = [tuple(t) for t in tri]
    while pending:
        t = pending.pop()
        if all(n < nb for n in t):
            a, b, c = t
            run = _boundary_run(min(a, b, c), max(a, b, c), corner)
            if run is not None and {a, b, c} <= set(run):
                continue
        for k in range(3):
            p, q, o = t[k], t[(k + 1) % 3], t[(k + 2) % 3]
            if p < nb and q < nb and (p - q) % nb not in (1, nb - 1):
                run = _boundary_run(p, q, corner)
                if run is not None:
                    pending.extend((run[i], run[i + 1], o) for i in range(len(run) - 1))
                    break
        else:
            keep.append(t)
    return _orient(nodes, np.array(keep, dtype=np.int64))


def _triangulate_points(pts: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(Delaunay(pts).simplices, dtype=np.int64)


def _smooth(pts: np.ndarray, tri: np.ndarray, nb: int) -> np.ndarray:
    n = len(pts)
    e = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    adj = sp.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n)).tocsr()
    adj = ((adj + adj.T) > 0).astype(np.float64)
    deg = np.asarray(adj.sum(axis=1)).ravel()
    avg = (adj @ pts) / deg[:, None]
    out = pts.copy()
    out[nb:] = avg[nb:]
    return out


def _bad_triangles(nodes: np.ndarray, tri: np.ndarray, h: float) -> np.ndarray:
    ang = triangle_angles(nodes, tri).min(axis=1)
    x = nodes[tri]
    edge = np.max(np.stack([np.hypot(*(x[:, (k + 1) % 3] - x[:, k]).T) for k in range(3)], 1), axis=1)
    badness = np.maximum(np.radians(MIN_ANGLE_DEG) - ang, 0.0) + np.maximum(edge / h - MAX_EDGE_FACTOR, 0.0)
    idx = np.flatnonzero((ang < np.radians(MIN_ANGLE_DEG)) | (edge > MAX_EDGE_FACTOR * h))
    return idx[np.argsort(-badness[idx], kind="stable")]


def _circumcenters(nodes: np.ndarray, tri: np.ndarray) -> np.ndarray:
    a, b, c = nodes[tri[:, 0]], nodes[tri[:, 1]], nodes[tri[:, 2]]
    ba, ca = b - a, c - a
    d = 2.0 * (ba[:, 0] * ca[:, 1] - ba[:, 1] * ca[:, 0])
    bb = np.einsum("ij,ij->i", ba, ba)
    cc = np.einsum("ij,ij->i", ca, ca)
    ux = (ca[:, 1] * bb - ba[:, 1] * cc) / d
    uy = (ba[:, 0] * cc - ca[:, 0] * bb) / d
    return a + np.stack([ux, uy], axis=1)


def _refine(poly: ConvexPolygon, bpts: np.ndarray, corner: np.ndarray, ipts: np.ndarray, h: float):
    """Insert circumcenters of poor triangles until the quality bounds hold.

    A circumcenter that falls outside the polygon, too close to it, or inside
    the diametral circle of a boundary segment is replaced by the midpoint of
    that segment (classic encroachment rule).
    """
    for _ in range(REFINE_ROUNDS):
        pts = np.concatenate([bpts, ipts])
        tri = _repair_boundary(pts, _triangulate_points(pts), corner)
        bad = _bad_triangles(pts, tri, h)
        if bad.size == 0:
            return bpts, corner, ipts, tri
        seg_a = bpts
        seg_b = np.roll(bpts, -1, axis=0)
        mid = 0.5 * (seg_a + seg_b)
        half = 0.5 * np.hypot(*(seg_b - seg_a).T)
        split = set()
        fresh = []
        cc = _circumcenters(pts, tri[bad])
        for c in cc:
            if not np.all(np.isfinite(c)):
                continue
            dist = np.hypot(*(mid - c).T)
            enc = np.flatnonzero(dist < half * (1 + 1e-9))
            depth = poly.signed_depth(c[None, :])[0]
            if enc.size:
                split.add(int(enc[np.argmin(dist[enc])]))
            elif depth <= 0.05 * h:
                split.add(int(np.argmin(dist)))
            else:
                if fresh and np.min(np.hypot(*(np.asarray(fresh) - c).T)) < 0.25 * h:
                    continue
                fresh.append(c)
        if split:
            # encroachment takes priority; drop new interior points this round
            order = sorted(split)
            pieces = []
            flags = []
            for i in range(len(bpts)):
                pieces.append(bpts[i:i + 1])
                flags.append(corner[i])
                if i in split:
                    pieces.append(mid[i:i + 1])
                    flags.append(False)
            bpts = np.concatenate(pieces)
            corner = np.array(flags)
            near = np.zeros(len(ipts), dtype=bool)
            for i in order:
                near |= np.hypot(*(ipts - mid[i]).T) < half[i]
            ipts = ipts[~near]
        elif fresh:
            ipts = np.concatenate([ipts, np.asarray(fresh)])
        else:
            break
    raise MeshQualityFailure("refinement cap reached")


def _build(poly: ConvexPolygon, h: float, depth_factor: float) -> TriangleMesh:
    bpts, corner = _boundary_points(poly.vertices, h)
    nb = len(bpts)
    pts = np.concatenate([bpts, _lattice(poly, h, depth_factor * h)])
    tri = _triangulate_points(pts)
    for _ in range(SMOOTHING_ROUNDS):
        pts = _smooth(pts, tri, nb)
        tri = _triangulate_points(pts)
    bpts, corner, ipts, tri = _refine(poly, bpts, corner, pts[nb:], h)
    return TriangleMesh(np.concatenate([bpts, ipts]), tri, len(bpts), float(h))


def check_mesh(mesh: TriangleMesh, poly: ConvexPolygon | None = None) -> list[str]:
    """Return the list of violated mesh invariants (empty when all hold)."""
    problems = []
    h = mesh.h
    if np.any(mesh.areas <= 1e-14 * h * h):
        problems.append("triangle with nonpositive or negligible area")
    if mesh.max_edge() > MAX_EDGE_FACTOR * h * (1 + 1e-12):
        problems.append(f"max edge {mesh.max_edge():.4g} > {MAX_EDGE_FACTOR}h")
    if mesh.min_angle() < MIN_ANGLE_DEG:
        problems.append(f"min angle {mesh.min_angle():.3f} deg < {MIN_ANGLE_DEG}")
    if mesh.euler_characteristic() != 1:
        problems.append(f"Euler characteristic {mesh.euler_characteristic()} != 1")
    used = set(mesh.boundary_edges().ravel().tolist())
    if used != set(range(mesh.n_boundary)):
        problems.append("boundary nodes differ from nodes on boundary edges")
    if poly is not None:
        if abs(mesh.areas.sum() - poly.area) > 1e-12 * max(1.0, poly.area):
            problems.append("triangle areas do not partition the polygon")
    return problems


def triangulate(poly: ConvexPolygon, h: float) -> TriangleMesh:
    """Mesh ``poly`` with target edge length ``h``.

    Requires ``0 < h <= diameter/4``.  A handful of lattice offsets are tried;
    if none meets the quality bounds :class:`MeshQualityFailure` is raised.
    """
    if not (h > 0 and math.isfinite(h)):
        raise DegenerateInput(f"mesh size must be positive, got {h}")
    if h > poly.diameter / 4 * (1 + 1e-12):
        raise DegenerateInput(f"mesh size {h} exceeds diameter/4 = {poly.diameter / 4:.6g}")
    corner = np.degrees(polygon_angles(poly).min())
    if corner < MIN_ANGLE_DEG:
        raise MeshQualityFailure(
            f"polygon corner of {corner:.2f} deg is below the {MIN_ANGLE_DEG} deg mesh angle bound"
        )
    worst = None
    for factor in _DEPTH_FACTORS:
        try:
            mesh = _build(poly, h, factor)
        except MeshQualityFailure as exc:
            worst = str(exc)
            continue
        problems = check_mesh(mesh, poly)
        if not problems:
            return mesh
        worst = "; ".join(problems)
    raise MeshQualityFailure(f"mesh quality bounds unreachable at h={h}: {worst}")


__all__ = ["TriangleMesh", "check_mesh", "polygon_angles", "triangle_angles", "triangle_areas", "triangulate"]
