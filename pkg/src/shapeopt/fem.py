"""Linear finite elements for Dirichlet problems of ``-div(A grad u) + c0 u``.

All matrices act on interior nodes only, so homogeneous Dirichlet data is
built in.  Coefficients are sampled at the three edge midpoints of every
triangle, a rule that is exact for quadratics and hence for the P1 mass
matrix and for constant-coefficient stiffness.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DegenerateInput, InputError, SingularSystem, SolverNonConvergence
from .expr import FIELD_VARIABLES, CoefficientField, Expr, as_expr, eval_expr, evaluate_field
from .geometry import Box, ConvexPolygon
from .mesh import TriangleMesh, triangulate

EIGEN_SEED = 0x5EED
EIGEN_TOL = 1e-10
EIGEN_MAX_ITER = 1000
SOLVE_TOL = 1e-10

# barycentric coordinates of the edge midpoints (rows) for vertices (columns)
_MID_BARY = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])


@dataclass(frozen=True)
class Assembly:
    """Interior-node system matrices for one mesh and coefficient field."""

    mesh: TriangleMesh
    stiffness: sp.csc_matrix
    mass: sp.csc_matrix
    grads: np.ndarray
    quad_points: np.ndarray


def _gradients(mesh: TriangleMesh) -> np.ndarray:
    """Constant gradients of the three hat functions on every triangle."""
    x = mesh.nodes[mesh.triangles]
    d1 = x[:, 1] - x[:, 0]
    d2 = x[:, 2] - x[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    g = np.empty((len(x), 3, 2))
    g[:, 1, 0] = d2[:, 1] / det
    g[:, 1, 1] = -d2[:, 0] / det
    g[:, 2, 0] = -d1[:, 1] / det
    g[:, 2, 1] = d1[:, 0] / det
    g[:, 0] = -g[:, 1] - g[:, 2]
    return g


def _quad_points(mesh: TriangleMesh) -> np.ndarray:
    x = mesh.nodes[mesh.triangles]
    return np.einsum("qv,tvd->tqd", _MID_BARY, x)


def _scatter(mesh: TriangleMesh, local: np.ndarray) -> sp.csc_matrix:
    t = mesh.triangles
    n = len(mesh.nodes)
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    full = sp.csr_matrix((local.ravel(), (rows, cols)), shape=(n, n))
    inner = slice(mesh.n_boundary, n)
    return full[inner, inner].tocsc()


def assemble(mesh: TriangleMesh, coeff: CoefficientField) -> Assembly:
    area = mesh.areas
    g = _gradients(mesh)
    qp = _quad_points(mesh)
    flat = qp.reshape(-1, 2)
    A = coeff.matrix(flat).reshape(len(area), 3, 2, 2).mean(axis=1)
    kloc = np.einsum("tid,tde,tje->tij", g, A, g) * area[:, None, None]
    w = area / 3.0
    mloc = np.einsum("t,qi,qj->tij", w, _MID_BARY, _MID_BARY)
    c0 = coeff.zero_order(flat)
    if c0 is not None:
        c0 = c0.reshape(len(area), 3)
        kloc = kloc + np.einsum("t,tq,qi,qj->tij", w, c0, _MID_BARY, _MID_BARY)
    return Assembly(mesh, _scatter(mesh, kloc), _scatter(mesh, mloc), g, qp)


def load_vector(asm: Assembly, f: Expr) -> np.ndarray:
    mesh = asm.mesh
    fq = evaluate_field(f, asm.quad_points.reshape(-1, 2)).reshape(-1, 3)
    floc = (mesh.areas / 3.0)[:, None] * (fq @ _MID_BARY)
    out = np.zeros(len(mesh.nodes))
    np.add.at(out, mesh.triangles.ravel(), floc.ravel())
    return out[mesh.n_boundary:]


# eigenvalues -----------------------------------------------------------------

@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple
    h: float
    dof: int
    iterations: int = 0

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    def __getitem__(self, i):
        return self.eigenvalues[i]

    def to_json(self) -> dict:
        return {"eigenvalues": [float(x) for x in self.eigenvalues], "h": self.h, "dof": self.dof}


def _factorize(K: sp.csc_matrix):
    try:
        lu = spla.splu(K)
    except RuntimeError as exc:
        raise SingularSystem(f"sparse factorization failed: {exc}") from exc
    return lu


def subspace_eigs(K: sp.csc_matrix, M: sp.csc_matrix, k: int, *, seed: int = EIGEN_SEED,
                  tol: float = EIGEN_TOL, max_iter: int = EIGEN_MAX_ITER, lu=None):
    """Smallest ``k`` eigenpairs of ``K x = lam M x`` by inverse subspace iteration.

    The block holds ``k + 4`` vectors.  Leading Ritz values whose relative change
    drops below ``tol`` are locked; the remaining block is kept M-orthogonal to
    the locked vectors (deflation).  Returns ``(values, vectors, iterations)``.
    """
    n = K.shape[0]
    p = min(k + 4, n)
    lu = lu or _factorize(K)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    locked_vals: list[float] = []
    locked_vecs = np.zeros((n, 0))
    prev = None
    for it in range(1, max_iter + 1):
        X = lu.solve(M @ X)
        if locked_vecs.shape[1]:
            X -= locked_vecs @ (locked_vecs.T @ (M @ X))
        X, _ = np.linalg.qr(X)
        Kr = X.T @ (K @ X)
        Mr = X.T @ (M @ X)
        theta, Q = sla.eigh(0.5 * (Kr + Kr.T), 0.5 * (Mr + Mr.T))
        X = X @ Q
        if prev is not None:
            need = k - len(locked_vals)
            j = 0
            while j < need and abs(theta[j] - prev[j]) <= tol * abs(theta[j]):
                j += 1
            if j:
                locked_vals.extend(theta[:j].tolist())
                locked_vecs = np.hstack([locked_vecs, X[:, :j]])
                X = X[:, j:]
                theta = theta[j:]
            if len(locked_vals) >= k:
                vals = np.array(locked_vals[:k])
                order = np.argsort(vals, kind="stable")
                return vals[order], locked_vecs[:, :k][:, order], it
        prev = theta
    raise SolverNonConvergence(f"subspace iteration did not converge in {max_iter} iterations")


def _check_coeff(coeff: CoefficientField, poly: ConvexPolygon, box: Box | None):
    bb = box if box is not None else poly.bounding_box()
    coeff.check(bb.lower, bb.upper)


def eigenvalues(poly: ConvexPolygon, coeff: CoefficientField, k: int, h: float, *,
                box: Box | None = None, mesh: TriangleMesh | None = None) -> Spectrum:
    """The ``k`` smallest Dirichlet eigenvalues of the operator on ``poly``."""
    if int(k) != k or k < 1:
        raise InputError(f"k must be a positive integer, got {k}")
    k = int(k)
    _check_coeff(coeff, poly, box)
    mesh = mesh or triangulate(poly, h)
    if k > mesh.dof / 4:
        raise DegenerateInput(f"k={k} exceeds dof/4 = {mesh.dof / 4:g}; use a smaller h")
    asm = assemble(mesh, coeff)
    vals, _, it = subspace_eigs(asm.stiffness, asm.mass, k)
    return Spectrum(tuple(float(v) for v in vals), float(mesh.h), mesh.dof, it)


# source problems -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FieldSolution:
    mesh: TriangleMesh
    u: np.ndarray
    grad: np.ndarray
    residual: float
    energy: float = field(default=0.0)
    work: float = field(default=0.0)

    def to_csv(self, fh=None) -> str | None:
        """Write ``x,y,u`` rows, one per node; returns the text if no handle is given."""
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "u"])
        for (x, y), u in zip(self.mesh.nodes, self.u):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(u))])
        return None if fh is not None else buf.getvalue()

    def max_value(self) -> float:
        return float(self.u.max())


def solve_source(poly: ConvexPolygon, coeff: CoefficientField, f, h: float, *,
                 box: Box | None = None, mesh: TriangleMesh | None = None) -> FieldSolution:
    """Galerkin solution of ``L u = f`` with zero boundary values."""
    f = as_expr(f)
    extra = f.free_variables - {"x1", "x2"}
    if extra:
        raise InputError(f"source may depend on x1, x2 only, got {sorted(extra)}")
    _check_coeff(coeff, poly, box)
    bb = box if box is not None else poly.bounding_box()
    g = np.linspace(0, 1, 32)
    gx, gy = np.meshgrid(bb.lower[0] + g * (bb.upper[0] - bb.lower[0]),
                         bb.lower[1] + g * (bb.upper[1] - bb.lower[1]))
    evaluate_field(f, np.stack([gx.ravel(), gy.ravel()], axis=1))
    mesh = mesh or triangulate(poly, h)
    asm = assemble(mesh, coeff)
    F = load_vector(asm, f)
    K = asm.stiffness
    u_in = np.zeros(mesh.dof)
    residual = 0.0
    fn = float(np.linalg.norm(F))
    if fn > 0 and mesh.dof:
        lu = _factorize(K)
        u_in = lu.solve(F)
        if not np.all(np.isfinite(u_in)):
            raise SingularSystem("solution is not finite")
        r = F - K @ u_in
        # one step of iterative refinement keeps the residual at roundoff level
        if np.linalg.norm(r) > SOLVE_TOL * fn:
            u_in = u_in + lu.solve(r)
            r = F - K @ u_in
        residual = float(np.linalg.norm(r) / fn)
        if residual > SOLVE_TOL:
            raise SingularSystem(f"relative residual {residual:.3e} exceeds {SOLVE_TOL:g}")
    u = np.zeros(len(mesh.nodes))
    u[mesh.n_boundary:] = u_in
    grad = np.einsum("ti,tid->td", u[mesh.triangles], asm.grads)
    energy = float(u_in @ (K @ u_in))
    work = float(F @ u_in)
    return FieldSolution(mesh, u, grad, residual, energy, work)


def integral_functional(sol: FieldSolution, j) -> float:
    """Centroid rule for ``int j(x, u, Du) dx`` over the mesh."""
    j = as_expr(j, FIELD_VARIABLES)
    mesh = sol.mesh
    cent = mesh.nodes[mesh.triangles].mean(axis=1)
    vals = eval_expr(j, {
        "x1": cent[:, 0],
        "x2": cent[:, 1],
        "u": sol.u[mesh.triangles].mean(axis=1),
        "ux": sol.grad[:, 0],
        "uy": sol.grad[:, 1],
    })
    vals = np.broadcast_to(np.asarray(vals, dtype=np.float64), (len(cent),))
    return float(math.fsum(mesh.areas * vals))


__all__ = [
    "Assembly",
    "FieldSolution",
    "Spectrum",
    "assemble",
    "eigenvalues",
    "integral_functional",
    "load_vector",
    "solve_source",
    "subspace_eigs",
]
