"""Newton's resistance in profile and surface form, and 2-D boundary integrals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InputError, InvalidProfile, UnsupportedDirection
from .expr import BOUNDARY_VARIABLES, as_expr, eval_expr
from .geometry import ConvexPolygon, edge_normals

PROFILE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Heights ``u_0..u_n`` of a radial body at ``r_i = i R / n`` with bound ``M``."""

    R: float
    M: float
    heights: np.ndarray

    def __post_init__(self):
        u = np.array(self.heights, dtype=np.float64)
        u.setflags(write=False)
        object.__setattr__(self, "heights", u)
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "M", float(self.M))
        problems = self.violations()
        if problems:
            raise InvalidProfile("; ".join(problems))

    def violations(self) -> list[str]:
        u, R, M = self.heights, self.R, self.M
        out = []
        if not (R > 0 and math.isfinite(R)):
            out.append(f"radius must be positive, got {R}")
        if not (M > 0 and math.isfinite(M)):
            out.append(f"height bound must be positive, got {M}")
        if u.ndim != 1 or len(u) < 2:
            out.append("need at least two heights")
            return out
        if not np.all(np.isfinite(u)):
            out.append("non-finite height")
            return out
        if u.min() < 0 or u.max() > M:
            out.append(f"heights leave [0, M]: min {u.min():.3g}, max {u.max():.3g}")
        rise = np.diff(u).max()
        if rise > PROFILE_TOL:
            out.append(f"profile increases by {rise:.3g}")
        if len(u) > 2:
            bend = (u[2:] - 2 * u[1:-1] + u[:-2]).max()
            if bend > PROFILE_TOL * R:
                out.append(f"profile not concave (second difference {bend:.3g})")
        return out

    @property
    def n_r(self) -> int:
        return len(self.heights) - 1

    @property
    def dr(self) -> float:
        return self.R / self.n_r

    @property
    def radii(self) -> np.ndarray:
        return np.arange(self.n_r + 1) * self.dr

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.heights) / self.dr

    def flat_radius(self, tol: float = 1e-9) -> float:
        """Largest ``r`` with ``u(r) = u(0)`` (up to ``tol``)."""
        u = self.heights
        flat = np.flatnonzero(np.abs(u - u[0]) <= tol * max(1.0, self.M))
        # heights are nonincreasing, so the flat set is a prefix
        return float(self.radii[flat[-1]])

    @classmethod
    def from_function(cls, fn, R: float, M: float, n_r: int = 1000) -> "RadialProfile":
        r = np.arange(n_r + 1) * (R / n_r)
        return cls(R, M, np.asarray(fn(r), dtype=np.float64))

    @classmethod
    def cone(cls, R: float, M: float, n_r: int = 1000) -> "RadialProfile":
        return cls.from_function(lambda r: M * (1.0 - r / R), R, M, n_r)

    @classmethod
    def flat(cls, R: float, M: float, n_r: int = 1000) -> "RadialProfile":
        return cls.from_function(lambda r: np.full_like(r, M), R, M, n_r)

    @classmethod
    def flat_top_cone(cls, R: float, M: float, a: float, n_r: int = 1000) -> "RadialProfile":
        """Plateau of height ``M`` on ``[0, a]`` falling linearly to 0 at ``R``."""
        if not 0 <= a < R:
            raise InputError(f"plateau radius must lie in [0, R), got {a}")
        return cls.from_function(lambda r: np.minimum(M, M * (R - r) / (R - a)), R, M, n_r)

    def to_json(self) -> dict:
        return {"R": self.R, "M": self.M, "n_r": self.n_r, "heights": self.heights.tolist()}


@dataclass(frozen=True)
class StreamDirection:
    A: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        a = tuple(float(x) for x in self.A)
        if len(a) != 3 or not all(math.isfinite(x) for x in a):
            raise InputError(f"stream direction must be a finite 3-vector, got {self.A}")
        if abs(math.sqrt(sum(x * x for x in a)) - 1.0) > 1e-12:
            raise InputError(f"stream direction must be a unit vector, got {a}")
        object.__setattr__(self, "A", a)

    @property
    def is_axial(self) -> bool:
        return self.A == (0.0, 0.0, 1.0)


def resistance_profile(p: RadialProfile) -> float:
    """Midpoint rule for ``2 pi int_0^R r / (1 + u'(r)^2) dr``."""
    return float(_kernels.profile_resistance(p.heights, p.dr))


def resistance_boundary_axisym(p: RadialProfile, A: StreamDirection | None = None) -> float:
    """Surface form ``int ((nu . A)^+)^3 dS`` over the body of revolution of ``p``.

    Every radial cell sweeps a conical band with slant length ``l`` and outward
    normal ``(-du, dr) / l`` in the meridian plane; the vertical rim at ``r = R``
    and the base contribute nothing because ``nu . A <= 0`` there.
    """
    A = A or StreamDirection()
    if not A.is_axial:
        raise UnsupportedDirection(f"only the axial direction (0, 0, 1) is supported, got {A.A}")
    u = p.heights
    dr = p.dr
    du = np.diff(u)
    slant = np.hypot(dr, du)
    # meridian normal (n_r, n_z); its z-component is nu . A
    nz = dr / slant
    r_mid = (np.arange(p.n_r) + 0.5) * dr
    band = 2.0 * math.pi * r_mid * slant
    return float(math.fsum(band * np.maximum(nz, 0.0) ** 3))


def boundary_functional_2d(poly: ConvexPolygon, f) -> float:
    """Edge-midpoint rule for ``int_{dOmega} f(x, nu) ds``."""
    f = as_expr(f, BOUNDARY_VARIABLES)
    v = poly.vertices
    mid = 0.5 * (v + np.roll(v, -1, axis=0))
    normals, lengths = edge_normals(poly)
    vals = eval_expr(f, {"x1": mid[:, 0], "x2": mid[:, 1], "n1": normals[:, 0], "n2": normals[:, 1]})
    vals = np.broadcast_to(np.asarray(vals, dtype=np.float64), lengths.shape)
    return float(math.fsum(lengths * vals))


POSITIVE_PART_CUBE = "(0.5*(abs(n2)+n2))*(0.5*(abs(n2)+n2))*(0.5*(abs(n2)+n2))"

__all__ = [
    "POSITIVE_PART_CUBE",
    "RadialProfile",
    "StreamDirection",
    "boundary_functional_2d",
    "resistance_boundary_axisym",
    "resistance_profile",
]
