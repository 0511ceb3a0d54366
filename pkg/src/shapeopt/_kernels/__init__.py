"""Hot numerical kernels with a compiled backend and a pure-Python fallback.

The Cython extension ``_ckernels`` is used when it was built; otherwise, or
when ``SHAPEOPT_PURE_PYTHON=1`` is set, the numpy/Python versions in
``_pykernels`` are used. ``BACKEND`` names the active implementation.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("SHAPEOPT_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

pava_nonincreasing = _impl.pava_nonincreasing
project_concave_profile = _impl.project_concave_profile
profile_resistance = _impl.profile_resistance
convex_polygon_distance = _impl.convex_polygon_distance


def backends():
    """Return ``{name: module}`` for every importable backend."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels
        found["cython"] = _ckernels
    except ImportError:
        pass
    return found


__all__ = [
    "BACKEND",
    "backends",
    "pava_nonincreasing",
    "project_concave_profile",
    "profile_resistance",
    "convex_polygon_distance",
]
