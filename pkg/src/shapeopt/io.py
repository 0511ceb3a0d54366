"""Plain-text file formats.

* polygon: one vertex ``x y`` per line, ``#`` starts a comment, any order;
* box: a single line ``xmin ymin xmax ymax``;
* profile: first line ``R M n_r`` then ``n_r + 1`` heights, one per line;
* config: flat ``key = value`` lines with ``#`` comments.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InputError
from .functionals import RadialProfile
from .geometry import Box, ConvexPolygon, polygon_from_vertices


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _read(source) -> tuple[str, str]:
    """Text and a display name from a path or an open text stream."""
    if hasattr(source, "read"):
        return source.read(), getattr(source, "name", "<stream>")
    path = Path(source)
    try:
        return path.read_text(), str(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _float(token: str, where: str) -> float:
    try:
        x = float(token)
    except ValueError:
        raise InputError(f"{where}: not a number: {token!r}") from None
    if not np.isfinite(x):
        raise InputError(f"{where}: non-finite value {token!r}")
    return x


def parse_points(text: str, name: str = "<text>") -> np.ndarray:
    """Vertex lines as an ``(n, 2)`` array without any convexity check."""
    pts = []
    for lineno, line in _lines(text):
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"{name}:{lineno}: expected 'x y', got {line!r}")
        pts.append([_float(p, f"{name}:{lineno}") for p in parts])
    if len(pts) < 3:
        raise InputError(f"{name}: a polygon needs at least 3 vertices, got {len(pts)}")
    return np.array(pts, dtype=np.float64)


def read_points(source) -> np.ndarray:
    text, name = _read(source)
    return parse_points(text, name)


def parse_polygon(text: str, name: str = "<text>") -> ConvexPolygon:
    return polygon_from_vertices(parse_points(text, name))


def read_polygon(source) -> ConvexPolygon:
    text, name = _read(source)
    return parse_polygon(text, name)


def format_polygon(poly: ConvexPolygon) -> str:
    return "".join(f"{x!r} {y!r}\n" for x, y in poly.vertices.tolist())


def write_polygon(path, poly: ConvexPolygon) -> None:
    Path(path).write_text(format_polygon(poly))


def parse_box(text: str) -> Box:
    lines = [line for _, line in _lines(text)]
    if len(lines) != 1:
        raise InputError(f"box must be a single line 'xmin ymin xmax ymax', got {len(lines)} lines")
    return Box.parse(lines[0])


def read_box(source) -> Box:
    text, _ = _read(source)
    return parse_box(text)


def parse_profile(text: str, name: str = "<text>") -> RadialProfile:
    rows = list(_lines(text))
    if not rows:
        raise InputError(f"{name}: empty profile file")
    lineno, header = rows[0]
    parts = header.split()
    if len(parts) != 3:
        raise InputError(f"{name}:{lineno}: header must be 'R M n_r', got {header!r}")
    R = _float(parts[0], f"{name}:{lineno}")
    M = _float(parts[1], f"{name}:{lineno}")
    try:
        n_r = int(parts[2])
    except ValueError:
        raise InputError(f"{name}:{lineno}: n_r must be an integer, got {parts[2]!r}") from None
    heights = []
    for ln, line in rows[1:]:
        if len(line.split()) != 1:
            raise InputError(f"{name}:{ln}: expected one height per line, got {line!r}")
        heights.append(_float(line, f"{name}:{ln}"))
    if n_r < 1 or len(heights) != n_r + 1:
        raise InputError(f"{name}: header announces n_r={n_r} but {len(heights)} heights follow")
    return RadialProfile(R, M, np.array(heights))


def read_profile(source) -> RadialProfile:
    text, name = _read(source)
    return parse_profile(text, name)


def format_profile(p: RadialProfile) -> str:
    head = f"{p.R!r} {p.M!r} {p.n_r}\n"
    return head + "".join(f"{u!r}\n" for u in p.heights.tolist())


def write_profile(path, p: RadialProfile) -> None:
    Path(path).write_text(format_profile(p))


def parse_config(text: str, name: str = "<text>") -> dict[str, str]:
    """``key = value`` pairs; later duplicates are an error."""
    out: dict[str, str] = {}
    for lineno, line in _lines(text):
        if "=" not in line:
            raise InputError(f"{name}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise InputError(f"{name}:{lineno}: empty key")
        if key in out:
            raise InputError(f"{name}:{lineno}: duplicate key {key!r}")
        # surrounding quotes are optional, so expressions may contain spaces freely
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        out[key] = value
    return out


def read_config(source) -> dict[str, str]:
    text, name = _read(source)
    return parse_config(text, name)


__all__ = [
    "format_polygon",
    "format_profile",
    "parse_box",
    "parse_config",
    "parse_polygon",
    "parse_points",
    "parse_profile",
    "read_box",
    "read_config",
    "read_points",
    "read_polygon",
    "read_profile",
    "write_polygon",
    "write_profile",
]
