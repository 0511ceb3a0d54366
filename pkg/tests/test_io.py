import io

import numpy as np
import pytest

from shapeopt.errors import InputError, InvalidProfile, NonConvexInput
from shapeopt.functionals import RadialProfile
from shapeopt.geometry import random_convex_polygon
from shapeopt.io import (
    format_polygon,
    format_profile,
    parse_box,
    parse_config,
    parse_points,
    parse_polygon,
    parse_profile,
    read_polygon,
    read_profile,
    write_polygon,
    write_profile,
)


def test_polygon_with_comments_and_any_order():
    text = "# unit square\n1 1\n0 0  # origin\n\n1 0\n0 1\n"
    p = parse_polygon(text)
    assert p.area == 1.0
    np.testing.assert_array_equal(p.vertices[0], [0, 0])


@pytest.mark.parametrize("text", ["0 0\n1 0\n", "0 0\n1 0 2\n0 1\n", "0 0\n1 x\n0 1\n", "0 0\n1 inf\n0 1\n"])
def test_bad_polygon_text(text):
    with pytest.raises(InputError):
        parse_polygon(text)


def test_non_convex_file_rejected_but_points_readable():
    text = "0 0\n4 0\n1 1\n0 4\n"
    with pytest.raises(NonConvexInput):
        parse_polygon(text)
    assert parse_points(text).shape == (4, 2)


def test_polygon_round_trip_is_exact(tmp_path, rng):
    p = random_convex_polygon(rng)
    path = tmp_path / "p.poly"
    write_polygon(path, p)
    q = read_polygon(path)
    np.testing.assert_array_equal(p.vertices, q.vertices)
    assert format_polygon(q) == format_polygon(p)


def test_read_from_stream():
    p = read_polygon(io.StringIO("0 0\n2 0\n0 2\n"))
    assert p.area == 2.0


def test_missing_file():
    with pytest.raises(InputError):
        read_polygon("/nonexistent/file.poly")


def test_box():
    b = parse_box("# D\n0 0 4 4\n")
    assert b.area == 16.0
    with pytest.raises(InputError):
        parse_box("0 0 4 4\n1 1 2 2\n")


def test_profile_round_trip(tmp_path):
    p = RadialProfile.flat_top_cone(1.0, 0.8, 0.3, 50)
    path = tmp_path / "p.profile"
    write_profile(path, p)
    q = read_profile(path)
    assert (q.R, q.M, q.n_r) == (1.0, 0.8, 50)
    np.testing.assert_array_equal(q.heights, p.heights)
    assert format_profile(q) == format_profile(p)


def test_profile_errors():
    with pytest.raises(InputError):
        parse_profile("1 1 3\n1\n0.5\n")
    with pytest.raises(InputError):
        parse_profile("1 1\n1\n0\n")
    with pytest.raises(InvalidProfile):
        parse_profile("1 1 2\n0\n0.5\n0.2\n")


def test_config_parsing():
    cfg = parse_config('# run\nk = 3\nf = "1 + x1"\nh=0.02\n')
    assert cfg == {"k": "3", "f": "1 + x1", "h": "0.02"}
    with pytest.raises(InputError):
        parse_config("k = 1\nk = 2\n")
    with pytest.raises(InputError):
        parse_config("just words\n")
    with pytest.raises(InputError):
        parse_config("= 3\n")
