import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from cocolearn.exceptions import CoverTooLargeError, UnsupportedProjectionError
from cocolearn.geometry import (
    Ball,
    Box,
    OracleSet,
    Simplex,
    build_cover,
    cover_size_bound,
    parse_set,
    project,
    project_simplex,
)

finite = st.floats(-10, 10, allow_nan=False)


def test_simplex_projection_examples():
    np.testing.assert_allclose(project(Simplex(2), [0.2, 0.8]), [0.2, 0.8])
    np.testing.assert_allclose(project(Simplex(3), [0.5, 0.5, 0.5]), [1 / 3] * 3)
    np.testing.assert_allclose(project(Simplex(2), [2.0, 0.0]), [1.0, 0.0])


def test_simplex_projection_brute_force_grid():
    # 1e-4 grid over the 2-simplex edge
    grid = np.linspace(0, 1, 10001)
    pts = np.column_stack([grid, 1 - grid])
    rng = np.random.default_rng(0)
    for v in rng.normal(0, 2, (30, 2)):
        best = pts[np.argmin(np.linalg.norm(pts - v, axis=1))]
        np.testing.assert_allclose(project_simplex(v), best, atol=1e-4)


@given(arrays(np.float64, st.integers(2, 12), elements=finite))
def test_simplex_projection_kkt(v):
    p = project_simplex(v)
    assert np.all(p >= 0) and p.sum() == pytest.approx(1.0, abs=1e-9)
    # optimality: (v - p) . (y - p) <= 0 for every vertex y
    for k in range(v.size):
        y = np.zeros(v.size)
        y[k] = 1.0
        assert (v - p) @ (y - p) <= 1e-9 * max(1.0, np.abs(v).max())


@given(arrays(np.float64, 3, elements=finite))
def test_projections_are_idempotent(x):
    for s in (Simplex(3), Box([0, -1, 2], [1, 1, 3]), Ball([0, 0, 0], 1.5)):
        p = s.project(x)
        assert s.contains(p)
        np.testing.assert_allclose(s.project(p), p, atol=1e-12)


def test_diameters():
    assert Simplex(4).diameter == pytest.approx(math.sqrt(2))
    assert Box([0, 0], [3, 4]).diameter == pytest.approx(5.0)
    assert Ball([1, 1], 0.5).diameter == 1.0


def test_constructor_validation():
    with pytest.raises(ValueError):
        Simplex(1)
    with pytest.raises(ValueError):
        Box([1], [0])
    with pytest.raises(ValueError):
        Box([0, 0], [1])
    with pytest.raises(ValueError):
        Ball([0], 0)
    with pytest.raises(ValueError):
        Box([0], [1]).project([0.5, 0.5])


def test_project_many_matches_project():
    rng = np.random.default_rng(2)
    pts = rng.normal(0, 3, (50, 2))
    for s in (Box([0, 0], [1, 2]), Ball([0.5, 0], 1.0)):
        np.testing.assert_allclose(s.project_many(pts), [s.project(p) for p in pts])


def test_sampling_stays_inside():
    rng = np.random.default_rng(4)
    for s in (Simplex(3), Box([0, 0], [1, 2]), Ball([0, 0], 2.0)):
        assert all(s.contains(x) for x in s.sample(rng, 200))


def test_oracle_set():
    disk = OracleSet(2, 2.0, lambda x: np.linalg.norm(x) <= 1.0, bounds=([-1, -1], [1, 1]))
    assert disk.contains([0.5, 0.5]) and not disk.contains([1, 1])
    with pytest.raises(UnsupportedProjectionError):
        disk.project([2.0, 0.0])
    assert OracleSet(1, 1.0, lambda x: True).contains([3.0])
    with pytest.raises(UnsupportedProjectionError):
        OracleSet(1, 1.0, lambda x: True).bounding_box()
    rng = np.random.default_rng(0)
    assert all(disk.contains(x) for x in disk.sample(rng, 20))


def test_cover_interval_example():
    cov = build_cover(Box([0], [1]), 0.5)
    np.testing.assert_allclose(cov.centers[:, 0], [0.25, 0.75])
    grid = np.linspace(0, 1, 10001)[:, None]
    assert cov.min_distances(grid).max() <= 0.25 + 1e-12


def test_cover_ball_size_and_property():
    cov = build_cover(Ball([0, 0], 1.0), 0.2)
    assert len(cov) <= cover_size_bound(2.0, 0.2, 2) == 441
    pts = Ball([0, 0], 1.0).sample(np.random.default_rng(0), 5000)
    assert cov.min_distances(pts).max() <= 0.2
    assert all(Ball([0, 0], 1.0).contains(c) for c in cov.centers)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["box:0,0:1,2", "ball:0,0:1", "simplex:3", "box:-1:1", "ball:1,1,1:0.5"]),
       st.floats(0.15, 1.5), st.integers(0, 1000))
def test_cover_property_sampled(desc, delta, seed):
    s = parse_set(desc)
    cov = build_cover(s, delta)
    assert all(s.contains(c) for c in cov.centers)
    pts = s.sample(np.random.default_rng(seed), 500)
    assert cov.min_distances(pts).max() <= delta + 1e-12


def test_large_delta_gives_few_centers():
    for s in (Box([0, 0], [1, 1]), Ball([0, 0], 1.0), Simplex(3)):
        cov = build_cover(s, 2 * s.diameter)
        assert 1 <= len(cov) <= 2 ** s.dimension


def test_cover_on_oracle_set():
    disk = OracleSet(2, 2.0, lambda x: np.linalg.norm(x) <= 1.0,
                     projector=lambda x: x / max(1.0, np.linalg.norm(x)), bounds=([-1, -1], [1, 1]))
    cov = build_cover(disk, 0.3)
    pts = Ball([0, 0], 1.0).sample(np.random.default_rng(1), 1000)
    assert cov.min_distances(pts).max() <= 0.3


def test_cover_too_large():
    with pytest.raises(CoverTooLargeError) as info:
        build_cover(Box([0] * 4, [1] * 4), 1e-3, max_centers=1000)
    assert info.value.estimate > 1000 and info.value.code == "cover-too-large"
    with pytest.raises(ValueError):
        build_cover(Box([0], [1]), 0.0)


def test_cover_nearest():
    cov = build_cover(Box([0], [1]), 0.5)
    i, d = cov.nearest([0.7])
    assert cov.centers[i, 0] == 0.75 and d == pytest.approx(0.05)


def test_cover_size_bound_values():
    assert cover_size_bound(1, 2, 3) == 8
    assert cover_size_bound(1, 0.1, 1) == pytest.approx(21)
    assert cover_size_bound(1, 0.5, 0) == 1
    with pytest.raises(ValueError):
        cover_size_bound(0, 1, 1)


def test_lattice_count_brute_force():
    # the kept cells are exactly those whose midpoint lies within delta/2 of the disk
    delta = 0.2
    h = delta / math.sqrt(2)
    n = math.ceil(2 / h - 1e-9)
    mids = [(-1 + (i + 0.5) * h, -1 + (j + 0.5) * h) for i, j in itertools.product(range(n), range(n))]
    expected = sum(1 for m in mids if max(math.hypot(*m) - 1, 0) <= delta / 2 * (1 + 1e-9))
    assert len(build_cover(Ball([0, 0], 1.0), delta)) == expected


def test_parse_set():
    assert isinstance(parse_set("box:0,0:1,1"), Box)
    b = parse_set("ball:1,2:3")
    assert b.radius == 3 and list(b.center) == [1, 2]
    assert parse_set("simplex:4").n == 4
    for bad in ("cube:1", "box:0:1:2", "ball:0", "simplex:x"):
        with pytest.raises(ValueError):
            parse_set(bad)
