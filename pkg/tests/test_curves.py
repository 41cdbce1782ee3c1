import numpy as np
import pytest

from phasefront import errors
from phasefront.curves import (
    circle_curve,
    curve_from_points,
    curve_length,
    enclosed_area,
    hausdorff,
    is_simple,
    marching_squares,
    resample,
    translate_curve,
    turning_number,
)


def test_hausdorff_identical_is_zero():
    c = circle_curve((0.5, 0.5), 0.25, 256)
    assert hausdorff(c, c) == 0.0


def test_hausdorff_concentric_circles():
    a = circle_curve((0.5, 0.5), 0.25, 512)
    b = circle_curve((0.5, 0.5), 0.20, 512)
    assert hausdorff(a, b) == pytest.approx(0.05, abs=1e-4)


def test_hausdorff_translation_by_h():
    h = 1.0 / 256
    a = circle_curve((0.5, 0.5), 0.25, 256)
    b = translate_curve(a, (h, 0.0))
    assert hausdorff(a, b) == pytest.approx(h, abs=1e-6)


def test_hausdorff_periodic_wrap():
    a = circle_curve((0.02, 0.5), 0.25, 256)     # straddles the seam
    b = circle_curve((0.02, 0.5), 0.20, 256)
    assert hausdorff(a, b) == pytest.approx(0.05, abs=1e-4)


def test_enclosed_area_square():
    sq = curve_from_points(np.array([[0.2, 0.2], [0.8, 0.2], [0.8, 0.8], [0.2, 0.8]]))
    assert enclosed_area(sq) == pytest.approx(0.36, abs=1e-15)
    assert enclosed_area(curve_from_points(sq.vertices[::-1])) == pytest.approx(-0.36)


def test_marching_squares_linear_field():
    n = 64
    h = 1.0 / n
    x = (np.arange(n) + 0.5) * h
    u = np.broadcast_to((x - 0.5)[:, None], (n, n)).copy()
    loops = marching_squares(u, h, 0.0)
    assert len(loops) == 2          # the x=0.5 line and the seam transition
    mid = [c for c in loops if np.abs(c.vertices[:, 0] - 0.5).max() < 1e-12][0]
    assert mid.wraps[0] == 0 and abs(mid.wraps[1]) == 1
    assert not mid.is_contractible


def test_marching_squares_orientation_and_sign():
    n = 128
    h = 1.0 / n
    x = (np.arange(n) + 0.5) * h
    X, Y = np.meshgrid(x, x, indexing="ij")
    u = np.sqrt((X - 0.5) ** 2 + (Y - 0.5) ** 2) - 0.25      # high outside
    loop = marching_squares(u, h, 0.0)[0]
    assert enclosed_area(loop) > 0.0                          # CCW: interior low
    inverted = marching_squares(-u, h, 0.0)[0]
    assert enclosed_area(inverted) < 0.0
    assert abs(turning_number(loop)) == pytest.approx(1.0, abs=1e-12)


def test_marching_squares_saddles_close():
    n = 64
    h = 1.0 / n
    x = (np.arange(n) + 0.5) * h
    X, Y = np.meshgrid(x, x, indexing="ij")
    u = np.cos(2 * np.pi * X) * np.cos(2 * np.pi * Y)
    loops = marching_squares(u, h, 0.0)
    assert loops, "checkerboard field must produce contours"
    total = sum(c.n_vertices for c in loops)
    assert total > 4 * n // 2
    for c in loops:
        assert np.isfinite(c.vertices).all()


def test_marching_squares_subcell_accuracy():
    n = 128
    h = 1.0 / n
    x = (np.arange(n) + 0.5) * h
    X, Y = np.meshgrid(x, x, indexing="ij")
    u = np.sqrt((X - 0.5) ** 2 + (Y - 0.5) ** 2) - 0.25
    loop = marching_squares(u, h, 0.0)[0]
    r = np.linalg.norm(loop.vertices - 0.5, axis=1)
    assert np.abs(r - 0.25).max() <= h     # sub-cell interpolation accuracy


def test_resample_preserves_shape_and_spacing():
    c = circle_curve((0.5, 0.5), 0.25, 300)
    r = resample(c, 128)
    assert r.n_vertices == 128
    radii = np.linalg.norm(r.vertices - 0.5, axis=1)
    assert np.abs(radii - 0.25).max() <= 1e-5
    seg = np.linalg.norm(np.diff(r.closed_loop(), axis=0), axis=1)
    assert seg.max() / seg.min() <= 1.01
    assert curve_length(r) == pytest.approx(curve_length(c), rel=1e-3)


def test_is_simple_detects_crossing():
    assert is_simple(circle_curve((0.5, 0.5), 0.2, 64))
    th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    eight = np.stack([0.5 + 0.2 * np.sin(2 * th), 0.5 + 0.1 * np.sin(th)], axis=1)
    assert not is_simple(curve_from_points(eight))


def test_area_undefined_for_wrapping_contour():
    n = 32
    h = 1.0 / n
    x = (np.arange(n) + 0.5) * h
    u = np.broadcast_to((x - 0.5)[:, None], (n, n)).copy()
    wrapping = marching_squares(u, h, 0.0)[0]
    with pytest.raises(errors.DegenerateCurve):
        enclosed_area(wrapping)
