import math

import numpy as np
import pytest

from anharm.testfuncs import (
    TestFunction, Axis, GridFunction, gaussian, poly_gaussian, derivative,
    shift_function, scale_argument, grid_nodes, grid_mesh, sample, quadrature,
    dual_axis, export_csv, export_binary, import_binary,
)


def test_evaluate_unit_gaussian():
    f = gaussian([0.0], 1.0)
    assert f(np.array([0.0])) == pytest.approx(1.0)
    assert f(np.array([1.0])) == pytest.approx(math.exp(-0.5))


def test_evaluate_empty_is_zero():
    f = TestFunction(2, ())
    assert f(np.array([0.3, -1.0])) == 0.0


def test_evaluate_dimension_mismatch():
    f = gaussian([0.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        f(np.array([1.0]))


def test_poly_gaussian_and_derivative_oracle():
    f = poly_gaussian(2.0, [1, 0], [0.5, -0.5], [1.0, 2.0])
    x = np.array([0.9, 0.1])
    want = 2.0 * (x[0] - 0.5) * math.exp(-0.5 * ((x[0] - 0.5) ** 2 + 2 * (x[1] + 0.5) ** 2))
    assert f(x) == pytest.approx(want, rel=1e-14)
    # derivative matches central differences
    h = 1e-5
    for ax in range(2):
        e = np.zeros(2)
        e[ax] = h
        fd = (f(x + e) - f(x - e)) / (2 * h)
        assert derivative(f, ax)(x) == pytest.approx(fd, rel=1e-8, abs=1e-10)


def test_shift_and_scale_are_exact():
    rng = np.random.default_rng(0)
    f = poly_gaussian(1.5, [2, 1], [0.2, -0.3], [1.1, 0.7])
    delta = np.array([0.4, -1.2])
    s = np.array([1.7, -0.6])
    pts = rng.uniform(-2, 2, (50, 2))
    assert np.allclose(shift_function(f, delta)(pts), f(pts - delta), rtol=1e-13)
    assert np.allclose(scale_argument(f, s)(pts), f(pts * s), rtol=1e-12, atol=1e-14)


def test_axis_validation():
    with pytest.raises(ValueError):
        Axis(0.0, 1.0, 48)       # not a power of two
    with pytest.raises(ValueError):
        Axis(0.0, -1.0, 64)


def test_dual_axis_relation():
    a = Axis(0.7, 5.0, 64)
    d = dual_axis(a)
    # P · h · Δλ = 2π exactly
    assert a.points * a.step * d.step == pytest.approx(2 * np.pi, rel=1e-15)
    lam = grid_nodes(d)
    assert lam[0] == pytest.approx(-np.pi / a.step)


def test_sample_peak_at_center():
    f = gaussian([0.0], 1.0)
    gf = sample(f, [Axis(0.0, 10.0, 256)])
    nodes = grid_nodes(gf.axes[0])
    assert abs(nodes[np.argmax(np.abs(gf.samples))]) < gf.axes[0].step


def test_gaussian_mass():
    f = gaussian([0.0], 1.0)
    ax = Axis(0.0, 10.0, 256)
    total = quadrature(sample(f, [ax]), [ax])
    assert total.real == pytest.approx(math.sqrt(2 * math.pi), abs=1e-10)
    assert total.imag == 0.0


def test_quadrature_closed_forms():
    # ∫ e^{-x²} dx = √π  (width w = 2)
    ax = Axis(0.0, 10.0, 256)
    got = quadrature(gaussian([0.0], 2.0), [ax])
    assert got.real == pytest.approx(math.sqrt(math.pi), abs=1e-10)
    # 3-D product: π^{3/2}
    axes = [Axis(0.0, 8.0, 64)] * 3
    got = quadrature(gaussian([0.0, 0.0, 0.0], 2.0), axes)
    assert got.real == pytest.approx(math.pi ** 1.5, abs=1e-8)
    assert quadrature(TestFunction(3, ()), axes) == 0.0


def test_quadrature_translation_invariance():
    axes = [Axis(0.0, 10.0, 128)] * 2
    f = gaussian([0.0, 0.0], 1.0)
    base = quadrature(f, axes)
    moved = quadrature(shift_function(f, [2.5, -3.0]), axes)
    assert abs(moved - base) / abs(base) < 1e-8


def test_sample_then_sum_equals_quadrature():
    axes = (Axis(0.3, 6.0, 32), Axis(-0.2, 5.0, 16))
    f = gaussian([0.3, -0.2], [1.0, 1.3])
    gf = sample(f, axes)
    direct = quadrature(f, axes)
    summed = complex(np.sum(gf.samples.ravel(order="C"))) * gf.cell
    assert summed == direct


def test_binary_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    axes = (Axis(0.0, 4.0, 8), Axis(1.0, 2.0, 4))
    vals = rng.normal(size=(8, 4)) + 1j * rng.normal(size=(8, 4))
    gf = GridFunction(axes, vals)
    p = tmp_path / "dump.bin"
    export_binary(gf, p)
    back = import_binary(p)
    assert back.axes == axes
    assert np.array_equal(back.samples, gf.samples)


def test_csv_export(tmp_path):
    axes = (Axis(0.0, 1.0, 4),)
    gf = sample(gaussian([0.0], 1.0), axes)
    p = tmp_path / "dump.csv"
    export_csv(gf, p)
    lines = p.read_text().strip().splitlines()
    assert lines[0] == "x0,re,im"
    assert len(lines) == 5
    x0, re, im = map(float, lines[1].split(","))
    assert x0 == pytest.approx(-1.0)
    assert re == pytest.approx(math.exp(-0.5))
    assert im == 0.0
