import numpy as np
import pytest

from anharm.groups import (
    GroupSpec, UnipotentElement, DiagonalElement, SolvableElement,
    ExtendedPoint, coords_to_matrix, matrix_to_coords, n_mul, rho_apply,
)
from anharm.testfuncs import gaussian, poly_gaussian, random_gaussian
from anharm.extension import (
    iota_coords, tilde_eval, tilde_eval_coords, invariance_residual,
    restrict_to_M, gamma, gamma_inv, m_dim,
)


def rand_fun(rng, dim):
    return random_gaussian(rng, dim)


def h_point(spec, n, t, shift):
    return ExtendedPoint(
        "H",
        SolvableElement(UnipotentElement(spec, n), DiagonalElement(spec, t)),
        shift,
    )


def test_tilde_shift_zero_is_section():
    rng = np.random.default_rng(0)
    spec = GroupSpec(3)
    f = rand_fun(rng, 5)
    for _ in range(25):
        n = rng.uniform(-1, 1, 3)
        t = rng.uniform(-1, 1, 2)
        p = h_point(spec, n, t, np.zeros(2))
        assert tilde_eval(f, p) == pytest.approx(
            complex(f(np.concatenate([n, t]))), rel=1e-14)


def test_tilde_h_m2_example():
    spec = GroupSpec(2)
    f = poly_gaussian(1.0, [1, 1], [0.0, 0.0], [0.3, 0.3])
    p = h_point(spec, [1.0], [0.0], [np.log(2.0)])
    want = complex(f(np.array([4.0, np.log(2.0)])))
    assert tilde_eval(f, p) == pytest.approx(want, rel=1e-13)


def test_tilde_k1_matches_matrix_oracle():
    rng = np.random.default_rng(1)
    spec = GroupSpec(3)
    f = rand_fun(rng, 3)
    for _ in range(25):
        g = rng.uniform(-1, 1, 3)
        u = rng.uniform(-1, 1, 1)
        p = ExtendedPoint("K1", UnipotentElement(spec, g), u)
        emb = coords_to_matrix(3, iota_coords("K1", 3, u))
        arg = matrix_to_coords(3, emb @ coords_to_matrix(3, g))
        assert tilde_eval(f, p) == pytest.approx(complex(f(arg)), rel=1e-13)


def test_invariance_residual_identity_shift():
    rng = np.random.default_rng(2)
    spec = GroupSpec(3)
    f = rand_fun(rng, 3)
    p = ExtendedPoint("K1", UnipotentElement(spec, rng.uniform(-1, 1, 3)),
                      rng.uniform(-1, 1, 1))
    assert invariance_residual(f, p, np.zeros(1)) == 0.0


@pytest.mark.parametrize("case,m", [("K1", 3), ("H", 2), ("H", 3)])
def test_invariance_residual_random(case, m):
    rng = np.random.default_rng(3)
    spec = GroupSpec(m)
    d_n, d_a = spec.dim_n, spec.dim_a
    for _ in range(50):
        if case == "K1":
            f = rand_fun(rng, d_n)
            p = ExtendedPoint("K1", UnipotentElement(spec, rng.uniform(-1, 1, d_n)),
                              rng.uniform(-1, 1, spec.k1_shift_dim))
            s = rng.uniform(-1, 1, spec.k1_shift_dim)
        else:
            f = rand_fun(rng, d_n + d_a)
            p = h_point(spec, rng.uniform(-1, 1, d_n), rng.uniform(-1, 1, d_a),
                        rng.uniform(-1, 1, d_a))
            s = rng.uniform(-1, 1, d_a)
        assert invariance_residual(f, p, s) < 1e-10


def test_restrict_h_m2_example():
    f = poly_gaussian(1.0, [2, 0], [0.0, 0.0], [0.2, 0.5])
    h = restrict_to_M(f, "H", 2)
    got = h(np.array([1.0, np.log(2.0)]))
    assert got == pytest.approx(complex(f(np.array([4.0, np.log(2.0)]))), rel=1e-13)


def test_restrict_k1_matches_tilde_at_zero_acting():
    rng = np.random.default_rng(4)
    spec = GroupSpec(3)
    f = rand_fun(rng, 3)
    h = restrict_to_M(f, "K1", 3)
    for _ in range(20):
        v = rng.uniform(-1, 1, 2)
        u = rng.uniform(-1, 1, 1)
        base = np.array([0.0, v[0], v[1]])
        want = tilde_eval_coords(f, "K1", 3, base, u)
        assert complex(h(np.concatenate([v, u]))) == pytest.approx(complex(want), rel=1e-13)


@pytest.mark.parametrize("case,m", [("K1", 3), ("H", 2), ("H", 3)])
def test_gamma_inverts_restriction(case, m):
    """Γ(restrict_to_M(f)) = f on the group, pointwise."""
    rng = np.random.default_rng(5)
    spec = GroupSpec(m)
    dim = spec.dim_n if case == "K1" else spec.dim_s
    f = rand_fun(rng, dim)
    g = gamma(restrict_to_M(f, case, m), case, m)
    pts = rng.uniform(-1.5, 1.5, (200, dim))
    assert np.max(np.abs(g(pts) - f(pts))) < 1e-12


@pytest.mark.parametrize("case,m", [("K1", 3), ("H", 2), ("H", 3)])
def test_gamma_round_trip(case, m):
    rng = np.random.default_rng(6)
    dmm = m_dim(case, m)
    h = rand_fun(rng, dmm)
    back = gamma_inv(gamma(h, case, m), case, m)
    pts = rng.uniform(-1.5, 1.5, (200, dmm))
    assert np.max(np.abs(back(pts) - h(pts))) < 1e-12


def test_gamma_heisenberg_closed_form():
    # Γ(h)(x, z, y) = h(z - x·y, y, x)
    rng = np.random.default_rng(7)
    h = rand_fun(rng, 3)
    g = gamma(h, "K1", 3)
    for _ in range(20):
        x, z, y = rng.uniform(-1, 1, 3)
        got = g(np.array([x, z, y]))
        want = h(np.array([z - x * y, y, x]))
        assert complex(got) == pytest.approx(complex(want), rel=1e-13)


def test_gamma_twist_is_measure_preserving():
    # the top-slot twist is linear with determinant 1, so L² inner products
    # transport exactly; check det and the inner product numerically
    from anharm.testfuncs import Axis, quadrature
    rng = np.random.default_rng(8)
    m = 3
    # det of the per-point twist on the top slot: conjugation block has det 1
    for _ in range(10):
        x = rng.uniform(-1, 1, 1)
        emb = coords_to_matrix(m, iota_coords("K1", m, x))
        block = emb[: m - 1, : m - 1]
        assert abs(np.linalg.det(block) - 1.0) < 1e-12
    h1, h2 = rand_fun(rng, 3), rand_fun(rng, 3)
    axes = [Axis(0.0, 9.0, 64)] * 3
    ip_m = quadrature(lambda p: h1(p) * np.conj(h2(p)), axes)
    g1, g2 = gamma(h1, "K1", 3), gamma(h2, "K1", 3)
    ip_n = quadrature(lambda p: g1(p) * np.conj(g2(p)), axes)
    assert abs(ip_n - ip_m) / abs(ip_m) < 1e-6
