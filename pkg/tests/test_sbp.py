import dataclasses

import numpy as np
import pytest

from evapfront.errors import ConfigError, GeometryError, ShapeError
from evapfront.sbp import (
    MIN_POINTS, apply_derivative, build_sbp, quadrature, sbp_property_residual,
)

ORDERS = (2, 4, 6)


@pytest.mark.parametrize("order", ORDERS)
@pytest.mark.parametrize("size", ["min", 33, 101])
def test_sbp_identity_residual(order, size):
    n = MIN_POINTS[order] if size == "min" else size
    op = build_sbp(order, n, 1.0 / (n - 1))
    assert sbp_property_residual(op) <= 1e-13


def test_order2_known_coefficients():
    # Order 2, n=5, unit spacing: the closed-form operator.
    op = build_sbp(2, 5, 1.0)
    assert op.P.tolist() == [0.5, 1.0, 1.0, 1.0, 0.5]
    assert op.D[0].tolist() == [-1.0, 1.0, 0.0, 0.0, 0.0]
    assert op.D[2].tolist() == [0.0, -0.5, 0.0, 0.5, 0.0]
    assert op.D[-1].tolist() == [0.0, 0.0, 0.0, -1.0, 1.0]


@pytest.mark.parametrize("order", ORDERS)
def test_d_is_q_rowwise_divided_by_p(order):
    op = build_sbp(order, 24, 0.3)
    assert np.array_equal(op.D, op.Q / op.P[:, None])


@pytest.mark.parametrize("order", ORDERS)
def test_norm_positive(order):
    op = build_sbp(order, 30, 1e-3)
    assert np.all(op.P > 0.0)


@pytest.mark.parametrize("order", ORDERS)
def test_annihilates_constants(order):
    op = build_sbp(order, 33, 1.0 / 32)
    out = apply_derivative(op, np.full(33, 7.25))
    assert np.max(np.abs(out)) <= 1e-12


@pytest.mark.parametrize("order", ORDERS)
def test_exact_on_coordinates(order):
    n = 33
    op = build_sbp(order, n, 1.0 / (n - 1))
    xi = np.linspace(0.0, 1.0, n)
    assert np.max(np.abs(apply_derivative(op, xi) - 1.0)) <= 1e-12


def test_zero_field_maps_to_zero():
    op = build_sbp(4, 16, 0.1)
    assert np.all(apply_derivative(op, np.zeros(16)) == 0.0)


@pytest.mark.parametrize("order", ORDERS)
def test_monomial_exactness(order):
    """Interior rows exact to the interior order, closures to half order."""
    n = 41
    op = build_sbp(order, n, 1.0 / (n - 1))
    xi = np.linspace(0.0, 1.0, n)
    w = op.closure_width
    for k in range(1, order + 1):
        exact = k * xi ** (k - 1)
        got = apply_derivative(op, xi ** k)
        scale = max(1.0, np.max(np.abs(exact)))
        err = np.abs(got - exact) / scale
        assert np.max(err[w:n - w]) <= 1e-10, f"interior rows, degree {k}"
        if k <= order // 2:
            assert np.max(err) <= 1e-10, f"closure rows, degree {k}"


def test_order4_cubic_interior_rows():
    n = 33
    op = build_sbp(4, n, 1.0 / (n - 1))
    xi = np.linspace(0.0, 1.0, n)
    got = apply_derivative(op, xi ** 3)
    w = op.closure_width
    assert np.max(np.abs(got[w:n - w] - 3.0 * xi[w:n - w] ** 2)) <= 1e-10


@pytest.mark.parametrize("order", ORDERS)
def test_quadrature_moments(order):
    """P integrates monomials up to degree interior_order - 1 on [0, 1]."""
    n = 37
    op = build_sbp(order, n, 1.0 / (n - 1))
    xi = np.linspace(0.0, 1.0, n)
    for k in range(order):
        got = quadrature(op, xi ** k, np.ones(n), 1.0)
        assert abs(got - 1.0 / (k + 1)) <= 1e-12, f"moment {k}"


def test_quadrature_constant_is_domain_length():
    op = build_sbp(4, 21, 1.0 / 20)
    ones = np.ones(21)
    assert abs(quadrature(op, ones, ones, 1.0) - 1.0) <= 1e-14
    assert quadrature(op, np.zeros(21), ones, 1.0) == 0.0


def test_quadrature_matches_direct_sum():
    rng = np.random.default_rng(7)
    op = build_sbp(6, 18, 0.25)
    u = rng.normal(size=18)
    v = rng.normal(size=18)
    w = rng.uniform(0.5, 2.0, size=18)
    direct = sum(u[i] * op.P[i] * w[i] * v[i] for i in range(18))
    got = quadrature(op, u, v, w)
    assert abs(got - direct) <= 1e-13 * max(1.0, abs(direct))


def test_perturbed_q_raises_residual():
    op = build_sbp(4, 12, 1.0 / 11)
    q = op.Q.copy()
    q[0, 1] += 1e-3
    bad = dataclasses.replace(op, Q=q)
    assert sbp_property_residual(bad) >= 1e-3


def test_order6_large_grid_residual():
    op = build_sbp(6, 20, 1.0 / 19)
    assert sbp_property_residual(op) <= 1e-13


def test_build_rejects_bad_order():
    with pytest.raises(ConfigError):
        build_sbp(3, 20, 0.1)


@pytest.mark.parametrize("order,n", [(2, 3), (4, 7), (6, 11)])
def test_build_rejects_too_few_points(order, n):
    with pytest.raises(ConfigError):
        build_sbp(order, n, 0.1)


def test_build_rejects_nonpositive_spacing():
    with pytest.raises(ConfigError):
        build_sbp(2, 10, 0.0)


def test_apply_derivative_shape_error():
    op = build_sbp(2, 10, 0.1)
    with pytest.raises(ShapeError):
        apply_derivative(op, np.zeros(9))


def test_quadrature_shape_and_weight_errors():
    op = build_sbp(2, 10, 0.1)
    ones = np.ones(10)
    with pytest.raises(ShapeError):
        quadrature(op, np.ones(9), ones, 1.0)
    with pytest.raises(GeometryError):
        quadrature(op, ones, ones, -1.0)
    with pytest.raises(GeometryError):
        quadrature(op, ones, ones, np.zeros(10))


def test_operators_are_read_only():
    op = build_sbp(4, 12, 0.1)
    with pytest.raises(ValueError):
        op.Q[0, 0] = 1.0
