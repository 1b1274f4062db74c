import numpy as np
import pytest

from evapfront.errors import ConfigError, ShapeError
from evapfront.interface import (
    PenaltySet, Regime, boundary_flux, classify_strong_regime, mesh_velocity,
    sat_contribution, select_penalties, wave_speeds,
)
from evapfront.sbp import build_sbp


@pytest.fixture(scope="module")
def ops():
    n = 16
    return build_sbp(4, n, 1.0 / (n - 1)), build_sbp(4, n, 1.0 / (n - 1))


def test_boundary_flux_constant_is_zero(ops):
    op, _ = ops
    assert abs(boundary_flux(np.full(op.n_points, 5.0), op, 2.0, 3.0, "last")) <= 1e-12


def test_boundary_flux_linear_slope(ops):
    op, _ = ops
    xi = np.linspace(0.0, 1.0, op.n_points)
    for side in ("first", "last"):
        got = boundary_flux(4.0 + 2.5 * xi, op, 1.0, 1.0, side)
        assert abs(got - 2.5) <= 1e-12


def test_boundary_flux_row_extraction_oracle(ops):
    op, _ = ops
    rng = np.random.default_rng(11)
    T = rng.normal(size=op.n_points)
    k, j_inv = 1.7, 0.4
    want_last = k * j_inv * float(np.dot(op.D[-1], T))
    want_first = k * j_inv * float(np.dot(op.D[0], T))
    assert boundary_flux(T, op, k, j_inv, "last") == pytest.approx(want_last, rel=1e-14)
    assert boundary_flux(T, op, k, j_inv, "first") == pytest.approx(want_first, rel=1e-14)


def test_boundary_flux_errors(ops):
    op, _ = ops
    with pytest.raises(ShapeError):
        boundary_flux(np.zeros(3), op, 1.0, 1.0, "last")
    with pytest.raises(ConfigError):
        boundary_flux(np.zeros(op.n_points), op, 1.0, 1.0, "middle")


def test_mesh_velocity_zero_jump():
    assert mesh_velocity(2.0, 2.0, 1.0, 5.0) == 0.0


def test_mesh_velocity_arithmetic():
    assert mesh_velocity(1.0, 3.0, 0.5, 4.0) == 1.0


def test_mesh_velocity_linearity():
    assert mesh_velocity(-1.0, -3.0, 0.5, 4.0) == -mesh_velocity(1.0, 3.0, 0.5, 4.0)


def test_mesh_velocity_zero_denominator():
    with pytest.raises(ConfigError):
        mesh_velocity(1.0, 2.0, 0.0, 5.0)


def test_wave_speeds_static_mesh():
    a_v, a_l, u_l = wave_speeds(2.0, 0.0, 0.25)
    assert (a_v, a_l, u_l) == (2.0, 0.5, 0.5)


def test_wave_speeds_equal_densities():
    a_v, a_l, u_l = wave_speeds(1.5, 0.4, 1.0)
    assert a_l == a_v
    assert u_l == 1.5


def test_wave_speeds_consistency():
    a_v, a_l, u_l = wave_speeds(2.0, 0.5, 0.1)
    assert a_v == 1.5
    assert a_l == pytest.approx(0.15, abs=1e-15)
    assert u_l == pytest.approx(0.65, abs=1e-15)
    # a_l = u_l - u_tilde as a consequence.
    assert a_l - (u_l - 0.5) == pytest.approx(0.0, abs=1e-15)


def test_wave_speeds_identity_random():
    rng = np.random.default_rng(3)
    for _ in range(500):
        u_v, u_t = rng.normal(size=2)
        gamma = rng.uniform(1e-4, 1.0)
        a_v, a_l, u_l = wave_speeds(u_v, u_t, gamma)
        scale = max(1.0, abs(a_l), abs(u_l))
        assert abs(a_l - (u_l - u_t)) <= 4e-16 * scale


def test_select_penalties_vapor_branch():
    pen = select_penalties(-1.5, 2.0, 3.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0)
    assert pen.sigma_v1 == -3.0
    assert pen.sigma_l1 == 0.0


def test_select_penalties_liquid_branch():
    pen = select_penalties(2.0, 1.0, 3.0, 0.1, 1.0, 1.0, 1.0, 1.0, 1.0)
    assert pen.sigma_v1 == 0.0
    assert pen.sigma_l1 == pytest.approx(-0.6, abs=1e-15)


def test_select_penalties_zero_wave_speed():
    pen = select_penalties(0.0, 2.0, 3.0, 0.5, 1.0, 1.0, 1.0, 1.0, 0.7)
    assert pen.sigma_v1 == 0.0 and pen.sigma_l1 == 0.0


def test_select_penalties_invariants_random():
    rng = np.random.default_rng(42)
    for _ in range(2000):
        a_v = rng.normal()
        beta_v, beta_l = rng.uniform(0.1, 10.0, size=2)
        gamma = rng.uniform(1e-4, 1.0)
        k_v, k_l = rng.uniform(0.01, 5.0, size=2)
        j_v, j_l = rng.uniform(0.05, 3.0, size=2)
        sigma = rng.uniform(0.0, 4.0)
        pen = select_penalties(a_v, beta_v, beta_l, gamma, k_v, k_l, j_v, j_l, sigma)
        assert pen.sigma_v2 == pen.sigma_l2 == -sigma / 2.0
        assert pen.sigma_v2 <= 0.0
        assert pen.sigma_v3 == -k_v / j_v
        assert pen.sigma_l3 == k_l / j_l
        assert pen.sigma_v1 <= 0.0
        assert pen.sigma_l1 <= 0.0
        if a_v != 0.0:
            assert (pen.sigma_v1 == 0.0) != (pen.sigma_l1 == 0.0)
        else:
            assert pen.sigma_v1 == pen.sigma_l1 == 0.0


def test_select_penalties_validation():
    with pytest.raises(ConfigError):
        select_penalties(1.0, 1.0, 1.0, 0.5, 1.0, 1.0, -1.0, 1.0, 1.0)
    with pytest.raises(ConfigError):
        select_penalties(1.0, 1.0, 1.0, 0.5, 1.0, 1.0, 1.0, 1.0, -0.1)


def test_sat_contribution_vanishes_when_matched(ops):
    op_v, op_l = ops
    t_delta = 1.3
    T_v = np.linspace(0.2, t_delta, op_v.n_points)
    T_l = np.linspace(t_delta, 2.0, op_l.n_points)
    pen = select_penalties(-0.4, 2.0, 3.0, 0.5, 1.0, 2.0, 0.3, 0.7, 1.0)
    rhs_v, rhs_l = sat_contribution(T_v, T_l, t_delta, pen, op_v, op_l)
    assert np.all(rhs_v == 0.0)
    assert np.all(rhs_l == 0.0)


def test_sat_contribution_single_penalty_selector(ops):
    op_v, op_l = ops
    pen = PenaltySet(sigma_v1=1.0, sigma_l1=0.0, sigma_v2=0.0, sigma_l2=0.0,
                     sigma_v3=0.0, sigma_l3=0.0, sigma_free=0.0)
    T_v = np.zeros(op_v.n_points)
    d = 0.8
    T_v[-1] = d  # t_delta = 0, so the mismatch is exactly d
    T_l = np.zeros(op_l.n_points)
    rhs_v, rhs_l = sat_contribution(T_v, T_l, 0.0, pen, op_v, op_l)
    expected = np.zeros(op_v.n_points)
    expected[-1] = d / op_v.P[-1]
    assert np.allclose(rhs_v, expected, rtol=0.0, atol=1e-15)
    assert np.all(rhs_l == 0.0)


def test_sat_energy_inner_product_matches_pointwise_formula(ops):
    # 2 T^T P rhs must equal the pointwise interface formula with
    # numerically computed gradients.
    op_v, op_l = ops
    rng = np.random.default_rng(5)
    for _ in range(50):
        T_v = rng.normal(size=op_v.n_points)
        T_l = rng.normal(size=op_l.n_points)
        t_delta = rng.normal()
        pen = select_penalties(rng.normal(), rng.uniform(0.5, 2.0),
                               rng.uniform(0.5, 2.0), rng.uniform(0.1, 0.9),
                               rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0),
                               rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0),
                               rng.uniform(0.0, 2.0))
        rhs_v, rhs_l = sat_contribution(T_v, T_l, t_delta, pen, op_v, op_l)
        got = 2.0 * (T_v @ (op_v.P * rhs_v)) + 2.0 * (T_l @ (op_l.P * rhs_l))
        txi_n = float(op_v.D[-1] @ T_v)
        teta_0 = float(op_l.D[0] @ T_l)
        want = 2.0 * (pen.sigma_v1 * T_v[-1] * (T_v[-1] - t_delta)
                      + pen.sigma_v2 * T_v[-1] * (T_v[-1] - T_l[0])
                      + pen.sigma_v3 * txi_n * (T_v[-1] - t_delta)) \
            + 2.0 * (pen.sigma_l1 * T_l[0] * (T_l[0] - t_delta)
                     + pen.sigma_l2 * T_l[0] * (T_l[0] - T_v[-1])
                     + pen.sigma_l3 * teta_0 * (T_l[0] - t_delta))
        assert got == pytest.approx(want, rel=1e-12, abs=1e-13)


def test_sat_contribution_shape_error(ops):
    op_v, op_l = ops
    pen = select_penalties(0.0, 1.0, 1.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ShapeError):
        sat_contribution(np.zeros(3), np.zeros(op_l.n_points), 0.0, pen, op_v, op_l)


@pytest.mark.parametrize("a_v,u_t,expected", [
    (-1.0, 0.5, Regime.DISSIPATIVE),
    (-1.0, 0.0, Regime.DISSIPATIVE),
    (-1.0, -0.5, Regime.BOUNDED),
    (1.0, 0.5, Regime.BOUNDED),
    (0.0, 0.0, Regime.BOUNDED),
    (0.0, 1.0, Regime.BOUNDED),
])
def test_classify_strong_regime(a_v, u_t, expected):
    assert classify_strong_regime(a_v, u_t) is expected
