import numpy as np
import pytest

from evapfront.errors import GeometryError
from evapfront.mesh import build_mesh, gcl_residual, jacobian_rates, mesh_velocity_field
from evapfront.sbp import build_sbp


def test_jacobians_linear_map():
    m = build_mesh(0.0, 1.0, 0.25, 9, 9)
    assert m.j_v == 0.25
    assert m.j_l == 0.75


def test_midpoint_interface_symmetric():
    m = build_mesh(-1.0, 3.0, 1.0, 5, 5)
    assert m.j_v == m.j_l == 2.0


def test_interface_collocation():
    m = build_mesh(0.0, 2.0, 0.5, 9, 13)
    assert m.nodes_v[-1] == pytest.approx(0.5, abs=1e-15)
    assert m.nodes_l[0] == pytest.approx(0.5, abs=1e-15)
    assert m.nodes_v[0] == 0.0
    assert m.nodes_l[-1] == pytest.approx(2.0, abs=1e-15)


def test_ordering_violation_rejected():
    with pytest.raises(GeometryError):
        build_mesh(0.0, 1.0, 1.5, 5, 5)
    with pytest.raises(GeometryError):
        build_mesh(0.0, 1.0, 0.0, 5, 5)


def test_velocity_field_zero():
    m = build_mesh(0.0, 1.0, 0.3, 7, 7)
    xv, xl = mesh_velocity_field(m, 0.0)
    assert np.all(xv == 0.0) and np.all(xl == 0.0)


def test_velocity_field_interface_kinematics():
    m = build_mesh(0.0, 1.0, 0.3, 9, 9)
    xv, xl = mesh_velocity_field(m, 2.0)
    assert xv[-1] == 2.0
    assert xl[0] == 2.0
    assert xv[0] == 0.0 and xl[-1] == 0.0
    # Midpoint of the vapor map moves at half the interface speed.
    assert xv[4] == pytest.approx(1.0, abs=1e-15)


def test_jacobian_rates_signs():
    assert jacobian_rates(0.7) == (0.7, -0.7)


def test_gcl_zero_velocity():
    n = 11
    m = build_mesh(0.0, 1.0, 0.5, n, n)
    op = build_sbp(2, n, 1.0 / (n - 1))
    assert gcl_residual(m, 0.0, op, op) == (0.0, 0.0)


@pytest.mark.parametrize("order", [2, 4, 6])
@pytest.mark.parametrize("w", [-1.3, 2.6e3])
def test_gcl_exact_for_linear_map(order, w):
    n = 21
    m = build_mesh(0.0, 1.0, 0.4, n, n, interface_velocity=w)
    op = build_sbp(order, n, 1.0 / (n - 1))
    rv, rl = gcl_residual(m, w, op, op)
    scale = max(1.0, abs(w))
    assert rv <= 1e-12 * scale
    assert rl <= 1e-12 * scale


def test_gcl_detects_corrupted_velocity():
    import dataclasses
    n = 11
    m = build_mesh(0.0, 1.0, 0.5, n, n, interface_velocity=1.0)
    bad = dataclasses.replace(m, x_tau_v=m.xi_grid + 0.1 * m.xi_grid ** 2)
    op = build_sbp(2, n, 1.0 / (n - 1))
    rv, _ = gcl_residual(bad, 1.0, op, op)
    assert rv > 1e-3


def test_interface_velocity_integral_matches_displacement():
    # The time integral of the interface velocity equals the interface
    # displacement, to time-integrator accuracy.
    from evapfront.physics import MaterialProps, derive_interface_constants
    from evapfront.solver import (
        SimState, SolverConfig, assemble_rhs, make_context, run_simulation,
    )
    vap = MaterialProps(rho=0.5, cp=2.0, k=0.05)
    liq = MaterialProps(rho=1.0, cp=3.0, k=0.12)
    iph = derive_interface_constants(vap, liq, t_delta=1.0, h_lv=0.9)
    cfg = SolverConfig(n_v=17, n_l=17, sbp_order=4, dt=2e-3, t_end=0.3,
                       outer_bc_v=1.6, outer_bc_l=1.0, u_v=0.05,
                       snapshot_every=1)
    ctx = make_context(cfg, vap, liq, iph, 0.0, 1.0)
    xi = np.linspace(0.0, 1.0, 17)
    state = SimState(t_v=1.6 - 0.6 * xi ** 2, t_l=np.full(17, 1.0),
                     x_delta=0.45, time=0.0)
    res = run_simulation(ctx, state)
    assert res.status == "completed"
    times = [s.time for s in res.snapshots]
    u_tilde = [assemble_rhs(s, ctx).interface.u_tilde for s in res.snapshots]
    integral = np.trapezoid(u_tilde, times)
    displacement = res.final_state.x_delta - 0.45
    assert displacement != 0.0
    assert integral == pytest.approx(displacement, rel=5e-4)
