"""Semi-discrete assembly and time integration of the coupled system.

The transformed equations are discretized in skew-symmetric split form:

    beta/2 ( (J T)_tau + J T_tau + D A T + A D T )
        = k D (J^{-1} D T) + interface SATs + outer SATs + J f,

with diagonal A holding the nodal transformed speeds a = u - x_tau and
spatially uniform Jacobians from the linear maps.  Expanding the time
term, (J T)_tau + J T_tau = Jdot T + 2 J T_tau, so each right-hand-side
evaluation solves for

    T_tau = ( RHS_spatial + SAT_total - beta/2 Jdot T ) / (beta J).

The split form plus the exact discrete GCL of the linear map keep
uniform states exact fixed points, and the energy method applied to this
discretization telescopes into the interface/boundary terms the energy
monitor audits.

The coupled state (T_v, T_l, x_delta) advances with classical RK4; every
stage re-evaluates the full right-hand side at the stage's own interface
position, so Jacobians, wave speeds and penalties stay stage-consistent.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import mms as mms_mod
from .errors import (
    ConfigError, GeometryError, NumericalFailureError, PhaseDepletionError,
)
from .interface import (
    InterfaceState, PenaltySet, mesh_velocity, sat_contribution,
    select_penalties, wave_speeds,
)
from .mesh import MeshState, build_mesh, jacobian_rates
from .physics import InterfacePhysics, MaterialProps
from .sbp import MIN_POINTS, SbpOperator, build_sbp

# Default safety factor of the CFL-style step bound.
CFL_SAFETY = 0.25


@dataclass(frozen=True)
class SolverConfig:
    """Numerical parameters of a run."""

    n_v: int
    n_l: int
    sbp_order: int
    dt: float                 # 0.0 requests the CFL-style default
    t_end: float
    outer_bc_v: float
    outer_bc_l: float
    u_v: float
    sigma_free: float = 1.0
    audit_every: int = 10
    snapshot_every: int = 10
    mms: mms_mod.MmsCase | None = None

    def __post_init__(self):
        if self.dt < 0.0:
            raise ConfigError(f"dt must be nonnegative, got {self.dt}")
        if self.t_end < 0.0:
            raise ConfigError(f"t_end must be nonnegative, got {self.t_end}")
        if self.sbp_order not in MIN_POINTS:
            raise ConfigError(f"unsupported sbp_order {self.sbp_order}")
        n_min = MIN_POINTS[self.sbp_order]
        if self.n_v < n_min or self.n_l < n_min:
            raise ConfigError(
                f"node counts ({self.n_v}, {self.n_l}) below operator "
                f"minimum {n_min} for order {self.sbp_order}")
        if self.sigma_free < 0.0:
            raise ConfigError(f"sigma_free must be nonnegative, got {self.sigma_free}")
        if self.audit_every < 1 or self.snapshot_every < 1:
            raise ConfigError("cadences must be positive integers")


@dataclass(frozen=True)
class SimState:
    """The evolving unknowns: nodal temperatures and interface position."""

    t_v: np.ndarray
    t_l: np.ndarray
    x_delta: float
    time: float


@dataclass(frozen=True)
class RhsOutput:
    """One right-hand-side evaluation plus the snapshots the audit needs."""

    dt_v: np.ndarray
    dt_l: np.ndarray
    dx_delta: float
    interface: InterfaceState
    penalties: PenaltySet
    mesh: MeshState
    t_xi: np.ndarray
    t_eta: np.ndarray
    a_v_field: np.ndarray
    a_l_field: np.ndarray
    bc_v_value: float
    bc_l_value: float
    forcing_v: np.ndarray | None = None
    forcing_l: np.ndarray | None = None


@dataclass(frozen=True)
class RunContext:
    """Immutable inputs shared by every right-hand-side evaluation."""

    cfg: SolverConfig
    vapor: MaterialProps
    liquid: MaterialProps
    iphys: InterfacePhysics
    op_v: SbpOperator
    op_l: SbpOperator
    x0: float
    xn: float
    bc_v: Callable[[float], float]
    bc_l: Callable[[float], float]
    c_stab: float = 1.0


def make_context(cfg: SolverConfig, vapor: MaterialProps, liquid: MaterialProps,
                 iphys: InterfacePhysics, x0: float, xn: float,
                 bc_v: Callable[[float], float] | None = None,
                 bc_l: Callable[[float], float] | None = None) -> RunContext:
    """Build the run context; constant BCs default to the config values."""
    h_v = 1.0 / (cfg.n_v - 1)
    h_l = 1.0 / (cfg.n_l - 1)
    op_v = build_sbp(cfg.sbp_order, cfg.n_v, h_v)
    op_l = build_sbp(cfg.sbp_order, cfg.n_l, h_l)
    if bc_v is None:
        bc_v = _constant(cfg.outer_bc_v)
    if bc_l is None:
        bc_l = _constant(cfg.outer_bc_l)
    return RunContext(cfg=cfg, vapor=vapor, liquid=liquid, iphys=iphys,
                      op_v=op_v, op_l=op_l, x0=x0, xn=xn,
                      bc_v=bc_v, bc_l=bc_l)


def _constant(value: float) -> Callable[[float], float]:
    def bc(_t: float) -> float:
        return value
    return bc


def outer_penalty_coeffs(beta: float, a_boundary: float, k: float,
                         j_inv: float, spacing: float, side: str,
                         c_stab: float = 1.0):
    """(tau0, tau1) for the weak Dirichlet closure at an outer boundary.

    tau0 combines an upwind-strength advective part with a 1/h-scaled
    diffusive part; tau1 is the gradient penalty whose sign cancels the
    raw boundary flux term in the energy rate (+k j_inv at a first node,
    -k j_inv at a last node, mirroring the interface construction).
    """
    tau0 = -(abs(a_boundary) * beta / 2.0 + c_stab * k * j_inv / spacing)
    tau1 = k * j_inv if side == "first" else -k * j_inv
    return tau0, tau1


def outer_bc_sat(T: np.ndarray, bc_value: float, op: SbpOperator, beta: float,
                 a_boundary: float, k: float, j_inv: float, side: str,
                 c_stab: float = 1.0) -> np.ndarray:
    """Penalty vector P^{-1} (tau0 E (T - bc) + tau1 D^T E (T - bc))."""
    if side not in ("first", "last"):
        raise ConfigError(f"side must be 'first' or 'last', got {side!r}")
    T = np.asarray(T, dtype=float)
    if T.shape != (op.n_points,):
        raise ConfigError(
            f"field has shape {T.shape}, operator expects ({op.n_points},)")
    tau0, tau1 = outer_penalty_coeffs(beta, a_boundary, k, j_inv,
                                      op.spacing, side, c_stab)
    b = 0 if side == "first" else op.n_points - 1
    d = T[b] - bc_value
    rhs = tau1 * d * op.D[b]
    rhs[b] += tau0 * d
    rhs /= op.P
    return rhs


def _require_finite(name: str, arr: np.ndarray, step_hint: str):
    bad = np.flatnonzero(~np.isfinite(np.atleast_1d(arr)))
    if bad.size:
        raise NumericalFailureError(
            f"non-finite value in {name} at node {int(bad[0])} ({step_hint})",
            term=name, node=int(bad[0]))


def assemble_rhs(state: SimState, ctx: RunContext) -> RhsOutput:
    """Evaluate the semi-discrete right-hand side at one state."""
    cfg = ctx.cfg
    vap, liq, iph = ctx.vapor, ctx.liquid, ctx.iphys
    op_v, op_l = ctx.op_v, ctx.op_l
    t_v, t_l = state.t_v, state.t_l

    j_v = state.x_delta - ctx.x0
    j_l = ctx.xn - state.x_delta
    if j_v <= 0.0 or j_l <= 0.0:
        raise GeometryError(
            f"degenerate Jacobian at x_delta={state.x_delta} "
            f"(domain [{ctx.x0}, {ctx.xn}])")

    t_xi = op_v.D @ t_v
    t_eta = op_l.D @ t_l
    flux_v = vap.k * t_xi[-1] / j_v
    flux_l = liq.k * t_eta[0] / j_l

    case = cfg.mms
    if case is not None and case.variant == "prescribed":
        u_tilde = case.x_delta_dot(state.time)
    else:
        u_tilde = mesh_velocity(flux_v, flux_l, vap.rho, iph.h_lv)

    a_v_delta, a_l_delta, u_l_delta = wave_speeds(cfg.u_v, u_tilde, iph.gamma)
    iface = InterfaceState(flux_v=flux_v, flux_l=flux_l, u_tilde=u_tilde,
                           a_v_delta=a_v_delta, a_l_delta=a_l_delta,
                           u_l_delta=u_l_delta)

    mesh = build_mesh(ctx.x0, ctx.xn, state.x_delta, cfg.n_v, cfg.n_l,
                      interface_velocity=u_tilde)
    a_v_field = cfg.u_v - mesh.x_tau_v
    a_l_field = u_l_delta - mesh.x_tau_l

    pen = select_penalties(a_v_delta, vap.beta, liq.beta, iph.gamma,
                           vap.k, liq.k, j_v, j_l, cfg.sigma_free)
    sat_v, sat_l = sat_contribution(t_v, t_l, iph.t_delta, pen, op_v, op_l)

    bc_v_value = ctx.bc_v(state.time)
    bc_l_value = ctx.bc_l(state.time)
    out_v = outer_bc_sat(t_v, bc_v_value, op_v, vap.beta, a_v_field[0],
                         vap.k, 1.0 / j_v, "first", ctx.c_stab)
    out_l = outer_bc_sat(t_l, bc_l_value, op_l, liq.beta, a_l_field[-1],
                         liq.k, 1.0 / j_l, "last", ctx.c_stab)

    adv_v = 0.5 * vap.beta * (op_v.D @ (a_v_field * t_v) + a_v_field * t_xi)
    adv_l = 0.5 * liq.beta * (op_l.D @ (a_l_field * t_l) + a_l_field * t_eta)
    diff_v = (vap.k / j_v) * (op_v.D @ t_xi)
    diff_l = (liq.k / j_l) * (op_l.D @ t_eta)

    forcing_v = forcing_l = None
    rhs_v = diff_v - adv_v + sat_v + out_v
    rhs_l = diff_l - adv_l + sat_l + out_l
    if case is not None:
        u_l_exact = mms_mod.liquid_velocity(case, state.time, cfg.u_v, iph)
        forcing_v = mms_mod.mms_source(case, "vapor", state.time, mesh.nodes_v,
                                       vap, cfg.u_v, vap, liq, iph)
        forcing_l = mms_mod.mms_source(case, "liquid", state.time, mesh.nodes_l,
                                       liq, u_l_exact, vap, liq, iph)
        rhs_v = rhs_v + j_v * forcing_v
        rhs_l = rhs_l + j_l * forcing_l

    jdot_v, jdot_l = jacobian_rates(u_tilde)
    dt_v = (rhs_v - 0.5 * vap.beta * jdot_v * t_v) / (vap.beta * j_v)
    dt_l = (rhs_l - 0.5 * liq.beta * jdot_l * t_l) / (liq.beta * j_l)

    if not (np.all(np.isfinite(dt_v)) and np.all(np.isfinite(dt_l))
            and math.isfinite(u_tilde)):
        hint = f"t={state.time:.6g}, x_delta={state.x_delta:.6g}"
        _require_finite("interface velocity", np.array([u_tilde]), hint)
        for name, arr in (("diffusion(vapor)", diff_v), ("advection(vapor)", adv_v),
                          ("interface SAT(vapor)", sat_v), ("outer SAT(vapor)", out_v),
                          ("diffusion(liquid)", diff_l), ("advection(liquid)", adv_l),
                          ("interface SAT(liquid)", sat_l), ("outer SAT(liquid)", out_l),
                          ("dT(vapor)", dt_v), ("dT(liquid)", dt_l)):
            _require_finite(name, arr, hint)

    return RhsOutput(dt_v=dt_v, dt_l=dt_l, dx_delta=u_tilde, interface=iface,
                     penalties=pen, mesh=mesh, t_xi=t_xi, t_eta=t_eta,
                     a_v_field=a_v_field, a_l_field=a_l_field,
                     bc_v_value=bc_v_value, bc_l_value=bc_l_value,
                     forcing_v=forcing_v, forcing_l=forcing_l)


def rk4_step(state: SimState, dt: float, ctx: RunContext,
             rhs: Callable[[SimState, RunContext], RhsOutput] = assemble_rhs
             ) -> SimState:
    """One classical four-stage explicit step of the coupled system.

    The ``rhs`` hook exists for diagnostics (e.g. embedding a scalar test
    equation); production use leaves it at ``assemble_rhs``.
    """
    if not dt > 0.0:
        raise ConfigError(f"dt must be positive, got {dt}")

    def shifted(frac: float, k: RhsOutput) -> SimState:
        return SimState(t_v=state.t_v + frac * dt * k.dt_v,
                        t_l=state.t_l + frac * dt * k.dt_l,
                        x_delta=state.x_delta + frac * dt * k.dx_delta,
                        time=state.time + frac * dt)

    k1 = rhs(state, ctx)
    k2 = rhs(shifted(0.5, k1), ctx)
    k3 = rhs(shifted(0.5, k2), ctx)
    k4 = rhs(shifted(1.0, k3), ctx)

    sixth = dt / 6.0
    new = SimState(
        t_v=state.t_v + sixth * (k1.dt_v + 2.0 * k2.dt_v + 2.0 * k3.dt_v + k4.dt_v),
        t_l=state.t_l + sixth * (k1.dt_l + 2.0 * k2.dt_l + 2.0 * k3.dt_l + k4.dt_l),
        x_delta=state.x_delta + sixth * (k1.dx_delta + 2.0 * k2.dx_delta
                                         + 2.0 * k3.dx_delta + k4.dx_delta),
        time=state.time + dt,
    )
    if not (np.all(np.isfinite(new.t_v)) and np.all(np.isfinite(new.t_l))
            and math.isfinite(new.x_delta)):
        raise NumericalFailureError(
            f"non-finite state after step at t={state.time:.6g}")
    return new


def cfl_time_step(cfg: SolverConfig, vapor: MaterialProps, liquid: MaterialProps,
                  j_v: float, j_l: float, u_tilde_ref: float,
                  safety: float = CFL_SAFETY) -> float:
    """Conservative explicit step bound dt <= C min(h^2 J^2 beta/k, h J/|a|).

    Uses the initial Jacobians and an interface-speed estimate; the
    diffusive bound dominates for the problems at hand.
    """
    h_v = 1.0 / (cfg.n_v - 1)
    h_l = 1.0 / (cfg.n_l - 1)
    bounds = []
    for h, j, mat in ((h_v, j_v, vapor), (h_l, j_l, liquid)):
        if mat.k > 0.0:
            bounds.append(h * h * j * j * mat.beta / mat.k)
        a_ref = abs(cfg.u_v) + 2.0 * abs(u_tilde_ref)
        if a_ref > 0.0:
            bounds.append(h * j / a_ref)
    if not bounds:
        raise ConfigError("cannot choose a time step for k = 0 and no advection")
    return safety * min(bounds)


@dataclass
class RunResult:
    """Report of one simulation, including partial output on failure."""

    status: str
    message: str
    dt: float
    n_steps: int
    snapshots: list[SimState]
    snapshot_steps: list[int]
    ledgers: list
    ledger_steps: list[int]
    final_state: SimState
    failed_step: int | None = None
    max_gcl_residual: float = 0.0
    max_identity_residual: float = 0.0
    max_itsat_residual: float = 0.0
    t_min: float = math.inf
    t_max: float = -math.inf
    regimes: tuple[str, ...] = ()
    audit_violations: int = 0
    wall_time: float = 0.0


def resolve_dt(ctx: RunContext, initial: SimState) -> float:
    """The configured dt, or the CFL-style default when dt == 0."""
    if ctx.cfg.dt > 0.0:
        return ctx.cfg.dt
    probe = assemble_rhs(initial, ctx)
    return cfl_time_step(ctx.cfg, ctx.vapor, ctx.liquid,
                         initial.x_delta - ctx.x0, ctx.xn - initial.x_delta,
                         probe.interface.u_tilde)


def run_simulation(ctx: RunContext, initial: SimState) -> RunResult:
    """Advance from ``initial`` to t_end, auditing at the configured cadence."""
    from .energy import audit_step  # deferred: energy imports solver types

    cfg = ctx.cfg
    started = _time.perf_counter()
    dt = resolve_dt(ctx, initial)
    n_steps = max(1, round(cfg.t_end / dt)) if cfg.t_end > 0.0 else 0

    # Phase-depletion margin: two initial grid cells per phase.
    eps_v = 2.0 * (initial.x_delta - ctx.x0) / (cfg.n_v - 1)
    eps_l = 2.0 * (ctx.xn - initial.x_delta) / (cfg.n_l - 1)

    result = RunResult(status="completed", message="", dt=dt, n_steps=n_steps,
                       snapshots=[], snapshot_steps=[], ledgers=[],
                       ledger_steps=[], final_state=initial)
    regimes: set[str] = set()

    def record(step: int, state: SimState, want_snapshot: bool, want_audit: bool):
        if want_snapshot:
            result.snapshots.append(state)
            result.snapshot_steps.append(step)
        if want_audit:
            ledger = audit_step(state, assemble_rhs(state, ctx), ctx)
            result.ledgers.append(ledger)
            result.ledger_steps.append(step)
            result.max_gcl_residual = max(result.max_gcl_residual,
                                          ledger.gcl_residual)
            result.max_identity_residual = max(result.max_identity_residual,
                                               ledger.identity_residual)
            result.max_itsat_residual = max(result.max_itsat_residual,
                                            ledger.itsat_residual)
            result.audit_violations += len(ledger.violations)
            regimes.add(ledger.regime)

    def track_extremes(state: SimState):
        result.t_min = min(result.t_min, float(np.min(state.t_v)),
                           float(np.min(state.t_l)))
        result.t_max = max(result.t_max, float(np.max(state.t_v)),
                           float(np.max(state.t_l)))

    state = initial
    step = 0
    try:
        track_extremes(state)
        record(0, state, want_snapshot=True, want_audit=True)
        for step in range(1, n_steps + 1):
            state = rk4_step(state, dt, ctx)
            if (state.x_delta < ctx.x0 + eps_v
                    or state.x_delta > ctx.xn - eps_l):
                raise PhaseDepletionError(
                    f"interface at x_delta={state.x_delta:.6g} within two "
                    f"cells of the domain boundary at step {step}",
                    step=step, time=state.time, x_delta=state.x_delta)
            track_extremes(state)
            is_last = step == n_steps
            want_snapshot = is_last or step % cfg.snapshot_every == 0
            want_audit = is_last or step % cfg.audit_every == 0
            if want_snapshot or want_audit:
                record(step, state, want_snapshot, want_audit)
            result.final_state = state
    except (PhaseDepletionError, GeometryError) as exc:
        # A degenerate Jacobian means the front left the domain, i.e. a
        # phase emptied out; the two-cell margin normally fires first.
        result.status = "phase_depletion"
        result.message = str(exc)
        result.failed_step = getattr(exc, "step", None) or step
        result.final_state = state
    except NumericalFailureError as exc:
        result.status = "numerical_failure"
        result.message = str(exc)
        result.failed_step = getattr(exc, "step", None) or step
        result.final_state = state

    result.regimes = tuple(sorted(regimes))
    result.wall_time = _time.perf_counter() - started
    return result
