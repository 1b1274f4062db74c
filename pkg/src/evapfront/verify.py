"""Executable property suite and the MMS convergence harness.

Each check returns (name, passed, worst_residual, detail); the CLI turns
the list into pass/fail lines and an exit status.  The randomized checks
are driven by a single integer seed so reruns are reproducible.  The
``corrupt_*`` keywords are mutation hooks used by the test suite to
prove the checks can fail.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import mms as mms_mod
from .energy import it_direct, itsat_closed_form, sat_direct
from .interface import (
    Regime, classify_strong_regime, select_penalties, wave_speeds,
)
from .mesh import build_mesh, gcl_residual
from .physics import MaterialProps, derive_interface_constants
from .sbp import MIN_POINTS, SUPPORTED_ORDERS, build_sbp, quadrature, sbp_property_residual
from .solver import SimState, SolverConfig, make_context, rk4_step


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""


def check_sbp_identity(sizes=("min", 33, 101), *, corrupt_q: bool = False) -> PropertyResult:
    worst = 0.0
    for order in SUPPORTED_ORDERS:
        for size in sizes:
            n = MIN_POINTS[order] if size == "min" else int(size)
            op = build_sbp(order, n, 1.0 / (n - 1))
            if corrupt_q:
                q = op.Q.copy()
                q[0, 1] += 1e-3
                op = dataclasses.replace(op, Q=q)
            worst = max(worst, sbp_property_residual(op))
    return PropertyResult("sbp-identity", worst <= 1e-13, worst, 1e-13)


def check_operator_accuracy() -> PropertyResult:
    worst = 0.0
    n = 41
    for order in SUPPORTED_ORDERS:
        op = build_sbp(order, n, 1.0 / (n - 1))
        xi = np.linspace(0.0, 1.0, n)
        w = op.closure_width
        for k in range(order + 1):
            exact = k * xi ** (k - 1) if k > 0 else np.zeros(n)
            err = np.abs(op.D @ (xi ** k) - exact) / max(1.0, float(np.max(np.abs(exact))))
            worst = max(worst, float(np.max(err[w:n - w])))
            if k <= order // 2:
                worst = max(worst, float(np.max(err)))
    return PropertyResult("operator-accuracy", worst <= 1e-10, worst, 1e-10)


def check_quadrature_moments() -> PropertyResult:
    worst = 0.0
    n = 37
    for order in SUPPORTED_ORDERS:
        op = build_sbp(order, n, 1.0 / (n - 1))
        xi = np.linspace(0.0, 1.0, n)
        ones = np.ones(n)
        for k in range(order):
            got = quadrature(op, xi ** k, ones, 1.0)
            worst = max(worst, abs(got - 1.0 / (k + 1)))
    return PropertyResult("quadrature-moments", worst <= 1e-12, worst, 1e-12)


def check_penalty_invariants(seed: int, samples: int = 2000) -> PropertyResult:
    rng = np.random.default_rng(seed)
    for i in range(samples):
        a_v = float(rng.normal()) if i % 7 else 0.0
        beta_v, beta_l = rng.uniform(0.1, 10.0, size=2)
        gamma = float(rng.uniform(1e-4, 1.0))
        k_v, k_l = rng.uniform(0.01, 5.0, size=2)
        j_v, j_l = rng.uniform(0.05, 3.0, size=2)
        sigma = float(rng.uniform(0.0, 4.0))
        pen = select_penalties(a_v, beta_v, beta_l, gamma, k_v, k_l, j_v, j_l, sigma)
        ok = (pen.sigma_v2 == pen.sigma_l2 == -sigma / 2.0
              and pen.sigma_v2 <= 0.0
              and pen.sigma_v3 == -k_v / j_v and pen.sigma_l3 == k_l / j_l
              and pen.sigma_v1 <= 0.0 and pen.sigma_l1 <= 0.0)
        if a_v != 0.0:
            ok = ok and ((pen.sigma_v1 == 0.0) != (pen.sigma_l1 == 0.0))
        else:
            ok = ok and pen.sigma_v1 == pen.sigma_l1 == 0.0
        if not ok:
            return PropertyResult("penalty-invariants", False, math.inf, 0.0,
                                  f"violated at sample {i}: {pen}")
    return PropertyResult("penalty-invariants", True, 0.0, 0.0)


def closed_form_residuals(seed: int, samples: int, regime: str, *,
                          n: int = 12, order: int = 2,
                          corrupt_penalties: bool = False) -> float:
    """Worst relative |it_direct + sat_direct - itsat_closed| over random states.

    ``regime`` selects the sign of a_v at the interface: "negative",
    "positive" or "zero".
    """
    rng = np.random.default_rng(seed)
    op = build_sbp(order, n, 1.0 / (n - 1))
    worst = 0.0
    for _ in range(samples):
        t_v = rng.uniform(-2.0, 2.0, size=n)
        t_l = rng.uniform(-2.0, 2.0, size=n)
        t_delta = float(rng.uniform(0.0, 2.0))
        rho_v = float(rng.uniform(0.1, 2.0))
        h_lv = float(rng.uniform(0.5, 5.0))
        beta_v, beta_l = rng.uniform(0.2, 5.0, size=2)
        gamma = float(rng.uniform(1e-3, 0.99))
        k_v, k_l = rng.uniform(0.01, 2.0, size=2)
        j_v, j_l = rng.uniform(0.1, 2.0, size=2)
        sigma_free = float(rng.uniform(0.0, 3.0))

        t_xi = op.D @ t_v
        t_eta = op.D @ t_l
        flux_v = k_v * t_xi[-1] / j_v
        flux_l = k_l * t_eta[0] / j_l
        u_tilde = (flux_l - flux_v) / (rho_v * h_lv)
        if regime == "negative":
            u_v = u_tilde - float(rng.uniform(0.1, 2.0))
        elif regime == "positive":
            u_v = u_tilde + float(rng.uniform(0.1, 2.0))
        elif regime == "zero":
            u_v = u_tilde
        else:
            raise ValueError(f"unknown regime {regime!r}")
        a_v, a_l, _u_l = wave_speeds(u_v, u_tilde, gamma)
        pen = select_penalties(a_v, beta_v, beta_l, gamma, k_v, k_l,
                               j_v, j_l, sigma_free)
        if corrupt_penalties:
            pen = dataclasses.replace(
                pen, sigma_v1=-pen.sigma_v1 + 0.37, sigma_l1=-pen.sigma_l1 - 0.41)
        it = it_direct(t_v, t_l, t_xi, t_eta, a_v, a_l, j_v, j_l,
                       k_v, k_l, beta_v, beta_l)
        sat = sat_direct(t_v, t_l, t_xi, t_eta, pen, t_delta)
        c1 = 2.0 * t_delta * rho_v * h_lv
        closed = itsat_closed_form(t_v[-1], t_l[0], t_delta, a_v, a_l,
                                   beta_v, beta_l, u_tilde, c1, sigma_free)
        worst = max(worst, abs(it + sat - closed) / max(1.0, abs(closed)))
    return worst


def check_closed_form(seed: int, samples_per_regime: int = 2000, *,
                      corrupt_penalties: bool = False) -> PropertyResult:
    worst = 0.0
    for i, regime in enumerate(("negative", "positive", "zero")):
        worst = max(worst, closed_form_residuals(
            seed + i, samples_per_regime, regime,
            corrupt_penalties=corrupt_penalties))
    return PropertyResult("closed-form-equivalence", worst <= 1e-10, worst, 1e-10)


def pval_decomposition_residuals(seed: int, samples: int) -> float:
    """Worst relative mismatch of the 3x3 point-value form vs. its split.

    sigma_v1 and sigma_l1 are sampled freely: the decomposition identity
    only needs sigma_v2 = sigma_l2 = -sigma/2.
    """
    from .energy import pval_quadratic_form, pval_split_parts
    from .interface import PenaltySet

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        tv, tl, td = rng.uniform(-3.0, 3.0, size=3)
        beta_v, beta_l = rng.uniform(0.1, 5.0, size=2)
        a_v, a_l = rng.normal(size=2)
        s1v, s1l = rng.normal(size=2)
        sigma = float(rng.uniform(0.0, 4.0))
        pen = PenaltySet(sigma_v1=float(s1v), sigma_l1=float(s1l),
                         sigma_v2=-sigma / 2.0, sigma_l2=-sigma / 2.0,
                         sigma_v3=0.0, sigma_l3=0.0, sigma_free=sigma)
        pval = pval_quadratic_form(tv, tl, td, a_v, a_l, beta_v, beta_l, pen)
        parts = pval_split_parts(tv, tl, td, a_v, a_l, beta_v, beta_l, pen)
        scale = max(1.0, abs(pval))
        worst = max(worst, abs(pval - sum(parts)) / scale)
    return worst


def check_pval_decomposition(seed: int, samples: int = 2000) -> PropertyResult:
    worst = pval_decomposition_residuals(seed, samples)
    return PropertyResult("pval-decomposition", worst <= 1e-12, worst, 1e-12)


def check_gcl(seed: int, samples: int = 50) -> PropertyResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for order in SUPPORTED_ORDERS:
        n = 21
        op = build_sbp(order, n, 1.0 / (n - 1))
        for _ in range(samples):
            x_delta = float(rng.uniform(0.15, 0.85))
            w = float(rng.normal(scale=10.0))
            mesh = build_mesh(0.0, 1.0, x_delta, n, n, interface_velocity=w)
            rv, rl = gcl_residual(mesh, w, op, op)
            worst = max(worst, max(rv, rl) / max(1.0, abs(w)))
    return PropertyResult("gcl-residual", worst <= 1e-12, worst, 1e-12)


def check_steady_state(n_steps: int = 200) -> PropertyResult:
    """A uniform saturated state must be a fixed point of the stepper."""
    vapor = MaterialProps(rho=0.5, cp=2.0, k=0.05)
    liquid = MaterialProps(rho=1.0, cp=3.0, k=0.12)
    iph = derive_interface_constants(vapor, liquid, t_delta=1.0, h_lv=2.5)
    cfg = SolverConfig(n_v=33, n_l=33, sbp_order=4, dt=1e-3, t_end=0.0,
                       outer_bc_v=1.0, outer_bc_l=1.0, u_v=0.0)
    ctx = make_context(cfg, vapor, liquid, iph, 0.0, 1.0)
    state = SimState(t_v=np.full(33, 1.0), t_l=np.full(33, 1.0),
                     x_delta=0.4, time=0.0)
    for _ in range(n_steps):
        state = rk4_step(state, cfg.dt, ctx)
    drift = max(float(np.max(np.abs(state.t_v - 1.0))),
                float(np.max(np.abs(state.t_l - 1.0))),
                abs(state.x_delta - 0.4))
    return PropertyResult("steady-state-preservation", drift <= 1e-12, drift, 1e-12)


def check_regime_grid() -> PropertyResult:
    for a_v in (-1.0, 0.0, 1.0):
        for u_t in (-1.0, 0.0, 1.0):
            got = classify_strong_regime(a_v, u_t)
            want = Regime.DISSIPATIVE if (a_v < 0.0 and u_t >= 0.0) else Regime.BOUNDED
            if got is not want:
                return PropertyResult("regime-grid", False, math.inf, 0.0,
                                      f"({a_v}, {u_t}) -> {got}, want {want}")
    return PropertyResult("regime-grid", True, 0.0, 0.0)


def run_property_suite(seed: int = 0, *, corrupt_q: bool = False,
                       corrupt_penalties: bool = False) -> list[PropertyResult]:
    return [
        check_sbp_identity(corrupt_q=corrupt_q),
        check_operator_accuracy(),
        check_quadrature_moments(),
        check_penalty_invariants(seed),
        check_closed_form(seed + 100, corrupt_penalties=corrupt_penalties),
        check_pval_decomposition(seed + 200),
        check_gcl(seed + 300),
        check_steady_state(),
        check_regime_grid(),
    ]


@dataclass(frozen=True)
class ConvergenceLevel:
    n: int
    error: float
    x_delta_error: float
    max_gcl_residual: float
    order: float | None  # vs. the previous level


def mms_error(manifest, final_state) -> tuple[float, float]:
    """P-weighted global error and interface-position error at final time."""
    case = manifest.solver.mms
    iph = derive_interface_constants(manifest.vapor, manifest.liquid,
                                     manifest.t_delta, manifest.h_lv)
    n_v, n_l = manifest.solver.n_v, manifest.solver.n_l
    j_v = final_state.x_delta - manifest.x0
    j_l = manifest.xn - final_state.x_delta
    x_v = manifest.x0 + j_v * np.linspace(0.0, 1.0, n_v)
    x_l = final_state.x_delta + j_l * np.linspace(0.0, 1.0, n_l)
    e_v = final_state.t_v - mms_mod.exact_temperature(
        case, "vapor", final_state.time, x_v, manifest.vapor, manifest.liquid, iph)
    e_l = final_state.t_l - mms_mod.exact_temperature(
        case, "liquid", final_state.time, x_l, manifest.vapor, manifest.liquid, iph)
    op_v = build_sbp(manifest.solver.sbp_order, n_v, 1.0 / (n_v - 1))
    op_l = build_sbp(manifest.solver.sbp_order, n_l, 1.0 / (n_l - 1))
    err = math.sqrt(j_v * float(e_v @ (op_v.P * e_v))
                    + j_l * float(e_l @ (op_l.P * e_l)))
    x_err = abs(final_state.x_delta - case.x_delta(final_state.time))
    return err, x_err


def mms_convergence(manifest, levels) -> list[ConvergenceLevel]:
    """Run the manufactured case on each grid level and report orders."""
    from .config import build_initial_state, build_run_context
    from .solver import cfl_time_step, run_simulation

    case = manifest.solver.mms
    if case is None:
        raise ValueError("convergence study needs an [mms] section")
    if len(levels) < 2:
        raise ValueError("need at least two grid levels")

    jmin_v = case.x_center - abs(case.radius) - manifest.x0
    jmin_l = manifest.xn - case.x_center - abs(case.radius)
    u_ref = abs(case.radius * case.omega)

    rows: list[ConvergenceLevel] = []
    prev_err = None
    for n in levels:
        sol = dataclasses.replace(manifest.solver, n_v=int(n), n_l=int(n))
        dt = sol.dt if sol.dt > 0.0 else cfl_time_step(
            sol, manifest.vapor, manifest.liquid, jmin_v, jmin_l, u_ref)
        sol = dataclasses.replace(sol, dt=dt)
        m = dataclasses.replace(manifest, solver=sol)
        ctx = build_run_context(m)
        result = run_simulation(ctx, build_initial_state(m))
        if result.status != "completed":
            raise RuntimeError(f"level n={n} failed: {result.message}")
        err, x_err = mms_error(m, result.final_state)
        order = None
        if prev_err is not None:
            prev_n, prev_e = prev_err
            ratio = (int(n) - 1) / (prev_n - 1)
            if err > 0.0 and prev_e > 0.0:
                order = math.log(prev_e / err) / math.log(ratio)
        rows.append(ConvergenceLevel(n=int(n), error=err, x_delta_error=x_err,
                                     max_gcl_residual=result.max_gcl_residual,
                                     order=order))
        prev_err = (int(n), err)
    return rows
