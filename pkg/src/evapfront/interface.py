"""Interface quantities and energy-stable penalty selection.

The two phases meet at the last vapor node and the first liquid node.
The interface speed is set by the jump in heat flux,

    u_tilde = (flux_l - flux_v) / (rho_v * h_lv),
    flux    = k * J^{ -1} * (D T)  at the interface node,

the transformed wave speeds obey a_v = u_v - u_tilde at the interface
with a_l = gamma * a_v, and the weak coupling adds three penalty terms
per phase to the semi-discrete right-hand side:

    P^{-1} ( sigma1 * E (T - T^delta)
           + sigma2 * E (T - T^other)
           + sigma3 * D^T E (T - T^delta) ),

where E selects the interface node and the comparison vectors equal T
except at that node.  The penalty coefficients below make the interface
contribution to the energy rate a sum of data terms and non-positive
squares: sigma3 cancels the raw flux terms against the gradient group,
sigma2 = -sigma/2 turns the cross terms into -sigma (T_v - T_l)^2, and
exactly one of the advective penalties is active depending on the sign
of a_v at the interface.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .sbp import SbpOperator


class Regime(enum.Enum):
    """Energy classification of the strong interface treatment."""

    DISSIPATIVE = "dissipative"
    BOUNDED = "bounded"


@dataclass(frozen=True)
class InterfaceState:
    """Scalar interface quantities for one right-hand-side evaluation."""

    flux_v: float
    flux_l: float
    u_tilde: float
    a_v_delta: float
    a_l_delta: float
    u_l_delta: float


@dataclass(frozen=True)
class PenaltySet:
    """The six interface penalty coefficients plus the free parameter."""

    sigma_v1: float
    sigma_l1: float
    sigma_v2: float
    sigma_l2: float
    sigma_v3: float
    sigma_l3: float
    sigma_free: float


def boundary_flux(T: np.ndarray, op: SbpOperator, k: float, j_inv: float,
                  side: str) -> float:
    """k * j_inv * (D T) evaluated at the first or last node."""
    if side not in ("first", "last"):
        raise ConfigError(f"side must be 'first' or 'last', got {side!r}")
    T = np.asarray(T, dtype=float)
    if T.shape != (op.n_points,):
        raise ShapeError(
            f"field has shape {T.shape}, operator expects ({op.n_points},)")
    row = op.D[0] if side == "first" else op.D[-1]
    return float(k * j_inv * (row @ T))


def mesh_velocity(flux_v: float, flux_l: float, rho_v: float,
                  h_lv: float) -> float:
    """Interface speed from the heat-flux jump: (flux_l - flux_v)/(rho_v h_lv)."""
    denom = rho_v * h_lv
    if denom == 0.0:
        raise ConfigError("rho_v * h_lv must be nonzero")
    return (flux_l - flux_v) / denom

def wave_speeds(u_v_delta: float, u_tilde: float, gamma: float):
    """Transformed wave speeds and liquid velocity at the interface.

    Returns (a_v_delta, a_l_delta, u_l_delta) with
    a_v = u_v - u_tilde, a_l = gamma * a_v and
    u_l = gamma * u_v + (1 - gamma) * u_tilde, so that
    a_l = u_l - u_tilde holds as a consequence.
    """
    a_v = u_v_delta - u_tilde
    a_l = gamma * a_v
    u_l = gamma * u_v_delta + (1.0 - gamma) * u_tilde
    return a_v, a_l, u_l


def select_penalties(a_v_delta: float, beta_v: float, beta_l: float,
                     gamma: float, k_v: float, k_l: float,
                     j_v: float, j_l: float,
                     sigma_free: float) -> PenaltySet:
    """Energy-stable penalty coefficients for the current interface state.

    The advective penalty goes on the phase the interface moves into:
    for a_v < 0 only sigma_v1 = beta_v * a_v is active, for a_v > 0 only
    sigma_l1 = -beta_l * gamma * a_v, and for a_v = 0 both vanish.  The
    remaining coefficients do not depend on the sign:
    sigma_v2 = sigma_l2 = -sigma_free / 2, sigma_v3 = -k_v / j_v,
    sigma_l3 = +k_l / j_l.
    """
    if not (j_v > 0.0 and j_l > 0.0):
        raise ConfigError(f"Jacobians must be positive, got {j_v}, {j_l}")
    if sigma_free < 0.0:
        raise ConfigError(f"sigma_free must be nonnegative, got {sigma_free}")
    if a_v_delta < 0.0:
        sigma_v1 = beta_v * a_v_delta
        sigma_l1 = 0.0
    elif a_v_delta > 0.0:
        sigma_v1 = 0.0
        sigma_l1 = -beta_l * gamma * a_v_delta
    else:
        sigma_v1 = 0.0
        sigma_l1 = 0.0
    return PenaltySet(
        sigma_v1=sigma_v1,
        sigma_l1=sigma_l1,
        sigma_v2=-0.5 * sigma_free,
        sigma_l2=-0.5 * sigma_free,
        sigma_v3=-k_v / j_v,
        sigma_l3=k_l / j_l,
        sigma_free=sigma_free,
    )


def sat_contribution(T_v: np.ndarray, T_l: np.ndarray, t_delta: float,
                     pen: PenaltySet, op_v: SbpOperator, op_l: SbpOperator):
    """Interface penalty right-hand-side vectors for both phases.

    Only the interface node and the rows reached by the transposed
    derivative's boundary column are nonzero.
    """
    T_v = np.asarray(T_v, dtype=float)
    T_l = np.asarray(T_l, dtype=float)
    if T_v.shape != (op_v.n_points,) or T_l.shape != (op_l.n_points,):
        raise ShapeError("temperature/operator size mismatch")

    d_v = T_v[-1] - t_delta        # vapor interface value vs. t_delta
    d_vl = T_v[-1] - T_l[0]        # vapor vs. liquid interface value
    d_l = T_l[0] - t_delta
    d_lv = T_l[0] - T_v[-1]

    rhs_v = pen.sigma_v3 * d_v * op_v.D[-1]
    rhs_v[-1] += pen.sigma_v1 * d_v + pen.sigma_v2 * d_vl
    rhs_v /= op_v.P

    rhs_l = pen.sigma_l3 * d_l * op_l.D[0]
    rhs_l[0] += pen.sigma_l1 * d_l + pen.sigma_l2 * d_lv
    rhs_l /= op_l.P
    return rhs_v, rhs_l


def classify_strong_regime(a_v_delta: float, u_tilde: float) -> Regime:
    """Dissipative iff a_v < 0 (strictly) and u_tilde >= 0, else bounded."""
    if a_v_delta < 0.0 and u_tilde >= 0.0:
        return Regime.DISSIPATIVE
    return Regime.BOUNDED
