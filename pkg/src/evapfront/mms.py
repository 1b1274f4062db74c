"""Manufactured solutions for convergence verification.

Both phases get a sine profile anchored to the moving interface,

    T*(x, t) = t_delta + s(t) * sin(kappa * (x - X(t))),

with the interface trajectory X(t) = x_center + radius * sin(omega t).
The profile equals t_delta at the interface for all time, so the exact
solution satisfies the interface conditions and the penalty terms are
consistent.

Two variants:

prescribed: the interface trajectory is imposed (the solver's interface
    speed is overridden by Xdot), decoupling the spatial convergence
    measurement from the interface ODE.  Both amplitudes are constant.

free: the interface speed stays on its flux-jump law; the liquid
    amplitude s_l(t) is chosen so the exact fields reproduce exactly the
    flux jump rho_v h_lv Xdot(t), making X(t) the exact interface path.
    This exercises the full coupling end to end.

The volume forcing is the residual of the physical advection-diffusion
equation under T*, evaluated at the current physical node positions:

    f = beta * (T*_t + u T*_x) - k T*_xx,

which enters the transformed equation scaled by the Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .physics import InterfacePhysics, MaterialProps

VARIANTS = ("prescribed", "free")


@dataclass(frozen=True)
class MmsCase:
    """Descriptor for one manufactured-solution setup."""

    variant: str
    x_center: float
    radius: float
    omega: float
    amp_v: float
    amp_l: float
    kappa_v: float
    kappa_l: float

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown mms variant {self.variant!r}")

    def x_delta(self, t: float) -> float:
        return self.x_center + self.radius * math.sin(self.omega * t)

    def x_delta_dot(self, t: float) -> float:
        return self.radius * self.omega * math.cos(self.omega * t)

    def x_delta_ddot(self, t: float) -> float:
        return -self.radius * self.omega ** 2 * math.sin(self.omega * t)


def _amplitude(case: MmsCase, phase: str, t: float,
               vapor: MaterialProps, liquid: MaterialProps,
               iphys: InterfacePhysics):
    """(s(t), sdot(t)) for the requested phase."""
    if phase == "vapor":
        return case.amp_v, 0.0
    if case.variant == "prescribed":
        return case.amp_l, 0.0
    # Free interface: match the flux jump to rho_v h_lv Xdot exactly.
    # k_l s_l kappa_l - k_v s_v kappa_v = rho_v h_lv Xdot(t).
    denom = liquid.k * case.kappa_l
    s = (vapor.rho * iphys.h_lv * case.x_delta_dot(t)
         + vapor.k * case.amp_v * case.kappa_v) / denom
    sdot = vapor.rho * iphys.h_lv * case.x_delta_ddot(t) / denom
    return s, sdot


def _kappa(case: MmsCase, phase: str) -> float:
    return case.kappa_v if phase == "vapor" else case.kappa_l


def exact_temperature(case: MmsCase, phase: str, t: float, x,
                      vapor: MaterialProps, liquid: MaterialProps,
                      iphys: InterfacePhysics) -> np.ndarray:
    """T*(x, t) on the given physical positions."""
    x = np.asarray(x, dtype=float)
    s, _ = _amplitude(case, phase, t, vapor, liquid, iphys)
    kappa = _kappa(case, phase)
    return iphys.t_delta + s * np.sin(kappa * (x - case.x_delta(t)))


def exact_interface_velocity(case: MmsCase, t: float) -> float:
    return case.x_delta_dot(t)


def liquid_velocity(case: MmsCase, t: float, u_v: float,
                    iphys: InterfacePhysics) -> float:
    """Exact uniform liquid velocity implied by the mass-flow relation."""
    return iphys.gamma * u_v + (1.0 - iphys.gamma) * case.x_delta_dot(t)


def mms_source(case: MmsCase, phase: str, t: float, x,
               mat: MaterialProps, u_phase: float,
               vapor: MaterialProps, liquid: MaterialProps,
               iphys: InterfacePhysics) -> np.ndarray:
    """Residual forcing f = beta (T*_t + u T*_x) - k T*_xx at nodes ``x``.

    ``u_phase`` must be the velocity the exact solution sees (for the
    liquid, the one implied by the exact interface speed).
    """
    x = np.asarray(x, dtype=float)
    s, sdot = _amplitude(case, phase, t, vapor, liquid, iphys)
    kappa = _kappa(case, phase)
    w = kappa * (x - case.x_delta(t))
    sin_w = np.sin(w)
    cos_w = np.cos(w)
    xdot = case.x_delta_dot(t)
    t_t = sdot * sin_w - s * kappa * xdot * cos_w
    t_x = s * kappa * cos_w
    t_xx = -s * kappa ** 2 * sin_w
    return mat.beta * (t_t + u_phase * t_x) - mat.k * t_xx


def boundary_value(case: MmsCase, phase: str, t: float, x_boundary: float,
                   vapor: MaterialProps, liquid: MaterialProps,
                   iphys: InterfacePhysics) -> float:
    """Time-dependent Dirichlet data T*(x_boundary, t)."""
    return float(exact_temperature(case, phase, t, np.array([x_boundary]),
                                   vapor, liquid, iphys)[0])
