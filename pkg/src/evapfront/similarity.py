"""Classical one-phase Stefan similarity solution.

A superheated phase occupies ``[0, x_front(t)]`` with a fixed wall
temperature on the left and the saturation temperature at the moving
front; the far phase sits uniformly at saturation so the entire latent
heat is supplied by one-sided conduction.  The front then follows

    x_front(t) = 2 * lam * sqrt(alpha * t),

where ``lam`` solves the latent-heat balance

    lam * exp(lam^2) * erf(lam) = Ste / sqrt(pi),

with the Stefan number ``Ste = cp * (T_wall - T_sat) / h_lv``.  This is
used as an independent oracle for the moving-interface solver; nothing
here touches the discrete operators.
"""

from __future__ import annotations

import math

import numpy as np


def stefan_number(cp: float, superheat: float, h_lv: float) -> float:
    """Ste = cp * superheat / h_lv."""
    return cp * superheat / h_lv


def stefan_lambda(ste: float, *, lo: float = 1e-12, hi: float = 8.0,
                  iterations: int = 200) -> float:
    """Solve lam * exp(lam^2) * erf(lam) = Ste / sqrt(pi) by bisection.

    The left side is strictly increasing from 0, so the root is unique
    for any positive Stefan number.
    """
    if ste <= 0.0:
        raise ValueError(f"Stefan number must be positive, got {ste}")
    target = ste / math.sqrt(math.pi)

    def f(lam: float) -> float:
        return lam * math.exp(lam * lam) * math.erf(lam) - target

    if f(hi) < 0.0:
        raise ValueError(f"Stefan number {ste} out of bracketing range")
    a, b = lo, hi
    for _ in range(iterations):
        mid = 0.5 * (a + b)
        if f(mid) <= 0.0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def front_position(t: float, lam: float, alpha: float) -> float:
    """x_front(t) = 2 lam sqrt(alpha t)."""
    return 2.0 * lam * math.sqrt(alpha * t)


def front_time(x: float, lam: float, alpha: float) -> float:
    """Inverse of front_position: the time at which the front reaches x."""
    return (x / (2.0 * lam)) ** 2 / alpha


def temperature_profile(x, t: float, lam: float, alpha: float,
                        t_wall: float, t_sat: float) -> np.ndarray:
    """Similarity temperature in the superheated phase at time t.

    Valid on 0 <= x <= x_front(t); equals t_wall at x = 0 and t_sat at
    the front.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    denom = 2.0 * math.sqrt(alpha * t)
    scale = math.erf(lam)
    vals = np.array([math.erf(xi / denom) for xi in x])
    return t_wall - (t_wall - t_sat) * vals / scale
