"""Diagonal-norm summation-by-parts (SBP) first-derivative operators.

An SBP operator is the triple ``(P, Q, D)`` with ``D = P^{-1} Q``, a
diagonal positive-definite norm ``P`` and a nearly skew-symmetric ``Q``
satisfying

    Q + Q^T = B = diag(-1, 0, ..., 0, 1),

which makes discrete integration by parts exact:

    u^T P (D v) + (D u)^T P v = u_N v_N - u_0 v_0.

``P`` doubles as a quadrature rule, so energy estimates derived for the
continuous problem carry over verbatim to the semi-discrete one.

Interior orders 2, 4 and 6 are provided with their classical
minimal-width boundary closures (boundary accuracy 1, 2 and 3).  The
coefficient tables are stored as exact rationals and the defining
algebraic properties are re-verified in exact arithmetic the first time
each order is built; the shipped tables are therefore self-validating.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigError, GeometryError, ShapeError

F = Fraction

# Interior central stencils at unit spacing, offsets -w .. +w.
_INTERIOR = {
    2: (F(-1, 2), F(0), F(1, 2)),
    4: (F(1, 12), F(-2, 3), F(0), F(2, 3), F(-1, 12)),
    6: (F(-1, 60), F(3, 20), F(-3, 4), F(0), F(3, 4), F(-3, 20), F(1, 60)),
}

# Boundary weights of the diagonal norm at unit spacing.
_NORM_CLOSURE = {
    2: (F(1, 2),),
    4: (F(17, 48), F(59, 48), F(43, 48), F(49, 48)),
    6: (F(13649, 43200), F(12013, 8640), F(2711, 4320),
        F(5359, 4320), F(7877, 8640), F(43801, 43200)),
}

# Boundary closure rows of D at unit spacing (left block; the right block
# is the 180-degree rotation with flipped sign).
_D_CLOSURE = {
    2: (
        (F(-1), F(1)),
    ),
    4: (
        (F(-24, 17), F(59, 34), F(-4, 17), F(-3, 34)),
        (F(-1, 2), F(0), F(1, 2)),
        (F(4, 43), F(-59, 86), F(0), F(59, 86), F(-4, 43)),
        (F(3, 98), F(0), F(-59, 98), F(0), F(32, 49), F(-4, 49)),
    ),
    6: (
        (F(-21600, 13649), F(104009, 54596), F(30443, 81894),
         F(-33311, 27298), F(16863, 27298), F(-15025, 163788)),
        (F(-104009, 240260), F(0), F(-311, 72078),
         F(20229, 24026), F(-24337, 48052), F(36661, 360390)),
        (F(-30443, 162660), F(311, 32532), F(0),
         F(-11155, 16266), F(41287, 32532), F(-21999, 54220)),
        (F(33311, 107180), F(-20229, 21436), F(485, 1398), F(0),
         F(4147, 21436), F(25427, 321540), F(72, 5359)),
        (F(-16863, 78770), F(24337, 31508), F(-41287, 47262),
         F(-4147, 15754), F(0), F(342523, 472620), F(-1296, 7877),
         F(144, 7877)),
        (F(15025, 525612), F(-36661, 262806), F(21999, 87602),
         F(-25427, 262806), F(-342523, 525612), F(0), F(32400, 43801),
         F(-6480, 43801), F(720, 43801)),
    ),
}

# Minimum node counts (two non-overlapping boundary blocks).
MIN_POINTS = {2: 4, 4: 8, 6: 12}

SUPPORTED_ORDERS = (2, 4, 6)

_TABLES_VERIFIED: set[int] = set()


@dataclass(frozen=True)
class SbpOperator:
    """An assembled diagonal-norm SBP operator on a uniform grid.

    Attributes:
        interior_order: accuracy of the interior stencil (2, 4 or 6).
        n_points: number of grid nodes.
        spacing: grid step of the reference coordinate.
        P: diagonal norm / quadrature weights, length ``n_points``,
            spacing included.
        Q: the nearly skew-symmetric part, ``Q + Q^T = B``.
        D: the derivative matrix, row i of ``Q`` divided by ``P[i]``.
    """

    interior_order: int
    n_points: int
    spacing: float
    P: np.ndarray
    Q: np.ndarray
    D: np.ndarray

    @property
    def first(self) -> int:
        """Index selected by E_0."""
        return 0

    @property
    def last(self) -> int:
        """Index selected by E_N."""
        return self.n_points - 1

    @property
    def closure_width(self) -> int:
        """Number of boundary closure rows at each end."""
        return len(_D_CLOSURE[self.interior_order])


def _verify_tables(order: int) -> None:
    """Check the rational coefficient tables in exact arithmetic.

    Verifies, once per order, that Q + Q^T = B holds exactly and that the
    closure rows differentiate polynomials up to half the interior order
    (the interior stencil up to the full order).  The published tables,
    not this code, would be at fault if this ever tripped; the check runs
    on integers so there is no tolerance to tune.
    """
    if order in _TABLES_VERIFIED:
        return
    rows = _D_CLOSURE[order]
    norm = _NORM_CLOSURE[order]
    interior = _INTERIOR[order]
    w = len(rows)
    width = max(len(r) for r in rows)
    n = max(2 * w + len(interior), w + width)

    q = [[F(0)] * n for _ in range(n)]
    half = len(interior) // 2
    for i in range(w, n - w):
        for k, c in enumerate(interior):
            q[i][i - half + k] = c
    for i, row in enumerate(rows):
        for j, d in enumerate(row):
            q[i][j] = norm[i] * d
            q[n - 1 - i][n - 1 - j] = -norm[i] * d

    for i in range(n):
        for j in range(n):
            b = F(0)
            if i == j == 0:
                b = F(-1)
            elif i == j == n - 1:
                b = F(1)
            if q[i][j] + q[j][i] != b:
                raise AssertionError(
                    f"order-{order} SBP table violates Q + Q^T = B at ({i}, {j})")

    # Accuracy conditions on integer nodes 0..n-1.
    for i in range(n):
        p_i = norm[i] if i < w else (norm[n - 1 - i] if i >= n - w else F(1))
        drow = [q[i][j] / p_i for j in range(n)]
        exact_to = order if w <= i < n - w else order // 2
        for k in range(exact_to + 1):
            lhs = sum(drow[j] * F(j) ** k for j in range(n))
            rhs = k * F(i) ** (k - 1) if k > 0 else F(0)
            if lhs != rhs:
                raise AssertionError(
                    f"order-{order} SBP table misses degree-{k} exactness in row {i}")
    _TABLES_VERIFIED.add(order)


def build_sbp(interior_order: int, n_points: int, spacing: float) -> SbpOperator:
    """Assemble the diagonal-norm SBP operator of the given interior order.

    Args:
        interior_order: 2, 4 or 6.
        n_points: number of nodes; at least ``MIN_POINTS[interior_order]``.
        spacing: positive grid step.

    Raises:
        ConfigError: unsupported order, too few points, or bad spacing.
    """
    if interior_order not in SUPPORTED_ORDERS:
        raise ConfigError(
            f"unsupported SBP interior order {interior_order}; "
            f"supported orders are {SUPPORTED_ORDERS}")
    n_min = MIN_POINTS[interior_order]
    if n_points < n_min:
        raise ConfigError(
            f"order-{interior_order} operator needs at least {n_min} points, "
            f"got {n_points}")
    if not spacing > 0.0:
        raise ConfigError(f"grid spacing must be positive, got {spacing}")

    _verify_tables(interior_order)

    rows = _D_CLOSURE[interior_order]
    norm = _NORM_CLOSURE[interior_order]
    interior = _INTERIOR[interior_order]
    w = len(rows)
    half = len(interior) // 2

    p = np.ones(n_points)
    p[:w] = [float(x) for x in norm]
    p[n_points - w:] = [float(x) for x in reversed(norm)]
    p *= spacing

    q = np.zeros((n_points, n_points))
    stencil = np.array([float(c) for c in interior])
    for i in range(w, n_points - w):
        q[i, i - half:i + half + 1] = stencil
    for i, row in enumerate(rows):
        for j, d in enumerate(row):
            val = float(norm[i] * d)
            q[i, j] = val
            q[n_points - 1 - i, n_points - 1 - j] = -val

    d_mat = q / p[:, None]

    for arr in (p, q, d_mat):
        arr.flags.writeable = False
    return SbpOperator(interior_order, n_points, float(spacing), p, q, d_mat)


def apply_derivative(op: SbpOperator, field: np.ndarray) -> np.ndarray:
    """Return ``D @ field``."""
    field = np.asarray(field, dtype=float)
    if field.shape != (op.n_points,):
        raise ShapeError(
            f"field has shape {field.shape}, operator expects ({op.n_points},)")
    return op.D @ field


def quadrature(op: SbpOperator, u: np.ndarray, v: np.ndarray,
               weight) -> float:
    """Discrete weighted inner product ``sum_i u_i P_i w_i v_i``.

    ``weight`` may be a scalar or a vector of length ``n_points``; every
    entry must be positive (it plays the role of a Jacobian).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (op.n_points,) or v.shape != (op.n_points,):
        raise ShapeError(
            f"quadrature arguments have shapes {u.shape}, {v.shape}; "
            f"operator expects ({op.n_points},)")
    w = np.asarray(weight, dtype=float)
    if w.ndim not in (0, 1) or (w.ndim == 1 and w.shape != (op.n_points,)):
        raise ShapeError(f"weight has shape {w.shape}")
    if np.any(w <= 0.0):
        raise GeometryError("quadrature weight must be positive (invalid Jacobian)")
    return float(np.sum(u * op.P * w * v))


def sbp_property_residual(op: SbpOperator) -> float:
    """Max-norm residual of the defining identity Q + Q^T = B."""
    b = np.zeros((op.n_points, op.n_points))
    b[0, 0] = -1.0
    b[-1, -1] = 1.0
    return float(np.max(np.abs(op.Q + op.Q.T - b)))
