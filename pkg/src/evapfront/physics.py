"""Material and interface parameters, derived constants, sign checks.

Each phase carries density rho, specific heat cp and a (scaled) heat
conduction coefficient k, with the composite beta = rho * cp appearing
in front of every time derivative.  The interface adds the evaporation
temperature t_delta, the latent heat h_lv, the density ratio
gamma = rho_v / rho_l, and the two grouped constants

    c0 = (beta_l * gamma - beta_v) * t_delta^2 = rho_v (cp_l - cp_v) t_delta^2,
    c1 = 2 * t_delta * rho_v * h_lv,

whose signs the dissipativity classification of the strong interface
treatment relies on.  c0 > 0 requires cp_l > cp_v and is only warned
about when violated: the scheme stays energy bounded either way, it just
loses the strictly dissipative classification.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from . import similarity
from .errors import ConfigError


@dataclass(frozen=True)
class MaterialProps:
    """Per-phase material constants (SI units throughout)."""

    rho: float
    cp: float
    k: float

    def __post_init__(self):
        if not self.rho > 0.0:
            raise ConfigError(f"density must be positive, got {self.rho}")
        if not self.cp > 0.0:
            raise ConfigError(f"specific heat must be positive, got {self.cp}")
        if self.k < 0.0:
            raise ConfigError(f"conduction coefficient must be nonnegative, got {self.k}")
        if self.k == 0.0:
            warnings.warn("zero conduction coefficient: diffusion and flux "
                          "coupling are disabled (diagnostic configurations only)",
                          stacklevel=2)

    @property
    def beta(self) -> float:
        return self.rho * self.cp


@dataclass(frozen=True)
class InterfacePhysics:
    """Interface constants derived from the two material property sets."""

    t_delta: float
    h_lv: float
    gamma: float
    c0: float
    c1: float


def derive_interface_constants(vapor: MaterialProps, liquid: MaterialProps,
                               t_delta: float, h_lv: float) -> InterfacePhysics:
    """Populate gamma, c0, c1 from the phase properties.

    Raises:
        ConfigError: h_lv <= 0 or t_delta < 0.

    Warns (does not reject) when t_delta == 0 (c1 degenerates to zero,
    legitimate for homogeneous-data stability studies), when
    gamma >= 1 (vapor denser than liquid), and when cp_l <= cp_v
    (c0 <= 0, which breaks the strictly-dissipative sign argument but
    not boundedness).
    """
    if not h_lv > 0.0:
        raise ConfigError(f"latent heat must be positive, got {h_lv}")
    if t_delta < 0.0:
        raise ConfigError(
            f"evaporation temperature must be nonnegative, got {t_delta}")
    if t_delta == 0.0:
        warnings.warn("t_delta = 0: c1 = 0, interface data terms vanish",
                      stacklevel=2)
    gamma = vapor.rho / liquid.rho
    if gamma >= 1.0:
        warnings.warn(f"gamma = rho_v/rho_l = {gamma:.3g} >= 1: vapor is not "
                      "lighter than liquid", stacklevel=2)
    if liquid.cp <= vapor.cp:
        warnings.warn("cp_l <= cp_v makes c0 <= 0: the strong interface "
                      "treatment is energy bounded but not dissipative",
                      stacklevel=2)
    c0 = (liquid.beta * gamma - vapor.beta) * t_delta ** 2
    c1 = 2.0 * t_delta * vapor.rho * h_lv
    return InterfacePhysics(t_delta=t_delta, h_lv=h_lv, gamma=gamma, c0=c0, c1=c1)


# Saturated water / steam at 1 atm (373.15 K).  Sources: NIST webbook and
# the property appendix of Incropera & DeWitt; rounded to the usual
# engineering precision.
_STEAM = {"rho": 0.596, "cp": 2080.0, "k": 0.0248}
_WATER = {"rho": 957.9, "cp": 4217.0, "k": 0.680}
_T_SAT = 373.15
_H_LV = 2.257e6

# Preset geometry: a 1 mm slab with the front starting at 0.35 mm.
_X0 = 0.0
_XN = 1.0e-3
_XD0 = 3.5e-4

# Wall superheat for the Stefan preset.  Large (film-boiling-like) on
# purpose: it raises the Stefan number to ~0.37 so the front crosses a
# quarter of the slab within an explicit-RK4 desk-scale budget.  The
# front-speed oracle is independent of this choice.
_STEFAN_WALL = _T_SAT + 400.0

# Liquid superheat for the Sucking preset.
_SUCKING_SUPERHEAT = 5.0

PRESET_NAMES = ("stefan", "sucking")


def preset(name: str) -> dict:
    """Return a complete configuration document for a named model problem.

    The result has the same nested layout as the TOML configuration file
    and passes full validation unchanged.

    stefan: superheated vapor against the hot wall, liquid at saturation.
        The initial vapor profile is the similarity solution consistent
        with the initial front position, so the run tracks the classical
        sqrt(t) front law from its first step.
    sucking: vapor at saturation, superheated liquid feeding the front
        through a linear initial temperature ramp.
    """
    if name == "stefan":
        ste = similarity.stefan_number(_STEAM["cp"], _STEFAN_WALL - _T_SAT, _H_LV)
        lam = similarity.stefan_lambda(ste)
        alpha_v = _STEAM["k"] / (_STEAM["rho"] * _STEAM["cp"])
        t0 = similarity.front_time(_XD0, lam, alpha_v)
        # Run until the front has advanced 25% beyond its initial position.
        t_end = ((1.25 ** 2) - 1.0) * t0
        return {
            "preset": "stefan",
            "materials": {"vapor": dict(_STEAM), "liquid": dict(_WATER)},
            "interface": {"t_delta": _T_SAT, "h_lv": _H_LV},
            "domain": {"x0": _X0, "xn": _XN, "x_delta0": _XD0},
            "initial": {
                "vapor": {"kind": "stefan_similarity", "wall": _STEFAN_WALL},
                "liquid": {"kind": "uniform", "value": _T_SAT},
            },
            "solver": {
                "n_v": 65, "n_l": 65, "sbp_order": 4,
                "dt": 0.0, "t_end": t_end,
                "u_v": 0.0, "sigma_free": 1.0, "audit_every": 10,
                "outer_bc_v": _STEFAN_WALL, "outer_bc_l": _T_SAT,
            },
            "output": {"snapshots": True, "ledger": True, "summary": True,
                       "snapshot_every": 10},
        }
    if name == "sucking":
        return {
            "preset": "sucking",
            "materials": {"vapor": dict(_STEAM), "liquid": dict(_WATER)},
            "interface": {"t_delta": _T_SAT, "h_lv": _H_LV},
            "domain": {"x0": _X0, "xn": _XN, "x_delta0": _XD0},
            "initial": {
                "vapor": {"kind": "uniform", "value": _T_SAT},
                "liquid": {"kind": "linear", "left": _T_SAT,
                           "right": _T_SAT + _SUCKING_SUPERHEAT},
            },
            "solver": {
                "n_v": 65, "n_l": 65, "sbp_order": 4,
                "dt": 0.0, "t_end": 5.0e-3,
                "u_v": 0.0, "sigma_free": 1.0, "audit_every": 10,
                "outer_bc_v": _T_SAT, "outer_bc_l": _T_SAT + _SUCKING_SUPERHEAT,
            },
            "output": {"snapshots": True, "ledger": True, "summary": True,
                       "snapshot_every": 10},
        }
    raise ConfigError(f"unknown preset {name!r}; available: {PRESET_NAMES}")
