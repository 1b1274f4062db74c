"""Configuration documents: parsing, validation, serialization, assembly.

Runs are described by a TOML document with nested sections
([materials.vapor], [materials.liquid], [interface], [domain],
[initial.vapor], [initial.liquid], [solver], optional [mms], [output]).
A top-level ``preset = "stefan" | "sucking"`` pulls in a complete
document that individual keys may then override.  Parsing is strict by
default: unknown keys are errors, so a typo in a physical parameter
cannot silently fall back to a default.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python < 3.11
    import tomli as _toml

import warnings

from . import physics, similarity
from .errors import ConfigError
from .mms import MmsCase
from .physics import MaterialProps, derive_interface_constants
from .solver import RunContext, SimState, SolverConfig, make_context
from . import mms as mms_mod


@dataclass(frozen=True)
class InitialSpec:
    """Initial temperature profile of one phase (pure data)."""

    kind: str
    value: float | None = None   # uniform
    left: float | None = None    # linear, at the phase's left end
    right: float | None = None   # linear, at the phase's right end
    wall: float | None = None    # stefan_similarity


@dataclass(frozen=True)
class OutputSpec:
    snapshots: bool = True
    ledger: bool = True
    summary: bool = True
    snapshot_every: int = 10
    dir: str = "out"
    seed: int = 0


@dataclass(frozen=True)
class RunManifest:
    """Fully resolved and validated description of one run."""

    preset: str | None
    vapor: MaterialProps
    liquid: MaterialProps
    t_delta: float
    h_lv: float
    x0: float
    xn: float
    x_delta0: float
    initial_vapor: InitialSpec
    initial_liquid: InitialSpec
    solver: SolverConfig
    output: OutputSpec
    config_path: str | None = field(default=None, compare=False)


_SOLVER_DEFAULTS = {
    "n_v": 65, "n_l": 65, "sbp_order": 4, "dt": 0.0, "t_end": 0.0,
    "u_v": 0.0, "sigma_free": 1.0, "audit_every": 10,
    "outer_bc_v": 0.0, "outer_bc_l": 0.0,
}

_OUTPUT_DEFAULTS = {"snapshots": True, "ledger": True, "summary": True,
                    "snapshot_every": 10, "dir": "out", "seed": 0}

_MMS_DEFAULTS = {
    "variant": "prescribed", "x_center": 0.5, "radius": 0.08, "omega": math.pi,
    "amp_v": 0.6, "amp_l": 0.8, "kappa_v": 4.0, "kappa_l": 3.0,
}

# Allowed keys: section path -> set of keys ('.' joins nested tables).
_SCHEMA = {
    "": {"preset"},
    "materials.vapor": {"rho", "cp", "k"},
    "materials.liquid": {"rho", "cp", "k"},
    "interface": {"t_delta", "h_lv"},
    "domain": {"x0", "xn", "x_delta0"},
    "initial.vapor": {"kind", "value", "left", "right", "wall"},
    "initial.liquid": {"kind", "value", "left", "right", "wall"},
    "solver": set(_SOLVER_DEFAULTS),
    "mms": set(_MMS_DEFAULTS),
    "output": set(_OUTPUT_DEFAULTS),
}

_INITIAL_KINDS = ("uniform", "linear", "stefan_similarity")


def _check_keys(doc: dict, strict: bool):
    def walk(table: dict, path: str):
        section = _SCHEMA.get(path)
        for key, value in table.items():
            child = f"{path}.{key}" if path else key
            if isinstance(value, dict):
                if child not in _SCHEMA and not any(
                        s.startswith(child + ".") for s in _SCHEMA):
                    _unknown(child, strict)
                else:
                    walk(value, child)
            else:
                if section is None or key not in section:
                    _unknown(child, strict)
    walk(doc, "")


def _unknown(path: str, strict: bool):
    if strict:
        raise ConfigError(f"unknown configuration key: {path}")
    warnings.warn(f"ignoring unknown configuration key: {path}", stacklevel=3)


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def _number(table: dict, section: str, key: str, *, default=None) -> float:
    if key not in table:
        if default is None:
            raise ConfigError(f"missing required key {section}.{key}")
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    return float(value)


def _integer(table: dict, section: str, key: str, *, default=None) -> int:
    if key not in table:
        if default is None:
            raise ConfigError(f"missing required key {section}.{key}")
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
    return value


def _material(doc: dict, phase: str) -> MaterialProps:
    section = f"materials.{phase}"
    table = doc.get("materials", {}).get(phase)
    if not isinstance(table, dict):
        raise ConfigError(f"missing required section [{section}]")
    rho = _number(table, section, "rho")
    cp = _number(table, section, "cp")
    k = _number(table, section, "k")
    try:
        return MaterialProps(rho=rho, cp=cp, k=k)
    except ConfigError as exc:
        raise ConfigError(f"{section}: {exc}") from exc


def _initial(doc: dict, phase: str) -> InitialSpec:
    section = f"initial.{phase}"
    table = doc.get("initial", {}).get(phase)
    if not isinstance(table, dict):
        raise ConfigError(f"missing required section [{section}]")
    kind = table.get("kind")
    if kind not in _INITIAL_KINDS:
        raise ConfigError(
            f"{section}.kind must be one of {_INITIAL_KINDS}, got {kind!r}")
    if kind == "uniform":
        return InitialSpec(kind=kind, value=_number(table, section, "value"))
    if kind == "linear":
        return InitialSpec(kind=kind, left=_number(table, section, "left"),
                           right=_number(table, section, "right"))
    if phase != "vapor":
        raise ConfigError(f"{section}: stefan_similarity applies to the vapor phase")
    return InitialSpec(kind=kind, wall=_number(table, section, "wall"))


def document_to_manifest(doc: dict, *, config_path: str | None = None) -> RunManifest:
    """Build a manifest from a fully merged configuration document."""
    vapor = _material(doc, "vapor")
    liquid = _material(doc, "liquid")

    iface = doc.get("interface")
    if not isinstance(iface, dict):
        raise ConfigError("missing required section [interface]")
    t_delta = _number(iface, "interface", "t_delta")
    h_lv = _number(iface, "interface", "h_lv")

    dom = doc.get("domain")
    if not isinstance(dom, dict):
        raise ConfigError("missing required section [domain]")
    x0 = _number(dom, "domain", "x0")
    xn = _number(dom, "domain", "xn")
    x_delta0 = _number(dom, "domain", "x_delta0")

    sol = doc.get("solver", {})
    mms_case = None
    if "mms" in doc:
        m = doc["mms"]
        mms_case = MmsCase(
            variant=m.get("variant", _MMS_DEFAULTS["variant"]),
            x_center=_number(m, "mms", "x_center", default=_MMS_DEFAULTS["x_center"]),
            radius=_number(m, "mms", "radius", default=_MMS_DEFAULTS["radius"]),
            omega=_number(m, "mms", "omega", default=_MMS_DEFAULTS["omega"]),
            amp_v=_number(m, "mms", "amp_v", default=_MMS_DEFAULTS["amp_v"]),
            amp_l=_number(m, "mms", "amp_l", default=_MMS_DEFAULTS["amp_l"]),
            kappa_v=_number(m, "mms", "kappa_v", default=_MMS_DEFAULTS["kappa_v"]),
            kappa_l=_number(m, "mms", "kappa_l", default=_MMS_DEFAULTS["kappa_l"]),
        )
        x_delta0 = mms_case.x_center
    try:
        solver = SolverConfig(
            n_v=_integer(sol, "solver", "n_v", default=_SOLVER_DEFAULTS["n_v"]),
            n_l=_integer(sol, "solver", "n_l", default=_SOLVER_DEFAULTS["n_l"]),
            sbp_order=_integer(sol, "solver", "sbp_order",
                               default=_SOLVER_DEFAULTS["sbp_order"]),
            dt=_number(sol, "solver", "dt", default=_SOLVER_DEFAULTS["dt"]),
            t_end=_number(sol, "solver", "t_end", default=_SOLVER_DEFAULTS["t_end"]),
            outer_bc_v=_number(sol, "solver", "outer_bc_v",
                               default=_SOLVER_DEFAULTS["outer_bc_v"]),
            outer_bc_l=_number(sol, "solver", "outer_bc_l",
                               default=_SOLVER_DEFAULTS["outer_bc_l"]),
            u_v=_number(sol, "solver", "u_v", default=_SOLVER_DEFAULTS["u_v"]),
            sigma_free=_number(sol, "solver", "sigma_free",
                               default=_SOLVER_DEFAULTS["sigma_free"]),
            audit_every=_integer(sol, "solver", "audit_every",
                                 default=_SOLVER_DEFAULTS["audit_every"]),
            snapshot_every=_integer(doc.get("output", {}), "output",
                                    "snapshot_every",
                                    default=_OUTPUT_DEFAULTS["snapshot_every"]),
            mms=mms_case,
        )
    except ConfigError as exc:
        raise ConfigError(f"solver: {exc}") from exc

    out = doc.get("output", {})
    output = OutputSpec(
        snapshots=bool(out.get("snapshots", _OUTPUT_DEFAULTS["snapshots"])),
        ledger=bool(out.get("ledger", _OUTPUT_DEFAULTS["ledger"])),
        summary=bool(out.get("summary", _OUTPUT_DEFAULTS["summary"])),
        snapshot_every=_integer(out, "output", "snapshot_every",
                                default=_OUTPUT_DEFAULTS["snapshot_every"]),
        dir=str(out.get("dir", _OUTPUT_DEFAULTS["dir"])),
        seed=_integer(out, "output", "seed", default=_OUTPUT_DEFAULTS["seed"]),
    )

    if "initial" in doc or mms_case is None:
        initial_vapor = _initial(doc, "vapor")
        initial_liquid = _initial(doc, "liquid")
    else:
        # MMS runs take their initial data from the exact solution.
        initial_vapor = InitialSpec(kind="uniform", value=t_delta)
        initial_liquid = InitialSpec(kind="uniform", value=t_delta)

    return RunManifest(
        preset=doc.get("preset"), vapor=vapor, liquid=liquid,
        t_delta=t_delta, h_lv=h_lv, x0=x0, xn=xn, x_delta0=x_delta0,
        initial_vapor=initial_vapor, initial_liquid=initial_liquid,
        solver=solver, output=output, config_path=config_path,
    )


def validate_manifest(manifest: RunManifest) -> None:
    """Cross-field checks; raises ConfigError naming the offending field."""
    if not (manifest.x0 < manifest.x_delta0 < manifest.xn):
        raise ConfigError(
            f"domain: requires x0 < x_delta0 < xn, got "
            f"{manifest.x0}, {manifest.x_delta0}, {manifest.xn}")
    if manifest.h_lv <= 0.0:
        raise ConfigError(f"interface.h_lv must be positive, got {manifest.h_lv}")
    if manifest.t_delta < 0.0:
        raise ConfigError(
            f"interface.t_delta must be nonnegative, got {manifest.t_delta}")
    case = manifest.solver.mms
    if case is not None:
        lo = case.x_center - abs(case.radius)
        hi = case.x_center + abs(case.radius)
        if not (manifest.x0 < lo and hi < manifest.xn):
            raise ConfigError(
                "mms: interface trajectory leaves the domain interior")
    if manifest.initial_vapor.kind == "stefan_similarity":
        if manifest.initial_vapor.wall <= manifest.t_delta:
            raise ConfigError(
                "initial.vapor.wall must exceed interface.t_delta for the "
                "similarity profile")
    # Exercise the derived-constant validation (warnings allowed).
    derive_interface_constants(manifest.vapor, manifest.liquid,
                               manifest.t_delta, manifest.h_lv)


def parse_config(text: str, *, strict: bool = True,
                 config_path: str | None = None) -> RunManifest:
    """Parse, merge with any preset, validate, and return the manifest."""
    try:
        doc = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"configuration parse error: {exc}") from exc
    _check_keys(doc, strict)
    if "preset" in doc:
        name = doc["preset"]
        if not isinstance(name, str):
            raise ConfigError(f"preset must be a string, got {name!r}")
        doc = _deep_merge(physics.preset(name), doc)
    manifest = document_to_manifest(doc, config_path=config_path)
    validate_manifest(manifest)
    return manifest


def manifest_to_document(manifest: RunManifest) -> dict:
    """The nested-dict form of a manifest (inverse of document_to_manifest)."""
    doc: dict = {}
    if manifest.preset is not None:
        doc["preset"] = manifest.preset
    doc["materials"] = {
        "vapor": {"rho": manifest.vapor.rho, "cp": manifest.vapor.cp,
                  "k": manifest.vapor.k},
        "liquid": {"rho": manifest.liquid.rho, "cp": manifest.liquid.cp,
                   "k": manifest.liquid.k},
    }
    doc["interface"] = {"t_delta": manifest.t_delta, "h_lv": manifest.h_lv}
    doc["domain"] = {"x0": manifest.x0, "xn": manifest.xn,
                     "x_delta0": manifest.x_delta0}
    doc["initial"] = {"vapor": _initial_table(manifest.initial_vapor),
                      "liquid": _initial_table(manifest.initial_liquid)}
    sol = manifest.solver
    doc["solver"] = {
        "n_v": sol.n_v, "n_l": sol.n_l, "sbp_order": sol.sbp_order,
        "dt": sol.dt, "t_end": sol.t_end, "u_v": sol.u_v,
        "sigma_free": sol.sigma_free, "audit_every": sol.audit_every,
        "outer_bc_v": sol.outer_bc_v, "outer_bc_l": sol.outer_bc_l,
    }
    if sol.mms is not None:
        case = sol.mms
        doc["mms"] = {
            "variant": case.variant, "x_center": case.x_center,
            "radius": case.radius, "omega": case.omega,
            "amp_v": case.amp_v, "amp_l": case.amp_l,
            "kappa_v": case.kappa_v, "kappa_l": case.kappa_l,
        }
    out = manifest.output
    doc["output"] = {"snapshots": out.snapshots, "ledger": out.ledger,
                     "summary": out.summary,
                     "snapshot_every": out.snapshot_every,
                     "dir": out.dir, "seed": out.seed}
    return doc


def _initial_table(spec: InitialSpec) -> dict:
    table = {"kind": spec.kind}
    for key in ("value", "left", "right", "wall"):
        v = getattr(spec, key)
        if v is not None:
            table[key] = v
    return table


def _toml_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return repr(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ConfigError(f"cannot serialize non-finite float {value}")
        text = repr(value)
        return text if any(c in text for c in ".eE") else text + ".0"
    if isinstance(value, str):
        return json.dumps(value)
    raise ConfigError(f"cannot serialize value of type {type(value).__name__}")


def serialize_document(doc: dict) -> str:
    """Deterministic TOML text for a configuration document."""
    lines: list[str] = []

    def emit(table: dict, path: str):
        scalars = [(k, v) for k, v in table.items() if not isinstance(v, dict)]
        subtables = [(k, v) for k, v in table.items() if isinstance(v, dict)]
        if path and (scalars or not subtables):
            lines.append(f"[{path}]")
        for key, value in scalars:
            lines.append(f"{key} = {_toml_scalar(value)}")
        if scalars:
            lines.append("")
        for key, sub in subtables:
            emit(sub, f"{path}.{key}" if path else key)

    emit(doc, "")
    return "\n".join(lines).rstrip() + "\n"


def serialize_manifest(manifest: RunManifest) -> str:
    return serialize_document(manifest_to_document(manifest))


def build_initial_state(manifest: RunManifest) -> SimState:
    """Construct the t=0 state from the manifest's initial profiles."""
    n_v, n_l = manifest.solver.n_v, manifest.solver.n_l
    j_v = manifest.x_delta0 - manifest.x0
    j_l = manifest.xn - manifest.x_delta0
    x_v = manifest.x0 + j_v * np.linspace(0.0, 1.0, n_v)
    x_l = manifest.x_delta0 + j_l * np.linspace(0.0, 1.0, n_l)

    case = manifest.solver.mms
    if case is not None:
        iph = derive_interface_constants(manifest.vapor, manifest.liquid,
                                         manifest.t_delta, manifest.h_lv)
        t_v = mms_mod.exact_temperature(case, "vapor", 0.0, x_v,
                                        manifest.vapor, manifest.liquid, iph)
        t_l = mms_mod.exact_temperature(case, "liquid", 0.0, x_l,
                                        manifest.vapor, manifest.liquid, iph)
        return SimState(t_v=t_v, t_l=t_l, x_delta=case.x_delta(0.0), time=0.0)

    t_v = _profile(manifest.initial_vapor, x_v, manifest)
    t_l = _profile(manifest.initial_liquid, x_l, manifest)
    return SimState(t_v=t_v, t_l=t_l, x_delta=manifest.x_delta0, time=0.0)


def _profile(spec: InitialSpec, x: np.ndarray, manifest: RunManifest) -> np.ndarray:
    if spec.kind == "uniform":
        return np.full(x.shape, spec.value, dtype=float)
    if spec.kind == "linear":
        frac = (x - x[0]) / (x[-1] - x[0])
        return spec.left + (spec.right - spec.left) * frac
    # stefan_similarity (vapor): the profile consistent with the front
    # already standing at x_delta0.
    mat = manifest.vapor
    alpha = mat.k / mat.beta
    ste = similarity.stefan_number(mat.cp, spec.wall - manifest.t_delta,
                                   manifest.h_lv)
    lam = similarity.stefan_lambda(ste)
    t0 = similarity.front_time(manifest.x_delta0 - manifest.x0, lam, alpha)
    return similarity.temperature_profile(x - manifest.x0, t0, lam, alpha,
                                          spec.wall, manifest.t_delta)


def build_run_context(manifest: RunManifest) -> RunContext:
    """Assemble the immutable run context (operators, physics, BCs)."""
    iph = derive_interface_constants(manifest.vapor, manifest.liquid,
                                     manifest.t_delta, manifest.h_lv)
    case = manifest.solver.mms
    bc_v = bc_l = None
    if case is not None:
        vapor, liquid = manifest.vapor, manifest.liquid
        x0, xn = manifest.x0, manifest.xn

        def bc_v(t: float, _c=case, _v=vapor, _l=liquid, _i=iph, _x=x0) -> float:
            return mms_mod.boundary_value(_c, "vapor", t, _x, _v, _l, _i)

        def bc_l(t: float, _c=case, _v=vapor, _l=liquid, _i=iph, _x=xn) -> float:
            return mms_mod.boundary_value(_c, "liquid", t, _x, _v, _l, _i)

    return make_context(manifest.solver, manifest.vapor, manifest.liquid,
                        iph, manifest.x0, manifest.xn, bc_v=bc_v, bc_l=bc_l)
