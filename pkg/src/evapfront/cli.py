"""Command-line interface: run, verify, converge, audit.

run       advance a configured simulation, writing snapshots.csv,
          ledger.csv and summary.json into the output directory.
verify    execute the property suite (operator identities, penalty
          invariants, closed-form equivalence, GCL, steady state,
          regime classifier) and report pass/fail per property.
converge  grid-refinement study against a manufactured solution.
audit     recompute the energy ledger from an existing snapshots.csv.

Numbers are written as the shortest decimal that round-trips binary64,
so outputs are byte-identical across repeated runs on one platform.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .config import RunManifest, build_initial_state, build_run_context, parse_config
from .energy import audit_step
from .errors import ConfigError
from .physics import preset
from .solver import RunResult, SimState, assemble_rhs, run_simulation
from .verify import mms_convergence, run_property_suite

LEDGER_COLUMNS = ("time", "energy", "dissipation", "it_direct", "sat_direct",
                  "itsat_closed", "bt_outer", "rate_measured",
                  "identity_residual", "gcl_residual")


def _fmt(x) -> str:
    return repr(float(x))


def _snapshot_header(n_v: int, n_l: int) -> str:
    cols = ["time", "x_delta", "u_tilde", "a_v_delta"]
    cols += [f"T_v_{i:03d}" for i in range(n_v)]
    cols += [f"T_l_{i:03d}" for i in range(n_l)]
    return ",".join(cols)


def write_snapshots_csv(path: Path, ctx, result: RunResult) -> None:
    lines = [_snapshot_header(ctx.cfg.n_v, ctx.cfg.n_l)]
    for state in result.snapshots:
        rhs = assemble_rhs(state, ctx)
        row = [_fmt(state.time), _fmt(state.x_delta),
               _fmt(rhs.interface.u_tilde), _fmt(rhs.interface.a_v_delta)]
        row += [_fmt(v) for v in state.t_v]
        row += [_fmt(v) for v in state.t_l]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_ledger_csv(path: Path, ledgers) -> None:
    lines = [",".join(LEDGER_COLUMNS)]
    for led in ledgers:
        lines.append(",".join(_fmt(getattr(led, col)) for col in LEDGER_COLUMNS))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary_json(path: Path, manifest: RunManifest, result: RunResult) -> None:
    payload = {
        "status": result.status,
        "message": result.message,
        "failed_step": result.failed_step,
        "preset": manifest.preset,
        "dt": result.dt,
        "n_steps": result.n_steps,
        "final": {
            "time": result.final_state.time,
            "x_delta": result.final_state.x_delta,
        },
        "temperature_min": result.t_min,
        "temperature_max": result.t_max,
        "max_gcl_residual": result.max_gcl_residual,
        "max_identity_residual": result.max_identity_residual,
        "max_itsat_residual": result.max_itsat_residual,
        "regimes": list(result.regimes),
        "audit_violations": result.audit_violations,
        "snapshots": len(result.snapshots),
        "audits": len(result.ledgers),
        "seed": manifest.output.seed,
        "wall_time_s": result.wall_time,
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def cmd_run(manifest: RunManifest) -> int:
    out_dir = Path(manifest.output.dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx = build_run_context(manifest)
    initial = build_initial_state(manifest)
    result = run_simulation(ctx, initial)

    if manifest.output.snapshots:
        write_snapshots_csv(out_dir / "snapshots.csv", ctx, result)
    if manifest.output.ledger:
        write_ledger_csv(out_dir / "ledger.csv", result.ledgers)
    if manifest.output.summary or result.status != "completed":
        # The summary doubles as the failure marker; always write it on failure.
        write_summary_json(out_dir / "summary.json", manifest, result)

    if result.status != "completed":
        print(f"run failed ({result.status}) at step {result.failed_step}: "
              f"{result.message}", file=sys.stderr)
        return 1
    print(f"completed {result.n_steps} steps (dt={result.dt:.6g}); "
          f"x_delta {initial.x_delta:.6g} -> {result.final_state.x_delta:.6g}; "
          f"max identity residual {result.max_identity_residual:.3e}; "
          f"audit violations {result.audit_violations}")
    return 0 if result.audit_violations == 0 else 1


def cmd_verify(manifest: RunManifest | None, seed: int = 0, *,
               corrupt_q: bool = False, corrupt_penalties: bool = False) -> int:
    if manifest is not None:
        seed = manifest.output.seed
    results = run_property_suite(seed, corrupt_q=corrupt_q,
                                 corrupt_penalties=corrupt_penalties)
    failures = 0
    for res in results:
        tag = "PASS" if res.passed else "FAIL"
        extra = f" [{res.detail}]" if res.detail else ""
        print(f"{tag}  {res.name}: max residual {res.residual:.3e} "
              f"(tolerance {res.tolerance:.1e}){extra}")
        failures += 0 if res.passed else 1
    if failures:
        print(f"{failures} properties failed", file=sys.stderr)
        return 1
    print(f"all {len(results)} properties passed")
    return 0


def cmd_converge(manifest: RunManifest, levels) -> int:
    if manifest.solver.mms is None:
        raise ConfigError("converge needs an [mms] section in the configuration")
    if len(levels) < 2:
        raise ConfigError("converge needs at least two grid levels")
    rows = mms_convergence(manifest, levels)
    print(f"{'n':>6} {'error':>14} {'x_delta_err':>14} {'order':>7}")
    for row in rows:
        order = f"{row.order:7.3f}" if row.order is not None else "      -"
        print(f"{row.n:6d} {row.error:14.6e} {row.x_delta_error:14.6e} {order}")
    return 0


def cmd_audit(manifest: RunManifest) -> int:
    out_dir = Path(manifest.output.dir)
    snap_path = out_dir / "snapshots.csv"
    if not snap_path.exists():
        raise ConfigError(f"no snapshots found at {snap_path}")
    ctx = build_run_context(manifest)
    n_v, n_l = ctx.cfg.n_v, ctx.cfg.n_l

    lines = snap_path.read_text(encoding="utf-8").strip().split("\n")
    header = lines[0].split(",")
    expected = _snapshot_header(n_v, n_l).split(",")
    if header != expected:
        raise ConfigError(
            f"snapshot header does not match the configured grid "
            f"({len(header)} columns, expected {len(expected)})")

    ledgers = []
    violations = 0
    for line in lines[1:]:
        vals = [float(tok) for tok in line.split(",")]
        state = SimState(
            t_v=np.array(vals[4:4 + n_v]),
            t_l=np.array(vals[4 + n_v:4 + n_v + n_l]),
            x_delta=vals[1], time=vals[0])
        ledger = audit_step(state, assemble_rhs(state, ctx), ctx)
        ledgers.append(ledger)
        violations += len(ledger.violations)
    write_ledger_csv(out_dir / "ledger_audit.csv", ledgers)
    worst = max((led.identity_residual for led in ledgers), default=0.0)
    print(f"re-audited {len(ledgers)} snapshots; max identity residual "
          f"{worst:.3e}; violations {violations}")
    return 0 if violations == 0 else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evapfront",
        description="Energy-stable two-phase evaporation front solver")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (("run", "advance a configured simulation"),
                       ("verify", "run the stability/accuracy property suite"),
                       ("converge", "manufactured-solution refinement study"),
                       ("audit", "recompute the energy ledger from snapshots")):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", metavar="PATH",
                       required=name in ("run", "converge", "audit"),
                       help="TOML configuration file")
        p.add_argument("--out", metavar="DIR", default=None,
                       help="output directory (overrides [output].dir)")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for randomized verification suites")
        p.add_argument("--audit-every", type=int, default=None, metavar="N",
                       help="energy-audit cadence override")
        p.add_argument("--lenient", action="store_true",
                       help="downgrade unknown configuration keys to warnings")
        if name == "converge":
            p.add_argument("--levels", type=int, nargs="+",
                           default=[33, 65, 129], metavar="N",
                           help="grid levels (node counts per phase)")
    return parser


def _load_manifest(args) -> RunManifest | None:
    if args.config is None:
        return None
    text = Path(args.config).read_text(encoding="utf-8")
    manifest = parse_config(text, strict=not args.lenient,
                            config_path=args.config)
    output = manifest.output
    if args.out is not None:
        output = dataclasses.replace(output, dir=args.out)
    if args.seed is not None:
        output = dataclasses.replace(output, seed=args.seed)
    solver = manifest.solver
    if args.audit_every is not None:
        solver = dataclasses.replace(solver, audit_every=args.audit_every)
    return dataclasses.replace(manifest, output=output, solver=solver)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        manifest = _load_manifest(args)
        if args.command == "run":
            return cmd_run(manifest)
        if args.command == "verify":
            return cmd_verify(manifest, seed=args.seed or 0)
        if args.command == "converge":
            return cmd_converge(manifest, args.levels)
        if args.command == "audit":
            return cmd_audit(manifest)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
