"""Command-line front end: schedule construction, verification, DoF region
enumeration, rate sweeps, and the bundled reproduction runner.

All randomness flows from one global seed through SHA-256 of
"<seed>:<task label>" (see ``asymmetric.derive_seed``); identical
(config, seed) runs produce byte-identical artifacts.  Parameter problems
exit 2, construction failures 3, verification failures 4, with a
machine-readable JSON reason on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .asymmetric import derive_seed, dof_of_table, schedule_asymmetric
from .dof import RegionBudget, asymmetric_region, region_to_csv_rows, symmetric_region
from .errors import CcschedError, ParameterError, VerificationError
from .model import ScheduleTable, table_from_json, table_to_json
from .rates import snr_sweep, sweep_to_csv
from .symmetric import DEFAULT_DELTA_MAX, feasible_beta_set, schedule_symmetric
from .verifier import decodability_check, verify_table_numeric


def load_config(path: str | None) -> dict[str, str]:
    """Flat key = value document mirroring the CLI flags; # starts a comment."""
    if path is None:
        return {}
    config = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        config[key.replace("-", "_")] = value.strip("\"'")
    return config


def apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill defaults from the config file; explicit CLI flags win."""
    config = load_config(getattr(args, "config", None))
    for key, value in config.items():
        if not hasattr(args, key):
            raise ParameterError(f"unknown config key: {key}")
        if parser.get_default(key) == getattr(args, key):
            default = parser.get_default(key)
            caster = type(default) if default is not None else str
            setattr(args, key, caster(value))


def parse_snr_grid(spec: str) -> list[float]:
    """Either "start:step:stop" (inclusive) or a comma-separated list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ParameterError(f"bad SNR grid {spec!r}: expected start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ParameterError("SNR grid step must be positive")
        grid = []
        value = start
        while value <= stop + 1e-9:
            grid.append(round(value, 9))
            value += step
        return grid
    return [float(p) for p in spec.split(",")]


def write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def cmd_feasible_beta(args) -> int:
    betas = feasible_beta_set(args.L, args.G, args.t, args.omega, args.delta_max)
    print(" ".join(str(b) for b in betas))
    return 0


def build_table(args) -> ScheduleTable:
    if args.mode == "sym":
        return schedule_symmetric(args.L, args.G, args.t, args.omega, args.beta, args.delta_max)
    baseline = schedule_symmetric(
        args.L, args.G, args.t, args.omega, args.beta, args.delta_max, min_columns=2
    )
    table, _, _ = schedule_asymmetric(
        baseline, args.m, tau=args.tau, I_max=args.imax, seed=args.seed
    )
    return table


def cmd_schedule(args) -> int:
    if args.beta is None:
        betas = feasible_beta_set(args.L, args.G, args.t, args.omega, args.delta_max)
        if not betas:
            raise ParameterError("feasible stream-count set is empty at these parameters")
        args.beta = betas[-1]
    table = build_table(args)
    write_text(args.output, table_to_json(table))
    return 0


def cmd_verify(args) -> int:
    table = table_from_json(Path(args.table).read_text())
    table.validate()
    report = decodability_check(table)
    doc = {
        "symbolic": "PASS" if report.ok else "FAIL",
        "witnesses": [
            {
                "column": w.column,
                "condition": w.condition,
                "subject": list(w.subject),
                "lhs": w.lhs,
                "bound": w.bound,
            }
            for w in report.witnesses
        ],
        "min_slack": report.min_slack,
    }
    ok = report.ok
    if args.numeric:
        if not ok:
            doc["numeric"] = {"skipped": "symbolic check failed"}
        else:
            numeric = verify_table_numeric(
                table, trials=args.trials, seed=args.seed, tol=args.tol
            )
            doc["numeric"] = {
                "trials": args.trials,
                "combiner_policy": "haar",
                "max_leakage": numeric.max_leakage,
                "min_sigma": numeric.min_sigma,
                "ok": numeric.ok,
            }
            ok = ok and numeric.ok
    print(json.dumps(doc, indent=2))
    if not ok:
        raise VerificationError("table failed verification")
    return 0


def cmd_dof_region(args) -> int:
    budget = RegionBudget(seed=args.seed, delta_max=args.delta_max)
    region = asymmetric_region(args.L, args.G, args.t, args.omega, budget)
    out = Path(args.output) if args.output not in (None, "-") else None
    witness_dir = Path(args.witness_dir) if args.witness_dir else (
        out.parent / f"{out.stem}_witnesses" if out else None
    )

    def witness_name(dof: int) -> str:
        name = f"witness_omega{args.omega}_t{args.t}_dof{dof}.json"
        if witness_dir is not None:
            witness_dir.mkdir(parents=True, exist_ok=True)
            (witness_dir / name).write_text(table_to_json(region.witnesses[dof].table))
            return str((witness_dir / name).relative_to(out.parent) if out else witness_dir / name)
        return name

    rows = ["scheme,omega,t,beta,m,dof,witness_file"]
    rows.extend(region_to_csv_rows(region, witness_name))
    write_text(args.output, "\n".join(rows) + "\n")
    return 0


def cmd_rate_sweep(args) -> int:
    table = table_from_json(Path(args.table).read_text())
    table.validate()
    points = snr_sweep(table, parse_snr_grid(args.snr), trials=args.trials, seed=args.seed)
    dof = dof_of_table(table)
    if not isinstance(dof, int):
        raise VerificationError(f"non-uniform per-column stream totals: {dof}")
    theta = math.comb(len(table.users), table.t) * table.delta * table.delta_tilde
    write_text(args.output, sweep_to_csv(points, dof, theta))
    return 0


def _reproduce_example(name: str, L, G, t, omega, beta, m, expects, outdir, seed) -> list[str]:
    lines = []
    baseline = schedule_symmetric(L, G, t, omega, beta, min_columns=2)
    table, plan, _ = schedule_asymmetric(baseline, m, seed=derive_seed(seed, name))
    report = decodability_check(table)
    checks = {
        "plan (d, r, delta_tilde, S_tilde)": (plan.d, plan.r, plan.delta_tilde, plan.S_tilde)
        == expects["plan"],
        f"dof = {expects['dof']}": dof_of_table(table) == expects["dof"],
        "columns": (len(table.columns), len(table.columns[0].groups))
        == expects["shape"],
        "symbolic check": report.ok,
    }
    if outdir is not None:
        (outdir / f"{name}.json").write_text(table_to_json(table))
    for label, ok in checks.items():
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name}: {label}")
    return lines


def cmd_reproduce(args) -> int:
    outdir = Path(args.output) if args.output else None
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
    cases = ("example1", "example2", "feasible-sets", "fig3") if args.case == "all" else (args.case,)
    lines: list[str] = []
    for case in cases:
        if case == "example1":
            lines += _reproduce_example(
                "example1", 10, 3, 1, 5, 2, 2,
                {"plan": (5, 2, 7, 10), "dof": 14, "shape": (10, 7)}, outdir, args.seed,
            )
        elif case == "example2":
            lines += _reproduce_example(
                "example2", 11, 6, 2, 5, 3, 3,
                {"plan": (5, 3, 8, 10), "dof": 24, "shape": (10, 8)}, outdir, args.seed,
            )
        elif case == "feasible-sets":
            for (L, G, t, omega), want in (
                ((11, 8, 2, 4), [3, 6]),
                ((10, 3, 1, 3), [2]),
                ((10, 3, 1, 5), [2]),
                ((10, 3, 1, 10), [1]),
            ):
                got = feasible_beta_set(L, G, t, omega)
                ok = got == want
                lines.append(
                    f"{'PASS' if ok else 'FAIL'}  feasible-set L={L} G={G} t={t} omega={omega}: {got}"
                )
        elif case == "fig3":
            targets = {
                (4, 1): ([4, 8, 12, 16], list(range(4, 21, 2))),
                (6, 2): ([6, 12, 18], list(range(6, 31, 3))),
                (8, 3): ([8, 16], list(range(8, 41, 4))),
            }
            for (omega, t), (sym_want, asym_want) in targets.items():
                sym = symmetric_region(11, 8, t, omega)
                region = asymmetric_region(11, 8, t, omega, RegionBudget(seed=args.seed))
                ok_sym = sym == sym_want
                ok_asym = list(region.asymmetric_dofs) == asym_want
                lines.append(f"{'PASS' if ok_sym else 'FAIL'}  region sym omega={omega} t={t}: {sym}")
                lines.append(
                    f"{'PASS' if ok_asym else 'FAIL'}  region asym omega={omega} t={t}: "
                    f"{list(region.asymmetric_dofs)}"
                )
                if outdir is not None:
                    for dof, witness in sorted(region.witnesses.items()):
                        path = outdir / f"fig3_omega{omega}_t{t}_dof{dof}.json"
                        path.write_text(table_to_json(witness.table))
        else:
            raise ParameterError(f"unknown reproduce case: {case}")
    summary = "\n".join(lines) + "\n"
    overall = "PASS" if all(line.startswith("PASS") for line in lines) else "FAIL"
    summary += f"{overall}  overall\n"
    sys.stdout.write(summary)
    if outdir is not None:
        (outdir / "summary.txt").write_text(summary)
    if overall != "PASS":
        raise VerificationError("reproduction summary contains failures")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccsched",
        description="multicast schedule construction and verification for "
        "cache-aided multi-antenna downlinks",
    )
    parser.add_argument("--version", action="version", version=f"ccsched {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *names):
        p.add_argument("--config", help="key = value file mirroring the flags")
        if "params" in names:
            p.add_argument("--L", type=int, required=True, help="transmit antennas")
            p.add_argument("--G", type=int, required=True, help="receive antennas per user")
            p.add_argument("--t", type=int, required=True, help="coded-caching gain")
            p.add_argument("--omega", type=int, required=True, help="served user count")
            p.add_argument("--delta-max", type=int, default=DEFAULT_DELTA_MAX)
        if "seed" in names:
            p.add_argument("--seed", type=int, default=0, help="global seed")

    p = sub.add_parser("feasible-beta", help="symmetric per-user stream counts")
    add_common(p, "params")
    p.set_defaults(func=cmd_feasible_beta)

    p = sub.add_parser("schedule", help="construct a schedule table")
    add_common(p, "params", "seed")
    p.add_argument("--mode", choices=["sym", "asym"], default="asym")
    p.add_argument("--beta", type=int, default=None, help="per-user streams (default: largest feasible)")
    p.add_argument("--m", type=int, default=0, help="groups added per retained column")
    p.add_argument("--tau", type=int, default=None, help="pairwise overlap threshold")
    p.add_argument("--imax", type=int, default=None, help="greedy iteration cap")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("verify", help="check a table symbolically and numerically")
    p.add_argument("--config", help="key = value file mirroring the flags")
    p.add_argument("--table", required=True)
    p.add_argument("--numeric", action="store_true")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dof-region", help="achievable DoF values with witnesses")
    add_common(p, "params", "seed")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--witness-dir", default=None)
    p.set_defaults(func=cmd_dof_region)

    p = sub.add_parser("rate-sweep", help="symmetric rate over an SNR grid")
    p.add_argument("--config", help="key = value file mirroring the flags")
    p.add_argument("--table", required=True)
    p.add_argument("--snr", default="0:5:35", help="start:step:stop in dB, or a list")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_rate_sweep)

    p = sub.add_parser("reproduce", help="re-run the bundled reference checks")
    p.add_argument("--config", help="key = value file mirroring the flags")
    p.add_argument(
        "--case",
        choices=["example1", "example2", "feasible-sets", "fig3", "all"],
        default="all",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None, help="artifact directory")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        apply_config(args, parser)
        return args.func(args)
    except CcschedError as exc:
        error = {"error": {"type": type(exc).__name__, "reason": str(exc)}}
        print(json.dumps(error), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(json.dumps({"error": {"type": "OSError", "reason": str(exc)}}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
