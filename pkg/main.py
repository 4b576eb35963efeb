"""Command-line front end: solve, verify, oracle, sweep and fibering runs driven by a JSON config."""
import argparse
import csv
import json
import logging
import math
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import joblib
import numpy as np
import pydantic
import scipy

from config import RunConfig, config_hash, load_config
from errors import ConfigError, KirchhoffError
from functionals import FiberingScan, fibering_scan
from radial_grid import RadialFunction
from solver import axis_sweep, lambda_sweep, oracle_ground_state, solve_ground_state
from verification import run_verification

logger = logging.getLogger("kirchhoff")

VERSION = "1.0.0"
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3


def _clean(value: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_json(path: Path, payload: Dict[str, Any], chash: str) -> None:
    body = dict(_clean(payload))
    body["config_hash"] = chash
    path.write_text(json.dumps(body, sort_keys=True, indent=2) + "\n")
    logger.info("wrote %s", path)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]], chash: str) -> None:
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# config_hash={chash}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows([_cell(v) for v in row] for row in rows)
    logger.info("wrote %s", path)


def write_metadata(out: Path, command: str, chash: str, started: datetime) -> None:
    meta = {
        "command": command,
        "config_hash": chash,
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "version": VERSION,
        "packages": {
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pydantic": pydantic.VERSION,
            "joblib": joblib.__version__,
        },
    }
    (out / "metadata.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def _profile_rows(u: RadialFunction) -> List[Sequence[float]]:
    return list(zip(u.grid.nodes.tolist(), u.values.tolist()))


def cmd_solve(cfg: RunConfig, out: Path, workers: int, chash: str) -> int:
    grid = cfg.grid.build()
    res = solve_ground_state(cfg.problem, grid, cfg.solver)
    write_json(out / "result.json", res.summary(), chash)
    write_csv(out / "profile.csv", ("r", "u"), _profile_rows(res.u_hat), chash)
    write_csv(
        out / "trace.csv",
        ("iteration", "energy", "step", "grad_norm"),
        ((row.iteration, row.energy, row.step, row.grad_norm) for row in res.trace),
        chash,
    )
    return EXIT_OK if res.converged else EXIT_SOLVER


def cmd_verify(cfg: RunConfig, out: Path, workers: int, chash: str) -> int:
    grid = cfg.grid.build()
    report = run_verification(cfg.problem, grid, cfg.verify, seed=cfg.solver.seed, workers=workers)
    payload = report.model_dump(mode="json")
    payload["failed"] = report.failed
    payload["passed"] = report.passed
    write_json(out / "verify.json", payload, chash)
    for key in report.failed:
        verdict = report.verdicts[key]
        logger.error("check %s failed: margin=%s at %s", key, verdict.margin, verdict.location)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_oracle(cfg: RunConfig, out: Path, workers: int, chash: str) -> int:
    grid = cfg.grid.build()
    lam = cfg.oracle.lam
    oracle = oracle_ground_state(cfg.problem, grid, lam)
    direct = solve_ground_state(cfg.problem.limit(), grid, cfg.solver, lam=lam)
    gap = abs(direct.m - oracle.m) / abs(oracle.m)
    payload = {
        "lambda": lam,
        "m_direct": direct.m,
        "m_oracle": oracle.m,
        "relative_gap": gap,
        "within_tolerance": gap <= cfg.oracle.tolerance,
        "direct_status": direct.status,
        "oracle": {
            "t": oracle.t,
            "shooting_value": oracle.shooting_value,
            "pohozaev_residual": oracle.pohozaev_residual,
            "ode_residual": oracle.ode_residual,
        },
    }
    write_json(out / "oracle.json", payload, chash)
    write_csv(
        out / "profile.csv",
        ("r", "u_direct", "u_oracle"),
        zip(grid.nodes.tolist(), direct.u_hat.values.tolist(), oracle.u.values.tolist()),
        chash,
    )
    logger.info("oracle gap %.3e (m_direct=%.12g, m_oracle=%.12g)", gap, direct.m, oracle.m)
    return EXIT_OK if direct.converged else EXIT_SOLVER


def cmd_sweep(cfg: RunConfig, out: Path, workers: int, chash: str) -> int:
    grid = cfg.grid.build()
    spec = cfg.sweep
    if spec.kind == "lambda":
        sweep = lambda_sweep(cfg.problem, grid, spec.lambdas, cfg.solver)
        write_csv(out / "sweep.csv", sweep.COLUMNS, sweep.rows(), chash)
        write_json(
            out / "sweep.json",
            {"strict_gap_from": sweep.strict_gap_from, "lambdas": sweep.lambdas, "m_inf": sweep.m_inf_values},
            chash,
        )
        solved = [m for m in sweep.m_inf_values if m is not None]
    else:
        rows = axis_sweep(cfg.problem, grid, spec.axis, spec.values, cfg.solver, workers)
        columns = ("axis", "value", "m", "pohozaev_residual", "ode_residual", "status")
        write_csv(out / "sweep.csv", columns, ([row[c] for c in columns] for row in rows), chash)
        solved = [row["m"] for row in rows if row["m"] is not None]
    return EXIT_OK if solved else EXIT_SOLVER


def cmd_fibering(cfg: RunConfig, out: Path, workers: int, chash: str) -> int:
    grid = cfg.grid.build()
    spec = cfg.fibering
    if spec.function == "ground_state":
        u = solve_ground_state(cfg.problem, grid, cfg.solver).u_hat
    else:
        u = RadialFunction.from_callable(
            grid, lambda r: spec.amplitude * np.exp(-((np.asarray(r) / spec.width) ** 2)), exact=True
        )
    ts = np.geomspace(spec.t_lo, spec.t_hi, spec.count)
    scan: FiberingScan = fibering_scan(u, cfg.problem, ts, spec.lam, spec.limit)
    write_csv(out / "fibering.csv", FiberingScan.COLUMNS, scan.table().tolist(), chash)
    logger.info("dzeta changes sign %d times", len(scan.sign_changes()))
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "sweep": cmd_sweep,
    "fibering": cmd_fibering,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kirchhoff",
        description="Ground states of -(a + b||grad u||^2) Lap u + V(x) u = f(u) in R^3",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="Path to the JSON run configuration")
        cmd.add_argument("--out", default=None, help="Output directory (overrides output_dir)")
        cmd.add_argument("--workers", type=int, default=1, help="Parallel workers for sweeps and scans")
        cmd.add_argument("--seed", type=int, default=None, help="Overrides solver.seed")
        cmd.add_argument("--verbose", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    started = datetime.now(timezone.utc)
    try:
        cfg = load_config(args.config)
        updates = {}
        if args.out is not None:
            updates["output_dir"] = args.out
        if args.seed is not None:
            updates["solver"] = cfg.solver.model_copy(update={"seed": args.seed})
        cfg = cfg.model_copy(update=updates)
        if args.workers < 1:
            raise ConfigError(f"--workers must be at least 1, got {args.workers}.")
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        chash = config_hash(cfg.model_copy(update={"output_dir": ""}))
        code = COMMANDS[args.command](cfg, out, args.workers, chash)
    except KirchhoffError as exc:
        logger.error("%s: %s", type(exc).__name__, exc.detail)
        return exc.exit_code
    except ValueError as exc:
        logger.error("invalid input: %s", exc)
        return EXIT_CONFIG
    write_metadata(out, args.command, chash, started)
    return code


if __name__ == "__main__":
    sys.exit(main())
