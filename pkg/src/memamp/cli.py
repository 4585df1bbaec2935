"""Command-line front end: gain tables, simulations, sweeps, oracle checks, MC.

Exit codes are a stable contract: 0 success, 1 usage/config error, 2 protocol
failure, 3 resource/grid guard. Data files are deterministic for identical
inputs (the manifest carries the only timestamp); numbers are written in
shortest round-trip decimal form.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .dicke import Schedule, relative_gain
from .errors import ConfigError, GridGuardError, MemampError, ResourceGuardError
from .joint import EvolutionOrder, ModeTruncation
from .oracle import MAX_FULL_ATOMS, VERIFY_TOL, verify_ladder
from .protocol import (
    GainConvention,
    ProtocolConfig,
    monte_carlo,
    run_schedule,
)

#: Environment variable naming the default output directory.
OUT_DIR_ENV = "MEMAMP_OUT_DIR"

#: Maximum number of sweep grid points.
GRID_CAP = 1_000_000

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PROTOCOL = 2
EXIT_GUARD = 3

_CONFIG_KEYS = {
    "n_atoms",
    "alpha",
    "p_w",
    "p_r",
    "beta_w",
    "beta_r",
    "schedule",
    "stages",
    "order",
    "truncation",
    "gain_convention",
    "rng_seed",
}

_TRUNCATION_KEYS = {"fock_a_max", "fock_b_max", "fock_c_max", "atomic_k_max"}

_SWEEP_AXES = {"p_w", "p_r", "beta_w", "beta_r", "n_atoms", "stages", "alpha"}


def _parse_alpha(value, key: str = "alpha") -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(v, (int, float)) for v in value)
    ):
        return complex(value[0], value[1])
    raise ConfigError(f"{key}: expected a number or [re, im] pair, got {value!r}")


def _enum_from(enum_cls, value, key: str):
    for member in enum_cls:
        if member.value == value:
            return member
    options = ", ".join(m.value for m in enum_cls)
    raise ConfigError(f"{key}: expected one of {options}, got {value!r}")


def config_from_dict(data: dict) -> ProtocolConfig:
    """Build a validated ProtocolConfig from parsed JSON, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    if "n_atoms" not in data:
        raise ConfigError("n_atoms: required key is missing")
    kwargs: dict = {"n_atoms": data["n_atoms"]}
    if "alpha" in data:
        kwargs["alpha"] = _parse_alpha(data["alpha"])
    for key in ("p_w", "p_r", "beta_w", "beta_r"):
        if key in data:
            value = data[key]
            if not isinstance(value, (int, float)):
                raise ConfigError(f"{key}: expected a number, got {value!r}")
            kwargs[key] = float(value)
    if "schedule" in data:
        kwargs["schedule"] = _enum_from(Schedule, data["schedule"], "schedule")
    if "stages" in data:
        kwargs["stages"] = data["stages"]
    if "order" in data:
        kwargs["order"] = _enum_from(EvolutionOrder, data["order"], "order")
    if "gain_convention" in data:
        kwargs["gain_convention"] = _enum_from(
            GainConvention, data["gain_convention"], "gain_convention"
        )
    if "rng_seed" in data:
        kwargs["rng_seed"] = data["rng_seed"]
    if "truncation" in data:
        tdata = data["truncation"]
        if not isinstance(tdata, dict):
            raise ConfigError("truncation: expected an object")
        unknown = set(tdata) - _TRUNCATION_KEYS
        if unknown:
            raise ConfigError(
                f"unknown truncation key(s): {', '.join(sorted(unknown))}"
            )
        try:
            kwargs["truncation"] = ModeTruncation(**tdata)
        except (ValueError, ResourceGuardError) as exc:
            raise ConfigError(f"truncation: {exc}") from exc
    try:
        return ProtocolConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(path: str | Path) -> ProtocolConfig:
    """Load and validate a JSON run configuration."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return config_from_dict(data)


@dataclass(frozen=True)
class RunManifest:
    """Provenance record written alongside every command's data files."""

    command: str
    seed: int | None
    config: dict | None
    outputs: list[str]

    def write(self, out_dir: Path) -> Path:
        payload = {
            "tool": "memamp",
            "version": __version__,
            "command": self.command,
            "seed": self.seed,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "config": self.config,
            "outputs": self.outputs,
        }
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return path


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _resolve_out_dir(arg: str | None) -> Path:
    if arg:
        out = Path(arg)
    else:
        out = Path(os.environ.get(OUT_DIR_ENV, "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gain(n_atoms: int, n_max: int, out_dir: Path) -> int:
    """Gain-vs-rounds table for both schedule types (plot-ready data)."""
    if n_max < 0:
        raise ConfigError(f"n_max must be >= 0, got {n_max}")
    if n_atoms < n_max + 2:
        raise ConfigError(
            f"n_atoms = {n_atoms} below n_max + 2 = {n_max + 2} (headroom)"
        )
    rows = [
        [
            n,
            relative_gain(Schedule.TYPE_I, n, n_atoms),
            relative_gain(Schedule.TYPE_II, n, n_atoms),
        ]
        for n in range(n_max + 1)
    ]
    csv_path = out_dir / "gain.csv"
    _write_csv(csv_path, ["n", "gain_type1", "gain_type2"], rows)
    RunManifest(
        command="gain",
        seed=None,
        config={"n_atoms": n_atoms, "n_max": n_max},
        outputs=[csv_path.name],
    ).write(out_dir)
    return EXIT_OK


def cmd_simulate(config: ProtocolConfig, out_dir: Path) -> int:
    """Run the configured schedule; write report JSON, stage CSV and manifest."""
    report = run_schedule(config)
    report_path = out_dir / "report.json"
    stages_path = out_dir / "stages.csv"
    _write_json(report_path, report.to_dict())
    header = [
        "stage",
        "kind",
        "detect_a",
        "detect_b",
        "probability",
        "cumulative_probability",
        "gain_so_far",
        "failed",
    ]
    rows = [[r.to_row()[key] for key in header] for r in report.stage_reports]
    _write_csv(stages_path, header, rows)
    RunManifest(
        command="simulate",
        seed=config.rng_seed,
        config=config.to_dict(),
        outputs=[report_path.name, stages_path.name],
    ).write(out_dir)
    if not report.succeeded:
        print(f"simulation failed: {report.failure_reason}", file=sys.stderr)
        return EXIT_PROTOCOL
    return EXIT_OK


def _load_sweep_spec(path: str | Path) -> tuple[dict, dict]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if not isinstance(data, dict) or set(data) - {"base", "axes"}:
        raise ConfigError("sweep config must contain only 'base' and 'axes'")
    if "base" not in data or "axes" not in data:
        raise ConfigError("sweep config needs both 'base' and 'axes'")
    base = data["base"]
    axes = data["axes"]
    if not isinstance(axes, dict) or not axes:
        raise ConfigError("axes: expected a nonempty object of key -> values")
    for key, values in axes.items():
        if key not in _SWEEP_AXES:
            raise ConfigError(
                f"axes.{key}: not sweepable (allowed: {', '.join(sorted(_SWEEP_AXES))})"
            )
        if not isinstance(values, list):
            raise ConfigError(f"axes.{key}: expected a list of values")
        if len(values) == 0:
            raise GridGuardError(f"axes.{key}: empty axis")
    return base, axes


def _grid_points(base: dict, axes: dict) -> list[dict]:
    points = [dict(base)]
    for key, values in axes.items():  # file order; row-major expansion
        expanded = []
        for point in points:
            for value in values:
                nxt = dict(point)
                nxt[key] = value
                expanded.append(nxt)
        points = expanded
        if len(points) > GRID_CAP:
            raise GridGuardError(f"sweep grid exceeds cap of {GRID_CAP} points")
    return points


def _sweep_point(config: ProtocolConfig) -> dict:
    report = run_schedule(config)
    if report.succeeded and report.quality is not None:
        row = report.quality.to_dict()
        row["succeeded"] = True
    else:
        row = {
            key: float("nan")
            for key in (
                "p_suc",
                "p_mode",
                "p_spon",
                "p_amp",
                "q_amp",
                "gain",
                "fidelity",
            )
        }
        row["succeeded"] = False
    return row


def cmd_sweep(
    spec_path: str | Path, out_dir: Path, seed: int | None, jobs: int
) -> int:
    """Grid evaluation of the quality metrics over swept config keys."""
    base, axes = _load_sweep_spec(spec_path)
    points = _grid_points(base, axes)
    configs = []
    for point in points:
        if seed is not None:
            point = dict(point, rng_seed=seed)
        configs.append(config_from_dict(point))
    axis_keys = list(axes)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, configs, chunksize=16))
    else:
        results = [_sweep_point(c) for c in configs]
    quality_keys = ["p_suc", "p_mode", "p_spon", "p_amp", "q_amp", "gain", "fidelity"]
    header = axis_keys + quality_keys + ["gain_squared", "succeeded"]
    rows = []
    for point, row in zip(points, results):
        cells = [point[k] for k in axis_keys]
        cells += [row[k] for k in quality_keys]
        cells.append(row["gain"] ** 2)
        cells.append(row["succeeded"])
        rows.append(cells)
    csv_path = out_dir / "sweep.csv"
    _write_csv(csv_path, header, rows)
    RunManifest(
        command="sweep",
        seed=seed,
        config={"base": base, "axes": axes},
        outputs=[csv_path.name],
    ).write(out_dir)
    return EXIT_OK


def cmd_oracle_check(n_max: int, out_dir: Path) -> int:
    """Brute-force ladder verification for every ensemble size up to n_max."""
    if n_max > MAX_FULL_ATOMS:
        raise ResourceGuardError(
            f"oracle check capped at N = {MAX_FULL_ATOMS}, got {n_max}"
        )
    if n_max < 2:
        raise ConfigError(f"n_max must be >= 2, got {n_max}")
    reports = [verify_ladder(n) for n in range(2, n_max + 1)]
    payload = {
        "tolerance": VERIFY_TOL,
        "all_passed": all(r.passed for r in reports),
        "reports": [r.to_dict() for r in reports],
    }
    json_path = out_dir / "oracle_check.json"
    _write_json(json_path, payload)
    RunManifest(
        command="oracle-check",
        seed=None,
        config={"n_max": n_max},
        outputs=[json_path.name],
    ).write(out_dir)
    for report in reports:
        status = "pass" if report.passed else "FAIL"
        print(
            f"N={report.n_atoms}: max deviation {report.max_deviation:.3e}, "
            f"max residual {report.max_residual:.3e} [{status}]"
        )
    if not payload["all_passed"]:
        return EXIT_PROTOCOL
    return EXIT_OK


def cmd_mc(config: ProtocolConfig, trials: int, out_dir: Path) -> int:
    """Seeded Monte Carlo over heralding outcomes."""
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    report = monte_carlo(config, trials)
    json_path = out_dir / "mc_report.json"
    _write_json(json_path, report.to_dict())
    RunManifest(
        command="mc",
        seed=config.rng_seed,
        config=config.to_dict(),
        outputs=[json_path.name],
    ).write(out_dir)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memamp",
        description="heralded amplification of stored weak coherent states",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gain = sub.add_parser("gain", help="gain-vs-rounds table for both schedules")
    p_gain.add_argument("--n-atoms", type=int, required=True)
    p_gain.add_argument("--n-max", type=int, required=True)
    p_gain.add_argument("--out", default=None)

    p_sim = sub.add_parser("simulate", help="run one schedule from a config file")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", default=None)
    p_sim.add_argument("--seed", type=int, default=None)

    p_sweep = sub.add_parser("sweep", help="grid evaluation of quality metrics")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--jobs", type=int, default=1)

    p_oracle = sub.add_parser("oracle-check", help="brute-force ladder verification")
    p_oracle.add_argument("--n-max", type=int, required=True)
    p_oracle.add_argument("--out", default=None)

    p_mc = sub.add_parser("mc", help="Monte Carlo heralding trajectories")
    p_mc.add_argument("--config", required=True)
    p_mc.add_argument("--trials", type=int, required=True)
    p_mc.add_argument("--seed", type=int, default=None)
    p_mc.add_argument("--out", default=None)
    p_mc.add_argument(
        "--jobs",
        type=int,
        default=1,
        help="accepted for interface parity; sampling is vectorized in-process",
    )

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        out_dir = _resolve_out_dir(getattr(args, "out", None))
        if args.command == "gain":
            return cmd_gain(args.n_atoms, args.n_max, out_dir)
        if args.command == "simulate":
            config = parse_config(args.config)
            if args.seed is not None:
                config = dataclasses.replace(config, rng_seed=args.seed)
            return cmd_simulate(config, out_dir)
        if args.command == "sweep":
            return cmd_sweep(args.config, out_dir, args.seed, args.jobs)
        if args.command == "oracle-check":
            return cmd_oracle_check(args.n_max, out_dir)
        if args.command == "mc":
            config = parse_config(args.config)
            if args.seed is not None:
                config = dataclasses.replace(config, rng_seed=args.seed)
            return cmd_mc(config, args.trials, out_dir)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceGuardError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except MemampError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
