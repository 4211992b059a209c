"""Command line entry point: ``nlkg {exponents,table,simulate,picard,scatter-report}``."""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, exponents
from .config import KEYS, ConfigError, HorizonError, RunConfig, parse_config
from .data import GENERATORS
from .diagnostics import ScatteringReport, energy_estimate_slack, scattering_profile
from .evolve import EvolveConfig, Status, Trajectory, evolve, picard_solve
from .spectral import FieldState, make_grid, read_snapshot, write_snapshot

log = logging.getLogger("nlkg")

EXIT_OK, EXIT_INVALID, EXIT_HORIZON, EXIT_NUMERIC = 0, 1, 2, 3
REPORT_COLUMNS = ("t", "energy", "energy_norm", "strichartz_partial", "tail_norm", "v_increment")
MANIFEST = "manifest.json"


@dataclass
class RunManifest:
    config: dict
    seed: int
    grid_hash: str
    status: Status
    wall_time: float = 0.0
    code_version: str = __version__
    verdicts: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    results: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config, "code_version": self.code_version, "seed": self.seed,
            "grid_hash": self.grid_hash, "wall_time": self.wall_time, "status": self.status.value,
            "verdicts": self.verdicts, "warnings": self.warnings, "results": self.results,
        }

    def write(self, out_dir: Path) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / MANIFEST).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def grid_hash(cfg: RunConfig) -> str:
    spec = cfg.domain
    text = repr((spec.d, spec.k, spec.box_lengths, spec.torus_lengths, spec.nx, spec.ny))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def initial_data(cfg: RunConfig) -> FieldState:
    grid = make_grid(cfg.domain)
    if cfg.data_kind == "file":
        return read_snapshot(cfg.data_file, grid).with_time(0.0)
    return GENERATORS[cfg.data_kind](grid, cfg.data_amplitude, cfg.data_radius)


def _num(x: float) -> str:
    return repr(float(x))


def write_reports(report: ScatteringReport, out_dir: Path, extra: dict | None = None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    incs = np.concatenate([[0.0], report.v_increments])
    with open(out_dir / "report.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for i, t in enumerate(report.times):
            writer.writerow([
                _num(t), _num(report.energy_series[i]), _num(report.energy_norm_series[i]),
                _num(report.strichartz_partials[i]), _num(report.tail_norms[i]), _num(incs[i]),
            ])
    slack = energy_estimate_slack(report)
    scalars = {
        **report.scalars,
        "max_energy_estimate_slack": float(slack.max(initial=0.0)),
        "scatter_state_time": 0.0,
        "extrapolation": "V(T) at the final snapshot, no extrapolation in t",
        **(extra or {}),
    }
    (out_dir / "report.json").write_text(json.dumps(scalars, indent=2, sort_keys=True) + "\n")


def write_trajectory(traj: Trajectory, out_dir: Path) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for i, state in enumerate(traj.states):
        name = f"snap_{i:05d}.kgps"
        write_snapshot(out_dir / name, state)
        names.append(name)
    return names


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_experiment(cfg: RunConfig, mode: str = "simulate") -> RunManifest:
    """Run the configured pipeline and write snapshots, reports and the manifest."""
    np.random.seed(cfg.seed)
    out_dir = Path(cfg.output_dir)
    manifest = RunManifest(
        config=cfg.echo(), seed=cfg.seed, grid_hash=grid_hash(cfg), status=Status.OK,
        verdicts={"thm1": cfg.verdicts.thm1.to_dict(), "thm2": cfg.verdicts.thm2.to_dict()},
        warnings=list(cfg.warnings),
    )
    start = time.perf_counter()
    state = initial_data(cfg)
    econf = cfg.evolve_config
    extra = {}
    if mode == "simulate":
        traj = evolve(state, econf)
        manifest.results["energy_drift"] = traj.info["energy_drift"]
    elif mode == "picard":
        result = picard_solve(state, econf, tol=cfg.tol, max_iter=cfg.max_iter)
        traj = result.trajectory
        extra = {
            "picard_ratios": result.ratios, "picard_increments": result.increments,
            "picard_iterations": result.iterations, "picard_converged": result.converged,
        }
        manifest.results.update(extra)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    manifest.status = traj.status
    names = write_trajectory(traj, out_dir)
    report = scattering_profile(traj, econf)
    write_reports(report, out_dir, extra)
    manifest.results["snapshots"] = {name: _sha256(out_dir / name) for name in names}
    manifest.results["scatter_energy_norm"] = report.scalars["scatter_energy_norm"]
    manifest.wall_time = time.perf_counter() - start
    manifest.write(out_dir)
    return manifest


def load_run(run_dir: Path) -> Trajectory:
    meta = json.loads((run_dir / MANIFEST).read_text())
    conf = meta["config"]
    econf = EvolveConfig(
        p=float(exponents.as_rational(conf["p"])), sign=int(conf["sign"]), dt=float(conf["dt"]),
        T=float(conf["T"]), snapshot_stride=int(conf["snapshot_stride"]),
    )
    files = sorted(run_dir.glob("snap_*.kgps"))
    if not files:
        raise FileNotFoundError(f"no snapshots in {run_dir}")
    first = read_snapshot(files[0])
    states = [first] + [read_snapshot(f, first.grid) for f in files[1:]]
    return Trajectory(states, econf, Status(meta.get("status", "OK")))


# --- argument handling -------------------------------------------------------


def _config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    for key in KEYS:
        if key == "output_dir":
            continue
        parser.add_argument(f"--{key}", dest=f"cfg_{key}", metavar="VALUE")
    parser.add_argument("--output", dest="cfg_output_dir", metavar="DIR", help="output directory")
    parser.add_argument("--unsafe", dest="cfg_unsafe_horizon", action="store_const", const="true",
                        help="run past the finite-speed horizon")


def _overrides(args) -> dict[str, str]:
    return {name[4:]: value for name, value in vars(args).items() if name.startswith("cfg_") and value is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlkg", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("exponents", help="exponent profile and theorem verdicts as JSON")
    ex.add_argument("--d", type=int)
    ex.add_argument("--k", type=int)
    ex.add_argument("--p")
    ex.add_argument("--gamma")
    ex.add_argument("--table", action="store_true", help="emit the full restriction table as CSV")
    ex.add_argument("--output", help="directory to write into instead of stdout")

    tb = sub.add_parser("table", help="restriction table as CSV")
    tb.add_argument("--output", help="directory to write table.csv into")

    for name in ("simulate", "picard"):
        _config_flags(sub.add_parser(name, help=f"{name} run from a config file"))

    sr = sub.add_parser("scatter-report", help="recompute report.csv/report.json from a run directory")
    sr.add_argument("--run", required=True)
    sr.add_argument("--output")
    return parser


def exponents_json(d: int, k: int, p, gamma=None) -> dict:
    p = exponents.as_rational(p)
    out: dict = {"d": d, "k": k, "p": str(p)}
    if d + k >= 3:
        crit = exponents.critical_exponents(d, k)
        out["critical"] = {name: str(getattr(crit, name)) for name in crit._fields}
    if d * p > 4:
        out["profile"] = exponents.derived_profile(d, k, p).to_dict()
    verdicts = exponents.theorem_applicability(d, k, p, gamma)
    out["thm1"] = verdicts.thm1.to_dict()
    out["thm2"] = verdicts.thm2.to_dict()
    if gamma is not None:
        out["gamma_extra"] = str(exponents.as_rational(gamma))
    return out


def _emit(text: str, out_dir: str | None, name: str) -> None:
    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / name).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "table" or (args.command == "exponents" and args.table):
            _emit(exponents.format_table(exponents.restriction_rows()), args.output, "table.csv")
            return EXIT_OK
        if args.command == "exponents":
            if args.d is None or args.k is None or args.p is None:
                raise ConfigError("exponents needs --d, --k and --p (or --table)")
            text = json.dumps(exponents_json(args.d, args.k, args.p, args.gamma), indent=2) + "\n"
            _emit(text, args.output, "exponents.json")
            return EXIT_OK
        if args.command == "scatter-report":
            run_dir = Path(args.run)
            traj = load_run(run_dir)
            write_reports(scattering_profile(traj), Path(args.output) if args.output else run_dir)
            return EXIT_OK
        try:
            cfg = parse_config(args.config, _overrides(args))
        except HorizonError as exc:
            log.error("%s", exc)
            overrides = _overrides(args)
            out_dir = Path(overrides.get("output_dir") or _config_output(args.config))
            RunManifest(config={"error": str(exc)}, seed=0, grid_hash="", status=Status.HORIZON_REFUSED).write(out_dir)
            return EXIT_HORIZON
        manifest = run_experiment(cfg, args.command)
        print(json.dumps({"status": manifest.status.value, "output_dir": cfg.output_dir}))
        return EXIT_OK
    except (ConfigError, ValueError, OSError, KeyError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    except FloatingPointError as exc:
        log.error("numeric failure: %s", exc)
        return EXIT_NUMERIC


def _config_output(path) -> str:
    from .config import DEFAULTS, read_pairs

    try:
        return read_pairs(path).get("output_dir", DEFAULTS["output_dir"]) if path else DEFAULTS["output_dir"]
    except (OSError, ConfigError):
        return DEFAULTS["output_dir"]


if __name__ == "__main__":
    sys.exit(main())
