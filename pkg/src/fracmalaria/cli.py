"""Batch front end: simulate alpha sweeps and write CSV / JSON for plotting.

Usage::

    fracmalaria simulate --config scenario.json --out results/
    fracmalaria phase    --config scenario.json --out results/ --x s_h --y i_v
    fracmalaria analyze  --config scenario.json --out results/
    fracmalaria run      --config scenario.json --out results/

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analysis import full_report
from .fracsolver import FractionalOrder, NonFiniteStateError, TimeGrid, Trajectory, solve
from .model import (
    DEFAULT_INITIAL_STATE,
    DEFAULT_PARAMS,
    STATE_NAMES,
    EpiState,
    ModelParams,
    RootFindingError,
    simplex_defect,
    system_function,
)

log = logging.getLogger("fracmalaria")

DEFAULT_ALPHAS = (1.0, 0.99, 0.95, 0.90)
DEFAULT_H = 0.01
DEFAULT_HORIZON = 200.0
MAX_STEPS = 10**7
SIMPLEX_LOAD_TOL = 1e-12

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Outputs:
    trajectory: bool = True
    phase: bool = True
    report: bool = True


@dataclass(frozen=True)
class ScenarioConfig:
    params: ModelParams = DEFAULT_PARAMS
    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    initial_state: EpiState = DEFAULT_INITIAL_STATE
    h: float = DEFAULT_H
    horizon: float = DEFAULT_HORIZON
    outputs: Outputs = field(default_factory=Outputs)
    stride: int = 1
    stem: str = "malaria"

    def __post_init__(self):
        if not self.alphas:
            raise ConfigError("alphas: must be a non-empty list")
        for a in self.alphas:
            try:
                FractionalOrder(a)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"alphas: {exc}") from None
        labels = [alpha_label(a) for a in self.alphas]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"alphas: values collide when formatted for file names: {labels}")
        dh, dv = simplex_defect(self.initial_state)
        if abs(dh) > SIMPLEX_LOAD_TOL:
            raise ConfigError(f"initial_state: human proportions must sum to 1 (defect {dh:.6g})")
        if abs(dv) > SIMPLEX_LOAD_TOL:
            raise ConfigError(f"initial_state: mosquito proportions must sum to 1 (defect {dv:.6g})")
        if any(not (0.0 <= v <= 1.0) for v in self.initial_state):
            raise ConfigError("initial_state: every proportion must lie in [0, 1]")
        if not (isinstance(self.h, (int, float)) and math.isfinite(self.h) and self.h > 0):
            raise ConfigError(f"h: must be a positive number, got {self.h!r}")
        if not (isinstance(self.horizon, (int, float)) and math.isfinite(self.horizon) and self.horizon > 0):
            raise ConfigError(f"horizon: must be a positive number, got {self.horizon!r}")
        if self.horizon / self.h > MAX_STEPS:
            raise ConfigError(f"horizon/h = {self.horizon / self.h:.3g} exceeds the {MAX_STEPS:.0e} step limit")
        try:
            TimeGrid.from_horizon(self.h, self.horizon)
        except ValueError as exc:
            raise ConfigError(f"horizon: {exc}") from None
        if not isinstance(self.stride, int) or isinstance(self.stride, bool) or self.stride < 1:
            raise ConfigError(f"stride: must be a positive integer, got {self.stride!r}")
        if not self.stem or os.sep in self.stem:
            raise ConfigError(f"stem: invalid file stem {self.stem!r}")

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid.from_horizon(self.h, self.horizon)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "alphas": list(self.alphas),
            "initial_state": dict(zip(STATE_NAMES, self.initial_state)),
            "h": self.h,
            "horizon": self.horizon,
            "outputs": {f.name: getattr(self.outputs, f.name) for f in fields(Outputs)},
            "stride": self.stride,
            "stem": self.stem,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        if not isinstance(d, dict):
            raise ConfigError("config: top level must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"config: unknown key(s) {sorted(unknown)}")
        kw = {}
        if "params" in d:
            if not isinstance(d["params"], dict):
                raise ConfigError("params: must be an object")
            try:
                kw["params"] = ModelParams.from_dict(d["params"])
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"params: {exc}") from None
        if "alphas" in d:
            if not isinstance(d["alphas"], list):
                raise ConfigError("alphas: must be a list")
            kw["alphas"] = tuple(d["alphas"])
        if "initial_state" in d:
            kw["initial_state"] = _parse_state(d["initial_state"])
        for key in ("h", "horizon", "stride", "stem"):
            if key in d:
                kw[key] = d[key]
        if "outputs" in d:
            o = d["outputs"]
            if not isinstance(o, dict) or set(o) - {f.name for f in fields(Outputs)}:
                raise ConfigError("outputs: expected an object with keys trajectory, phase, report")
            if any(not isinstance(v, bool) for v in o.values()):
                raise ConfigError("outputs: flags must be true or false")
            kw["outputs"] = Outputs(**o)
        return cls(**kw)


def _parse_state(v) -> EpiState:
    if isinstance(v, dict):
        if set(v) != set(STATE_NAMES):
            raise ConfigError(f"initial_state: expected keys {list(STATE_NAMES)}")
        vals = [v[k] for k in STATE_NAMES]
    elif isinstance(v, list) and len(v) == 5:
        vals = v
    else:
        raise ConfigError("initial_state: expected a 5-element list or an object keyed by compartment")
    if any(isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x) for x in vals):
        raise ConfigError("initial_state: components must be finite numbers")
    return EpiState(*(float(x) for x in vals))


def load_config(path) -> ScenarioConfig:
    """Read and validate a JSON scenario file."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return ScenarioConfig.from_dict(raw)


def dump_config(config: ScenarioConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2) + "\n")


def alpha_label(alpha: float) -> str:
    """Two decimals, or four when two would lose the value (e.g. 0.999)."""
    two = f"{alpha:.2f}"
    return two if float(two) == alpha else f"{alpha:.4f}"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trajectory_csv(traj: Trajectory, stride: int = 1) -> str:
    t = traj.times
    rows = ["t," + ",".join(STATE_NAMES)]
    for k in range(0, len(traj), stride):
        rows.append(",".join(_fmt(v) for v in (t[k], *traj.states[k])))
    return "\n".join(rows) + "\n"


def phase_csv(traj: Trajectory, x_var: str, y_var: str, stride: int = 1) -> str:
    ix, iy = STATE_NAMES.index(x_var), STATE_NAMES.index(y_var)
    rows = [f"{x_var},{y_var}"]
    for k in range(0, len(traj), stride):
        rows.append(f"{_fmt(traj.states[k, ix])},{_fmt(traj.states[k, iy])}")
    return "\n".join(rows) + "\n"


def simulate(config: ScenarioConfig, alpha: float) -> Trajectory:
    return solve(system_function(config.params, alpha), config.initial_state.as_array(), alpha, config.grid)


def _solve_all(config: ScenarioConfig, jobs: int) -> dict[float, Trajectory]:
    if jobs > 1 and len(config.alphas) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(config.alphas))) as pool:
            results = pool.map(simulate, [config] * len(config.alphas), config.alphas)
            return dict(zip(config.alphas, results))
    return {a: simulate(config, a) for a in config.alphas}


def trajectory_path(out: Path, config: ScenarioConfig, alpha: float) -> Path:
    return out / f"{config.stem}_alpha{alpha_label(alpha)}.csv"


def phase_path(out: Path, config: ScenarioConfig, alpha: float, x_var: str, y_var: str) -> Path:
    return out / f"{config.stem}_phase_{x_var}_{y_var}_alpha{alpha_label(alpha)}.csv"


def report_path(out: Path, config: ScenarioConfig, alpha: float) -> Path:
    return out / f"{config.stem}_report_alpha{alpha_label(alpha)}.json"


def cmd_simulate(config: ScenarioConfig, out: Path, jobs: int = 1) -> list[Path]:
    trajs = _solve_all(config, jobs)
    paths = []
    for a, traj in trajs.items():
        p = trajectory_path(out, config, a)
        _write_atomic(p, trajectory_csv(traj, config.stride))
        paths.append(p)
    return paths


def check_phase_vars(x_var: str, y_var: str) -> None:
    for v in (x_var, y_var):
        if v not in STATE_NAMES:
            raise ConfigError(f"unknown variable {v!r}; choose from {', '.join(STATE_NAMES)}")
    if x_var == y_var:
        raise ConfigError("phase portrait needs two distinct variables")


def cmd_phase(config: ScenarioConfig, out: Path, x_var: str = "s_h", y_var: str = "i_v", jobs: int = 1) -> list[Path]:
    check_phase_vars(x_var, y_var)
    trajs = _solve_all(config, jobs)
    paths = []
    for a, traj in trajs.items():
        p = phase_path(out, config, a, x_var, y_var)
        _write_atomic(p, phase_csv(traj, x_var, y_var, config.stride))
        paths.append(p)
    return paths


def report_json(config: ScenarioConfig, alpha: float) -> str:
    return json.dumps(full_report(config.params, alpha).to_json_dict(), indent=2) + "\n"


def cmd_analyze(config: ScenarioConfig, out: Path) -> list[Path]:
    paths = []
    for a in config.alphas:
        p = report_path(out, config, a)
        _write_atomic(p, report_json(config, a))
        paths.append(p)
    return paths


def cmd_run(config: ScenarioConfig, out: Path, x_var: str, y_var: str, jobs: int = 1) -> list[Path]:
    """Everything switched on in the config's ``outputs`` block, from a single solve per alpha."""
    check_phase_vars(x_var, y_var)
    paths = []
    if config.outputs.trajectory or config.outputs.phase:
        for a, traj in _solve_all(config, jobs).items():
            if config.outputs.trajectory:
                p = trajectory_path(out, config, a)
                _write_atomic(p, trajectory_csv(traj, config.stride))
                paths.append(p)
            if config.outputs.phase:
                p = phase_path(out, config, a, x_var, y_var)
                _write_atomic(p, phase_csv(traj, x_var, y_var, config.stride))
                paths.append(p)
    if config.outputs.report:
        paths += cmd_analyze(config, out)
    return paths


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracmalaria", description="Fractional-order malaria model: simulation and stability analysis.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, solves=True):
        p.add_argument("--config", type=Path, help="JSON scenario file (defaults used when omitted)")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        if solves:
            p.add_argument("--stride", type=int, help="write every n-th grid point (overrides config)")
            p.add_argument("--jobs", type=int, default=1, help="solve alpha values in parallel processes")

    common(sub.add_parser("simulate", help="trajectory CSV per alpha"))
    ph = sub.add_parser("phase", help="phase-portrait CSV per alpha")
    common(ph)
    ph.add_argument("--x", dest="x_var", default="s_h")
    ph.add_argument("--y", dest="y_var", default="i_v")
    common(sub.add_parser("analyze", help="stability report JSON per alpha"), solves=False)
    run = sub.add_parser("run", help="all outputs enabled in the config")
    common(run)
    run.add_argument("--x", dest="x_var", default="s_h")
    run.add_argument("--y", dest="y_var", default="i_v")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        config = load_config(args.config) if args.config else ScenarioConfig()
        if getattr(args, "stride", None) is not None:
            config = ScenarioConfig.from_dict({**config.to_dict(), "stride": args.stride})
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command in ("phase", "run"):
            check_phase_vars(args.x_var, args.y_var)
        if args.command == "simulate":
            paths = cmd_simulate(config, args.out, args.jobs)
        elif args.command == "phase":
            paths = cmd_phase(config, args.out, args.x_var, args.y_var, args.jobs)
        elif args.command == "analyze":
            paths = cmd_analyze(config, args.out)
        else:
            paths = cmd_run(config, args.out, args.x_var, args.y_var, args.jobs)
    except (ConfigError, OSError) as exc:
        print(f"fracmalaria: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonFiniteStateError, RootFindingError) as exc:
        print(f"fracmalaria: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for p in paths:
        log.info("wrote %s", p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
