"""Experiment runner: JSON config in, CSV tables and a JSON manifest out.

Config layout::

    {
      "defaults": {"lambda_a": 0.1, "beta_db": 10, ...},
      "seed": 0, "trials": 100000, "simulate": true,
      "blockage_mode": "bernoulli", "beam_mode": "probabilistic",
      "experiments": [
        {"name": "coverage_vs_beta",
         "sweep": {"param": "beta_db", "values": [0, 5, 10]},
         "overrides": {"placement": "corner"},
         "output": "beta_corner.csv"}
      ]
    }

``sweep`` may give ``values`` or ``start``/``stop``/``step`` (inclusive).
The manifest written next to the CSV files is itself a valid config; running
it again reproduces the same CSV bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import subprocess
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, montecarlo
from .config import resolve_params, scenario_from_params
from .quadrature import QuadratureError
from .specfun import SeriesConvergenceError

__all__ = ["ConfigError", "ExperimentSpec", "load_config", "run", "main"]

EXPERIMENTS = (
    "dist_pdf",
    "hitting",
    "coverage_vs_beta",
    "coverage_vs_room",
    "coverage_vs_density",
    "single_point",
)
DEFAULT_SWEEP_PARAM = {
    "dist_pdf": "d0",
    "hitting": "d0",
    "coverage_vs_beta": "beta_db",
    "coverage_vs_room": "r_x",
    "coverage_vs_density": "lambda_a",
    "single_point": None,
}
COLUMNS = ("sweep_value", "analytic", "sim_mean", "sim_stderr", "void_prob", "trunc_err")
TOP_LEVEL_KEYS = {
    "defaults", "seed", "trials", "simulate", "blockage_mode", "beam_mode",
    "block_size", "experiments", "version", "wall_clock_s", "exit_status",
}
MANIFEST_NAME = "manifest.json"


class ConfigError(ValueError):
    """Malformed or out-of-domain configuration."""


class NumericError(RuntimeError):
    """A computation failed to converge or produced a non-finite value."""


@dataclass
class ExperimentSpec:
    name: str
    sweep_param: str | None
    sweep_values: list[float]
    overrides: dict = field(default_factory=dict)
    output_path: str = ""
    bin_width: float = 0.25

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "sweep": {"param": self.sweep_param, "values": list(self.sweep_values)},
            "overrides": dict(self.overrides),
            "output": self.output_path,
        }
        if self.name == "dist_pdf":
            out["bin_width"] = self.bin_width
        return out


@dataclass
class RunConfig:
    defaults: dict
    seed: int
    trials: int
    simulate: bool
    blockage_mode: str
    beam_mode: str
    block_size: int
    experiments: list[ExperimentSpec]

    def to_json(self) -> dict:
        return {
            "defaults": self.defaults,
            "seed": self.seed,
            "trials": self.trials,
            "simulate": self.simulate,
            "blockage_mode": self.blockage_mode,
            "beam_mode": self.beam_mode,
            "block_size": self.block_size,
            "experiments": [e.to_json() for e in self.experiments],
        }


def _sweep_values(name: str, sweep) -> tuple[str | None, list[float]]:
    if sweep is None:
        if name == "single_point":
            return None, []
        raise ConfigError(f"experiment {name!r} needs a sweep")
    if not isinstance(sweep, dict):
        raise ConfigError("sweep must be an object")
    param = sweep.get("param", DEFAULT_SWEEP_PARAM[name])
    if "values" in sweep:
        values = [float(v) for v in sweep["values"]]
    elif {"start", "stop", "step"} <= set(sweep):
        start, stop, step = (float(sweep[k]) for k in ("start", "stop", "step"))
        if not step > 0 or stop < start:
            raise ConfigError("sweep needs step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [round(start + i * step, 12) for i in range(n)]
    else:
        raise ConfigError("sweep needs 'values' or 'start'/'stop'/'step'")
    if not all(math.isfinite(v) for v in values):
        raise ConfigError("sweep values must be finite")
    return param, values


def _parse(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    try:
        defaults = resolve_params(raw.get("defaults", {}))
        scenario_from_params(defaults)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"defaults: {exc}") from None
    experiments = []
    for i, e in enumerate(raw.get("experiments", [])):
        name = e.get("name")
        if name not in EXPERIMENTS:
            raise ConfigError(f"experiment {i}: unknown name {name!r}")
        param, values = _sweep_values(name, e.get("sweep"))
        overrides = dict(e.get("overrides", {}))
        try:
            params = resolve_params(overrides, defaults)
            for v in values:
                if param in (None, "d0"):
                    if param == "d0" and v < 0:
                        raise ValueError("d0 must be non-negative")
                    continue
                scenario_from_params(resolve_params({param: v}, params))
            scenario_from_params(params)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"experiment {i} ({name}): {exc}") from None
        if param == "d0" and name not in ("dist_pdf", "hitting"):
            raise ConfigError(f"experiment {i}: d0 sweeps only apply to dist_pdf and hitting")
        bin_width = float(e.get("bin_width", 0.25))
        if not bin_width > 0:
            raise ConfigError(f"experiment {i}: bin_width must be positive")
        output = e.get("output", f"{i:02d}_{name}.csv")
        experiments.append(ExperimentSpec(name, param, values, overrides, output, bin_width))
    try:
        cfg = RunConfig(
            defaults=defaults,
            seed=int(raw.get("seed", 0)),
            trials=int(raw.get("trials", 100_000)),
            simulate=bool(raw.get("simulate", True)),
            blockage_mode=str(raw.get("blockage_mode", "bernoulli")),
            beam_mode=str(raw.get("beam_mode", "probabilistic")),
            block_size=int(raw.get("block_size", 20_000)),
            experiments=experiments,
        )
        montecarlo.SimConfig(cfg.trials, cfg.seed, cfg.blockage_mode, cfg.beam_mode, cfg.block_size)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    if cfg.block_size < 1:
        raise ConfigError("block_size must be >= 1")
    return cfg


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return _parse(raw)


# --------------------------------------------------------------------------
# experiment execution


def _row_seed(seed: int, exp_index: int, row: int) -> int:
    ss = np.random.SeedSequence([seed & (2**64 - 1), exp_index, row])
    return int(ss.generate_state(1, np.uint64)[0])


def _sim_config(cfg: RunConfig, seed: int) -> montecarlo.SimConfig:
    return montecarlo.SimConfig(cfg.trials, seed, cfg.blockage_mode, cfg.beam_mode, cfg.block_size)


def _finite(x, what):
    if not math.isfinite(x):
        raise NumericError(f"non-finite {what}")
    return x


def _run_experiment(k: int, exp: ExperimentSpec, cfg: RunConfig):
    base = resolve_params(exp.overrides, cfg.defaults)
    nan = float("nan")
    rows = []

    if exp.name in ("dist_pdf", "hitting"):
        sc = scenario_from_params(base)
        void = analysis.void_probability(sc.room, sc.sys)
        if exp.name == "dist_pdf":
            hist = None
            if cfg.simulate:
                hist = montecarlo.simulate_distance_pdf(
                    sc.room, sc.sys, _sim_config(cfg, _row_seed(cfg.seed, k, 0)), exp.bin_width
                )
            for v in exp.sweep_values:
                a = analysis.nearest_los_pdf(sc.room, sc.sys, v)
                m = se = nan
                if hist is not None:
                    b = np.searchsorted(hist.edges, v, side="right") - 1
                    if 0 <= b < len(hist.counts):
                        m, se = float(hist.density[b]), float(hist.stderr[b])
                    else:
                        m, se = 0.0, 0.0
                rows.append((v, _finite(a, "density"), m, se, void, 0.0))
        else:
            for i, v in enumerate(exp.sweep_values):
                a = analysis.ue_horizontal_hit_prob(sc.room, sc.ue, v)
                m = se = nan
                if cfg.simulate:
                    m, se = montecarlo.simulate_hitting(
                        sc.room, sc.sys, sc.ue, v, _sim_config(cfg, _row_seed(cfg.seed, k, i))
                    )
                rows.append((v, _finite(a, "hitting probability"), m, se, void, 0.0))
        return rows

    values = exp.sweep_values if exp.sweep_param else [None]
    for i, v in enumerate(values):
        params = base if v is None else resolve_params({exp.sweep_param: v}, base)
        sc = scenario_from_params(params)
        model = analysis.CoverageModel(sc.room, sc.sys, sc.ap, sc.ue, sc.ftr, sc.ctl)
        res = model.coverage(sc.beta)
        m = se = nan
        if cfg.simulate:
            m, se = montecarlo.simulate_coverage(
                sc.room, sc.sys, sc.ap, sc.ue, sc.ftr, sc.beta, _sim_config(cfg, _row_seed(cfg.seed, k, i))
            )
        sweep_value = v if v is not None else float(params.get("beta_db", 10 * math.log10(sc.beta)))
        rows.append((sweep_value, _finite(res.coverage, "coverage"), m, se, res.void_prob, res.trunc_err))
    return rows


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, rows):
    lines = [",".join(COLUMNS)]
    lines += [",".join(_fmt(x) for x in row) for row in rows]
    path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def version_string() -> str:
    try:
        from importlib.metadata import version

        base = version("artifact")
    except Exception:
        base = "0.0.0"
    try:
        rev = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if rev.returncode == 0 and rev.stdout.strip():
            return f"{base}+g{rev.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return base


def run(config_path, out_dir=None, trials=None, seed=None, simulate=None, stderr=None) -> int:
    """Execute every experiment of a config file; return the exit status."""
    stderr = stderr or sys.stderr
    started = time.perf_counter()
    try:
        cfg = load_config(config_path)
        if trials is not None:
            if trials < 1:
                raise ConfigError("--trials must be >= 1")
            cfg.trials = trials
        if seed is not None:
            cfg.seed = seed
        if simulate is not None:
            cfg.simulate = simulate
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return 1

    out = Path(out_dir) if out_dir is not None else Path(config_path).resolve().parent / "results"
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for k, exp in enumerate(cfg.experiments):
            rows = _run_experiment(k, exp, cfg)
            path = out / exp.output_path
            path.parent.mkdir(parents=True, exist_ok=True)
            written.append(path)
            _write_csv(path, rows)
        manifest = cfg.to_json()
        manifest["version"] = version_string()
        manifest["wall_clock_s"] = round(time.perf_counter() - started, 3)
        path = out / MANIFEST_NAME
        written.append(path)
        path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    except (SeriesConvergenceError, QuadratureError, NumericError, FloatingPointError) as exc:
        _cleanup(written)
        print(f"numeric failure: {exc}", file=stderr)
        return 2
    except (ValueError, KeyError) as exc:
        _cleanup(written)
        print(f"config error: {exc}", file=stderr)
        return 1
    except BaseException:
        _cleanup(written)
        raise
    return 0


def _cleanup(paths):
    for p in paths:
        try:
            p.unlink()
        except FileNotFoundError:
            pass


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="thzcov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiments of a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="output directory (default: results/ next to the config)")
    p_run.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    p_run.add_argument("--seed", type=int, help="base random seed")
    p_run.add_argument("--no-sim", action="store_true", help="analytic curves only")
    parser.epilog = f"Thread count for the simulator: ${montecarlo.THREADS_ENV} (default 1)."
    args = parser.parse_args(argv)
    return run(
        args.config,
        out_dir=args.out,
        trials=args.trials,
        seed=args.seed,
        simulate=False if args.no_sim else None,
    )


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
