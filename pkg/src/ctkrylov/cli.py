"""Command-line interface: synthesize blur problems, run solvers, benchmark.

Subcommands
-----------
synth    build a blurred/noisy problem and write images, tensors, manifest
deblur   run one solver on a problem and write the restoration and metrics
bench    run several solvers on the same problem and tabulate the results
check    run the library's invariant suites

Configuration is a flat INI document with [problem], [solver] and [outputs]
sections; every key can be overridden by a command-line flag, and flags win.
The manifest written by synth uses the same format plus a [computed]
section, so it can be fed back in through --config.

Exit codes: 0 success, 1 solver or numeric failure, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import sys
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import checks, imaging, serialize, solvers

__all__ = ["RunConfig", "main"]

SOLVER_NAMES = ("gmres", "gk", "lsqr")


@dataclass
class RunConfig:
    # problem
    image: str | None = None
    pattern: str = "random-smooth"
    size: int = 64
    sigma: float = 4.0
    band: int = 6
    noise: float = 1e-3
    seed: int = 0
    mixing_diagonal: float = 0.8
    # solver
    solver: str = "gk"
    restart: int = 10
    steps: int | None = None
    tol: float = 1e-6
    lambda_mode: str = "gcv"
    kopt: str | None = None
    # outputs
    out: str = "results"
    images: bool = True
    csv: bool = True


class ConfigError(ValueError):
    pass


_PROBLEM_KEYS = ("image", "pattern", "size", "sigma", "band", "noise", "seed",
                 "mixing_diagonal")
_SOLVER_KEYS = ("solver", "restart", "steps", "tol", "lambda_mode", "kopt")
_OUTPUT_KEYS = ("out", "images", "csv")


def _coerce(name: str, raw: str):
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    if raw == "" or raw.lower() == "none":
        return None
    if "bool" in kind:
        return raw.lower() in ("1", "true", "yes", "on")
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def load_config_file(path) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    values = {}
    sections = {"problem": _PROBLEM_KEYS, "solver": _SOLVER_KEYS, "outputs": _OUTPUT_KEYS}
    for section, keys in sections.items():
        if not parser.has_section(section):
            continue
        for key, raw in parser.items(section):
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            values[key] = _coerce(key, raw)
    return values


def build_run_config(args: argparse.Namespace) -> tuple[RunConfig, set[str]]:
    cfg = RunConfig()
    explicit: set[str] = set()
    if getattr(args, "config", None):
        for key, value in load_config_file(args.config).items():
            setattr(cfg, key, value)
            explicit.add(key)
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            setattr(cfg, f.name, flag)
            explicit.add(f.name)
    if cfg.noise < 0:
        raise ConfigError("noise level must be nonnegative")
    if cfg.size < 2:
        raise ConfigError("size must be at least 2")
    if cfg.sigma <= 0:
        raise ConfigError("sigma must be positive")
    if not 0 <= cfg.band < cfg.size:
        raise ConfigError("band must satisfy 0 <= band < size")
    if not 0 < cfg.mixing_diagonal <= 1:
        raise ConfigError("mixing_diagonal must be in (0, 1]")
    return cfg, explicit


def _mixing_matrix(diagonal: float) -> np.ndarray:
    off = (1.0 - diagonal) / 2.0
    return np.full((3, 3), off) + (diagonal - off) * np.eye(3)


def build_problem(cfg: RunConfig) -> imaging.BlurProblem:
    if cfg.image:
        truth = imaging.load_image(cfg.image)
    else:
        truth = imaging.synthetic_image(cfg.pattern, cfg.size, cfg.seed)
    return imaging.make_blur_problem(
        truth,
        sigma=cfg.sigma,
        bandwidth=cfg.band,
        mixing=_mixing_matrix(cfg.mixing_diagonal),
        noise_level=cfg.noise,
        seed=cfg.seed,
    )


def problem_hash(cfg: RunConfig, problem: imaging.BlurProblem) -> str:
    digest = hashlib.sha256()
    digest.update(
        f"{cfg.image}|{cfg.pattern}|{cfg.size}|{cfg.sigma}|{cfg.band}|"
        f"{cfg.noise}|{cfg.seed}|{cfg.mixing_diagonal}".encode()
    )
    digest.update(np.ascontiguousarray(problem.observed).tobytes())
    return digest.hexdigest()[:16]


def _solver_config(cfg: RunConfig) -> solvers.SolverConfig:
    lambda_mode = cfg.lambda_mode if cfg.lambda_mode == "gcv" else float(cfg.lambda_mode)
    if cfg.kopt is None:
        k_opt_mode = "lcurve" if cfg.solver == "lsqr" else None
    elif cfg.kopt == "lcurve":
        k_opt_mode = "lcurve"
    else:
        k_opt_mode = int(cfg.kopt)
    return solvers.SolverConfig(
        restart_m=cfg.restart,
        max_outer_iterations=cfg.steps if cfg.solver == "gmres" and cfg.steps else 10,
        tolerance=cfg.tol,
        max_inner_steps=cfg.steps if cfg.solver != "gmres" else None,
        lambda_mode=lambda_mode,
        rng_seed=cfg.seed,
        k_opt_mode=k_opt_mode,
    )


def run_solver(name: str, problem: imaging.BlurProblem, cfg: RunConfig):
    """Run one solver on the observed data; returns (report, wall_seconds)."""
    solver_cfg = _solver_config(cfg)
    start = time.perf_counter()
    if name == "gmres":
        report = solvers.dc_gmres(problem.operator, problem.observed, cfg=solver_cfg)
    elif name == "gk":
        report = solvers.dc_gk(problem.operator, problem.observed, cfg=solver_cfg)
    elif name == "lsqr":
        report = solvers.dc_lsqr(problem.operator, problem.observed, cfg=solver_cfg)
    else:
        raise ConfigError(f"unknown solver {name!r}; choose from {SOLVER_NAMES}")
    return report, time.perf_counter() - start


def _write_manifest(path: Path, cfg: RunConfig, problem: imaging.BlurProblem) -> None:
    parser = configparser.ConfigParser()
    parser["problem"] = {
        "image": cfg.image or "",
        "pattern": cfg.pattern,
        "size": str(problem.ground_truth.shape[0]),
        "sigma": repr(cfg.sigma),
        "band": str(cfg.band),
        "noise": repr(cfg.noise),
        "seed": str(cfg.seed),
        "mixing_diagonal": repr(cfg.mixing_diagonal),
    }
    clean = imaging.fro_norm(problem.blurred_clean)
    noise = imaging.fro_norm(problem.observed - problem.blurred_clean)
    parser["computed"] = {
        "clean_norm": repr(clean),
        "noise_norm": repr(noise),
        "noise_ratio": repr(noise / clean if clean > 0 else 0.0),
        "observed_relative_error": repr(
            imaging.relative_error(problem.observed, problem.ground_truth)
        ),
        "problem_hash": problem_hash(cfg, problem),
    }
    with open(path, "w") as fh:
        parser.write(fh)


def cmd_synth(args: argparse.Namespace) -> int:
    cfg, _ = build_run_config(args)
    problem = build_problem(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.images:
        imaging.save_image(problem.ground_truth, out / "ground_truth.png")
        imaging.save_image(problem.blurred_clean, out / "blurred.png")
        imaging.save_image(problem.observed, out / "observed.png")
    serialize.save_tensor(problem.ground_truth, out / "ground_truth.ct3")
    serialize.save_tensor(problem.blurred_clean, out / "blurred.ct3")
    serialize.save_tensor(problem.observed, out / "observed.ct3")
    _write_manifest(out / "manifest.ini", cfg, problem)
    print(f"wrote problem ({problem_hash(cfg, problem)}) to {out}")
    return 0


def _history_rows(solver: str, report: solvers.SolverReport):
    if solver == "lsqr":
        for i, res in enumerate(report.residual_history):
            yield i + 1, res, "", report.solution_norm_history[i]
    elif solver == "gk":
        yield (report.iterations_used, report.residual_history[-1],
               report.lambda_history[-1] if report.lambda_history else "",
               report.solution_norm_history[-1])
    else:  # gmres: entry 0 is the initial residual, then one row per cycle
        for i, res in enumerate(report.residual_history):
            lam = report.lambda_history[i - 1] if 0 < i <= len(report.lambda_history) else ""
            norm = (report.solution_norm_history[i - 1]
                    if 0 < i <= len(report.solution_norm_history) else "")
            yield i, res, lam, norm


def cmd_deblur(args: argparse.Namespace) -> int:
    cfg, _ = build_run_config(args)
    problem = build_problem(cfg)
    report, seconds = run_solver(cfg.solver, problem, cfg)
    restored = report.solution
    rel = imaging.relative_error(restored, problem.ground_truth)
    ratio = imaging.snr(restored, problem.ground_truth)

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.images:
        imaging.save_image(restored, out / "restored.png")
    serialize.save_tensor(restored, out / "restored.ct3")
    if cfg.csv:
        rows = _history_rows(cfg.solver, report)
        with open(out / "history.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "residual", "lambda", "solution_norm"])
            writer.writerows(rows)
        with open(out / "summary.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["solver", "snr_db", "relative_error", "cpu_seconds",
                             "iterations", "termination", "k_opt"])
            writer.writerow([cfg.solver, f"{ratio:.4f}", f"{rel:.6e}", f"{seconds:.3f}",
                             report.iterations_used, report.termination_reason,
                             report.k_opt if report.k_opt is not None else ""])
    print(f"{cfg.solver}  SNR {ratio:.2f} dB  relative error {rel:.3e}  "
          f"cpu-time {seconds:.2f} s  ({report.termination_reason})")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    cfg, explicit = build_run_config(args)
    spec = cfg.solver if "solver" in explicit else ",".join(SOLVER_NAMES)
    names = [s.strip() for s in spec.replace(",", " ").split() if s.strip()]
    if not names:
        raise ConfigError("bench needs at least one solver")
    for name in names:
        if name not in SOLVER_NAMES:
            raise ConfigError(f"unknown solver {name!r}; choose from {SOLVER_NAMES}")
    problem = build_problem(cfg)
    phash = problem_hash(cfg, problem)

    rows = []
    failures = 0
    for name in names:
        run_cfg = replace(cfg, solver=name)
        try:
            report, seconds = run_solver(name, problem, run_cfg)
            rel = imaging.relative_error(report.solution, problem.ground_truth)
            ratio = imaging.snr(report.solution, problem.ground_truth)
            rows.append([name, f"{ratio:.4f}", f"{rel:.6e}", f"{seconds:.3f}", phash, ""])
        except Exception as exc:  # record and continue with the other solvers
            failures += 1
            rows.append([name, "", "", "", phash, f"{type(exc).__name__}: {exc}"])

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.csv:
        with open(out / "bench.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["solver", "snr_db", "relative_error", "cpu_seconds",
                             "problem_hash", "error"])
            writer.writerows(rows)
    print(f"{'Method':8s} {'SNR':>8s} {'Relative error':>15s} {'cpu-time':>9s}")
    for row in rows:
        if row[5]:
            print(f"{row[0]:8s} failed: {row[5]}")
        else:
            print(f"{row[0]:8s} {float(row[1]):8.2f} {float(row[2]):15.3e} {float(row[3]):8.2f}s")
    return 1 if failures else 0


def cmd_check(args: argparse.Namespace) -> int:
    results = checks.run_checks(args.level)
    failed = 0
    for result in results:
        status = "pass" if result.passed else "FAIL"
        print(f"[{status}] {result.name}: {result.detail}")
        failed += not result.passed
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="INI config file; flags override its values")
    sub.add_argument("--image", help="RGB PNG used as ground truth")
    sub.add_argument("--pattern", choices=("checkerboard", "gradient", "random-smooth"))
    sub.add_argument("--size", type=int, help="synthetic image side length")
    sub.add_argument("--sigma", type=float, help="within-channel blur width")
    sub.add_argument("--band", type=int, help="within-channel blur bandwidth")
    sub.add_argument("--noise", type=float, help="noise level (norm ratio)")
    sub.add_argument("--seed", type=int, help="seed for pattern and noise")
    sub.add_argument("--out", help="output directory")


def _add_solver_flags(sub: argparse.ArgumentParser, multi: bool = False) -> None:
    if multi:
        sub.add_argument("--solver", help="comma-separated solvers to run")
    else:
        sub.add_argument("--solver", choices=SOLVER_NAMES)
    sub.add_argument("--restart", type=int, help="GMRES restart length")
    sub.add_argument("--steps", type=int,
                     help="GK/LSQR inner-step cap, GMRES restart cycles")
    sub.add_argument("--tol", type=float, help="relative residual tolerance")
    sub.add_argument("--lambda", dest="lambda_mode",
                     help="'gcv' or a fixed regularization value")
    sub.add_argument("--kopt", help="'lcurve' or a fixed LSQR step count")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctkrylov",
        description="Tensor Krylov color-image deblurring over the cosine product",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="synthesize a blurred and noisy problem")
    _add_common_flags(p_synth)

    p_deblur = sub.add_parser("deblur", help="restore a problem with one solver")
    _add_common_flags(p_deblur)
    _add_solver_flags(p_deblur)

    p_bench = sub.add_parser("bench", help="compare solvers on one problem")
    _add_common_flags(p_bench)
    _add_solver_flags(p_bench, multi=True)

    p_check = sub.add_parser("check", help="run the invariant suites")
    p_check.add_argument("--level", choices=("quick", "full"), default="quick")
    return parser


_COMMANDS = {
    "synth": cmd_synth,
    "deblur": cmd_deblur,
    "bench": cmd_bench,
    "check": cmd_check,
}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except (RuntimeError, ArithmeticError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
