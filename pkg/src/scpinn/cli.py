"""Command line entry point.

    scpinn solve   <config>      train a forward problem
    scpinn inverse <config>      train network and unknown lambda jointly
    scpinn bench   [flags]       P.D. vs jet derivative timings as CSV
    scpinn sweep   <dir>         run every *.cfg in a directory

Exit codes: 0 success, 2 configuration error, 3 divergence.  Relative output
directories are resolved against ``$SCPINN_OUTPUT_ROOT`` (default: cwd).
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import bench_derivatives, rows_to_csv
from .config import ConfigError, RunConfig, load_config
from .nn import forward
from .optim import TrainReport, train, train_inverse
from .problems import equidistant_grid

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED = 0, 2, 3
OUTPUT_ROOT_ENV = "SCPINN_OUTPUT_ROOT"

log = logging.getLogger("scpinn")


def _g(x) -> str:
    return f"{float(x):.17g}"


def resolve_output(cfg: RunConfig, override: str | None = None) -> Path:
    out = Path(override or cfg.output_dir)
    if not out.is_absolute():
        out = Path(os.environ.get(OUTPUT_ROOT_ENV, ".")) / out
    return out


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_outputs(cfg: RunConfig, problem, arch, report: TrainReport, out: Path, inverse: bool) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    loss_path = out / "loss.csv"
    _write_csv(loss_path, ("epoch", "total", "r", "s", "wall_ms"),
               ([i, _g(t), _g(r), _g(s), _g(1e3 * w)]
                for i, (t, r, s, w) in enumerate(zip(report.total, report.r, report.s, report.wall))))

    solution_path = out / "solution.csv"
    pts = equidistant_grid(problem.dim, cfg.eval_n)
    theta = report.theta
    u_hat = forward(arch, theta, pts) if np.all(np.isfinite(theta)) else np.full(len(pts), np.nan)
    u_gt = problem.solution(pts) if problem.solution is not None else np.full(len(pts), np.nan)
    header = [f"x{i + 1}" for i in range(problem.dim)] + ["u_hat", "u_gt", "abs_err"]
    _write_csv(solution_path, header,
               ([*map(_g, p), _g(a), _g(b), _g(abs(a - b))] for p, a, b in zip(pts, u_hat, u_gt)))

    record = {
        "config": cfg.to_dict(),
        "eps1": report.metrics.eps1 if report.metrics else None,
        "eps_inf": report.metrics.eps_inf if report.metrics else None,
        "eps_lambda": report.metrics.eps_lambda if report.metrics else None,
        "final_loss": report.final_loss,
        "final_lambda": report.final_lambda,
        "epochs_run": report.epochs,
        "diverged": report.diverged,
        "wall_time": float(sum(report.wall)),
        "median_epoch_ms": 1e3 * report.median_epoch_time() if report.wall else None,
        "loss_curve": loss_path.name,
        "solution": solution_path.name,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    if inverse:
        lam_path = out / "lambda.csv"
        lams = report.lam + ([report.final_lambda] if report.final_lambda is not None else [])
        _write_csv(lam_path, ("epoch", "lambda", "eps_lambda"),
                   ([i, _g(v), _g(abs(v - problem.lam_gt))] for i, v in enumerate(lams)))
        record["lambda_curve"] = lam_path.name
    (out / "config.cfg").write_text(cfg.to_text(), encoding="utf-8")
    with open(out / "results.json", "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, allow_nan=True)
        fh.write("\n")
    return record


def run_config(cfg: RunConfig, inverse: bool, output: str | None = None) -> int:
    problem = cfg.build_problem()
    if inverse and not problem.inverse:
        raise ConfigError(f"{problem.name} is not an inverse problem")
    if not inverse and problem.inverse:
        raise ConfigError(f"{problem.name} is an inverse problem; use 'inverse'")
    arch = cfg.architecture(problem.dim)
    spec = cfg.loss_spec()
    tcfg = cfg.train_config()
    log.info("training %s with %s loss for %d epochs", problem.name, spec.kind, tcfg.epochs)
    if inverse:
        report = train_inverse(problem, spec, arch, tcfg, cfg.lambda0)
    else:
        report = train(problem, spec, arch, tcfg)
    out = resolve_output(cfg, output)
    record = _write_outputs(cfg, problem, arch, report, out, inverse)
    log.info("eps1=%s eps_inf=%s eps_lambda=%s -> %s", record["eps1"], record["eps_inf"],
             record["eps_lambda"], out)
    return EXIT_DIVERGED if report.diverged else EXIT_OK


def _cmd_train(args, inverse: bool) -> int:
    try:
        cfg = load_config(args.config)
        return run_config(cfg, inverse, args.output)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _cmd_bench(args) -> int:
    try:
        rows = bench_derivatives(args.hidden, args.points, args.orders, args.repetitions, args.activation, args.seed)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    directory = Path(args.directory)
    configs = sorted(directory.glob("*.cfg"))
    if not configs:
        print(f"config error: no *.cfg files in {directory}", file=sys.stderr)
        return EXIT_CONFIG
    worst = EXIT_OK
    for path in configs:
        try:
            cfg = load_config(path)
            inverse = cfg.build_problem().inverse
            out = Path(args.output or cfg.output_dir) / path.stem
            code = run_config(cfg, inverse, str(out))
        except ConfigError as exc:
            print(f"config error in {path.name}: {exc}", file=sys.stderr)
            code = EXIT_CONFIG
        print(f"{path.name}: exit {code}")
        worst = max(worst, code)
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scpinn", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("solve", "train a forward problem"), ("inverse", "train network and unknown lambda")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config")
        p.add_argument("-o", "--output", help="output directory (overrides output_dir)")
    p = sub.add_parser("bench", help="derivative cost: polynomial differentiation vs jets")
    p.add_argument("--hidden", type=int, nargs="+", default=[50, 50, 50, 50])
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--orders", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--activation", default="sin", choices=["sin", "tanh"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p = sub.add_parser("sweep", help="run every *.cfg in a directory")
    p.add_argument("directory")
    p.add_argument("-o", "--output", help="parent directory for the per-config outputs")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "solve":
        return _cmd_train(args, inverse=False)
    if args.command == "inverse":
        return _cmd_train(args, inverse=True)
    if args.command == "bench":
        return _cmd_bench(args)
    return _cmd_sweep(args)


if __name__ == "__main__":
    sys.exit(main())
