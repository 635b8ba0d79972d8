"""Command-line front end: ``mclds run``, ``mclds sweep`` and ``mclds validate``.

Exit codes: 0 success, 1 invalid configuration or arguments, 2 runtime failure.
The sweep worker count comes from the ``MCLDS_WORKERS`` environment variable
(default 1).
"""
from __future__ import annotations

import argparse
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import RULES, ConfigError, ScenarioConfig, check, dumps, parse_config
from .export import METRICS, write_metadata, write_result, write_rows
from .simulator import run_simulation
from .streams import point_seed

SWEEP_VARIABLES = ("tx_snr_db", "iar", "iaf", "error_prob")
WORKERS_ENV = "MCLDS_WORKERS"

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple[float, ...]
    seeds_per_point: int = 20
    rules: tuple[str, ...] = RULES

    def problems(self) -> list[str]:
        out = []
        if self.variable not in SWEEP_VARIABLES:
            out.append(f"sweep variable must be one of {', '.join(SWEEP_VARIABLES)}")
        if not self.values:
            out.append("sweep needs at least one value")
        if self.seeds_per_point < 1:
            out.append("seeds_per_point must be >= 1")
        bad = [r for r in self.rules if r not in RULES]
        if bad or not self.rules:
            out.append(f"rules must be a non-empty subset of {', '.join(RULES)}")
        return out


def _cycle(cfg: ScenarioConfig) -> tuple[np.ndarray, np.ndarray]:
    on = np.asarray(cfg.per_channel(cfg.activity.mean_on))
    off = np.asarray(cfg.per_channel(cfg.activity.mean_off))
    return on, off


def _on_off(cfg: ScenarioConfig, on: np.ndarray, off: np.ndarray) -> ScenarioConfig:
    def pack(v: np.ndarray):
        return float(v[0]) if np.all(v == v[0]) else tuple(float(x) for x in v)

    return replace(cfg, activity=replace(cfg.activity, mean_on=pack(on), mean_off=pack(off)))


def apply_sweep_value(cfg: ScenarioConfig, variable: str, value: float) -> ScenarioConfig:
    """Config with one swept quantity set.

    IAR is mean ON over mean OFF duration and IAF is ON/OFF cycles per second,
    ``1 / (mean_on + mean_off)``; setting one keeps the other at its current value.
    """
    value = float(value)
    if variable == "tx_snr_db":
        return replace(cfg, radio=replace(cfg.radio, tx_snr_db=value))
    if variable == "error_prob":
        return replace(cfg, database=replace(cfg.database, error_prob=value))
    on, off = _cycle(cfg)
    if variable == "iar":
        period = on + off
        return _on_off(cfg, period * value / (1 + value), period / (1 + value))
    if variable == "iaf":
        ratio = on / off
        period = 1.0 / value
        return _on_off(cfg, period * ratio / (1 + ratio), period / (1 + ratio))
    raise ValueError(f"unknown sweep variable {variable!r}")


def _point_job(args) -> tuple[int, int, np.ndarray | None, str | None]:
    cfg, p, rep = args
    try:
        res = run_simulation(cfg, record_trace=False)
        return p, rep, res.summary, None
    except Exception as exc:  # reported per point; other points carry on
        return p, rep, None, f"{type(exc).__name__}: {exc}"


def sweep_configs(cfg: ScenarioConfig, spec: SweepSpec) -> list[tuple[ScenarioConfig, int, int]]:
    """(config, point index, replicate) for every run of the sweep, seeds keyed on value."""
    jobs = []
    for p, value in enumerate(spec.values):
        point = apply_sweep_value(cfg, spec.variable, value)
        for rep in range(spec.seeds_per_point):
            jobs.append((check(point.with_seed(point_seed(cfg.seed, float(value), rep))), p, rep))
    return jobs


def run_sweep(cfg: ScenarioConfig, spec: SweepSpec, workers: int = 1, on_point=None
              ) -> tuple[np.ndarray, list[tuple[int, int, str]]]:
    """All runs of a sweep.

    Returns ``(summaries, failures)``: summaries has shape
    (points, seeds, len(RULES), len(METRICS)) with NaN for failed runs.
    ``on_point(p, block)`` is called as each point completes.
    """
    jobs = sweep_configs(cfg, spec)
    out = np.full((len(spec.values), spec.seeds_per_point, len(RULES), len(METRICS)), np.nan)
    failures: list[tuple[int, int, str]] = []
    remaining = [spec.seeds_per_point] * len(spec.values)

    def collect(p, rep, summary, err):
        if err is None:
            out[p, rep] = summary
        else:
            failures.append((p, rep, err))
        remaining[p] -= 1
        if remaining[p] == 0 and on_point is not None:
            on_point(p, out[p])

    if workers <= 1:
        for job in jobs:
            collect(*_point_job(job))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for result in pool.map(_point_job, jobs):
                collect(*result)
    return out, failures


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError([f"{WORKERS_ENV} must be an integer, got {raw!r}"]) from None


def _parse_values(text: str) -> tuple[float, ...]:
    """Comma list ``a,b,c`` or inclusive range ``start:stop:step``."""
    text = text.strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] == 0:
            raise ValueError("range must be start:stop:step with a nonzero step")
        start, stop, step = parts
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(start + i * step) for i in range(max(n, 0)))
    return tuple(float(x) for x in text.split(",") if x.strip())


def _parse_rules(text: str | None) -> tuple[str, ...]:
    if not text:
        return RULES
    rules = tuple(r.strip() for r in text.split(",") if r.strip())
    bad = [r for r in rules if r not in RULES]
    if bad or not rules:
        raise ConfigError([f"unknown rule(s) {', '.join(bad) or '(none)'}; "
                           f"choose from {', '.join(RULES)}"])
    return rules


def _load(args) -> ScenarioConfig:
    try:
        cfg = parse_config(args.config) if args.config else ScenarioConfig()
    except OSError as exc:
        raise ConfigError([f"{args.config}: {exc.strerror or exc}"]) from None
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if getattr(args, "horizon", None) is not None:
        cfg = replace(cfg, horizon=args.horizon)
    return check(cfg)


def _prepare_out(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write-test"
    probe.write_text("")
    probe.unlink()


def cmd_run(cfg: ScenarioConfig, out: Path, rules: Sequence[str] = RULES, trace: bool = True) -> int:
    try:
        _prepare_out(out)
    except OSError as exc:
        print(f"error: cannot write to {out}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        result = run_simulation(cfg, record_trace=trace)
        write_result(out, result, rules, trace=trace)
        write_metadata(out / "metadata.toml", cfg, command="run", rules=list(rules))
    except OSError as exc:
        print(f"error: writing {exc.filename or out}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:
        traceback.print_exc()
        print(f"error: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {out}")
    return EXIT_OK


def cmd_sweep(cfg: ScenarioConfig, spec: SweepSpec, out: Path, workers: int = 1) -> int:
    problems = spec.problems()
    if problems:
        for p in problems:
            print(f"error: {p}", file=sys.stderr)
        return EXIT_INVALID
    try:
        _prepare_out(out)
        (out / "points").mkdir(exist_ok=True)
    except OSError as exc:
        print(f"error: cannot write to {out}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        for value in spec.values:
            check(apply_sweep_value(cfg, spec.variable, value))
    except (ConfigError, ValueError) as exc:
        print(f"error: sweep value {value!r}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    rule_idx = [RULES.index(r) for r in spec.rules]

    def save_point(p: int, block: np.ndarray) -> None:
        # point-local file, written as soon as the point finishes
        rows = [[spec.values[p], rep, r, *block[rep, i]]
                for rep in range(spec.seeds_per_point) for r, i in zip(spec.rules, rule_idx)]
        write_rows(out / "points" / f"point_{p:03d}.csv",
                   [spec.variable, "replicate", "rule", *METRICS], rows)

    summaries, failures = run_sweep(cfg, spec, workers, on_point=save_point)
    for m, metric in enumerate(METRICS):
        for r, i in zip(spec.rules, rule_idx):
            rows = []
            for p, value in enumerate(spec.values):
                vals = summaries[p, :, i, m]
                vals = vals[~np.isnan(vals)]
                mean = float(vals.mean()) if vals.size else np.nan
                std = float(vals.std(ddof=1)) if vals.size > 1 else (0.0 if vals.size else np.nan)
                rows.append([value, mean, std, vals.size])
            write_rows(out / f"sweep_{metric}_{r}.csv", [spec.variable, "mean", "std", "n"], rows)
    write_metadata(out / "metadata.toml", cfg, command="sweep", variable=spec.variable,
                   values=list(spec.values), seeds_per_point=spec.seeds_per_point,
                   rules=list(spec.rules))
    if failures:
        write_rows(out / "failures.csv", [spec.variable, "replicate", "error"],
                   [[spec.values[p], rep, err] for p, rep, err in failures])
        print(f"error: {len(failures)} sweep run(s) failed; see {out / 'failures.csv'}",
              file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mclds", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, help="scenario TOML file (defaults if omitted)")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--horizon", type=int, help="override the number of superframes")

    run = sub.add_parser("run", help="one simulation, full CSV output")
    common(run)
    run.add_argument("--out", type=Path, required=True)
    run.add_argument("--rules", help="comma-separated subset of " + ",".join(RULES))
    run.add_argument("--no-trace", action="store_true", help="skip the per-QP trace CSV")

    sw = sub.add_parser("sweep", help="parameter sweep, mean/std per (metric, rule)")
    common(sw)
    sw.add_argument("--out", type=Path, required=True)
    sw.add_argument("--rules", help="comma-separated subset of " + ",".join(RULES))
    sw.add_argument("--variable", required=True, choices=SWEEP_VARIABLES)
    sw.add_argument("--values", required=True, help="a,b,c or start:stop:step (inclusive)")
    sw.add_argument("--seeds-per-point", type=int, default=20)

    val = sub.add_parser("validate", help="check a config and print it with defaults resolved")
    common(val)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        if args.command == "validate":
            sys.stdout.write(dumps(cfg))
            return EXIT_OK
        rules = _parse_rules(args.rules)
        if args.command == "run":
            return cmd_run(cfg, args.out, rules, trace=not args.no_trace)
        try:
            values = _parse_values(args.values)
        except ValueError as exc:
            raise ConfigError([f"--values: {exc}"]) from None
        spec = SweepSpec(args.variable, values, args.seeds_per_point, rules)
        return cmd_sweep(cfg, spec, args.out, _workers())
    except ConfigError as exc:
        for p in exc.problems:
            print(f"error: {p}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
