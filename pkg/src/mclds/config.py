"""Scenario configuration: typed sections, defaults, validation and TOML I/O.

A scenario file is flat, sectioned TOML.  Every section maps onto one frozen
dataclass below; unknown keys are rejected and every validation error names
the offending ``section.key`` (with the source line when it can be located).
"""
from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence

import tomli
import tomli_w

PerChannel = float | tuple[float, ...]


class ConfigError(ValueError):
    """Raised for malformed or invalid scenario files; carries every problem found."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


@dataclass(frozen=True)
class IncumbentStation:
    position: tuple[float, float]
    channel: int
    coverage_radius: float
    tx_power: float = 1.0
    keepout: bool = False


@dataclass(frozen=True)
class IncumbentConfig:
    """Stations listed explicitly, or ``count`` stations placed at random."""

    count: int = 15
    coverage_radius: tuple[float, float] = (40_000.0, 80_000.0)
    tx_power: float = 1.0
    stations: tuple[IncumbentStation, ...] = ()


@dataclass(frozen=True)
class ActivityConfig:
    # scalars apply to every channel; tuples give one value per channel
    mean_on: PerChannel = 2.0
    mean_off: PerChannel = 4.0
    burstiness: PerChannel = 0.5


@dataclass(frozen=True)
class RadioConfig:
    noise_power: float = 1e-13
    path_loss_exponent: float = 4.0
    reference_distance: float = 1_000.0
    shadowing_sigma: float = 8.0
    shadowing_corr_distance: float = 0.125
    slow_fading_hold: int = 8
    samples_per_sensing: int = 50
    snr_min: float | None = None
    pfa_target: float = 0.05
    tx_snr_db: float | None = 50.0
    report_tx_snr_db: float = 80.0
    report_threshold_db: float = -3.0
    formula_variant: str = "printed"


@dataclass(frozen=True)
class ClassifierConfig:
    ridge: float = 1e-3
    tol: float = 1e-8
    max_iter: int = 200
    train_window: int = 100
    min_samples: int = 20
    refit_every: int = 100
    refit_error_factor: float = 2.0
    labels: str = "database"
    rate_method: str = "empirical"
    prior_h0: float | None = None


@dataclass(frozen=True)
class FusionConfig:
    gamma: PerChannel = 1.0
    zeta: PerChannel = 2.0
    alpha: float = 0.9
    historic_count: int = 12
    adapt_a: float = 8.0
    adapt_b: float = 12.0
    adapt_c: float = 0.5
    adapt_d: float = 0.4
    driving_rule: str = "MC-LDS"
    vote_quorum: int | None = None
    rep_gain_norm: str = "capped"


@dataclass(frozen=True)
class ChannelConfig:
    operating_channels: int = 1
    backup_size: int = 2
    obs_fraction: float = 1.0
    promotion_idle: float = 30.0
    max_sensing_gap: float = 6.0
    moving_time: float = 2.0
    switching: bool = True


@dataclass(frozen=True)
class ClockConfig:
    frame_len: float = 0.010
    frames_per_superframe: int = 16
    qp_period_frames: int = 2
    escalation: bool = True


@dataclass(frozen=True)
class DatabaseConfig:
    error_prob: float = 0.03
    staleness: float = 0.0


@dataclass(frozen=True)
class MetricsConfig:
    window: int = 200
    limit_md: float = 0.1
    limit_fa: float = 0.1
    literal_eq13: bool = False
    chi2_mode: str = "counts"
    snapshot_every: int = 10
    burn_in: int = 20
    feedback_reference: str = "truth"


@dataclass(frozen=True)
class FaultConfig:
    # (cell, cpe) pairs, both 1-based; such CPEs always report the negated truth
    byzantine: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class ScenarioConfig:
    num_cells: int = 12
    num_channels: int = 10
    cell_radius: float = 30_000.0
    cpes_per_cell: int = 10
    seed: int = 0
    horizon: int = 400
    incumbents: IncumbentConfig = field(default_factory=IncumbentConfig)
    activity: ActivityConfig = field(default_factory=ActivityConfig)
    radio: RadioConfig = field(default_factory=RadioConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    channels: ChannelConfig = field(default_factory=ChannelConfig)
    clock: ClockConfig = field(default_factory=ClockConfig)
    database: DatabaseConfig = field(default_factory=DatabaseConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    faults: FaultConfig = field(default_factory=FaultConfig)

    def per_channel(self, value: PerChannel) -> tuple[float, ...]:
        return expand_per_channel(value, self.num_channels)

    def with_seed(self, seed: int) -> ScenarioConfig:
        return replace(self, seed=int(seed))


SECTIONS = {
    "incumbents": IncumbentConfig,
    "activity": ActivityConfig,
    "radio": RadioConfig,
    "classifier": ClassifierConfig,
    "fusion": FusionConfig,
    "channels": ChannelConfig,
    "clock": ClockConfig,
    "database": DatabaseConfig,
    "metrics": MetricsConfig,
    "faults": FaultConfig,
}
SCENARIO_KEYS = ("num_cells", "num_channels", "cell_radius", "cpes_per_cell", "seed", "horizon")

RULES = ("MC-LDS", "MC-LDS-adaptive", "AND", "OR", "VOTING")


def expand_per_channel(value: PerChannel, num_channels: int) -> tuple[float, ...]:
    if isinstance(value, (tuple, list)):
        if len(value) != num_channels:
            raise ValueError(f"expected {num_channels} per-channel values, got {len(value)}")
        return tuple(float(v) for v in value)
    return (float(value),) * num_channels


# -- validation ---------------------------------------------------------------

def validate(cfg: ScenarioConfig) -> list[str]:
    """Return every constraint violation as ``section.key: message``."""
    errs: list[str] = []

    def need(ok: bool, key: str, msg: str) -> None:
        if not ok:
            errs.append(f"{key}: {msg}")

    B = cfg.num_channels
    need(cfg.num_cells >= 1, "scenario.num_cells", "must be >= 1")
    need(B >= 1, "scenario.num_channels", "must be >= 1")
    need(cfg.cell_radius > 0, "scenario.cell_radius", "must be > 0")
    need(cfg.cpes_per_cell >= 1, "scenario.cpes_per_cell", "must be >= 1")
    need(cfg.horizon >= 0, "scenario.horizon", "must be >= 0")
    need(0 <= cfg.seed < 2**64, "scenario.seed", "must be a 64-bit unsigned integer")

    inc = cfg.incumbents
    need(inc.count >= 0, "incumbents.count", "must be >= 0")
    lo, hi = inc.coverage_radius
    need(0 < lo <= hi, "incumbents.coverage_radius", "must be [min, max] with 0 < min <= max")
    need(inc.tx_power > 0, "incumbents.tx_power", "must be > 0")
    for n, st in enumerate(inc.stations):
        need(1 <= st.channel <= B, f"incumbents.stations[{n}].channel", f"must lie in [1, {B}]")
        need(st.coverage_radius > 0, f"incumbents.stations[{n}].coverage_radius", "must be > 0")
        need(st.tx_power > 0, f"incumbents.stations[{n}].tx_power", "must be > 0")

    act = cfg.activity
    for key in ("mean_on", "mean_off", "burstiness"):
        try:
            vals = expand_per_channel(getattr(act, key), B)
        except ValueError as exc:
            errs.append(f"activity.{key}: {exc}")
            continue
        if key == "burstiness":
            need(all(0 <= v <= 1 for v in vals), f"activity.{key}", "must lie in [0, 1]")
        else:
            need(all(v > 0 for v in vals), f"activity.{key}", "must be > 0")

    r = cfg.radio
    need(r.noise_power > 0, "radio.noise_power", "must be > 0")
    need(r.samples_per_sensing >= 1, "radio.samples_per_sensing", "must be >= 1")
    need(r.slow_fading_hold >= 1, "radio.slow_fading_hold", "must be >= 1")
    need(r.reference_distance > 0, "radio.reference_distance", "must be > 0")
    need(r.shadowing_sigma >= 0, "radio.shadowing_sigma", "must be >= 0")
    need(r.shadowing_corr_distance >= 0, "radio.shadowing_corr_distance", "must be >= 0")
    need(r.snr_min is None or r.snr_min > 0, "radio.snr_min", "must be > 0")
    need(0 < r.pfa_target < 1, "radio.pfa_target", "must lie in (0, 1)")
    need(r.formula_variant in ("printed", "standard"), "radio.formula_variant",
         "must be 'printed' or 'standard'")

    c = cfg.classifier
    need(c.ridge >= 0, "classifier.ridge", "must be >= 0")
    need(c.tol > 0, "classifier.tol", "must be > 0")
    need(c.max_iter >= 1, "classifier.max_iter", "must be >= 1")
    need(c.train_window >= 2, "classifier.train_window", "must be >= 2")
    need(c.min_samples >= 2, "classifier.min_samples", "must be >= 2")
    need(c.refit_every >= 1, "classifier.refit_every", "must be >= 1")
    need(c.refit_error_factor > 1, "classifier.refit_error_factor", "must be > 1")
    need(c.labels in ("database", "truth"), "classifier.labels", "must be 'database' or 'truth'")
    need(c.rate_method in ("empirical", "analytic"), "classifier.rate_method",
         "must be 'empirical' or 'analytic'")
    need(c.prior_h0 is None or 0 <= c.prior_h0 <= 1, "classifier.prior_h0", "must lie in [0, 1]")

    f = cfg.fusion
    try:
        g = expand_per_channel(f.gamma, B)
        z = expand_per_channel(f.zeta, B)
        bad = [k for k, (gk, zk) in enumerate(zip(g, z), start=1) if not 0 < gk < zk]
        if bad:
            where = "every channel" if len(bad) == B else "channels " + ", ".join(map(str, bad))
            need(False, "fusion.gamma", f"must satisfy 0 < gamma < zeta ({where}: "
                 f"gamma={g[bad[0] - 1]:g}, zeta={z[bad[0] - 1]:g})")
    except ValueError as exc:
        errs.append(f"fusion.gamma: {exc}")
    need(0 < f.alpha < 1, "fusion.alpha", "must lie in (0, 1)")
    need(f.historic_count >= 1, "fusion.historic_count", "must be >= 1")
    errs.extend(f"fusion.adapt: {m}" for m in adapt_constant_problems(
        f.adapt_a, f.adapt_b, f.adapt_c, f.adapt_d))
    need(f.driving_rule in RULES, "fusion.driving_rule", f"must be one of {', '.join(RULES)}")
    need(f.vote_quorum is None or f.vote_quorum >= 1, "fusion.vote_quorum", "must be >= 1")
    need(f.rep_gain_norm in ("none", "cell_mean", "capped"), "fusion.rep_gain_norm",
         "must be 'none', 'cell_mean' or 'capped'")

    ch = cfg.channels
    need(ch.operating_channels >= 1, "channels.operating_channels", "must be >= 1")
    need(ch.backup_size >= 0, "channels.backup_size", "must be >= 0")
    need(0 <= ch.obs_fraction <= 1, "channels.obs_fraction", "must lie in [0, 1]")
    need(ch.promotion_idle > 0, "channels.promotion_idle", "must be > 0")
    need(ch.max_sensing_gap > 0, "channels.max_sensing_gap", "must be > 0")
    need(ch.moving_time > 0, "channels.moving_time", "must be > 0")

    ck = cfg.clock
    need(ck.frame_len > 0, "clock.frame_len", "must be > 0")
    need(ck.frames_per_superframe >= 1, "clock.frames_per_superframe", "must be >= 1")
    need(ck.qp_period_frames >= 1
         and ck.frames_per_superframe % max(ck.qp_period_frames, 1) == 0,
         "clock.qp_period_frames", "must divide frames_per_superframe")

    db = cfg.database
    need(0 <= db.error_prob <= 1, "database.error_prob", "must lie in [0, 1]")
    need(db.staleness >= 0, "database.staleness", "must be >= 0")

    m = cfg.metrics
    need(m.window >= 1, "metrics.window", "must be >= 1")
    need(0 <= m.limit_md <= 1, "metrics.limit_md", "must lie in [0, 1]")
    need(0 <= m.limit_fa <= 1, "metrics.limit_fa", "must lie in [0, 1]")
    need(m.chi2_mode in ("counts", "literal"), "metrics.chi2_mode", "must be 'counts' or 'literal'")
    need(m.snapshot_every >= 1, "metrics.snapshot_every", "must be >= 1")
    need(m.burn_in >= 0, "metrics.burn_in", "must be >= 0")
    need(m.feedback_reference in ("truth", "database"), "metrics.feedback_reference",
         "must be 'truth' or 'database'")

    for n, pair in enumerate(cfg.faults.byzantine):
        ok = (len(pair) == 2 and 1 <= pair[0] <= cfg.num_cells
              and 1 <= pair[1] <= cfg.cpes_per_cell)
        need(ok, f"faults.byzantine[{n}]", "must be [cell, cpe] with 1-based indices in range")
    return errs


def adapt_constant_problems(a: float, b: float, c: float, d: float) -> list[str]:
    out = []
    if min(a, b, c, d) <= 0:
        out.append("a, b, c, d must all be positive")
    if not b - a > 1:
        out.append(f"requires b - a > 1 (got a={a:g}, b={b:g})")
    if not c + d < 1:
        out.append(f"requires c + d < 1 (got c={c:g}, d={d:g})")
    return out


def check(cfg: ScenarioConfig, text: str | None = None) -> ScenarioConfig:
    errs = validate(cfg)
    if errs:
        if text is not None:
            errs = [_with_line(e, text) for e in errs]
        raise ConfigError(errs)
    return cfg


# -- TOML I/O -----------------------------------------------------------------

def _tuplify(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(_tuplify(v) for v in value)
    return value


def _build(cls: type, data: dict[str, Any], where: str, errs: list[str]) -> Any:
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            errs.append(f"{where}.{key}: unknown key")
            continue
        if cls is IncumbentConfig and key == "stations":
            stations = []
            for n, st in enumerate(value):
                st = dict(st)
                if "position" in st:
                    st["position"] = tuple(float(x) for x in st["position"])
                stations.append(_build(IncumbentStation, st, f"{where}.stations[{n}]", errs))
            kwargs[key] = tuple(s for s in stations if s is not None)
            continue
        kwargs[key] = _tuplify(value)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        errs.append(f"{where}: {exc}")
        return None


def from_dict(data: dict[str, Any], text: str | None = None) -> ScenarioConfig:
    errs: list[str] = []
    top = dict(data.get("scenario", {}))
    for key in data:
        if key in SCENARIO_KEYS:  # scenario keys may also sit at the top of the file
            if key in top:
                errs.append(f"scenario.{key}: given both at top level and in [scenario]")
            top[key] = data[key]
        elif key != "scenario" and key not in SECTIONS:
            errs.append(f"{key}: unknown section")
    for key in top:
        if key not in SCENARIO_KEYS:
            errs.append(f"scenario.{key}: unknown key")
    kwargs = {k: v for k, v in top.items() if k in SCENARIO_KEYS}
    for name, cls in SECTIONS.items():
        if name in data:
            kwargs[name] = _build(cls, data[name], name, errs)
    if errs:
        raise ConfigError([_with_line(e, text) for e in errs] if text else errs)
    try:
        cfg = ScenarioConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError([str(exc)]) from None
    return check(cfg, text)


def loads(text: str) -> ScenarioConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError([f"parse error: {exc}"]) from None
    return from_dict(data, text)


def parse_config(path: str | Path) -> ScenarioConfig:
    """Load and validate a scenario file; defaults fill every omitted key."""
    path = Path(path)
    return loads(path.read_text())


def to_dict(cfg: ScenarioConfig) -> dict[str, Any]:
    def clean(obj: Any) -> Any:
        if dataclasses.is_dataclass(obj):
            return {f.name: clean(getattr(obj, f.name)) for f in fields(obj)
                    if getattr(obj, f.name) is not None}
        if isinstance(obj, (tuple, list)):
            return [clean(v) for v in obj]
        return obj

    out: dict[str, Any] = {"scenario": {k: getattr(cfg, k) for k in SCENARIO_KEYS}}
    for name in SECTIONS:
        out[name] = clean(getattr(cfg, name))
    return out


def dumps(cfg: ScenarioConfig) -> str:
    """Resolved config (every default spelled out) as TOML text."""
    return tomli_w.dumps(to_dict(cfg))


def _with_line(err: str, text: str | None) -> str:
    """Prefix an error with ``line N`` when its key can be found in ``text``."""
    if not text:
        return err
    head = err.split(":", 1)[0]
    parts = re.sub(r"\[\d+\]", "", head).split(".")
    section, key = (parts[0], parts[1]) if len(parts) >= 2 else (parts[0], None)
    current = "scenario"
    for n, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s.startswith("["):
            current = s.strip("[]").split(".")[0].strip()
            if key is None and current == section:
                return f"line {n}: {err}"
            continue
        if key and current == section and re.match(rf"{re.escape(key)}\s*=", s):
            return f"line {n}: {err}"
    return err
