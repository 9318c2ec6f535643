"""Campaign driver: config parsing, (scheme x lambda x seed) fan-out, CSV output.

The configuration file is YAML; every key is validated against the known
schema and unknown keys are rejected so a typo cannot silently fall back
to a default.  Runs compared at the same (lambda, seed) share deployment,
traffic and channel seeds, which makes the per-seed gain columns a paired
comparison.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import yaml

from .channel import ChannelConfig, PathlossModel
from .engine import MetricsReport, Simulation, SimulationRun
from .phy import PhyConfig, PowerConfig, default_mcs_table
from .scheduler import SCHEME_IDS, get_scheme
from .topology import GeometryConfig, generate_deployment
from .traffic import DL, UL, TrafficConfig

__all__ = ["CampaignConfig", "CampaignError", "parse_campaign", "execute_campaign",
           "CSV_SCHEMA_VERSION", "CSV_COLUMNS"]

CSV_SCHEMA_VERSION = "dyntdd-results v1"
CSV_COLUMNS = ("scheme", "lambda_dl", "seed", "direction", "mean_tput_mbps",
               "p5", "p50", "p95", "completed", "unfinished", "gain_vs_s1_pct")

DEFAULT_LAMBDAS = (0.5, 1.5, 2.5, 3.5, 10.0)
DEFAULT_SEEDS = (1, 2, 3, 4)


class CampaignError(ValueError):
    """Configuration file or override rejected."""


@dataclass(frozen=True)
class CampaignConfig:
    schemes: tuple = SCHEME_IDS
    lambdas: tuple = DEFAULT_LAMBDAS
    seeds: tuple = DEFAULT_SEEDS
    duration_ms: int = 22000
    warmup_ms: int = 2000
    output_path: str = "results.csv"
    gains_vs_baseline: bool = True
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    traffic_ratio: float = 2.0
    packet_size_bits: int = 4_000_000
    phy: PhyConfig = field(default_factory=PhyConfig)

    def __post_init__(self):
        if not self.schemes:
            raise CampaignError("schemes: must list at least one scheme")
        for s in self.schemes:
            if s not in SCHEME_IDS:
                raise CampaignError(f"schemes: unknown scheme {s!r}")
        if not self.lambdas or any(l < 0 for l in self.lambdas):
            raise CampaignError("lambdas: need a non-empty list of rates >= 0")
        if not self.seeds:
            raise CampaignError("seeds: must list at least one seed")
        if not self.duration_ms > self.warmup_ms >= 0:
            raise CampaignError("duration_ms must exceed warmup_ms >= 0")
        if self.gains_vs_baseline and "s1" not in self.schemes:
            raise CampaignError(
                "schemes: s1 is required while gains_vs_baseline is enabled")

    def run_for(self, scheme_id: str, lam: float, seed: int) -> SimulationRun:
        return SimulationRun(
            scheme=get_scheme(scheme_id),
            traffic=TrafficConfig(lambda_dl=lam,
                                  dl_ul_arrival_ratio=self.traffic_ratio,
                                  packet_size_bits=self.packet_size_bits),
            geometry=self.geometry,
            channel=self.channel,
            phy=self.phy,
            deployment_seed=seed,
            traffic_seed=seed,
            channel_seed=seed,
            error_seed=seed,
            duration_ms=self.duration_ms,
            warmup_ms=self.warmup_ms,
        )


def _build(kind, data, context):
    """Instantiate a config dataclass from a mapping, rejecting unknown keys."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise CampaignError(f"{context}: expected a mapping")
    known = {f.name for f in fields(kind)}
    unknown = set(data) - known
    if unknown:
        raise CampaignError(f"{context}: unknown key {sorted(unknown)[0]!r}")
    try:
        return kind(**data)
    except (TypeError, ValueError) as exc:
        raise CampaignError(f"{context}: {exc}")


def _parse_channel(data) -> ChannelConfig:
    data = dict(data or {})
    pathloss = data.pop("pathloss", None)
    base = ChannelConfig()
    models = dict(base.pathloss)
    if pathloss is not None:
        if not isinstance(pathloss, dict):
            raise CampaignError("channel.pathloss: expected a mapping")
        for cls, spec in pathloss.items():
            if cls not in models:
                raise CampaignError(f"channel.pathloss: unknown link class {cls!r}")
            models[cls] = _build(PathlossModel, spec, f"channel.pathloss.{cls}")
    shadow = data.pop("shadowing_stddev_db", None)
    shadowing = dict(base.shadowing_stddev_db)
    if shadow is not None:
        for cls, val in shadow.items():
            if cls not in shadowing:
                raise CampaignError(f"channel.shadowing_stddev_db: unknown class {cls!r}")
            shadowing[cls] = float(val)
    cfg = _build(ChannelConfig, data, "channel")
    return replace(cfg, pathloss=models, shadowing_stddev_db=shadowing)


def _parse_phy(data) -> PhyConfig:
    data = dict(data or {})
    power_keys = {f.name for f in fields(PowerConfig)}
    power_data = {k: data.pop(k) for k in list(data) if k in power_keys}
    power = _build(PowerConfig, power_data, "phy")
    grid = data.pop("mcs_grid", None)
    mcs = default_mcs_table(tuple((str(m), float(se)) for m, se in grid)) \
        if grid is not None else default_mcs_table()
    cfg = _build(PhyConfig, data, "phy")
    return replace(cfg, power=power, mcs=mcs)


_TOP_KEYS = {"schemes", "lambdas", "seeds", "duration_ms", "warmup_ms",
             "output_path", "gains_vs_baseline", "geometry", "channel",
             "traffic", "phy"}


def parse_campaign(path=None, overrides=None) -> CampaignConfig:
    """Load the campaign config; missing file keys fall back to defaults."""
    raw = {}
    if path is not None:
        if not os.path.exists(path):
            raise CampaignError(f"config file not found: {path}")
        with open(path) as fh:
            try:
                raw = yaml.safe_load(fh) or {}
            except yaml.YAMLError as exc:
                raise CampaignError(f"malformed config {path}: {exc}")
        if not isinstance(raw, dict):
            raise CampaignError(f"{path}: top level must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise CampaignError(f"unknown top-level key {sorted(unknown)[0]!r}")

    traffic = raw.get("traffic") or {}
    if not isinstance(traffic, dict):
        raise CampaignError("traffic: expected a mapping")
    unknown = set(traffic) - {"dl_ul_arrival_ratio", "packet_size_bits", "lambdas"}
    if unknown:
        raise CampaignError(f"traffic: unknown key {sorted(unknown)[0]!r}")

    values = {
        "schemes": tuple(raw.get("schemes", SCHEME_IDS)),
        "lambdas": tuple(float(l) for l in traffic.get("lambdas", raw.get("lambdas", DEFAULT_LAMBDAS))),
        "seeds": tuple(int(s) for s in raw.get("seeds", DEFAULT_SEEDS)),
        "duration_ms": int(raw.get("duration_ms", 22000)),
        "warmup_ms": int(raw.get("warmup_ms", 2000)),
        "output_path": str(raw.get("output_path", "results.csv")),
        "gains_vs_baseline": bool(raw.get("gains_vs_baseline", True)),
        "geometry": _build(GeometryConfig, raw.get("geometry"), "geometry"),
        "channel": _parse_channel(raw.get("channel")),
        "traffic_ratio": float(traffic.get("dl_ul_arrival_ratio", 2.0)),
        "packet_size_bits": int(traffic.get("packet_size_bits", 4_000_000)),
        "phy": _parse_phy(raw.get("phy")),
    }
    for key, val in (overrides or {}).items():
        if key not in values:
            raise CampaignError(f"unknown override {key!r}")
        if val is not None:
            values[key] = val
    try:
        return CampaignConfig(**values)
    except CampaignError:
        raise
    except (TypeError, ValueError) as exc:
        raise CampaignError(str(exc))


# per-process cache so a pool worker builds each deployment and gain table once
_WORKER_CACHE: dict = {}


def _execute_one(args):
    cfg, scheme_id, lam, seed = args
    sim = cfg.run_for(scheme_id, lam, seed)
    key = (repr(cfg.geometry), repr(cfg.channel), seed)
    if key not in _WORKER_CACHE:
        deployment = generate_deployment(cfg.geometry, seed)
        from .channel import build_gain_table
        _WORKER_CACHE[key] = (deployment, build_gain_table(deployment, cfg.channel, seed))
    deployment, gains = _WORKER_CACHE[key]
    report = Simulation(sim, deployment=deployment, gains=gains).run()
    return (scheme_id, lam, seed), report


def execute_campaign(cfg: CampaignConfig, jobs: int | None = None,
                     verbose: bool = False):
    """Run the full grid, write the results CSV, return {key: MetricsReport}."""
    keys = [(cfg, s, lam, seed) for s in cfg.schemes for lam in cfg.lambdas
            for seed in cfg.seeds]
    jobs = jobs or os.cpu_count() or 1
    reports: dict = {}
    if jobs <= 1 or len(keys) == 1:
        for args in keys:
            key, report = _execute_one(args)
            reports[key] = report
            if verbose:
                _progress(key)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for key, report in pool.map(_execute_one, keys):
                reports[key] = report
                if verbose:
                    _progress(key)
    _write_csv(cfg, reports, cfg.output_path)
    return reports


def _progress(key):
    scheme_id, lam, seed = key
    print(f"done: scheme={scheme_id} lambda={lam:g} seed={seed}", flush=True)


def _write_csv(cfg: CampaignConfig, reports: dict, path) -> None:
    lines = [f"# {CSV_SCHEMA_VERSION}", ",".join(CSV_COLUMNS)]
    for scheme_id in cfg.schemes:
        for lam in cfg.lambdas:
            for seed in cfg.seeds:
                report = reports[(scheme_id, lam, seed)]
                base = reports.get(("s1", lam, seed))
                for direction in (DL, UL):
                    stats = report.directions[direction]
                    if not cfg.gains_vs_baseline:
                        gain = ""
                    elif scheme_id == "s1":
                        gain = "0.000000"
                    else:
                        base_mean = base.directions[direction].mean_bps
                        if base_mean == 0.0:
                            raise ZeroDivisionError(
                                f"baseline mean is zero at lambda={lam}, seed={seed}")
                        gain = f"{(stats.mean_bps / base_mean - 1.0) * 100.0:.6f}"
                    lines.append(",".join([
                        scheme_id,
                        f"{lam:g}",
                        str(seed),
                        direction,
                        f"{stats.mean_bps / 1e6:.6f}",
                        f"{stats.p5_bps / 1e6:.6f}",
                        f"{stats.p50_bps / 1e6:.6f}",
                        f"{stats.p95_bps / 1e6:.6f}",
                        str(stats.completed),
                        str(stats.unfinished),
                        gain,
                    ]))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
