"""Large-scale link gains and small-scale MIMO fading.

Three link classes feed the interference computation: BS<->UE, BS<->BS and
UE<->UE.  Large-scale gain combines a log-distance pathloss, a log-normal
shadowing draw shared by reciprocal links and a minimum-coupling-loss
floor.  Small-scale fading is spatially white flat Rayleigh, redrawn every
subframe by default.

Node indexing convention used by the gain table and the engine: picocell
base stations occupy indices 0..n_picos-1, UEs follow at n_picos..n-1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .topology import Deployment, wraparound_distance_matrix

__all__ = [
    "PathlossModel",
    "ChannelConfig",
    "LinkGainTable",
    "FadingState",
    "large_scale_gain",
    "draw_shadowing",
    "build_gain_table",
    "channel_matrix",
    "noise_power_w",
    "export_loss_csv",
]

LINK_CLASSES = ("bs_ue", "bs_bs", "ue_ue")

BS_ANTENNAS = 4
UE_ANTENNAS = 2


@dataclass(frozen=True)
class PathlossModel:
    """loss_db(d) = intercept + slope * log10(d_km), with an optional
    close-in branch below breakpoint_m and an MCL floor applied after
    shadowing."""

    intercept_db: float
    slope_db_per_decade: float
    min_coupling_loss_db: float = 45.0
    close_breakpoint_m: float | None = None
    close_intercept_db: float | None = None
    close_slope_db_per_decade: float | None = None

    def __post_init__(self):
        if self.slope_db_per_decade <= 0:
            raise ValueError("pathloss slope must be positive")

    def loss_db(self, distance_m):
        """Distance-only loss in dB (no shadowing, no MCL floor)."""
        d = np.asarray(distance_m, dtype=float)
        if np.any(d <= 0):
            raise ValueError("distance must be strictly positive")
        loss = self.intercept_db + self.slope_db_per_decade * np.log10(d / 1000.0)
        if self.close_breakpoint_m is not None:
            close = (self.close_intercept_db
                     + self.close_slope_db_per_decade * np.log10(d / 1000.0))
            loss = np.where(d <= self.close_breakpoint_m, close, loss)
        return loss


def _default_pathloss() -> dict:
    # BS<->BS assumes below-rooftop street-level separation between picos
    # (NLOS-grade coupling); UE<->UE uses a steep street-level model beyond
    # 50 m and a close-in branch that in practice sits on the MCL floor.
    return {
        "bs_ue": PathlossModel(140.7, 36.7),
        "bs_bs": PathlossModel(169.36, 40.0),
        "ue_ue": PathlossModel(175.78, 40.0,
                               close_breakpoint_m=50.0,
                               close_intercept_db=98.45,
                               close_slope_db_per_decade=40.0),
    }


def _default_shadowing() -> dict:
    return {"bs_ue": 10.0, "bs_bs": 6.0, "ue_ue": 6.0}


@dataclass(frozen=True)
class ChannelConfig:
    carrier_bandwidth_hz: float = 10e6
    pathloss: dict = field(default_factory=_default_pathloss)
    shadowing_stddev_db: dict = field(default_factory=_default_shadowing)
    noise_figure_ue_db: float = 9.0
    noise_figure_bs_db: float = 5.0
    thermal_noise_density_dbm_hz: float = -174.0
    # no mobility is modeled, so links hold their fade by default; the
    # per-subframe mode redraws every link every millisecond
    fading_mode: str = "block-static"   # or "iid-per-subframe"

    def __post_init__(self):
        for cls in LINK_CLASSES:
            if cls not in self.pathloss:
                raise ValueError(f"missing pathloss model for link class {cls!r}")
            if self.shadowing_stddev_db.get(cls, 0.0) < 0:
                raise ValueError("shadowing stddev must be non-negative")
        if self.fading_mode not in ("iid-per-subframe", "block-static"):
            raise ValueError(f"unknown fading_mode {self.fading_mode!r}")


def large_scale_gain(link_class: str, distance_m: float, shadow_db: float,
                     cfg: ChannelConfig) -> float:
    """Linear power gain including pathloss, shadowing and the MCL floor."""
    if distance_m <= 0:
        raise ValueError("distance must be strictly positive")
    model = cfg.pathloss[link_class]
    loss = max(float(model.loss_db(distance_m)) + shadow_db,
               model.min_coupling_loss_db)
    return 10.0 ** (-loss / 10.0)


def noise_power_w(cfg: ChannelConfig, receiver: str) -> float:
    """Thermal noise power over the carrier at a 'bs' or 'ue' receiver."""
    nf = cfg.noise_figure_bs_db if receiver == "bs" else cfg.noise_figure_ue_db
    dbm = (cfg.thermal_noise_density_dbm_hz
           + 10.0 * np.log10(cfg.carrier_bandwidth_hz) + nf)
    return 10.0 ** (dbm / 10.0) / 1000.0


def _node_positions(d: Deployment) -> np.ndarray:
    return np.vstack([d.pico_pos, d.ue_pos])


def _class_matrix(n_bs: int, n: int) -> np.ndarray:
    """Link-class index per node pair: 0 bs_ue, 1 bs_bs, 2 ue_ue."""
    is_bs = np.arange(n) < n_bs
    cls = np.full((n, n), 0, dtype=np.int8)
    cls[np.ix_(is_bs, is_bs)] = 1
    cls[np.ix_(~is_bs, ~is_bs)] = 2
    return cls


def draw_shadowing(deployment: Deployment, cfg: ChannelConfig, seed: int) -> np.ndarray:
    """Symmetric per-pair shadowing draws in dB (reciprocal links share one)."""
    n_bs = deployment.n_picos
    n = n_bs + deployment.n_ues
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x73686164]))
    raw = rng.standard_normal((n, n))
    sym = np.triu(raw, k=1)
    sym = sym + sym.T
    stds = np.array([cfg.shadowing_stddev_db[c] for c in LINK_CLASSES])
    return sym * stds[_class_matrix(n_bs, n)]


@dataclass(frozen=True)
class LinkGainTable:
    """Large-scale linear gains and losses for every ordered node pair."""

    gains: np.ndarray     # (n, n) linear power gain, symmetric
    loss_db: np.ndarray   # (n, n) total large-scale loss in dB
    n_bs: int

    def __post_init__(self):
        self.gains.setflags(write=False)
        self.loss_db.setflags(write=False)

    def gain(self, tx: int, rx: int) -> float:
        if tx == rx:
            raise KeyError("self links are not modeled")
        return float(self.gains[rx, tx])

    def loss(self, tx: int, rx: int) -> float:
        if tx == rx:
            raise KeyError("self links are not modeled")
        return float(self.loss_db[rx, tx])


def build_gain_table(deployment: Deployment, cfg: ChannelConfig, seed: int,
                     shadowing: np.ndarray | None = None) -> LinkGainTable:
    """Pathloss + shadowing + MCL floor for all node pairs (wrap-around)."""
    n_bs = deployment.n_picos
    pos = _node_positions(deployment)
    n = pos.shape[0]
    if shadowing is None:
        shadowing = draw_shadowing(deployment, cfg, seed)

    dist = np.empty((n, n))
    chunk = 128  # bounds the (chunk, n, 7, 2) intermediate
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        dist[lo:hi] = wraparound_distance_matrix(pos[lo:hi], pos, deployment.geometry)
    np.fill_diagonal(dist, 1.0)  # self links unused; avoids log(0)
    dist = np.maximum(dist, 0.5)  # co-located drops hit the MCL floor anyway

    cls = _class_matrix(n_bs, n)
    loss = np.empty((n, n))
    for ci, cname in enumerate(LINK_CLASSES):
        mask = cls == ci
        model = cfg.pathloss[cname]
        loss[mask] = np.maximum(model.loss_db(dist[mask]) + shadowing[mask],
                                model.min_coupling_loss_db)
    gains = 10.0 ** (-loss / 10.0)
    return LinkGainTable(gains=gains, loss_db=loss, n_bs=n_bs)


class FadingState:
    """Per-link flat Rayleigh MIMO fading, advanced by subframe index.

    In iid-per-subframe mode every (link, subframe) query draws a fresh
    matrix; in block-static mode the first draw for a link is kept for the
    whole run.  Entries are CN(0, 1) so the average per-element power is 1.
    """

    def __init__(self, n_bs: int, cfg: ChannelConfig, seed: int):
        self.n_bs = n_bs
        self.mode = cfg.fading_mode
        self._rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x66616465]))
        self._cache: dict = {}

    def antennas(self, node: int) -> int:
        return BS_ANTENNAS if node < self.n_bs else UE_ANTENNAS

    def draw(self, n_rx: int, n_tx: int) -> np.ndarray:
        re = self._rng.standard_normal((n_rx, n_tx))
        im = self._rng.standard_normal((n_rx, n_tx))
        return (re + 1j * im) / np.sqrt(2.0)

    def matrix(self, link: tuple, subframe: int) -> np.ndarray:
        """Fading matrix of shape (rx antennas, tx antennas) for link=(tx, rx)."""
        tx, rx = link
        n_rx, n_tx = self.antennas(rx), self.antennas(tx)
        if self.mode == "block-static":
            if link not in self._cache:
                self._cache[link] = self.draw(n_rx, n_tx)
            return self._cache[link]
        cached = self._cache.get(link)
        if cached is None or cached[0] != subframe:
            self._cache[link] = (subframe, self.draw(n_rx, n_tx))
        return self._cache[link][1]


def channel_matrix(link: tuple, subframe: int, fading: FadingState,
                   gains: LinkGainTable) -> np.ndarray:
    """Full channel sqrt(gain) * fading for link=(tx, rx) at a subframe."""
    tx, rx = link
    n = gains.gains.shape[0]
    if not (0 <= tx < n and 0 <= rx < n) or tx == rx:
        raise KeyError(f"unknown link {link}")
    return np.sqrt(gains.gain(tx, rx)) * fading.matrix(link, subframe)


def export_loss_csv(table: LinkGainTable, path) -> None:
    """Debug dump of per-pair large-scale loss in dB (unordered pairs)."""
    n = table.loss_db.shape[0]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tx_node", "rx_node", "loss_db"])
        for i in range(n):
            for j in range(i + 1, n):
                w.writerow([i, j, f"{table.loss_db[j, i]:.2f}"])
