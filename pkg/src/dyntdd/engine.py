"""Subframe-stepped simulation loop and per-packet throughput metrics.

Each 1 ms subframe runs in two phases.  Phase 1 delivers arrivals, applies
any due pattern reselection and commits every cell's direction and
transmitter.  Phase 2 assembles cross-link interference from the committed
assignment, computes post-MMSE SINRs, draws block outcomes and advances
the packets.  CSI reports are refreshed on the feedback grid using the
same committed interference context, so link adaptation always works from
a stale snapshot of the network.

Interference bookkeeping is vectorized: all (receiver, interferer) pairs
of a subframe are drawn and folded into covariance matrices in a handful
of batched numpy operations.  Interferers whose large-scale power adds
less than a configurable fraction of the total are dropped.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field, replace

import numpy as np

from . import phy as phy_mod
from .channel import (BS_ANTENNAS, UE_ANTENNAS, ChannelConfig,
                      build_gain_table, noise_power_w)
from .phy import (Codebook, McsEntry, PhyConfig, codebook_2tx, dbm_to_w,
                  dft_codebook_4tx, transport_bits, ul_tx_power)
from .scheduler import (CellSchedulerState, SchemeSpec, apply_outcome,
                        maybe_reconfigure, pick_transmission)
from .topology import Deployment, GeometryConfig, generate_deployment
from .traffic import DL, UL, CellBuffers, Packet, TrafficConfig, generate_arrivals

__all__ = [
    "SimulationRun",
    "EngineOptions",
    "ThroughputRecord",
    "DirectionStats",
    "MetricsReport",
    "Simulation",
    "run",
    "aggregate",
    "compare",
]


@dataclass(frozen=True)
class SimulationRun:
    scheme: SchemeSpec
    traffic: TrafficConfig
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    phy: PhyConfig = field(default_factory=PhyConfig)
    deployment_seed: int = 1
    traffic_seed: int = 1
    channel_seed: int = 1
    error_seed: int = 1
    duration_ms: int = 22000
    warmup_ms: int = 2000

    def __post_init__(self):
        if not self.duration_ms > self.warmup_ms >= 0:
            raise ValueError("need duration_ms > warmup_ms >= 0")


@dataclass(frozen=True)
class EngineOptions:
    prune_frac: float = 1e-2        # max fraction of interference power dropped
    fixed_mcs: tuple | None = None  # (mcs index, rank): bypass link adaptation
    collect_ul_ic_log: bool = False
    collect_subframe_log: bool = False


@dataclass(frozen=True)
class ThroughputRecord:
    packet_id: int
    direction: str
    cell: int
    throughput_bps: float


@dataclass(frozen=True)
class DirectionStats:
    mean_bps: float
    p5_bps: float
    p50_bps: float
    p95_bps: float
    completed: int
    unfinished: int


@dataclass(frozen=True)
class MetricsReport:
    directions: dict                  # DL/UL -> DirectionStats
    records: tuple                    # all ThroughputRecords kept for audit
    ul_subframe_share: float          # post-warmup fraction of UL cell-subframes
    meta: dict = field(default_factory=dict)


def _nearest_rank(sorted_vals: np.ndarray, pct: float) -> float:
    if sorted_vals.size == 0:
        return 0.0
    k = max(int(math.ceil(pct / 100.0 * sorted_vals.size)), 1)
    return float(sorted_vals[k - 1])


def aggregate(records, *, unfinished=None, ul_subframe_share=float("nan"),
              meta=None) -> MetricsReport:
    """Per-direction mean and nearest-rank percentiles of packet throughput."""
    records = tuple(records)
    unfinished = dict(unfinished or {})
    directions = {}
    for direction in (DL, UL):
        vals = np.sort(np.array([r.throughput_bps for r in records
                                 if r.direction == direction]))
        directions[direction] = DirectionStats(
            mean_bps=float(vals.mean()) if vals.size else 0.0,
            p5_bps=_nearest_rank(vals, 5),
            p50_bps=_nearest_rank(vals, 50),
            p95_bps=_nearest_rank(vals, 95),
            completed=int(vals.size),
            unfinished=int(unfinished.get(direction, 0)),
        )
    return MetricsReport(directions=directions, records=records,
                         ul_subframe_share=ul_subframe_share, meta=dict(meta or {}))


def compare(baseline: MetricsReport, candidate: MetricsReport) -> dict:
    """Relative mean-throughput gain of candidate over baseline per direction."""
    gains = {}
    for direction in (DL, UL):
        base = baseline.directions[direction].mean_bps
        if base == 0.0:
            raise ZeroDivisionError(
                f"baseline {direction} mean throughput is zero; gain undefined")
        gains[direction] = candidate.directions[direction].mean_bps / base - 1.0
    return gains


def _segment_add(cov: np.ndarray, rows: np.ndarray, contrib: np.ndarray) -> None:
    """cov[rows] += contrib with duplicate rows, rows sorted ascending."""
    uniq, starts = np.unique(rows, return_index=True)
    cov[uniq] += np.add.reduceat(contrib, starts, axis=0)


@dataclass(slots=True)
class _Transmission:
    cell: int
    direction: str
    packet: Packet
    tx_node: int
    rx_node: int
    power_w: float
    rank: int
    q44: np.ndarray          # (4, 2) zero-padded precoder
    mcs: McsEntry
    ue_index: int


class _CsiStore:
    """Array-backed double buffer of link reports for one direction."""

    _NEVER = -(10 ** 9)

    def __init__(self, n_links: int, n_ranks: int = 2):
        shape = (n_links, n_ranks)
        self.cur_time = np.full(n_links, self._NEVER, dtype=np.int64)
        self.prev_time = np.full(n_links, self._NEVER, dtype=np.int64)
        self.cur_sinr = np.full(shape, -np.inf)
        self.prev_sinr = np.full(shape, -np.inf)
        self.cur_pmi = np.zeros(shape, dtype=int)
        self.prev_pmi = np.zeros(shape, dtype=int)
        self.cur_rank = np.ones(n_links, dtype=int)
        self.prev_rank = np.ones(n_links, dtype=int)

    def push(self, links: np.ndarray, t: int, sinr_db: np.ndarray,
             pmi: np.ndarray, rank: np.ndarray) -> None:
        self.prev_time[links] = self.cur_time[links]
        self.prev_sinr[links] = self.cur_sinr[links]
        self.prev_pmi[links] = self.cur_pmi[links]
        self.prev_rank[links] = self.cur_rank[links]
        self.cur_time[links] = t
        self.cur_sinr[links] = sinr_db
        self.cur_pmi[links] = pmi
        self.cur_rank[links] = rank

    def usable(self, link: int, t: int, delay: int):
        """(sinr_db per rank, pmi per rank, preferred rank) or None."""
        if self.cur_time[link] <= t - delay:
            return self.cur_sinr[link], self.cur_pmi[link], int(self.cur_rank[link])
        if self.prev_time[link] <= t - delay:
            return self.prev_sinr[link], self.prev_pmi[link], int(self.prev_rank[link])
        return None


class Simulation:
    """One seeded run of one scheme at one arrival rate."""

    def __init__(self, sim: SimulationRun, deployment: Deployment | None = None,
                 arrivals: dict | None = None, options: EngineOptions | None = None,
                 gains=None):
        self.sim = sim
        self.opts = options or EngineOptions()
        self.deployment = deployment or generate_deployment(sim.geometry, sim.deployment_seed)
        self.gains = gains or build_gain_table(self.deployment, sim.channel, sim.channel_seed)
        self.n_cells = self.deployment.n_picos
        self.n_ues = self.deployment.n_ues
        self.n_bs = self.n_cells

        ss = np.random.SeedSequence
        self._fade_rng = np.random.default_rng(ss([int(sim.channel_seed), 0x66616462]))
        self._err_rng = np.random.default_rng(ss([int(sim.error_seed), 0x6572726F]))
        self._block_fading = sim.channel.fading_mode == "block-static"
        if self._block_fading:
            # one 4x4 panel per node pair, drawn on first use; links read the
            # top-left (n_rx, n_tx) block so all contexts see the same fade
            n_nodes = self.n_cells + self.deployment.n_ues
            self._fade_row = np.full((n_nodes, n_nodes), -1, dtype=np.int32)
            self._fade_store = np.empty((0, 4, 4), dtype=np.complex64)

        self.noise_ue = noise_power_w(sim.channel, "ue")
        self.noise_bs = noise_power_w(sim.channel, "bs")
        self.p_bs_w = dbm_to_w(sim.phy.power.bs_tx_power_dbm)

        # serving-link loss drives open-loop UL power, one value per UE
        serving = self.deployment.ue_cell
        loss = self.gains.loss_db[self.n_bs + np.arange(self.n_ues), serving]
        self.p_ue_w = np.array([dbm_to_w(ul_tx_power(l, sim.phy.power)) for l in loss])

        self._thresholds = [e.min_sinr_db for e in sim.phy.mcs.entries]
        self.cb_dl = dft_codebook_4tx()
        self.cb_ul = codebook_2tx()
        self._q44_dl = {r: self._pad_codebook(self.cb_dl.by_rank[r]) for r in (1, 2)}
        self._q44_ul = {r: self._pad_codebook(self.cb_ul.by_rank[r]) for r in (1, 2)}

        self.buffers = [CellBuffers(c) for c in range(self.n_cells)]
        init = sim.scheme.initial_pattern()
        self.states = [CellSchedulerState(c, init) for c in range(self.n_cells)]
        self._dl_mask = np.tile([init.is_dl(s) for s in range(10)], (self.n_cells, 1))

        if arrivals is None:
            # arrival streams span the whole run, whatever the traffic config says
            tcfg = replace(sim.traffic, duration_ms=float(sim.duration_ms))
            arrivals = {
                c: generate_arrivals(tcfg, c, self.n_bs + self.deployment.ues_of_cell(c),
                                     sim.traffic_seed)
                for c in range(self.n_cells)
            }
        self.arrivals = arrivals
        events = [(math.ceil(p.arrival_time), p.arrival_time, p.id, c, p)
                  for c, plist in arrivals.items() for p in plist]
        events.sort(key=lambda e: e[:3])
        self._events = events
        self._next_event = 0

        self.csi_dl = _CsiStore(self.n_ues)
        self.csi_ul = _CsiStore(self.n_ues)
        # earliest subframe each cell may take the window's measurement in;
        # staggered per cell and window so reports sample the slot mix
        # instead of always probing the same frame position
        far = np.iinfo(np.int64).max
        self._meas_due = {DL: np.full(self.n_cells, far, dtype=np.int64),
                          UL: np.full(self.n_cells, far, dtype=np.int64)}
        self._stagger_rng = np.random.default_rng(
            ss([int(sim.channel_seed), 0x73746167]))

        self.records: list[ThroughputRecord] = []
        self.ul_ic_log: list[tuple] = []
        self.subframe_log: list[dict] = []
        self._ul_slots = 0
        self._dir_slots = 0
        self._busy: set[int] = set()

    # ------------------------------------------------------------------ setup

    @staticmethod
    def _pad_codebook(entries: np.ndarray) -> np.ndarray:
        """Zero-pad codebook entries to (n, 4, 2) for uniform covariance math."""
        n, n_tx, rank = entries.shape
        out = np.zeros((n, 4, 2), dtype=np.complex64)
        out[:, :n_tx, :rank] = entries
        return out

    def _draw(self, n_rows: int, n_rx: int, n_tx: int,
              keys=None) -> np.ndarray:
        if not self._block_fading:
            z = self._fade_rng.standard_normal((2, n_rows, n_rx, n_tx),
                                               dtype=np.float32)
            return (z[0] + 1j * z[1]) / np.float32(np.sqrt(2.0))
        rx, tx = np.asarray(keys[0]), np.asarray(keys[1])
        rows = self._fade_row[rx, tx]
        new = np.flatnonzero(rows < 0)
        if new.size:
            # assign panels to first-seen pairs in encounter order
            pairs = np.stack([rx[new], tx[new]], axis=1)
            _, first = np.unique(pairs[:, 0] * (2 ** 20) + pairs[:, 1],
                                 return_index=True)
            first = np.sort(first)
            fresh = pairs[first]
            z = self._fade_rng.standard_normal((2, fresh.shape[0], 4, 4),
                                               dtype=np.float32)
            panels = (z[0] + 1j * z[1]) / np.float32(np.sqrt(2.0))
            base = self._fade_store.shape[0]
            self._fade_store = np.concatenate([self._fade_store, panels])
            self._fade_row[fresh[:, 0], fresh[:, 1]] = base + np.arange(fresh.shape[0])
            rows = self._fade_row[rx, tx]
        return self._fade_store[rows][:, :n_rx, :n_tx]

    # ----------------------------------------------------------- interference

    def _covariances(self, rx_nodes: np.ndarray, n_rx: int, noise_w: float,
                     exclude_cell: np.ndarray, tx_arrays, drop_bs_tx: bool,
                     split_bs: bool = False, dtype=np.complex64):
        """Noise-plus-interference covariance per receiver, (m, n_rx, n_rx).

        With split_bs=True a second stack without the BS-transmitter terms
        is returned as well, built from the same fading draws (used for the
        cancellation-gain probe).
        """
        m = rx_nodes.size
        cov = np.zeros((m, n_rx, n_rx), dtype=dtype)
        cov[:, np.arange(n_rx), np.arange(n_rx)] = noise_w
        empty = (cov, cov.copy()) if split_bs else cov
        if tx_arrays is None:
            return empty
        tx_node, tx_cell, power, rank, q44 = tx_arrays
        if tx_node.size == 0:
            return empty

        w = self.gains.gains[np.ix_(rx_nodes, tx_node)] * power[None, :]
        mask = tx_cell[None, :] != exclude_cell[:, None]
        if drop_bs_tx:
            mask &= (tx_node >= self.n_bs)[None, :]
        w = np.where(mask, w, 0.0)

        if tx_node.size <= 6:
            keep = mask & (w > 0.0)
        else:
            # drop the weakest interferers while their total stays negligible
            order = np.argsort(w, axis=1)
            cums = np.cumsum(np.take_along_axis(w, order, axis=1), axis=1)
            allowed = self.opts.prune_frac * (w.sum(axis=1) + noise_w)
            drop_sorted = cums <= allowed[:, None]
            drop = np.zeros_like(mask)
            np.put_along_axis(drop, order, drop_sorted, axis=1)
            keep = mask & ~drop & (w > 0.0)

        i_idx, j_idx = np.nonzero(keep)
        if i_idx.size == 0:
            return empty
        cov_no_bs = cov.copy() if split_bs else None
        amp = np.sqrt(w[i_idx, j_idx] / rank[j_idx])
        from_bs = tx_node[j_idx] < self.n_bs
        # draw at the transmitter's true antenna width; the zero-padded
        # precoder rows beyond it never contribute
        for sel, width in ((from_bs, BS_ANTENNAS), (~from_bs, UE_ANTENNAS)):
            if not sel.any():
                continue
            pi, pj = i_idx[sel], j_idx[sel]
            h = self._draw(pi.size, n_rx, width,
                           keys=(rx_nodes[pi], tx_node[pj])).astype(dtype)
            gq = np.einsum("pna,pab->pnb", h, q44[pj][:, :width, :].astype(dtype))
            gq *= amp[sel][:, None, None].astype(h.real.dtype)
            contrib = np.einsum("pnb,pmb->pnm", gq, gq.conj())
            _segment_add(cov, pi, contrib)
            if split_bs and width == UE_ANTENNAS:
                _segment_add(cov_no_bs, pi, contrib)
        if split_bs:
            return cov, cov_no_bs
        return cov

    @staticmethod
    def _tx_arrays(txs: list) -> tuple | None:
        if not txs:
            return None
        return (
            np.array([tx.tx_node for tx in txs], dtype=int),
            np.array([tx.cell for tx in txs], dtype=int),
            np.array([tx.power_w for tx in txs]),
            np.array([tx.rank for tx in txs], dtype=int),
            np.stack([tx.q44 for tx in txs]),
        )

    # ------------------------------------------------------------------- CSI

    def _select_format(self, direction: str, ue_index: int, t: int):
        """(mcs entry, rank, padded precoder) from the freshest usable report."""
        entries = self.sim.phy.mcs.entries
        if self.opts.fixed_mcs is not None:
            idx, rank = self.opts.fixed_mcs
            q44 = (self._q44_dl if direction == DL else self._q44_ul)[rank][0]
            return entries[idx], rank, q44
        store = self.csi_dl if direction == DL else self.csi_ul
        rep = store.usable(ue_index, t, self.sim.phy.csi_delay_ms)
        if rep is None:  # cold start: most robust format
            q44 = (self._q44_dl if direction == DL else self._q44_ul)[1][0]
            return entries[0], 1, q44
        sinr_db, pmi, rank = rep
        # same rule as phy.select_mcs: highest entry with threshold met
        idx = bisect_right(self._thresholds, sinr_db[rank - 1]) - 1
        q44 = (self._q44_dl if direction == DL else self._q44_ul)[rank][pmi[rank - 1]]
        return entries[idx if idx >= 0 else 0], rank, q44

    def _measure_due(self, t: int, txs: list) -> None:
        """Take the window's measurements in direction-matched subframes.

        The feedback grid only marks cells as owing a report; the actual
        snapshot is taken in the first subframe at or after the cell's
        staggered offset whose direction matches the link being measured,
        so UL reports see UL-subframe interference, DL reports see
        DL-subframe interference, and no single frame position dominates
        the sampled contexts.
        """
        far = np.iinfo(np.int64).max
        slot = t % 10
        is_dl = self._dl_mask[:, slot]
        tx_arrays = None
        for direction, dir_mask in ((DL, is_dl), (UL, ~is_dl)):
            cells = np.flatnonzero((self._meas_due[direction] <= t) & dir_mask)
            if cells.size == 0:
                continue
            if tx_arrays is None:
                tx_arrays = self._tx_arrays(txs)
            links = np.flatnonzero(np.isin(self.deployment.ue_cell, cells))
            if direction == DL:
                self._measure_dl(t, links, tx_arrays)
            else:
                self._measure_ul(t, cells, links, tx_arrays)
            self._meas_due[direction][cells] = far

    def _measure_draws(self, n_rx: int, n_tx: int, rx_nodes, tx_nodes,
                       amp: np.ndarray) -> np.ndarray:
        """(L, K, n_rx, n_tx) fading ensemble for the quantile report.

        Static fading collapses the ensemble to one draw: the report is
        then exact and only the i.i.d. block-error draw remains random.
        """
        k = 1 if self._block_fading else self.sim.phy.csi_quantile_draws
        h = self._draw(rx_nodes.size * k, n_rx, n_tx,
                       keys=(np.repeat(rx_nodes, k), np.repeat(tx_nodes, k)))
        return h.reshape(rx_nodes.size, k, n_rx, n_tx) \
            * amp[:, None, None, None].astype(np.float32)

    def _measure_dl(self, t: int, links: np.ndarray, tx_arrays) -> None:
        serving = self.deployment.ue_cell[links]
        ue_nodes = self.n_bs + links
        cov = self._covariances(ue_nodes, UE_ANTENNAS, self.noise_ue,
                                exclude_cell=serving, tx_arrays=tx_arrays,
                                drop_bs_tx=False)
        amp = np.sqrt(self.gains.gains[ue_nodes, serving])
        h = self._measure_draws(UE_ANTENNAS, BS_ANTENNAS, ue_nodes, serving, amp)
        self.csi_dl.push(links, t, *self._rank_search(h, cov, self.cb_dl,
                                                      self.p_bs_w, self.sim.phy.mcs))

    def _measure_ul(self, t: int, cells: np.ndarray, links: np.ndarray, tx_arrays) -> None:
        # BS receivers of one cell share a single interference covariance
        cov_cell = self._covariances(cells, BS_ANTENNAS, self.noise_bs,
                                     exclude_cell=cells, tx_arrays=tx_arrays,
                                     drop_bs_tx=self.sim.scheme.ic_enabled)
        cell_row = np.searchsorted(cells, self.deployment.ue_cell[links])
        serving = self.deployment.ue_cell[links]
        ue_nodes = self.n_bs + links
        amp = np.sqrt(self.gains.gains[serving, ue_nodes])
        h = self._measure_draws(BS_ANTENNAS, UE_ANTENNAS, serving, ue_nodes, amp)
        self.csi_ul.push(links, t, *self._rank_search(h, cov_cell[cell_row], self.cb_ul,
                                                      self.p_ue_w[links], self.sim.phy.mcs))

    def _rank_search(self, h: np.ndarray, cov: np.ndarray, codebook: Codebook,
                     power_w, table) -> tuple:
        """Quantile effective SINR and best precoder per rank, plus the
        preferred rank.

        h is an (L, K, n_rx, n_tx) fading ensemble.  The first draw selects
        the precoder per rank; the reported SINR is the BLER-target quantile
        of the effective SINR across the K draws, so that transmitting at
        the reported operating point fades below threshold at roughly the
        target rate.
        """
        n_links, n_draws = h.shape[:2]
        power = np.broadcast_to(np.asarray(power_w, dtype=float), (n_links,))
        rinv = phy_mod._inv2(cov) if cov.shape[-1] == 2 else np.linalg.inv(cov)
        h0 = h[:, 0]
        rows = np.arange(n_links)

        best_sinr = np.empty((n_links, 2))
        best_pmi = np.empty((n_links, 2), dtype=int)
        q_idx = min(n_draws - 1, int(self.sim.phy.target_bler * n_draws))

        v1 = codebook.by_rank[1][:, :, 0]                       # (k1, n_tx)
        g1 = np.einsum("lna,ka->lkn", h0, v1)                   # (L, k1, n_rx)
        m1 = np.einsum("lkn,lnm,lkm->lk", g1.conj(), rinv, g1).real
        m1 = np.maximum(m1 * power[:, None].astype(m1.dtype), 0.0)
        best_pmi[:, 0] = np.argmax(m1, axis=1)

        v2 = codebook.by_rank[2]                                # (k2, n_tx, 2)
        g2 = np.einsum("lna,kab->lknb", h0, v2)
        g2 = g2 * np.sqrt(power / 2.0)[:, None, None, None].astype(g2.real.dtype)
        m2 = np.einsum("lkna,lnm,lkmb->lkab", g2.conj(), rinv, g2)
        w2 = phy_mod._inv2(np.eye(2, dtype=m2.dtype) + m2)
        s2 = np.maximum(1.0 / np.einsum("lkaa->lka", w2).real - 1.0, 0.0)
        se2 = np.log2(1.0 + s2).mean(axis=2)                    # mean MI per stream
        best_pmi[:, 1] = np.argmax(se2, axis=1)

        # quantile of the chosen precoders' effective SINR over the ensemble
        for rank in (1, 2):
            q = codebook.by_rank[rank][best_pmi[:, rank - 1]]   # (L, n_tx, rank)
            g = np.einsum("lkna,lab->lknb", h, q)
            g = g * np.sqrt(power / rank)[:, None, None, None].astype(g.real.dtype)
            s = phy_mod.stream_sinrs_batched(g, cov[:, None, :, :])
            eff = 2.0 ** np.log2(1.0 + s).mean(axis=2) - 1.0    # (L, K)
            eff_q = np.sort(eff, axis=1)[rows, q_idx]
            best_sinr[:, rank - 1] = 10.0 * np.log10(np.maximum(eff_q, 1e-30))

        thresholds = np.array([e.min_sinr_db for e in table.entries])
        ses = np.array([e.spectral_efficiency for e in table.entries])
        idx = np.clip(np.searchsorted(thresholds, best_sinr, side="right") - 1, 0, None)
        tput = ses[idx] * np.array([1.0, 2.0])
        rank = np.where(tput[:, 1] > tput[:, 0], 2, 1)          # ties favor rank 1
        return best_sinr, best_pmi, rank

    # ------------------------------------------------------------------ loop

    def _deliver_arrivals(self, t: int) -> None:
        ev = self._events
        k = self._next_event
        while k < len(ev) and ev[k][0] <= t:
            _, _, _, cell, packet = ev[k]
            self.buffers[cell].enqueue(packet)
            self._busy.add(cell)
            k += 1
        self._next_event = k

    def _reconfigure(self, t: int) -> None:
        scheme = self.sim.scheme
        if scheme.is_static or t % scheme.reconfig_period_ms != 0:
            return
        for c in range(self.n_cells):
            state = self.states[c]
            new = maybe_reconfigure(state, scheme, self.buffers[c], t)
            if new is not state:
                self.states[c] = new
                self._dl_mask[c] = [new.active_pattern.is_dl(s) for s in range(10)]

    def _commit_transmissions(self, t: int) -> list:
        slot = t % 10
        txs = []
        for c in sorted(self._busy):
            direction = DL if self._dl_mask[c, slot] else UL
            packet = pick_transmission(self.buffers[c], direction)
            if packet is None:
                continue
            ue_index = packet.ue - self.n_bs
            mcs, rank, q44 = self._select_format(direction, ue_index, t)
            if direction == DL:
                tx_node, rx_node, power = c, packet.ue, self.p_bs_w
            else:
                tx_node, rx_node, power = packet.ue, c, self.p_ue_w[ue_index]
            txs.append(_Transmission(c, direction, packet, tx_node, rx_node,
                                     power, rank, q44, mcs, ue_index))
        return txs

    def _phase2(self, t: int, txs: list) -> None:
        tx_arrays = self._tx_arrays(txs)
        for direction, n_rx, noise in ((DL, UE_ANTENNAS, self.noise_ue),
                                       (UL, BS_ANTENNAS, self.noise_bs)):
            group = [tx for tx in txs if tx.direction == direction]
            if not group:
                continue
            rx_nodes = np.array([tx.rx_node for tx in group], dtype=int)
            own_cell = np.array([tx.cell for tx in group], dtype=int)
            probe = direction == UL and self.opts.collect_ul_ic_log
            if probe:
                cov_all, cov_no_bs = self._covariances(
                    rx_nodes, n_rx, noise, own_cell, tx_arrays,
                    drop_bs_tx=False, split_bs=True, dtype=np.complex128)
                cov = cov_no_bs if self.sim.scheme.ic_enabled else cov_all
                sinrs, eff_db, alt = self._desired_sinrs(
                    group, rx_nodes, n_rx, cov,
                    cov_alt=cov_all if self.sim.scheme.ic_enabled else cov_no_bs)
                sinrs_alt, _ = alt
                for tx, s, s_alt in zip(group, sinrs, sinrs_alt):
                    with_ic, without_ic = ((s, s_alt) if self.sim.scheme.ic_enabled
                                           else (s_alt, s))
                    self.ul_ic_log.append((t, tx.cell, with_ic, without_ic))
            else:
                drop_bs = direction == UL and self.sim.scheme.ic_enabled
                cov = self._covariances(rx_nodes, n_rx, noise, own_cell,
                                        tx_arrays, drop_bs_tx=drop_bs)
                sinrs, eff_db, _ = self._desired_sinrs(group, rx_nodes, n_rx, cov)
            for tx, eff in zip(group, eff_db):
                self._apply(t, tx, eff)

    def _desired_sinrs(self, group: list, rx_nodes: np.ndarray, n_rx: int,
                       cov: np.ndarray, cov_alt: np.ndarray | None = None):
        """Per-stream and effective SINRs of the scheduled links; optionally
        also against a second covariance stack with the same channel draws."""
        tx_nodes = np.array([tx.tx_node for tx in group], dtype=int)
        n_tx = BS_ANTENNAS if group[0].direction == DL else UE_ANTENNAS
        amp = np.sqrt(self.gains.gains[rx_nodes, tx_nodes]).astype(np.float32)
        h = self._draw(len(group), n_rx, n_tx, keys=(rx_nodes, tx_nodes)) \
            * amp[:, None, None]
        out = [None] * len(group)
        eff_db = [0.0] * len(group)
        out_alt = [None] * len(group)
        eff_alt = [0.0] * len(group)
        for rank in (1, 2):
            idx = [i for i, tx in enumerate(group) if tx.rank == rank]
            if not idx:
                continue
            q = np.stack([group[i].q44[:n_tx, :rank] for i in idx])
            p = np.array([group[i].power_w for i in idx], dtype=np.float32)
            g = np.einsum("lna,lab->lnb", h[idx], q) \
                * np.sqrt(p / rank)[:, None, None]
            for target_s, target_e, c in (((out, eff_db, cov),)
                                          + (((out_alt, eff_alt, cov_alt),)
                                             if cov_alt is not None else ())):
                s = phy_mod.stream_sinrs_batched(g, c[idx])
                se = np.log2(1.0 + s).mean(axis=1)
                eff = 10.0 * np.log10(np.maximum(2.0 ** se - 1.0, 1e-30))
                for row, i in enumerate(idx):
                    target_s[i] = s[row]
                    target_e[i] = float(eff[row])
        return out, eff_db, (out_alt, eff_alt)

    def _apply(self, t: int, tx: _Transmission, eff_db: float) -> None:
        # same rule as phy.block_outcome on the pre-combined effective SINR:
        # certain failure below the threshold, target BLER at or above it
        packet = tx.packet
        success = (eff_db >= tx.mcs.min_sinr_db - 1e-12
                   and self._err_rng.random() >= self.sim.phy.target_bler)
        if not success:
            apply_outcome(packet, 0, False, t)
            return
        bits = transport_bits(tx.mcs, tx.rank, self.sim.phy.n_data_re)
        effective = min(bits, packet.remaining_bits)
        apply_outcome(packet, bits, True, t)
        buf = self.buffers[tx.cell]
        buf.note_served(tx.direction, effective)
        if packet.remaining_bits == 0:
            buf.pop_completed(tx.direction)
            if not buf.queue(DL) and not buf.queue(UL):
                self._busy.discard(tx.cell)
            if packet.arrival_time >= self.sim.warmup_ms:
                dur_s = (packet.completion_time - packet.arrival_time) / 1000.0
                self.records.append(ThroughputRecord(
                    packet.id, tx.direction, tx.cell,
                    packet.size_bits / dur_s))

    def step_subframe(self, t: int) -> dict | None:
        """Advance one subframe; returns a small log when enabled."""
        self._deliver_arrivals(t)
        self._reconfigure(t)
        txs = self._commit_transmissions(t)
        if t % self.sim.phy.csi_period_ms == 0:
            self._meas_due[DL][:] = t + self._stagger_rng.integers(
                0, 10, size=self.n_cells)
            self._meas_due[UL][:] = t + self._stagger_rng.integers(
                0, 10, size=self.n_cells)
        if (self._meas_due[DL] <= t).any() or (self._meas_due[UL] <= t).any():
            self._measure_due(t, txs)
        if txs:
            self._phase2(t, txs)
        if t >= self.sim.warmup_ms:
            slot = t % 10
            self._ul_slots += int(self.n_cells - self._dl_mask[:, slot].sum())
            self._dir_slots += self.n_cells
        if self.opts.collect_subframe_log:
            entry = {"t": t, "active": [(tx.cell, tx.direction) for tx in txs]}
            self.subframe_log.append(entry)
            return entry
        return None

    def run(self) -> MetricsReport:
        for t in range(self.sim.duration_ms):
            self.step_subframe(t)
        unfinished = {DL: 0, UL: 0}
        win_lo, win_hi = self.sim.warmup_ms, self.sim.duration_ms
        for plist in self.arrivals.values():
            for p in plist:
                if win_lo <= p.arrival_time < win_hi and p.remaining_bits > 0:
                    unfinished[p.direction] += 1
        share = self._ul_slots / self._dir_slots if self._dir_slots else float("nan")
        meta = {
            "scheme": self.sim.scheme.id,
            "lambda_dl": self.sim.traffic.lambda_dl,
            "deployment_seed": self.sim.deployment_seed,
            "traffic_seed": self.sim.traffic_seed,
            "channel_seed": self.sim.channel_seed,
            "error_seed": self.sim.error_seed,
            "duration_ms": self.sim.duration_ms,
            "warmup_ms": self.sim.warmup_ms,
        }
        return aggregate(self.records, unfinished=unfinished,
                         ul_subframe_share=share, meta=meta)


def run(sim: SimulationRun, deployment: Deployment | None = None,
        arrivals: dict | None = None, options: EngineOptions | None = None) -> MetricsReport:
    """Execute one simulation run end to end."""
    return Simulation(sim, deployment=deployment, arrivals=arrivals,
                      options=options).run()
