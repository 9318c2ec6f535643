"""Link-level abstraction: MMSE per-stream SINR, AMC, CSI aging, TX power.

The receiver model is a linear MMSE front end.  For a desired effective
channel G (receive antennas x streams) and an interference-plus-noise
covariance R, the post-detection SINR of stream s is

    SINR_s = 1 / [(I + G^H R^{-1} G)^{-1}]_ss - 1.

Per-stream SINRs are folded into one effective SINR through the mean
mutual-information map (sum of log2(1+SINR) over streams, divided by the
stream count, mapped back to an SINR), which is what the MCS thresholds
are compared against for both link adaptation and block outcomes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "McsEntry",
    "McsTable",
    "default_mcs_table",
    "PowerConfig",
    "PhyConfig",
    "Codebook",
    "dft_codebook_4tx",
    "codebook_2tx",
    "mmse_sinr",
    "stream_sinrs_batched",
    "effective_sinr_db",
    "select_mcs",
    "ul_tx_power",
    "block_outcome",
    "transport_bits",
    "measure_link",
    "CsiReport",
    "CsiState",
    "dbm_to_w",
]

# 10 MHz carrier: 50 resource blocks x 12 subcarriers x 14 OFDM symbols,
# 3 of 14 symbols lost to control and reference signals -> 50*12*11 = 6600.
N_DATA_RE_PER_SUBFRAME = 6600


def dbm_to_w(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


@dataclass(frozen=True)
class McsEntry:
    index: int
    modulation: str          # QPSK / 16QAM / 64QAM
    min_sinr_db: float       # lowest effective SINR this entry is selected at
    spectral_efficiency: float  # bits per resource element per stream


@dataclass(frozen=True)
class McsTable:
    entries: tuple[McsEntry, ...]

    def __post_init__(self):
        for a, b in zip(self.entries, self.entries[1:]):
            if not (a.min_sinr_db < b.min_sinr_db
                    and a.spectral_efficiency < b.spectral_efficiency):
                raise ValueError("MCS entries must increase in threshold and SE")

    @property
    def max_se(self) -> float:
        return self.entries[-1].spectral_efficiency

    def __len__(self) -> int:
        return len(self.entries)


# (modulation, spectral efficiency); thresholds derive from the capacity
# inverse so the effective-SINR map and the table agree by construction.
DEFAULT_MCS_GRID = (
    ("QPSK", 0.25), ("QPSK", 0.40), ("QPSK", 0.60),
    ("QPSK", 0.88), ("QPSK", 1.18), ("QPSK", 1.48),
    ("16QAM", 1.91), ("16QAM", 2.41), ("16QAM", 2.73),
    ("64QAM", 3.32), ("64QAM", 3.90), ("64QAM", 4.52),
    ("64QAM", 5.12), ("64QAM", 5.33), ("64QAM", 5.55),
)


def default_mcs_table(grid=DEFAULT_MCS_GRID) -> McsTable:
    entries = tuple(
        McsEntry(
            index=i,
            modulation=mod,
            min_sinr_db=float(10.0 * np.log10(2.0 ** se - 1.0)),
            spectral_efficiency=se,
        )
        for i, (mod, se) in enumerate(grid)
    )
    return McsTable(entries)


@dataclass(frozen=True)
class PowerConfig:
    bs_tx_power_dbm: float = 24.0
    ue_max_power_dbm: float = 23.0
    ul_pc_p0_dbm: float = -76.0
    ul_pc_alpha: float = 0.8
    ul_power_mode: str = "open-loop"   # or "full"

    def __post_init__(self):
        if self.ul_power_mode not in ("open-loop", "full"):
            raise ValueError(f"unknown ul_power_mode {self.ul_power_mode!r}")
        if not 0.0 <= self.ul_pc_alpha <= 1.0:
            raise ValueError("ul_pc_alpha must be in [0, 1]")


@dataclass(frozen=True)
class PhyConfig:
    mcs: McsTable = field(default_factory=default_mcs_table)
    power: PowerConfig = field(default_factory=PowerConfig)
    csi_period_ms: int = 50
    csi_delay_ms: int = 10
    n_data_re: int = N_DATA_RE_PER_SUBFRAME
    target_bler: float = 0.1
    # fading draws per measurement; the report is the BLER-target quantile
    # of the effective SINR over this ensemble, so the selected MCS holds
    # the target error rate under per-subframe fading
    csi_quantile_draws: int = 10

    def __post_init__(self):
        if self.csi_period_ms <= 0 or self.csi_delay_ms < 0:
            raise ValueError("CSI period must be positive and delay non-negative")
        if not 0.0 <= self.target_bler < 1.0:
            raise ValueError("target_bler must be in [0, 1)")
        if self.csi_quantile_draws < 1:
            raise ValueError("csi_quantile_draws must be at least 1")


@dataclass(frozen=True)
class Codebook:
    """Unit-column precoder hypotheses, grouped by rank."""

    n_tx: int
    by_rank: dict   # rank -> ndarray (n_entries, n_tx, rank)

    @property
    def ranks(self) -> tuple:
        return tuple(sorted(self.by_rank))

    def entry(self, rank: int, index: int) -> np.ndarray:
        return self.by_rank[rank][index]


def dft_codebook_4tx() -> Codebook:
    """16 rank-1 DFT vectors over 4 antennas; 8 orthogonal rank-2 pairs."""
    k = np.arange(16)
    n = np.arange(4)
    vecs = np.exp(2j * np.pi * np.outer(n, k) / 16.0) / 2.0   # (4, 16), unit columns
    rank1 = vecs.T[:, :, None]
    rank2 = np.stack([np.stack([vecs[:, i], vecs[:, i + 8]], axis=1) for i in range(8)])
    return Codebook(n_tx=4, by_rank={1: rank1, 2: rank2})


def codebook_2tx() -> Codebook:
    """4 rank-1 phase vectors over 2 antennas; identity rank-2."""
    k = np.arange(4)
    vecs = np.stack([np.ones(4), np.exp(1j * np.pi * k / 2.0)]) / np.sqrt(2.0)
    rank1 = vecs.T[:, :, None]
    rank2 = np.eye(2, dtype=complex)[None, :, :]
    return Codebook(n_tx=2, by_rank={1: rank1, 2: rank2})


def _effective(tx_power_w: float, matrix: np.ndarray, precoder: np.ndarray) -> np.ndarray:
    q = np.asarray(precoder, dtype=complex)
    if q.ndim == 1:
        q = q[:, None]
    rank = q.shape[1]
    return np.sqrt(tx_power_w / rank) * np.asarray(matrix, dtype=complex) @ q


def mmse_sinr(desired, tx_power: float, precoder, interferers,
              noise_power: float) -> np.ndarray:
    """Per-stream post-MMSE SINR for one reception.

    ``interferers`` is an iterable of {"matrix", "tx_power", "precoder"}
    dicts.  Total power is split equally across a transmitter's streams.
    """
    if noise_power <= 0:
        raise ValueError("noise_power must be strictly positive")
    g = _effective(tx_power, desired, precoder)
    n_rx = g.shape[0]
    cov = noise_power * np.eye(n_rx, dtype=complex)
    for it in interferers:
        gi = _effective(it["tx_power"], it["matrix"], it["precoder"])
        if gi.shape[0] != n_rx:
            raise ValueError("interferer matrix has inconsistent receive dimension")
        cov += gi @ gi.conj().T
    try:
        m = g.conj().T @ np.linalg.solve(cov, g)
        w = np.linalg.inv(np.eye(g.shape[1]) + m)
    except np.linalg.LinAlgError as exc:  # unreachable with noise > 0
        raise np.linalg.LinAlgError(f"ill-conditioned interference covariance: {exc}")
    return np.maximum(1.0 / np.real(np.diag(w)) - 1.0, 0.0)


def _inv2(a: np.ndarray) -> np.ndarray:
    """Closed-form inverse of stacked 2x2 matrices."""
    det = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    out = np.empty_like(a)
    out[..., 0, 0] = a[..., 1, 1]
    out[..., 1, 1] = a[..., 0, 0]
    out[..., 0, 1] = -a[..., 0, 1]
    out[..., 1, 0] = -a[..., 1, 0]
    return out / det[..., None, None]


def stream_sinrs_batched(geff: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Vectorized per-stream MMSE SINR.

    geff: (..., n_rx, rank) effective desired channels;
    cov:  (..., n_rx, n_rx) interference-plus-noise covariances.
    Returns (..., rank).
    """
    rinv_g = _inv2(cov) @ geff if cov.shape[-1] == 2 else np.linalg.solve(cov, geff)
    m = np.einsum("...as,...ab->...bs", geff.conj(), rinv_g)
    rank = geff.shape[-1]
    if rank == 1:
        return np.maximum(m[..., 0, 0].real, 0.0)[..., None]
    a = np.eye(rank, dtype=m.dtype) + m
    w = _inv2(a) if rank == 2 else np.linalg.inv(a)
    diag = np.real(np.einsum("...ss->...s", w))
    return np.maximum(1.0 / diag - 1.0, 0.0)


def effective_sinr_db(stream_sinrs) -> float:
    """Mean mutual-information equivalent SINR over streams, in dB."""
    s = np.asarray(stream_sinrs, dtype=float)
    mi = np.mean(np.log2(1.0 + s))
    eff = 2.0 ** mi - 1.0
    return float(10.0 * np.log10(max(eff, 1e-30)))


def select_mcs(reported_sinr_db: float, table: McsTable) -> McsEntry:
    """Highest entry whose threshold is met; the lowest entry as a floor."""
    chosen = table.entries[0]
    for entry in table.entries:
        if entry.min_sinr_db <= reported_sinr_db:
            chosen = entry
        else:
            break
    return chosen


def ul_tx_power(pathloss_db: float, cfg: PowerConfig) -> float:
    """UE transmit power in dBm under fractional open-loop power control."""
    if pathloss_db < 0:
        raise ValueError("pathloss must be non-negative")
    if cfg.ul_power_mode == "full":
        return cfg.ue_max_power_dbm
    return min(cfg.ue_max_power_dbm,
               cfg.ul_pc_p0_dbm + cfg.ul_pc_alpha * pathloss_db)


def block_outcome(mcs: McsEntry, actual_stream_sinrs, rng: np.random.Generator,
                  target_bler: float = 0.1) -> bool:
    """True on successful decoding.

    Below the entry threshold the block always fails; at or above it the
    block fails with the target error probability, i.i.d. per draw.
    """
    if effective_sinr_db(actual_stream_sinrs) < mcs.min_sinr_db - 1e-12:
        return False
    return bool(rng.random() >= target_bler)


def transport_bits(mcs: McsEntry, rank: int, n_data_re: int) -> int:
    """Bits carried by one subframe at the given MCS and rank."""
    if n_data_re <= 0:
        raise ValueError("n_data_re must be positive")
    return int(round(mcs.spectral_efficiency * rank * n_data_re))


@dataclass(frozen=True)
class CsiReport:
    """One wide-band measurement: per-rank effective SINRs and precoders."""

    time_ms: int
    rank_sinr_db: dict       # rank -> effective SINR in dB
    rank_pmi: dict           # rank -> best codebook index
    preferred_rank: int


def measure_link(matrix, tx_power: float, interferers, noise_power: float,
                 codebook: Codebook, table: McsTable, time_ms: int) -> CsiReport:
    """Wide-band rank/precoder search over the codebook at one instant.

    The preferred rank maximizes rank * SE(selected MCS); ties go to the
    lower rank.
    """
    rank_sinr, rank_pmi = {}, {}
    for rank in codebook.ranks:
        best_eff, best_idx = -np.inf, 0
        for idx, q in enumerate(codebook.by_rank[rank]):
            sinrs = mmse_sinr(matrix, tx_power, q, interferers, noise_power)
            eff = effective_sinr_db(sinrs)
            if eff > best_eff:
                best_eff, best_idx = eff, idx
        rank_sinr[rank] = best_eff
        rank_pmi[rank] = best_idx
    preferred = max(
        codebook.ranks,
        key=lambda r: (r * select_mcs(rank_sinr[r], table).spectral_efficiency, -r),
    )
    return CsiReport(time_ms=int(time_ms), rank_sinr_db=rank_sinr,
                     rank_pmi=rank_pmi, preferred_rank=preferred)


class CsiState:
    """Per-link store of the two most recent reports with aging rules.

    A report measured at time m becomes usable at m + feedback_delay; link
    adaptation at time t therefore sees the newest report with
    time <= t - delay, i.e. the latest feedback-grid instant that had time
    to arrive.  Before any report is deliverable the caller falls back to
    the cold-start transmission format.
    """

    def __init__(self, feedback_period_ms: int = 50, feedback_delay_ms: int = 10):
        self.feedback_period_ms = int(feedback_period_ms)
        self.feedback_delay_ms = int(feedback_delay_ms)
        self._reports: dict = {}

    def is_measurement_instant(self, t_ms: int) -> bool:
        return t_ms % self.feedback_period_ms == 0

    def store(self, link, report: CsiReport) -> None:
        self._reports.setdefault(link, deque(maxlen=2)).append(report)

    def measure(self, link, matrix, tx_power, interferers, noise_power,
                codebook: Codebook, table: McsTable, t_ms: int) -> CsiReport:
        if not self.is_measurement_instant(t_ms):
            raise ValueError(f"{t_ms} ms is not a measurement instant")
        report = measure_link(matrix, tx_power, interferers, noise_power,
                              codebook, table, t_ms)
        self.store(link, report)
        return report

    def usable(self, link, t_ms: int) -> CsiReport | None:
        cutoff = t_ms - self.feedback_delay_ms
        best = None
        for rep in self._reports.get(link, ()):
            if rep.time_ms <= cutoff and (best is None or rep.time_ms > best.time_ms):
                best = rep
        return best
