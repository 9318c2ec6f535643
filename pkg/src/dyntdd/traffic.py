"""Poisson packet arrivals and per-cell FIFO buffers.

Arrivals are pre-generated per (cell, direction) before the time loop so
that traffic randomness is decoupled from PHY randomness; schemes compared
under the same traffic seed then see identical arrival streams.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

__all__ = ["TrafficConfig", "Packet", "CellBuffers", "generate_arrivals"]

DL = "DL"
UL = "UL"

# 0.5 Mbyte packets, decimal megabyte
DEFAULT_PACKET_BITS = 4_000_000


@dataclass(frozen=True)
class TrafficConfig:
    lambda_dl: float                 # packets/s per cell, DL
    dl_ul_arrival_ratio: float = 2.0
    packet_size_bits: int = DEFAULT_PACKET_BITS
    duration_ms: float = 20000.0

    def __post_init__(self):
        if self.lambda_dl < 0:
            raise ValueError("lambda_dl must be non-negative")
        if self.dl_ul_arrival_ratio <= 0:
            raise ValueError("dl_ul_arrival_ratio must be positive")
        if self.packet_size_bits <= 0:
            raise ValueError("packet_size_bits must be positive")

    @property
    def lambda_ul(self) -> float:
        return self.lambda_dl / self.dl_ul_arrival_ratio


@dataclass
class Packet:
    id: int
    direction: str            # DL or UL
    ue: int                   # global UE index
    cell: int                 # picocell index
    arrival_time: float       # ms
    size_bits: int
    remaining_bits: int
    completion_time: float | None = None

    def served(self, bits: int, t_end_ms: float) -> None:
        """Account successfully delivered bits; stamps completion when done."""
        self.remaining_bits = max(0, self.remaining_bits - int(bits))
        if self.remaining_bits == 0 and self.completion_time is None:
            self.completion_time = t_end_ms


def _arrival_times(rng: np.random.Generator, rate_per_s: float,
                   duration_ms: float) -> np.ndarray:
    if rate_per_s <= 0:
        return np.empty(0)
    # mean count + 6 sigma of headroom, then trim to the window
    mean = rate_per_s * duration_ms / 1000.0
    n = int(mean + 6.0 * np.sqrt(mean) + 16)
    while True:
        gaps = rng.exponential(1000.0 / rate_per_s, size=n)
        times = np.cumsum(gaps)
        if times[-1] > duration_ms:
            return times[times <= duration_ms]
        n *= 2


def generate_arrivals(cfg: TrafficConfig, cell: int, ue_list,
                      seed: int) -> list[Packet]:
    """Time-ordered packets for one cell, deterministic in (cfg, cell, seed)."""
    ue_list = np.asarray(ue_list, dtype=int)
    if ue_list.size == 0 and cfg.lambda_dl > 0:
        raise ValueError(f"cell {cell}: positive arrival rate but no UEs")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x74726166, int(cell)]))

    packets = []
    for direction, rate in ((DL, cfg.lambda_dl), (UL, cfg.lambda_ul)):
        times = _arrival_times(rng, rate, cfg.duration_ms)
        owners = rng.choice(ue_list, size=times.size) if times.size else []
        for t, ue in zip(times, owners):
            packets.append((float(t), direction, int(ue)))

    packets.sort(key=lambda rec: rec[0])
    return [
        Packet(
            id=cell * 1_000_000 + k,
            direction=direction,
            ue=ue,
            cell=cell,
            arrival_time=t,
            size_bits=cfg.packet_size_bits,
            remaining_bits=cfg.packet_size_bits,
        )
        for k, (t, direction, ue) in enumerate(packets)
    ]


class CellBuffers:
    """Per-cell FIFO queues for both directions with O(1) bit accounting."""

    def __init__(self, cell: int):
        self.cell = cell
        self._queues = {DL: deque(), UL: deque()}
        self._bits = {DL: 0, UL: 0}

    def queue(self, direction: str) -> deque:
        return self._queues[direction]

    def enqueue(self, p: Packet) -> None:
        q = self._queues[p.direction]
        if q and (q[-1].arrival_time, q[-1].id) > (p.arrival_time, p.id):
            raise ValueError(
                f"cell {self.cell}: out-of-order {p.direction} arrival "
                f"(packet {p.id} at {p.arrival_time} ms)")
        q.append(p)
        self._bits[p.direction] += p.remaining_bits

    def head(self, direction: str) -> Packet | None:
        q = self._queues[direction]
        return q[0] if q else None

    def note_served(self, direction: str, bits: int) -> None:
        self._bits[direction] -= int(bits)

    def pop_completed(self, direction: str) -> Packet:
        p = self._queues[direction].popleft()
        if p.remaining_bits != 0:
            raise RuntimeError("popped packet still has remaining bits")
        return p

    def buffered_bits(self, direction: str) -> int:
        return self._bits[direction]

    def buffer_ratio(self) -> tuple[int, int]:
        """Current (dl_bits, ul_bits) driving pattern selection."""
        return self._bits[DL], self._bits[UL]

    def recompute_bits(self) -> tuple[int, int]:
        """Slow path summing queue contents; used to audit the counters."""
        return (sum(p.remaining_bits for p in self._queues[DL]),
                sum(p.remaining_bits for p in self._queues[UL]))
