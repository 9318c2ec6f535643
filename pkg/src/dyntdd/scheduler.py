"""Per-cell scheduling: head-of-line FIFO service, ideal HARQ, reconfiguration.

Each cell serves one link per subframe over the full band.  A failed block
leaves the packet at the head of its queue, so the retransmission lands in
the next subframe of the same direction.  Pattern changes happen only at
frame boundaries that are multiples of the scheme's reconfiguration period.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

from .tddconf import TddConfigSet, TddPattern, hypothetical_configs, select_config, standard_configs
from .traffic import DL, UL, CellBuffers, Packet

__all__ = [
    "SchemeSpec",
    "SCHEME_IDS",
    "get_scheme",
    "CellSchedulerState",
    "subframe_direction",
    "pick_transmission",
    "apply_outcome",
    "maybe_reconfigure",
]


@dataclass(frozen=True)
class SchemeSpec:
    """One of the five duplexing schemes under comparison."""

    id: str
    reconfig_period_ms: int | None    # None = static
    config_set_label: str             # rel11 or rel13
    ic_enabled: bool
    initial_pattern_id: int = 1

    @property
    def is_static(self) -> bool:
        return self.reconfig_period_ms is None

    def config_set(self) -> TddConfigSet:
        return _config_set(self.config_set_label)

    def initial_pattern(self) -> TddPattern:
        return self.config_set().by_id(self.initial_pattern_id)


@lru_cache(maxsize=None)
def _config_set(label: str) -> TddConfigSet:
    if label == "rel11":
        return standard_configs()
    if label == "rel13":
        return hypothetical_configs()
    raise ValueError(f"unknown config set label {label!r}")


_SCHEMES = {
    "s1": SchemeSpec("s1", None, "rel11", ic_enabled=False),
    "s2": SchemeSpec("s2", 200, "rel11", ic_enabled=False),
    "s3": SchemeSpec("s3", 10, "rel11", ic_enabled=False),
    "s4": SchemeSpec("s4", 10, "rel11", ic_enabled=True),
    "s5": SchemeSpec("s5", 10, "rel13", ic_enabled=True),
}

SCHEME_IDS = tuple(_SCHEMES)


def get_scheme(scheme_id: str) -> SchemeSpec:
    try:
        return _SCHEMES[scheme_id]
    except KeyError:
        raise KeyError(f"unknown scheme {scheme_id!r}; choose from {SCHEME_IDS}")


@dataclass(frozen=True)
class CellSchedulerState:
    cell: int
    active_pattern: TddPattern
    pattern_valid_from: int = 0   # subframe index


def subframe_direction(state: CellSchedulerState, t: int) -> str:
    """Direction of subframe t under the cell's active pattern (S is DL)."""
    return DL if state.active_pattern.is_dl(t % 10) else UL


def pick_transmission(buffers: CellBuffers, direction: str) -> Packet | None:
    """Head-of-line packet in the subframe's direction, or None when idle."""
    return buffers.head(direction)


def apply_outcome(p: Packet, served_bits: int, success: bool, t: int) -> Packet:
    """Update a packet after its subframe: debit bits on success only."""
    if success:
        p.served(served_bits, t_end_ms=float(t + 1))
    return p


def maybe_reconfigure(state: CellSchedulerState, scheme: SchemeSpec,
                      buffers: CellBuffers, t: int) -> CellSchedulerState:
    """Re-select the pattern at scheme boundaries; keep it otherwise."""
    if scheme.is_static or t % scheme.reconfig_period_ms != 0:
        return state
    dl_bits, ul_bits = buffers.buffer_ratio()
    pattern = select_config(scheme.config_set(), dl_bits, ul_bits, state.active_pattern)
    if pattern is state.active_pattern:
        return state
    return replace(state, active_pattern=pattern, pattern_valid_from=t)
