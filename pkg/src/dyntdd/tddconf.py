"""TDD subframe patterns and the traffic-adaptive pattern selector.

A pattern assigns each of the 10 subframes in a 10 ms frame to downlink
(D), uplink (U) or the DL->UL switching subframe (S).  S carries downlink
data here, so it counts as D everywhere: in the DL share, in the selector
and in the scheduler.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "TddPattern",
    "TddConfigSet",
    "standard_configs",
    "hypothetical_configs",
    "dl_share",
    "select_config",
]

# The seven standard patterns (ids 0-6) and three hypothetical UL-heavy
# patterns (ids 7-9, no S subframe, D slots packed at the frame start).
_SLOT_STRINGS = {
    0: "DSUUUDSUUU",
    1: "DSUUDDSUUD",
    2: "DSUDDDSUDD",
    3: "DSUUUDDDDD",
    4: "DSUUDDDDDD",
    5: "DSUDDDDDDD",
    6: "DSUUUDSUUD",
    7: "DUUUUUUUUU",
    8: "DUUUUDUUUU",
    9: "DUUUDDUUUU",
}


@dataclass(frozen=True)
class TddPattern:
    """A 10-subframe direction pattern."""

    id: int
    slots: tuple[str, ...]
    name: str = ""

    def __post_init__(self):
        if len(self.slots) != 10:
            raise ValueError(f"pattern {self.id}: need exactly 10 slots, got {len(self.slots)}")
        if any(s not in ("D", "S", "U") for s in self.slots):
            raise ValueError(f"pattern {self.id}: slots must be D, S or U")
        if "U" not in self.slots:
            raise ValueError(f"pattern {self.id}: needs at least one U slot")
        if not any(s in ("D", "S") for s in self.slots):
            raise ValueError(f"pattern {self.id}: needs at least one D or S slot")
        # precomputed: pattern selection and per-subframe direction are hot paths
        object.__setattr__(self, "_dl_slots", tuple(s in ("D", "S") for s in self.slots))
        object.__setattr__(self, "dl_count", sum(self._dl_slots))

    @property
    def ul_count(self) -> int:
        return 10 - self.dl_count

    def is_dl(self, slot: int) -> bool:
        return self._dl_slots[slot % 10]


@dataclass(frozen=True)
class TddConfigSet:
    """An ordered collection of selectable patterns."""

    patterns: tuple[TddPattern, ...]
    label: str = "rel11"

    def __post_init__(self):
        if not self.patterns:
            raise ValueError("config set must not be empty")
        object.__setattr__(self, "_shares", tuple(p.dl_count / 10.0 for p in self.patterns))

    def by_id(self, pattern_id: int) -> TddPattern:
        for p in self.patterns:
            if p.id == pattern_id:
                return p
        raise KeyError(f"no pattern with id {pattern_id} in set {self.label!r}")


def _pattern(pattern_id: int) -> TddPattern:
    return TddPattern(
        id=pattern_id,
        slots=tuple(_SLOT_STRINGS[pattern_id]),
        name=f"config {pattern_id}",
    )


def standard_configs() -> TddConfigSet:
    """The seven standard patterns (DL shares 0.4 ... 0.9)."""
    return TddConfigSet(tuple(_pattern(i) for i in range(7)), label="rel11")


def hypothetical_configs() -> TddConfigSet:
    """Standard set plus three UL-heavy patterns (DL shares 0.1, 0.2, 0.3)."""
    return TddConfigSet(tuple(_pattern(i) for i in range(10)), label="rel13")


def dl_share(p: TddPattern) -> float:
    """Fraction of the frame usable for downlink data (S counted as D)."""
    return p.dl_count / 10.0


def select_config(
    config_set: TddConfigSet,
    dl_bits: float,
    ul_bits: float,
    current: TddPattern,
) -> TddPattern:
    """Pick the pattern whose DL share best matches the buffered-bit split.

    With empty buffers the current pattern is kept.  Ties in the share
    distance go to the lowest pattern id.
    """
    if not config_set.patterns:
        raise ValueError("cannot select from an empty config set")
    total = dl_bits + ul_bits
    if total <= 0:
        return current
    target = dl_bits / total
    best, best_key = None, None
    for p, share in zip(config_set.patterns, config_set._shares):
        key = (abs(share - target), p.id)
        if best is None or key < best_key:
            best, best_key = p, key
    return best
