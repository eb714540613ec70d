"""Discovery MAC: tdid acquisition, silence patterns, neighbor bookkeeping.

Policies here are deliberately small and deterministic: list updates are a
pure function of (old list, detections), silence is a keyed hash of
(cell_id, frame), and acquisition randomness comes only from the caller's
rng, so every simulation replay is exact.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_NEIGHBORS = 32
ADMIT_HITS = 4
DROP_MISSES = 4
LQI_MAX_RATE = 6.0
LQI_LEVELS = 8


@dataclass(frozen=True)
class DiscoverySchedule:
    """Which symbols of which subframe carry discovery tones.

    Defaults: 10 subframes of 14 symbols per frame; discovery rides the last
    11 symbols of subframe 0, keeping the first 3 clear for control.
    """

    subframes_per_frame: int = 10
    symbols_per_subframe: int = 14
    discovery_subframe: int = 0
    discovery_symbols: tuple[int, ...] = tuple(range(3, 14))

    def __post_init__(self):
        if not 0 <= self.discovery_subframe < self.subframes_per_frame:
            raise ValueError("discovery subframe outside frame")
        if not self.discovery_symbols:
            raise ValueError("need at least one discovery symbol")
        if min(self.discovery_symbols) < 3:
            raise ValueError("first three symbols are reserved for control")
        if max(self.discovery_symbols) >= self.symbols_per_subframe:
            raise ValueError("discovery symbol outside subframe")
        if len(set(self.discovery_symbols)) != len(self.discovery_symbols):
            raise ValueError("duplicate discovery symbols")

    @property
    def n_symbols(self) -> int:
        return len(self.discovery_symbols)


def acquire_tdid(energy_scan: Sequence[float], lowest_set_size: int,
                 rng: np.random.Generator) -> int:
    """Pick a TDID uniformly among the lowest_set_size quietest channels.

    energy_scan[c] is the long-term energy observed on channel c. Ties are
    broken by channel index before the random pick (stable sort), so the
    candidate set is deterministic.
    """
    energy = np.asarray(energy_scan, dtype=np.float64)
    if energy.ndim != 1 or energy.size == 0:
        raise ValueError("energy_scan must be a nonempty vector")
    if not 1 <= lowest_set_size <= energy.size:
        raise ValueError(f"lowest_set_size {lowest_set_size} outside [1, {energy.size}]")
    order = np.argsort(energy, kind="stable")
    return int(rng.choice(order[:lowest_set_size]))


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def silent_pattern(cell_id: int, frame_index: int, duty: float) -> bool:
    """True when the cell keeps this frame silent (listen-only).

    Keyed hash of (cell_id, frame_index), so every device of a cell computes
    the identical pattern with no signaling; long-run silent fraction
    converges to duty.
    """
    if not 0.0 <= duty <= 1.0:
        raise ValueError(f"duty {duty} outside [0, 1]")
    z = _splitmix64(cell_id * 0xD1B54A32D192ED03 + frame_index)
    return z / 2.0**64 < duty


def lqi_quantize(rate_bps_hz: float) -> int:
    """3-bit link quality: [0, 6] bit/s/Hz mapped to 0..7, clamped above."""
    if rate_bps_hz < 0:
        raise ValueError("rate must be nonnegative")
    return min(LQI_LEVELS - 1, int(LQI_LEVELS * rate_bps_hz / LQI_MAX_RATE))


class TdidCollisionError(ValueError):
    pass


class TdidLedger:
    """Per-cell registry of claimed TDIDs (network-side bookkeeping)."""

    def __init__(self):
        self._by_cell: dict[int, dict[int, int]] = {}  # cell -> tdid -> device
        self._by_device: dict[int, tuple[int, int]] = {}  # device -> (cell, tdid)

    def registered(self, cell_id: int) -> set[int]:
        return set(self._by_cell.get(cell_id, ()))

    def tdid_of(self, device_id: int) -> int | None:
        entry = self._by_device.get(device_id)
        return None if entry is None else entry[1]

    def register(self, cell_id: int, device_id: int, tdid: int) -> None:
        if device_id in self._by_device:
            raise TdidCollisionError(f"device {device_id} already registered")
        cell = self._by_cell.setdefault(cell_id, {})
        if tdid in cell:
            raise TdidCollisionError(f"tdid {tdid} already claimed in cell {cell_id}")
        cell[tdid] = device_id
        self._by_device[device_id] = (cell_id, tdid)

    def release(self, device_id: int) -> None:
        cell_id, tdid = self._by_device.pop(device_id)
        del self._by_cell[cell_id][tdid]


# ----------------------------------------------------------- neighbor list

@dataclass(frozen=True)
class NeighborEntry:
    tdid: int
    hits: int = 0
    misses: int = 0
    lqi: int = 0
    admitted: bool = False


@dataclass(frozen=True)
class Add:
    tdid: int
    lqi: int


@dataclass(frozen=True)
class Drop:
    tdid: int


@dataclass(frozen=True)
class LqiChange:
    tdid: int
    lqi: int


Event = Add | Drop | LqiChange


@dataclass(frozen=True)
class NeighborList:
    """Tracked candidates plus the admitted neighbor set (capacity 32).

    Admission needs ADMIT_HITS consecutive detections; DROP_MISSES
    consecutive misses drop an admitted neighbor (and silently prune a
    candidate). Events describe changes to the admitted set only.
    """

    entries: tuple[NeighborEntry, ...] = ()

    def admitted(self) -> tuple[NeighborEntry, ...]:
        return tuple(e for e in self.entries if e.admitted)

    def entry(self, tdid: int) -> NeighborEntry | None:
        for e in self.entries:
            if e.tdid == tdid:
                return e
        return None


def update_neighbor_list(nlist: NeighborList,
                         detections: Mapping[int, int] | Iterable[tuple[int, int]],
                         ) -> tuple[NeighborList, list[Event]]:
    """One discovery period of bookkeeping.

    detections maps tdid -> lqi for this period. Consecutive-hit counters
    reset on a miss and vice versa. Admission happens on the 4th consecutive
    hit; if the admitted set is full, the admitted entry with the lowest
    (lqi, then tdid) is evicted first. LqiChange is emitted for admitted
    entries whose quantized lqi moved. Deterministic: tdids are processed in
    ascending order.
    """
    seen = dict(detections)
    for tdid, lqi in seen.items():
        if not 0 <= lqi < LQI_LEVELS:
            raise ValueError(f"lqi {lqi} outside [0, {LQI_LEVELS})")
    events: list[Event] = []
    table: dict[int, NeighborEntry] = {e.tdid: e for e in nlist.entries}
    admitted = {e.tdid for e in nlist.entries if e.admitted}

    for tdid in sorted(set(table) | set(seen)):
        old = table.get(tdid)
        if tdid in seen:
            lqi = seen[tdid]
            if old is None:
                table[tdid] = NeighborEntry(tdid=tdid, hits=1, lqi=lqi)
                continue
            entry = replace(old, hits=old.hits + 1, misses=0, lqi=lqi)
            if entry.admitted and old.lqi != lqi:
                events.append(LqiChange(tdid=tdid, lqi=lqi))
            if not entry.admitted and entry.hits >= ADMIT_HITS:
                if len(admitted) >= MAX_NEIGHBORS:
                    victim = min((table[t] for t in admitted),
                                 key=lambda e: (e.lqi, e.tdid))
                    events.append(Drop(tdid=victim.tdid))
                    admitted.discard(victim.tdid)
                    del table[victim.tdid]
                entry = replace(entry, admitted=True)
                admitted.add(tdid)
                events.append(Add(tdid=tdid, lqi=lqi))
            table[tdid] = entry
        else:
            if old is None:  # evicted earlier in this same update
                continue
            entry = replace(old, misses=old.misses + 1, hits=0)
            if entry.misses >= DROP_MISSES:
                if entry.admitted:
                    events.append(Drop(tdid=tdid))
                    admitted.discard(tdid)
                del table[tdid]
            else:
                table[tdid] = entry

    new_list = NeighborList(entries=tuple(table[t] for t in sorted(table)))
    assert len(new_list.admitted()) <= MAX_NEIGHBORS
    return new_list, events


def replay_admitted(events: Iterable[Event]) -> set[int]:
    """Admitted set reconstructed from an event stream (delta reporting)."""
    out: set[int] = set()
    for ev in events:
        if isinstance(ev, Add):
            out.add(ev.tdid)
        elif isinstance(ev, Drop):
            out.discard(ev.tdid)
    return out
