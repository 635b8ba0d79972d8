"""Five-list channel state machine per cell.

Lists: operating (OCL), backup (BCL), protected (PCL), candidate (CCL) and
disallowed (DCL).  Allowed moves:

    OCL -> PCL   busy verdict (the channel and its two neighbours are vacated)
    PCL -> CCL   sensed idle out of band
    CCL -> BCL   idle for ``promotion_idle`` seconds with no sensing gap above ``max_sensing_gap``
    CCL -> PCL, BCL -> PCL   sensed busy
    BCL -> OCL   switch target or refill

All functions are pure: they return new :class:`ChannelLists` values.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

LIST_NAMES = ("ocl", "bcl", "pcl", "ccl", "dcl")

ALLOWED_EDGES = frozenset({
    ("ocl", "pcl"), ("pcl", "ccl"), ("ccl", "bcl"), ("ccl", "pcl"), ("bcl", "pcl"), ("bcl", "ocl"),
})


class NotOperating(ValueError):
    pass


class NotTracked(ValueError):
    pass


@dataclass(frozen=True)
class ChannelLists:
    ocl: tuple[int, ...] = ()
    bcl: tuple[int, ...] = ()  # FIFO: head is the next switch target
    pcl: tuple[int, ...] = ()
    ccl: tuple[int, ...] = ()
    dcl: tuple[int, ...] = ()

    def where(self, ch: int) -> str | None:
        for name in LIST_NAMES:
            if ch in getattr(self, name):
                return name
        return None

    def tracked(self) -> tuple[int, ...]:
        """Channels sensed out of band."""
        return tuple(sorted(set(self.bcl) | set(self.pcl) | set(self.ccl)))


@dataclass(frozen=True)
class PromotionTimer:
    channel: int
    idle_since: float
    last_sensed: float


@dataclass(frozen=True)
class SwitchEvent:
    cell: int
    from_ch: int
    to_ch: int
    deadline: float


@dataclass(frozen=True)
class Transition:
    time: float
    cell: int
    channel: int
    source: str
    target: str
    idle_for: float = float("nan")  # only for ccl -> bcl promotions
    max_gap: float = float("nan")


def _without(seq: Iterable[int], drop: set[int]) -> tuple[int, ...]:
    return tuple(c for c in seq if c not in drop)


def _sorted_add(seq: Iterable[int], add: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(set(seq) | set(add)))


def on_busy_verdict(lists: ChannelLists, ch_b: int, num_channels: int, *, cell: int = 0,
                    now: float = 0.0, moving_time: float = 2.0
                    ) -> tuple[ChannelLists, SwitchEvent | None]:
    """Vacate ``ch_b`` and its adjacent channels into PCL and switch to the BCL head.

    Adjacent channels are vacated from whichever list holds them except DCL.
    With an empty BCL the operating slot is dropped and no event is returned
    (an outage).
    """
    if ch_b not in lists.ocl:
        raise NotOperating(f"channel {ch_b} is not operating")
    vacate = {c for c in (ch_b - 1, ch_b, ch_b + 1)
              if 1 <= c <= num_channels and c not in lists.dcl and lists.where(c) is not None}
    ocl = _without(lists.ocl, vacate)
    bcl = _without(lists.bcl, vacate)
    ccl = _without(lists.ccl, vacate)
    pcl = _sorted_add(lists.pcl, vacate)
    event = None
    if bcl:
        target, bcl = bcl[0], bcl[1:]
        ocl = _sorted_add(ocl, [target])
        event = SwitchEvent(cell=cell, from_ch=ch_b, to_ch=target, deadline=now + moving_time)
    return ChannelLists(ocl=ocl, bcl=bcl, pcl=pcl, ccl=ccl, dcl=lists.dcl), event


def obs_update(lists: ChannelLists, timers: Mapping[int, PromotionTimer], ch: int,
               sensed_idle: bool, now: float, *, promotion_idle: float = 30.0,
               max_sensing_gap: float = 6.0, blocked: bool = False
               ) -> tuple[ChannelLists, dict[int, PromotionTimer]]:
    """Apply one out-of-band sensing result for ``ch``.

    ``blocked`` holds a candidate channel back from BCL (e.g. a neighbour
    operates on it); its idle timer keeps running.
    """
    timers = dict(timers)
    where = lists.where(ch)
    if where not in ("pcl", "ccl", "bcl"):
        raise NotTracked(f"channel {ch} is not in PCL, CCL or BCL")
    if not sensed_idle:
        timers.pop(ch, None)
        if where == "pcl":
            return lists, timers
        return replace(lists, bcl=_without(lists.bcl, {ch}), ccl=_without(lists.ccl, {ch}),
                       pcl=_sorted_add(lists.pcl, [ch])), timers
    if where == "bcl":
        return lists, timers
    if where == "pcl":
        timers[ch] = PromotionTimer(ch, idle_since=now, last_sensed=now)
        return replace(lists, pcl=_without(lists.pcl, {ch}), ccl=_sorted_add(lists.ccl, [ch])), timers
    t = timers.get(ch)
    if t is None or now - t.last_sensed > max_sensing_gap:
        t = PromotionTimer(ch, idle_since=now, last_sensed=now)
    else:
        t = PromotionTimer(ch, idle_since=t.idle_since, last_sensed=now)
    timers[ch] = t
    if now - t.idle_since >= promotion_idle and not blocked:
        timers.pop(ch)
        return replace(lists, ccl=_without(lists.ccl, {ch}), bcl=lists.bcl + (ch,)), timers
    return lists, timers


def compute_lps(lists: ChannelLists, neighbor_lists: Sequence[ChannelLists]
                ) -> tuple[set[int], set[int], set[int], set[int]]:
    """Local priority sets and the selected (first non-empty) one."""
    own = set(lists.bcl) | set(lists.ccl)
    nb_spare = set().union(*[set(n.ccl) | set(n.bcl) for n in neighbor_lists]) if neighbor_lists else set()
    nb_ocl = set().union(*[set(n.ocl) for n in neighbor_lists]) if neighbor_lists else set()
    lps1 = own - nb_spare
    lps2 = own - nb_ocl
    lps3 = nb_ocl
    selected = next((s for s in (lps1, lps2, lps3) if s), set())
    return lps1, lps2, lps3, selected


def validate_lists(lists: Sequence[ChannelLists], neighbors: Sequence[Iterable[int]]) -> list[str]:
    """Intra-cell overlaps and neighbour OCL/BCL collisions, as readable strings (cells 1-based)."""
    report = []
    for j, cl in enumerate(lists):
        for a in range(len(LIST_NAMES)):
            for b in range(a + 1, len(LIST_NAMES)):
                both = set(getattr(cl, LIST_NAMES[a])) & set(getattr(cl, LIST_NAMES[b]))
                if both:
                    report.append(f"cell {j + 1}: {LIST_NAMES[a].upper()} and "
                                  f"{LIST_NAMES[b].upper()} share {sorted(both)}")
    for j, nbs in enumerate(neighbors):
        for l in sorted(nbs):
            if l <= j:
                continue
            both = set(lists[j].ocl) & set(lists[l].ocl)
            if both:
                report.append(f"cells {j + 1},{l + 1}: neighbours both operate {sorted(both)}")
        for l in sorted(nbs):
            both = set(lists[j].bcl) & set(lists[l].ocl)
            if both:
                report.append(f"cells {j + 1},{l + 1}: backup of {j + 1} is operating in {l + 1}: "
                              f"{sorted(both)}")
    return report


def transitions_between(before: ChannelLists, after: ChannelLists) -> list[tuple[int, str | None, str | None]]:
    """(channel, source list, target list) for every channel whose list changed."""
    if before == after:
        return []
    src = {c: n for n in reversed(LIST_NAMES) for c in getattr(before, n)}
    dst = {c: n for n in reversed(LIST_NAMES) for c in getattr(after, n)}
    return [(ch, src.get(ch), dst.get(ch)) for ch in sorted(set(src) | set(dst))
            if src.get(ch) != dst.get(ch)]


# -- initial lists and the per-superframe management cycle -----------------------

def initial_lists(num_cells: int, num_channels: int, neighbors: Sequence[Iterable[int]],
                  disallowed: Sequence[set[int]], operating: int = 1, backup: int = 2
                  ) -> list[ChannelLists]:
    """Greedy neighbour-aware start: OCL by colouring in a per-cell rotated channel
    order, then BCL avoiding neighbours' OCL and BCL where possible; the rest go to CCL."""
    lists: list[ChannelLists] = []
    chosen_ocl: list[set[int]] = [set() for _ in range(num_cells)]
    chosen_bcl: list[list[int]] = [[] for _ in range(num_cells)]
    for j in range(num_cells):
        order = [(j * 3 + i) % num_channels + 1 for i in range(num_channels)]
        nb = [l for l in neighbors[j] if l < j]
        taken = set().union(*[chosen_ocl[l] for l in nb]) if nb else set()
        for ch in order:
            if len(chosen_ocl[j]) >= operating:
                break
            if ch not in disallowed[j] and ch not in taken:
                chosen_ocl[j].add(ch)
    for j in range(num_cells):
        nb = list(neighbors[j])
        nb_ocl = set().union(*[chosen_ocl[l] for l in nb]) if nb else set()
        nb_bcl = set().union(*[set(chosen_bcl[l]) for l in nb if l < j]) if nb else set()
        order = [(j * 3 + operating + i) % num_channels + 1 for i in range(num_channels)]
        free = [c for c in order if c not in disallowed[j] and c not in chosen_ocl[j] and c not in nb_ocl]
        pref = [c for c in free if c not in nb_bcl] + [c for c in free if c in nb_bcl]
        chosen_bcl[j] = pref[:backup]
    for j in range(num_cells):
        used = chosen_ocl[j] | set(chosen_bcl[j]) | disallowed[j]
        ccl = tuple(c for c in range(1, num_channels + 1) if c not in used)
        lists.append(ChannelLists(ocl=tuple(sorted(chosen_ocl[j])), bcl=tuple(chosen_bcl[j]),
                                  ccl=ccl, dcl=tuple(sorted(disallowed[j]))))
    return lists


@dataclass
class CellChannelState:
    lists: ChannelLists
    timers: dict[int, PromotionTimer] = field(default_factory=dict)


def move(lists: ChannelLists, ch: int, source: str, target: str) -> ChannelLists:
    """Move one channel between two lists (BCL appends at the tail)."""
    if (source, target) not in ALLOWED_EDGES:
        raise ValueError(f"{source}->{target} is not an allowed move")
    kw = {source: _without(getattr(lists, source), {ch})}
    kw[target] = getattr(lists, target) + (ch,) if target == "bcl" else _sorted_add(getattr(lists, target), [ch])
    return replace(lists, **kw)
