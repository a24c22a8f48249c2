"""RAM measurements for a process tree and for the whole system.

All figures are integer byte counts. On Linux the private/shared split comes
from ``/proc/<pid>/smaps_rollup``; elsewhere only the total RSS is known and
the private and shared fields stay 0.
"""
from __future__ import annotations

import dataclasses
import logging
import os
from typing import Iterable

import psutil

log = logging.getLogger(__name__)

_ROLLUP_PRIVATE = ('Private_Clean:', 'Private_Dirty:')
_ROLLUP_SHARED = ('Shared_Clean:', 'Shared_Dirty:')


@dataclasses.dataclass(frozen=True)
class RSSValues:
    """Resident-set sizes of one accounting scope."""
    total_rss: float = 0
    private_rss: float = 0
    shared_rss: float = 0

    def __add__(self, other: RSSValues) -> RSSValues:
        return RSSValues(
            self.total_rss + other.total_rss,
            self.private_rss + other.private_rss,
            self.shared_rss + other.shared_rss,
        )


ZERO_RSS = RSSValues(0, 0, 0)


@dataclasses.dataclass(frozen=True)
class RamSnapshot:
    system_capacity: int
    system_used: int
    main: RSSValues = ZERO_RSS
    descendents: RSSValues = ZERO_RSS
    combined: RSSValues = ZERO_RSS
    decomposition_available: bool = True
    # pids enumerated for this snapshot, reused for GPU attribution
    descendant_pids: frozenset = frozenset()


def decomposition_available() -> bool:
    """True when this platform reports per-process private/shared RSS."""
    return os.path.exists('/proc/self/smaps_rollup')


def list_descendants(pid: int) -> set[int]:
    """Return the pids of all live children, grandchildren, etc. of ``pid``.

    A target that has exited, or that loses children mid-walk, yields
    whatever could still be seen.
    """
    try:
        children = psutil.Process(pid).children(recursive=True)
    except (psutil.NoSuchProcess, psutil.AccessDenied, ValueError):
        return set()
    return {child.pid for child in children if child.pid != pid}


def parse_smaps_rollup(text: str) -> RSSValues:
    """Sum the private and shared resident fields of an smaps rollup (kB)."""
    private = shared = 0
    for line in text.splitlines():
        fields = line.split()
        if len(fields) < 2:
            continue
        if fields[0] in _ROLLUP_PRIVATE:
            private += int(fields[1]) * 1024
        elif fields[0] in _ROLLUP_SHARED:
            shared += int(fields[1]) * 1024
    return RSSValues(private + shared, private, shared)


def read_process_rss(pid: int, decomposed: bool | None = None) -> RSSValues:
    """Current resident-set decomposition of ``pid``; zeros if it is gone."""
    if decomposed is None:
        decomposed = decomposition_available()
    try:
        if decomposed:
            with open(f'/proc/{pid}/smaps_rollup') as f:
                return parse_smaps_rollup(f.read())
        return RSSValues(psutil.Process(pid).memory_info().rss, 0, 0)
    except (FileNotFoundError, ProcessLookupError, psutil.NoSuchProcess):
        return ZERO_RSS
    except (PermissionError, psutil.AccessDenied):
        log.debug('No permission to read memory of process %d', pid)
        return ZERO_RSS


def read_system_memory() -> tuple[int, int]:
    """Return ``(capacity, used)`` where used is capacity minus available."""
    vm = psutil.virtual_memory()
    return vm.total, max(vm.total - vm.available, 0)


def combine(members: Iterable[RSSValues], decomposed: bool) -> RSSValues:
    """Aggregate a set of processes, counting shared memory once.

    Shared regions are not individually observable, so the largest shared
    figure among the members stands in for the union of all of them.
    Without a decomposition the totals are simply summed.
    """
    members = list(members)
    if not decomposed:
        return RSSValues(sum(m.total_rss for m in members), 0, 0)
    private = sum(m.private_rss for m in members)
    shared = max((m.shared_rss for m in members), default=0)
    return RSSValues(private + shared, private, shared)


def snapshot_ram(pid: int) -> RamSnapshot:
    """Measure ``pid``, its descendants and the system at one instant."""
    decomposed = decomposition_available()
    capacity, used = read_system_memory()
    descendants = list_descendants(pid)
    main = read_process_rss(pid, decomposed)
    others = [read_process_rss(child, decomposed) for child in sorted(descendants)]
    descendents = sum(others, ZERO_RSS)
    return RamSnapshot(
        system_capacity=capacity,
        system_used=used,
        main=main,
        descendents=descendents,
        combined=combine([main, *others], decomposed),
        decomposition_available=decomposed,
        descendant_pids=frozenset(descendants),
    )
