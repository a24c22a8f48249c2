"""Per-process GPU memory via ``nvidia-smi`` or recorded query output."""
from __future__ import annotations

import dataclasses
import logging
import os
import subprocess
from typing import Iterable, Sequence

log = logging.getLogger(__name__)

QUERY_COMMAND = ('nvidia-smi', '--query-compute-apps=pid,used_memory', '--format=csv')
# the tool labels figures MiB; reported values are treated as decimal megabytes
BYTES_PER_REPORTED_UNIT = 10 ** 6
GPU_UNAVAILABLE = 'GPU unavailable: nvidia-smi could not be run, GPU RAM is reported as 0'


class GpuQueryParseError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class GpuSnapshot:
    main: int = 0
    descendents: int = 0
    combined: int = 0


def parse_compute_apps_csv(text: str) -> dict[int, int]:
    """Map pid to GPU bytes from ``--query-compute-apps=pid,used_memory`` CSV.

    The first non-blank line is the header. A pid listed on several devices
    gets the sum of its figures.
    """
    usage: dict[int, int] = {}
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if not header_seen:
            header_seen = True
            continue
        fields = [field.strip() for field in line.split(',')]
        if len(fields) != 2:
            raise GpuQueryParseError(f'line {lineno}: expected "pid, used_memory", got {raw!r}')
        pid_field, memory_field = fields
        if memory_field.endswith('MiB'):
            memory_field = memory_field[:-3].strip()
        try:
            pid = int(pid_field)
            memory = int(memory_field)
        except ValueError:
            raise GpuQueryParseError(f'line {lineno}: non-numeric field in {raw!r}') from None
        if pid <= 0 or memory < 0:
            raise GpuQueryParseError(f'line {lineno}: out-of-range value in {raw!r}')
        usage[pid] = usage.get(pid, 0) + memory * BYTES_PER_REPORTED_UNIT
    return usage


class NvidiaSmiBackend:
    """Runs ``nvidia-smi`` in a subprocess on every query.

    If the tool is missing, fails, or times out, the query returns an empty
    map and ``note`` is set (once) for the report.
    """

    def __init__(self, command: Sequence[str] = QUERY_COMMAND, timeout: float = 5.0):
        self.command = list(command)
        self.timeout = timeout
        self.note: str | None = None
        self._missing = False

    def _latch(self, note: str) -> dict[int, int]:
        if self.note is None:
            self.note = note
            log.warning(note)
        return {}

    def query(self) -> dict[int, int]:
        if self._missing:
            return {}
        try:
            proc = subprocess.run(
                self.command, capture_output=True, text=True, timeout=self.timeout)
        except (FileNotFoundError, PermissionError):
            self._missing = True
            return self._latch(GPU_UNAVAILABLE)
        except subprocess.TimeoutExpired:
            return self._latch(
                f'GPU query timed out after {self.timeout} s, GPU RAM is reported as 0')
        if proc.returncode != 0:
            return self._latch(GPU_UNAVAILABLE)
        return parse_compute_apps_csv(proc.stdout)


class ReplayBackend:
    """Serves recorded query outputs in order, repeating the last one."""

    def __init__(self, outputs: Iterable[str]):
        self.outputs = list(outputs)
        if not self.outputs:
            raise ValueError('ReplayBackend needs at least one recorded output')
        self.note: str | None = None
        self._next = 0

    @classmethod
    def from_files(cls, paths: Iterable[str | os.PathLike]) -> ReplayBackend:
        texts = []
        for path in paths:
            with open(path) as f:
                texts.append(f.read())
        return cls(texts)

    def query(self) -> dict[int, int]:
        text = self.outputs[min(self._next, len(self.outputs) - 1)]
        self._next += 1
        return parse_compute_apps_csv(text)


def query_gpu_usage(backend) -> dict[int, int]:
    return backend.query()


def snapshot_gpu(pid: int, descendants: Iterable[int], usage: dict[int, int]) -> GpuSnapshot:
    """Attribute GPU memory to the target and its descendants.

    GPU memory is assumed unshared, so the combined figure is a plain sum.
    """
    main = usage.get(pid, 0)
    descendents = sum(usage.get(child, 0) for child in set(descendants) if child != pid)
    return GpuSnapshot(main, descendents, main + descendents)


class GpuSource:
    """Callable sampling source: ``(pid, descendants) -> GpuSnapshot``."""

    def __init__(self, backend=None):
        self.backend = backend if backend is not None else NvidiaSmiBackend()

    @property
    def note(self) -> str | None:
        return getattr(self.backend, 'note', None)

    def __call__(self, pid: int, descendants: Iterable[int]) -> GpuSnapshot:
        return snapshot_gpu(pid, descendants, query_gpu_usage(self.backend))
