"""Background tracking of peak RAM, peak GPU RAM and wall-clock time."""
from __future__ import annotations

import dataclasses
import logging
import os
import threading
import time
from typing import Callable

import psutil

from .gpu_metrics import GpuSnapshot, GpuSource
from .proc_metrics import ZERO_RSS, RamSnapshot, RSSValues, snapshot_ram

log = logging.getLogger(__name__)

RAM_UNITS = ('bytes', 'kilobytes', 'megabytes', 'gigabytes', 'terabytes')
TIME_UNITS = {'seconds': 1, 'minutes': 60, 'hours': 3600, 'days': 86400}

KILL_EXIT_CODE = 70


class UnitError(ValueError):
    pass


class TrackerStateError(RuntimeError):
    pass


def _check_unit(field: str, value: str, allowed) -> None:
    if value not in allowed:
        raise UnitError(
            f'{value!r} is not a valid {field}. Valid values are {", ".join(repr(u) for u in allowed)}.')


def convert_ram(value: float, unit: str) -> float:
    """Scale a byte count to ``unit`` (decimal, a factor of 1000 per step)."""
    _check_unit('RAM unit', unit, RAM_UNITS)
    return value / 10 ** (3 * RAM_UNITS.index(unit))


def convert_time(value: float, unit: str) -> float:
    _check_unit('time unit', unit, TIME_UNITS)
    return value / TIME_UNITS[unit]


def scale_rss(values: RSSValues, unit: str) -> RSSValues:
    # keeps total == private + shared exact in the scaled figures
    if values.private_rss or values.shared_rss:
        private = convert_ram(values.private_rss, unit)
        shared = convert_ram(values.shared_rss, unit)
        return RSSValues(private + shared, private, shared)
    return RSSValues(convert_ram(values.total_rss, unit), 0.0, 0.0)


@dataclasses.dataclass(frozen=True)
class MaxRAM:
    unit: str
    system_capacity: float
    system: float
    main: RSSValues
    descendents: RSSValues
    combined: RSSValues


@dataclasses.dataclass(frozen=True)
class MaxGPURAM:
    unit: str
    main: float
    descendents: float
    combined: float


@dataclasses.dataclass(frozen=True)
class ComputeTime:
    unit: str
    time: float


@dataclasses.dataclass(frozen=True)
class TrackingResults:
    max_ram: MaxRAM
    max_gpu_ram: MaxGPURAM
    compute_time: ComputeTime
    notes: tuple[str, ...] = ()


@dataclasses.dataclass(frozen=True)
class TrackerConfig:
    """Profiling settings; validated on construction.

    ``process_id=None`` tracks the calling process.
    """
    sleep_time: float = 1.0
    ram_unit: str = 'gigabytes'
    gpu_ram_unit: str = 'gigabytes'
    time_unit: str = 'hours'
    process_id: int | None = None
    n_join_attempts: int = 5
    join_timeout: float = 10.0
    kill_if_join_fails: bool = False

    def __post_init__(self):
        _check_unit('ram_unit', self.ram_unit, RAM_UNITS)
        _check_unit('gpu_ram_unit', self.gpu_ram_unit, RAM_UNITS)
        _check_unit('time_unit', self.time_unit, TIME_UNITS)
        if not self.sleep_time > 0:
            raise ValueError(f'sleep_time must be positive, got {self.sleep_time}')
        if not self.join_timeout > 0:
            raise ValueError(f'join_timeout must be positive, got {self.join_timeout}')
        if isinstance(self.n_join_attempts, bool) or not isinstance(self.n_join_attempts, int) \
                or self.n_join_attempts < 1:
            raise ValueError(f'n_join_attempts must be a positive integer, got {self.n_join_attempts!r}')
        if self.process_id is not None and self.process_id <= 0:
            raise ValueError(f'process_id must be positive, got {self.process_id}')

    @property
    def pid(self) -> int:
        return os.getpid() if self.process_id is None else self.process_id


class Tracker:
    """Tracks the peak RAM, peak GPU RAM and compute time of a process.

    A background thread samples the process (and all its descendants) every
    ``sleep_time`` seconds between :meth:`start` and :meth:`stop`, or for the
    body of a ``with`` block. Each RAM and GPU scope keeps the sample with the
    largest total seen so far. A tracker can only be run once.

    ``ram_source`` and ``gpu_source`` replace the live measurements, mainly
    for tests: ``ram_source(pid) -> RamSnapshot`` and
    ``gpu_source(pid, descendant_pids) -> GpuSnapshot``.
    """

    def __init__(
            self, sleep_time: float = 1.0, ram_unit: str = 'gigabytes',
            gpu_ram_unit: str = 'gigabytes', time_unit: str = 'hours',
            process_id: int | None = None, n_join_attempts: int = 5,
            join_timeout: float = 10.0, kill_if_join_fails: bool = False, *,
            ram_source: Callable[[int], RamSnapshot] | None = None,
            gpu_source: Callable[..., GpuSnapshot] | None = None):
        self.config = TrackerConfig(
            sleep_time, ram_unit, gpu_ram_unit, time_unit, process_id,
            n_join_attempts, join_timeout, kill_if_join_fails)
        self._ram_source = ram_source if ram_source is not None else snapshot_ram
        self._gpu_source = gpu_source if gpu_source is not None else GpuSource()
        self._lock = threading.Lock()
        self._stop_event = threading.Event()
        self._thread: threading.Thread | None = None
        self._state = 'created'
        self._notes: list[str] = []
        self._start_time = 0.0
        self._elapsed = 0.0
        self._system_capacity = 0
        self._system = 0
        self._ram = dict.fromkeys(('main', 'descendents', 'combined'), ZERO_RSS)
        self._gpu = dict.fromkeys(('main', 'descendents', 'combined'), 0)
        self._results: TrackingResults | None = None
        self.join_attempts_made = 0

    @classmethod
    def from_config(cls, config: TrackerConfig, **sources) -> Tracker:
        return cls(**dataclasses.asdict(config), **sources)

    @property
    def state(self) -> str:
        return self._state

    def _note(self, message: str) -> None:
        with self._lock:
            if message not in self._notes:
                self._notes.append(message)
        log.warning(message)

    def start(self) -> None:
        if self._state != 'created':
            raise TrackerStateError(f'Cannot start a tracker that is {self._state}; create a new one.')
        pid = self.config.pid
        if not psutil.pid_exists(pid):
            self._note(f'Process {pid} does not exist; its RAM and GPU RAM are reported as 0')
        self._start_time = time.perf_counter()
        self._thread = threading.Thread(target=self._run, name='gpu-tracker', daemon=True)
        self._state = 'running'
        self._thread.start()

    def _run(self) -> None:
        failed = False
        while True:
            try:
                self.sample_once()
            except Exception as error:
                if not failed:
                    failed = True
                    self._note(f'Resource sampling failed: {error}')
            if self._stop_event.wait(self.config.sleep_time):
                break

    def sample_once(self) -> None:
        """Take one RAM and GPU sample and fold it into the maxima."""
        pid = self.config.pid
        ram = self._ram_source(pid)
        gpu = self._gpu_source(pid, ram.descendant_pids)
        now = time.perf_counter()
        with self._lock:
            self._system_capacity = ram.system_capacity
            self._system = max(self._system, ram.system_used)
            for scope in self._ram:
                sample = getattr(ram, scope)
                if sample.total_rss > self._ram[scope].total_rss:
                    self._ram[scope] = sample
            for scope in self._gpu:
                self._gpu[scope] = max(self._gpu[scope], getattr(gpu, scope))
            self._elapsed = max(self._elapsed, now - self._start_time)

    def _build_results(self, elapsed: float) -> TrackingResults:
        cfg = self.config
        with self._lock:
            ram = MaxRAM(
                cfg.ram_unit,
                convert_ram(self._system_capacity, cfg.ram_unit),
                convert_ram(self._system, cfg.ram_unit),
                *(scale_rss(self._ram[scope], cfg.ram_unit) for scope in ('main', 'descendents', 'combined')))
            gpu = MaxGPURAM(
                cfg.gpu_ram_unit,
                *(convert_ram(self._gpu[scope], cfg.gpu_ram_unit) for scope in ('main', 'descendents', 'combined')))
            notes = list(self._notes)
        gpu_note = getattr(self._gpu_source, 'note', None)
        if gpu_note and gpu_note not in notes:
            notes.append(gpu_note)
        return TrackingResults(ram, gpu, ComputeTime(cfg.time_unit, convert_time(elapsed, cfg.time_unit)), tuple(notes))

    def stop(self) -> TrackingResults:
        """End tracking and return the final measurements.

        The sampler thread is joined up to ``n_join_attempts`` times, waiting
        ``join_timeout`` seconds each time. If it still refuses to end, a
        warning note is recorded and the thread is abandoned, or the whole
        program exits when ``kill_if_join_fails`` is set.
        """
        if self._state != 'running':
            raise TrackerStateError(f'Cannot stop a tracker that is {self._state}.')
        self._stop_event.set()
        for attempt in range(1, self.config.n_join_attempts + 1):
            self.join_attempts_made = attempt
            self._thread.join(timeout=self.config.join_timeout)
            if not self._thread.is_alive():
                break
            log.debug('Join attempt %d of the tracking thread timed out', attempt)
        end = time.perf_counter()
        if self._thread.is_alive():
            message = (
                f'Thread is still alive after {self.config.n_join_attempts} attempts to join it '
                f'({self.config.join_timeout} s each).')
            if self.config.kill_if_join_fails:
                log.error('%s Terminating the program.', message)
                logging.shutdown()
                os._exit(KILL_EXIT_CODE)
            self._note(message)
        self._results = self._build_results(max(end - self._start_time, self._elapsed))
        self._state = 'stopped'
        return self._results

    def current_results(self) -> TrackingResults:
        if self._state == 'created':
            raise TrackerStateError('Tracking has not started yet.')
        if self._state == 'stopped':
            return self._results
        return self._build_results(time.perf_counter() - self._start_time)

    @property
    def max_ram(self) -> MaxRAM:
        return self.current_results().max_ram

    @property
    def max_gpu_ram(self) -> MaxGPURAM:
        return self.current_results().max_gpu_ram

    @property
    def compute_time(self) -> ComputeTime:
        return self.current_results().compute_time

    def __enter__(self) -> Tracker:
        self.start()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.stop()

    def __str__(self) -> str:
        from .report import render_text
        return render_text(self.current_results())

    def to_json(self) -> dict:
        from .report import to_json
        return to_json(self.current_results())


def scoped_track(body: Callable[[], object], **config) -> TrackingResults:
    """Run ``body`` under a fresh tracker and return its results.

    The tracker is stopped even if ``body`` raises.
    """
    with Tracker(**config) as tracker:
        body()
    return tracker.current_results()
