import pathlib
import random
import subprocess
import sys
import threading

import pytest

from gpu_tracker.gpu_metrics import GpuSnapshot
from gpu_tracker.proc_metrics import RamSnapshot, RSSValues

FIXTURES = pathlib.Path(__file__).parent / 'fixtures'
CAPACITY = 64_000_000_000


@pytest.fixture
def fixtures():
    return FIXTURES


class Script:
    """Replays a fixed list of items, then repeats the last one."""

    def __init__(self, items):
        self.items = list(items)
        self.calls = 0
        self.exhausted = threading.Event()

    def next(self):
        item = self.items[min(self.calls, len(self.items) - 1)]
        self.calls += 1
        if self.calls >= len(self.items):
            self.exhausted.set()
        return item


class ScriptedRam(Script):
    def __call__(self, pid):
        return self.next()


class ScriptedGpu(Script):
    def __call__(self, pid, descendants):
        return self.next()


class BlockingRam:
    """RAM source that hangs once released to block, ignoring the stop signal."""

    def __init__(self):
        self.entered = threading.Event()
        self.release = threading.Event()

    def __call__(self, pid):
        self.entered.set()
        self.release.wait()
        return ram_snapshot()


def zero_gpu(pid, descendants):
    return GpuSnapshot()


def rss(private, shared):
    return RSSValues(private + shared, private, shared)


def ram_snapshot(main=RSSValues(), descendents=RSSValues(), combined=RSSValues(), used=0):
    return RamSnapshot(CAPACITY, used, main, descendents, combined)


def random_script(seed, n_ticks=100):
    rng = random.Random(seed)

    def triple():
        return rss(rng.randrange(0, 10 ** 10), rng.randrange(0, 10 ** 9))

    ram = [ram_snapshot(triple(), triple(), triple(), rng.randrange(0, CAPACITY)) for _ in range(n_ticks)]
    gpu = []
    for _ in range(n_ticks):
        main, desc = rng.randrange(0, 10 ** 10), rng.randrange(0, 10 ** 10)
        gpu.append(GpuSnapshot(main, desc, main + desc))
    return ram, gpu


def spawn_python(code, *args):
    """Start ``python -c code`` and wait for it to print its first line."""
    child = subprocess.Popen(
        [sys.executable, '-c', code, *args], stdout=subprocess.PIPE, stdin=subprocess.PIPE, text=True)
    child.stdout.readline()
    return child


# allocates argv[1] bytes, touches every page, reports ready and holds until stdin closes
HOLD_BUFFER = '''
import sys
buf = bytearray(b"\\x01") * int(sys.argv[1])
print("ready", flush=True)
sys.stdin.read()
'''


CRITERIA = []


class criterion:
    """Records a pass/fail line for an acceptance criterion."""

    def __init__(self, number, title):
        self.line = f'AC{number:<2} {title}'

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            CRITERIA.append(f'PASS  {self.line}')
        elif not issubclass(exc_type, pytest.skip.Exception):
            CRITERIA.append(f'FAIL  {self.line}: {exc}')
        else:
            CRITERIA.append(f'SKIP  {self.line}: {exc}')
        print(CRITERIA[-1])
        return False


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section('acceptance criteria')
        for line in CRITERIA:
            terminalreporter.write_line(line)
