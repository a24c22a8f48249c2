"""
GPU RAM from recorded nvidia-smi output
=======================================

GPU RAM comes from ``nvidia-smi --query-compute-apps=pid,used_memory``.
Without a GPU, a replay backend can stand in for the tool. Here we also
script the RAM readings, so the run is reproducible on any machine.
"""

import dataclasses
import time

import gpu_tracker as gput
from gpu_tracker.gpu_metrics import GpuSource, ReplayBackend
from gpu_tracker.proc_metrics import RamSnapshot, RSSValues

recorded = [
    'pid, used_gpu_memory [MiB]\n',
    'pid, used_gpu_memory [MiB]\n1234, 506 MiB\n5678, 314 MiB\n',
    'pid, used_gpu_memory [MiB]\n5678, 100 MiB\n',
]
snapshot = RamSnapshot(
    system_capacity=16_000_000_000, system_used=4_000_000_000,
    main=RSSValues(300_000_000, 280_000_000, 20_000_000),
    combined=RSSValues(300_000_000, 280_000_000, 20_000_000),
    descendant_pids=frozenset({5678}),
)


def ram_source(pid):
    return snapshot


tracker = gput.Tracker(
    process_id=1234, sleep_time=0.05, gpu_ram_unit='megabytes',
    ram_source=ram_source, gpu_source=GpuSource(ReplayBackend(recorded)))
with tracker:
    time.sleep(0.3)

# peak per scope: main 506, descendants 314, combined 820 megabytes
print(tracker.max_gpu_ram)
print(gput.render_text(dataclasses.replace(tracker.current_results(), notes=())))
