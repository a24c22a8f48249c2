"""Track peak RAM, peak GPU RAM and compute time of a process and its descendants."""
from .gpu_metrics import GpuSnapshot, GpuSource, NvidiaSmiBackend, ReplayBackend
from .proc_metrics import RamSnapshot, RSSValues
from .report import render_json, render_text, to_json
from .tracker import (
    ComputeTime, MaxGPURAM, MaxRAM, Tracker, TrackerConfig, TrackerStateError, TrackingResults,
    UnitError, scoped_track,
)

__all__ = [
    'ComputeTime', 'GpuSnapshot', 'GpuSource', 'MaxGPURAM', 'MaxRAM', 'NvidiaSmiBackend',
    'RSSValues', 'RamSnapshot', 'ReplayBackend', 'Tracker', 'TrackerConfig', 'TrackerStateError',
    'TrackingResults', 'UnitError', 'render_json', 'render_text', 'scoped_track', 'to_json',
]
