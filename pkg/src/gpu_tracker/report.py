"""Text and JSON renderings of tracking results."""
from __future__ import annotations

import json

from .proc_metrics import RSSValues
from .tracker import ComputeTime, MaxGPURAM, MaxRAM, TrackingResults

FORMATS = ('text', 'json')
_SCOPES = ('main', 'descendents', 'combined')
_RSS_LABELS = (('total_rss', 'Total RSS'), ('private_rss', 'Private RSS'), ('shared_rss', 'Shared RSS'))


def _fmt(value: float) -> str:
    # round() is correctly rounded half-even; repr keeps at least one decimal
    return repr(round(float(value), 3))


def render_text(results: TrackingResults) -> str:
    ram, gpu, t = results.max_ram, results.max_gpu_ram, results.compute_time
    lines = [
        'Max RAM:',
        f'  Unit: {ram.unit}',
        f'  System capacity: {_fmt(ram.system_capacity)}',
        f'  System: {_fmt(ram.system)}',
    ]
    for scope in _SCOPES:
        values = getattr(ram, scope)
        lines.append(f'  {scope.capitalize()}:')
        lines.extend(f'    {label}: {_fmt(getattr(values, field))}' for field, label in _RSS_LABELS)
    lines += ['Max GPU RAM:', f'  Unit: {gpu.unit}']
    lines.extend(f'  {scope.capitalize()}: {_fmt(getattr(gpu, scope))}' for scope in _SCOPES)
    lines += ['Compute time:', f'  Unit: {t.unit}', f'  Time: {_fmt(t.time)}']
    if results.notes:
        lines.append('Notes:')
        lines.extend(f'  - {note}' for note in results.notes)
    return '\n'.join(lines)


def to_json(results: TrackingResults) -> dict:
    ram, gpu, t = results.max_ram, results.max_gpu_ram, results.compute_time
    document = {
        'max_ram': {
            'unit': ram.unit,
            'system_capacity': ram.system_capacity,
            'system': ram.system,
            **{scope: {field: getattr(getattr(ram, scope), field) for field, _ in _RSS_LABELS}
               for scope in _SCOPES},
        },
        'max_gpu_ram': {'unit': gpu.unit, **{scope: getattr(gpu, scope) for scope in _SCOPES}},
        'compute_time': {'unit': t.unit, 'time': t.time},
    }
    if results.notes:
        document['notes'] = list(results.notes)
    return document


def render_json(results: TrackingResults) -> str:
    return json.dumps(to_json(results), indent=2)


def from_json(document: dict) -> TrackingResults:
    """Inverse of :func:`to_json`."""
    ram, gpu, t = document['max_ram'], document['max_gpu_ram'], document['compute_time']
    return TrackingResults(
        MaxRAM(ram['unit'], ram['system_capacity'], ram['system'],
               *(RSSValues(**ram[scope]) for scope in _SCOPES)),
        MaxGPURAM(gpu['unit'], *(gpu[scope] for scope in _SCOPES)),
        ComputeTime(t['unit'], t['time']),
        tuple(document.get('notes', ())),
    )


def parse_text(text: str) -> dict:
    """Read a text report back into nested dicts of rounded values."""
    parsed: dict = {}
    stack: list[tuple[int, dict]] = [(-1, parsed)]
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith('- '):
            continue
        indent = len(line) - len(line.lstrip(' '))
        key, _, value = line.strip().partition(':')
        while stack[-1][0] >= indent:
            stack.pop()
        parent = stack[-1][1]
        value = value.strip()
        if value:
            try:
                parent[key] = float(value)
            except ValueError:
                parent[key] = value
        else:
            parent[key] = {}
            stack.append((indent, parent[key]))
    return parsed


def render(results: TrackingResults, fmt: str = 'text') -> str:
    if fmt not in FORMATS:
        raise ValueError(f'{fmt!r} is not a valid format. Valid values are \'json\' and \'text\'.')
    return render_json(results) if fmt == 'json' else render_text(results)
