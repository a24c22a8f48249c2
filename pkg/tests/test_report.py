import json

import pytest
from hypothesis import given, strategies as st

from gpu_tracker.proc_metrics import RSSValues
from gpu_tracker.report import from_json, parse_text, render, render_json, render_text, to_json
from gpu_tracker.tracker import ComputeTime, MaxGPURAM, MaxRAM, TrackingResults


@pytest.fixture
def tutorial(fixtures):
    return from_json(json.loads((fixtures / 'tutorial_megabytes.json').read_text()))


def zero_results(ram_unit='gigabytes', time_unit='hours', notes=()):
    zero = RSSValues(0.0, 0.0, 0.0)
    return TrackingResults(
        MaxRAM(ram_unit, 0.0, 0.0, zero, zero, zero), MaxGPURAM(ram_unit, 0.0, 0.0, 0.0),
        ComputeTime(time_unit, 0.0), notes)


def test_text_golden(tutorial, fixtures):
    assert render_text(tutorial) + '\n' == (fixtures / 'tutorial_megabytes.txt').read_text()


def test_json_golden(tutorial, fixtures):
    assert render_json(tutorial) + '\n' == (fixtures / 'tutorial_megabytes.json').read_text()


@pytest.mark.parametrize('value, text', [
    (506.0, '506.0'), (603.5251199999999, '603.525'), (0.0009229619635476007, '0.001'),
    (2.767793655395508, '2.768'), (830.271, '830.271'), (0.83039436800000001, '0.83'),
    (708.19, '708.19'), (0.0, '0.0'), (67254.165504, '67254.166'),
])
def test_rounding(value, text):
    results = TrackingResults(
        MaxRAM('gigabytes', 0.0, 0.0, RSSValues(), RSSValues(), RSSValues()),
        MaxGPURAM('gigabytes', value, 0.0, value), ComputeTime('hours', 0.0))
    assert f'  Main: {text}\n' in render_text(results)


def test_zero_results_skeleton():
    document = to_json(zero_results())
    assert document['max_ram']['unit'] == 'gigabytes'
    assert document['compute_time'] == {'unit': 'hours', 'time': 0.0}
    assert list(document) == ['max_ram', 'max_gpu_ram', 'compute_time']
    assert list(document['max_ram']) == [
        'unit', 'system_capacity', 'system', 'main', 'descendents', 'combined']


def test_notes_only_when_present():
    with_notes = zero_results(notes=('GPU unavailable',))
    assert 'notes' not in to_json(zero_results())
    assert to_json(with_notes)['notes'] == ['GPU unavailable']
    assert render_text(with_notes).endswith('Notes:\n  - GPU unavailable')
    assert 'Notes' not in render_text(zero_results())


def test_render_rejects_unknown_format():
    with pytest.raises(ValueError):
        render(zero_results(), 'csv')


finite = st.floats(min_value=0, max_value=1e9, allow_nan=False)
units = st.sampled_from(['bytes', 'megabytes', 'gigabytes'])


@st.composite
def results(draw):
    def triple():
        private, shared = draw(finite), draw(finite)
        return RSSValues(private + shared, private, shared)
    gpu_main, gpu_desc = draw(finite), draw(finite)
    return TrackingResults(
        MaxRAM(draw(units), draw(finite), draw(finite), triple(), triple(), triple()),
        MaxGPURAM(draw(units), gpu_main, gpu_desc, gpu_main + gpu_desc),
        ComputeTime(draw(st.sampled_from(['seconds', 'hours'])), draw(finite)),
        tuple(draw(st.lists(st.text(st.characters(blacklist_categories=['Cc', 'Cs']), max_size=10), max_size=2))),
    )


@given(results())
def test_json_round_trip_is_stable(res):
    once = render_json(res)
    assert render_json(from_json(json.loads(once))) == once
    assert from_json(json.loads(once)) == res


def _flatten(doc, prefix=()):
    for key, value in doc.items():
        if isinstance(value, dict):
            yield from _flatten(value, prefix + (key,))
        elif isinstance(value, float):
            yield prefix + (key,), value


@given(results())
def test_text_agrees_with_rounded_json(res):
    parsed = parse_text(render_text(res))
    document = to_json(res)
    ram, gpu = parsed['Max RAM'], parsed['Max GPU RAM']
    assert ram['System capacity'] == round(document['max_ram']['system_capacity'], 3)
    assert ram['System'] == round(document['max_ram']['system'], 3)
    for scope in ('main', 'descendents', 'combined'):
        for field, label in (('total_rss', 'Total RSS'), ('private_rss', 'Private RSS'), ('shared_rss', 'Shared RSS')):
            assert ram[scope.capitalize()][label] == round(document['max_ram'][scope][field], 3)
        assert gpu[scope.capitalize()] == round(document['max_gpu_ram'][scope], 3)
    assert parsed['Compute time']['Time'] == round(document['compute_time']['time'], 3)
    assert parsed['Compute time']['Unit'] == document['compute_time']['unit']


def test_parse_text_golden(fixtures):
    parsed = parse_text((fixtures / 'tutorial_megabytes.txt').read_text())
    assert parsed['Max RAM']['Main']['Total RSS'] == 603.525
    assert parsed['Max GPU RAM']['Combined'] == 506.0
    assert parsed['Compute time'] == {'Unit': 'seconds', 'Time': 2.768}
