"""gpu-tracker: profile the RAM, GPU RAM and compute time of a shell command."""
from __future__ import annotations

import argparse
import shlex
import signal
import subprocess
import sys

from .report import FORMATS, render
from .tracker import RAM_UNITS, TIME_UNITS, Tracker, UnitError

USAGE_ERROR = 2
SPAWN_FAILURE = 127

DESCRIPTION = ('Run a shell command and report its peak RAM, peak GPU RAM and '
               'wall-clock compute time, including all of its child processes.')


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f'invalid sleep time: {text!r}') from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f'sleep time must be positive, got {text!r}')
    return value


def _command(text: str) -> str:
    if not text.strip():
        raise argparse.ArgumentTypeError('the command must not be empty')
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='gpu-tracker', description=DESCRIPTION)
    ram_units = ', '.join(f"'{u}'" for u in RAM_UNITS)
    parser.add_argument(
        '-e', '--execute', required=True, type=_command, metavar='<command>',
        help='Command to profile, quoted together with its arguments, e.g. "ls -l -a".')
    parser.add_argument(
        '-o', '--output', metavar='<output>',
        help='Write the report to this file instead of the screen.')
    parser.add_argument(
        '-f', '--format', default='text', choices=FORMATS, metavar='<format>',
        help="Report format, 'text' (default) or 'json'.")
    parser.add_argument(
        '--st', dest='sleep_time', type=_positive_float, default=1.0, metavar='<sleep-time>',
        help='Seconds between samples (default 1.0).')
    parser.add_argument(
        '--ru', dest='ram_unit', default='gigabytes', choices=RAM_UNITS, metavar='<ram-unit>',
        help=f'Unit for RAM: {ram_units} (default gigabytes).')
    parser.add_argument(
        '--gru', dest='gpu_ram_unit', default='gigabytes', choices=RAM_UNITS, metavar='<gpu-ram-unit>',
        help=f'Unit for GPU RAM: {ram_units} (default gigabytes).')
    parser.add_argument(
        '--tu', dest='time_unit', default='hours', choices=tuple(TIME_UNITS), metavar='<time-unit>',
        help="Unit for compute time: 'seconds', 'minutes', 'hours' or 'days' (default hours).")
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def _exit_code(returncode: int) -> int:
    return 128 - returncode if returncode < 0 else returncode


def run_command(opts: argparse.Namespace, gpu_source=None) -> int:
    """Launch ``opts.execute``, track it until it exits and emit the report.

    Returns the exit status the CLI should end with.
    """
    try:
        argv = shlex.split(opts.execute)
    except ValueError as error:
        print(f'gpu-tracker: cannot parse command: {error}', file=sys.stderr)
        return USAGE_ERROR
    try:
        child = subprocess.Popen(argv)
    except OSError as error:
        print(f'gpu-tracker: cannot run {argv[0]!r}: {error}', file=sys.stderr)
        return SPAWN_FAILURE
    sources = {} if gpu_source is None else {'gpu_source': gpu_source}
    tracker = Tracker(
        sleep_time=opts.sleep_time, ram_unit=opts.ram_unit, gpu_ram_unit=opts.gpu_ram_unit,
        time_unit=opts.time_unit, process_id=child.pid, **sources)
    try:
        previous = signal.signal(signal.SIGTERM, _raise_interrupt)
    except ValueError:  # not the main thread
        previous = None
    tracker.start()
    try:
        returncode = child.wait()
    except KeyboardInterrupt:
        child.terminate()
        returncode = child.wait()
    finally:
        results = tracker.stop()
        if previous is not None:
            signal.signal(signal.SIGTERM, previous)
    print(f'Resource tracking complete. Process completed with status code: {returncode}')
    status = _exit_code(returncode)
    report = render(results, opts.format)
    if opts.output is None:
        print(report)
        return status
    try:
        with open(opts.output, 'w') as f:
            f.write(report + '\n')
    except OSError as error:
        print(f'gpu-tracker: cannot write {opts.output!r}: {error}', file=sys.stderr)
        print(report)
        return status or 1
    return status


def _raise_interrupt(signum, frame):
    raise KeyboardInterrupt


def main(argv=None) -> int:
    opts = parse_args(argv)
    try:
        return run_command(opts)
    except UnitError as error:
        print(f'gpu-tracker: {error}', file=sys.stderr)
        return USAGE_ERROR


if __name__ == '__main__':
    sys.exit(main())
