"""
Tracking a block of Python code
===============================

A tracker samples the calling process in a background thread. Use it as a
context manager, or call ``start()`` and ``stop()`` yourself.
"""

import gpu_tracker as gput


def build_list():
    return list(range(5_000_000))


# tracker as a context manager; RAM in megabytes, time in seconds
with gput.Tracker(sleep_time=0.1, ram_unit='megabytes', time_unit='seconds') as tracker:
    data = build_list()
print(tracker)

# the measurements are frozen data classes
print(tracker.max_ram.main)
print(tracker.compute_time)

###############################################################################
# The explicit form, handy in an interactive session

tracker = gput.Tracker(sleep_time=0.1)
tracker.start()
more = build_list()
results = tracker.stop()
print(results.max_ram.combined.total_rss, results.max_ram.unit)
