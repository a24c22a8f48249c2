"""
Memory of child processes
=========================

Any process id can be tracked. Children, grandchildren and so on are summed
under ``descendents``; ``combined`` adds the main process and counts shared
memory only once.
"""

import json
import subprocess
import sys

import gpu_tracker as gput

worker = 'buf = bytearray(b"x") * 200_000_000; import time; time.sleep(1)'
launcher = subprocess.Popen(['bash', '-c', f'{sys.executable} -c \'{worker}\'; true'])

tracker = gput.Tracker(process_id=launcher.pid, sleep_time=0.2, ram_unit='megabytes', time_unit='seconds')
tracker.start()
launcher.wait()
tracker.stop()

# bash itself stays tiny; the python worker holds the buffer
print(json.dumps(tracker.to_json()['max_ram'], indent=2))
