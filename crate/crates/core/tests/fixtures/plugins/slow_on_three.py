#!/usr/bin/env python3
"""Correct for k != 3, silent for k = 3."""
import json
import sys
import time

for line in sys.stdin:
    req = json.loads(line)
    n, k = req["n"], req["k"]
    if k == 3:
        time.sleep(30)
    print(json.dumps({"clusters": [[x] for x in range(1, k)] + [list(range(k, n + 1))]}), flush=True)
