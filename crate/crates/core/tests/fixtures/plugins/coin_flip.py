#!/usr/bin/env python3
"""Answers with a different valid partition on every other request."""
import json
import sys

flip = False
for line in sys.stdin:
    req = json.loads(line)
    n, k = req["n"], req["k"]
    head = [[x] for x in range(1, k)]
    rest = list(range(k, n + 1))
    if flip:
        head = [[x] for x in range(n - k + 2, n + 1)]
        rest = list(range(1, n - k + 2))
    flip = not flip
    print(json.dumps({"clusters": head + [rest]}), flush=True)
