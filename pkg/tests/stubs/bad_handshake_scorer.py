"""Stub scorer whose handshake declares an invalid score range."""
import json
import sys

print(json.dumps({"hello": {"name": "bad-range", "version": "1.0", "range": [0, 10]}}), flush=True)
for line in sys.stdin:
    req = json.loads(line)
    print(json.dumps({"id": req["id"], "score": 0.5}), flush=True)
