"""Well-behaved stub scorer: token-Jaccard similarity, correct wire protocol."""
import json
import sys

print(json.dumps({"hello": {"name": "jaccard-stub", "version": "1.0", "range": [0, 1]}}), flush=True)
for line in sys.stdin:
    req = json.loads(line)
    a = set(req["candidate"].lower().split())
    b = set(req["reference"].lower().split())
    score = len(a & b) / len(a | b) if a | b else 0.0
    print(json.dumps({"id": req["id"], "score": score}), flush=True)
