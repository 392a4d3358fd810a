"""Assigns every component to the first group it is offered"""
import json
import sys

print(json.dumps({"ready": True, "am": "EchoAdaptation"}), flush=True)
for line in sys.stdin:
    request = json.loads(line)
    group = request["group_ids"][0]
    answer = {"assignments": {c["id"]: group for c in request["components"]}}
    print(json.dumps(answer), flush=True)
