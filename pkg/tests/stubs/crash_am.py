"""Dies on the first request"""
import json
import sys

print(json.dumps({"ready": True, "am": "CrashingAdaptation"}), flush=True)
sys.stdin.readline()
raise RuntimeError("the AM fell over")
