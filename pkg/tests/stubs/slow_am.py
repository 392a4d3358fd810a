"""Never answers a request in time"""
import json
import sys
import time

print(json.dumps({"ready": True, "am": "SlowAdaptation"}), flush=True)
for line in sys.stdin:
    time.sleep(30)
