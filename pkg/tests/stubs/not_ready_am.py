"""Reports a load failure in its handshake"""
import json

print(json.dumps({"ready": False, "error": {"message": "SyntaxError: invalid syntax",
                                            "traceback": "line 3\n    def (\n"}}), flush=True)
