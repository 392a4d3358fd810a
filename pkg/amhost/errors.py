"""Failures of the AM host; `code` is stable and appears in reports"""

SPAWN_FAILURE = "spawn-failure"
STARTUP_FAILURE = "startup-failure"
HANDSHAKE_TIMEOUT = "handshake-timeout"
MALFORMED_FRAME = "malformed-frame"
CALL_TIMEOUT = "call-timeout"
PROCESS_EXITED = "process-exited"

NO_CODE_BLOCK = "no-code-block"


class AmHostError(Exception):
    def __init__(self, code: str, message: str, detail: str = ""):
        self.code = code
        self.message = message
        self.detail = detail
        super().__init__(f"{code}: {message}")


class MaterializeError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        self.message = message
        super().__init__(f"{code}: {message}")
