"""
AM endpoints: in-process hand-written AMs and out-of-process AMs speaking the
line protocol over stdin/stdout.
"""

from __future__ import annotations

import logging
import shlex
import subprocess
import threading
import time
from abc import ABC, abstractmethod
from collections import deque
from queue import Empty, Queue
from typing import Callable, Deque, List, Optional, Sequence

import config
from amhost.environment import call_am
from amhost.errors import (
    CALL_TIMEOUT,
    HANDSHAKE_TIMEOUT,
    MALFORMED_FRAME,
    PROCESS_EXITED,
    SPAWN_FAILURE,
    STARTUP_FAILURE,
    AmHostError,
)
from amhost.protocol import (
    AmFailure,
    AssignRequest,
    AssignResponse,
    decode_handshake,
    decode_response,
    encode_request,
)

logger = logging.getLogger(__name__)

_EOF = None


class AmEndpoint(ABC):
    """Something that answers assignment requests. Use as a context manager."""

    name = "am"

    def start(self) -> None:
        pass

    @abstractmethod
    def invoke(self, request: AssignRequest) -> AssignResponse:
        ...

    def close(self) -> None:
        pass

    def __enter__(self) -> "AmEndpoint":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class BuiltinEndpoint(AmEndpoint):
    """Runs an AM class in this process; one instance per run"""

    def __init__(self, name: str, am_class: Callable[[], object]):
        self.name = f"builtin:{name}"
        self.am_class = am_class
        self.am = None

    def start(self) -> None:
        self.am = self.am_class()

    def invoke(self, request: AssignRequest) -> AssignResponse:
        if self.am is None:
            self.start()
        response = call_am(self.am, request)
        if not response.ok:
            logger.debug("%s failed in %s: %s", self.name, request.method, response.error.message)
        return response


class SubprocessEndpoint(AmEndpoint):
    """
    Starts `command`, waits for the ready line, then exchanges one request line
    for one response line per call. Any failure raises AmHostError with a
    stable code; the captured stderr tail is attached as detail.
    """

    def __init__(self, command: Sequence[str], cwd: Optional[str] = None,
                 startup_timeout: float = config.AM_STARTUP_TIMEOUT,
                 call_timeout: float = config.AM_CALL_TIMEOUT,
                 name: Optional[str] = None):
        if startup_timeout <= 0 or call_timeout <= 0:
            raise ValueError("AM timeouts must be positive")
        self.command = list(command)
        self.cwd = cwd
        self.startup_timeout = startup_timeout
        self.call_timeout = call_timeout
        self.name = name or "cmd:" + " ".join(shlex.quote(part) for part in self.command)
        self.am_class = ""
        self._proc: Optional[subprocess.Popen] = None
        self._lines: Queue = Queue()
        self._stderr_lines: Deque[str] = deque(maxlen=50)
        self._stderr_reader: Optional[threading.Thread] = None
        self._lock = threading.Lock()

    def fresh(self) -> "SubprocessEndpoint":
        """An unstarted endpoint running the same command"""
        return SubprocessEndpoint(self.command, self.cwd, self.startup_timeout, self.call_timeout, self.name)

    # --- process management ---

    def start(self) -> None:
        if self._proc is not None:
            return
        try:
            self._proc = subprocess.Popen(
                self.command,
                cwd=self.cwd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise AmHostError(SPAWN_FAILURE, f"cannot start {self.command[0]!r}: {exc}") from exc

        threading.Thread(target=self._read_stdout, args=(self._proc.stdout,), daemon=True).start()
        self._stderr_reader = threading.Thread(target=self._read_stderr, args=(self._proc.stderr,), daemon=True)
        self._stderr_reader.start()

        try:
            line = self._next_line(time.monotonic() + self.startup_timeout, HANDSHAKE_TIMEOUT, "handshake")
            handshake = decode_handshake(line)
        except AmHostError:
            self.close()
            raise
        if not handshake.ready:
            failure = handshake.error or AmFailure("AM failed to start")
            self.close()
            raise AmHostError(STARTUP_FAILURE, failure.message, failure.traceback or self.stderr_summary())
        self.am_class = handshake.am
        logger.debug("%s ready (%s)", self.name, handshake.am or "unnamed AM")

    def _read_stdout(self, stream) -> None:
        try:
            for line in stream:
                if line.strip():
                    self._lines.put(line)
        except (OSError, ValueError):
            pass
        finally:
            self._lines.put(_EOF)

    def _read_stderr(self, stream) -> None:
        try:
            for line in stream:
                with self._lock:
                    self._stderr_lines.append(line.rstrip("\n"))
        except (OSError, ValueError):
            pass

    def stderr_summary(self) -> str:
        with self._lock:
            return "\n".join(self._stderr_lines)

    def _next_line(self, deadline: float, timeout_code: str, context: str) -> str:
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self.close()
                raise AmHostError(timeout_code, f"no answer from the AM during {context}", self.stderr_summary())
            try:
                line = self._lines.get(timeout=min(remaining, 0.2))
            except Empty:
                continue
            if line is _EOF:
                code = self._exit_code()
                # let the stderr reader drain the traceback
                if self._stderr_reader is not None:
                    self._stderr_reader.join(timeout=1)
                raise AmHostError(
                    PROCESS_EXITED,
                    f"AM process exited ({code}) during {context}",
                    self.stderr_summary(),
                )
            return line

    def _exit_code(self) -> Optional[int]:
        try:
            return self._proc.wait(timeout=1)
        except subprocess.TimeoutExpired:
            return None

    def close(self) -> None:
        proc, self._proc = self._proc, None
        if proc is None:
            return
        try:
            proc.stdin.close()
        except OSError:
            pass
        if proc.poll() is None:
            proc.terminate()
            try:
                proc.wait(timeout=3)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()

    # --- calls ---

    def invoke(self, request: AssignRequest) -> AssignResponse:
        if self._proc is None:
            self.start()
        frame = encode_request(request)
        logger.debug("-> %s", frame.strip())
        try:
            self._proc.stdin.write(frame)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            code = self._exit_code()
            raise AmHostError(
                PROCESS_EXITED, f"AM process exited ({code}) before {request.method}", self.stderr_summary()
            ) from exc
        line = self._next_line(time.monotonic() + self.call_timeout, CALL_TIMEOUT, request.method)
        logger.debug("<- %s", line.strip())
        try:
            return decode_response(line)
        except AmHostError as exc:
            raise AmHostError(MALFORMED_FRAME, exc.message, line.strip()[:500]) from exc


def make_endpoint(descriptor: str, scenario: str, cwd: Optional[str] = None) -> AmEndpoint:
    """`builtin:<name>` for a hand-written AM of the scenario, `cmd:<command line>` for a process"""
    kind, _, value = descriptor.partition(":")
    if kind == "builtin" and value:
        from scenarios.baselines import BUILTIN_AMS, builtin_am

        am_class = builtin_am(scenario, value)
        if am_class is None:
            known = ", ".join(sorted(BUILTIN_AMS.get(scenario, {})))
            raise ValueError(f"unknown builtin AM {value!r} for scenario {scenario!r} (known: {known})")
        return BuiltinEndpoint(value, am_class)
    if kind == "cmd" and value:
        command: List[str] = shlex.split(value)
        return SubprocessEndpoint(command, cwd=cwd)
    raise ValueError(f"AM must be builtin:<name> or cmd:<command>, got {descriptor!r}")
