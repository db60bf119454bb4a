"""Client for external similarity-scorer plugins.

Protocol (line-delimited JSON over the plugin's stdin/stdout, UTF-8):
  handshake (plugin -> client):  {"hello": {"name": str, "version": str, "range": [0, 1]}}
  request   (client -> plugin):  {"id": int, "candidate": str, "reference": str}
  response  (plugin -> client):  {"id": int, "score": float}

One message per line; response ids must echo request ids. Crashes and
timeouts are retried with a fresh process up to a bounded count; a malformed
or mis-addressed response is a protocol error quoting the offending line.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading
from typing import Sequence

from . import NCKitError

_EOF = object()


class ScorerError(NCKitError):
    """The plugin could not be started or stopped responding."""


class ScorerProtocolError(ScorerError):
    """The plugin sent a line that violates the wire protocol."""


class ExternalScorer:
    """Manages one plugin process and scores pairs over it."""

    def __init__(self, command: str | Sequence[str], timeout: float = 30.0, retries: int = 2):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.command:
            raise ValueError("scorer command must be nonempty")
        self.timeout = timeout
        self.retries = retries
        self.info: dict | None = None
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue = queue.Queue()
        self._next_id = 0

    # -- process management -------------------------------------------------

    def start(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            return
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ScorerError(f"cannot start scorer {self.command!r}: {exc}") from exc
        self._lines = queue.Queue()
        threading.Thread(target=self._pump, args=(self._proc, self._lines), daemon=True).start()
        hello_line = self._read_line()
        try:
            hello = json.loads(hello_line)["hello"]
            if not isinstance(hello["name"], str) or not isinstance(hello["version"], str):
                raise ValueError("name/version must be strings")
            if list(hello["range"]) != [0, 1]:
                raise ValueError("score range must be [0, 1]")
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            self.close()
            raise ScorerProtocolError(f"bad handshake ({exc}); offending line: {hello_line!r}") from exc
        self.info = hello

    @staticmethod
    def _pump(proc: subprocess.Popen, out: queue.Queue) -> None:
        for line in proc.stdout:
            out.put(line)
        out.put(_EOF)

    def _read_line(self) -> str:
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise ScorerError(f"scorer timed out after {self.timeout}s") from None
        if line is _EOF:
            raise ScorerError("scorer process closed its output stream")
        return line.rstrip("\n")

    def close(self) -> None:
        proc, self._proc = self._proc, None
        self.info = None
        if proc is None:
            return
        try:
            if proc.stdin:
                proc.stdin.close()
            proc.terminate()
            proc.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            proc.kill()

    def __enter__(self) -> "ExternalScorer":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- scoring -------------------------------------------------------------

    def score(self, candidate: str, reference: str) -> float:
        """Score one pair, restarting the plugin on crash/timeout (bounded)."""
        last_error: ScorerError | None = None
        for _ in range(self.retries + 1):
            try:
                self.start()
                return self._score_once(candidate, reference)
            except ScorerProtocolError:
                self.close()
                raise
            except ScorerError as exc:
                last_error = exc
                self.close()
        raise ScorerError(f"scorer failed after {self.retries + 1} attempts: {last_error}")

    def _score_once(self, candidate: str, reference: str) -> float:
        req_id = self._next_id
        self._next_id += 1
        request = json.dumps(
            {"id": req_id, "candidate": candidate, "reference": reference}, ensure_ascii=False
        )
        try:
            self._proc.stdin.write(request + "\n")
            self._proc.stdin.flush()
        except (OSError, BrokenPipeError, ValueError) as exc:
            raise ScorerError(f"scorer pipe broken: {exc}") from exc
        line = self._read_line()
        try:
            obj = json.loads(line)
            got_id = obj["id"]
            score = obj["score"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ScorerProtocolError(f"malformed response; offending line: {line!r}") from exc
        if got_id != req_id:
            raise ScorerProtocolError(
                f"response id {got_id!r} does not echo request id {req_id}; offending line: {line!r}"
            )
        if not isinstance(score, (int, float)) or isinstance(score, bool) or not 0.0 <= score <= 1.0:
            raise ScorerProtocolError(f"score outside declared [0, 1] range; offending line: {line!r}")
        return float(score)
