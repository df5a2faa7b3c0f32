"""Plugin protocol for out-of-process stage backends.

One JSON object per line over the child's stdin/stdout.  Request fields:
{id, stage, image (base64 PNG, absent for summarize), prompt, params
(string map; the inpaint region mask rides in params["mask"] as a base64
grayscale PNG)}.  Responses echo the id and carry {ok, text|mask|image,
error}.  The first exchange is a hello handshake agreeing on protocol
version 1.  The child process is started lazily and reused across calls.
"""

import base64
import json
import os
import select
import shlex
import subprocess
import tempfile
import time

from ..errors import BackendFailure, MalformedFile, WmlabError
from ..imagecore import decode_mask_png, decode_png, encode_mask_png, encode_png
from .semantic import SUMMARY_TEMPLATE, StageBackends

PROTOCOL_VERSION = "1"
DEFAULT_TIMEOUT = 120.0


def _b64(data):
    return base64.standard_b64encode(data).decode("ascii")


def _unb64(text, stage, what):
    try:
        return base64.b64decode(text.encode("ascii"), validate=True)
    except (ValueError, UnicodeEncodeError):
        raise BackendFailure(stage, f"response {what} is not valid base64")


class ExternalBackend:
    """A running (or lazily started) stage-backend child process."""

    def __init__(self, command, timeout=DEFAULT_TIMEOUT):
        self._argv = shlex.split(command)
        if not self._argv:
            raise BackendFailure("hello", "empty backend command")
        self.timeout = timeout
        self._proc = None
        self._stderr = None
        self._buf = b""
        self._next_id = 1

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        if self._proc is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
            self._proc = None
        if self._stderr is not None:
            self._stderr.close()
            self._stderr = None

    def _stderr_tail(self):
        if self._stderr is None:
            return ""
        try:
            self._stderr.flush()
            with open(self._stderr.name, "rb") as f:
                data = f.read()
        except OSError:
            return ""
        tail = data[-500:].decode("utf-8", errors="replace").strip()
        return f" [stderr: {tail}]" if tail else ""

    def _start(self):
        self._stderr = tempfile.NamedTemporaryFile(prefix="wmlab-backend-", suffix=".err")
        try:
            self._proc = subprocess.Popen(
                self._argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=self._stderr,
            )
        except OSError as exc:
            raise BackendFailure("hello", f"cannot launch backend: {exc}")
        reply = self._roundtrip({"id": 0, "stage": "hello"}, "hello")
        version = reply.get("text")
        if version != PROTOCOL_VERSION:
            raise BackendFailure(
                "hello", f"protocol version mismatch: got {version!r}"
            )

    def _read_line(self, deadline, stage):
        fd = self._proc.stdout.fileno()
        while b"\n" not in self._buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise BackendFailure(
                    stage, f"timeout after {self.timeout:g}s" + self._stderr_tail()
                )
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = os.read(fd, 65536)
            if not chunk:
                raise BackendFailure(
                    stage, "backend closed its output" + self._stderr_tail()
                )
            self._buf += chunk
        line, _, self._buf = self._buf.partition(b"\n")
        return line

    def _roundtrip(self, request, stage):
        try:
            self._proc.stdin.write(json.dumps(request).encode("utf-8") + b"\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise BackendFailure(
                stage, "backend closed its input" + self._stderr_tail()
            )
        line = self._read_line(time.monotonic() + self.timeout, stage)
        try:
            reply = json.loads(line)
        except json.JSONDecodeError:
            raise BackendFailure(
                stage, f"malformed response line: {line[:120]!r}"
            )
        if not isinstance(reply, dict):
            raise BackendFailure(stage, "response is not an object")
        if reply.get("id") != request["id"]:
            raise BackendFailure(
                stage,
                f"response id {reply.get('id')!r} does not match request {request['id']}",
            )
        if not reply.get("ok"):
            raise BackendFailure(stage, str(reply.get("error", "backend error")))
        return reply

    def call(self, stage, image=None, prompt="", params=None):
        """One stage request; returns the parsed response object."""
        if self._proc is None:
            self._start()
        request = {
            "id": self._next_id,
            "stage": stage,
            "prompt": prompt,
            "params": dict(params or {}),
        }
        if image is not None:
            request["image"] = _b64(encode_png(image))
        self._next_id += 1
        return self._roundtrip(request, stage)


def call_external_stage(backend, stage, image=None, prompt="", params=None):
    """Send one stage request through a reused backend process."""
    return backend.call(stage, image=image, prompt=prompt, params=params)


def _require_text(reply, stage):
    text = reply.get("text")
    if not isinstance(text, str):
        raise BackendFailure(stage, "response lacks a text field")
    return text


def external_stage_backends(backend):
    """StageBackends speaking the plugin protocol through `backend`."""

    def caption(img, questions):
        answers = []
        for i, question in enumerate(questions):
            reply = backend.call(
                "caption",
                image=img,
                prompt=question,
                params={"question_index": str(i + 1)},
            )
            answers.append(_require_text(reply, "caption"))
        return tuple(answers)

    def segment(img, phrase):
        reply = backend.call("segment", image=img, prompt=phrase)
        payload = reply.get("mask")
        if not isinstance(payload, str):
            raise BackendFailure("segment", "response lacks a mask field")
        try:
            mask = decode_mask_png(_unb64(payload, "segment", "mask"))
        except (MalformedFile, WmlabError) as exc:
            raise BackendFailure("segment", f"undecodable mask: {exc}")
        if mask.shape != img.data.shape[:2]:
            raise BackendFailure("segment", "mask size does not match image")
        return [mask]

    def summarize(answers):
        reply = backend.call(
            "summarize",
            prompt=f"{SUMMARY_TEMPLATE} {answers[0]} {answers[1]} {answers[2]}",
            params={"q1": answers[0], "q2": answers[1], "q3": answers[2]},
        )
        return _require_text(reply, "summarize")

    def inpaint(img, region, prompt):
        reply = backend.call(
            "inpaint",
            image=img,
            prompt=prompt,
            params={"mask": _b64(encode_mask_png(region))},
        )
        payload = reply.get("image")
        if not isinstance(payload, str):
            raise BackendFailure("inpaint", "response lacks an image field")
        try:
            return decode_png(_unb64(payload, "inpaint", "image"))
        except (MalformedFile, WmlabError) as exc:
            raise BackendFailure("inpaint", f"undecodable image: {exc}")

    return StageBackends(
        caption=caption, segment=segment, summarize=summarize, inpaint=inpaint
    )
