"""Text-completion backends.

One interface: prompt in, reply text out. The mock backend fabricates a
schema-conformant reply from the prompt itself; the transcript backend
replays recorded generations; the HTTP backend speaks a chat-style endpoint
configured through the environment. Tests never need the network.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
import urllib.error
import urllib.request
import zlib
from pathlib import Path
from typing import Protocol

from ..catalog import AssetRecord
from ..errors import BackendTransportError
from ..scenario import TaskType, scenario_to_dict
from .mock import mock_generate
from .prompts import APPEARANCE_FRAGMENT, COMMON_SENSE_FRAGMENT, SPATIAL_FRAGMENT

_UID_RE = re.compile(r"^  UID: (\S+)$", re.MULTILINE)


class CompletionBackend(Protocol):
    def complete(self, prompt: str) -> str: ...


class MockBackend:
    """Deterministic offline backend.

    Reads the asset list and task fragment back out of the prompt, runs the
    template generator, and renders its output as a prose-wrapped, fenced JSON
    reply. Support relations are spelled "top" on purpose so the normalization
    path gets exercised end to end.
    """

    def __init__(self, catalog: list[AssetRecord], num_objects: int = 5):
        self._by_uid = {a.uid: a for a in catalog}
        self._num_objects = num_objects

    def complete(self, prompt: str) -> str:
        from .generation import GenerationRequest

        uids = _UID_RE.findall(prompt)
        pool = [self._by_uid[u] for u in uids if u in self._by_uid]
        if not pool:
            raise BackendTransportError("mock backend: prompt carries no known assets")
        if SPATIAL_FRAGMENT in prompt:
            task_type = TaskType.SPATIAL
        elif APPEARANCE_FRAGMENT in prompt:
            task_type = TaskType.APPEARANCE
        elif COMMON_SENSE_FRAGMENT in prompt:
            task_type = TaskType.COMMON_SENSE
        else:
            task_type = TaskType.LONG_HORIZON
        request = GenerationRequest(
            task_type=task_type,
            pool=pool,
            num_objects_min=self._num_objects,
            seed=zlib.crc32(prompt.encode("utf-8")),
        )
        scenario = mock_generate(request)
        data = scenario_to_dict(scenario)
        body = {
            "instruction": data["instruction"],
            "goal_conditions": data["goal_conditions"],
            "scene_graph": data["scene_graph"],
        }
        text = json.dumps(body, indent=2)
        text = text.replace('"position": "on"', '"position": "top"')
        return (
            "Here is a task-oriented scene design for the requested objects.\n\n"
            "```json\n" + text + "\n```\n\n"
            "The goal conditions differ from the initial scene graph as required."
        )


def _transcript_name(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:24] + ".json"


class TranscriptBackend:
    """Replays recorded prompt/reply pairs, one JSON file per generation."""

    def __init__(self, directory: str | Path):
        self._dir = Path(directory)

    def complete(self, prompt: str) -> str:
        path = self._dir / _transcript_name(prompt)
        if not path.exists():
            raise BackendTransportError(f"no recorded reply for this prompt under {self._dir}")
        data = json.loads(path.read_text(encoding="utf-8"))
        return data["reply"]


class RecordingBackend:
    """Wraps another backend and records every exchange for later replay."""

    def __init__(self, inner: CompletionBackend, directory: str | Path):
        self._inner = inner
        self._dir = Path(directory)
        self._dir.mkdir(parents=True, exist_ok=True)

    def complete(self, prompt: str) -> str:
        reply = self._inner.complete(prompt)
        path = self._dir / _transcript_name(prompt)
        path.write_text(
            json.dumps({"prompt": prompt, "reply": reply}, indent=2) + "\n",
            encoding="utf-8",
        )
        return reply


class HttpBackend:
    """Chat-style HTTP endpoint: POST {base_url}/chat/completions."""

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 60.0,
        transport_retries: int = 2,
    ):
        self._base_url = base_url.rstrip("/")
        self._model = model
        self._api_key = api_key
        self._timeout = timeout
        self._transport_retries = transport_retries

    def complete(self, prompt: str) -> str:
        payload = json.dumps(
            {
                "model": self._model,
                "messages": [{"role": "user", "content": prompt}],
            }
        ).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        request = urllib.request.Request(
            self._base_url + "/chat/completions", data=payload, headers=headers
        )
        last_error: Exception | None = None
        for attempt in range(self._transport_retries + 1):
            try:
                with urllib.request.urlopen(request, timeout=self._timeout) as resp:
                    body = json.loads(resp.read().decode("utf-8"))
                return body["choices"][0]["message"]["content"]
            except (urllib.error.URLError, OSError, KeyError, json.JSONDecodeError) as exc:
                last_error = exc
                if attempt < self._transport_retries:
                    time.sleep(0.2 * (2**attempt))
        raise BackendTransportError(f"backend unreachable: {last_error}")
