"""Multimodal oracle client: prompt building, transport, response parsing.

The oracle is any chat-completion-style endpoint that accepts interleaved
images and text and returns text. A deterministic mock (canned responses
keyed by content digest) satisfies the same contract for tests and offline
runs. Prompt templates ship as static assets and are instantiated
byte-deterministically.
"""

from __future__ import annotations

import base64
import hashlib
import json
import re
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import cv2
import numpy as np

from .errors import OracleResponseError, TransportError


def load_prompt(name: str) -> str:
    return resources.files("gazestream.prompts").joinpath(name).read_text()


@dataclass(frozen=True)
class ObjectRecord:
    identity: str
    caption: str
    region: str  # fov-gazed | fov-other | out-of-fov
    fixation_index: int = -1

    def __post_init__(self):
        if not self.identity.strip():
            raise OracleResponseError("object identity must be non-empty")


@dataclass
class FovExtraction:
    scene_caption: str
    gaze_object: ObjectRecord
    other_objects: list[ObjectRecord]


class ObjectPool:
    """Canonical object names in first-seen order.

    Equivalence is case-insensitive with whitespace collapsed; no stemming,
    so "cutting board" stays distinct from "board".
    """

    def __init__(self, names: list[str] | None = None):
        self._names: list[str] = []
        self._keys: dict[str, str] = {}
        for n in names or []:
            self.canonicalize(n)

    @staticmethod
    def _key(identity: str) -> str:
        return re.sub(r"\s+", " ", identity.strip()).lower()

    def canonicalize(self, identity: str) -> str:
        key = self._key(identity)
        if not key:
            raise OracleResponseError("cannot canonicalize an empty identity")
        if key in self._keys:
            return self._keys[key]
        self._keys[key] = key
        self._names.append(key)
        return key

    def names(self) -> list[str]:
        return list(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, identity: str) -> bool:
        return self._key(identity) in self._keys


def _render_pool(pool: ObjectPool) -> str:
    return ", ".join(pool.names()) if len(pool) else "(none yet)"


def build_fov_prompt(action_caption: str, pool: ObjectPool, gaze_xy: tuple[float, float]) -> str:
    """Instantiate the in-FOV extraction template.

    The coordinate is patch-local: the oracle sees the cropped patch and
    the quoted (x, y) must agree with the red dot drawn on it.
    """
    text = load_prompt("fov_extraction.txt")
    text = text.replace("{action_caption}", action_caption)
    text = text.replace("{object_pool}", _render_pool(pool))
    return text.replace("(x, y)", f"({gaze_xy[0]:.0f}, {gaze_xy[1]:.0f})")


def build_outfov_prompt(action_caption: str, pool: ObjectPool) -> str:
    text = load_prompt("outfov_extraction.txt")
    text = text.replace("{action_caption}", action_caption)
    return text.replace("{object_pool}", _render_pool(pool))


# ---------------------------------------------------------------------------
# transport


def image_digest(image: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(str(image.shape).encode())
    h.update(str(image.dtype).encode())
    h.update(np.ascontiguousarray(image).tobytes())
    return h.hexdigest()


def request_digest(images: list[np.ndarray], prompt: str) -> str:
    h = hashlib.sha256()
    for img in images:
        h.update(image_digest(img).encode())
    h.update(hashlib.sha256(prompt.encode()).hexdigest().encode())
    return h.hexdigest()


class OracleEndpoint:
    """Anything with complete(images, prompt) -> text."""

    def complete(self, images: list[np.ndarray], prompt: str) -> str:
        raise NotImplementedError


@dataclass
class RemoteOracle(OracleEndpoint):
    """Chat-completion web API client with bounded retries.

    Transient transport failures are retried up to max_retries times with
    exponential backoff starting at backoff_s seconds.
    """

    url: str
    model: str
    api_key: str = ""
    max_retries: int = 3
    backoff_s: float = 1.0
    timeout_s: float = 120.0
    max_images: int = 32

    def complete(self, images: list[np.ndarray], prompt: str) -> str:
        import httpx

        if len(images) > self.max_images:
            raise OracleResponseError(f"oversized payload: {len(images)} images (cap {self.max_images})")
        content = []
        for img in images:
            ok, buf = cv2.imencode(".png", cv2.cvtColor(img, cv2.COLOR_RGB2BGR))
            if not ok:
                raise OracleResponseError("failed to encode request image")
            b64 = base64.b64encode(buf.tobytes()).decode()
            content.append({"type": "image_url", "image_url": {"url": f"data:image/png;base64,{b64}"}})
        content.append({"type": "text", "text": prompt})
        body = {"model": self.model, "messages": [{"role": "user", "content": content}]}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        last_exc: Exception | None = None
        for attempt in range(self.max_retries):
            try:
                resp = httpx.post(self.url, json=body, headers=headers, timeout=self.timeout_s)
                resp.raise_for_status()
                return resp.json()["choices"][0]["message"]["content"]
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                last_exc = exc
                if attempt + 1 < self.max_retries:
                    time.sleep(self.backoff_s * (2**attempt))
        raise TransportError(f"oracle endpoint failed after {self.max_retries} attempts: {last_exc}")


class MockOracle(OracleEndpoint):
    """Table-driven oracle: request digest -> canned response file.

    The table is a directory of <digest>.txt files. Strict mode raises on
    unknown requests; otherwise a registered default response is returned.
    """

    def __init__(self, table_dir: Path, strict: bool = True):
        self.table_dir = Path(table_dir)
        self.strict = strict

    def complete(self, images: list[np.ndarray], prompt: str) -> str:
        digest = request_digest(images, prompt)
        path = self.table_dir / f"{digest}.txt"
        if path.exists():
            return path.read_text()
        if not self.strict:
            fallback = self.table_dir / "default.txt"
            if fallback.exists():
                return fallback.read_text()
        raise TransportError(f"mock oracle has no canned response for digest {digest[:12]}…")

    def record(self, images: list[np.ndarray], prompt: str, response: str) -> str:
        self.table_dir.mkdir(parents=True, exist_ok=True)
        digest = request_digest(images, prompt)
        (self.table_dir / f"{digest}.txt").write_text(response)
        return digest


@dataclass
class RecordingOracle(OracleEndpoint):
    """Tees another oracle's responses into a MockOracle table."""

    inner: OracleEndpoint
    table: MockOracle

    def complete(self, images: list[np.ndarray], prompt: str) -> str:
        response = self.inner.complete(images, prompt)
        self.table.record(images, prompt, response)
        return response


def request_extraction(images: list[np.ndarray], prompt: str, endpoint: OracleEndpoint) -> str:
    """Send one extraction request, returning the oracle's raw text."""
    if not images:
        raise OracleResponseError("oracle request needs at least one image")
    return endpoint.complete(images, prompt)


# ---------------------------------------------------------------------------
# response parsing


def extract_json_object(text: str) -> tuple[dict, str]:
    """First balanced JSON object in possibly-prosey text.

    Oracles are asked for clean JSON but often add prose or code fences;
    we take the first balanced {...} that parses. Returns (object, span).
    """
    depth = 0
    start = -1
    in_str = False
    escape = False
    for i, ch in enumerate(text):
        if in_str:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_str = False
            continue
        if ch == '"':
            in_str = True
        elif ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}":
            if depth > 0:
                depth -= 1
                if depth == 0:
                    span = text[start : i + 1]
                    try:
                        return json.loads(span), span
                    except json.JSONDecodeError:
                        start = -1  # keep scanning past a false positive
    snippet = text.strip()[:120]
    raise OracleResponseError(f"no parseable JSON object in oracle response: {snippet!r}")


def _check_person_rule(identity: str) -> None:
    if identity.strip().lower() == "person":
        raise OracleResponseError('identity "person" violates the person rule (clothing description required)')


def _object_record(obj: dict, region: str, fixation_index: int) -> ObjectRecord:
    try:
        identity = obj["object_identity"]
        caption = obj.get("detailed_caption", "")
    except (KeyError, TypeError) as exc:
        raise OracleResponseError(f"object entry missing required field: {exc}") from exc
    if not isinstance(identity, str) or not identity.strip():
        raise OracleResponseError(f"bad object identity: {identity!r}")
    _check_person_rule(identity)
    return ObjectRecord(identity=identity, caption=str(caption), region=region, fixation_index=fixation_index)


def parse_extraction(text: str, expect: str, fixation_index: int = -1):
    """Parse an oracle response into records.

    expect="fov" yields a FovExtraction; expect="outfov" yields a list of
    out-of-FOV ObjectRecords. Schema violations and bare "person"
    identities raise OracleResponseError.
    """
    doc, _ = extract_json_object(text)
    if expect == "fov":
        for key in ("scene_caption", "gaze_object"):
            if key not in doc:
                raise OracleResponseError(f"FOV response missing required field {key!r}")
        gaze = _object_record(doc["gaze_object"], "fov-gazed", fixation_index)
        others = [_object_record(o, "fov-other", fixation_index) for o in doc.get("other_objects", [])]
        return FovExtraction(scene_caption=str(doc["scene_caption"]), gaze_object=gaze, other_objects=others)
    if expect == "outfov":
        if "other_objects" not in doc:
            raise OracleResponseError("out-of-FOV response missing required field 'other_objects'")
        return [_object_record(o, "out-of-fov", fixation_index) for o in doc["other_objects"]]
    raise ValueError(f"unknown expectation {expect!r}")
