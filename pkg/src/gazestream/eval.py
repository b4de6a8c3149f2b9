"""Streaming evaluation harness.

Runs model adapters over generated items under the streaming windowing
contract: past tasks see [0, t_q], present tasks a 60-second window
clamped at 0, proactive checkpoints the cumulative prefix [0, r_t]. The
harness hard-asserts that no adapter ever receives a frame after its
window end.
"""

from __future__ import annotations

import json
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import DataError
from .fov import overlay_eval_prompt
from .oracle import load_prompt
from .qa.items import PAST_TASKS, PRESENT_TASKS, ProactiveItem, QAItem

LETTERS = "ABCD"


@dataclass
class EvalConfig:
    omega: float = 60.0
    frame_rate: float = 1.0
    max_frames: int = 16
    prompting_mode: str = "none"  # none | text-gaze | visual-gaze
    instruction_preamble: str = ""
    fov_radius_px: float = 106.67
    seed: int = 0

    def __post_init__(self):
        if self.omega <= 0:
            raise DataError("omega must be positive")
        if self.max_frames < 1:
            raise DataError("max_frames must be at least 1")
        if self.prompting_mode not in ("none", "text-gaze", "visual-gaze"):
            raise DataError(f"unknown prompting mode {self.prompting_mode!r}")
        if self.prompting_mode == "visual-gaze" and not self.instruction_preamble:
            self.instruction_preamble = load_prompt("eval_preamble.txt").strip()


class ModelAdapter(Protocol):
    """The only capability the harness requires."""

    def answer(self, question: str, frames: list[np.ndarray], aux: str) -> str: ...


class FrameSource(Protocol):
    def frame_at(self, video_id: str, timestamp: float) -> np.ndarray: ...

    def gaze_at(self, video_id: str, timestamp: float) -> tuple[float, float] | None: ...


def context_window(kind: str, t_q: float, omega: float = 60.0) -> tuple[float, float]:
    """Temporal context per protocol: past, present, or proactive prefix."""
    if kind == "past":
        return (0.0, t_q)
    if kind == "present":
        return (max(0.0, t_q - omega), t_q)
    if kind == "proactive":
        return (0.0, t_q)
    raise DataError(f"unknown window kind {kind!r}")


def window_kind(task: str) -> str:
    if task in PAST_TASKS:
        return "past"
    if task in PRESENT_TASKS:
        return "present"
    return "proactive"


def sample_frames(window: tuple[float, float], frame_rate: float, max_frames: int) -> list[float]:
    """Uniform timestamps inside the window, capped, always ending at the
    window end."""
    start, end = window
    if end < start:
        raise DataError(f"bad window {window}")
    if end == start:
        return [end]
    available = int(np.floor((end - start) * frame_rate)) + 1
    count = min(available, max_frames)
    if count <= 1:
        return [end]
    return [float(t) for t in np.linspace(start, end, count)]


# ---------------------------------------------------------------------------
# answer parsing


_ANSWER_IS = re.compile(r"answer\s*(?:is|:)\s*\(?([A-D])\b", re.IGNORECASE)
_LEADING = re.compile(r"^\s*\(?([A-D])[.):\]]", re.IGNORECASE)
_FINAL = re.compile(r"\(?([A-D])[.)\]]?\s*$", re.IGNORECASE)


def parse_choice(text: str, options: Sequence[str]) -> int | None:
    """Deterministic extraction of a 4-way choice from free-form output.

    Priority: final standalone letter, "the answer is X", a leading
    "X." / "X)" option form, then a unique case-insensitive occurrence of
    exactly one option's text. Anything else is unparsed (None).
    """
    if len(options) != 4:
        raise DataError("parse_choice expects exactly 4 options")
    stripped = text.strip()
    if not stripped:
        return None

    tail = stripped.split()[-1] if stripped.split() else ""
    m = _FINAL.fullmatch(tail)
    if m:
        return LETTERS.index(m.group(1).upper())

    matches = list(_ANSWER_IS.finditer(stripped))
    if matches:
        return LETTERS.index(matches[-1].group(1).upper())

    m = _LEADING.match(stripped)
    if m:
        return LETTERS.index(m.group(1).upper())

    low = stripped.lower()
    hits = [i for i, opt in enumerate(options) if opt.lower() in low]
    if len(hits) == 1:
        return hits[0]
    return None


_YESNO = re.compile(r"\b(yes|no)\b", re.IGNORECASE)


def parse_yes_no(text: str) -> bool | None:
    """Leading or unique standalone yes/no token; otherwise unparsed."""
    stripped = text.strip()
    if not stripped:
        return None
    lead = re.match(r"^\W*(yes|no)\b", stripped, re.IGNORECASE)
    if lead:
        return lead.group(1).lower() == "yes"
    tokens = {m.group(1).lower() for m in _YESNO.finditer(stripped)}
    if len(tokens) == 1:
        return tokens.pop() == "yes"
    return None


# ---------------------------------------------------------------------------
# results


@dataclass
class TaskResult:
    task: str
    total: int = 0
    correct: int = 0
    unparsed: int = 0

    @property
    def incorrect(self) -> int:
        return self.total - self.correct - self.unparsed

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def as_dict(self) -> dict:
        return {
            "task": self.task,
            "total": self.total,
            "correct": self.correct,
            "incorrect": self.incorrect,
            "unparsed": self.unparsed,
            "accuracy": round(self.accuracy, 6),
        }


@dataclass
class ProactiveResult:
    task: str
    total: int = 0
    correct: int = 0
    false_positives: int = 0
    false_negatives: int = 0
    positives: int = 0
    negatives: int = 0

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    @property
    def type1_rate(self) -> float:
        return self.false_positives / self.negatives if self.negatives else 0.0

    @property
    def type2_rate(self) -> float:
        return self.false_negatives / self.positives if self.positives else 0.0

    def as_dict(self) -> dict:
        return {
            "task": self.task,
            "total": self.total,
            "correct": self.correct,
            "positives": self.positives,
            "negatives": self.negatives,
            "accuracy": round(self.accuracy, 6),
            "type1_rate": round(self.type1_rate, 6),
            "type2_rate": round(self.type2_rate, 6),
        }


# ---------------------------------------------------------------------------
# adapters


class ScriptedAdapter:
    """Answers from a table keyed by the aux string (item or checkpoint id)."""

    def __init__(self, table: dict[str, str], default: str = ""):
        self.table = dict(table)
        self.default = default

    @classmethod
    def from_file(cls, path: Path, default: str = "") -> "ScriptedAdapter":
        with open(path) as f:
            return cls(json.load(f), default=default)

    def answer(self, question: str, frames: list[np.ndarray], aux: str) -> str:
        return self.table.get(aux, self.default)


class RandomAdapter:
    """Uniform-random letter (or yes/no) answers; used for calibration.

    Draws are seeded per item id, so results are deterministic under any
    concurrency level.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed

    def answer(self, question: str, frames: list[np.ndarray], aux: str) -> str:
        rng = random.Random(f"{self.seed}|{aux}")
        if "Answer Yes or No" in question or aux.endswith("/yn"):
            return rng.choice(["Yes", "No"])
        return rng.choice(list(LETTERS))


class ConstantAdapter:
    def __init__(self, text: str):
        self.text = text

    def answer(self, question: str, frames: list[np.ndarray], aux: str) -> str:
        return self.text


class RemoteAdapter:
    """Remote model behind the same chat-completion contract as the oracle."""

    def __init__(self, url: str, model: str, api_key: str = "", max_retries: int = 3):
        from .oracle import RemoteOracle

        self._oracle = RemoteOracle(url=url, model=model, api_key=api_key, max_retries=max_retries)

    def answer(self, question: str, frames: list[np.ndarray], aux: str) -> str:
        return self._oracle.complete(frames, question)


# ---------------------------------------------------------------------------
# runners


def _format_mcq(item: QAItem, preamble: str, gaze_note: str) -> str:
    lines = []
    if preamble:
        lines.append(preamble)
    lines.append(item.question)
    if gaze_note:
        lines.append(gaze_note)
    for letter, opt in zip(LETTERS, item.options):
        lines.append(f"{letter}. {opt}")
    lines.append("Answer with the letter of the correct option.")
    return "\n".join(lines)


def _gather_frames(
    source: FrameSource,
    video_id: str,
    window: tuple[float, float],
    config: EvalConfig,
    overlay: bool,
) -> list[np.ndarray]:
    timestamps = sample_frames(window, config.frame_rate, config.max_frames)
    for ts in timestamps:
        # temporal causality: nothing after the window end may leak out
        assert ts <= window[1] + 1e-9, f"frame timestamp {ts} exceeds window end {window[1]}"
    frames = []
    for ts in timestamps:
        frame = source.frame_at(video_id, ts)
        if overlay:
            gaze = source.gaze_at(video_id, ts)
            if gaze is not None:
                frame = overlay_eval_prompt(frame, gaze, config.fov_radius_px)
        frames.append(frame)
    return frames


def run_mcq_eval(
    items: Sequence[QAItem],
    adapter: ModelAdapter,
    source: FrameSource,
    config: EvalConfig,
    jobs: int = 1,
) -> tuple[dict[str, TaskResult], list[dict]]:
    """Evaluate multiple-choice items; returns per-task results and the
    per-item audit log (raw model text included).

    Adapter calls may run concurrently (jobs > 1); items are processed in
    canonical order and aggregation is deterministic either way.
    """
    ordered = sorted(items, key=lambda i: (i.video_id, i.task, i.id))

    def ask(item: QAItem) -> str:
        window = context_window(window_kind(item.task), item.t_q, config.omega)
        gaze_note = ""
        if config.prompting_mode == "text-gaze":
            center = source.gaze_at(item.video_id, item.t_q)
            if center is not None:
                gaze_note = f"The user's gaze center is at pixel ({center[0]:.0f}, {center[1]:.0f})."
        preamble = config.instruction_preamble if config.prompting_mode == "visual-gaze" else ""
        frames = _gather_frames(source, item.video_id, window, config, config.prompting_mode == "visual-gaze")
        return adapter.answer(_format_mcq(item, preamble, gaze_note), frames, item.id)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            raws = list(pool.map(ask, ordered))
    else:
        raws = [ask(item) for item in ordered]

    results: dict[str, TaskResult] = {}
    audit = []
    for item, raw in zip(ordered, raws):
        window = context_window(window_kind(item.task), item.t_q, config.omega)
        choice = parse_choice(raw, item.options)
        res = results.setdefault(item.task, TaskResult(task=item.task))
        res.total += 1
        verdict = "unparsed"
        if choice is None:
            res.unparsed += 1  # unparsed counts incorrect
        elif choice == item.answer_index:
            res.correct += 1
            verdict = "correct"
        else:
            verdict = "incorrect"
        audit.append(
            {
                "id": item.id,
                "task": item.task,
                "window": [round(w, 6) for w in window],
                "raw": raw,
                "parsed": None if choice is None else LETTERS[choice],
                "expected": LETTERS[item.answer_index],
                "verdict": verdict,
            }
        )
    return results, audit


def run_proactive_eval(
    items: Sequence[ProactiveItem],
    adapter: ModelAdapter,
    source: FrameSource,
    config: EvalConfig,
) -> tuple[dict[str, ProactiveResult], list[dict]]:
    """Multi-trigger proactive protocol: at each checkpoint the adapter
    sees the cumulative prefix and answers yes/no; unparsed counts as no
    (an assistant that mumbles did not alert)."""
    results: dict[str, ProactiveResult] = {}
    audit = []
    for item in sorted(items, key=lambda i: (i.video_id, i.task, i.id)):
        res = results.setdefault(item.task, ProactiveResult(task=item.task))
        for k, (r_t, label) in enumerate(item.checkpoints):
            window = context_window("proactive", r_t)
            frames = _gather_frames(source, item.video_id, window, config, config.prompting_mode == "visual-gaze")
            raw = adapter.answer(item.question, frames, f"{item.id}@{k}/yn")
            parsed = parse_yes_no(raw)
            predicted = bool(parsed) if parsed is not None else False
            res.total += 1
            if label:
                res.positives += 1
            else:
                res.negatives += 1
            if predicted == label:
                res.correct += 1
            elif predicted and not label:
                res.false_positives += 1
            else:
                res.false_negatives += 1
            audit.append(
                {
                    "id": item.id,
                    "task": item.task,
                    "checkpoint": r_t,
                    "raw": raw,
                    "predicted": predicted,
                    "label": label,
                }
            )
    return results, audit


def write_report(
    mcq: dict[str, TaskResult],
    proactive: dict[str, ProactiveResult],
    path: Path,
    audit: list[dict] | None = None,
    audit_path: Path | None = None,
) -> None:
    doc = {
        "tasks": {k: v.as_dict() for k, v in sorted(mcq.items())},
        "proactive": {k: v.as_dict() for k, v in sorted(proactive.items())},
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")
    if audit is not None and audit_path is not None:
        audit_path.parent.mkdir(parents=True, exist_ok=True)
        with open(audit_path, "w") as f:
            for row in audit:
                f.write(json.dumps(row, sort_keys=True))
                f.write("\n")
