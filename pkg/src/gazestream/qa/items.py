"""QA item records, deterministic seeding, and line-record serialization."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from ..errors import DataError

MCQ_TASKS = ("NFI", "OTP", "GSM", "SR", "OI_E", "OI_H", "OAR", "FAP")
PROACTIVE_TASKS = ("GTA", "OAA")
PAST_TASKS = frozenset({"NFI", "OTP", "GSM", "SR"})
PRESENT_TASKS = frozenset({"OI_E", "OI_H", "OAR", "FAP"})


def item_seed(base_seed: int, video_id: str, task: str, index: int) -> int:
    """Stable per-item seed: every random draw flows from this.

    Derived by hashing, not Python's hash(), so corpora reproduce across
    processes and platforms.
    """
    digest = hashlib.sha256(f"{base_seed}|{video_id}|{task}|{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class QAItem:
    id: str
    task: str
    video_id: str
    t_q: float
    response_window: tuple[float, float]
    question: str
    options: list[str]
    answer_index: int
    seed: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in MCQ_TASKS:
            raise DataError(f"unknown task {self.task!r}")
        if len(self.options) != 4 or len(set(self.options)) != 4:
            raise DataError(f"{self.id}: options must be 4 pairwise-distinct texts")
        if not (0 <= self.answer_index < 4):
            raise DataError(f"{self.id}: answer index {self.answer_index} out of range")

    @property
    def answer(self) -> str:
        return self.options[self.answer_index]


@dataclass
class ProactiveItem:
    id: str
    task: str
    video_id: str
    target_identity: str
    question: str
    checkpoints: list[tuple[float, bool]]  # (r_t seconds, positive label)
    seed: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in PROACTIVE_TASKS:
            raise DataError(f"unknown proactive task {self.task!r}")
        times = [t for t, _ in self.checkpoints]
        if times != sorted(times):
            raise DataError(f"{self.id}: checkpoint times must be sorted")
        if not any(lab for _, lab in self.checkpoints):
            raise DataError(f"{self.id}: needs at least one positive checkpoint")


@dataclass(frozen=True)
class ActionAnnotation:
    timestamp: float
    description: str


@dataclass(frozen=True)
class Skip:
    """Structured record of why a candidate item was not generated."""

    video_id: str
    task: str
    anchor: int
    reason: str


def assemble_options(answer: str, distractors: list[str], rng: random.Random) -> tuple[list[str], int]:
    """Seeded shuffle of [answer + 3 distractors]; returns (options, index)."""
    options = [answer] + list(distractors)
    if len(options) != 4 or len(set(options)) != 4:
        raise DataError(f"need 4 distinct options, got {options}")
    rng.shuffle(options)
    return options, options.index(answer)


# ---------------------------------------------------------------------------
# line-record files (one file per task)


def _item_dict(item: QAItem | ProactiveItem) -> dict:
    if isinstance(item, QAItem):
        return {
            "id": item.id,
            "task": item.task,
            "video_id": item.video_id,
            "t_q": item.t_q,
            "response_window": list(item.response_window),
            "question": item.question,
            "options": item.options,
            "answer_index": item.answer_index,
            "seed": item.seed,
            "metadata": item.metadata,
        }
    return {
        "id": item.id,
        "task": item.task,
        "video_id": item.video_id,
        "target_identity": item.target_identity,
        "question": item.question,
        "checkpoints": [[t, int(lab)] for t, lab in item.checkpoints],
        "seed": item.seed,
        "metadata": item.metadata,
    }


def write_items(items: Iterable[QAItem | ProactiveItem], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for item in items:
            f.write(json.dumps(_item_dict(item), sort_keys=True))
            f.write("\n")


def read_items(path: Path) -> list[QAItem | ProactiveItem]:
    out: list[QAItem | ProactiveItem] = []
    with open(path) as f:
        for line in f:
            if not line.strip():
                continue
            doc = json.loads(line)
            if doc["task"] in PROACTIVE_TASKS:
                out.append(
                    ProactiveItem(
                        id=doc["id"],
                        task=doc["task"],
                        video_id=doc["video_id"],
                        target_identity=doc["target_identity"],
                        question=doc["question"],
                        checkpoints=[(float(t), bool(lab)) for t, lab in doc["checkpoints"]],
                        seed=doc["seed"],
                        metadata=doc.get("metadata", {}),
                    )
                )
            else:
                out.append(
                    QAItem(
                        id=doc["id"],
                        task=doc["task"],
                        video_id=doc["video_id"],
                        t_q=float(doc["t_q"]),
                        response_window=(float(doc["response_window"][0]), float(doc["response_window"][1])),
                        question=doc["question"],
                        options=list(doc["options"]),
                        answer_index=int(doc["answer_index"]),
                        seed=doc["seed"],
                        metadata=doc.get("metadata", {}),
                    )
                )
    return out


def read_actions(path: Path) -> list[ActionAnnotation]:
    """Action annotations as (timestamp, description) line records."""
    import csv

    out = []
    with open(path, newline="") as f:
        for row in csv.reader(f):
            if not row or row[0] == "timestamp":
                continue
            out.append(ActionAnnotation(timestamp=float(row[0]), description=row[1]))
    if [a.timestamp for a in out] != sorted(a.timestamp for a in out):
        raise DataError(f"{path}: action timestamps must be sorted")
    return out
