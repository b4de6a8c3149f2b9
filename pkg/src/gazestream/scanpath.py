"""Scanpaths: ordered per-fixation object sets and their set algebra.

A scanpath pairs each fixation with the objects inside the user's FOV
(gazed object first) and the objects visible outside it. QA generators
consume this structure through the pool operations below.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

from .errors import DataError
from .fixation import Fixation
from .oracle import FovExtraction, ObjectPool, ObjectRecord


@dataclass
class ScanpathEntry:
    fixation: Fixation
    fov_objects: list[ObjectRecord]  # gazed object first
    out_objects: list[ObjectRecord]

    @property
    def gazed(self) -> ObjectRecord:
        return self.fov_objects[0]

    def fov_identities(self) -> list[str]:
        return [o.identity for o in self.fov_objects]

    def out_identities(self) -> list[str]:
        return [o.identity for o in self.out_objects]


@dataclass
class Scanpath:
    video_id: str
    entries: list[ScanpathEntry]
    verified: bool = False

    def __len__(self) -> int:
        return len(self.entries)


def build(video_id: str, fixations: Sequence[Fixation], extractions: Sequence[tuple[FovExtraction, list[ObjectRecord]]]) -> Scanpath:
    """Zip fixations with their (FOV, out-of-FOV) extraction pairs.

    Identities are canonicalized against one per-video pool; a duplicate
    identity within a list keeps its first caption, and an identity in
    both lists of one entry is dropped from the out list.
    """
    if len(fixations) != len(extractions):
        raise DataError(f"{len(fixations)} fixations but {len(extractions)} extraction pairs")
    pool = ObjectPool()
    entries = []
    for fix, (fov, out) in zip(fixations, extractions):
        fov_records = _dedup(
            [_canon(fov.gaze_object, pool, fix.index, "fov-gazed")]
            + [_canon(o, pool, fix.index, "fov-other") for o in fov.other_objects]
        )
        fov_ids = {o.identity for o in fov_records}
        out_records = _dedup(
            [_canon(o, pool, fix.index, "out-of-fov") for o in out if pool.canonicalize(o.identity) not in fov_ids]
        )
        entries.append(ScanpathEntry(fixation=fix, fov_objects=fov_records, out_objects=out_records))
    entries.sort(key=lambda e: e.fixation.t_start)
    return Scanpath(video_id=video_id, entries=entries)


def _canon(rec: ObjectRecord, pool: ObjectPool, fixation_index: int, region: str) -> ObjectRecord:
    return ObjectRecord(
        identity=pool.canonicalize(rec.identity),
        caption=rec.caption,
        region=region,
        fixation_index=fixation_index,
    )


def _dedup(records: list[ObjectRecord]) -> list[ObjectRecord]:
    seen = set()
    out = []
    for r in records:
        if r.identity not in seen:
            seen.add(r.identity)
            out.append(r)
    return out


# ---------------------------------------------------------------------------
# set algebra


def global_pool(s: Scanpath, upto: int) -> set[str]:
    """Union of FOV and out-of-FOV identities over entries 0..upto."""
    pool: set[str] = set()
    for e in s.entries[: upto + 1]:
        pool.update(e.fov_identities())
        pool.update(e.out_identities())
    return pool


def fixated_pool(s: Scanpath, upto: int) -> set[str]:
    """All FOV identities (gazed and perifoveal) over entries 0..upto."""
    pool: set[str] = set()
    for e in s.entries[: upto + 1]:
        pool.update(e.fov_identities())
    return pool


def gazed_pool(s: Scanpath, upto: int) -> set[str]:
    """Only the precisely gazed identities over entries 0..upto."""
    return {e.gazed.identity for e in s.entries[: upto + 1]}


def never_fixated(s: Scanpath, upto: int) -> set[str]:
    """Objects visible up to the query index but never inside the FOV."""
    return global_pool(s, upto) - fixated_pool(s, upto)


def background_pool(s: Scanpath, upto: int | None = None) -> set[str]:
    """Union of out-of-FOV identities (whole video when upto is None)."""
    last = len(s.entries) - 1 if upto is None else upto
    pool: set[str] = set()
    for e in s.entries[: last + 1]:
        pool.update(e.out_identities())
    return pool


def first_new_object(s: Scanpath, i: int) -> str | None:
    """First identity in entry i+1's FOV list absent from entry i's."""
    if i + 1 >= len(s.entries):
        raise DataError(f"no entry after index {i}")
    prev = set(s.entries[i].fov_identities())
    for identity in s.entries[i + 1].fov_identities():
        if identity not in prev:
            return identity
    return None


# ---------------------------------------------------------------------------
# serialization (the interchange file between pipeline stages and the
# annotation service)


def to_dict(s: Scanpath) -> dict:
    return {
        "video_id": s.video_id,
        "verified": s.verified,
        "entries": [
            {
                "fixation": asdict(e.fixation),
                "fov_objects": [_record_dict(o) for o in e.fov_objects],
                "out_objects": [_record_dict(o) for o in e.out_objects],
            }
            for e in s.entries
        ],
    }


def _record_dict(o: ObjectRecord) -> dict:
    return {"identity": o.identity, "caption": o.caption, "region": o.region, "fixation_index": o.fixation_index}


def from_dict(doc: dict) -> Scanpath:
    entries = []
    for ed in doc["entries"]:
        fx = Fixation(**ed["fixation"])
        entries.append(
            ScanpathEntry(
                fixation=fx,
                fov_objects=[ObjectRecord(**od) for od in ed["fov_objects"]],
                out_objects=[ObjectRecord(**od) for od in ed["out_objects"]],
            )
        )
    return Scanpath(video_id=doc["video_id"], entries=entries, verified=bool(doc.get("verified", False)))


def save(s: Scanpath, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(to_dict(s), f, indent=1, sort_keys=True)
        f.write("\n")


def load(path: Path) -> Scanpath:
    with open(path) as f:
        return from_dict(json.load(f))
