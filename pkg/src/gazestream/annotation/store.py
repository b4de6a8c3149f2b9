"""Verification record storage, agreement statistics, and scanpath
application.

Storage is an append-only JSONL log plus a derived live view: the latest
record per (annotator, video, fixation, object) wins. Majority vote
resolves disagreements; even-split ties resolve to exclude, since an
ambiguous object would pollute downstream QA.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from ..errors import DataError
from ..scanpath import Scanpath, ScanpathEntry

# Published per-source agreement figures, displayed next to locally
# computed statistics in reports for comparison.
REFERENCE_AGREEMENT = {
    "EGTEA-Gaze": {"inclusion_ratio": 81.77, "modified_ratio": 6.89},
    "HoloAssist": {"inclusion_ratio": 67.88, "modified_ratio": 9.99},
    "EgoExoLearn": {"inclusion_ratio": 84.31, "modified_ratio": 7.24},
}
REFERENCE_FLEISS_KAPPA = 0.60


@dataclass(frozen=True)
class VerificationRecord:
    annotator_id: str
    video_id: str
    fixation_index: int
    object_identity: str
    decision: str  # include | exclude
    edited_identity: str | None = None
    edited_caption: str | None = None
    recorded_at: float = 0.0

    def __post_init__(self):
        if self.decision not in ("include", "exclude"):
            raise DataError(f"decision must be include or exclude, got {self.decision!r}")

    @property
    def key(self) -> tuple[str, str, int, str]:
        return (self.annotator_id, self.video_id, self.fixation_index, self.object_identity)

    @property
    def has_edit(self) -> bool:
        return bool(self.edited_identity) or bool(self.edited_caption)


@dataclass
class AgreementStats:
    inclusion_ratio: float  # percent
    modified_ratio: float  # percent
    fleiss_kappa: float | None

    def as_dict(self) -> dict:
        return {
            "inclusion_ratio": round(self.inclusion_ratio, 4),
            "modified_ratio": round(self.modified_ratio, 4),
            "fleiss_kappa": None if self.fleiss_kappa is None else round(self.fleiss_kappa, 6),
        }


class DecisionStore:
    """Append-only log with a last-write-wins live view."""

    def __init__(self, log_path: Path, scanpaths: dict[str, Scanpath]):
        self.log_path = Path(log_path)
        self.scanpaths = scanpaths
        self.live: dict[tuple, VerificationRecord] = {}
        self._counter = 0
        if self.log_path.exists():
            with open(self.log_path) as f:
                for line in f:
                    if line.strip():
                        rec = VerificationRecord(**json.loads(line))
                        self.live[rec.key] = rec
                        self._counter += 1

    def _entry(self, video_id: str, fixation_index: int) -> ScanpathEntry:
        if video_id not in self.scanpaths:
            raise DataError(f"unknown video {video_id!r}")
        s = self.scanpaths[video_id]
        for e in s.entries:
            if e.fixation.index == fixation_index:
                return e
        raise DataError(f"unknown fixation {fixation_index} in video {video_id!r}")

    def submit(self, record: VerificationRecord) -> str:
        """Upsert by (annotator, fixation, object); the log keeps history."""
        entry = self._entry(record.video_id, record.fixation_index)
        identities = set(entry.fov_identities()) | set(entry.out_identities())
        if record.object_identity not in identities:
            raise DataError(f"object {record.object_identity!r} not in fixation {record.fixation_index}")
        if record.has_edit and record.object_identity != entry.gazed.identity:
            raise DataError("edits are only permitted on the gazed object")
        self.log_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.log_path, "a") as f:
            f.write(json.dumps(asdict(record), sort_keys=True))
            f.write("\n")
        self.live[record.key] = record
        self._counter += 1
        self.write_snapshot()
        return f"rec-{self._counter:06d}"

    @property
    def snapshot_path(self) -> Path:
        return self.log_path.with_suffix(".snapshot.json")

    def write_snapshot(self) -> None:
        """Derived last-write-wins view, for inspection without replay."""
        doc = [asdict(r) for r in self.all_records()]
        with open(self.snapshot_path, "w") as f:
            json.dump(doc, f, indent=1, sort_keys=True)
            f.write("\n")

    def records_for(self, video_id: str) -> list[VerificationRecord]:
        return sorted(
            (r for r in self.live.values() if r.video_id == video_id),
            key=lambda r: r.key,
        )

    def all_records(self) -> list[VerificationRecord]:
        return sorted(self.live.values(), key=lambda r: r.key)

    def log_length(self) -> int:
        return self._counter


# ---------------------------------------------------------------------------
# agreement statistics


def fleiss_kappa(counts: list[list[int]]) -> float:
    """Fleiss' kappa over an items x categories count matrix.

    Every item must carry the same number of ratings (n >= 2). When chance
    agreement is 1 (all ratings in one category) kappa is 1.0, which is
    the only attainable observed agreement in that case.
    """
    if not counts:
        raise DataError("empty rating matrix")
    n = sum(counts[0])
    if n < 2:
        raise DataError("need at least 2 ratings per item")
    for row in counts:
        if sum(row) != n:
            raise DataError("every item must be rated by the same number of annotators")
    n_items = len(counts)
    k = len(counts[0])
    p_bar = sum((sum(c * c for c in row) - n) / (n * (n - 1)) for row in counts) / n_items
    marginals = [sum(row[j] for row in counts) / (n_items * n) for j in range(k)]
    p_e = sum(p * p for p in marginals)
    if p_e >= 1.0:
        return 1.0
    return (p_bar - p_e) / (1.0 - p_e)


def _group_votes(records: list[VerificationRecord]) -> dict[tuple, list[VerificationRecord]]:
    groups: dict[tuple, list[VerificationRecord]] = {}
    for r in records:
        groups.setdefault((r.video_id, r.fixation_index, r.object_identity), []).append(r)
    return groups


def majority_include(votes: list[VerificationRecord]) -> bool:
    """Strict majority includes; even-split ties exclude."""
    includes = sum(1 for v in votes if v.decision == "include")
    return includes * 2 > len(votes)


def agreement_stats(
    records: list[VerificationRecord],
    scanpaths: dict[str, Scanpath],
    source_of: dict[str, str] | None = None,
) -> dict[str, AgreementStats]:
    """Inclusion / modification ratios and Fleiss' kappa, grouped by source.

    inclusion_ratio: majority-included objects over reviewed objects.
    modified_ratio: gazed objects with any edit over reviewed gazed objects.
    Kappa uses only objects rated by the modal annotator count (>= 2).
    """
    by_source: dict[str, list[VerificationRecord]] = {}
    for r in records:
        src = (source_of or {}).get(r.video_id, "all")
        by_source.setdefault(src, []).append(r)

    out = {}
    for src, recs in sorted(by_source.items()):
        groups = _group_votes(recs)
        total = len(groups)
        included = sum(1 for votes in groups.values() if majority_include(votes))
        gazed_total = 0
        gazed_modified = 0
        matrix = []
        counts_per_item = [len(v) for v in groups.values()]
        modal_n = max(set(counts_per_item), key=lambda c: (counts_per_item.count(c), c)) if counts_per_item else 0
        for (video_id, fixation_index, identity), votes in sorted(groups.items()):
            s = scanpaths.get(video_id)
            if s is not None:
                entry = next((e for e in s.entries if e.fixation.index == fixation_index), None)
                if entry is not None and entry.gazed.identity == identity:
                    gazed_total += 1
                    if any(v.has_edit for v in votes):
                        gazed_modified += 1
            if len(votes) == modal_n and modal_n >= 2:
                inc = sum(1 for v in votes if v.decision == "include")
                matrix.append([inc, len(votes) - inc])
        kappa = fleiss_kappa(matrix) if matrix else None
        out[src] = AgreementStats(
            inclusion_ratio=100.0 * included / total if total else 0.0,
            modified_ratio=100.0 * gazed_modified / gazed_total if gazed_total else 0.0,
            fleiss_kappa=kappa,
        )
    return out


# ---------------------------------------------------------------------------
# applying decisions back onto scanpaths


def apply_verification(s: Scanpath, records: list[VerificationRecord]) -> Scanpath:
    """Produce the verified scanpath.

    Majority-excluded objects are removed; the newest edit (recorded_at,
    then annotator id) rewrites the gazed object's identity or caption; an
    entry whose gazed object is excluded is dropped entirely. Idempotent:
    reapplying the same records changes nothing.
    """
    from ..oracle import ObjectRecord

    groups = _group_votes([r for r in records if r.video_id == s.video_id])
    entries = []
    for e in s.entries:
        votes_for = lambda identity: groups.get((s.video_id, e.fixation.index, identity))  # noqa: E731

        gazed_votes = votes_for(e.gazed.identity)
        if gazed_votes and not majority_include(gazed_votes):
            continue  # losing the gazed object drops the entry
        gazed = e.gazed
        if gazed_votes:
            edits = sorted(
                (v for v in gazed_votes if v.has_edit),
                key=lambda v: (v.recorded_at, v.annotator_id),
            )
            if edits:
                last = edits[-1]
                gazed = ObjectRecord(
                    identity=last.edited_identity or gazed.identity,
                    caption=last.edited_caption or gazed.caption,
                    region=gazed.region,
                    fixation_index=gazed.fixation_index,
                )
        fov = [gazed]
        fov_seen = {gazed.identity}
        for o in e.fov_objects[1:]:
            votes = votes_for(o.identity)
            if votes and not majority_include(votes):
                continue
            if o.identity not in fov_seen:  # a rename may collide
                fov_seen.add(o.identity)
                fov.append(o)
        out = []
        for o in e.out_objects:
            votes = votes_for(o.identity)
            if votes and not majority_include(votes):
                continue
            if o.identity not in fov_seen:
                out.append(o)
        entries.append(ScanpathEntry(fixation=e.fixation, fov_objects=fov, out_objects=out))
    return Scanpath(video_id=s.video_id, entries=entries, verified=True)

