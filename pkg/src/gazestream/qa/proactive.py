"""Proactive alert tasks (gaze-triggered and appearance-triggered) and the
fine-tuning conversation export."""

from __future__ import annotations

from typing import Callable

from ..scanpath import Scanpath
from .items import ProactiveItem, Skip, item_seed
from .templates import DEFAULT_TEMPLATES

DEFAULT_OFFSETS = (-20.0, -10.0, 0.0, 10.0, 20.0)

GenResult = tuple[list[ProactiveItem], list[Skip]]

StaticFilter = Callable[[str], bool]  # identity -> is background furniture / static structure


def denylist_filter(denylist: list[str]) -> StaticFilter:
    """Mock-friendly substitute for the oracle static-object filter."""
    keys = {d.strip().lower() for d in denylist}
    return lambda identity: identity.strip().lower() in keys


def oracle_static_filter(endpoint) -> StaticFilter:
    from ..oracle import load_prompt

    template = load_prompt("static_filter.txt")

    def check(identity: str) -> bool:
        verdict = endpoint.complete([], template.replace("{identity}", identity))
        return verdict.strip().lower().startswith("yes")

    return check


def _checkpoints(anchor_t: float, offsets, video_end: float) -> list[float]:
    """Anchor plus offsets, dropped (not clamped) outside [0, video_end]."""
    times = sorted({anchor_t + off for off in offsets})
    return [t for t in times if 0.0 <= t <= video_end]


def gen_gta(
    s: Scanpath,
    base_seed: int,
    video_end: float,
    offsets=DEFAULT_OFFSETS,
    static_filter: StaticFilter | None = None,
    templates: dict | None = None,
) -> GenResult:
    """Alert when the user fixates the target object.

    One item per fixated identity, checkpoints around its first fixation;
    a checkpoint is positive when some fixation on the target covers it.
    """
    if not s.verified:
        from ..errors import DataError

        raise DataError(f"scanpath {s.video_id} is not verified")
    items, skips = [], []
    seen: set[str] = set()
    targets = []
    for e in s.entries:
        if e.gazed.identity not in seen:
            seen.add(e.gazed.identity)
            targets.append((e.gazed.identity, e.fixation.t_start))
    for idx, (target, first_t) in enumerate(targets):
        if static_filter is not None and static_filter(target):
            skips.append(Skip(s.video_id, "GTA", idx, f"{target!r} filtered as static/background"))
            continue
        times = _checkpoints(first_t, offsets, video_end)
        intervals = [
            (e.fixation.t_start, e.fixation.t_end) for e in s.entries if e.gazed.identity == target
        ]
        checkpoints = [(t, any(a <= t <= b for a, b in intervals)) for t in times]
        if not any(lab for _, lab in checkpoints):
            skips.append(Skip(s.video_id, "GTA", idx, "no positive checkpoint after boundary drops"))
            continue
        template = (templates or {}).get("GTA", DEFAULT_TEMPLATES["GTA"])
        items.append(
            ProactiveItem(
                id=f"{s.video_id}-GTA-{idx:04d}",
                task="GTA",
                video_id=s.video_id,
                target_identity=target,
                question=template.format(target=target),
                checkpoints=checkpoints,
                seed=item_seed(base_seed, s.video_id, "GTA", idx),
                metadata={"first_event_time": first_t},
            )
        )
    return items, skips


def gen_oaa(
    s: Scanpath,
    base_seed: int,
    video_end: float,
    offsets=DEFAULT_OFFSETS,
    static_filter: StaticFilter | None = None,
    templates: dict | None = None,
) -> GenResult:
    """Alert when the target first appears in the peripheral region.

    Positive checkpoints require the target in the covering entry's
    out-of-FOV list and absent from its FOV list.
    """
    if not s.verified:
        from ..errors import DataError

        raise DataError(f"scanpath {s.video_id} is not verified")
    items, skips = [], []
    seen: set[str] = set()
    targets = []
    for e in s.entries:
        for identity in e.out_identities():
            if identity not in seen:
                seen.add(identity)
                targets.append((identity, e.fixation.t_start))
    for idx, (target, first_t) in enumerate(targets):
        if static_filter is not None and static_filter(target):
            skips.append(Skip(s.video_id, "OAA", idx, f"{target!r} filtered as static/background"))
            continue
        times = _checkpoints(first_t, offsets, video_end)
        intervals = [
            (e.fixation.t_start, e.fixation.t_end)
            for e in s.entries
            if target in e.out_identities() and target not in e.fov_identities()
        ]
        checkpoints = [(t, any(a <= t <= b for a, b in intervals)) for t in times]
        if not any(lab for _, lab in checkpoints):
            skips.append(Skip(s.video_id, "OAA", idx, "no positive checkpoint after boundary drops"))
            continue
        template = (templates or {}).get("OAA", DEFAULT_TEMPLATES["OAA"])
        items.append(
            ProactiveItem(
                id=f"{s.video_id}-OAA-{idx:04d}",
                task="OAA",
                video_id=s.video_id,
                target_identity=target,
                question=template.format(target=target),
                checkpoints=checkpoints,
                seed=item_seed(base_seed, s.video_id, "OAA", idx),
                metadata={"first_event_time": first_t},
            )
        )
    return items, skips


def export_finetune(items: list[ProactiveItem]) -> list[dict]:
    """Conversation records for proactive fine-tuning.

    One multi-turn record per item: the human monitoring instruction at
    stream start, an empty assistant turn at every checkpoint before the
    trigger (the model learns to stay silent), and the alert text at the
    first positive checkpoint. Later checkpoints are not emitted.
    """
    records = []
    for item in items:
        turns = [
            {"from": "human", "value": f"Monitor and alert when I gaze <{item.target_identity}>", "time": 0.0}
        ]
        last_time = 0.0
        for r_t, label in item.checkpoints:
            if label:
                turns.append({"from": "gpt", "value": f"You are now gazing <{item.target_identity}>.", "time": r_t})
                break
            if r_t <= last_time:
                continue  # a negative at stream start adds nothing
            turns.append({"from": "gpt", "value": "", "time": r_t})
            last_time = r_t
        records.append({"conversations": turns, "proactive": True})
    return records
