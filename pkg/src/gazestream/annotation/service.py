"""Web service for human verification of scanpaths.

Endpoints: episode listing with progress, one episode's details (clip
preview frames, FOV patch, object cards), decision submission, agreement
statistics, and static media. The browser UI consumes only this API.
"""

from __future__ import annotations

import time
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..errors import DataError
from ..oracle import load_prompt
from ..scanpath import Scanpath
from .store import (
    REFERENCE_AGREEMENT,
    REFERENCE_FLEISS_KAPPA,
    DecisionStore,
    VerificationRecord,
    agreement_stats,
    apply_verification,
)


class DecisionIn(BaseModel):
    annotator_id: str = Field(min_length=1)
    video_id: str
    fixation_index: int
    object_identity: str
    decision: str
    edited_identity: str | None = None
    edited_caption: str | None = None


def _episode_payload(s: Scanpath, entry_idx: int, media_root: Path | None) -> dict:
    e = s.entries[entry_idx]
    fix = e.fixation
    media = {}
    if media_root is not None:
        base = f"/media/{s.video_id}"
        media = {
            "fov_patch": f"{base}/fix{fix.index:04d}_patch.png",
            "clip_frames": [f"{base}/fix{fix.index:04d}_clip{k}.png" for k in range(4)],
        }
    return {
        "video_id": s.video_id,
        "fixation_index": fix.index,
        "t_start": fix.t_start,
        "t_end": fix.t_end,
        "centroid": [fix.centroid_x, fix.centroid_y],
        "gazed_object": {"identity": e.gazed.identity, "caption": e.gazed.caption},
        "fov_objects": [{"identity": o.identity, "caption": o.caption} for o in e.fov_objects[1:]],
        "out_objects": [{"identity": o.identity, "caption": o.caption} for o in e.out_objects],
        "media": media,
    }


def create_app(
    scanpaths: dict[str, Scanpath],
    store: DecisionStore,
    media_root: Path | None = None,
    source_of: dict[str, str] | None = None,
    ui_dist: Path | None = None,
) -> FastAPI:
    app = FastAPI(title="gazestream annotation service")

    episode_index: list[tuple[str, int]] = []
    for video_id in sorted(scanpaths):
        for i, _ in enumerate(scanpaths[video_id].entries):
            episode_index.append((video_id, i))

    @app.get("/api/episodes")
    def list_episodes(annotator_id: str = "") -> dict:
        items = []
        for video_id, idx in episode_index:
            e = scanpaths[video_id].entries[idx]
            objects = set(e.fov_identities()) | set(e.out_identities())
            decided = 0
            if annotator_id:
                decided = sum(
                    1
                    for o in objects
                    if (annotator_id, video_id, e.fixation.index, o) in store.live
                )
            items.append(
                {
                    "video_id": video_id,
                    "fixation_index": e.fixation.index,
                    "object_count": len(objects),
                    "decided_count": decided,
                    "done": decided == len(objects),
                }
            )
        return {"episodes": items}

    @app.get("/api/episodes/{video_id}/{fixation_index}")
    def get_episode(video_id: str, fixation_index: int, annotator_id: str = "") -> dict:
        if video_id not in scanpaths:
            raise HTTPException(status_code=404, detail=f"unknown video {video_id}")
        s = scanpaths[video_id]
        for i, e in enumerate(s.entries):
            if e.fixation.index == fixation_index:
                payload = _episode_payload(s, i, media_root)
                if annotator_id:
                    payload["decisions"] = {
                        r.object_identity: {
                            "decision": r.decision,
                            "edited_identity": r.edited_identity,
                            "edited_caption": r.edited_caption,
                        }
                        for r in store.records_for(video_id)
                        if r.annotator_id == annotator_id and r.fixation_index == fixation_index
                    }
                return payload
        raise HTTPException(status_code=404, detail=f"unknown fixation {fixation_index}")

    @app.post("/api/decisions")
    def post_decision(body: DecisionIn) -> dict:
        record = VerificationRecord(
            annotator_id=body.annotator_id,
            video_id=body.video_id,
            fixation_index=body.fixation_index,
            object_identity=body.object_identity,
            decision=body.decision,
            edited_identity=body.edited_identity,
            edited_caption=body.edited_caption,
            recorded_at=time.time(),
        )
        try:
            stored_id = store.submit(record)
        except DataError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {"stored_id": stored_id}

    @app.get("/api/stats")
    def get_stats() -> dict:
        stats = agreement_stats(store.all_records(), scanpaths, source_of)
        return {
            "computed": {src: st.as_dict() for src, st in stats.items()},
            "reference": {
                "per_source": REFERENCE_AGREEMENT,
                "fleiss_kappa": REFERENCE_FLEISS_KAPPA,
            },
        }

    @app.get("/api/verified/{video_id}")
    def get_verified(video_id: str) -> dict:
        if video_id not in scanpaths:
            raise HTTPException(status_code=404, detail=f"unknown video {video_id}")
        from ..scanpath import to_dict

        return to_dict(apply_verification(scanpaths[video_id], store.records_for(video_id)))

    @app.get("/api/instructions", response_class=PlainTextResponse)
    def instructions() -> str:
        return load_prompt("annotator_instructions.txt")

    if media_root is not None and Path(media_root).exists():
        app.mount("/media", StaticFiles(directory=str(media_root)), name="media")
    if ui_dist is not None and Path(ui_dist).exists():
        app.mount("/", StaticFiles(directory=str(ui_dist), html=True), name="ui")
    return app
