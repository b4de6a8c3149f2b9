"""Pipeline configuration: one YAML file drives every stage.

String values support ${VAR} and ${VAR:-default} environment interpolation
so secrets (oracle keys) stay out of the file. The parsed config
round-trips through serialization unchanged.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import DataError
from .fixation import FixationConfig

_ENV = re.compile(r"\$\{(\w+)(?::-([^}]*))?\}")


def interpolate_env(value):
    if isinstance(value, str):
        def sub(m):
            var, default = m.group(1), m.group(2)
            if var in os.environ:
                return os.environ[var]
            if default is not None:
                return default
            raise DataError(f"environment variable {var} is not set and has no default")

        return _ENV.sub(sub, value)
    if isinstance(value, dict):
        return {k: interpolate_env(v) for k, v in value.items()}
    if isinstance(value, list):
        return [interpolate_env(v) for v in value]
    return value


@dataclass
class VideoSpec:
    video_id: str
    frames: Path
    gaze_mode: str  # rays | 2d
    gaze: Path
    poses: Path | None = None
    intrinsics: Path | None = None
    actions: Path | None = None
    source: str = "synthetic"


@dataclass
class OracleSlot:
    kind: str  # mock | remote
    url: str = ""
    model: str = ""
    api_key: str = ""
    mock_dir: Path | None = None
    strict: bool = True


@dataclass
class PipelineConfig:
    dataset_root: Path
    output_root: Path
    videos: list[VideoSpec]
    fixation: FixationConfig
    d_eye: float = 1.0
    axis_transform: list | None = None
    r_deg: float = 15.0
    frames_per_fixation: int = 4
    extraction_oracle: OracleSlot = field(default_factory=lambda: OracleSlot(kind="mock"))
    filtering_oracle: OracleSlot | None = None
    qa_seed: int = 0
    qa_tasks: list[str] = field(default_factory=lambda: ["NFI", "OTP", "GSM", "SR", "OI_E", "OI_H", "OAR", "FAP", "GTA", "OAA"])
    qa_templates: dict = field(default_factory=dict)
    fap_steps: int = 3
    proactive_offsets: list[float] = field(default_factory=lambda: [-20.0, -10.0, 0.0, 10.0, 20.0])
    static_denylist: list[str] = field(default_factory=list)
    eval_omega: float = 60.0
    eval_frame_rate: float = 1.0
    eval_max_frames: int = 16
    eval_prompting_mode: str = "none"
    eval_adapter: str = "random"  # random | scripted:<path> | remote
    eval_seed: int = 0
    jobs: int = 1

    def axis_matrix(self) -> np.ndarray | None:
        if self.axis_transform is None:
            return None
        m = np.asarray(self.axis_transform, dtype=np.float64)
        if m.shape != (4, 4):
            raise DataError(f"axis_transform must be 4x4, got {m.shape}")
        return m

    def video(self, video_id: str) -> VideoSpec:
        for v in self.videos:
            if v.video_id == video_id:
                return v
        raise DataError(f"unknown video {video_id !r}")


def _oracle_slot(doc: dict | None, base: Path) -> OracleSlot | None:
    if doc is None:
        return None
    slot = OracleSlot(
        kind=doc.get("kind", "mock"),
        url=doc.get("url", ""),
        model=doc.get("model", ""),
        api_key=doc.get("api_key", ""),
        mock_dir=_resolve(base, doc["mock_dir"]) if doc.get("mock_dir") else None,
        strict=bool(doc.get("strict", True)),
    )
    if slot.kind not in ("mock", "remote"):
        raise DataError(f"oracle kind must be mock or remote, got {slot.kind!r}")
    return slot


def _resolve(base: Path, p) -> Path:
    path = Path(p)
    return path if path.is_absolute() else base / path


def load_config(path: Path) -> PipelineConfig:
    path = Path(path)
    with open(path) as f:
        doc = interpolate_env(yaml.safe_load(f))
    base = path.parent
    try:
        dataset_root = _resolve(base, doc["dataset_root"])
        output_root = _resolve(base, doc["output_root"])
        videos = []
        for v in doc["videos"]:
            videos.append(
                VideoSpec(
                    video_id=v["video_id"],
                    frames=_resolve(dataset_root, v["frames"]),
                    gaze_mode=v["gaze_mode"],
                    gaze=_resolve(dataset_root, v["gaze"]),
                    poses=_resolve(dataset_root, v["poses"]) if v.get("poses") else None,
                    intrinsics=_resolve(dataset_root, v["intrinsics"]) if v.get("intrinsics") else None,
                    actions=_resolve(dataset_root, v["actions"]) if v.get("actions") else None,
                    source=v.get("source", "synthetic"),
                )
            )
        fx = doc["fixation"]
        fixation = FixationConfig(
            r_thresh=float(fx["r_thresh"]),
            tau_dur=float(fx["tau_dur"]),
            interruption_max=float(fx.get("interruption_max", 0.2)),
            tau_scene=float(fx.get("tau_scene", 0.9)),
            hist_bins_hue=int(fx.get("hist_bins_hue", 30)),
            hist_bins_sat=int(fx.get("hist_bins_sat", 32)),
            scene_samples=int(fx.get("scene_samples", 8)),
        )
    except KeyError as exc:
        raise DataError(f"config {path}: missing required field {exc}") from exc
    qa = doc.get("qa", {})
    ev = doc.get("eval", {})
    return PipelineConfig(
        dataset_root=dataset_root,
        output_root=output_root,
        videos=videos,
        fixation=fixation,
        d_eye=float(doc.get("d_eye", 1.0)),
        axis_transform=doc.get("axis_transform"),
        r_deg=float(doc.get("r_deg", 15.0)),
        frames_per_fixation=int(doc.get("frames_per_fixation", 4)),
        extraction_oracle=_oracle_slot(doc.get("extraction_oracle"), base) or OracleSlot(kind="mock"),
        filtering_oracle=_oracle_slot(doc.get("filtering_oracle"), base),
        qa_seed=int(qa.get("seed", 0)),
        qa_tasks=list(qa.get("tasks", PipelineConfig.__dataclass_fields__["qa_tasks"].default_factory())),
        qa_templates=dict(qa.get("templates", {})),
        fap_steps=int(qa.get("fap_steps", 3)),
        proactive_offsets=[float(x) for x in qa.get("proactive_offsets", [-20.0, -10.0, 0.0, 10.0, 20.0])],
        static_denylist=list(qa.get("static_denylist", [])),
        eval_omega=float(ev.get("omega", 60.0)),
        eval_frame_rate=float(ev.get("frame_rate", 1.0)),
        eval_max_frames=int(ev.get("max_frames", 16)),
        eval_prompting_mode=ev.get("prompting_mode", "none"),
        eval_adapter=ev.get("adapter", "random"),
        eval_seed=int(ev.get("seed", 0)),
        jobs=int(doc.get("jobs", 1)),
    )
