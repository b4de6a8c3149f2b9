"""Pipeline stages behind the CLI commands.

Every stage is a pure function of its declared input artifacts plus the
config; reruns with unchanged inputs produce byte-identical outputs. A
stage whose prerequisites are missing raises a DataError naming the
command that produces them.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import fov, scanpath as sp
from .annotation.store import VerificationRecord, apply_verification
from .config import OracleSlot, PipelineConfig, VideoSpec
from .errors import DataError
from .eval import (
    EvalConfig,
    ProactiveResult,
    RandomAdapter,
    ScriptedAdapter,
    TaskResult,
    run_mcq_eval,
    run_proactive_eval,
    write_report,
)
from .fixation import extract_fixations, read_fixations, sample_indices, write_fixations
from .ingest import (
    GazeTrajectory,
    build_trajectory,
    read_gaze_2d,
    read_gaze_rays,
    read_intrinsics,
    read_poses,
    read_trajectory,
    trajectory_from_2d,
    write_trajectory,
)
from .media import FrameDir, VideoFrameSource, imwrite_rgb
from .oracle import (
    FovExtraction,
    MockOracle,
    ObjectPool,
    ObjectRecord,
    OracleEndpoint,
    RemoteOracle,
    build_fov_prompt,
    build_outfov_prompt,
    parse_extraction,
    request_extraction,
)
from .qa import (
    PROACTIVE_TASKS,
    denylist_filter,
    export_finetune,
    gen_fap,
    gen_gsm,
    gen_gta,
    gen_nfi,
    gen_oaa,
    gen_oar,
    gen_oi,
    gen_otp,
    gen_sr,
    oracle_static_filter,
    read_actions,
    read_items,
    write_items,
)
from .qa.items import ProactiveItem, QAItem


def _need(path: Path, producer: str) -> Path:
    if not Path(path).exists():
        raise DataError(f"missing {path}; run the `{producer}` command first")
    return Path(path)


def _map_videos(cfg: PipelineConfig, fn):
    videos = sorted(cfg.videos, key=lambda v: v.video_id)
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(fn, videos))
    return [fn(v) for v in videos]


def make_oracle(slot: OracleSlot) -> OracleEndpoint:
    if slot.kind == "remote":
        return RemoteOracle(url=slot.url, model=slot.model, api_key=slot.api_key)
    if slot.mock_dir is None:
        raise DataError("mock oracle needs mock_dir in the config")
    return MockOracle(slot.mock_dir, strict=slot.strict)


# ---------------------------------------------------------------------------
# stage: project


def project_video(cfg: PipelineConfig, video: VideoSpec) -> GazeTrajectory:
    frames = FrameDir(video.frames)
    timestamps = frames.timestamps()
    if video.gaze_mode == "2d":
        points = read_gaze_2d(video.gaze)
        return trajectory_from_2d(points, timestamps, frames.width, frames.height)
    if video.gaze_mode == "rays":
        if video.poses is None or video.intrinsics is None:
            raise DataError(f"video {video.video_id}: 3D gaze needs poses and intrinsics")
        rays = read_gaze_rays(video.gaze)
        poses = read_poses(video.poses)
        intrinsics = read_intrinsics(video.intrinsics)
        return build_trajectory(rays, poses, intrinsics, timestamps, cfg.d_eye, cfg.axis_matrix())
    raise DataError(f"video {video.video_id}: unknown gaze_mode {video.gaze_mode!r}")


def stage_project(cfg: PipelineConfig) -> list[Path]:
    def run(video: VideoSpec) -> Path:
        traj = project_video(cfg, video)
        out = cfg.output_root / "trajectories" / f"{video.video_id}.csv"
        write_trajectory(traj, out)
        return out

    return _map_videos(cfg, run)


# ---------------------------------------------------------------------------
# stage: fixations


def stage_fixations(cfg: PipelineConfig) -> list[Path]:
    def run(video: VideoSpec) -> Path:
        tpath = _need(cfg.output_root / "trajectories" / f"{video.video_id}.csv", "project")
        traj = read_trajectory(tpath)
        frames = FrameDir(video.frames)
        fixations = extract_fixations(traj, frames.frame, cfg.fixation)
        out = cfg.output_root / "fixations" / f"{video.video_id}.csv"
        write_fixations(fixations, out)
        return out

    return _map_videos(cfg, run)


# ---------------------------------------------------------------------------
# stage: extract-objects


def video_fov_radius(cfg: PipelineConfig, video: VideoSpec, width: int) -> float:
    fx = None
    if video.intrinsics is not None:
        fx = read_intrinsics(video.intrinsics).fx
    return fov.fov_spec(width, fx=fx, r_deg=cfg.r_deg).radius_px


def extract_video_objects(
    cfg: PipelineConfig,
    video: VideoSpec,
    endpoint: OracleEndpoint,
    media_root: Path | None = None,
) -> list[dict]:
    """Run region-specific prompting over every fixation of one video.

    Returns the serializable extraction documents; optionally writes the
    FOV patch and clip preview images the annotation UI serves.
    """
    fpath = _need(cfg.output_root / "fixations" / f"{video.video_id}.csv", "fixations")
    fixations = read_fixations(fpath)
    frames = FrameDir(video.frames)
    radius = video_fov_radius(cfg, video, frames.width)
    actions = read_actions(video.actions) if video.actions else []
    pool = ObjectPool()
    docs = []
    for fix in fixations:
        caption = ""
        for a in actions:
            if a.timestamp <= fix.t_start:
                caption = a.description
        idx = sample_indices(fix.frame_start, fix.frame_end, cfg.frames_per_fixation)
        raw_frames = [frames.frame(i) for i in idx]
        center = (fix.centroid_x, fix.centroid_y)
        patches = [fov.crop_fov_patch(f, center, radius, mark_center=True) for f in raw_frames]
        x0, y0 = fov.crop_origin(raw_frames[0].shape, center, radius)
        local = (center[0] - x0, center[1] - y0)

        fov_prompt = build_fov_prompt(caption, pool, local)
        fov_doc: FovExtraction = parse_extraction(
            request_extraction(patches, fov_prompt, endpoint), "fov", fix.index
        )
        pool.canonicalize(fov_doc.gaze_object.identity)
        for o in fov_doc.other_objects:
            pool.canonicalize(o.identity)

        masked = [fov.mask_fov(f, center, radius) for f in raw_frames]
        out_prompt = build_outfov_prompt(caption, pool)
        out_records: list[ObjectRecord] = parse_extraction(
            request_extraction(masked, out_prompt, endpoint), "outfov", fix.index
        )
        for o in out_records:
            pool.canonicalize(o.identity)

        if media_root is not None:
            base = media_root / video.video_id
            imwrite_rgb(base / f"fix{fix.index:04d}_patch.png", patches[0])
            for k, f in enumerate(raw_frames[:4]):
                imwrite_rgb(base / f"fix{fix.index:04d}_clip{k}.png", f)

        docs.append(
            {
                "fixation_index": fix.index,
                "scene_caption": fov_doc.scene_caption,
                "gaze_object": {"identity": fov_doc.gaze_object.identity, "caption": fov_doc.gaze_object.caption},
                "fov_others": [{"identity": o.identity, "caption": o.caption} for o in fov_doc.other_objects],
                "out_objects": [{"identity": o.identity, "caption": o.caption} for o in out_records],
            }
        )
    return docs


def stage_extract(cfg: PipelineConfig, endpoint: OracleEndpoint | None = None) -> list[Path]:
    oracle = endpoint if endpoint is not None else make_oracle(cfg.extraction_oracle)
    media_root = cfg.output_root / "media"

    def run(video: VideoSpec) -> Path:
        docs = extract_video_objects(cfg, video, oracle, media_root)
        out = cfg.output_root / "extractions" / f"{video.video_id}.json"
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w") as f:
            json.dump(docs, f, indent=1, sort_keys=True)
            f.write("\n")
        return out

    return _map_videos(cfg, run)


# ---------------------------------------------------------------------------
# stage: scanpath


def _load_extractions(path: Path) -> list[tuple[FovExtraction, list[ObjectRecord]]]:
    with open(path) as f:
        docs = json.load(f)
    pairs = []
    for d in docs:
        i = d["fixation_index"]
        gaze = ObjectRecord(d["gaze_object"]["identity"], d["gaze_object"]["caption"], "fov-gazed", i)
        others = [ObjectRecord(o["identity"], o["caption"], "fov-other", i) for o in d["fov_others"]]
        outs = [ObjectRecord(o["identity"], o["caption"], "out-of-fov", i) for o in d["out_objects"]]
        pairs.append((FovExtraction(d["scene_caption"], gaze, others), outs))
    return pairs


def _load_verification_records(path: Path | None) -> list[VerificationRecord]:
    if path is None:
        return []
    records = []
    with open(_need(path, "serve-annotation")) as f:
        for line in f:
            if line.strip():
                records.append(VerificationRecord(**json.loads(line)))
    return records


def stage_scanpath(cfg: PipelineConfig, records_path: Path | None = None) -> list[Path]:
    records = _load_verification_records(records_path)

    def run(video: VideoSpec) -> Path:
        fpath = _need(cfg.output_root / "fixations" / f"{video.video_id}.csv", "fixations")
        epath = _need(cfg.output_root / "extractions" / f"{video.video_id}.json", "extract-objects")
        fixations = read_fixations(fpath)
        path = sp.build(video.video_id, fixations, _load_extractions(epath))
        verified = apply_verification(path, [r for r in records if r.video_id == video.video_id])
        out = cfg.output_root / "scanpaths" / f"{video.video_id}.json"
        sp.save(verified, out)
        return out

    return _map_videos(cfg, run)


# ---------------------------------------------------------------------------
# stage: genqa


def _static_filter(cfg: PipelineConfig, endpoint: OracleEndpoint | None):
    if cfg.static_denylist:
        return denylist_filter(cfg.static_denylist)
    if endpoint is not None:
        return oracle_static_filter(endpoint)
    return None


def stage_genqa(cfg: PipelineConfig, endpoint: OracleEndpoint | None = None) -> dict[str, Path]:
    filtering = endpoint
    if filtering is None and ("OAR" in cfg.qa_tasks or not cfg.static_denylist):
        slot = cfg.filtering_oracle or cfg.extraction_oracle
        filtering = make_oracle(slot)

    by_task: dict[str, list] = {t: [] for t in cfg.qa_tasks}
    skips = []
    for video in sorted(cfg.videos, key=lambda v: v.video_id):
        spath = _need(cfg.output_root / "scanpaths" / f"{video.video_id}.json", "scanpath")
        path = sp.load(spath)
        actions = read_actions(video.actions) if video.actions else []
        video_end = FrameDir(video.frames).duration
        static = _static_filter(cfg, filtering)
        seed = cfg.qa_seed
        templates = cfg.qa_templates

        def add(task, result):
            items, sk = result
            by_task[task].extend(items)
            skips.extend(sk)

        if "NFI" in by_task:
            add("NFI", gen_nfi(path, seed, templates))
        if "OTP" in by_task:
            add("OTP", gen_otp(path, seed, templates))
        if "GSM" in by_task:
            add("GSM", gen_gsm(path, seed, templates))
        if "SR" in by_task:
            add("SR", gen_sr(path, seed, templates))
        if "OI_E" in by_task:
            add("OI_E", gen_oi(path, "easy", seed, templates))
        if "OI_H" in by_task:
            add("OI_H", gen_oi(path, "hard", seed, templates))
        if "OAR" in by_task:
            add("OAR", gen_oar(path, filtering, seed, templates))
        if "FAP" in by_task:
            add("FAP", gen_fap(path, actions, seed, templates, steps=cfg.fap_steps))
        if "GTA" in by_task:
            add("GTA", gen_gta(path, seed, video_end, cfg.proactive_offsets, static, templates))
        if "OAA" in by_task:
            add("OAA", gen_oaa(path, seed, video_end, cfg.proactive_offsets, static, templates))

    out_paths = {}
    qa_root = cfg.output_root / "qa"
    for task, items in sorted(by_task.items()):
        path = qa_root / f"{task}.jsonl"
        write_items(sorted(items, key=lambda i: i.id), path)
        out_paths[task] = path
    with open(qa_root / "skips.jsonl", "w") as f:
        for skip in sorted(skips, key=lambda s: (s.video_id, s.task, s.anchor)):
            f.write(json.dumps({"video_id": skip.video_id, "task": skip.task, "anchor": skip.anchor, "reason": skip.reason}, sort_keys=True))
            f.write("\n")
    return out_paths


# ---------------------------------------------------------------------------
# stage: evaluate


def _frame_source(cfg: PipelineConfig) -> VideoFrameSource:
    dirs = {}
    trajs = {}
    for video in cfg.videos:
        dirs[video.video_id] = FrameDir(video.frames)
        tpath = cfg.output_root / "trajectories" / f"{video.video_id}.csv"
        if tpath.exists():
            trajs[video.video_id] = read_trajectory(tpath)
    return VideoFrameSource(dirs, trajs)


def _adapter(cfg: PipelineConfig):
    if cfg.eval_adapter == "random":
        return RandomAdapter(seed=cfg.eval_seed)
    if cfg.eval_adapter.startswith("scripted:"):
        return ScriptedAdapter.from_file(Path(cfg.eval_adapter.split(":", 1)[1]))
    raise DataError(f"unknown eval adapter {cfg.eval_adapter!r}")


def stage_evaluate(cfg: PipelineConfig, task_filter: list[str] | None = None) -> Path:
    qa_root = cfg.output_root / "qa"
    mcq_items: list[QAItem] = []
    pro_items: list[ProactiveItem] = []
    wanted = task_filter or cfg.qa_tasks
    for task in wanted:
        path = _need(qa_root / f"{task}.jsonl", "genqa")
        items = read_items(path)
        if task in PROACTIVE_TASKS:
            pro_items.extend(items)  # type: ignore[arg-type]
        else:
            mcq_items.extend(items)  # type: ignore[arg-type]

    radius = 106.67
    if cfg.videos:
        first = sorted(cfg.videos, key=lambda v: v.video_id)[0]
        radius = video_fov_radius(cfg, first, FrameDir(first.frames).width)
    eval_cfg = EvalConfig(
        omega=cfg.eval_omega,
        frame_rate=cfg.eval_frame_rate,
        max_frames=cfg.eval_max_frames,
        prompting_mode=cfg.eval_prompting_mode,
        fov_radius_px=radius,
        seed=cfg.eval_seed,
    )
    source = _frame_source(cfg)
    adapter = _adapter(cfg)
    mcq_results: dict[str, TaskResult]
    pro_results: dict[str, ProactiveResult]
    mcq_results, mcq_audit = run_mcq_eval(mcq_items, adapter, source, eval_cfg, jobs=cfg.jobs)
    pro_results, pro_audit = run_proactive_eval(pro_items, adapter, source, eval_cfg)
    report = cfg.output_root / "reports" / "eval_summary.json"
    write_report(mcq_results, pro_results, report, mcq_audit + pro_audit, cfg.output_root / "reports" / "eval_audit.jsonl")
    return report


# ---------------------------------------------------------------------------
# stage: export-finetune


def stage_export_finetune(cfg: PipelineConfig) -> Path:
    qa_root = cfg.output_root / "qa"
    items: list[ProactiveItem] = []
    for task in PROACTIVE_TASKS:
        path = qa_root / f"{task}.jsonl"
        if task in cfg.qa_tasks:
            items.extend(read_items(_need(path, "genqa")))  # type: ignore[arg-type]
    records = export_finetune(sorted(items, key=lambda i: i.id))
    out = cfg.output_root / "finetune" / "proactive_conversations.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True))
            f.write("\n")
    return out


# ---------------------------------------------------------------------------
# stage: stats


REFERENCE_TASK_COUNTS = {
    "GSM": 186,
    "NFI": 650,
    "OTP": 494,
    "SR": 211,
    "FAP": 921,
    "OAR": 1419,
    "OI_E": 1487,
    "OI_H": 1005,
    "GTA": 283,
    "OAA": 1865,
}
REFERENCE_TOTAL = 8521
REFERENCE_OAR_ATTRIBUTES = {"color": 65.61, "material": 19.3, "state": 5.5, "texture": 5.3, "shape": 4.1}


def stage_stats(cfg: PipelineConfig) -> Path:
    qa_root = cfg.output_root / "qa"
    counts = {}
    attr_counts: dict[str, int] = {}
    for task in sorted(cfg.qa_tasks):
        items = read_items(_need(qa_root / f"{task}.jsonl", "genqa"))
        counts[task] = len(items)
        if task == "OAR":
            for item in items:
                attr = item.metadata.get("attribute_type", "unknown")
                attr_counts[attr] = attr_counts.get(attr, 0) + 1
    durations = {}
    for video in sorted(cfg.videos, key=lambda v: v.video_id):
        durations[video.video_id] = FrameDir(video.frames).duration
    total_oar = sum(attr_counts.values())
    doc = {
        "per_task": counts,
        "total": sum(counts.values()),
        "video_durations_s": durations,
        "oar_attribute_percent": {
            k: round(100.0 * v / total_oar, 2) for k, v in sorted(attr_counts.items())
        }
        if total_oar
        else {},
        "reference": {
            "per_task": REFERENCE_TASK_COUNTS,
            "total": REFERENCE_TOTAL,
            "oar_attribute_percent": REFERENCE_OAR_ATTRIBUTES,
        },
    }
    out = cfg.output_root / "reports" / "corpus_stats.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")
    return out
