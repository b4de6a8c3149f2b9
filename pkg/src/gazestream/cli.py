"""Command-line interface for the full pipeline.

Stages, in order: project -> fixations -> extract-objects -> scanpath ->
genqa -> evaluate / export-finetune / stats; serve-annotation runs the
human verification service; demo-data writes the bundled synthetic
mini-dataset (including recorded oracle responses) so everything runs
offline.

Exit codes: 0 success, 1 usage error, 2 data error, 3 oracle/transport
error.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import pipeline
from .config import load_config
from .errors import DataError, TransportError


@click.group()
def cli():
    """Gaze-to-streaming-QA toolkit."""


def _cfg(config_path: str):
    return load_config(Path(config_path))


config_opt = click.option("--config", "-c", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))


@cli.command()
@config_opt
def project(config_path):
    """Align gaze with frames and project rays to the image plane."""
    for path in pipeline.stage_project(_cfg(config_path)):
        click.echo(f"wrote {path}")


@cli.command()
@config_opt
def fixations(config_path):
    """Extract scene-consistent fixations from trajectories."""
    for path in pipeline.stage_fixations(_cfg(config_path)):
        click.echo(f"wrote {path}")


@cli.command("extract-objects")
@config_opt
def extract_objects(config_path):
    """Query the oracle for FOV / out-of-FOV objects per fixation."""
    for path in pipeline.stage_extract(_cfg(config_path)):
        click.echo(f"wrote {path}")


@cli.command()
@config_opt
@click.option("--records", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Verification log to apply; omitted means no human decisions yet.")
def scanpath(config_path, records):
    """Assemble (verified) scanpaths from fixations and extractions."""
    for path in pipeline.stage_scanpath(_cfg(config_path), Path(records) if records else None):
        click.echo(f"wrote {path}")


@cli.command()
@config_opt
def genqa(config_path):
    """Generate all enabled QA task files from verified scanpaths."""
    for task, path in sorted(pipeline.stage_genqa(_cfg(config_path)).items()):
        click.echo(f"{task}: {path}")


@cli.command()
@config_opt
@click.option("--task", "tasks", multiple=True, help="Restrict evaluation to these tasks.")
@click.option("--mode", default=None, help="Override prompting mode (none|text-gaze|visual-gaze).")
@click.option("--omega", default=None, type=float, help="Override the present-window length in seconds.")
@click.option("--max-frames", default=None, type=int, help="Override the frame cap per request.")
@click.option("--jobs", default=None, type=int, help="Concurrent adapter calls.")
@click.option("--seed", default=None, type=int, help="Override the adapter seed.")
def evaluate(config_path, tasks, mode, omega, max_frames, jobs, seed):
    """Run the configured adapter under the streaming protocol."""
    cfg = _cfg(config_path)
    if mode is not None:
        cfg.eval_prompting_mode = mode
    if omega is not None:
        cfg.eval_omega = omega
    if max_frames is not None:
        cfg.eval_max_frames = max_frames
    if jobs is not None:
        cfg.jobs = jobs
    if seed is not None:
        cfg.eval_seed = seed
    report = pipeline.stage_evaluate(cfg, list(tasks) or None)
    click.echo(f"wrote {report}")


@cli.command("export-finetune")
@config_opt
def export_finetune(config_path):
    """Export proactive items as fine-tuning conversation records."""
    click.echo(f"wrote {pipeline.stage_export_finetune(_cfg(config_path))}")


@cli.command()
@config_opt
def stats(config_path):
    """Corpus statistics: per-task counts, totals, video lengths."""
    cfg = _cfg(config_path)
    out = pipeline.stage_stats(cfg)
    import json

    with open(out) as f:
        doc = json.load(f)
    for task, count in sorted(doc["per_task"].items()):
        click.echo(f"{task:6s} {count:6d}")
    click.echo(f"total  {doc['total']:6d}")
    click.echo(f"wrote {out}")


@cli.command("serve-annotation")
@config_opt
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8321, type=int)
@click.option("--ui-dist", type=click.Path(exists=True, file_okay=False), default=None,
              help="Built frontend to serve at /.")
def serve_annotation(config_path, host, port, ui_dist):
    """Serve the human verification API (and optionally the web UI)."""
    import uvicorn

    from .annotation import DecisionStore, create_app
    from .scanpath import load as load_scanpath

    cfg = _cfg(config_path)
    scanpaths = {}
    source_of = {}
    for video in cfg.videos:
        spath = cfg.output_root / "scanpaths" / f"{video.video_id}.json"
        if not spath.exists():
            raise DataError(f"missing {spath}; run the `scanpath` command first")
        scanpaths[video.video_id] = load_scanpath(spath)
        source_of[video.video_id] = video.source
    store = DecisionStore(cfg.output_root / "annotations" / "records.jsonl", scanpaths)
    app = create_app(
        scanpaths,
        store,
        media_root=cfg.output_root / "media",
        source_of=source_of,
        ui_dist=Path(ui_dist) if ui_dist else None,
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")


@cli.command("demo-data")
@click.option("--root", required=True, type=click.Path(file_okay=False))
@click.option("--seed", default=1234, type=int)
def demo_data(root, seed):
    """Generate the synthetic mini-dataset and record oracle responses."""
    from .oracle import MockOracle, RecordingOracle
    from .synthetic import SceneOracle, generate

    root = Path(root)
    generate(root, seed=seed)
    click.echo(f"dataset written to {root}")

    # Record every oracle interaction the pipeline will make, so the real
    # runs talk only to the digest-keyed mock table.
    cfg = load_config(root / "config.yaml")
    recorder = RecordingOracle(
        inner=SceneOracle(root / "scene_manifest.json"),
        table=MockOracle(root / "oracle_canned", strict=True),
    )
    pipeline.stage_project(cfg)
    pipeline.stage_fixations(cfg)
    pipeline.stage_extract(cfg, endpoint=recorder)
    pipeline.stage_scanpath(cfg)
    pipeline.stage_genqa(cfg, endpoint=recorder)
    # recording runs leave artifacts behind; the real pipeline rewrites
    # them from scratch so reruns stay byte-identical
    import shutil

    shutil.rmtree(cfg.output_root, ignore_errors=True)
    click.echo(f"oracle responses recorded in {root / 'oracle_canned'}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except TransportError as exc:
        click.echo(f"transport error: {exc}", err=True)
        return 3
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
