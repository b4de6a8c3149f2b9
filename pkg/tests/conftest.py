from __future__ import annotations

import subprocess
import sys
from pathlib import Path

import pytest


@pytest.fixture(scope="session")
def mini_dataset(tmp_path_factory) -> Path:
    """Generated mini-dataset with recorded oracle responses."""
    root = tmp_path_factory.mktemp("minidata")
    subprocess.run(
        [sys.executable, "-m", "gazestream.cli", "demo-data", "--root", str(root), "--seed", "1234"],
        check=True,
        capture_output=True,
    )
    return root


def run_cli(*args: str) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "gazestream.cli", *args],
        capture_output=True,
        text=True,
    )


@pytest.fixture(scope="session")
def mini_pipeline(mini_dataset: Path) -> Path:
    """Mini-dataset with the full pipeline executed once."""
    cfg = str(mini_dataset / "config.yaml")
    for cmd in ("project", "fixations", "extract-objects", "scanpath", "genqa", "evaluate", "export-finetune", "stats"):
        proc = run_cli(cmd, "-c", cfg)
        assert proc.returncode == 0, f"{cmd} failed: {proc.stderr}"
    return mini_dataset
