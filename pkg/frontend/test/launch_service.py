"""Start a real annotation service on a scratch store for integration tests.

Usage: python test/launch_service.py <port>
"""

import sys
import tempfile
from pathlib import Path

import uvicorn

from gazestream.annotation import DecisionStore, create_app
from gazestream.fixation import Fixation
from gazestream.oracle import ObjectRecord
from gazestream.scanpath import Scanpath, ScanpathEntry


def entry(i, gazed, others, outs):
    return ScanpathEntry(
        fixation=Fixation(i, 100.0, 100.0, i * 6.0, i * 6.0 + 3, i * 30, i * 30 + 15),
        fov_objects=[ObjectRecord(gazed, f"a {gazed} on the counter", "fov-gazed", i)]
        + [ObjectRecord(o, f"a {o} nearby", "fov-other", i) for o in others],
        out_objects=[ObjectRecord(o, f"a {o} in the background", "out-of-fov", i) for o in outs],
    )


def main():
    port = int(sys.argv[1])
    scanpath = Scanpath(
        video_id="vid",
        entries=[
            entry(0, "cup", ["knife"], ["pan", "jar"]),
            entry(1, "kettle", [], ["pan"]),
        ],
    )
    store = DecisionStore(Path(tempfile.mkdtemp()) / "records.jsonl", {"vid": scanpath})
    app = create_app({"vid": scanpath}, store, source_of={"vid": "integration"})
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="error")


if __name__ == "__main__":
    main()
