"""Procedural mini-dataset: two short synthetic videos with gaze traces.

Video "kitchen" ships image-plane gaze (the passthrough ingest path);
video "bench" ships 3D gaze rays plus camera poses and intrinsics (the
projection path). Frames are crops of a larger object canvas whose
viewport jumps between chapters, which yields changing out-of-FOV sets, a
deliberate mid-fixation scene cut, and enough object traffic for every QA
task. Everything derives from one seed, so regeneration is byte-identical.

The SceneOracle answers extraction prompts by actually inspecting the
request images (objects are color-coded), making the recorded canned
responses consistent with whatever the pipeline asks.
"""

from __future__ import annotations

import csv
import json
import random
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .errors import DataError, OracleResponseError
from .media import imwrite_rgb
from .oracle import OracleEndpoint

FPS = 5.0
GAZE_HZ = 10.0
VIEW_W, VIEW_H = 320, 240
CANVAS_W, CANVAS_H = 640, 480
BACKGROUND = (204, 204, 204)
DURATION_S = 90.0
SCREEN = "@screen"  # fixation target pinned to a viewport position


@dataclass(frozen=True)
class SceneObject:
    name: str
    color: tuple[int, int, int]
    color_name: str
    material: str
    rect: tuple[int, int, int, int]  # canvas x, y, w, h

    @property
    def center(self) -> tuple[float, float]:
        x, y, w, h = self.rect
        return (x + w / 2.0, y + h / 2.0)


# Layouts are chosen so every fixated object's center is inside its
# chapter's viewport, "never fixated" objects stay clear of all FOV disks
# (radius ~53 px), and at least one perifoveal neighbor shares a disk.
KITCHEN_OBJECTS = [
    SceneObject("cutting board", (153, 102, 51), "brown", "wood", (40, 60, 110, 70)),
    SceneObject("knife", (90, 90, 110), "grey", "steel", (200, 40, 90, 26)),
    SceneObject("tomato", (220, 40, 60), "red", "organic matter", (110, 180, 48, 48)),
    SceneObject("cup", (40, 90, 220), "blue", "ceramic", (260, 150, 44, 56)),
    SceneObject("salt shaker", (160, 60, 200), "purple", "glass", (30, 170, 26, 40)),
    SceneObject("kettle", (240, 210, 60), "yellow", "metal", (400, 140, 80, 90)),
    SceneObject("pepper mill", (20, 160, 170), "teal", "ceramic", (470, 200, 20, 28)),
    SceneObject("plate", (245, 245, 245), "white", "porcelain", (330, 260, 70, 20)),
    SceneObject("pan", (30, 30, 30), "black", "cast iron", (430, 260, 90, 60)),
    SceneObject("sponge", (60, 200, 90), "green", "foam", (360, 380, 56, 36)),
    SceneObject("bottle", (120, 40, 160), "violet", "glass", (560, 300, 40, 90)),
    SceneObject("table", (230, 170, 120), "beige", "laminate", (20, 440, 600, 38)),
]

BENCH_OBJECTS = [
    SceneObject("screwdriver", (200, 120, 40), "orange", "plastic", (60, 80, 100, 24)),
    SceneObject("circuit board", (30, 140, 60), "green", "fiberglass", (190, 60, 110, 80)),
    SceneObject("wrench", (90, 90, 120), "grey", "steel", (80, 180, 90, 22)),
    SceneObject("gauge", (210, 170, 40), "amber", "brass", (250, 200, 40, 40)),
    SceneObject("multimeter", (220, 200, 40), "yellow", "plastic", (370, 100, 70, 100)),
    SceneObject("clamp", (130, 60, 30), "rust", "iron", (480, 100, 36, 50)),
    SceneObject("soldering iron", (120, 120, 130), "silver", "metal", (450, 220, 100, 22)),
    SceneObject("tape roll", (40, 80, 210), "blue", "vinyl", (340, 320, 52, 52)),
    SceneObject("pliers", (180, 40, 90), "maroon", "steel", (450, 300, 90, 30)),
    SceneObject("battery", (90, 200, 200), "teal", "alloy", (560, 360, 40, 70)),
    SceneObject("label maker", (235, 235, 90), "cream", "plastic", (310, 400, 56, 28)),
    SceneObject("workbench", (150, 150, 100), "olive", "plywood", (10, 440, 620, 36)),
]


# chapter schedule: (start_s, viewport x, viewport y)
KITCHEN_CHAPTERS = [(0.0, 0, 0), (30.0, 200, 100), (60.0, 320, 240)]
BENCH_CHAPTERS = [(0.0, 20, 40), (36.0, 220, 60), (66.0, 300, 200)]

# per-chapter background tint (simulated exposure/lighting shift) so a cut
# lands far below the scene-consistency threshold while frames within one
# chapter stay pixel-identical
CHAPTER_TINTS = [(216, 200, 182), (183, 198, 214), (190, 214, 186)]

# fixation plan: (t0, t1, target); SCREEN targets pin a viewport pixel so
# a chapter cut lands mid-fixation and the scene filter drops it
KITCHEN_FIXATIONS = [
    (2.0, 5.0, "cutting board"),
    (6.5, 9.5, "knife"),
    (11.0, 14.0, "tomato"),
    (16.0, 19.0, "cutting board"),
    (21.0, 24.5, "cup"),
    (28.5, 31.5, (SCREEN, 240.0, 85.0)),  # spans the 30 s cut onto the kettle
    (33.0, 36.5, "kettle"),
    (38.0, 41.0, "cup"),
    (43.0, 46.0, "pan"),
    (48.0, 51.5, "kettle"),
    (53.5, 56.5, "pan"),
    (62.0, 65.0, "pan"),
    (67.0, 70.0, "sponge"),
    (72.0, 75.5, "bottle"),
    (78.0, 81.0, "sponge"),
    (84.0, 87.0, "bottle"),
]

BENCH_FIXATIONS = [
    (2.0, 5.5, "screwdriver"),
    (7.0, 10.0, "circuit board"),
    (12.0, 15.0, "wrench"),
    (17.0, 20.5, "circuit board"),
    (23.0, 26.0, "screwdriver"),
    (28.5, 31.5, "wrench"),
    (34.5, 37.5, (SCREEN, 185.0, 90.0)),  # spans the 36 s cut onto the multimeter
    (39.0, 42.0, "multimeter"),
    (44.0, 47.0, "soldering iron"),
    (49.0, 52.0, "circuit board"),
    (54.0, 57.0, "multimeter"),
    (59.0, 62.0, "soldering iron"),
    (68.0, 71.0, "tape roll"),
    (73.0, 76.0, "pliers"),
    (78.0, 81.0, "battery"),
    (83.0, 86.0, "pliers"),
    (87.0, 89.5, "battery"),
]

KITCHEN_ACTIONS = [
    (4.0, "place the cutting board"),
    (9.5, "pick up the knife"),
    (14.5, "slice the tomato"),
    (19.5, "wipe the board"),
    (25.0, "fill the cup"),
    (33.5, "switch on the kettle"),
    (42.0, "pour hot water"),
    (47.0, "heat the pan"),
    (52.5, "scrub with the sponge"),
    (58.0, "open the bottle"),
    (71.0, "rinse the sponge"),
    (77.0, "season the pan"),
    (83.0, "stir the sauce"),
    (89.0, "taste the dish"),
]

BENCH_ACTIONS = [
    (4.5, "pick up the screwdriver"),
    (11.0, "inspect the circuit board"),
    (16.0, "loosen a bolt with the wrench"),
    (21.5, "tighten a screw"),
    (27.0, "flip the board over"),
    (33.0, "set the wrench down"),
    (40.5, "probe with the multimeter"),
    (48.0, "heat the soldering iron"),
    (53.0, "solder a joint"),
    (58.0, "read the voltage"),
    (64.0, "tin the iron tip"),
    (72.0, "tear a piece of tape"),
    (77.0, "bend a wire with the pliers"),
    (82.0, "swap the battery"),
    (87.5, "clip the leads"),
]

BENCH_FX = 280.0
BENCH_CX, BENCH_CY = VIEW_W / 2.0, VIEW_H / 2.0
BENCH_DEPTH = 2.0


def render_canvas(objects: list[SceneObject]) -> np.ndarray:
    canvas = np.zeros((CANVAS_H, CANVAS_W, 3), dtype=np.uint8)
    canvas[:, :] = BACKGROUND
    for obj in objects:
        x, y, w, h = obj.rect
        canvas[y : y + h, x : x + w] = obj.color
    return canvas


def _viewport_at(chapters, t: float) -> tuple[int, int]:
    vx, vy = chapters[0][1], chapters[0][2]
    for start, x, y in chapters:
        if t >= start:
            vx, vy = x, y
    return vx, vy


def _target_at(fixations, t: float):
    for t0, t1, target in fixations:
        if t0 <= t <= t1:
            return target
    return None


def _gaze_plan(objects, chapters, fixations, rng: random.Random):
    """Viewport-space gaze samples at GAZE_HZ: jittered dwells on targets,
    occasional one-sample flicks, a one-sample blink every ~7.7 s, and
    wandering saccades between fixations."""
    by_name = {o.name: o for o in objects}
    n = int(DURATION_S * GAZE_HZ) + 1
    samples = []
    wander = (VIEW_W / 2.0, VIEW_H / 2.0)
    for k in range(n):
        t = k / GAZE_HZ
        vx, vy = _viewport_at(chapters, t)
        target = _target_at(fixations, t)
        if target is not None:
            if isinstance(target, tuple):
                px, py = target[1], target[2]
            else:
                cx, cy = by_name[target].center
                px, py = cx - vx, cy - vy
            px += rng.gauss(0, 1.5)
            py += rng.gauss(0, 1.5)
            if rng.random() < 0.01:  # transient flick
                px += rng.choice([-1, 1]) * rng.uniform(40, 70)
                py += rng.choice([-1, 1]) * rng.uniform(40, 70)
        else:
            if rng.random() < 0.5:
                wander = (rng.uniform(30, VIEW_W - 30), rng.uniform(30, VIEW_H - 30))
            px, py = wander[0] + rng.gauss(0, 18), wander[1] + rng.gauss(0, 18)
        valid = k % 77 != 40
        samples.append((t, px, py, valid))
    return samples


def _chapter_index(chapters, t: float) -> int:
    idx = 0
    for k, (start, _, _) in enumerate(chapters):
        if t >= start:
            idx = k
    return idx


def _render_frames(objects, chapters, out_dir: Path) -> int:
    canvas = render_canvas(objects)
    bg = np.all(canvas == np.array(BACKGROUND, dtype=np.uint8), axis=-1)
    n = int(DURATION_S * FPS) + 1
    for i in range(n):
        t = i / FPS
        vx, vy = _viewport_at(chapters, t)
        frame = canvas[vy : vy + VIEW_H, vx : vx + VIEW_W].copy()
        tint = CHAPTER_TINTS[_chapter_index(chapters, t) % len(CHAPTER_TINTS)]
        frame[bg[vy : vy + VIEW_H, vx : vx + VIEW_W]] = tint
        imwrite_rgb(out_dir / f"frame_{i:05d}.png", frame)
    with open(out_dir / "meta.yaml", "w") as f:
        yaml.safe_dump({"fps": FPS, "n_frames": n, "width": VIEW_W, "height": VIEW_H}, f, sort_keys=True)
    return n


def _write_actions(actions, path: Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["timestamp", "description"])
        for t, desc in actions:
            w.writerow([f"{t:.2f}", desc])


def _write_kitchen(root: Path, rng: random.Random) -> None:
    vdir = root / "kitchen"
    _render_frames(KITCHEN_OBJECTS, KITCHEN_CHAPTERS, vdir / "frames")
    samples = _gaze_plan(KITCHEN_OBJECTS, KITCHEN_CHAPTERS, KITCHEN_FIXATIONS, rng)
    with open(vdir / "gaze_2d.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["timestamp_s", "x_px", "y_px", "valid"])
        for t, x, y, valid in samples:
            w.writerow([f"{t:.3f}", f"{x:.3f}", f"{y:.3f}", int(valid)])
    _write_actions(KITCHEN_ACTIONS, vdir / "actions.csv")


def _write_bench(root: Path, rng: random.Random) -> None:
    """3D variant: the camera strafes between chapters; frames stay exact
    canvas crops because the object plane is fronto-parallel at fixed
    depth and the canvas is scaled one-pixel-to-one-pixel."""
    vdir = root / "bench"
    _render_frames(BENCH_OBJECTS, BENCH_CHAPTERS, vdir / "frames")

    def tx_at(t: float) -> float:
        vx, _ = _viewport_at(BENCH_CHAPTERS, t)
        # viewport x = canvas_w/2 - cx + tx*fx/depth
        return (vx - (CANVAS_W / 2.0 - BENCH_CX)) * BENCH_DEPTH / BENCH_FX

    def ty_at(t: float) -> float:
        _, vy = _viewport_at(BENCH_CHAPTERS, t)
        return (vy - (CANVAS_H / 2.0 - BENCH_CY)) * BENCH_DEPTH / BENCH_FX

    with open(vdir / "intrinsics.yaml", "w") as f:
        yaml.safe_dump(
            {"fx": BENCH_FX, "fy": BENCH_FX, "cx": BENCH_CX, "cy": BENCH_CY, "width": VIEW_W, "height": VIEW_H},
            f,
            sort_keys=True,
        )
    n_frames = int(DURATION_S * FPS) + 1
    with open(vdir / "poses.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["timestamp_s"] + [f"m{i}{j}" for i in range(4) for j in range(4)])
        for i in range(n_frames):
            t = i / FPS
            m = np.eye(4)
            m[0, 3] = tx_at(t)
            m[1, 3] = ty_at(t)
            w.writerow([f"{t:.3f}"] + [f"{v:.8f}" for v in m.ravel()])

    # rays start at the camera center, so the projected pixel equals the
    # planned viewport gaze point no matter the d_eye setting
    samples = _gaze_plan(BENCH_OBJECTS, BENCH_CHAPTERS, BENCH_FIXATIONS, rng)
    with open(vdir / "gaze_rays.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["timestamp_s", "ox", "oy", "oz", "dx", "dy", "dz", "valid"])
        for t, px, py, valid in samples:
            tx, ty = tx_at(t), ty_at(t)
            d = np.array([(px - BENCH_CX) / BENCH_FX, (py - BENCH_CY) / BENCH_FX, 1.0])
            d /= np.linalg.norm(d)
            w.writerow(
                [f"{t:.3f}", f"{tx:.8f}", f"{ty:.8f}", "0.0", f"{d[0]:.8f}", f"{d[1]:.8f}", f"{d[2]:.8f}", int(valid)]
            )
    _write_actions(BENCH_ACTIONS, vdir / "actions.csv")


def _write_manifest(root: Path) -> None:
    doc = {
        "videos": {
            "kitchen": {
                "objects": [
                    {"name": o.name, "color": list(o.color), "color_name": o.color_name, "material": o.material}
                    for o in KITCHEN_OBJECTS
                ]
            },
            "bench": {
                "objects": [
                    {"name": o.name, "color": list(o.color), "color_name": o.color_name, "material": o.material}
                    for o in BENCH_OBJECTS
                ]
            },
        },
        "background": list(BACKGROUND),
    }
    with open(root / "scene_manifest.json", "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")


CONFIG_TEMPLATE = """\
# Synthetic mini-dataset pipeline configuration.
dataset_root: .
output_root: ./out
d_eye: 1.0
r_deg: 15.0
frames_per_fixation: 4
jobs: 1
videos:
  - video_id: kitchen
    frames: kitchen/frames
    gaze_mode: "2d"
    gaze: kitchen/gaze_2d.csv
    actions: kitchen/actions.csv
    source: synthetic-kitchen
  - video_id: bench
    frames: bench/frames
    gaze_mode: rays
    gaze: bench/gaze_rays.csv
    poses: bench/poses.csv
    intrinsics: bench/intrinsics.yaml
    actions: bench/actions.csv
    source: synthetic-bench
fixation:
  r_thresh: 0.055
  tau_dur: 1.0
  interruption_max: 0.45
  tau_scene: 0.9
  scene_samples: 8
extraction_oracle:
  kind: mock
  mock_dir: oracle_canned
filtering_oracle:
  kind: mock
  mock_dir: oracle_canned
qa:
  seed: 7
  fap_steps: 3
  proactive_offsets: [-20, -10, 0, 10, 20]
  static_denylist: [table, workbench]
eval:
  omega: 60
  frame_rate: 1
  max_frames: 8
  prompting_mode: visual-gaze
  adapter: random
  seed: 11
"""


def generate(root: Path, seed: int = 1234) -> None:
    """Write the full mini-dataset (frames, gaze, poses, actions, config)."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    _write_kitchen(root, random.Random(seed))
    _write_bench(root, random.Random(seed + 1))
    _write_manifest(root)
    (root / "config.yaml").write_text(CONFIG_TEMPLATE)


# ---------------------------------------------------------------------------
# scene oracle


class SceneOracle(OracleEndpoint):
    """Deterministic offline oracle that reads the color-coded images.

    FOV requests: the object color around the prompt's quoted coordinate
    names the gazed object; every other object color visible in the patch
    becomes an "other" object. Out-of-FOV requests list object colors
    visible outside the black disk. Attribute requests are grounded in the
    manifest; verification requests always pass.
    """

    def __init__(self, manifest_path: Path):
        with open(manifest_path) as f:
            doc = json.load(f)
        self.objects: list[dict] = []
        for video in sorted(doc["videos"]):
            for o in doc["videos"][video]["objects"]:
                if not any(x["name"] == o["name"] for x in self.objects):
                    self.objects.append(o)
        self.background = tuple(doc["background"])

    def _visible(self, image: np.ndarray, min_pixels: int = 60) -> list[dict]:
        out = []
        for o in self.objects:
            mask = np.all(image == np.array(o["color"], dtype=np.uint8), axis=-1)
            if int(mask.sum()) >= min_pixels:
                out.append(o)
        return out

    def _object_at(self, image: np.ndarray, x: float, y: float, radius: int = 8) -> dict | None:
        h, w = image.shape[:2]
        xi, yi = int(round(x)), int(round(y))
        x0, x1 = max(0, xi - radius), min(w, xi + radius + 1)
        y0, y1 = max(0, yi - radius), min(h, yi + radius + 1)
        region = image[y0:y1, x0:x1]
        best, best_count = None, 0
        for o in self.objects:
            count = int(np.all(region == np.array(o["color"], dtype=np.uint8), axis=-1).sum())
            if count > best_count:
                best, best_count = o, count
        return best

    @staticmethod
    def _record(o: dict) -> dict:
        return {
            "object_identity": o["name"],
            "detailed_caption": (
                f"A {o['color_name']} {o['name']} made of {o['material']}. "
                f"It stands out clearly against the grey surface."
            ),
        }

    def complete(self, images: list[np.ndarray], prompt: str) -> str:
        if '"gaze_object"' in prompt:
            if not images:
                raise OracleResponseError("FOV request carries no images")
            m = re.search(r"at coordinate \((-?\d+), (-?\d+)\)", prompt)
            if not m:
                raise OracleResponseError("FOV prompt carries no coordinate")
            img = images[0]
            gazed = self._object_at(img, float(m.group(1)), float(m.group(2)))
            visible = self._visible(img)
            if gazed is None and visible:
                # gaze on featureless background: name the dominant object,
                # like a real model pressed for an answer would
                gazed = max(
                    visible,
                    key=lambda o: int(np.all(img == np.array(o["color"], dtype=np.uint8), axis=-1).sum()),
                )
            if gazed is None:
                raise OracleResponseError("no object visible in the FOV patch")
            others = [o for o in visible if o["name"] != gazed["name"]]
            doc = {
                "scene_caption": "A grey work surface with several color-coded items laid out.",
                "gaze_object": self._record(gazed),
                "other_objects": [self._record(o) for o in others],
            }
            return json.dumps(doc, indent=1, sort_keys=True)
        if "Focus only on objects OUTSIDE the black masked region" in prompt:
            if not images:
                raise OracleResponseError("out-of-FOV request carries no images")
            visible = self._visible(images[0])
            doc = {"other_objects": [self._record(o) for o in visible]}
            return json.dumps(doc, indent=1, sort_keys=True)
        if '"attribute_type"' in prompt:
            m = re.search(r"^Object: (.+)$", prompt, re.MULTILINE)
            name = m.group(1).strip() if m else ""
            obj = next((o for o in self.objects if o["name"] == name), None)
            if obj is None:
                raise OracleResponseError(f"attribute request for unknown object {name!r}")
            colors = [
                "brown", "grey", "red", "blue", "yellow", "black", "green", "purple",
                "orange", "maroon", "teal", "beige", "olive", "white", "violet",
                "amber", "rust", "silver", "cream",
            ]
            distractors = [c for c in colors if c != obj["color_name"]][:3]
            doc = {"attribute_type": "color", "answer": obj["color_name"], "distractors": distractors}
            return json.dumps(doc, indent=1, sort_keys=True)
        if "Check this multiple-choice attribute question" in prompt:
            return "yes"
        raise OracleResponseError(f"scene oracle cannot serve this prompt: {prompt[:60]!r}")


def raise_if_missing(path: Path) -> Path:
    if not Path(path).exists():
        raise DataError(f"missing mini-dataset artifact {path}; run the demo-data command first")
    return Path(path)
