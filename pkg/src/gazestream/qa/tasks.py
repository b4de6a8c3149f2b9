"""The eight multiple-choice task generators.

Every generator is pure given (scanpath, seed): randomness flows from a
per-item seed derived from (video id, task, anchor index). Items that
cannot be formed (thin pools, unshufflable sequences, oracle rejections)
are skipped with a structured reason instead of being forced.

Causality: option pools are restricted to scanpath entries at or before
the task-defining index, so no item leaks content from entries after its
query time beyond what the task itself predicts. metadata.allowed_entries
records the permitted range for the provenance check.
"""

from __future__ import annotations

import itertools
import random
import re

from ..errors import DataError, GazeStreamError
from ..oracle import OracleEndpoint, extract_json_object
from ..scanpath import (
    Scanpath,
    background_pool,
    first_new_object,
    fixated_pool,
    gazed_pool,
    global_pool,
)
from .items import ActionAnnotation, QAItem, Skip, assemble_options, item_seed
from .templates import ATTRIBUTE_QUESTIONS, DEFAULT_TEMPLATES

ATTRIBUTE_TYPES = ("color", "material", "shape", "texture", "size", "state")

GenResult = tuple[list[QAItem], list[Skip]]


def _require_verified(s: Scanpath) -> None:
    if not s.verified:
        raise DataError(f"scanpath {s.video_id} is not verified; run verification first")


def _template(templates: dict | None, key: str) -> str:
    return (templates or {}).get(key, DEFAULT_TEMPLATES[key])


def _mk_item(s, task, anchor, t_q, window, question, answer, distractors, seed, extra=None) -> QAItem:
    rng = random.Random(seed)
    options, answer_index = assemble_options(answer, distractors, rng)
    meta = {"anchor": anchor}
    meta.update(extra or {})
    return QAItem(
        id=f"{s.video_id}-{task}-{anchor:04d}",
        task=task,
        video_id=s.video_id,
        t_q=t_q,
        response_window=window,
        question=question,
        options=options,
        answer_index=answer_index,
        seed=seed,
        metadata=meta,
    )


def gen_nfi(s: Scanpath, base_seed: int, templates: dict | None = None) -> GenResult:
    """Never-fixated object identification; one item per video.

    Query time is the end of the fixation that accumulates the third
    unique gazed identity. The answer comes from objects visible in the
    prefix but never inside the FOV; distractors from the prefix FOV pool.
    """
    _require_verified(s)
    anchor = None
    for i in range(len(s.entries)):
        if len(gazed_pool(s, i)) >= 3:
            anchor = i
            break
    if anchor is None:
        return [], [Skip(s.video_id, "NFI", -1, "fewer than 3 unique gazed identities in video")]
    seed = item_seed(base_seed, s.video_id, "NFI", anchor)
    rng = random.Random(seed)
    answer_pool = sorted(never_fixated_prefix(s, anchor))
    if not answer_pool:
        return [], [Skip(s.video_id, "NFI", anchor, "every visible object was fixated")]
    distractor_pool = sorted(fixated_pool(s, anchor))
    if len(distractor_pool) < 3:
        return [], [Skip(s.video_id, "NFI", anchor, "fewer than 3 fixated distractor candidates")]
    answer = rng.choice(answer_pool)
    distractors = rng.sample(distractor_pool, 3)
    # response window: span of the distractors' FOV visibility, padded 2 s
    starts, ends = [], []
    for j, e in enumerate(s.entries[: anchor + 1]):
        if set(distractors) & set(e.fov_identities()):
            starts.append(e.fixation.t_start)
            ends.append(e.fixation.t_end)
    window = (max(0.0, min(starts) - 2.0), max(ends) + 2.0)
    t_q = s.entries[anchor].fixation.t_end
    item = _mk_item(
        s, "NFI", anchor, t_q, window, _template(templates, "NFI"), answer, distractors, seed,
        extra={"allowed_entries": [0, anchor]},
    )
    return [item], []


def never_fixated_prefix(s: Scanpath, upto: int) -> set[str]:
    return global_pool(s, upto) - fixated_pool(s, upto)


def gen_otp(s: Scanpath, base_seed: int, templates: dict | None = None) -> GenResult:
    """Object transition prediction over consecutive fixation pairs."""
    _require_verified(s)
    items, skips = [], []
    for i in range(len(s.entries) - 1):
        answer = first_new_object(s, i)
        if answer is None:
            skips.append(Skip(s.video_id, "OTP", i, "no newly attended object in next fixation"))
            continue
        seed = item_seed(base_seed, s.video_id, "OTP", i)
        rng = random.Random(seed)
        pool = sorted(global_pool(s, i + 1) - set(s.entries[i].fov_identities()) - {answer})
        if len(pool) < 3:
            skips.append(Skip(s.video_id, "OTP", i, "fewer than 3 distractor candidates"))
            continue
        distractors = rng.sample(pool, 3)
        t_q = s.entries[i].fixation.t_start
        window = (max(0.0, s.entries[i].fixation.t_start - 2.0), s.entries[i + 1].fixation.t_end + 2.0)
        question = _template(templates, "OTP").format(current=s.entries[i].gazed.identity)
        items.append(
            _mk_item(s, "OTP", i, t_q, window, question, answer, distractors, seed,
                     extra={"allowed_entries": [0, i + 1]})
        )
    return items, skips


def _arrow(groups: list[str]) -> str:
    return " → ".join(groups)


def _positional_overlap(a: list[str], b: list[str]) -> int:
    return sum(1 for x, y in zip(a, b) if x == y)


def gen_gsm(s: Scanpath, base_seed: int, templates: dict | None = None) -> GenResult:
    """Gaze sequence matching over consecutive fixation triplets.

    One distractor is a shuffle of the true groups, two are random
    transition-shaped triplets from the video's gazed pool; any distractor
    sharing more than 50% of segment positions with the truth is rejected.
    """
    _require_verified(s)
    items, skips = [], []
    for i in range(len(s.entries) - 2):
        groups = [s.entries[i + k].gazed.identity for k in range(3)]
        correct = _arrow(groups)
        if len(set(groups)) == 1:
            skips.append(Skip(s.video_id, "GSM", i, "identical groups cannot be shuffled"))
            continue
        seed = item_seed(base_seed, s.video_id, "GSM", i)
        rng = random.Random(seed)

        shuffles = []
        seen = set()
        for perm in itertools.permutations(groups):
            cand = list(perm)
            key = tuple(cand)
            if key in seen or cand == groups:
                continue
            seen.add(key)
            if _positional_overlap(cand, groups) <= 1:  # >50% overlap rejected
                shuffles.append(cand)
        if not shuffles:
            skips.append(Skip(s.video_id, "GSM", i, "no valid shuffle below the overlap limit"))
            continue
        shuffle_opt = _arrow(rng.choice(sorted(shuffles)))

        pool = sorted(gazed_pool(s, i + 2))
        randoms: list[str] = []
        attempts = 0
        while len(randoms) < 2 and attempts < 200:
            attempts += 1
            cand = [rng.choice(pool)]
            while len(cand) < 3:
                nxt = rng.choice(pool)
                if nxt != cand[-1]:  # transitions change objects
                    cand.append(nxt)
            if cand == groups or _positional_overlap(cand, groups) > 1:
                continue
            text = _arrow(cand)
            if text in (correct, shuffle_opt) or text in randoms:
                continue
            randoms.append(text)
        if len(randoms) < 2:
            skips.append(Skip(s.video_id, "GSM", i, "could not sample enough random triplets"))
            continue

        t_q = s.entries[i + 2].fixation.t_end
        window = (s.entries[i].fixation.t_start, s.entries[i + 2].fixation.t_end)
        items.append(
            _mk_item(s, "GSM", i, t_q, window, _template(templates, "GSM"), correct,
                     [shuffle_opt] + randoms, seed, extra={"allowed_entries": [0, i + 2]})
        )
    return items, skips


def gen_sr(s: Scanpath, base_seed: int, templates: dict | None = None) -> GenResult:
    """Scene recall: a background object seen earlier but not visible now.

    The answer must appear in some earlier out-of-FOV set, be absent from
    the current one, and never have been fixated up to the anchor.
    """
    _require_verified(s)
    items, skips = [], []
    for i in range(len(s.entries)):
        seed = item_seed(base_seed, s.video_id, "SR", i)
        rng = random.Random(seed)
        current_out = set(s.entries[i].out_identities())
        earlier = background_pool(s, i - 1) if i > 0 else set()
        candidates = sorted(earlier - current_out - fixated_pool(s, i))
        if not candidates:
            skips.append(Skip(s.video_id, "SR", i, "no earlier-visible never-fixated background object"))
            continue
        if len(current_out) < 3:
            skips.append(Skip(s.video_id, "SR", i, "fewer than 3 current background distractors"))
            continue
        answer = rng.choice(candidates)
        distractors = rng.sample(sorted(current_out), 3)
        t_q = s.entries[i].fixation.t_start
        window = (s.entries[i].fixation.t_start, s.entries[i].fixation.t_end)
        question = _template(templates, "SR").format(current=s.entries[i].gazed.identity)
        items.append(
            _mk_item(s, "SR", i, t_q, window, question, answer, distractors, seed,
                     extra={"allowed_entries": [0, i]})
        )
    return items, skips


def gen_oi(s: Scanpath, mode: str, base_seed: int, templates: dict | None = None) -> GenResult:
    """Object identification, easy (video-wide pools) or hard (same-frame
    out-of-FOV pools)."""
    _require_verified(s)
    if mode not in ("easy", "hard"):
        raise DataError(f"OI mode must be easy or hard, got {mode!r}")
    task = "OI_E" if mode == "easy" else "OI_H"
    items, skips = [], []
    for i, entry in enumerate(s.entries):
        answer = entry.gazed.identity
        seed = item_seed(base_seed, s.video_id, task, i)
        rng = random.Random(seed)
        if mode == "easy":
            pool = sorted(global_pool(s, i) - {answer} - set(entry.fov_identities()))
        else:
            pool = sorted(set(entry.out_identities()) - {answer})
        if len(pool) < 3:
            skips.append(Skip(s.video_id, task, i, "fewer distractors than required"))
            continue
        distractors = rng.sample(pool, 3)
        t_q = entry.fixation.t_start
        window = (entry.fixation.t_start, entry.fixation.t_end)
        items.append(
            _mk_item(s, task, i, t_q, window, _template(templates, "OI"), answer, distractors, seed,
                     extra={"allowed_entries": [0, i]})
        )
    return items, skips


_WS = re.compile(r"\s+")
_PUNCT = re.compile(r"[^\w\s]")


def normalize_text(text: str) -> str:
    """Near-duplicate key: lowercase, strip punctuation, collapse spaces."""
    return _WS.sub(" ", _PUNCT.sub("", text.lower())).strip()


def gen_fap(
    s: Scanpath,
    actions: list[ActionAnnotation],
    base_seed: int,
    templates: dict | None = None,
    steps: int = 3,
    margin: tuple[float, float] = (3.0, 60.0),
) -> GenResult:
    """Future action prediction from the recent fixation sequence.

    The answer is the earliest action landing between margin[0] and
    margin[1] seconds after the fixation sequence ends; distractors are
    other actions of the same video with near-duplicates removed.
    """
    _require_verified(s)
    items, skips = [], []
    for i in range(steps - 1, len(s.entries)):
        seq_end = s.entries[i].fixation.t_end
        eligible = [a for a in actions if margin[0] <= a.timestamp - seq_end <= margin[1]]
        if not eligible:
            skips.append(Skip(s.video_id, "FAP", i, f"no action within [{margin[0]}, {margin[1]}] s of sequence end"))
            continue
        answer_action = min(eligible, key=lambda a: a.timestamp)
        seed = item_seed(base_seed, s.video_id, "FAP", i)
        rng = random.Random(seed)
        ans_key = normalize_text(answer_action.description)
        candidates = []
        seen = {ans_key}
        for a in actions:
            key = normalize_text(a.description)
            if key not in seen:
                seen.add(key)
                candidates.append(a.description)
        if len(candidates) < 3:
            skips.append(Skip(s.video_id, "FAP", i, "fewer than 3 distinct distractor actions"))
            continue
        distractors = rng.sample(sorted(candidates), 3)
        t_q = seq_end
        window = (max(0.0, answer_action.timestamp - 2.0), answer_action.timestamp)
        items.append(
            _mk_item(s, "FAP", i, t_q, window, _template(templates, "FAP"),
                     answer_action.description, distractors, seed,
                     extra={"allowed_entries": [i - steps + 1, i], "answer_time": answer_action.timestamp})
        )
    return items, skips


def gen_oar(
    s: Scanpath,
    endpoint: OracleEndpoint,
    base_seed: int,
    templates: dict | None = None,
    verify: bool = True,
) -> GenResult:
    """Object attribute recognition, oracle-assisted.

    The oracle picks an attribute type from the fixed dictionary, grounds
    a correct value in the gazed object's caption, and proposes three
    distractors; a second oracle pass rejects ambiguous option sets.
    """
    from ..oracle import load_prompt

    _require_verified(s)
    request_tpl = load_prompt("oar_request.txt")
    verify_tpl = load_prompt("oar_verify.txt")
    items, skips = [], []
    for i, entry in enumerate(s.entries):
        seed = item_seed(base_seed, s.video_id, "OAR", i)
        prompt = request_tpl.replace("{caption}", entry.gazed.caption).replace("{identity}", entry.gazed.identity)
        try:
            raw = endpoint.complete([], prompt)
            doc, _ = extract_json_object(raw)
            attr = str(doc["attribute_type"]).strip().lower()
            answer = str(doc["answer"]).strip()
            distractors = [str(d).strip() for d in doc["distractors"]]
        except (GazeStreamError, KeyError, TypeError) as exc:
            skips.append(Skip(s.video_id, "OAR", i, f"oracle response unusable: {exc}"))
            continue
        if attr not in ATTRIBUTE_TYPES:
            skips.append(Skip(s.video_id, "OAR", i, f"attribute type {attr!r} not in the fixed dictionary"))
            continue
        texts = [answer] + distractors
        if len(distractors) != 3 or len({normalize_text(t) for t in texts}) != 4:
            skips.append(Skip(s.video_id, "OAR", i, "distractors duplicate each other or the answer"))
            continue
        question = ATTRIBUTE_QUESTIONS[attr]
        if verify:
            vprompt = verify_tpl.replace("{question}", question).replace("{options}", ", ".join(sorted(texts)))
            try:
                verdict = endpoint.complete([], vprompt)
            except GazeStreamError as exc:
                skips.append(Skip(s.video_id, "OAR", i, f"verification pass failed: {exc}"))
                continue
            if not verdict.strip().lower().startswith("yes"):
                skips.append(Skip(s.video_id, "OAR", i, "verification pass flagged the options as ambiguous"))
                continue
        t_q = entry.fixation.t_start
        window = (entry.fixation.t_start, entry.fixation.t_end)
        items.append(
            _mk_item(s, "OAR", i, t_q, window, question, answer, distractors, seed,
                     extra={"allowed_entries": [0, i], "attribute_type": attr})
        )
    return items, skips
