import json
import random

import numpy as np
import pytest

from gazestream.errors import DataError
from gazestream.eval import (
    LETTERS,
    ConstantAdapter,
    EvalConfig,
    RandomAdapter,
    ScriptedAdapter,
    context_window,
    parse_choice,
    parse_yes_no,
    run_mcq_eval,
    run_proactive_eval,
    sample_frames,
    window_kind,
    write_report,
)
from gazestream.media import BlankFrameSource
from gazestream.qa.items import ProactiveItem, QAItem

OPTIONS = ["cup", "knife", "pot", "pan"]


def mk_item(i=0, task="OI_E", t_q=30.0, answer_index=1):
    return QAItem(
        id=f"v-{task}-{i:04d}",
        task=task,
        video_id="v",
        t_q=t_q,
        response_window=(0.0, t_q),
        question="Which object is the user currently looking at?",
        options=list(OPTIONS),
        answer_index=answer_index,
        seed=i,
    )


class TestContextWindow:
    def test_present_clamped(self):
        assert context_window("present", 30.0, omega=60.0) == (0.0, 30.0)

    def test_present_sliding(self):
        assert context_window("present", 100.0, omega=60.0) == (40.0, 100.0)

    def test_past_full_history(self):
        assert context_window("past", 120.0) == (0.0, 120.0)

    def test_proactive_prefix(self):
        assert context_window("proactive", 45.0) == (0.0, 45.0)

    def test_task_kind_mapping(self):
        assert window_kind("NFI") == "past"
        assert window_kind("OTP") == "past"
        assert window_kind("OI_H") == "present"
        assert window_kind("FAP") == "present"
        assert window_kind("GTA") == "proactive"


class TestSampleFrames:
    def test_cap_five_ends_at_window_end(self):
        ts = sample_frames((0.0, 10.0), frame_rate=1.0, max_frames=5)
        assert len(ts) == 5 and ts[-1] == 10.0
        assert ts == [0.0, 2.5, 5.0, 7.5, 10.0]

    def test_cap_above_available_returns_all(self):
        ts = sample_frames((0.0, 3.0), frame_rate=1.0, max_frames=100)
        assert len(ts) == 4  # 0,1,2,3 seconds of footage at 1 fps

    def test_empty_window_single_frame(self):
        assert sample_frames((5.0, 5.0), 1.0, 8) == [5.0]

    def test_never_exceeds_end(self):
        for end in (1.0, 7.3, 59.9):
            for ts in sample_frames((0.0, end), 2.0, 16):
                assert ts <= end


class TestParseChoice:
    def test_answer_is_b(self):
        assert parse_choice("The answer is B", OPTIONS) == 1

    def test_letter_dot_option(self):
        assert parse_choice("C. pot", OPTIONS) == 2

    def test_two_keywords_unparsed(self):
        assert parse_choice("it could be the cup or maybe the knife", OPTIONS) is None

    def test_final_standalone_letter(self):
        assert parse_choice("Let me think...\n\nD", OPTIONS) == 3
        assert parse_choice("A, no wait: B.", OPTIONS) == 1

    def test_answer_is_with_noise(self):
        assert parse_choice("Reasoning reasoning. The answer is (A): cup.", OPTIONS) == 0

    def test_unique_keyword_fallback(self):
        assert parse_choice("I believe the user is looking at the pot right now", OPTIONS) == 2

    def test_empty_unparsed(self):
        assert parse_choice("", OPTIONS) is None
        assert parse_choice("I have no idea", OPTIONS) is None

    def test_requires_four_options(self):
        with pytest.raises(DataError):
            parse_choice("A", ["a", "b"])

    def test_total_and_deterministic(self):
        texts = ["B", "the answer is c", "D) pan", "pot", "cup knife", "zzz", "A."]
        first = [parse_choice(t, OPTIONS) for t in texts]
        second = [parse_choice(t, OPTIONS) for t in texts]
        assert first == second


class TestParseYesNo:
    def test_yes_variants(self):
        assert parse_yes_no("Yes.") is True
        assert parse_yes_no("yes, it appeared") is True

    def test_no_variants(self):
        assert parse_yes_no("no, not yet") is False
        assert parse_yes_no("No") is False

    def test_unparsed(self):
        assert parse_yes_no("maybe") is None
        assert parse_yes_no("") is None

    def test_unique_inner_token(self):
        assert parse_yes_no("I would say yes at this point") is True
        # a leading token wins outright; ambiguity only matters without one
        assert parse_yes_no("yes... or no?") is True
        assert parse_yes_no("it could be yes, could be no") is None


class TestRunMcq:
    def make_corpus(self, n=40):
        return [mk_item(i, task="OI_E" if i % 2 else "NFI", answer_index=i % 4) for i in range(n)]

    def test_always_correct_adapter(self):
        items = self.make_corpus()
        table = {it.id: f"The answer is {LETTERS[it.answer_index]}" for it in items}
        results, audit = run_mcq_eval(items, ScriptedAdapter(table), BlankFrameSource(), EvalConfig(max_frames=2))
        for res in results.values():
            assert res.accuracy == 1.0 and res.unparsed == 0
        assert len(audit) == len(items)

    def test_unparsed_counts_incorrect(self):
        items = self.make_corpus(10)
        results, _ = run_mcq_eval(items, ConstantAdapter("mumble"), BlankFrameSource(), EvalConfig(max_frames=2))
        for res in results.values():
            assert res.unparsed == res.total
            assert res.accuracy == 0.0
            assert res.correct + res.incorrect + res.unparsed == res.total

    def test_random_adapter_near_quarter(self):
        items = [mk_item(i, answer_index=i % 4) for i in range(2000)]
        results, _ = run_mcq_eval(items, RandomAdapter(seed=3), BlankFrameSource(), EvalConfig(max_frames=1))
        acc = results["OI_E"].accuracy
        assert abs(acc - 0.25) < 0.05

    def test_causality_assertion(self, monkeypatch):
        import gazestream.eval as ev

        monkeypatch.setattr(ev, "sample_frames", lambda w, r, m: [w[1] + 5.0])
        with pytest.raises(AssertionError, match="exceeds window end"):
            run_mcq_eval([mk_item()], ConstantAdapter("A"), BlankFrameSource(), EvalConfig(max_frames=2))

    def test_jobs_parallel_deterministic(self):
        items = self.make_corpus(30)
        r1, a1 = run_mcq_eval(items, RandomAdapter(7), BlankFrameSource(), EvalConfig(max_frames=1), jobs=4)
        r2, a2 = run_mcq_eval(items, RandomAdapter(7), BlankFrameSource(), EvalConfig(max_frames=1), jobs=1)
        assert a1 == a2
        assert {k: v.as_dict() for k, v in r1.items()} == {k: v.as_dict() for k, v in r2.items()}


def mk_proactive(checkpoints, i=0):
    return ProactiveItem(
        id=f"v-GTA-{i:04d}",
        task="GTA",
        video_id="v",
        target_identity="cup",
        question="Is the cup currently within the user's fixation region? Answer Yes or No.",
        checkpoints=checkpoints,
        seed=i,
    )


class TestRunProactive:
    def test_always_no(self):
        items = [mk_proactive([(10.0, False), (20.0, True), (30.0, True)])]
        results, _ = run_proactive_eval(items, ConstantAdapter("No"), BlankFrameSource(), EvalConfig(max_frames=1))
        res = results["GTA"]
        assert res.type1_rate == 0.0 and res.type2_rate == 1.0

    def test_always_yes(self):
        items = [mk_proactive([(10.0, False), (20.0, True), (30.0, True)])]
        results, _ = run_proactive_eval(items, ConstantAdapter("Yes"), BlankFrameSource(), EvalConfig(max_frames=1))
        res = results["GTA"]
        assert res.type1_rate == 1.0 and res.type2_rate == 0.0

    def test_hand_confusion_matrix(self):
        # checkpoints: labels F,T,F,T,T,F ; scripted answers Y,Y,N,N,Y,Y
        # -> FP at 0 and 5 (2 of 3 negatives), FN at 3 (1 of 3 positives),
        # correct: 1,2,4 -> accuracy 0.5, type1 2/3, type2 1/3
        item = mk_proactive(
            [(1.0, False), (2.0, True), (3.0, False), (4.0, True), (5.0, True), (6.0, False)]
        )
        answers = {f"{item.id}@{k}/yn": a for k, a in enumerate(["Yes", "Yes", "No", "No", "Yes", "Yes"])}
        results, audit = run_proactive_eval(
            [item], ScriptedAdapter(answers), BlankFrameSource(), EvalConfig(max_frames=1)
        )
        res = results["GTA"]
        assert res.total == 6 and res.correct == 3
        assert res.accuracy == 0.5
        assert abs(res.type1_rate - 2 / 3) < 1e-12
        assert abs(res.type2_rate - 1 / 3) < 1e-12
        # metrics identity: errors decompose over the confusion matrix
        assert res.false_positives + res.false_negatives == res.total - res.correct

    def test_unparsed_is_no(self):
        items = [mk_proactive([(10.0, True)])]
        results, _ = run_proactive_eval(items, ConstantAdapter("hmm"), BlankFrameSource(), EvalConfig(max_frames=1))
        assert results["GTA"].type2_rate == 1.0


class TestReport:
    def test_byte_reproducible(self, tmp_path):
        items = [mk_item(i, answer_index=i % 4) for i in range(20)]
        out = []
        for k in range(2):
            res, audit = run_mcq_eval(items, RandomAdapter(1), BlankFrameSource(), EvalConfig(max_frames=1))
            p = tmp_path / f"r{k}.json"
            a = tmp_path / f"a{k}.jsonl"
            write_report(res, {}, p, audit, a)
            out.append((p.read_bytes(), a.read_bytes()))
        assert out[0] == out[1]

    def test_report_shape(self, tmp_path):
        res, audit = run_mcq_eval([mk_item()], ConstantAdapter("B"), BlankFrameSource(), EvalConfig(max_frames=1))
        p = tmp_path / "r.json"
        write_report(res, {}, p)
        doc = json.loads(p.read_text())
        assert "tasks" in doc and "OI_E" in doc["tasks"]
        assert doc["tasks"]["OI_E"]["accuracy"] == 1.0


class TestVisualMode:
    def test_preamble_loaded(self):
        cfg = EvalConfig(prompting_mode="visual-gaze")
        assert cfg.instruction_preamble.startswith("The user's gaze center is indicated by a green dot.")

    def test_text_mode_adds_coordinates(self):
        class Capture:
            last = ""

            def answer(self, question, frames, aux):
                Capture.last = question
                return "A"

        class GazeSource(BlankFrameSource):
            def gaze_at(self, video_id, ts):
                return (123.0, 45.0)

        run_mcq_eval([mk_item()], Capture(), GazeSource(), EvalConfig(max_frames=1, prompting_mode="text-gaze"))
        assert "(123, 45)" in Capture.last

    def test_bad_mode_rejected(self):
        with pytest.raises(DataError):
            EvalConfig(prompting_mode="telepathy")
