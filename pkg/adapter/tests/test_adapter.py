import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from glens_adapter.capture import (
    GenerationTrace,
    TraceStep,
    capture_digit_logits,
    check_digit_tokens,
    parse_pair,
)
from glens_adapter.cli import main as adapter_main
from glens_adapter.errors import MissingKeyStep, UnparsableOutput, UnsupportedTokenizer
from glens_adapter.mock_model import DeterministicMockModel
from glens_adapter.prompts import render_prompt
from glens_adapter.runner import AdapterConfig, run_inference


def glens_cli(*argv):
    """The primary toolkit, invoked only through its command line."""
    exe = shutil.which("glens")
    cmd = [exe] if exe else [sys.executable, "-m", "glens.cli"]
    return subprocess.run(
        [*cmd, *[str(a) for a in argv]], capture_output=True, text=True
    )


def run_adapter(*argv):
    return adapter_main([str(a) for a in argv])


def read_jsonl(path):
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line]


@pytest.fixture(scope="module")
def scenes(tmp_path_factory):
    out = tmp_path_factory.mktemp("adapter") / "scenes"
    result = glens_cli("gen-scenes", "--out", out, "--count", 8, "--seed", 33,
                       "--scale-min", 0.06, "--scale-max", 0.12)
    assert result.returncode == 0, result.stderr
    return out


class TestPrompts:
    def test_showui_template(self):
        prompt = render_prompt("showui", "Click the anchor icon.")
        assert "[x, y]" in prompt["system"]
        assert prompt["user"] == "Click the anchor icon."

    def test_generic_template(self):
        prompt = render_prompt("generic", "Click the anchor icon.")
        assert prompt["system"] == ""
        assert "Description: Click the anchor icon." in prompt["user"]

    def test_unknown_template(self):
        with pytest.raises(ValueError):
            render_prompt("mystery", "x")


class TestTokenizerCheck:
    class SingleTokenDigits:
        def encode(self, text, add_special_tokens=False):
            return [100 + ord(c) for c in text]

    class SplitsDigits:
        def encode(self, text, add_special_tokens=False):
            # every digit becomes two sub-tokens
            out = []
            for c in text:
                out.extend([1, 2] if c.isdigit() else [ord(c)])
            return out

    def test_single_token_digits_accepted(self):
        ids = check_digit_tokens(self.SingleTokenDigits())
        assert len(ids) == 10
        assert ids["7"] == 100 + ord("7")

    def test_digit_splitting_tokenizer_rejected(self):
        with pytest.raises(UnsupportedTokenizer):
            check_digit_tokens(self.SplitsDigits())


class TestCapture:
    def trace_for(self, tokens, key_logits):
        steps = []
        for tok in tokens:
            logits = key_logits.get(tok)
            steps.append(TraceStep(token_text=tok, digit_logits=logits))
        return GenerationTrace(steps=tuple(steps))

    def test_multi_char_tokens_around_digits(self):
        seven = tuple(float(i == 7) for i in range(10))
        two = tuple(float(i == 2) for i in range(10))
        trace = self.trace_for(
            ["[", "0", ".", "7", "1", ",", " ", "0", ".", "2", "3", "]"],
            {"7": seven, "2": two},
        )
        x_vec, y_vec = capture_digit_logits(trace)
        assert x_vec.index(1.0) == 7
        assert y_vec.index(1.0) == 2

    def test_merged_digit_token_rejected(self):
        steps = [TraceStep("["), TraceStep("0"), TraceStep("."),
                 TraceStep("71", tuple(range(10))), TraceStep(", 0."),
                 TraceStep("2", tuple(range(10))), TraceStep("3"), TraceStep("]")]
        with pytest.raises(MissingKeyStep):
            capture_digit_logits(GenerationTrace(steps=tuple(steps)))

    def test_refusal_is_unparsable(self):
        trace = self.trace_for(list("I cannot help"), {})
        with pytest.raises(UnparsableOutput):
            capture_digit_logits(trace)

    def test_integer_pair_lacks_key_token(self):
        with pytest.raises(MissingKeyStep):
            parse_pair("[1, 2]")

    def test_parse_pair_offsets(self):
        x, y, x_off, y_off = parse_pair("[0.71, 0.23]")
        assert (x, y) == (0.71, 0.23)
        assert "[0.71, 0.23]"[x_off] == "7"
        assert "[0.71, 0.23]"[y_off] == "2"


class TestMockModel:
    def test_center_contract(self):
        model = DeterministicMockModel("center", seed=1)
        trace = model.generate({"scene_id": "s"})
        assert trace.text == "[0.500000, 0.500000]"
        x_vec, y_vec = capture_digit_logits(trace)
        assert x_vec[5] == 1.0 and sum(x_vec) == 1.0
        assert y_vec[5] == 1.0

    def test_modes_needing_manifests(self):
        with pytest.raises(ValueError):
            DeterministicMockModel("offset", seed=1, manifests=None)


class TestRunInference:
    def test_mock_output_passes_primary_validator(self, scenes, tmp_path):
        out = tmp_path / "predictions.jsonl"
        code = run_adapter("--tasks", scenes / "tasks.jsonl", "--mock", "center",
                           "--seed", 5, "--out", out)
        assert code == 0
        result = glens_cli("validate", "--in", out, "--kind", "predictions")
        assert result.returncode == 0, result.stderr
        assert "8 valid" in result.stdout

    def test_noisy_mode_validates_too(self, scenes, tmp_path):
        out = tmp_path / "noisy.jsonl"
        code = run_adapter("--tasks", scenes / "tasks.jsonl", "--mock", "noisy",
                           "--scenes", scenes, "--seed", 5, "--out", out)
        assert code == 0
        result = glens_cli("validate", "--in", out, "--kind", "predictions")
        assert result.returncode == 0, result.stderr

    def test_deterministic_bytes(self, scenes, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        run_adapter("--tasks", scenes / "tasks.jsonl", "--mock", "noisy",
                    "--scenes", scenes, "--seed", 9, "--out", a)
        run_adapter("--tasks", scenes / "tasks.jsonl", "--mock", "noisy",
                    "--scenes", scenes, "--seed", 9, "--out", b)
        assert a.read_bytes() == b.read_bytes()

    def test_offset_mode_classifies_biased_via_primary(self, scenes, tmp_path):
        preds = tmp_path / "offset.jsonl"
        code = run_adapter("--tasks", scenes / "tasks.jsonl", "--mock", "offset",
                           "--scenes", scenes, "--seed", 2, "--out", preds)
        assert code == 0
        eval_path = tmp_path / "eval.jsonl"
        result = glens_cli("classify", "--predictions", preds, "--scenes", scenes,
                           "--out", eval_path)
        assert result.returncode == 0, result.stderr
        categories = {r["category"] for r in read_jsonl(eval_path)}
        assert categories == {"biased"}

    def test_refusal_produces_failure_records(self, scenes, tmp_path):
        out = tmp_path / "refused.jsonl"
        code = run_adapter("--tasks", scenes / "tasks.jsonl", "--mock", "refuse",
                           "--seed", 1, "--out", out)
        assert code == 2  # failures recorded, batch completed
        records = read_jsonl(out)
        assert len(records) == 8
        assert all("error" in r and "pred" not in r for r in records)
        assert all("UnparsableOutput" in r["error"] for r in records)
        result = glens_cli("validate", "--in", out, "--kind", "predictions")
        assert result.returncode == 0, result.stderr

    def test_resume_skips_existing(self, scenes, tmp_path):
        # image paths in tasks are relative to the tasks file location, so
        # relocated task files need absolute paths
        tasks = [json.loads(t) for t in (scenes / "tasks.jsonl").read_text().splitlines()]
        for task in tasks:
            task["image"] = str(scenes / task["image"])

        half = tmp_path / "half.jsonl"
        half.write_text("\n".join(json.dumps(t) for t in tasks[:4]) + "\n")
        out = tmp_path / "resumable.jsonl"
        assert run_adapter("--tasks", half, "--mock", "center", "--seed", 3,
                           "--out", out) == 0
        assert len(read_jsonl(out)) == 4

        all_tasks = tmp_path / "all.jsonl"
        all_tasks.write_text("\n".join(json.dumps(t) for t in tasks) + "\n")
        code = run_adapter("--tasks", all_tasks, "--mock", "center", "--seed", 3,
                           "--out", out, "--resume")
        assert code == 0
        records = read_jsonl(out)
        assert len(records) == 8
        scene_ids = [r["scene_id"] for r in records]
        assert scene_ids == sorted(scene_ids)

    def test_resume_matches_fresh_run(self, scenes, tmp_path):
        tasks = [json.loads(t) for t in (scenes / "tasks.jsonl").read_text().splitlines()]
        for task in tasks:
            task["image"] = str(scenes / task["image"])
        all_tasks = tmp_path / "all.jsonl"
        all_tasks.write_text("\n".join(json.dumps(t) for t in tasks) + "\n")
        half = tmp_path / "half.jsonl"
        half.write_text("\n".join(json.dumps(t) for t in tasks[:4]) + "\n")

        fresh = tmp_path / "fresh.jsonl"
        run_adapter("--tasks", all_tasks, "--mock", "center", "--seed", 3,
                    "--out", fresh)
        resumed = tmp_path / "resumed.jsonl"
        run_adapter("--tasks", half, "--mock", "center", "--seed", 3, "--out", resumed)
        run_adapter("--tasks", all_tasks, "--mock", "center", "--seed", 3,
                    "--out", resumed, "--resume")
        assert resumed.read_bytes() == fresh.read_bytes()

    def test_output_sorted_by_scene_id(self, scenes, tmp_path):
        # shuffle the task order; output order must not follow it
        tasks = [json.loads(t) for t in (scenes / "tasks.jsonl").read_text().splitlines()]
        for task in tasks:
            task["image"] = str(scenes / task["image"])
        shuffled = list(reversed(tasks))
        tasks_path = tmp_path / "shuffled.jsonl"
        tasks_path.write_text("\n".join(json.dumps(t) for t in shuffled) + "\n")
        out = tmp_path / "sorted.jsonl"
        run_adapter("--tasks", tasks_path, "--mock", "center", "--seed", 1,
                    "--out", out)
        scene_ids = [r["scene_id"] for r in read_jsonl(out)]
        assert scene_ids == sorted(scene_ids)

    def test_missing_image_is_failure_record(self, scenes, tmp_path):
        task = {"scene_id": "ghost", "image": "images/ghost.png",
                "instruction": "Click the ghost icon."}
        tasks_path = tmp_path / "ghost.jsonl"
        tasks_path.write_text(json.dumps(task) + "\n")
        out = tmp_path / "ghost_out.jsonl"
        code = run_adapter("--tasks", tasks_path, "--mock", "center", "--seed", 1,
                           "--out", out)
        assert code == 2
        records = read_jsonl(out)
        assert "image not readable" in records[0]["error"]

    def test_config_rejects_model_and_mock(self, tmp_path):
        cfg = AdapterConfig(
            tasks_path="t.jsonl", output_path="o.jsonl",
            model="some/model", mock_mode="center",
        )
        from glens_adapter.errors import AdapterError
        with pytest.raises(AdapterError):
            run_inference(cfg)


@pytest.mark.skipif(
    not os.environ.get("GLENS_ADAPTER_SMOKE_MODEL"),
    reason="set GLENS_ADAPTER_SMOKE_MODEL to a local model id to run",
)
def test_real_model_smoke(scenes, tmp_path):
    out = tmp_path / "real.jsonl"
    code = run_adapter(
        "--tasks", scenes / "tasks.jsonl", "--model",
        os.environ["GLENS_ADAPTER_SMOKE_MODEL"], "--out", out,
    )
    assert code in (0, 2)
    result = glens_cli("validate", "--in", out, "--kind", "predictions")
    assert result.returncode == 0, result.stderr
