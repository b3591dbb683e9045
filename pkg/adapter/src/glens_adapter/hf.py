"""Transformers-backed runner capturing per-step digit scores.

Requires the hf extra (torch + transformers) and a user-supplied model.
The tokenizer must map every digit to a single token; that is checked at
construction, before any inference runs.
"""

from __future__ import annotations

from typing import Optional

from .capture import (
    GenerationTrace,
    TraceStep,
    check_digit_tokens,
    restrict_to_digits,
)
from .errors import AdapterError


class HfModelRunner:
    def __init__(
        self,
        model_id: str,
        device: Optional[str] = None,
        max_new_tokens: int = 32,
    ):
        try:
            import torch
            from transformers import AutoProcessor
        except ImportError as exc:
            raise AdapterError(
                "real-model inference needs the hf extra: "
                "pip install 'glens-adapter[hf]'"
            ) from exc

        self.torch = torch
        self.max_new_tokens = max_new_tokens
        self.processor = AutoProcessor.from_pretrained(model_id)
        self.tokenizer = getattr(self.processor, "tokenizer", self.processor)
        # refuse multi-token digits before loading weights
        self.digit_ids = check_digit_tokens(self.tokenizer)

        model = None
        errors = []
        for loader_name in (
            "AutoModelForImageTextToText",
            "AutoModelForVision2Seq",
            "AutoModelForCausalLM",
        ):
            try:
                import transformers
                loader = getattr(transformers, loader_name)
                model = loader.from_pretrained(model_id)
                break
            except Exception as exc:  # try the next loader family
                errors.append(f"{loader_name}: {exc}")
        if model is None:
            raise AdapterError(f"could not load {model_id}: {'; '.join(errors)}")

        if device is None:
            device = "cuda" if torch.cuda.is_available() else "cpu"
        self.device = device
        self.model = model.to(device).eval()

    def generate(self, task: dict) -> GenerationTrace:
        """Greedy decode one task; each step keeps its digit score row."""
        from PIL import Image

        prompt = task["prompt"]
        messages = []
        if prompt["system"]:
            messages.append({"role": "system", "content": prompt["system"]})
        messages.append({
            "role": "user",
            "content": [
                {"type": "image"},
                {"type": "text", "text": prompt["user"]},
            ],
        })
        chat_text = self.processor.apply_chat_template(
            messages, tokenize=False, add_generation_prompt=True
        )
        with Image.open(task["image_path"]) as image:
            inputs = self.processor(
                text=[chat_text], images=[image.convert("RGB")],
                return_tensors="pt",
            ).to(self.device)

        with self.torch.no_grad():
            out = self.model.generate(
                **inputs,
                do_sample=False,
                max_new_tokens=self.max_new_tokens,
                output_scores=True,
                return_dict_in_generate=True,
            )

        prompt_len = inputs["input_ids"].shape[1]
        generated = out.sequences[0][prompt_len:]
        steps = []
        for step_index, token_id in enumerate(generated.tolist()):
            token_text = self.tokenizer.decode([token_id])
            scores_row = out.scores[step_index][0].float().cpu().tolist()
            steps.append(TraceStep(
                token_text=token_text,
                digit_logits=restrict_to_digits(scores_row, self.digit_ids),
            ))
        return GenerationTrace(steps=tuple(steps))
