"""Per-head activation capture from decoder embedding models.

For each input text, the tap records the attention-head outputs of one
decoder block at the last valid token, before the block's output
projection mixes them, plus the model's usual last-token embedding from
the final hidden state. Capture uses forward hooks on the attention output
projection, so no model surgery is needed: the projection's input is the
concatenation of all head outputs, reshaped to (heads, head_dim).

The same forward pass also records the projection's output, allowing a
consistency check: applying the projection weight to the captured heads
must reproduce the observed attention output.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import torch


class ExtractionError(Exception):
    pass


@dataclass(frozen=True)
class TapConfig:
    """What to capture and how to batch.

    `layer_index` picks the decoder block to tap; -1 means the last one.
    `capture_point` is fixed: head outputs are taken before the output
    projection.
    """

    model_id: str
    layer_index: int = -1
    capture_point: str = "pre-output-projection"
    batch_size: int = 8
    max_length: int = 512
    device: str | None = None

    def __post_init__(self) -> None:
        if self.capture_point != "pre-output-projection":
            raise ExtractionError(
                f"unsupported capture point {self.capture_point!r}"
            )
        if self.batch_size < 1 or self.max_length < 1:
            raise ExtractionError("batch_size and max_length must be >= 1")


@dataclass
class ModelBundle:
    """A loaded tokenizer/model pair; inject directly in tests."""

    tokenizer: object
    model: torch.nn.Module


@dataclass
class ExtractionResult:
    """Per-text (heads, standard) vectors plus capture diagnostics."""

    pairs: list[tuple[np.ndarray, np.ndarray]]  # ((h, d_head), (d_full,))
    h: int
    d_head: int
    d_full: int
    layer_index: int
    consistency_error: float = 0.0
    truncated: list[int] = field(default_factory=list)


def load_model(config: TapConfig) -> ModelBundle:
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(config.model_id)
        model = AutoModel.from_pretrained(config.model_id)
    except Exception as exc:
        raise ExtractionError(f"cannot load model {config.model_id!r}: {exc}") from exc
    model.eval()
    if config.device:
        model.to(config.device)
    return ModelBundle(tokenizer, model)


def _decoder_layers(model: torch.nn.Module):
    for holder in (model, getattr(model, "model", None)):
        layers = getattr(holder, "layers", None)
        if layers is not None:
            return layers
    raise ExtractionError(
        f"model {type(model).__name__} does not expose decoder layers; "
        "expected a Llama/Mistral-style architecture"
    )


def _resolve_layer(model: torch.nn.Module, layer_index: int):
    layers = _decoder_layers(model)
    index = layer_index if layer_index >= 0 else len(layers) + layer_index
    if not 0 <= index < len(layers):
        raise ExtractionError(
            f"layer index {layer_index} out of range for {len(layers)} decoder blocks"
        )
    attention = getattr(layers[index], "self_attn", None)
    projection = getattr(attention, "o_proj", None)
    if projection is None:
        raise ExtractionError(
            "tapped block has no attention output projection (self_attn.o_proj)"
        )
    return index, projection


def _last_token_indices(attention_mask: torch.Tensor) -> torch.Tensor:
    # Right padding: last valid token is mask.sum() - 1. With left padding
    # (or no padding) the final position is valid for every row.
    if bool(attention_mask[:, -1].all()):
        return torch.full(
            (attention_mask.shape[0],), attention_mask.shape[1] - 1, dtype=torch.long
        )
    return attention_mask.sum(dim=1) - 1


def extract(
    texts: list[str],
    config: TapConfig,
    bundle: ModelBundle | None = None,
) -> ExtractionResult:
    """Capture per-head and standard embeddings for every text, in order."""
    if not texts:
        raise ExtractionError("no texts to extract")
    if bundle is None:
        bundle = load_model(config)
    tokenizer, model = bundle.tokenizer, bundle.model

    heads = model.config.num_attention_heads
    hidden = model.config.hidden_size
    if hidden % heads != 0:
        raise ExtractionError(f"hidden size {hidden} not divisible by {heads} heads")
    d_head = hidden // heads
    layer_index, projection = _resolve_layer(model, config.layer_index)

    captured: dict[str, torch.Tensor] = {}

    def grab_input(_module, args, _kwargs):
        captured["pre"] = args[0].detach()

    def grab_output(_module, _args, _kwargs, output):
        captured["post"] = output.detach()

    handles = [
        projection.register_forward_pre_hook(grab_input, with_kwargs=True),
        projection.register_forward_hook(grab_output, with_kwargs=True),
    ]

    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    truncated: list[int] = []
    worst_consistency = 0.0
    try:
        for start in range(0, len(texts), config.batch_size):
            batch = texts[start : start + config.batch_size]
            lengths = [
                len(ids) for ids in tokenizer(batch, truncation=False)["input_ids"]
            ]
            encoded = tokenizer(
                batch,
                return_tensors="pt",
                padding=True,
                truncation=True,
                max_length=config.max_length,
            )
            if config.device:
                encoded = {k: v.to(config.device) for k, v in encoded.items()}
            for offset, full_len in enumerate(lengths):
                if full_len > config.max_length:
                    truncated.append(start + offset)
                    warnings.warn(
                        f"text {start + offset} truncated from {full_len} to "
                        f"{config.max_length} tokens"
                    )
            with torch.no_grad():
                outputs = model(**encoded)
                pre, post = captured["pre"], captured["post"]
                reconstructed = torch.nn.functional.linear(
                    pre, projection.weight, projection.bias
                )
                scale = post.abs().max()
                if scale > 0:
                    worst_consistency = max(
                        worst_consistency,
                        float((reconstructed - post).abs().max() / scale),
                    )
            rows = _last_token_indices(encoded["attention_mask"])
            batch_idx = torch.arange(len(batch))
            head_block = pre[batch_idx, rows].reshape(len(batch), heads, d_head)
            standard = outputs.last_hidden_state[batch_idx, rows]
            for b in range(len(batch)):
                pairs.append(
                    (
                        head_block[b].to(torch.float32).cpu().numpy(),
                        standard[b].to(torch.float32).cpu().numpy(),
                    )
                )
    finally:
        for handle in handles:
            handle.remove()

    return ExtractionResult(
        pairs=pairs,
        h=heads,
        d_head=d_head,
        d_full=hidden,
        layer_index=layer_index,
        consistency_error=worst_consistency,
        truncated=truncated,
    )


def extract_query(
    texts: list[str],
    config: TapConfig,
    prompt_wrapper: str | Callable[[str], str] = "{text}",
    bundle: ModelBundle | None = None,
) -> ExtractionResult:
    """Like `extract`, with the model's query prompt template applied first.

    `prompt_wrapper` is either a format string containing `{text}` or a
    callable; the identity wrapper reproduces `extract` exactly.
    """
    if callable(prompt_wrapper):
        wrapped = [prompt_wrapper(t) for t in texts]
    else:
        if "{text}" not in prompt_wrapper:
            raise ExtractionError("prompt wrapper must contain '{text}'")
        wrapped = [prompt_wrapper.format(text=t) for t in texts]
    return extract(wrapped, config, bundle=bundle)
