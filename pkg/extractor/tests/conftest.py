import pytest
import torch
from tokenizers import Tokenizer, models, pre_tokenizers
from transformers import MistralConfig, MistralModel, PreTrainedTokenizerFast

from mhrag_extractor import ModelBundle

WORDS = (
    "the a an old new bright dark sword star tree rock ship game story "
    "question about tells wanders mentions battle mineral creature breed "
    "instrument language style laureate meme wreck element cake track art"
).split()


def tiny_tokenizer() -> PreTrainedTokenizerFast:
    vocab = {"<unk>": 0, "<pad>": 1}
    for word in WORDS:
        vocab[word] = len(vocab)
    tok = Tokenizer(models.WordLevel(vocab, unk_token="<unk>"))
    tok.pre_tokenizer = pre_tokenizers.Whitespace()
    return PreTrainedTokenizerFast(
        tokenizer_object=tok, unk_token="<unk>", pad_token="<pad>"
    )


def tiny_model(seed: int = 0) -> MistralModel:
    config = MistralConfig(
        hidden_size=64,
        intermediate_size=128,
        num_hidden_layers=3,
        num_attention_heads=4,
        num_key_value_heads=2,
        vocab_size=64,
        max_position_embeddings=128,
    )
    torch.manual_seed(seed)
    model = MistralModel(config)
    model.eval()
    return model


@pytest.fixture(scope="session")
def bundle() -> ModelBundle:
    return ModelBundle(tiny_tokenizer(), tiny_model())
