"""Builds a local RoBERTa-base-architecture model directory for offline tests.

The hub is unreachable in CI, so the fixture constructs a model with the
stock roberta-base geometry (hidden 768, 12 transformer layers + embedding
layer) but randomly initialized weights, plus a byte-level BPE tokenizer
trained on the test corpus, and saves both where from_pretrained can load
them. Only the geometry matters to the cache contract.
"""

import json

import pytest
import torch
from tokenizers.implementations import ByteLevelBPETokenizer
from tokenizers.processors import RobertaProcessing
from transformers import RobertaConfig, RobertaModel, RobertaTokenizerFast

TEXTS = [
    "The steak was amazing and the staff were friendly.",
    "Battery life is terrible but the screen looks great.",
    "Service was slow, food arrived cold.",
    "Lovely atmosphere downtown, drinks a bit pricey.",
    "The keyboard feels solid and the touchpad is responsive.",
]


@pytest.fixture(scope="session")
def local_model_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("roberta-local")
    bpe = ByteLevelBPETokenizer()
    bpe.train_from_iterator(TEXTS * 50, vocab_size=600, min_frequency=1,
                            special_tokens=["<s>", "<pad>", "</s>", "<unk>", "<mask>"])
    bpe._tokenizer.post_processor = RobertaProcessing(
        sep=("</s>", bpe.token_to_id("</s>")), cls=("<s>", bpe.token_to_id("<s>")))
    tokenizer = RobertaTokenizerFast(tokenizer_object=bpe._tokenizer,
                                     bos_token="<s>", eos_token="</s>",
                                     sep_token="</s>", cls_token="<s>",
                                     unk_token="<unk>", pad_token="<pad>",
                                     mask_token="<mask>")
    tokenizer.save_pretrained(d)
    config = RobertaConfig(
        vocab_size=tokenizer.vocab_size + len(tokenizer.get_added_vocab()),
        hidden_size=768, num_hidden_layers=12, num_attention_heads=12,
        intermediate_size=256, max_position_embeddings=514,
        pad_token_id=1, bos_token_id=0, eos_token_id=2,
    )
    torch.manual_seed(0)
    model = RobertaModel(config)
    model.save_pretrained(d)
    return str(d)


@pytest.fixture()
def corpus_50(tmp_path):
    path = tmp_path / "corpus.jsonl"
    with open(path, "w") as f:
        for i in range(50):
            f.write(json.dumps({"id": f"doc-{i}", "text": TEXTS[i % len(TEXTS)],
                                "rating": (i % 5) + 1}) + "\n")
    return path
