#!/usr/bin/env python3
"""Writes tests/fixtures/tiny_bert: a randomly initialised BERT small enough to
commit, plus golden outputs computed with Hugging Face transformers.

The C++ tokenizers and the transformer backend are checked against these
files, so they must be produced by the reference implementation and never by
the code under test.

    python3 tools/make_tiny_bert_fixture.py tests/fixtures/tiny_bert
"""
import json
import pathlib
import sys

import torch
from transformers import BertConfig, BertModel, BertTokenizer
from transformers.models.bert.tokenization_bert_legacy import BasicTokenizer

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
WORDS = [
    "the", "a", "of", "to", "and", "in", "is", "news", "virus", "corona",
    "##virus", "vaccine", "drink", "bleach", "kill", "can", "not", "claim",
    "false", "true", "hospital", "##s", "prepare", "##ing", "for", "million",
    "infect", "##ion", "coconut", "oil", "destroy", "cafe", "new", "crown",
    "un", "##know", "##n", "report", "##ed", "96", "u", "s",
    ".", ",", "!", "?", "'", "-", "(", ")", ":",
    "新", "冠", "病", "毒", "疫", "苗", "假", "新闻",
]
SENTENCES = [
    "Drinking bleach can NOT kill the coronavirus!",
    "U.S. hospitals preparing for 96 million infections.",
    "Coconut oil destroys the new crown virus, the report claimed.",
    "Café news: vaccine (unknown) report.",
    "新冠病毒疫苗是假新闻",
    "  tabs\tand\nnewlines   mixed  ",
]
HASH_BUCKETS = 1 << 20
HASH_FIRST_ID = 1000


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def main(out_dir: str) -> None:
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    vocab = SPECIALS + WORDS
    (out / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")

    torch.manual_seed(20211207)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=16,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=32,
        max_position_embeddings=64,
        type_vocab_size=2,
        hidden_act="gelu",
    )
    model = BertModel(config, add_pooling_layer=False)
    # Random init leaves LayerNorm at identity and biases at zero; perturb
    # them so the loader is checked on every tensor.
    with torch.no_grad():
        for name, param in model.named_parameters():
            if "LayerNorm" in name or name.endswith("bias"):
                param.add_(0.1 * torch.randn_like(param))
    model.eval()
    model.save_pretrained(out, safe_serialization=True)

    tokenizer = BertTokenizer(str(out / "vocab.txt"), do_lower_case=True)
    basic = BasicTokenizer(do_lower_case=True)
    golden = {"wordpiece": [], "hashword": [], "encodings": []}
    for text in SENTENCES:
        ids = tokenizer.encode(text, add_special_tokens=False)
        golden["wordpiece"].append({"text": text, "ids": ids})
        words = basic.tokenize(text)
        hashed = [HASH_FIRST_ID + fnv1a64(w.encode("utf-8")) % HASH_BUCKETS for w in words]
        golden["hashword"].append({"text": text, "words": words, "ids": hashed})

        full = [tokenizer.cls_token_id] + ids + [tokenizer.sep_token_id]
        with torch.no_grad():
            states = model(torch.tensor([full])).last_hidden_state[0].double()
        golden["encodings"].append({
            "text": text,
            "ids": ids,
            "cls": states[0].tolist(),
            "mean": states.mean(dim=0).tolist(),
        })

    (out / "golden.json").write_text(json.dumps(golden, indent=1, ensure_ascii=False) + "\n",
                                     encoding="utf-8")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/tiny_bert")
