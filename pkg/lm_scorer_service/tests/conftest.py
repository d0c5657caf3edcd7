"""Fixtures: a tiny word-level causal LM trained from scratch, and a live
service instance wrapped around it.

No pretrained weights are downloaded; the model is small enough to train
in seconds yet learns the training sentences well enough for relative
judgments (e.g. which word follows "the capital of france is").
"""

import sys
import threading
import time
from pathlib import Path

import pytest
import torch
import uvicorn
from tokenizers import Tokenizer, models, normalizers, pre_tokenizers
from transformers import GPT2Config, GPT2LMHeadModel, PreTrainedTokenizerFast

from lm_scorer_service import ModelScorer, create_app

# the primary package ships a reusable black-box conformance suite for
# this wire protocol; make it importable from its tests directory
sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "tests"))

SENTENCES = [
    "the capital of france is paris",
    "paris is the capital of france",
    "the capital of italy is rome",
    "i ate a banana and an apple for breakfast",
    "a banana is a yellow fruit",
    "the quick brown fox jumped over the lazy dog",
    "she walked to the market to buy fruit",
]


def _build_tokenizer(vocab_words):
    vocab = {"[UNK]": 0, "[EOS]": 1}
    for word in sorted(vocab_words):
        vocab.setdefault(word, len(vocab))
    tok = Tokenizer(models.WordLevel(vocab, unk_token="[UNK]"))
    tok.normalizer = normalizers.Lowercase()
    tok.pre_tokenizer = pre_tokenizers.Whitespace()
    return PreTrainedTokenizerFast(
        tokenizer_object=tok,
        unk_token="[UNK]",
        eos_token="[EOS]",
        bos_token="[EOS]",
        clean_up_tokenization_spaces=False,
    )


def _train_model(tokenizer):
    torch.manual_seed(0)
    config = GPT2Config(
        vocab_size=tokenizer.vocab_size,
        n_positions=64,
        n_embd=32,
        n_layer=2,
        n_head=2,
        bos_token_id=tokenizer.bos_token_id,
        eos_token_id=tokenizer.eos_token_id,
    )
    model = GPT2LMHeadModel(config)
    eos = tokenizer.eos_token_id
    # one row per sentence, each starting at position 0 (the layout scoring
    # uses), padded with EOS and padding masked out of the loss
    encoded = [tokenizer.encode(s, add_special_tokens=False) + [eos]
               for s in SENTENCES]
    width = max(len(row) for row in encoded)
    ids = torch.full((len(encoded), width), eos)
    labels = torch.full((len(encoded), width), -100)
    for i, row in enumerate(encoded):
        ids[i, :len(row)] = torch.tensor(row)
        labels[i, :len(row)] = torch.tensor(row)
    optimizer = torch.optim.Adam(model.parameters(), lr=5e-3)
    model.train()
    for _ in range(400):
        loss = model(ids, labels=labels).loss
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    model.eval()
    return model


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory):
    words = {w for s in SENTENCES for w in s.split()}
    tokenizer = _build_tokenizer(words)
    model = _train_model(tokenizer)
    path = tmp_path_factory.mktemp("tiny-causal-lm")
    tokenizer.save_pretrained(path)
    model.save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def scorer(model_dir):
    return ModelScorer(model_dir, max_total_tokens=1024)


@pytest.fixture(scope="session")
def service_url(scorer):
    config = uvicorn.Config(create_app(scorer), host="127.0.0.1", port=0,
                            log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("service failed to start")
        time.sleep(0.05)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)
