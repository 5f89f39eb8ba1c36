import random

import pytest
import torch
from tokenizers import Tokenizer
from tokenizers.models import WordPiece
from tokenizers.normalizers import BertNormalizer
from tokenizers.pre_tokenizers import BertPreTokenizer
from tokenizers.processors import BertProcessing
from transformers import BertConfig, BertModel, BertTokenizerFast

PIECES = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "the", "a", "cat", "dog", "bird", "tree", "house", "river",
    "play", "walk", "jump", "read", "sing",
    "##ing", "##er", "##ed", "##s",
    "quick", "slow", "big", "small", "red", "blue",
]

WORDS = [
    "the", "a", "cat", "dog", "bird", "tree", "house", "river",
    "playing", "walker", "jumped", "reads", "singing",
    "quick", "slow", "big", "small", "red", "blue", "plays",
]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small randomly initialized BERT with a WordPiece vocab that splits
    several corpus words into multiple subwords."""
    d = tmp_path_factory.mktemp("tinybert")
    vocab = {piece: i for i, piece in enumerate(PIECES)}
    tok = Tokenizer(WordPiece(vocab, unk_token="[UNK]"))
    tok.normalizer = BertNormalizer(lowercase=True)
    tok.pre_tokenizer = BertPreTokenizer()
    tok.post_processor = BertProcessing(
        ("[SEP]", vocab["[SEP]"]), ("[CLS]", vocab["[CLS]"])
    )
    tok.save(str(d / "tokenizer.json"))
    tokenizer = BertTokenizerFast(
        tokenizer_file=str(d / "tokenizer.json"),
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )
    config = BertConfig(
        vocab_size=len(PIECES),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    torch.manual_seed(0)
    model = BertModel(config)
    model.save_pretrained(d)
    tokenizer.save_pretrained(d)
    return d


@pytest.fixture(scope="session")
def corpus_file(tmp_path_factory):
    rng = random.Random(1)
    d = tmp_path_factory.mktemp("corpus")
    path = d / "corpus.txt"
    lines = [
        " ".join(rng.choice(WORDS) for _ in range(rng.randint(3, 8)))
        for _ in range(100)
    ]
    path.write_text("\n".join(lines) + "\n")
    return path
