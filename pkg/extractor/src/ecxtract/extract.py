"""Run a corpus through a pretrained transformer and dump all-layer,
per-word hidden states to an ECX file.

Words are whitespace tokens of the input corpus; the model tokenizer may
split them into subwords, which are combined back per word (arithmetic
mean by default, or first subword). Layer 0 of the output is the
embedding layer; the remaining layers are the encoder outputs in order.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

from .ecxwriter import write_ecx

log = logging.getLogger("ecxtract")

AGGREGATIONS = ("average", "first")


@dataclass
class ExtractionConfig:
    model: str  # model id or local path
    corpus: Path
    out: Path
    aggregation: str = "average"
    device: str = "cpu"
    batch_size: int = 8
    max_length: int = 512

    def __post_init__(self) -> None:
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"aggregation must be one of {AGGREGATIONS}")


@dataclass
class ExtractionResult:
    ecx_path: Path
    manifest_path: Path
    num_records: int
    num_layers: int
    dim: int
    skipped: int = 0


def read_sentences(path: Path) -> list[list[str]]:
    sentences = []
    for line in path.read_text(encoding="utf-8").splitlines():
        tokens = line.split()
        if tokens:
            sentences.append(tokens)
    return sentences


@dataclass
class _VocabBuilder:
    words: list[str] = field(default_factory=list)
    ids: dict[str, int] = field(default_factory=dict)

    def id_of(self, word: str) -> int:
        wid = self.ids.get(word)
        if wid is None:
            wid = len(self.words)
            self.ids[word] = wid
            self.words.append(word)
        return wid


def extract(cfg: ExtractionConfig) -> ExtractionResult:
    tokenizer = AutoTokenizer.from_pretrained(cfg.model)
    if not tokenizer.is_fast:
        raise RuntimeError("a fast tokenizer is required for word alignment")
    model = AutoModel.from_pretrained(cfg.model, output_hidden_states=True)
    model.to(cfg.device)
    model.eval()

    sentences = read_sentences(cfg.corpus)
    vocab = _VocabBuilder()
    records: list[tuple[int, int, int, np.ndarray]] = []
    skipped = 0
    num_layers = None
    dim = None

    with torch.no_grad():
        for start in range(0, len(sentences), cfg.batch_size):
            batch = sentences[start : start + cfg.batch_size]
            enc = tokenizer(
                batch,
                is_split_into_words=True,
                padding=True,
                truncation=True,
                max_length=cfg.max_length,
                return_tensors="pt",
            ).to(cfg.device)
            out = model(**enc)
            # tuple of (L+1) tensors, embedding layer first
            hidden = torch.stack(out.hidden_states, dim=0).cpu().numpy()
            num_layers = hidden.shape[0]
            dim = hidden.shape[-1]
            for b, words in enumerate(batch):
                sid = start + b
                word_ids = enc.word_ids(batch_index=b)
                positions: dict[int, list[int]] = {}
                for tok_idx, wi in enumerate(word_ids):
                    if wi is not None:
                        positions.setdefault(wi, []).append(tok_idx)
                for pos, word in enumerate(words):
                    toks = positions.get(pos)
                    if not toks:
                        skipped += 1
                        log.warning(
                            "skipping word %r at sentence %d position %d: "
                            "no subword tokens (truncation?)", word, sid, pos
                        )
                        continue
                    sub = hidden[:, b, toks, :]  # (L+1, n_subwords, D)
                    if cfg.aggregation == "average":
                        vec = sub.mean(axis=1)
                    else:
                        vec = sub[:, 0, :]
                    records.append(
                        (vocab.id_of(word), sid, pos, vec.astype(np.float32))
                    )

    if not records:
        raise RuntimeError("no records extracted: corpus empty or fully skipped")
    write_ecx(cfg.out, num_layers, dim, vocab.words, records)

    manifest_path = Path(f"{cfg.out}.manifest.json")
    manifest = {
        "model": str(cfg.model),
        "aggregation": cfg.aggregation,
        "tokenizer_class": type(tokenizer).__name__,
        "num_layers": num_layers,
        "hidden_size": dim,
        "num_records": len(records),
        "skipped_words": skipped,
        "sentences": len(sentences),
        "max_length": cfg.max_length,
    }
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return ExtractionResult(
        ecx_path=Path(cfg.out),
        manifest_path=manifest_path,
        num_records=len(records),
        num_layers=num_layers,
        dim=dim,
        skipped=skipped,
    )
