"""Synthetic benchmark generator with exact ground truth.

Plants Gaussian blobs (one per cluster, per layer) plus annotation files
whose label mixtures are realized exactly, and writes a sidecar JSON with
the alignment fractions and minimal-N composition histogram the pipeline
must recover. Every word type is unique to its occurrence, so the planted
contextual labels fully determine both answers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ecx import EmbeddingDataset, EmbeddingRecord, write_dataset
from .errors import DataError

SCHEME_NAME = "SYN"


@dataclass
class PlantedCluster:
    size: int
    sigma: float = 0.05
    # fractions per auto-named label of the planted contextual scheme
    mixture: list[float] = field(default_factory=lambda: [1.0])

    def __post_init__(self) -> None:
        if self.size < 1:
            raise DataError("cluster size must be >= 1")
        if self.sigma < 0:
            raise DataError("sigma must be >= 0")
        if abs(sum(self.mixture) - 1.0) > 1e-9:
            raise DataError("mixture fractions must sum to 1")


@dataclass
class SynthSpec:
    layers: int
    dim: int
    clusters: list[PlantedCluster]
    seed: int = 0
    theta: float = 0.9
    sentence_len: int = 10

    @classmethod
    def standard(
        cls,
        layers: int = 3,
        dim: int = 16,
        n_clusters: int = 20,
        cluster_size: int = 15,
        sigma: float = 0.05,
        seed: int = 0,
        pure_frac: float = 0.3,
        two_frac: float = 0.4,
    ) -> "SynthSpec":
        """Mix of pure, two-label and three-label clusters.

        Two-label clusters split 0.5/0.45/0.05-style so they fail single
        alignment at theta=0.9 but have a minimal explanation of size 2;
        three-label clusters need exactly 3.
        """
        n_pure = round(n_clusters * pure_frac)
        n_two = round(n_clusters * two_frac)
        clusters = []
        for g in range(n_clusters):
            if g < n_pure:
                mixture = [1.0]
            elif g < n_pure + n_two:
                mixture = [0.5, 0.45, 0.05]
            else:
                mixture = [0.4, 0.3, 0.25, 0.05]
            clusters.append(PlantedCluster(cluster_size, sigma, mixture))
        return cls(layers=layers, dim=dim, clusters=clusters, seed=seed)


def largest_remainder_counts(fractions: list[float], total: int) -> list[int]:
    """Integer counts summing to total, closest to fractions * total."""
    raw = [f * total for f in fractions]
    counts = [math.floor(r) for r in raw]
    short = total - sum(counts)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


def minimal_n(fractions_counts: list[int], total: int, theta: float) -> int:
    """Smallest number of labels covering >= theta of the cluster.

    Labels partition the cluster, so the best size-N cover is the N largest
    label counts.
    """
    need = theta * total
    running = 0
    for n, cnt in enumerate(sorted(fractions_counts, reverse=True), start=1):
        running += cnt
        if running >= need:
            return n
    return len(fractions_counts)


def _separated_centers(rng: np.ndarray, count: int, dim: int, min_sep: float) -> np.ndarray:
    """Rejection-sample centers with pairwise distance >= min_sep."""
    scale = min_sep * max(2.0, count ** (1.0 / min(dim, 4)))
    centers: list[np.ndarray] = []
    while len(centers) < count:
        cand = rng.uniform(-scale, scale, size=dim)
        if all(np.linalg.norm(cand - c) >= min_sep for c in centers):
            centers.append(cand)
    return np.array(centers)


def generate_synthetic(spec: SynthSpec, outdir: str | Path) -> dict[str, Path]:
    """Write corpus, ECX embeddings, annotation TSV, pipeline config and the
    ground-truth sidecar into ``outdir``; returns the path map."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "annotations").mkdir(exist_ok=True)

    total = sum(c.size for c in spec.clusters)
    # occurrence i -> planted cluster
    planted = []
    for g, c in enumerate(spec.clusters):
        planted.extend([g] * c.size)

    # corpus: unique word per occurrence, fixed-length sentences
    words = [f"w{i:05d}" for i in range(total)]
    sentences = [
        words[i : i + spec.sentence_len] for i in range(0, total, spec.sentence_len)
    ]
    corpus_path = outdir / "corpus.txt"
    corpus_path.write_text("\n".join(" ".join(s) for s in sentences) + "\n")

    def occ_key(i: int) -> tuple[int, int]:
        return (i // spec.sentence_len, i % spec.sentence_len)

    # planted labels realized exactly by largest-remainder rounding
    labels: dict[int, str] = {}
    gt_clusters = []
    offset = 0
    for g, c in enumerate(spec.clusters):
        counts = largest_remainder_counts(c.mixture, c.size)
        i = offset
        for j, cnt in enumerate(counts):
            for _ in range(cnt):
                labels[i] = f"c{g}_{j}"
                i += 1
        max_share = max(counts) / c.size
        gt_clusters.append(
            {
                "cluster": g,
                "size": c.size,
                "label_counts": counts,
                "aligned": max_share >= spec.theta,
                "best_score": max_share,
                "minimal_n": minimal_n(counts, c.size, spec.theta),
            }
        )
        offset += c.size

    ann_path = outdir / "annotations" / f"{SCHEME_NAME.lower()}.tsv"
    with open(ann_path, "w") as fh:
        fh.write("sentence_id\tposition\tword\tlabel\n")
        for i in range(total):
            sid, pos = occ_key(i)
            fh.write(f"{sid}\t{pos}\t{words[i]}\t{labels[i]}\n")

    # per-layer Gaussian blobs around well-separated centers
    max_sigma = max(c.sigma for c in spec.clusters)
    min_sep = max(1.0, 20.0 * max_sigma * math.sqrt(spec.dim))
    vectors = np.empty((total, spec.layers, spec.dim), dtype=np.float32)
    for layer in range(spec.layers):
        rng = np.random.default_rng((spec.seed, layer))
        centers = _separated_centers(rng, len(spec.clusters), spec.dim, min_sep)
        for i in range(total):
            g = planted[i]
            noise = rng.normal(0.0, spec.clusters[g].sigma, size=spec.dim)
            vectors[i, layer] = centers[g] + noise

    ds = EmbeddingDataset(num_layers=spec.layers, dim=spec.dim, vocab=list(words))
    for i in range(total):
        sid, pos = occ_key(i)
        ds.records.append(EmbeddingRecord(i, sid, pos, vectors[i]))
    ecx_path = outdir / "data.ecx"
    write_dataset(ds, ecx_path)

    k = len(spec.clusters)
    aligned = sum(1 for c in gt_clusters if c["aligned"])
    hist: dict[str, int] = {}
    for c in gt_clusters:
        hist[str(c["minimal_n"])] = hist.get(str(c["minimal_n"]), 0) + 1
    ground_truth = {
        "k": k,
        "layers": spec.layers,
        "theta": spec.theta,
        "aligned_fraction_per_layer": [aligned / k] * spec.layers,
        "overall_aligned_fraction": aligned / k,
        "minimal_n_histogram": hist,
        "clusters": gt_clusters,
        "rounding": "largest_remainder",
    }
    gt_path = outdir / "ground_truth.json"
    gt_path.write_text(json.dumps(ground_truth, indent=2, sort_keys=True) + "\n")

    config_path = outdir / "config.toml"
    config_path.write_text(
        "[pipeline]\n"
        f'corpus = "{corpus_path.name}"\n'
        f'embeddings = "{ecx_path.name}"\n'
        f'output = "out"\n'
        f"k = {k}\n"
        f"theta = {spec.theta}\n"
        f"seed = {spec.seed}\n"
        "\n[filter]\n"
        "min_frequency = 1\n"
        "max_occurrences = 1\n"
        "\n"
        f"[schemes.{SCHEME_NAME}]\n"
        'kind = "token"\n'
        f'path = "annotations/{ann_path.name}"\n'
    )
    return {
        "corpus": corpus_path,
        "ecx": ecx_path,
        "annotations": ann_path,
        "ground_truth": gt_path,
        "config": config_path,
    }
