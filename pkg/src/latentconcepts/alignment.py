"""Alignment between encoded concepts (clusters) and concept-scheme classes.

A cluster is theta-aligned with a class when the overlap fraction reaches
theta. The overlap denominator is the cluster side: occurrence count for
contextual schemes, unique word-type count for type-level schemes. An
experimental "concept" denominator (divide by the class's word-type count
instead) is available for comparison.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .clustering import ClusterModel
from .errors import DataError
from .schemes import CONTEXTUAL, TYPE_LEVEL, ConceptClass, ConceptScheme


@dataclass(frozen=True)
class AlignmentConfig:
    theta: float = 0.90
    denominator: str = "cluster"  # "cluster" (default) or "concept"

    def __post_init__(self) -> None:
        if not 0 < self.theta <= 1:
            raise DataError("theta must be in (0, 1]")
        if self.denominator not in ("cluster", "concept"):
            raise DataError(f"unknown denominator {self.denominator!r}")


@dataclass
class ClusterAlignment:
    layer: int
    cluster_id: int
    # (scheme, label) -> score; only nonzero overlaps are stored
    scores: dict[tuple[str, str], float] = field(default_factory=dict)
    aligned_labels: list[tuple[str, str]] = field(default_factory=list)

    @property
    def is_aligned(self) -> bool:
        return bool(self.aligned_labels)

    def top_scores(self, n: int = 5) -> list[tuple[str, str, float]]:
        ranked = sorted(self.scores.items(), key=lambda kv: (-kv[1], kv[0]))
        return [(s, l, v) for (s, l), v in ranked[:n]]


@dataclass
class SchemeLayerSummary:
    scheme: str
    layer: int
    aligned_count: int
    normalized_count: float
    max_layerwise_match: int


@dataclass
class OverallSummary:
    per_layer_fraction: list[float]  # aligned clusters / K, by layer
    overall: float  # mean over layers
    per_scheme_average: dict[str, float]  # mean over layers of count / K


@dataclass
class ClusterView:
    """Cluster membership resolved to occurrence keys and word types."""

    cluster_id: int
    occurrence_keys: list[tuple[int, int]]
    word_ids: list[int]

    @property
    def unique_types(self) -> set[int]:
        return set(self.word_ids)


def cluster_views(
    model: ClusterModel,
    keys: list[tuple[int, int]],
    word_ids: list[int],
) -> list[ClusterView]:
    views = [ClusterView(cid, [], []) for cid in range(model.k)]
    for row, cid in enumerate(model.assignment):
        views[cid].occurrence_keys.append(keys[row])
        views[cid].word_ids.append(word_ids[row])
    return views


def align_cluster(
    view: ClusterView,
    cls: ConceptClass,
    kind: str,
    cfg: AlignmentConfig,
) -> tuple[float, bool]:
    """Score one cluster against one class; aligned iff score >= theta."""
    if kind == CONTEXTUAL:
        overlap = sum(1 for key in view.occurrence_keys if key in cls.members)
        denom = len(view.occurrence_keys)
    else:
        types = view.unique_types
        overlap = len(types & cls.members)
        denom = len(types)
    if cfg.denominator == "concept":
        denom = len(cls.members)
    score = overlap / denom if denom else 0.0
    return score, score >= cfg.theta


def align_model(
    model: ClusterModel,
    keys: list[tuple[int, int]],
    word_ids: list[int],
    schemes: list[ConceptScheme],
    cfg: AlignmentConfig,
    layer: int = 0,
) -> list[ClusterAlignment]:
    """Score every cluster against every class it overlaps.

    Unannotated occurrences stay in the denominator: sparse annotations can
    only lower scores, never inflate them.
    """
    indexes = {s.name: s.member_index() for s in schemes}
    results = []
    for view in cluster_views(model, keys, word_ids):
        ca = ClusterAlignment(layer=layer, cluster_id=view.cluster_id)
        for scheme in schemes:
            index = indexes[scheme.name]
            counts: Counter = Counter()
            if scheme.kind == CONTEXTUAL:
                denom = len(view.occurrence_keys)
                for key in view.occurrence_keys:
                    for lbl in index.get(key, ()):
                        counts[lbl] += 1
            else:
                types = view.unique_types
                denom = len(types)
                for wid in types:
                    for lbl in index.get(wid, ()):
                        counts[lbl] += 1
            for lbl, overlap in counts.items():
                d = len(scheme.classes[lbl].members) if cfg.denominator == "concept" else denom
                score = overlap / d if d else 0.0
                ca.scores[(scheme.name, lbl)] = score
        ca.aligned_labels = sorted(
            key for key, score in ca.scores.items() if score >= cfg.theta
        )
        results.append(ca)
    return results


def summarize(
    alignments_by_layer: dict[int, list[ClusterAlignment]],
    scheme_names: list[str],
    k: int,
) -> tuple[list[SchemeLayerSummary], OverallSummary]:
    """Per-scheme layer curves (normalized by the scheme's best layer) and
    the network-wide average alignment."""
    layers = sorted(alignments_by_layer)
    scheme_counts: dict[str, dict[int, int]] = {s: {} for s in scheme_names}
    per_layer_fraction = []
    for layer in layers:
        alignments = alignments_by_layer[layer]
        per_layer_fraction.append(sum(a.is_aligned for a in alignments) / k)
        for name in scheme_names:
            scheme_counts[name][layer] = sum(
                1
                for a in alignments
                if any(s == name for s, _ in a.aligned_labels)
            )
    summaries = []
    for name in scheme_names:
        counts = scheme_counts[name]
        peak = max(counts.values(), default=0)
        for layer in layers:
            summaries.append(
                SchemeLayerSummary(
                    scheme=name,
                    layer=layer,
                    aligned_count=counts[layer],
                    normalized_count=counts[layer] / peak if peak else 0.0,
                    max_layerwise_match=peak,
                )
            )
    overall = OverallSummary(
        per_layer_fraction=per_layer_fraction,
        overall=sum(per_layer_fraction) / len(per_layer_fraction)
        if per_layer_fraction
        else 0.0,
        per_scheme_average={
            name: sum(scheme_counts[name][l] for l in layers) / (len(layers) * k)
            for name in scheme_names
        },
    )
    return summaries, overall
