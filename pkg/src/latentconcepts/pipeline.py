"""End-to-end orchestration: corpus -> clusters -> alignment -> composition.

A run is driven by a TOML config (see README for the grammar); every output
under the report directory is a pure function of (inputs, config), so
re-running a config reproduces the delimited outputs byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tomli

from . import alignment as al
from . import clustering as cl
from . import composition as comp
from . import schemes as sch
from .corpus import Corpus, FilterConfig, OccurrenceSet, filter_occurrences, load_corpus
from .ecx import EmbeddingDataset, read_dataset
from .errors import DataError, LatentConceptsError, UsageError

AUTO_SCHEME_KINDS = ("casing", "suffix", "ngram", "position")
FILE_SCHEME_KINDS = ("token", "lexicon")


class StageError(LatentConceptsError):
    """Wraps a module error with the pipeline stage it happened in."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class SchemeConfig:
    name: str
    kind: str  # token | lexicon | casing | suffix | ngram | position
    path: str | None = None
    coarse: str | None = None  # "builtin:pos", "builtin:sem" or a TSV path

    def __post_init__(self) -> None:
        if self.kind not in AUTO_SCHEME_KINDS + FILE_SCHEME_KINDS:
            raise UsageError(f"scheme {self.name}: unknown kind {self.kind!r}")
        if self.kind in FILE_SCHEME_KINDS and not self.path:
            raise UsageError(f"scheme {self.name}: kind {self.kind!r} needs a path")


@dataclass
class PipelineConfig:
    corpus: Path
    embeddings: Path
    output: Path
    k: int = 1000
    theta: float = 0.90
    layers: list[int] | None = None  # None = all layers in the ECX file
    seed: int = 0
    engine: str = "nnchain"
    max_n: int = 6
    compose_mode: str = comp.MODE_CROSS
    filter: FilterConfig = field(default_factory=FilterConfig)
    schemes: list[SchemeConfig] = field(default_factory=list)
    figures: bool = True

    def __post_init__(self) -> None:
        if self.k < 1:
            raise UsageError("k must be >= 1")
        if not 0 < self.theta <= 1:
            raise UsageError("theta must be in (0, 1]")
        if self.engine not in ("nnchain", "naive"):
            raise UsageError(f"unknown engine {self.engine!r}")


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise UsageError(f"{path}: invalid TOML: {exc}") from exc

    base = path.parent
    p = raw.get("pipeline", {})
    for req in ("corpus", "embeddings", "output"):
        if req not in p:
            raise UsageError(f"{path}: [pipeline] missing key {req!r}")
    f = raw.get("filter", {})
    schemes = []
    for name, entry in raw.get("schemes", {}).items():
        spath = entry.get("path")
        schemes.append(
            SchemeConfig(
                name=name,
                kind=entry.get("kind", "token"),
                path=str(base / spath) if spath else None,
                coarse=entry.get("coarse"),
            )
        )
    return PipelineConfig(
        corpus=base / p["corpus"],
        embeddings=base / p["embeddings"],
        output=base / p["output"],
        k=int(p.get("k", 1000)),
        theta=float(p.get("theta", 0.90)),
        layers=list(p["layers"]) if "layers" in p else None,
        seed=int(p.get("seed", 0)),
        engine=p.get("engine", "nnchain"),
        max_n=int(p.get("max_n", 6)),
        compose_mode=p.get("compose_mode", comp.MODE_CROSS),
        filter=FilterConfig(
            min_frequency=int(f.get("min_frequency", 10)),
            max_occurrences=int(f.get("max_occurrences", 10)),
            seed=int(f.get("seed", p.get("seed", 0))),
        ),
        schemes=schemes,
        figures=bool(p.get("figures", True)),
    )


@dataclass
class RunState:
    """Everything the stages accumulate, for reuse by CLI subcommands."""

    cfg: PipelineConfig
    corpus: Corpus | None = None
    occurrences: OccurrenceSet | None = None
    dataset: EmbeddingDataset | None = None
    keys: list[tuple[int, int]] = field(default_factory=list)
    word_ids: list[int] = field(default_factory=list)  # corpus word ids, row order
    layer_points: dict[int, np.ndarray] = field(default_factory=dict)
    schemes: list[sch.ConceptScheme] = field(default_factory=list)
    models: dict[int, cl.ClusterModel] = field(default_factory=dict)
    dendrograms: dict[int, cl.Dendrogram] = field(default_factory=dict)
    alignments: dict[int, list[al.ClusterAlignment]] = field(default_factory=dict)
    layers: list[int] = field(default_factory=list)
    summaries: list[al.SchemeLayerSummary] = field(default_factory=list)
    overall: al.OverallSummary | None = None
    histograms: dict[int, comp.CompositionHistogram] = field(default_factory=dict)


def stage_ingest(state: RunState) -> None:
    cfg = state.cfg
    try:
        state.corpus = load_corpus(cfg.corpus)
        state.occurrences = filter_occurrences(state.corpus, cfg.filter)
    except LatentConceptsError as exc:
        raise StageError("ingest", exc) from exc
    cfg.output.mkdir(parents=True, exist_ok=True)
    with open(cfg.output / "occurrences.tsv", "w") as fh:
        state.occurrences.write_tsv(fh, state.corpus)


def stage_embed(state: RunState) -> None:
    """Read the ECX file and line its records up with the filtered occurrences."""
    cfg = state.cfg
    try:
        ds = read_dataset(cfg.embeddings)
    except LatentConceptsError as exc:
        raise StageError("embed", exc) from exc
    state.dataset = ds
    by_key = {rec.key: rec for rec in ds.records}
    missing = 0
    rows = []
    for occ in state.occurrences:
        rec = by_key.get(occ.key)
        if rec is None:
            missing += 1
            continue
        if ds.vocab[rec.word_id] != state.corpus.word(occ.word_id):
            raise StageError(
                "embed",
                DataError(
                    f"embedding record at {occ.key} is for word "
                    f"{ds.vocab[rec.word_id]!r}, corpus has "
                    f"{state.corpus.word(occ.word_id)!r}"
                ),
            )
        rows.append((occ, rec))
    if not rows:
        raise StageError("embed", DataError("no embedding records match the occurrence set"))
    if missing:
        raise StageError(
            "embed",
            DataError(f"{missing} filtered occurrences have no embedding record"),
        )
    state.keys = [occ.key for occ, _ in rows]
    state.word_ids = [occ.word_id for occ, _ in rows]
    state.layers = cfg.layers if cfg.layers is not None else list(range(ds.num_layers))
    for layer in state.layers:
        if not 0 <= layer < ds.num_layers:
            raise StageError(
                "embed", DataError(f"layer {layer} out of range [0, {ds.num_layers})")
            )
        pts = np.stack([rec.vectors[layer] for _, rec in rows]).astype(np.float64)
        state.layer_points[layer] = pts


def stage_annotate(state: RunState) -> None:
    cfg = state.cfg
    corpus, occs = state.corpus, state.occurrences
    built: list[sch.ConceptScheme] = []
    try:
        for scfg in cfg.schemes:
            if scfg.kind == "token":
                scheme = sch.load_token_annotations(scfg.path, scfg.name, corpus)
            elif scfg.kind == "lexicon":
                scheme, _skipped = sch.load_type_lexicon(scfg.path, scfg.name, corpus)
            elif scfg.kind == "casing":
                scheme = sch.annotate_casing(occs, corpus)
                scheme.name = scfg.name
            elif scfg.kind == "suffix":
                suffixes = (
                    [s.strip() for s in Path(scfg.path).read_text().splitlines() if s.strip()]
                    if scfg.path
                    else sch.default_suffixes()
                )
                scheme = sch.annotate_suffix(occs, corpus, suffixes)
                scheme.name = scfg.name
            elif scfg.kind == "ngram":
                scheme = sch.annotate_ngram(occs, corpus)
                scheme.name = scfg.name
            elif scfg.kind == "position":
                first, last = sch.annotate_position(occs, corpus)
                built.extend([first, last])
                continue
            if scfg.coarse:
                if scfg.coarse.startswith("builtin:"):
                    mapping = sch.builtin_coarse_mapping(
                        scfg.coarse.split(":", 1)[1], scfg.name
                    )
                else:
                    mapping = sch.load_coarse_mapping(scfg.coarse, scfg.name)
                scheme = sch.coarsen(scheme, mapping)
            built.append(scheme)
    except LatentConceptsError as exc:
        raise StageError("annotate", exc) from exc
    state.schemes = built


def stage_cluster(state: RunState) -> None:
    cfg = state.cfg
    build = (
        cl.build_dendrogram_nnchain if cfg.engine == "nnchain" else cl.build_dendrogram_naive
    )
    layers_dir = cfg.output / "layers"
    layers_dir.mkdir(parents=True, exist_ok=True)
    try:
        for layer in state.layers:
            dend = build(state.layer_points[layer])
            model = cl.cut(dend, min(cfg.k, dend.n_leaves))
            model.layer_index = layer
            state.dendrograms[layer] = dend
            state.models[layer] = model
            with open(layers_dir / f"layer{layer:02d}.dendrogram.tsv", "w") as fh:
                dend.write_tsv(fh)
            with open(layers_dir / f"layer{layer:02d}.clusters.tsv", "w") as fh:
                fh.write("cluster_id\tword\tsentence_id\tposition\n")
                for row, cid in enumerate(model.assignment):
                    sid, pos = state.keys[row]
                    word = state.corpus.word(state.word_ids[row])
                    fh.write(f"{cid}\t{word}\t{sid}\t{pos}\n")
    except LatentConceptsError as exc:
        raise StageError("cluster", exc) from exc


def stage_align(state: RunState) -> None:
    cfg = state.cfg
    acfg = al.AlignmentConfig(theta=cfg.theta)
    try:
        for layer in state.layers:
            state.alignments[layer] = al.align_model(
                state.models[layer],
                state.keys,
                state.word_ids,
                state.schemes,
                acfg,
                layer=layer,
            )
    except LatentConceptsError as exc:
        raise StageError("align", exc) from exc
    scheme_names = [s.name for s in state.schemes]
    summaries, overall = al.summarize(
        state.alignments, scheme_names, max(m.k for m in state.models.values())
    )
    report = {
        "config": {
            "theta": cfg.theta,
            "k": cfg.k,
            "engine": cfg.engine,
            "denominator": acfg.denominator,
            "aligned_means": "theta-aligned with >=1 class of >=1 scheme",
        },
        "per_layer": [
            {
                "layer": layer,
                "aligned_fraction": overall.per_layer_fraction[i],
                "clusters": [
                    {
                        "cluster_id": a.cluster_id,
                        "aligned_labels": [f"{s}:{l}" for s, l in a.aligned_labels],
                        "top_scores": [
                            {"scheme": s, "label": l, "score": v}
                            for s, l, v in a.top_scores()
                        ],
                    }
                    for a in state.alignments[layer]
                ],
            }
            for i, layer in enumerate(state.layers)
        ],
        "per_scheme": [
            {
                "scheme": name,
                "layer_curve": [
                    s.normalized_count
                    for s in summaries
                    if s.scheme == name
                ],
                "max_layerwise_match": next(
                    s.max_layerwise_match for s in summaries if s.scheme == name
                ),
                "network_average": overall.per_scheme_average[name],
            }
            for name in scheme_names
        ],
        "overall": overall.overall,
    }
    _write_json(cfg.output / "alignment.json", report)
    with open(cfg.output / "alignment.tsv", "w") as fh:
        fh.write("layer\tcluster_id\tscheme\tlabel\tscore\taligned\n")
        for layer in state.layers:
            for a in state.alignments[layer]:
                for (s, l), v in sorted(a.scores.items()):
                    flag = int((s, l) in a.aligned_labels)
                    fh.write(f"{layer}\t{a.cluster_id}\t{s}\t{l}\t{v!r}\t{flag}\n")
    state.summaries = summaries
    state.overall = overall


def stage_compose(state: RunState) -> None:
    cfg = state.cfg
    per_layer = []
    state.histograms = {}
    try:
        for layer in state.layers:
            views = al.cluster_views(state.models[layer], state.keys, state.word_ids)
            hist, explanations = comp.composition_histogram(
                views,
                state.schemes,
                theta=cfg.theta,
                max_n=cfg.max_n,
                mode=cfg.compose_mode,
                layer=layer,
            )
            state.histograms[layer] = hist
            per_layer.append(
                {
                    "layer": layer,
                    "histogram": {str(n): hist.counts.get(n, 0) for n in range(1, cfg.max_n + 1)},
                    "cumulative": {str(n): c for n, c in hist.cumulative().items()},
                    "unexplained": hist.unexplained,
                    "clusters": [
                        {
                            "cluster_id": e.cluster_id,
                            "labels": [f"{s}:{l}" for s, l in e.labels],
                            "n": e.n,
                            "coverage": e.coverage,
                            "mode": e.mode,
                        }
                        for e in explanations
                    ],
                }
            )
    except LatentConceptsError as exc:
        raise StageError("compose", exc) from exc
    _write_json(
        cfg.output / "composition.json",
        {"config": {"theta": cfg.theta, "max_n": cfg.max_n, "mode": cfg.compose_mode},
         "per_layer": per_layer},
    )
    # aggregate histogram over layers
    agg = comp.CompositionHistogram(max_n=cfg.max_n)
    for hist in state.histograms.values():
        for n, c in hist.counts.items():
            agg.counts[n] = agg.counts.get(n, 0) + c
        agg.unexplained += hist.unexplained
    with open(cfg.output / "composition.tsv", "w") as fh:
        agg.write_tsv(fh)


def emit_plot_data(state: RunState) -> None:
    cfg = state.cfg
    plots = cfg.output / "plots"
    plots.mkdir(parents=True, exist_ok=True)
    by_scheme: dict[str, list] = {}
    for s in state.summaries:
        by_scheme.setdefault(s.scheme, []).append(s)
    for name, rows in by_scheme.items():
        with open(plots / f"{name}.csv", "w") as fh:
            fh.write("layer,aligned_count,normalized_count\n")
            for s in sorted(rows, key=lambda r: r.layer):
                fh.write(f"{s.layer},{s.aligned_count},{s.normalized_count!r}\n")
    with open(plots / "overall.csv", "w") as fh:
        fh.write("layer,aligned_fraction\n")
        for layer, frac in zip(state.layers, state.overall.per_layer_fraction):
            fh.write(f"{layer},{frac!r}\n")


def stage_report(state: RunState) -> None:
    emit_plot_data(state)
    if state.cfg.figures:
        from . import figures

        figures.render_all(state)


STAGES = [
    ("ingest", stage_ingest),
    ("embed", stage_embed),
    ("annotate", stage_annotate),
    ("cluster", stage_cluster),
    ("align", stage_align),
    ("compose", stage_compose),
    ("report", stage_report),
]


def run_pipeline(cfg: PipelineConfig, upto: str = "report") -> RunState:
    """Run stages through `upto` (a stage name); returns the run state."""
    names = [n for n, _ in STAGES]
    if upto not in names:
        raise UsageError(f"unknown stage {upto!r}")
    state = RunState(cfg)
    for name, fn in STAGES[: names.index(upto) + 1]:
        fn(state)
    return state


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
