"""Compositional explanations for clusters that no single class explains.

For a cluster, find the smallest set of concept classes whose combined
membership covers at least theta of the cluster. The search is exact up to
``max_n`` labels: it walks label subsets in lexicographic order by
increasing size, pruning with an optimistic sum-of-largest-overlaps bound,
so the minimal-N histogram is well defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .alignment import AlignmentConfig, ClusterView, align_cluster
from .errors import DataError, UsageError
from .schemes import CONTEXTUAL, TYPE_LEVEL, ConceptScheme

MODE_CROSS = "cross"


@dataclass
class CompositionExplanation:
    cluster_id: int
    layer: int
    labels: list[tuple[str, str]]  # sorted (scheme, label)
    coverage: float
    mode: str

    @property
    def n(self) -> int:
        return len(self.labels)


@dataclass
class CompositionHistogram:
    max_n: int
    counts: dict[int, int] = field(default_factory=dict)  # minimal N -> clusters
    unexplained: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values()) + self.unexplained

    def percent(self, n: int) -> float:
        return 100.0 * self.counts.get(n, 0) / self.total if self.total else 0.0

    def cumulative(self) -> dict[int, int]:
        """Clusters explainable when allowing up to N labels."""
        out, running = {}, 0
        for n in range(1, self.max_n + 1):
            running += self.counts.get(n, 0)
            out[n] = running
        return out

    def write_tsv(self, fh) -> None:
        fh.write("N\tcount\tpercent\n")
        for n in range(1, self.max_n + 1):
            fh.write(f"{n}\t{self.counts.get(n, 0)}\t{self.percent(n):.2f}\n")
        pct = 100.0 * self.unexplained / self.total if self.total else 0.0
        fh.write(f"none\t{self.unexplained}\t{pct:.2f}\n")


def _cluster_members_and_candidates(
    view: ClusterView, schemes: list[ConceptScheme], mode: str
) -> tuple[int, list[tuple[tuple[str, str], int]]]:
    """Members as bit positions; candidates as ((scheme, label), bitmask).

    Within a type-level scheme the cluster members are its unique word
    types; otherwise members are occurrences and type-level classes cover
    an occurrence through its word type.
    """
    if mode == MODE_CROSS:
        chosen = schemes
    else:
        chosen = [s for s in schemes if s.name == mode]
        if not chosen:
            raise UsageError(f"mode names unknown scheme {mode!r}")

    single = chosen[0] if len(chosen) == 1 else None
    if single is not None and single.kind == TYPE_LEVEL:
        members = sorted(view.unique_types)
        member_pos = {wid: i for i, wid in enumerate(members)}

        def mask_of(cls) -> int:
            m = 0
            for wid in cls.members & set(members):
                m |= 1 << member_pos[wid]
            return m

    else:
        members = list(view.occurrence_keys)
        word_of = dict(zip(view.occurrence_keys, view.word_ids))

        def mask_of(cls, kind=None) -> int:
            m = 0
            for i, key in enumerate(members):
                hit = key in cls.members if kind == CONTEXTUAL else word_of[key] in cls.members
                if hit:
                    m |= 1 << i
            return m

    candidates = []
    for scheme in chosen:
        for label in sorted(scheme.classes):
            cls = scheme.classes[label]
            if single is not None and single.kind == TYPE_LEVEL:
                mask = mask_of(cls)
            else:
                mask = mask_of(cls, scheme.kind)
            if mask:
                candidates.append(((scheme.name, label), mask))
    candidates.sort(key=lambda c: c[0])
    return len(members), candidates


def explain(
    view: ClusterView,
    schemes: list[ConceptScheme],
    theta: float = 0.9,
    max_n: int = 6,
    mode: str = MODE_CROSS,
    layer: int = 0,
) -> CompositionExplanation | None:
    """Minimal label set covering >= theta of the cluster, or None.

    Among equal-size candidates the maximal coverage wins; remaining ties go
    to the lexicographically smallest label list.
    """
    if max_n < 1:
        raise DataError("max_n must be >= 1")
    if not view.occurrence_keys:
        raise DataError("cluster is empty")
    m, candidates = _cluster_members_and_candidates(view, schemes, mode)
    need = theta * m
    counts = [mask.bit_count() for _, mask in candidates]
    c = len(candidates)

    # suffix_top[i][j]: sum of the j largest overlap counts among
    # candidates[i:]; optimistic bound for any j picks from that suffix
    suffix_top: list[list[int]] = [[0] * (max_n + 1) for _ in range(c + 1)]
    for i in range(c - 1, -1, -1):
        tail = sorted(counts[i:], reverse=True)[:max_n]
        for j in range(1, max_n + 1):
            suffix_top[i][j] = sum(tail[:j])

    for n in range(1, max_n + 1):
        best_cov = -1
        best_labels: list[tuple[str, str]] | None = None

        def dfs(start: int, depth: int, mask: int, picked: list[int]) -> None:
            nonlocal best_cov, best_labels
            cov = mask.bit_count()
            if depth == n:
                if cov >= need and cov > best_cov:
                    best_cov = cov
                    best_labels = [candidates[i][0] for i in picked]
                return
            remaining = n - depth
            for i in range(start, c - remaining + 1):
                bound = cov + suffix_top[i][remaining]
                if bound < need or bound <= best_cov:
                    continue
                picked.append(i)
                dfs(i + 1, depth + 1, mask | candidates[i][1], picked)
                picked.pop()

        dfs(0, 0, 0, [])
        if best_labels is not None:
            return CompositionExplanation(
                cluster_id=view.cluster_id,
                layer=layer,
                labels=sorted(best_labels),
                coverage=best_cov / m,
                mode=mode,
            )
    return None


def explain_bruteforce(
    view: ClusterView,
    schemes: list[ConceptScheme],
    theta: float = 0.9,
    max_n: int = 6,
    mode: str = MODE_CROSS,
    layer: int = 0,
) -> CompositionExplanation | None:
    """Unpruned enumeration over all label subsets; test oracle for explain()."""
    from itertools import combinations

    m, candidates = _cluster_members_and_candidates(view, schemes, mode)
    need = theta * m
    for n in range(1, max_n + 1):
        best = None
        for combo in combinations(range(len(candidates)), n):
            mask = 0
            for i in combo:
                mask |= candidates[i][1]
            cov = mask.bit_count()
            if cov >= need and (best is None or cov > best[0]):
                best = (cov, [candidates[i][0] for i in combo])
        if best is not None:
            return CompositionExplanation(
                cluster_id=view.cluster_id,
                layer=layer,
                labels=sorted(best[1]),
                coverage=best[0] / m,
                mode=mode,
            )
    return None


def composition_histogram(
    views: list[ClusterView],
    schemes: list[ConceptScheme],
    theta: float = 0.9,
    max_n: int = 6,
    mode: str = MODE_CROSS,
    layer: int = 0,
) -> tuple[CompositionHistogram, list[CompositionExplanation]]:
    hist = CompositionHistogram(max_n=max_n)
    explanations = []
    for view in sorted(views, key=lambda v: v.cluster_id):
        exp = explain(view, schemes, theta=theta, max_n=max_n, mode=mode, layer=layer)
        if exp is None:
            hist.unexplained += 1
        else:
            hist.counts[exp.n] = hist.counts.get(exp.n, 0) + 1
            explanations.append(exp)
    return hist, explanations


def enrich_aligned(
    view: ClusterView,
    schemes: list[ConceptScheme],
    theta: float = 0.9,
    cfg: AlignmentConfig | None = None,
) -> list[tuple[str, str]]:
    """Every class (any scheme) the cluster theta-aligns with, for joint
    descriptions of already-aligned clusters."""
    cfg = cfg or AlignmentConfig(theta=theta)
    labels = []
    for scheme in schemes:
        for label in sorted(scheme.classes):
            score, aligned = align_cluster(
                view, scheme.classes[label], scheme.kind, cfg
            )
            if aligned:
                labels.append((scheme.name, label))
    return sorted(labels)
