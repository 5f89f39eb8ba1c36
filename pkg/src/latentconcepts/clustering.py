"""Agglomerative Ward clustering over a layer's vectors.

Two engines produce the same dendrogram:

* ``build_dendrogram_naive`` — textbook O(N^2) memory / O(N^3) time search
  for the globally closest pair, with Lance-Williams updates. Serves as the
  oracle in tests.
* ``build_dendrogram_nnchain`` — nearest-neighbor-chain engine that exploits
  Ward reducibility. It stores only centroids and sizes (O(N*D) memory, no
  pairwise matrix), which is the whole point for large N.

Height convention shared by both engines: the initial dissimilarity between
two points is the squared Euclidean distance, and merged-cluster
dissimilarities follow the Ward Lance-Williams recurrence. Equivalently,
d(A, B) = 2*|A|*|B|/(|A|+|B|) * ||centroid_A - centroid_B||^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .errors import DataError, InvariantError


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    new_size: int


@dataclass
class Dendrogram:
    """Full merge history. Leaves are 0..N-1; merge k creates node N+k."""

    n_leaves: int
    merges: list[Merge]

    def __post_init__(self) -> None:
        if len(self.merges) != max(self.n_leaves - 1, 0):
            raise InvariantError(
                f"{self.n_leaves} leaves need {self.n_leaves - 1} merges, "
                f"got {len(self.merges)}"
            )
        prev = -np.inf
        for k, m in enumerate(self.merges):
            if m.height < prev:
                raise InvariantError(
                    f"merge {k} height {m.height} decreases below {prev}"
                )
            prev = m.height

    def write_tsv(self, fh: TextIO) -> None:
        fh.write("merge_index\tleft\tright\theight\tnew_size\n")
        for k, m in enumerate(self.merges):
            fh.write(f"{k}\t{m.left}\t{m.right}\t{m.height!r}\t{m.new_size}\n")


@dataclass
class ClusterModel:
    k: int
    assignment: np.ndarray  # row index -> cluster id in 0..k-1
    layer_index: int = 0

    def members(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for row, cid in enumerate(self.assignment):
            out[cid].append(row)
        return out


@dataclass
class KDiagnostics:
    candidates: list[int]
    distortion: list[float]  # total within-cluster SSE per candidate
    silhouette: list[float]


def _check_points(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise DataError("points must be a non-empty N x D matrix")
    if not np.all(np.isfinite(points)):
        raise DataError("points contain non-finite values")
    return points


def ward_cost(sum_a, size_a, sum_b, size_b) -> np.ndarray:
    """Dissimilarity between clusters given their vector sums and sizes.

    Twice the increase in within-cluster sum of squares caused by merging,
    which for singletons is the squared Euclidean distance.
    """
    na, nb = size_a, size_b
    diff = sum_a / np.expand_dims(na, -1) if np.ndim(na) else sum_a / na
    diff = diff - (sum_b / np.expand_dims(nb, -1) if np.ndim(nb) else sum_b / nb)
    sq = np.einsum("...i,...i->...", diff, diff)
    return 2.0 * (na * nb) / (na + nb) * sq


def build_dendrogram_naive(points: np.ndarray) -> Dendrogram:
    """O(N^3) oracle: repeatedly merge the globally closest pair.

    Merge costs are computed directly from cluster vector sums (the
    variance increase of the combined cluster), and ties on distance break
    to the lexicographically smallest (min cluster id, max cluster id)
    pair, making the result deterministic.
    """
    points = _check_points(points)
    n = points.shape[0]
    if n == 1:
        return Dendrogram(1, [])
    cap = 2 * n - 1
    # Full symmetric distance table over all cluster ids ever created.
    dist = np.full((cap, cap), np.inf)
    diff = points[:, None, :] - points[None, :, :]
    dist[:n, :n] = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(dist[:n, :n], np.inf)
    sums = np.zeros((cap, points.shape[1]))
    sums[:n] = points
    size = np.zeros(cap, dtype=np.int64)
    size[:n] = 1
    active = np.zeros(cap, dtype=bool)
    active[:n] = True

    merges: list[Merge] = []
    for new_id in range(n, cap):
        ids = np.flatnonzero(active)
        sub = dist[np.ix_(ids, ids)]
        iu = np.triu_indices(len(ids), k=1)
        vals = sub[iu]
        # argmin over the upper triangle in row-major order is exactly the
        # (min id, max id) lexicographic tie-break.
        best = int(np.argmin(vals))
        i, j = int(ids[iu[0][best]]), int(ids[iu[1][best]])
        d_ij = float(vals[best])

        sums[new_id] = sums[i] + sums[j]
        size[new_id] = size[i] + size[j]
        others = ids[(ids != i) & (ids != j)]
        if others.size:
            d_new = ward_cost(sums[new_id], size[new_id], sums[others], size[others])
            np.maximum(d_new, 0.0, out=d_new)
            dist[new_id, others] = d_new
            dist[others, new_id] = d_new
        active[i] = active[j] = False
        active[new_id] = True
        merges.append(Merge(i, j, d_ij, int(size[new_id])))
    return Dendrogram(n, merges)


def build_dendrogram_nnchain(points: np.ndarray) -> Dendrogram:
    """Nearest-neighbor-chain Ward engine, O(N*D) memory.

    Cluster dissimilarities are computed on demand from centroids and sizes;
    no pairwise matrix is ever allocated. Merges come out in chain order and
    are stably sorted by height afterwards (Ward reducibility guarantees a
    child never sits above its parent).
    """
    points = _check_points(points)
    n, _d = points.shape
    if n == 1:
        return Dendrogram(1, [])

    cent = points.copy()  # row -> centroid of the cluster in that slot
    sq = np.einsum("ij,ij->i", cent, cent)
    size = np.ones(n, dtype=np.float64)
    cluster_id = np.arange(n, dtype=np.int64)  # slot -> dendrogram node id
    alive = np.ones(n, dtype=bool)

    def dists_from(slot: int) -> np.ndarray:
        """Ward dissimilarity from `slot` to every alive slot (inf elsewhere)."""
        sqd = sq + sq[slot] - 2.0 * (cent @ cent[slot])
        np.maximum(sqd, 0.0, out=sqd)
        w = 2.0 * size * size[slot] / (size + size[slot])
        d = w * sqd
        d[~alive] = np.inf
        d[slot] = np.inf
        return d

    raw: list[tuple[int, int, float, int]] = []  # (id_a, id_b, height, new_size)
    chain: list[int] = []
    next_id = n
    n_alive = n

    while n_alive > 1:
        if not chain:
            chain.append(int(np.flatnonzero(alive)[0]))
        while True:
            a = chain[-1]
            d = dists_from(a)
            m = d.min()
            # tie-break: smallest cluster id among equally near neighbors
            cand = np.flatnonzero(d == m)
            b = int(cand[np.argmin(cluster_id[cand])])
            if len(chain) >= 2:
                prev = chain[-2]
                if d[prev] == m:
                    b = prev
                if b == prev:
                    # reciprocal nearest neighbors: merge a and b into slot a
                    ida, idb = int(cluster_id[a]), int(cluster_id[b])
                    sa, sb = size[a], size[b]
                    # recompute the height from the centroid difference: the
                    # dot-product expansion used for the search loses digits
                    dab = cent[a] - cent[b]
                    height = 2.0 * sa * sb / (sa + sb) * float(dab @ dab)
                    cent[a] = (sa * cent[a] + sb * cent[b]) / (sa + sb)
                    sq[a] = cent[a] @ cent[a]
                    size[a] = sa + sb
                    cluster_id[a] = next_id
                    alive[b] = False
                    raw.append((ida, idb, height, int(sa + sb)))
                    next_id += 1
                    n_alive -= 1
                    chain.pop()
                    chain.pop()
                    break
            chain.append(b)

    # Stable sort by height, then renumber internal nodes in sorted order.
    order = sorted(range(len(raw)), key=lambda k: raw[k][2])
    relabel = {i: i for i in range(n)}
    merges: list[Merge] = []
    for new_k, k in enumerate(order):
        ida, idb, h, sz = raw[k]
        left, right = sorted((relabel[ida], relabel[idb]))
        relabel[n + k] = n + new_k
        merges.append(Merge(left, right, h, sz))
    return Dendrogram(n, merges)


def cut(dendrogram: Dendrogram, k: int) -> ClusterModel:
    """Undo the last k-1 merges; clusters numbered by smallest contained leaf."""
    n = dendrogram.n_leaves
    if not 1 <= k <= n:
        raise DataError(f"K={k} out of range [1, {n}]")
    parent: dict[int, int] = {}
    for idx, m in enumerate(dendrogram.merges[: n - k]):
        node = n + idx
        parent[m.left] = node
        parent[m.right] = node

    root_cache: dict[int, int] = {}

    def root(node: int) -> int:
        trail = []
        while node in parent and node not in root_cache:
            trail.append(node)
            node = parent[node]
        top = root_cache.get(node, node)
        for t in trail:
            root_cache[t] = top
        return top

    labels = np.empty(n, dtype=np.int64)
    dense: dict[int, int] = {}
    for leaf in range(n):
        r = root(leaf)
        if r not in dense:
            dense[r] = len(dense)
        labels[leaf] = dense[r]
    if len(dense) != k:
        raise InvariantError(f"cut produced {len(dense)} clusters, expected {k}")
    return ClusterModel(k=k, assignment=labels)


def distortion(points: np.ndarray, labels: np.ndarray) -> float:
    """Total within-cluster sum of squared Euclidean distance to centroid."""
    points = np.asarray(points, dtype=np.float64)
    total = 0.0
    for cid in np.unique(labels):
        block = points[labels == cid]
        total += float(((block - block.mean(axis=0)) ** 2).sum())
    return total


def k_diagnostics(points: np.ndarray, k_candidates: list[int]) -> KDiagnostics:
    """Elbow (distortion) and mean-silhouette curves from cuts of one tree."""
    from sklearn.metrics import silhouette_score

    points = _check_points(points)
    n = points.shape[0]
    for k in k_candidates:
        if not 2 <= k <= n - 1:
            raise DataError(f"K candidate {k} outside [2, {n - 1}]")
    dendrogram = build_dendrogram_nnchain(points)
    dist, sil = [], []
    for k in k_candidates:
        labels = cut(dendrogram, k).assignment
        dist.append(distortion(points, labels))
        sil.append(float(silhouette_score(points, labels)))
    return KDiagnostics(list(k_candidates), dist, sil)
