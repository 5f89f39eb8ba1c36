"""Shared clustering test helpers: tree identity and planted blob data."""

import numpy as np


def merge_partitions(dendrogram):
    """Set of leaf-sets created by each merge; order-independent tree identity."""
    n = dendrogram.n_leaves
    nodes = {i: frozenset([i]) for i in range(n)}
    out = set()
    for k, m in enumerate(dendrogram.merges):
        s = nodes[m.left] | nodes[m.right]
        nodes[n + k] = s
        out.add(s)
    return out


def planted_blobs(rng, n_clusters=4, size=100, dim=16, sigma=0.05, min_sep=1.0):
    """Well-separated Gaussian blobs plus their generator labels."""
    centers = []
    while len(centers) < n_clusters:
        c = rng.uniform(-4, 4, size=dim)
        if all(np.linalg.norm(c - o) >= min_sep for o in centers):
            centers.append(c)
    points = np.vstack(
        [rng.normal(c, sigma, size=(size, dim)) for c in centers]
    )
    labels = np.repeat(np.arange(n_clusters), size)
    perm = rng.permutation(len(points))
    return points[perm], labels[perm]
