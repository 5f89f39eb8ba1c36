"""Matplotlib renderings of the report data, written next to the CSVs.

Figures are a presentation convenience; the delimited outputs are the
canonical, byte-deterministic artifacts.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def layer_curves(state, path: Path) -> None:
    """Normalized aligned-concept count per layer, one line per scheme."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    by_scheme: dict[str, list] = {}
    for s in state.summaries:
        by_scheme.setdefault(s.scheme, []).append(s)
    for name, rows in sorted(by_scheme.items()):
        rows = sorted(rows, key=lambda r: r.layer)
        peak = rows[0].max_layerwise_match
        ax.plot(
            [r.layer for r in rows],
            [r.normalized_count for r in rows],
            marker="o",
            label=f"{name} [{peak}]",
        )
    ax.set_xlabel("layer")
    ax.set_ylabel("normalized aligned concepts")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def overall_curve(state, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(state.layers, state.overall.per_layer_fraction, marker="s", color="tab:blue")
    ax.axhline(state.overall.overall, ls="--", color="gray",
               label=f"network average {state.overall.overall:.1%}")
    ax.set_xlabel("layer")
    ax.set_ylabel("aligned cluster fraction")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def composition_bars(state, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    max_n = state.cfg.max_n
    totals = {n: 0 for n in range(1, max_n + 1)}
    unexplained = 0
    for hist in state.histograms.values():
        for n, c in hist.counts.items():
            totals[n] += c
        unexplained += hist.unexplained
    xs = list(totals) + [max_n + 1]
    ys = list(totals.values()) + [unexplained]
    ax.bar(xs, ys, color=["tab:green"] * max_n + ["tab:red"])
    ax.set_xticks(xs, [str(n) for n in totals] + ["none"])
    ax.set_xlabel("minimal explanation size N")
    ax.set_ylabel("clusters (all layers)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def k_diagnostics_figure(diag, path: Path) -> None:
    """Elbow and silhouette curves side by side."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(diag.candidates, diag.distortion, marker="o")
    ax1.set_xlabel("K")
    ax1.set_ylabel("distortion (within-cluster SSE)")
    ax2.plot(diag.candidates, diag.silhouette, marker="o", color="tab:orange")
    ax2.set_xlabel("K")
    ax2.set_ylabel("mean silhouette")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_all(state) -> None:
    figdir = state.cfg.output / "figures"
    figdir.mkdir(parents=True, exist_ok=True)
    if state.summaries:
        layer_curves(state, figdir / "layer_curves.png")
    if state.overall is not None:
        overall_curve(state, figdir / "overall.png")
    if state.histograms:
        composition_bars(state, figdir / "composition.png")
