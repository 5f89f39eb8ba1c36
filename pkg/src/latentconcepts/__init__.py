"""Toolkit for discovering, aligning and explaining latent concepts in
per-token, per-layer embedding vectors."""

__version__ = "0.1.0"
