"""Transformer hidden-state extraction into the ECX container format."""

__version__ = "0.1.0"
