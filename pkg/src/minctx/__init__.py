"""Embeddings for discontinuous two-word contexts and animacy classification of markables."""

__version__ = "0.1.0"
