"""Sidecar that turns sentences into occurrence embeddings and pair distances."""

__version__ = "0.1.0"
