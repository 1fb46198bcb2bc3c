"""Embedding backends.

A backend turns (text, target span) into one deterministic vector. Two
families exist:

- "hash:<dim>" — a dependency-free feature-hashing embedder. Offline,
  deterministic, and context-sensitive enough to exercise the pipeline;
  the default for tests and dry runs.
- anything else — treated as a transformers model id or local path;
  sub-token vectors overlapping the target span are mean-pooled under the
  chosen layer policy ("last" or "mean-last-4").
"""

from __future__ import annotations

import hashlib

import numpy as np

from senseloom.errors import ValidationError

LAYER_POLICIES = ("last", "mean-last-4")


class HashBackend:
    """Deterministic bag-of-ngrams embedder with signed feature hashing.

    The vector mixes the target surface form with a distance-weighted window
    of context tokens, so the same word in different contexts lands in
    different directions while identical inputs are bit-identical.
    """

    def __init__(self, dim: int = 64):
        if dim < 1:
            raise ValidationError(f"hash backend dimension must be >= 1, got {dim}")
        self.dim = dim
        self.model_id = f"hash:{dim}"

    def _bucket(self, feature: str) -> tuple[int, float]:
        digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
        value = int.from_bytes(digest, "little")
        sign = 1.0 if value & 1 else -1.0
        return (value >> 1) % self.dim, sign

    def _features(self, text: str, span: tuple[int, int]) -> list[tuple[str, float]]:
        start, end = span
        target = text[start:end]
        feats: list[tuple[str, float]] = [(f"t:{target}", 2.0)]
        for n in (2, 3):
            for i in range(len(target) - n + 1):
                feats.append((f"tn:{target[i : i + n]}", 1.0))
        left = text[:start].split()
        right = text[end:].split()
        for dist, tok in enumerate(reversed(left[-4:]), start=1):
            feats.append((f"c:{tok}", 1.0 / dist))
        for dist, tok in enumerate(right[:4], start=1):
            feats.append((f"c:{tok}", 1.0 / dist))
        return feats

    def encode(
        self, items: list[tuple[str, tuple[int, int]]], record_ids: list[str] | None = None
    ) -> np.ndarray:
        out = np.zeros((len(items), self.dim), dtype=np.float64)
        for row, (text, span) in enumerate(items):
            for feature, weight in self._features(text, span):
                bucket, sign = self._bucket(feature)
                out[row, bucket] += sign * weight
            norm = np.linalg.norm(out[row])
            if norm > 0:
                out[row] /= norm
            else:
                out[row, 0] = 1.0
        return out.astype(np.float32)


class TransformersBackend:
    """Pool sub-token vectors of the target span from a pretrained model."""

    def __init__(self, model_id: str, layer_policy: str = "last"):
        if layer_policy not in LAYER_POLICIES:
            raise ValidationError(f"layer policy must be one of {LAYER_POLICIES}, got {layer_policy!r}")
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:  # pragma: no cover
            raise ValidationError(
                "transformers/torch not installed; use a hash:<dim> model or install the 'models' extra"
            ) from exc
        self._torch = torch
        self.model_id = model_id
        self.layer_policy = layer_policy
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModel.from_pretrained(model_id, output_hidden_states=True)
        self.model.eval()

    def encode(self, items: list[tuple[str, tuple[int, int]]], record_ids: list[str] | None = None) -> np.ndarray:
        torch = self._torch
        vectors = []
        for i, (text, span) in enumerate(items):
            encoded = self.tokenizer(
                text, return_offsets_mapping=True, return_tensors="pt", truncation=True
            )
            offsets = encoded.pop("offset_mapping")[0].tolist()
            keep = [
                idx
                for idx, (s, e) in enumerate(offsets)
                if e > s and s < span[1] and e > span[0]
            ]
            if not keep:
                rid = record_ids[i] if record_ids else str(i)
                raise ValidationError(f"target span tokenizes to zero sub-tokens for record {rid!r}")
            with torch.no_grad():
                output = self.model(**encoded)
            hidden = output.hidden_states
            if self.layer_policy == "last":
                layer = hidden[-1][0]
            else:
                layer = torch.stack(hidden[-4:]).mean(dim=0)[0]
            vectors.append(layer[keep].mean(dim=0).numpy())
        return np.stack(vectors).astype(np.float32)


def load_backend(model_id: str, layer_policy: str = "last"):
    if model_id.startswith("hash:"):
        return HashBackend(dim=int(model_id.split(":", 1)[1]))
    if model_id == "hash":
        return HashBackend()
    return TransformersBackend(model_id, layer_policy=layer_policy)
