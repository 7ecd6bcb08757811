"""Form reading and encoding backends."""

from __future__ import annotations

import csv
import hashlib
import math
from pathlib import Path

import numpy as np

DEFAULT_MODEL = "sentence-transformers/all-mpnet-base-v2"
HASH_MODEL = "hash-v1"
HASH_DIM = 256


class DuplicateFormError(ValueError):
    pass


def read_forms_csv(path: str | Path) -> list[str]:
    """First column of a headered CSV; duplicates and empty terms are errors."""
    forms: list[str] = []
    seen: set[str] = set()
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return forms
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            term = row[0].strip()
            if not term:
                raise ValueError(f"{path}:{line_no}: empty form term")
            if term in seen:
                raise DuplicateFormError(f"{path}:{line_no}: duplicate form {term!r}")
            seen.add(term)
            forms.append(term)
    return forms


def hash_encode(terms: list[str], dim: int = HASH_DIM) -> np.ndarray:
    """Deterministic feature-hashing encoder (offline stand-in for a model).

    Each token contributes signed weight to dim buckets derived from its
    SHA-256; token bigrams add weaker interactions so related phrases fall
    closer than unrelated ones. Vectors are L2-normalized.
    """
    out = np.zeros((len(terms), dim), dtype=np.float64)
    for row, term in enumerate(terms):
        tokens = term.lower().split()
        features = [(tok, 1.0) for tok in tokens]
        features += [(f"{a}__{b}", 0.5) for a, b in zip(tokens, tokens[1:])]
        for feature, weight in features:
            digest = hashlib.sha256(feature.encode("utf-8")).digest()
            for k in range(4):
                bucket = int.from_bytes(digest[k * 4 : k * 4 + 3], "big") % dim
                sign = 1.0 if digest[k * 4 + 3] % 2 == 0 else -1.0
                out[row, bucket] += sign * weight
        norm = math.sqrt(float((out[row] ** 2).sum()))
        if norm == 0.0:
            out[row, 0] = 1.0
            norm = 1.0
        out[row] /= norm
    return out


def model_encode(terms: list[str], model_tag: str) -> np.ndarray:
    """Encode with a sentence-transformers model (imported lazily)."""
    try:
        from sentence_transformers import SentenceTransformer
    except ImportError as exc:
        raise RuntimeError(
            f"sentence-transformers is not installed; install the [models] extra "
            f"or use --model {HASH_MODEL} for the deterministic offline encoder"
        ) from exc
    model = SentenceTransformer(model_tag)
    vectors = model.encode(terms, show_progress_bar=False, convert_to_numpy=True)
    return np.asarray(vectors, dtype=np.float64)


def encode_forms(terms: list[str], model_tag: str) -> np.ndarray:
    if model_tag == HASH_MODEL:
        return hash_encode(terms)
    return model_encode(terms, model_tag)
