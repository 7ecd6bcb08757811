"""Tokenization helpers shared by ingest filtering and n-gram capture."""

from __future__ import annotations

import re
import unicodedata

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def fold_diacritics(text: str) -> str:
    """Strip combining marks: 'ségrégation' -> 'segregation'."""
    decomposed = unicodedata.normalize("NFKD", text)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def tokenize_text(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation.

    Hyphens count as punctuation, so "self-segregation" yields two tokens.
    Digit-only tokens are retained; diacritics are folded.
    """
    if not text:
        return []
    return _TOKEN_RE.findall(fold_diacritics(text).lower())


def contains_token(text: str, token: str) -> bool:
    """Token-boundary containment test ("segregationist" does not contain "segregation")."""
    return token in tokenize_text(text)
