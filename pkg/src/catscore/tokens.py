"""Shared text normalization.

Every metric in this package tokenizes text through the same rule so that
CQE, ROUGE, novelty ratios, and similarity scores all agree on what a
token is.
"""

from __future__ import annotations

import string

_EDGE_PUNCT = string.punctuation


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, trim punctuation from token edges.

    Internal punctuation survives, so hyphenated terms ("fine-tuning")
    stay single tokens. Tokens that are nothing but punctuation vanish.
    """
    out: list[str] = []
    for raw in text.lower().split():
        tok = raw.strip(_EDGE_PUNCT)
        if tok:
            out.append(tok)
    return out


def normalize(text: str) -> str:
    """Canonical lookup form of a heading: tokens joined by single spaces."""
    return " ".join(tokenize(text))
