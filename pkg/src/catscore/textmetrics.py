"""Token-overlap metrics: ROUGE-1/2/L, template coverage, n-gram novelty.

All functions work on pre-tokenized sequences (see :mod:`catscore.tokens`)
and are pure; callers that want stemmed variants stem the tokens first.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .catalogue import Catalogue, strip_level_marks
from .tokens import tokenize


@dataclass(frozen=True)
class RougeScore:
    """Precision, recall and F1 as fractions in [0, 1].

    Reports multiply by 100. When candidate and reference are both empty
    there is nothing to miss, so all three are 1.0; when exactly one side
    is empty all three are 0.0.
    """

    precision: float
    recall: float
    f1: float

    @classmethod
    def of(cls, precision: float, recall: float) -> "RougeScore":
        denom = precision + recall
        return cls(precision, recall, 0.0 if denom == 0.0 else 2.0 * precision * recall / denom)


_PERFECT = RougeScore(1.0, 1.0, 1.0)
_ZERO = RougeScore(0.0, 0.0, 0.0)


def ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    """Clipped n-gram overlap, n in {1, 2}."""
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    cand = Counter(ngrams(candidate, n))
    ref = Counter(ngrams(reference, n))
    total_c, total_r = sum(cand.values()), sum(ref.values())
    if total_c == 0 and total_r == 0:
        return _PERFECT
    if total_c == 0 or total_r == 0:
        return _ZERO
    overlap = sum((cand & ref).values())
    return RougeScore.of(overlap / total_c, overlap / total_r)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length by the quadratic table."""
    if len(b) > len(a):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """Longest-common-subsequence overlap with the same empty conventions."""
    if not candidate and not reference:
        return _PERFECT
    if not candidate or not reference:
        return _ZERO
    ell = lcs_length(candidate, reference)
    return RougeScore.of(ell / len(candidate), ell / len(reference))


# Generic heading terms; "(s)" marks entries counted in both singular
# and plural form. "eassy" is a deliberate variant kept alongside
# "essay" so catalogues carrying either spelling are treated alike.
_DEFAULT_TERMS = (
    "introduction", "preliminaries", "preliminary", "background", "overview",
    "definition(s)", "methodology", "method(s)", "sources", "purpose",
    "related work", "data", "dataset(s)", "outlook", "eassy", "essay",
    "benefit(s)", "advantage(s)", "disadvantage(s)", "challenge(s)",
    "application(s)", "future", "summary", "notation(s)", "result(s)",
    "discussion", "analysis", "observation(s)", "conclusion(s)", "references",
)


@dataclass(frozen=True)
class TemplateLexicon:
    """Immutable set of template entries, each a lowercase token tuple."""

    entries: tuple[tuple[str, ...], ...]

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> "TemplateLexicon":
        """Build from raw strings; ``foo(s)`` expands to ``foo`` and ``foos``."""
        seen: dict[tuple[str, ...], None] = {}
        for raw in terms:
            term = raw.strip().lower()
            if not term:
                continue
            forms = [term[:-3], term[:-3] + "s"] if term.endswith("(s)") else [term]
            for form in forms:
                toks = tuple(tokenize(form))
                if toks:
                    seen.setdefault(toks, None)
        return cls(tuple(seen))

    @classmethod
    def default(cls) -> "TemplateLexicon":
        return cls.from_terms(_DEFAULT_TERMS)

    @classmethod
    def from_path(cls, path: str | Path) -> "TemplateLexicon":
        """One entry per line; blank lines and ``#`` comments are skipped."""
        terms: list[str] = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                entry = line.split("#", 1)[0].strip()
                if entry:
                    terms.append(entry)
        return cls.from_terms(terms)

    def to_lines(self) -> list[str]:
        return [" ".join(entry) for entry in self.entries]


def _covered_spans(tokens: Sequence[str], lexicon: TemplateLexicon) -> list[tuple[int, int]]:
    """Greedy longest-first left-to-right non-overlapping matches."""
    by_length = sorted(lexicon.entries, key=len, reverse=True)
    spans: list[tuple[int, int]] = []
    i, n = 0, len(tokens)
    while i < n:
        width = 0
        for entry in by_length:
            k = len(entry)
            if k <= n - i and tuple(tokens[i:i + k]) == entry:
                width = k
                break
        if width:
            spans.append((i, i + width))
            i += width
        else:
            i += 1
    return spans


def cqe(catalogue: Catalogue, lexicon: TemplateLexicon | None = None, *,
        unit: str = "tokens") -> float:
    """Share of the catalogue made of template words, 0..100.

    The default counts covered tokens over total tokens in the stripped
    stream; ``unit="items"`` instead counts items containing at least one
    template match. Higher means more boilerplate. Empty catalogues
    score 0.
    """
    if lexicon is None:
        lexicon = TemplateLexicon.default()
    if unit == "tokens":
        tokens = strip_level_marks(catalogue)
        if not tokens:
            return 0.0
        covered = sum(end - start for start, end in _covered_spans(tokens, lexicon))
        return 100.0 * covered / len(tokens)
    if unit == "items":
        if not len(catalogue):
            return 0.0
        hit = sum(1 for item in catalogue if _covered_spans(item.tokens(), lexicon))
        return 100.0 * hit / len(catalogue)
    raise ValueError(f"unit must be 'tokens' or 'items', got {unit!r}")


def novel_ngram_ratio(source: Sequence[str], target: Sequence[str], n: int) -> float:
    """Percentage of distinct target n-grams that never occur in the source."""
    if not 1 <= n <= 4:
        raise ValueError(f"n must be in 1..4, got {n}")
    target_grams = set(ngrams(target, n))
    if not target_grams:
        return 0.0
    source_grams = set(ngrams(source, n))
    return 100.0 * len(target_grams - source_grams) / len(target_grams)
