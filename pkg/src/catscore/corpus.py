"""Corpus records: loading, construction filters, descriptive statistics.

A corpus is a JSON-lines file, one record per line:

    {"id": ..., "title": ..., "domain": ...?, "references":
     [{"title": ..., "abstract": ...}, ...], "catalogue": "<l1> ..."}

System outputs for scoring carry just ``{"id", "catalogue"}``. Statistics
here are descriptive means over whatever records they are given; the
construction filters are a separate, explicit step.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path

from .catalogue import Catalogue, ValidationIssue, parse_catalogue, slice_level, strip_level_marks
from .textmetrics import TemplateLexicon, cqe, novel_ngram_ratio, rouge_l, rouge_n
from .tokens import tokenize

MIN_ITEMS = 5
MIN_VALID_REFS = 10
ABSTRACT_WORD_LIMIT = 256

ROUGE_LEVELS = ("L1", "L2", "L3", "Total")


class ParseError(Exception):
    """A corpus or system file could not be read as records."""


class DuplicateId(ParseError):
    """Two records in one file share an id."""


class EmptyCorpus(Exception):
    """Statistics were requested over zero records."""


@dataclass(frozen=True)
class Reference:
    title: str
    abstract: str

    def is_valid(self) -> bool:
        return bool(self.title.strip()) and bool(self.abstract.strip())


@dataclass(frozen=True)
class ReviewRecord:
    id: str
    title: str
    references: tuple[Reference, ...]
    catalogue: Catalogue
    domain: str | None = None
    issues: tuple[ValidationIssue, ...] = ()

    def input_text(self) -> str:
        """Title plus all abstracts, the source side of the task."""
        return " ".join([self.title, *(ref.abstract for ref in self.references)])


@dataclass(frozen=True)
class SystemEntry:
    id: str
    catalogue: Catalogue
    issues: tuple[ValidationIssue, ...] = ()


def truncate_abstract(text: str, limit: int = ABSTRACT_WORD_LIMIT) -> str:
    """Cap an abstract at ``limit`` whitespace-separated words."""
    if limit < 1:
        raise ValueError("limit must be at least 1")
    words = text.split()
    if len(words) <= limit:
        return text
    return " ".join(words[:limit])


def _iter_jsonl(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            if not isinstance(doc, dict):
                raise ParseError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, doc


def load_corpus(path: str | Path) -> list[ReviewRecord]:
    """Read review records; abstracts are truncated and text lowercased."""
    records: list[ReviewRecord] = []
    seen: dict[str, int] = {}
    for lineno, doc in _iter_jsonl(path):
        try:
            rec_id = str(doc["id"])
            title = str(doc["title"]).lower()
            refs = tuple(
                Reference(title=str(r["title"]).lower(),
                          abstract=truncate_abstract(str(r["abstract"]).lower()))
                for r in doc["references"]
            )
            raw_catalogue = str(doc["catalogue"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{path}:{lineno}: missing or malformed field: {exc}") from exc
        if rec_id in seen:
            raise DuplicateId(f"{path}:{lineno}: id {rec_id!r} already used on line {seen[rec_id]}")
        seen[rec_id] = lineno
        catalogue, issues = parse_catalogue(raw_catalogue)
        domain = doc.get("domain")
        records.append(ReviewRecord(
            id=rec_id, title=title, references=refs, catalogue=catalogue,
            domain=str(domain).lower() if domain is not None else None,
            issues=tuple(issues)))
    return records


def load_system_outputs(path: str | Path) -> list[SystemEntry]:
    """Read ``{"id", "catalogue"}`` lines produced by a system under test."""
    entries: list[SystemEntry] = []
    seen: dict[str, int] = {}
    for lineno, doc in _iter_jsonl(path):
        try:
            rec_id = str(doc["id"])
            raw_catalogue = str(doc["catalogue"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{path}:{lineno}: missing or malformed field: {exc}") from exc
        if rec_id in seen:
            raise DuplicateId(f"{path}:{lineno}: id {rec_id!r} already used on line {seen[rec_id]}")
        seen[rec_id] = lineno
        catalogue, issues = parse_catalogue(raw_catalogue)
        entries.append(SystemEntry(id=rec_id, catalogue=catalogue, issues=tuple(issues)))
    return entries


@dataclass(frozen=True)
class FilterResult:
    record: ReviewRecord | None
    reason: str | None = None

    @property
    def kept(self) -> bool:
        return self.record is not None


def apply_filters(record: ReviewRecord) -> FilterResult:
    """Keep records with enough structure to learn from.

    Records need at least 5 catalogue items and 10 valid references (a
    reference is valid when both title and abstract are non-empty). Kept
    records come back with the invalid references removed, which makes a
    second application a no-op.
    """
    if len(record.catalogue) < MIN_ITEMS:
        return FilterResult(None, "TooFewItems")
    valid = tuple(ref for ref in record.references if ref.is_valid())
    if len(valid) < MIN_VALID_REFS:
        return FilterResult(None, "TooFewRefs")
    if len(valid) == len(record.references):
        return FilterResult(record)
    return FilterResult(ReviewRecord(
        id=record.id, title=record.title, references=valid,
        catalogue=record.catalogue, domain=record.domain, issues=record.issues))


def deterministic_split(record_id: str) -> str:
    """Stable 80/10/10 bucket for a record id: train, val or test."""
    digest = hashlib.sha256(record_id.encode("utf-8")).digest()
    bucket = digest[0] % 10
    if bucket < 8:
        return "train"
    return "val" if bucket == 8 else "test"


_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")


def count_sentences(text: str) -> int:
    """Terminator-based sentence count: '.', '!' or '?' before whitespace
    ends a sentence. Crude but deterministic; treat the resulting means
    as splitter-dependent."""
    if not text.strip():
        return 0
    return sum(1 for chunk in _SENTENCE_SPLIT.split(text) if chunk.strip())


@dataclass(frozen=True)
class CorpusStats:
    """Descriptive means over a set of records (unweighted per record)."""

    pairs: int
    refs_mean: float
    input_sentences_mean: float
    input_words_mean: float
    output_items_mean: float
    output_words_mean: float
    level_items_mean: dict[int, float]
    level_words_mean: dict[int, float]
    novel_ngrams: dict[int, float]
    level_rouge: "LevelMatrix"
    oracle_cqe_mean: float


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def _level_tokens(catalogue: Catalogue, level_key: str) -> list[str]:
    if level_key == "Total":
        return strip_level_marks(catalogue)
    return strip_level_marks(slice_level(catalogue, int(level_key[1])))


LevelMatrix = dict[str, dict[str, dict[str, float] | None]]


def level_rouge_matrix(records: list[ReviewRecord]) -> LevelMatrix:
    """Mean pairwise overlap between heading levels of the reference
    catalogues: rows L1/L2/L3/Total against columns L1/L2/L3, each cell
    the mean R1/R2/RL F1. Same-level cells are left out (trivially
    perfect), and the off-diagonal block is exactly symmetric because F1
    ignores argument order."""
    if not records:
        raise EmptyCorpus("no records to compare levels over")
    sums: dict[tuple[str, str], dict[str, list[float]]] = {}
    for record in records:
        streams = {key: _level_tokens(record.catalogue, key) for key in ROUGE_LEVELS}
        for row in ROUGE_LEVELS:
            for col in ("L1", "L2", "L3"):
                if row == col:
                    continue
                cell = sums.setdefault((row, col), {"R1": [], "R2": [], "RL": []})
                cell["R1"].append(rouge_n(streams[row], streams[col], 1).f1)
                cell["R2"].append(rouge_n(streams[row], streams[col], 2).f1)
                cell["RL"].append(rouge_l(streams[row], streams[col]).f1)
    matrix: LevelMatrix = {}
    for row in ROUGE_LEVELS:
        matrix[row] = {}
        for col in ("L1", "L2", "L3"):
            if row == col:
                matrix[row][col] = None
            else:
                matrix[row][col] = {kind: _mean(vals)
                                    for kind, vals in sums[(row, col)].items()}
    return matrix


def corpus_stats(records: list[ReviewRecord],
                 lexicon: TemplateLexicon | None = None) -> CorpusStats:
    """Size, shape, novelty and boilerplate means for a corpus."""
    if not records:
        raise EmptyCorpus("no records to summarize")
    if lexicon is None:
        lexicon = TemplateLexicon.default()

    refs: list[float] = []
    in_sentences: list[float] = []
    in_words: list[float] = []
    out_items: list[float] = []
    out_words: list[float] = []
    per_level_items: dict[int, list[float]] = {1: [], 2: [], 3: []}
    per_level_words: dict[int, list[float]] = {1: [], 2: [], 3: []}
    novel: dict[int, list[float]] = {1: [], 2: [], 3: [], 4: []}
    cqes: list[float] = []

    for record in records:
        text = record.input_text()
        refs.append(float(len(record.references)))
        in_sentences.append(float(count_sentences(text)))
        in_words.append(float(len(text.split())))
        out_items.append(float(len(record.catalogue)))
        stripped = strip_level_marks(record.catalogue)
        out_words.append(float(len(stripped)))
        for level in (1, 2, 3):
            items = [item for item in record.catalogue if item.level == level]
            per_level_items[level].append(float(len(items)))
            if items:
                per_level_words[level].append(
                    _mean([float(len(item.tokens())) for item in items]))
        source = tokenize(text)
        for n in (1, 2, 3, 4):
            novel[n].append(novel_ngram_ratio(source, stripped, n))
        cqes.append(cqe(record.catalogue, lexicon))

    return CorpusStats(
        pairs=len(records),
        refs_mean=_mean(refs),
        input_sentences_mean=_mean(in_sentences),
        input_words_mean=_mean(in_words),
        output_items_mean=_mean(out_items),
        output_words_mean=_mean(out_words),
        level_items_mean={lv: _mean(vals) for lv, vals in per_level_items.items()},
        level_words_mean={lv: _mean(vals) for lv, vals in per_level_words.items()},
        novel_ngrams={n: _mean(vals) for n, vals in novel.items()},
        level_rouge=level_rouge_matrix(records),
        oracle_cqe_mean=_mean(cqes),
    )
