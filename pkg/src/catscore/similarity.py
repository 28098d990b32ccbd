"""Heading similarity providers and embedding sources.

Every provider maps a pair of heading strings to a score in [0, 1].
Scores are memoized per normalized text pair and equal headings short
circuit to 1.0, so the edit-distance layer can ask for the same pair
as often as it likes.
"""

from __future__ import annotations

import json
import math
import threading
import time
from abc import ABC, abstractmethod
from collections import Counter
from pathlib import Path
from typing import Protocol

import requests

from .tokens import normalize, tokenize


class ProviderError(RuntimeError):
    """Base class for similarity and embedding failures."""


class EmptyText(ProviderError):
    """A provider that needs tokens was given a heading without any."""


class MissingEmbedding(ProviderError):
    """An embedding file has no vector for the requested text."""


class ServiceError(ProviderError):
    """The embedding service failed after all retries."""


def _dot(a: list[float], b: list[float]) -> float:
    return sum(x * y for x, y in zip(a, b))


def _norm(a: list[float]) -> float:
    return math.sqrt(sum(x * x for x in a))


def cosine(a: list[float], b: list[float]) -> float:
    """Cosine of two vectors, clamped into [0, 1]."""
    na, nb = _norm(a), _norm(b)
    if na == 0.0 or nb == 0.0:
        raise ProviderError("zero-norm embedding vector")
    return min(1.0, max(0.0, _dot(a, b) / (na * nb)))


class SimilarityProvider(ABC):
    """Base provider: normalization, identity shortcut, memo cache.

    Subclasses implement :meth:`_score` over normalized text and may
    override :meth:`_check` to reject degenerate inputs before the
    identity shortcut applies.
    """

    def __init__(self) -> None:
        self._cache: dict[tuple[str, str], float] = {}
        self._lock = threading.Lock()

    def similarity(self, a: str, b: str) -> float:
        na, nb = normalize(a), normalize(b)
        self._check(na, nb)
        if na == nb:
            return 1.0
        key = (na, nb) if na <= nb else (nb, na)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        score = min(1.0, max(0.0, self._score(na, nb)))
        with self._lock:
            self._cache[key] = score
        return score

    def prepare(self, texts: list[str]) -> None:
        """Optional warm-up hook; providers backed by a service batch here."""

    def _check(self, na: str, nb: str) -> None:
        pass

    @abstractmethod
    def _score(self, na: str, nb: str) -> float:
        ...


class LexicalSimilarity(SimilarityProvider):
    """Token-multiset F1. Needs no embeddings and no configuration."""

    def _score(self, na: str, nb: str) -> float:
        ta, tb = tokenize(na), tokenize(nb)
        if not ta or not tb:
            return 0.0
        overlap = sum((Counter(ta) & Counter(tb)).values())
        if overlap == 0:
            return 0.0
        return 2.0 * overlap / (len(ta) + len(tb))


class ItemEmbeddingSource(Protocol):
    """Whole-heading vectors."""

    def vector(self, text: str) -> list[float]: ...

    def prefetch(self, texts: list[str]) -> None: ...


class TokenEmbeddingSource(Protocol):
    """Per-token vectors for one heading."""

    def token_vectors(self, text: str) -> tuple[list[str], list[list[float]]]: ...

    def prefetch_tokens(self, texts: list[str]) -> None: ...


class CosineItemSimilarity(SimilarityProvider):
    """Cosine over one embedding per heading."""

    def __init__(self, source: ItemEmbeddingSource) -> None:
        super().__init__()
        self._source = source

    def prepare(self, texts: list[str]) -> None:
        self._source.prefetch([normalize(t) for t in texts])

    def _score(self, na: str, nb: str) -> float:
        return cosine(self._source.vector(na), self._source.vector(nb))


class GreedyTokenMatchSimilarity(SimilarityProvider):
    """Greedy token alignment over contextual token vectors.

    Precision averages, over the first heading's tokens, each token's
    best cosine against the other side; recall mirrors it; the score is
    their harmonic mean. Headings with no tokens are rejected because
    there is nothing to align.
    """

    def __init__(self, source: TokenEmbeddingSource) -> None:
        super().__init__()
        self._source = source

    def prepare(self, texts: list[str]) -> None:
        self._source.prefetch_tokens([normalize(t) for t in texts])

    def _check(self, na: str, nb: str) -> None:
        if not na or not nb:
            raise EmptyText("token matching needs at least one token per heading")

    def _score(self, na: str, nb: str) -> float:
        _, va = self._source.token_vectors(na)
        _, vb = self._source.token_vectors(nb)
        if not va or not vb:
            raise EmptyText("embedding source returned no tokens")
        precision = sum(max(cosine(x, y) for y in vb) for x in va) / len(va)
        recall = sum(max(cosine(x, y) for x in va) for y in vb) / len(vb)
        if precision + recall == 0.0:
            return 0.0
        return 2.0 * precision * recall / (precision + recall)


class FileEmbeddingSource:
    """Vectors preloaded from a JSON-lines file.

    Each line is an object with ``text`` and ``vector`` fields. Texts are
    normalized at load, so lookups are insensitive to case, surrounding
    punctuation, and spacing. The same file can serve whole headings and
    single tokens; a token is just a one-word text.
    """

    def __init__(self, vectors: dict[str, list[float]]) -> None:
        self._by_text = dict(vectors)

    @classmethod
    def from_path(cls, path: str | Path) -> "FileEmbeddingSource":
        by_text: dict[str, list[float]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    key = normalize(record["text"])
                    vec = [float(x) for x in record["vector"]]
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise ProviderError(f"{path}:{lineno}: bad embedding record: {exc}") from exc
                by_text[key] = vec
        return cls(by_text)

    def vector(self, text: str) -> list[float]:
        key = normalize(text)
        try:
            return self._by_text[key]
        except KeyError:
            raise MissingEmbedding(f"no embedding for {key!r}") from None

    def prefetch(self, texts: list[str]) -> None:
        pass

    def token_vectors(self, text: str) -> tuple[list[str], list[list[float]]]:
        toks = tokenize(text)
        return toks, [self.vector(t) for t in toks]

    def prefetch_tokens(self, texts: list[str]) -> None:
        pass


class ServiceEmbeddingSource:
    """Vectors fetched over HTTP from an embedding service.

    ``POST {base_url}/embed`` with ``{"texts": [...]}`` returns
    ``{"vectors": [[...]]}``; ``POST {base_url}/embed_tokens`` returns
    ``{"tokens": [[...]], "vectors": [[[...]]]}`` with the service's own
    tokenization. Transport failures and 5xx responses are retried with
    exponential backoff; other HTTP errors fail immediately. Responses
    are cached, and concurrent callers are throttled to ``max_in_flight``
    requests at a time.
    """

    def __init__(self, base_url: str, *, timeout: float = 10.0, retries: int = 2,
                 backoff: float = 0.25, max_in_flight: int = 4,
                 session: requests.Session | None = None) -> None:
        self._base = base_url.rstrip("/")
        self._timeout = timeout
        self._retries = retries
        self._backoff = backoff
        self._gate = threading.BoundedSemaphore(max_in_flight)
        self._session = session or requests.Session()
        self._items: dict[str, list[float]] = {}
        self._tokens: dict[str, tuple[list[str], list[list[float]]]] = {}
        self._lock = threading.Lock()

    def _post(self, endpoint: str, payload: dict) -> dict:
        last: Exception | None = None
        for attempt in range(self._retries + 1):
            if attempt:
                time.sleep(self._backoff * (2 ** (attempt - 1)))
            try:
                with self._gate:
                    resp = self._session.post(f"{self._base}/{endpoint}",
                                              json=payload, timeout=self._timeout)
            except requests.RequestException as exc:
                last = exc
                continue
            if resp.status_code >= 500:
                last = ServiceError(f"{endpoint}: server returned {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise ServiceError(f"{endpoint}: server returned {resp.status_code}")
            try:
                return resp.json()
            except ValueError as exc:
                raise ServiceError(f"{endpoint}: response is not JSON") from exc
        raise ServiceError(f"{endpoint}: giving up after {self._retries + 1} attempts: {last}")

    def prefetch(self, texts: list[str]) -> None:
        keys = [normalize(t) for t in texts]
        with self._lock:
            missing = sorted({k for k in keys if k not in self._items})
        if not missing:
            return
        body = self._post("embed", {"texts": missing})
        try:
            vectors = [[float(x) for x in vec] for vec in body["vectors"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ServiceError(f"embed: malformed response: {exc}") from exc
        if len(vectors) != len(missing):
            raise ServiceError(f"embed: sent {len(missing)} texts, got {len(vectors)} vectors")
        with self._lock:
            self._items.update(zip(missing, vectors))

    def vector(self, text: str) -> list[float]:
        key = normalize(text)
        with self._lock:
            hit = self._items.get(key)
        if hit is not None:
            return hit
        self.prefetch([key])
        with self._lock:
            return self._items[key]

    def prefetch_tokens(self, texts: list[str]) -> None:
        keys = [normalize(t) for t in texts]
        with self._lock:
            missing = sorted({k for k in keys if k not in self._tokens})
        if not missing:
            return
        body = self._post("embed_tokens", {"texts": missing})
        try:
            tokens = [[str(t) for t in row] for row in body["tokens"]]
            vectors = [[[float(x) for x in vec] for vec in row] for row in body["vectors"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ServiceError(f"embed_tokens: malformed response: {exc}") from exc
        if len(tokens) != len(missing) or len(vectors) != len(missing):
            raise ServiceError("embed_tokens: response length mismatch")
        with self._lock:
            for key, tok, vec in zip(missing, tokens, vectors):
                if len(tok) != len(vec):
                    raise ServiceError(f"embed_tokens: {len(tok)} tokens but {len(vec)} vectors for {key!r}")
                self._tokens[key] = (tok, vec)

    def token_vectors(self, text: str) -> tuple[list[str], list[list[float]]]:
        key = normalize(text)
        with self._lock:
            hit = self._tokens.get(key)
        if hit is not None:
            return hit
        self.prefetch_tokens([key])
        with self._lock:
            return self._tokens[key]
