import json
import math
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from catscore.similarity import (CosineItemSimilarity, EmptyText,
                                 FileEmbeddingSource, GreedyTokenMatchSimilarity,
                                 LexicalSimilarity, MissingEmbedding,
                                 ProviderError, ServiceEmbeddingSource,
                                 ServiceError, cosine)


def test_cosine_basic_and_clamping():
    assert cosine([1.0, 0.0], [1.0, 1.0]) == pytest.approx(1.0 / math.sqrt(2))
    assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0
    assert cosine([1.0, 0.0], [-1.0, 0.0]) == 0.0  # negative clamps to zero
    with pytest.raises(ProviderError):
        cosine([0.0, 0.0], [1.0, 0.0])


class TestLexical:
    def test_multiset_f1(self):
        prov = LexicalSimilarity()
        value = prov.similarity("neural machine translation", "machine translation")
        assert value == pytest.approx(0.8)

    def test_identity_shortcut_ignores_case_and_punctuation(self):
        prov = LexicalSimilarity()
        assert prov.similarity("Related Work:", "related work") == 1.0

    def test_disjoint_and_empty(self):
        prov = LexicalSimilarity()
        assert prov.similarity("alpha", "beta") == 0.0
        assert prov.similarity("", "") == 1.0  # equal after normalization
        assert prov.similarity("alpha", "") == 0.0

    def test_repeated_tokens_use_multiset_counts(self):
        prov = LexicalSimilarity()
        # one shared "data" out of 2 and 1 tokens
        assert prov.similarity("data data", "data") == pytest.approx(2 / 3)

    def test_symmetric_and_cached(self):
        prov = LexicalSimilarity()
        a = prov.similarity("data analysis", "analysis of data")
        b = prov.similarity("analysis of data", "data analysis")
        assert a == b
        assert len(prov._cache) == 1


@pytest.fixture
def embedding_file(tmp_path):
    rows = [
        {"text": "alpha", "vector": [1.0, 0.0]},
        {"text": "beta", "vector": [1.0, 1.0]},
        {"text": "gamma", "vector": [0.0, 1.0]},
        {"text": "alpha beta", "vector": [2.0, 0.5]},
    ]
    path = tmp_path / "vectors.jsonl"
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    return path


class TestFileSource:
    def test_lookup_is_normalized(self, embedding_file):
        source = FileEmbeddingSource.from_path(embedding_file)
        assert source.vector("  ALPHA! ") == [1.0, 0.0]

    def test_missing_text_raises(self, embedding_file):
        source = FileEmbeddingSource.from_path(embedding_file)
        with pytest.raises(MissingEmbedding):
            source.vector("delta")

    def test_bad_record_raises_with_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"text": "x", "vector": [1.0]}\n{"nope": 1}\n')
        with pytest.raises(ProviderError, match="bad.jsonl:2"):
            FileEmbeddingSource.from_path(path)

    def test_token_vectors_tokenize_the_text(self, embedding_file):
        source = FileEmbeddingSource.from_path(embedding_file)
        toks, vecs = source.token_vectors("Alpha gamma")
        assert toks == ["alpha", "gamma"]
        assert vecs == [[1.0, 0.0], [0.0, 1.0]]


class TestCosineProvider:
    def test_score(self, embedding_file):
        prov = CosineItemSimilarity(FileEmbeddingSource.from_path(embedding_file))
        assert prov.similarity("alpha", "beta") == pytest.approx(1.0 / math.sqrt(2))

    def test_orthogonal(self, embedding_file):
        prov = CosineItemSimilarity(FileEmbeddingSource.from_path(embedding_file))
        assert prov.similarity("alpha", "gamma") == 0.0

    def test_missing_embedding_surfaces(self, embedding_file):
        prov = CosineItemSimilarity(FileEmbeddingSource.from_path(embedding_file))
        with pytest.raises(MissingEmbedding):
            prov.similarity("alpha", "delta")


class TestGreedyProvider:
    def test_partial_match_f1(self, embedding_file):
        # candidate {alpha} vs {alpha, gamma}: precision 1, recall (1+0)/2
        prov = GreedyTokenMatchSimilarity(FileEmbeddingSource.from_path(embedding_file))
        assert prov.similarity("alpha", "alpha gamma") == pytest.approx(2 / 3)

    def test_empty_text_rejected_even_when_equal(self, embedding_file):
        prov = GreedyTokenMatchSimilarity(FileEmbeddingSource.from_path(embedding_file))
        with pytest.raises(EmptyText):
            prov.similarity("", "")
        with pytest.raises(EmptyText):
            prov.similarity("...", "alpha")


class _Service(BaseHTTPRequestHandler):
    """Embedding stub: vectors derive from token text; optional failures."""

    fail_remaining = 0

    def do_POST(self):  # noqa: N802  (http.server API name)
        cls = type(self)
        length = int(self.headers["Content-Length"])
        payload = json.loads(self.rfile.read(length))
        if cls.fail_remaining > 0:
            cls.fail_remaining -= 1
            self.send_response(500)
            self.end_headers()
            return
        texts = payload["texts"]
        if self.path == "/embed":
            body = {"vectors": [self._vec(t) for t in texts]}
        elif self.path == "/embed_tokens":
            token_lists = [t.split() for t in texts]
            body = {"tokens": token_lists,
                    "vectors": [[self._vec(tok) for tok in toks] for toks in token_lists]}
        else:
            self.send_response(404)
            self.end_headers()
            return
        data = json.dumps(body).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    @staticmethod
    def _vec(text: str) -> list[float]:
        h = sum(ord(c) for c in text)
        return [1.0 + (h % 7), 1.0 + (h % 11), 1.0 + (h % 13)]

    def log_message(self, *args):
        pass


@pytest.fixture
def service_url():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Service)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _Service.fail_remaining = 0
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}"
    finally:
        server.shutdown()
        thread.join()


class TestServiceSource:
    def test_item_vectors_and_cache(self, service_url):
        source = ServiceEmbeddingSource(service_url)
        vec = source.vector("alpha")
        assert vec == _Service._vec("alpha")
        source.prefetch(["alpha"])  # cached: no further request needed
        assert source.vector("alpha") == vec

    def test_token_vectors_use_service_tokenization(self, service_url):
        source = ServiceEmbeddingSource(service_url)
        toks, vecs = source.token_vectors("alpha beta")
        assert toks == ["alpha", "beta"]
        assert vecs == [_Service._vec("alpha"), _Service._vec("beta")]

    def test_retries_after_server_errors(self, service_url):
        _Service.fail_remaining = 2
        source = ServiceEmbeddingSource(service_url, retries=2, backoff=0.01)
        assert source.vector("alpha") == _Service._vec("alpha")

    def test_gives_up_after_retry_budget(self, service_url):
        _Service.fail_remaining = 5
        source = ServiceEmbeddingSource(service_url, retries=1, backoff=0.01)
        with pytest.raises(ServiceError, match="giving up"):
            source.vector("alpha")

    def test_connection_failure_is_service_error(self):
        source = ServiceEmbeddingSource("http://127.0.0.1:9", retries=0, backoff=0.01)
        with pytest.raises(ServiceError):
            source.vector("alpha")

    def test_cosine_provider_over_service(self, service_url):
        prov = CosineItemSimilarity(ServiceEmbeddingSource(service_url))
        prov.prepare(["alpha", "beta"])
        expected = cosine(_Service._vec("alpha"), _Service._vec("beta"))
        assert prov.similarity("alpha", "beta") == pytest.approx(expected)

    def test_greedy_provider_over_service(self, service_url):
        prov = GreedyTokenMatchSimilarity(ServiceEmbeddingSource(service_url))
        value = prov.similarity("alpha beta", "alpha gamma")
        assert 0.0 < value <= 1.0


def test_providers_clamp_scores_into_unit_interval():
    class Wild(LexicalSimilarity):
        def _score(self, na, nb):
            return 3.5

    assert Wild().similarity("a", "b") == 1.0
