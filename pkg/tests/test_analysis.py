import random

import pytest
from conftest import TableSimilarity, random_catalogue, write_jsonl

from catscore import (AggregateReport, Catalogue, CostTable, DegenerateInput,
                      LexicalSimilarity, MissingId, load_corpus,
                      load_system_outputs, parse_catalogue, pearson,
                      score_corpus, score_pair)
from catscore.similarity import SimilarityProvider
from catscore.textmetrics import cqe


class FixedSimilarity(SimilarityProvider):
    """Looks pairs up in a dict keyed by frozenset of normalized texts."""

    def __init__(self, table, default=0.0):
        super().__init__()
        self._table = {frozenset(k): v for k, v in table.items()}
        self._default = default

    def _score(self, na, nb):
        return self._table.get(frozenset((na, nb)), self._default)


class TestScorePair:
    def test_identical_catalogues(self):
        cat = Catalogue.from_pairs([
            (1, "introduction"), (2, "methods"), (1, "conclusion")])
        report = score_pair(cat, cat, provider=LexicalSimilarity())
        assert report.ced == 0.0
        assert report.ceds == 100.0
        assert report.similarity_total == 1.0
        assert report.cqe == cqe(cat)
        for level in ("L1", "L2", "L3", "Total"):
            for kind in ("R1", "R2", "RL"):
                assert report.rouge[level][kind].f1 == 1.0
        assert report.item_count_system == report.item_count_reference == 3

    def test_empty_system(self):
        reference = Catalogue.from_pairs([(1, "a"), (2, "b"), (1, "c")])
        report = score_pair(Catalogue(), reference)
        assert report.ced == 3.0
        assert report.ceds == 0.0
        assert report.rouge["Total"]["R1"].f1 == 0.0
        assert report.cqe == 0.0
        assert report.item_count_system == 0

    def test_single_rename_cost(self):
        a = Catalogue.from_pairs([(1, "alpha")])
        b = Catalogue.from_pairs([(1, "beta")])
        provider = FixedSimilarity({("alpha", "beta"): 0.8})
        report = score_pair(a, b, provider=provider)
        assert report.ced == pytest.approx(0.24)
        assert report.ceds == pytest.approx(76.0)

    def test_published_pair_through_cost_table(self, nmt_paths):
        system_path, reference_path, costs_path = nmt_paths
        system, _ = parse_catalogue(system_path.read_text())
        reference, _ = parse_catalogue(reference_path.read_text())
        report = score_pair(system, reference,
                            cost_table=CostTable.from_path(costs_path),
                            pair_id="nmt")
        assert report.id == "nmt"
        assert report.ced == pytest.approx(12.99)
        assert report.ceds == pytest.approx(38.142857, abs=1e-6)
        assert report.item_count_system == 12
        assert report.item_count_reference == 21

    def test_stemming_affects_rouge_only(self):
        system = Catalogue.from_pairs([(1, "adaptations method")])
        reference = Catalogue.from_pairs([(1, "adaptation methods")])
        plain = score_pair(system, reference)
        stemmed = score_pair(system, reference, stem=True)
        assert plain.rouge["Total"]["R1"].f1 == 0.0
        assert stemmed.rouge["Total"]["R1"].f1 == 1.0
        assert plain.ced == stemmed.ced
        assert plain.cqe == stemmed.cqe

    def test_lexical_provider_is_the_default(self):
        a = Catalogue.from_pairs([(1, "alpha beta")])
        b = Catalogue.from_pairs([(1, "alpha gamma")])
        implicit = score_pair(a, b)
        explicit = score_pair(a, b, provider=LexicalSimilarity())
        assert implicit == explicit
        assert implicit.similarity_total == 0.5

    def test_similarity_total_matches_provider_on_full_text(self):
        system = Catalogue.from_pairs([(1, "alpha"), (2, "beta")])
        reference = Catalogue.from_pairs([(1, "alpha gamma")])
        provider = LexicalSimilarity()
        report = score_pair(system, reference, provider=provider)
        assert report.similarity_total == pytest.approx(
            provider.similarity("alpha beta", "alpha gamma"))

    def test_cqe_unit_forwarded(self):
        system = Catalogue.from_pairs([
            (1, "introduction"), (1, "neural machine translation")])
        reference = Catalogue.from_pairs([(1, "x")])
        by_tokens = score_pair(system, reference)
        by_items = score_pair(system, reference, cqe_unit="items")
        assert by_tokens.cqe == pytest.approx(25.0)
        assert by_items.cqe == 50.0


class TestAggregate:
    def test_mean_of_copies_is_the_single_report(self):
        a = Catalogue.from_pairs([(1, "alpha"), (1, "introduction")])
        b = Catalogue.from_pairs([(1, "alpha"), (1, "beta")])
        report = score_pair(a, b, provider=LexicalSimilarity())
        agg = AggregateReport.from_reports([report] * 4)
        assert agg.pairs == 4
        assert agg.ceds == pytest.approx(report.ceds)
        assert agg.ced == pytest.approx(report.ced)
        assert agg.cqe == pytest.approx(report.cqe)
        assert agg.similarity_total == pytest.approx(report.similarity_total)
        for level, kinds in report.rouge.items():
            for kind, cell in kinds.items():
                assert agg.rouge[level][kind].f1 == pytest.approx(cell.f1)

    def test_componentwise_means(self):
        r1 = score_pair(Catalogue.from_pairs([(1, "a")]),
                        Catalogue.from_pairs([(1, "a")]))
        r2 = score_pair(Catalogue(),
                        Catalogue.from_pairs([(1, "a")]))
        agg = AggregateReport.from_reports([r1, r2])
        assert agg.ceds == pytest.approx((100.0 + 0.0) / 2)
        assert agg.rouge["Total"]["R1"].f1 == pytest.approx(0.5)
        assert agg.rouge["Total"]["R1"].precision == pytest.approx(0.5)

    def test_zero_reports_rejected(self):
        with pytest.raises(DegenerateInput):
            AggregateReport.from_reports([])


class TestScoreCorpus:
    def test_join_and_ordering(self, corpus_file, system_file):
        records = load_corpus(corpus_file)
        entries = list(reversed(load_system_outputs(system_file)))
        reports, agg = score_corpus(entries, records)
        assert [r.id for r in reports] == ["survey-a", "survey-b"]
        assert agg.pairs == 2
        # survey-b's system output matches its reference exactly
        assert reports[1].ceds == 100.0
        assert reports[0].ceds < 100.0
        assert agg.ceds == pytest.approx((reports[0].ceds + reports[1].ceds) / 2)

    def test_missing_id_lists_sorted_ids(self, corpus_file, tmp_path):
        records = load_corpus(corpus_file)
        rows = [{"id": "zzz", "catalogue": "<l1> a"},
                {"id": "aaa", "catalogue": "<l1> b"}]
        entries = load_system_outputs(write_jsonl(tmp_path / "sys.jsonl", rows))
        with pytest.raises(MissingId, match="aaa, zzz"):
            score_corpus(entries, records)

    def test_parallel_matches_serial(self, corpus_file, system_file):
        records = load_corpus(corpus_file)
        entries = load_system_outputs(system_file)
        serial, agg_s = score_corpus(entries, records, jobs=1)
        parallel, agg_p = score_corpus(entries, records, jobs=4)
        assert serial == parallel
        assert agg_s == agg_p

    def test_provider_threaded_through(self, corpus_file, system_file):
        records = load_corpus(corpus_file)
        entries = load_system_outputs(system_file)
        reports, _ = score_corpus(entries, records, provider=LexicalSimilarity())
        assert reports[1].similarity_total == 1.0
        assert 0.0 < reports[0].similarity_total < 1.0


class TestPearson:
    def test_textbook_triple(self):
        result = pearson([1.0, 2.0, 3.0], [1.0, 2.0, 4.0])
        assert result.r == pytest.approx(0.98198, abs=1e-5)
        assert result.p == pytest.approx(0.1210, abs=1e-3)
        assert result.n == 3

    def test_perfect_lines(self):
        up = pearson([1.0, 2.0, 3.0], [2.0, 4.0, 6.0])
        assert (up.r, up.p) == (1.0, 0.0)
        down = pearson([1.0, 2.0, 3.0], [3.0, 2.0, 1.0])
        assert (down.r, down.p) == (-1.0, 0.0)

    def test_affine_invariance(self):
        xs = [1.0, 4.0, 2.0, 8.0, 5.0]
        ys = [2.0, 1.0, 7.0, 3.0, 9.0]
        base = pearson(xs, ys)
        shifted = pearson([3.0 * x - 7.0 for x in xs], ys)
        assert shifted.r == pytest.approx(base.r)
        assert shifted.p == pytest.approx(base.p)
        flipped = pearson([-x for x in xs], ys)
        assert flipped.r == pytest.approx(-base.r)
        assert flipped.p == pytest.approx(base.p)

    def test_near_perfect_longer_series_is_significant(self):
        xs = [float(i) for i in range(9)]
        ys = [x + 0.01 * ((-1) ** i) for i, x in enumerate(xs)]
        result = pearson(xs, ys)
        assert result.r > 0.999
        assert result.p < 0.001

    def test_degenerate_inputs(self):
        with pytest.raises(DegenerateInput):
            pearson([1.0, 2.0], [1.0, 2.0])
        with pytest.raises(DegenerateInput):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
        with pytest.raises(DegenerateInput):
            pearson([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])
        with pytest.raises(DegenerateInput):
            pearson([1.0, 2.0, 3.0], [1.0, 2.0])

    def test_matches_scipy_on_random_series(self):
        from scipy.stats import pearsonr
        rng = random.Random(11)
        for _ in range(50):
            n = rng.randint(3, 30)
            xs = [rng.uniform(-5, 5) for _ in range(n)]
            ys = [rng.uniform(-5, 5) for _ in range(n)]
            ours = pearson(xs, ys)
            theirs = pearsonr(xs, ys)
            assert ours.r == pytest.approx(theirs.statistic, abs=1e-9)
            assert ours.p == pytest.approx(theirs.pvalue, abs=1e-8)

    def test_r_always_in_range(self):
        rng = random.Random(12)
        for _ in range(100):
            n = rng.randint(3, 8)
            xs = [rng.uniform(0, 1) for _ in range(n)]
            ys = [x * 1e-12 + rng.uniform(0, 1e-14) for x in xs]
            try:
                result = pearson(xs, ys)
            except DegenerateInput:
                continue
            assert -1.0 <= result.r <= 1.0
            assert 0.0 <= result.p <= 1.0


def test_metric_consistency_wiring():
    """CEDS and Total R1 F1 correlate positively over noisy variants."""
    rng = random.Random(77)
    provider = TableSimilarity(5)
    reference = random_catalogue(rng, max_items=8)
    while len(reference) < 6:
        reference = random_catalogue(rng, max_items=8)
    ceds_series, rouge_series = [], []
    for keep in range(1, len(reference) + 1):
        system = Catalogue.from_pairs(
            [(item.level, item.text) for item in list(reference)[:keep]])
        report = score_pair(system, reference, provider=provider)
        ceds_series.append(report.ceds)
        rouge_series.append(report.rouge["Total"]["R1"].f1)
    result = pearson(ceds_series, rouge_series)
    assert result.n >= 3
    assert result.r > 0.5
