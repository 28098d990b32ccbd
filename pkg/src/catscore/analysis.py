"""Pair and corpus scoring, plus metric-consistency statistics.

`score_pair` bundles every metric for one system/reference pair into a
:class:`MetricReport`; `score_corpus` joins system outputs to reference
records by id and aggregates. `pearson` measures how strongly two metric
series agree, with a two-tailed significance test.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from scipy.special import betainc

from .catalogue import Catalogue, slice_level, strip_level_marks
from .ced import CostConfig, CostTable, catalogue_edit_distance, ceds_from_distance
from .corpus import ReviewRecord, SystemEntry
from .porter import stem_all
from .similarity import LexicalSimilarity, SimilarityProvider
from .textmetrics import RougeScore, TemplateLexicon, cqe, rouge_l, rouge_n

ROUGE_LEVELS = ("L1", "L2", "L3", "Total")
ROUGE_KINDS = ("R1", "R2", "RL")


class MissingId(Exception):
    """A system output has no matching record in the reference corpus."""


class DegenerateInput(Exception):
    """Correlation over too few points or a constant series."""


@dataclass(frozen=True)
class MetricReport:
    """Every metric for one system/reference pair.

    ``rouge`` maps level (L1/L2/L3/Total) to kind (R1/R2/RL); fractions
    throughout, scaled by 100 only at the output layer. ``similarity_total``
    is the provider's score between the two stripped full texts, a cheap
    stand-in for a learned whole-text similarity.
    """

    id: str
    ceds: float
    ced: float
    cqe: float
    similarity_total: float
    rouge: dict[str, dict[str, RougeScore]]
    item_count_system: int
    item_count_reference: int


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p: float
    n: int


def _rouge_streams(catalogue: Catalogue, stem: bool) -> dict[str, list[str]]:
    streams: dict[str, list[str]] = {"Total": strip_level_marks(catalogue)}
    for level in (1, 2, 3):
        streams[f"L{level}"] = strip_level_marks(slice_level(catalogue, level))
    if stem:
        streams = {key: stem_all(toks) for key, toks in streams.items()}
    return streams


def score_pair(system: Catalogue, reference: Catalogue, *,
               provider: SimilarityProvider | None = None,
               config: CostConfig | None = None,
               cost_table: CostTable | None = None,
               lexicon: TemplateLexicon | None = None,
               stem: bool = False,
               cqe_unit: str = "tokens",
               pair_id: str = "pair") -> MetricReport:
    """Score one system catalogue against its reference."""
    config = config or CostConfig()
    provider = provider or LexicalSimilarity()
    distance, _ = catalogue_edit_distance(system, reference, provider=provider,
                                          config=config, cost_table=cost_table)
    sys_streams = _rouge_streams(system, stem)
    ref_streams = _rouge_streams(reference, stem)
    rouge: dict[str, dict[str, RougeScore]] = {}
    for level in ROUGE_LEVELS:
        cand, ref = sys_streams[level], ref_streams[level]
        rouge[level] = {
            "R1": rouge_n(cand, ref, 1),
            "R2": rouge_n(cand, ref, 2),
            "RL": rouge_l(cand, ref),
        }
    similarity_total = provider.similarity(
        " ".join(sys_streams["Total"]), " ".join(ref_streams["Total"]))
    return MetricReport(
        id=pair_id,
        ceds=ceds_from_distance(distance, len(system), len(reference)),
        ced=distance,
        cqe=cqe(system, lexicon, unit=cqe_unit),
        similarity_total=similarity_total,
        rouge=rouge,
        item_count_system=len(system),
        item_count_reference=len(reference),
    )


@dataclass(frozen=True)
class AggregateReport:
    """Unweighted means over a list of pair reports."""

    pairs: int
    ceds: float
    ced: float
    cqe: float
    similarity_total: float
    rouge: dict[str, dict[str, RougeScore]]

    @classmethod
    def from_reports(cls, reports: list[MetricReport]) -> "AggregateReport":
        if not reports:
            raise DegenerateInput("cannot aggregate zero reports")
        k = float(len(reports))
        rouge: dict[str, dict[str, RougeScore]] = {}
        for level in ROUGE_LEVELS:
            rouge[level] = {}
            for kind in ROUGE_KINDS:
                cells = [r.rouge[level][kind] for r in reports]
                rouge[level][kind] = RougeScore(
                    sum(c.precision for c in cells) / k,
                    sum(c.recall for c in cells) / k,
                    sum(c.f1 for c in cells) / k)
        return cls(
            pairs=len(reports),
            ceds=sum(r.ceds for r in reports) / k,
            ced=sum(r.ced for r in reports) / k,
            cqe=sum(r.cqe for r in reports) / k,
            similarity_total=sum(r.similarity_total for r in reports) / k,
            rouge=rouge,
        )


def score_corpus(entries: list[SystemEntry], records: list[ReviewRecord], *,
                 provider: SimilarityProvider | None = None,
                 config: CostConfig | None = None,
                 cost_table: CostTable | None = None,
                 lexicon: TemplateLexicon | None = None,
                 stem: bool = False,
                 cqe_unit: str = "tokens",
                 jobs: int = 1) -> tuple[list[MetricReport], AggregateReport]:
    """Score every system entry against the reference record with its id.

    Reports come back sorted by id regardless of evaluation order, so a
    parallel run (``jobs`` > 1) emits exactly what a serial run does.
    """
    provider = provider or LexicalSimilarity()
    by_id = {record.id: record for record in records}
    missing = [entry.id for entry in entries if entry.id not in by_id]
    if missing:
        raise MissingId("system ids absent from the reference corpus: "
                        + ", ".join(sorted(missing)))

    def one(entry: SystemEntry) -> MetricReport:
        return score_pair(entry.catalogue, by_id[entry.id].catalogue,
                          provider=provider, config=config, cost_table=cost_table,
                          lexicon=lexicon, stem=stem, cqe_unit=cqe_unit,
                          pair_id=entry.id)

    if jobs > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(one, entries))
    else:
        reports = [one(entry) for entry in entries]
    reports.sort(key=lambda r: r.id)
    return reports, AggregateReport.from_reports(reports)


def pearson(xs: list[float], ys: list[float]) -> CorrelationResult:
    """Sample correlation with a two-tailed significance level.

    The p-value comes from the t statistic with n-2 degrees of freedom,
    evaluated through the regularized incomplete beta function.
    """
    n = len(xs)
    if len(ys) != n:
        raise DegenerateInput(f"series lengths differ: {n} vs {len(ys)}")
    if n < 3:
        raise DegenerateInput(f"need at least 3 points, got {n}")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("constant series has no correlation")
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    r = max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))
    df = n - 2
    if abs(r) == 1.0:
        p = 0.0
    else:
        t2 = r * r * df / (1.0 - r * r)
        p = float(betainc(df / 2.0, 0.5, df / (df + t2)))
    return CorrelationResult(r=r, p=p, n=n)
