"""Deterministic rendering of reports, traces and statistics.

Everything here is presentation: metric objects in (fractions where
applicable), JSON or aligned text out. JSON is byte-stable across runs:
keys are sorted and every float is printed with exactly four decimals.
Overlap metrics and similarities appear on the 0..100 scale; raw edit
distances stay unscaled.
"""

from __future__ import annotations

import json
from typing import Any

from .analysis import AggregateReport, CorrelationResult, MetricReport
from .catalogue import Catalogue
from .ced import AlignmentTrace
from .corpus import ROUGE_LEVELS, CorpusStats
from .textmetrics import RougeScore

SPLITTER_NOTE = ("sentence counts use a simple terminator-based splitter "
                 "and are not comparable across tools")


def _float_repr(value: float) -> str:
    text = f"{value:.4f}"
    return "0.0000" if text == "-0.0000" else text


def stable_json(obj: Any, *, _level: int = 0) -> str:
    """Serialize with sorted keys and fixed-point floats.

    Same data in, same bytes out, regardless of dict construction order
    or tiny float noise below the fourth decimal.
    """
    pad = "  " * _level
    inner = "  " * (_level + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [f"{inner}{json.dumps(str(k))}: {stable_json(v, _level=_level + 1)}"
                 for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(parts) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [f"{inner}{stable_json(v, _level=_level + 1)}" for v in obj]
        return "[\n" + ",\n".join(parts) + f"\n{pad}]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _float_repr(obj)
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(str(obj))


def _rouge_cell(score: RougeScore | None) -> dict[str, float] | None:
    if score is None:
        return None
    return {"precision": 100.0 * score.precision,
            "recall": 100.0 * score.recall,
            "f1": 100.0 * score.f1}


def report_to_dict(report: MetricReport) -> dict[str, Any]:
    return {
        "id": report.id,
        "ceds": report.ceds,
        "ced": report.ced,
        "cqe": report.cqe,
        "similarity_total": 100.0 * report.similarity_total,
        "rouge": {level: {kind: _rouge_cell(score) for kind, score in kinds.items()}
                  for level, kinds in report.rouge.items()},
        "item_count_system": report.item_count_system,
        "item_count_reference": report.item_count_reference,
    }


def aggregate_to_dict(aggregate: AggregateReport) -> dict[str, Any]:
    return {
        "pairs": aggregate.pairs,
        "ceds": aggregate.ceds,
        "ced": aggregate.ced,
        "cqe": aggregate.cqe,
        "similarity_total": 100.0 * aggregate.similarity_total,
        "rouge": {level: {kind: _rouge_cell(score) for kind, score in kinds.items()}
                  for level, kinds in aggregate.rouge.items()},
    }


def score_json(reports: list[MetricReport], aggregate: AggregateReport) -> str:
    return stable_json({
        "pairs": [report_to_dict(r) for r in reports],
        "aggregate": aggregate_to_dict(aggregate),
    }) + "\n"


def _align_rows(rows: list[list[str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [cell.ljust(widths[i]) for i, cell in enumerate(row)]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


def score_table(reports: list[MetricReport], aggregate: AggregateReport) -> str:
    """Aligned text summary, one row per pair plus a mean row.

    Overlap columns are the Total-level F1 scores.
    """
    rows = [["id", "R-1", "R-2", "R-L", "Sim", "CEDS", "CQE"]]

    def fmt(report) -> list[str]:
        total = report.rouge["Total"]
        return [
            f"{100.0 * total['R1'].f1:.2f}",
            f"{100.0 * total['R2'].f1:.2f}",
            f"{100.0 * total['RL'].f1:.2f}",
            f"{100.0 * report.similarity_total:.2f}",
            f"{report.ceds:.2f}",
            f"{report.cqe:.2f}",
        ]

    for report in reports:
        rows.append([report.id, *fmt(report)])
    rows.append([f"mean ({aggregate.pairs})", *fmt(aggregate)])
    return _align_rows(rows) + "\n"


def trace_to_dict(trace: AlignmentTrace, system: Catalogue, reference: Catalogue,
                  ceds: float) -> dict[str, Any]:
    ops = []
    for op in trace.ops:
        ops.append({
            "kind": op.kind,
            "system_index": op.a_index,
            "reference_index": op.b_index,
            "system": system[op.a_index].text if op.a_index is not None else None,
            "reference": reference[op.b_index].text if op.b_index is not None else None,
            "cost": op.cost,
        })
    return {"ops": ops, "ced": trace.total, "ceds": ceds}


def trace_table(trace: AlignmentTrace, system: Catalogue, reference: Catalogue) -> str:
    """Three aligned columns: system heading, reference heading, distance.

    Unmatched headings pair with "-" at their insert/delete cost.
    """
    rows = [["system", "reference", "distance"]]
    for op in trace.ops:
        rows.append([
            system[op.a_index].text if op.a_index is not None else "-",
            reference[op.b_index].text if op.b_index is not None else "-",
            f"{op.cost:.2f}",
        ])
    rows.append(["total", "", f"{trace.total:.2f}"])
    return _align_rows(rows) + "\n"


def _matrix_to_dict(matrix: dict[str, dict[str, dict[str, float] | None]]) -> dict[str, Any]:
    return {row: {col: None if cell is None
                  else {kind: 100.0 * f1 for kind, f1 in cell.items()}
                  for col, cell in cols.items()}
            for row, cols in matrix.items()}


def stats_to_dict(stats: CorpusStats) -> dict[str, Any]:
    return {
        "pairs": stats.pairs,
        "refs_mean": stats.refs_mean,
        "input_sentences_mean": stats.input_sentences_mean,
        "input_words_mean": stats.input_words_mean,
        "output_items_mean": stats.output_items_mean,
        "output_words_mean": stats.output_words_mean,
        "level_items_mean": {f"L{lv}": v for lv, v in stats.level_items_mean.items()},
        "level_words_mean": {f"L{lv}": v for lv, v in stats.level_words_mean.items()},
        "novel_ngrams": {str(n): v for n, v in stats.novel_ngrams.items()},
        "level_rouge": _matrix_to_dict(stats.level_rouge),
        "oracle_cqe_mean": stats.oracle_cqe_mean,
        "note": SPLITTER_NOTE,
    }


def stats_table(stats: CorpusStats) -> str:
    lines = [
        f"pairs                {stats.pairs}",
        f"refs mean            {stats.refs_mean:.2f}",
        f"input sentences mean {stats.input_sentences_mean:.2f}",
        f"input words mean     {stats.input_words_mean:.2f}",
        f"output items mean    {stats.output_items_mean:.2f}",
        f"output words mean    {stats.output_words_mean:.2f}",
    ]
    for lv in (1, 2, 3):
        lines.append(f"L{lv} items mean / words per item   "
                     f"{stats.level_items_mean[lv]:.2f} / {stats.level_words_mean[lv]:.2f}")
    lines.append("novel n-grams        "
                 + "  ".join(f"{n}: {stats.novel_ngrams[n]:.2f}" for n in (1, 2, 3, 4)))
    lines.append(f"oracle CQE mean      {stats.oracle_cqe_mean:.2f}")
    lines.append("")
    lines.append("level overlap (R-1/R-2/R-L F1)")
    rows = [["", "L1", "L2", "L3"]]
    for row_key in ROUGE_LEVELS:
        cells = [row_key]
        for col_key in ("L1", "L2", "L3"):
            cell = stats.level_rouge[row_key][col_key]
            if cell is None:
                cells.append("/")
            else:
                cells.append(f"{100.0 * cell['R1']:.1f}/{100.0 * cell['R2']:.1f}"
                             f"/{100.0 * cell['RL']:.1f}")
        rows.append(cells)
    lines.append(_align_rows(rows))
    lines.append("")
    lines.append(f"note: {SPLITTER_NOTE}")
    return "\n".join(lines) + "\n"


def correlation_to_dict(result: CorrelationResult) -> dict[str, Any]:
    return {"r": result.r, "p": result.p, "n": result.n}
