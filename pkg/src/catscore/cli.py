"""Command-line interface.

Five commands: ``validate`` (structural warnings), ``score`` (full metric
reports for a pair or a corpus), ``align`` (the edit script between two
catalogues), ``stats`` (corpus descriptives) and ``corr`` (metric
consistency). Every flag can also be set through an environment variable
prefixed ``CATSCORE_`` (for example ``CATSCORE_SCORE_ALPHA``); explicit
flags win.

Exit codes: 0 success, 1 finished with warnings, 2 unusable input or
configuration, 3 similarity or embedding provider failure. Any nonzero
exit prints one ``error: ...`` line on stderr.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from .analysis import (AggregateReport, DegenerateInput, MissingId, pearson,
                       score_corpus, score_pair)
from .catalogue import Catalogue, parse_catalogue
from .ced import CostConfig, CostTable, catalogue_edit_distance, ceds_from_distance
from .corpus import (EmptyCorpus, ParseError, apply_filters, corpus_stats,
                     deterministic_split, load_corpus, load_system_outputs)
from .output import (correlation_to_dict, score_json, score_table, stable_json,
                     stats_table, stats_to_dict, trace_table, trace_to_dict)
from .similarity import (CosineItemSimilarity, FileEmbeddingSource,
                         GreedyTokenMatchSimilarity, LexicalSimilarity,
                         ProviderError, ServiceEmbeddingSource, SimilarityProvider)
from .textmetrics import TemplateLexicon

EXIT_OK = 0
EXIT_WARNINGS = 1
EXIT_INPUT = 2
EXIT_PROVIDER = 3

SIM_KINDS = ("lexical", "cosine", "greedy")


@dataclass(frozen=True)
class RunConfig:
    """Validated bundle of every scoring knob the CLI accepts."""

    alpha: float = 1.2
    sim: str = "lexical"
    embeddings: str | None = None
    embed_url: str | None = None
    stem: bool = False
    jobs: int = 1
    fmt: str = "json"
    cqe_unit: str = "tokens"

    def check(self) -> None:
        if self.alpha <= 0:
            raise click.UsageError(f"--alpha must be positive, got {self.alpha}")
        if self.jobs < 1:
            raise click.UsageError(f"--jobs must be at least 1, got {self.jobs}")
        if self.sim not in SIM_KINDS:
            raise click.UsageError(f"--sim must be one of {', '.join(SIM_KINDS)}")
        if self.embeddings and self.embed_url:
            raise click.UsageError("--embeddings and --embed-url are mutually exclusive")
        if self.sim in ("cosine", "greedy") and not (self.embeddings or self.embed_url):
            raise click.UsageError(f"--sim {self.sim} needs --embeddings or --embed-url")

    def cost_config(self) -> CostConfig:
        return CostConfig(alpha=self.alpha)

    def provider(self) -> SimilarityProvider:
        if self.sim == "lexical":
            return LexicalSimilarity()
        if self.embeddings:
            source = FileEmbeddingSource.from_path(self.embeddings)
        else:
            source = ServiceEmbeddingSource(self.embed_url, max_in_flight=max(1, self.jobs))
        if self.sim == "cosine":
            return CosineItemSimilarity(source)
        return GreedyTokenMatchSimilarity(source)


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _warn(message: str) -> None:
    click.echo(f"warning: {message}", err=True)


def _guarded(fn):
    """Translate expected failures into documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ProviderError as exc:
            _fail(EXIT_PROVIDER, str(exc))
        except (ParseError, EmptyCorpus, MissingId, DegenerateInput) as exc:
            _fail(EXIT_INPUT, str(exc))
        except OSError as exc:
            _fail(EXIT_INPUT, str(exc))
        except ValueError as exc:
            _fail(EXIT_INPUT, str(exc))

    return wrapper


def _looks_like_jsonl(path: str) -> bool:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                return line.lstrip()[0] == "{"
    return False


def _read_catalogue(path: str) -> tuple[Catalogue, list]:
    return parse_catalogue(Path(path).read_text(encoding="utf-8"))


def _load_lexicon(path: str | None) -> TemplateLexicon | None:
    return TemplateLexicon.from_path(path) if path else None


@click.group()
def cli() -> None:
    """Parse and evaluate hierarchical literature-review catalogues."""


@cli.command("validate")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@_guarded
def cmd_validate(path: str) -> None:
    """Report structural warnings in a catalogue or corpus file."""
    warnings = 0
    if _looks_like_jsonl(path):
        if _first_record_has_references(path):
            labelled = [(rec.id, rec.issues) for rec in load_corpus(path)]
        else:
            labelled = [(entry.id, entry.issues) for entry in load_system_outputs(path)]
        for rec_id, issues in labelled:
            for issue in issues:
                click.echo(f"{rec_id}: {issue}")
                warnings += 1
        if warnings == 0:
            click.echo(f"ok: {len(labelled)} records")
    else:
        catalogue, issues = _read_catalogue(path)
        for issue in issues:
            click.echo(str(issue))
            warnings += 1
        if warnings == 0:
            click.echo(f"ok: {len(catalogue)} items")
    if warnings:
        _fail(EXIT_WARNINGS, f"{warnings} validation warnings")


def _first_record_has_references(path: str) -> bool:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                try:
                    doc = json.loads(line)
                except json.JSONDecodeError:
                    return True  # let load_corpus raise the precise error
                return isinstance(doc, dict) and "references" in doc
    return True


def _scoring_options(fn):
    fn = click.option("--alpha", type=float, default=1.2, show_default=True,
                      help="Dissimilarity weight in the substitution cost.")(fn)
    fn = click.option("--sim", type=click.Choice(SIM_KINDS), default="lexical",
                      show_default=True, help="Similarity provider.")(fn)
    fn = click.option("--embeddings", type=click.Path(exists=True, dir_okay=False),
                      default=None, help="JSONL embedding file for cosine/greedy.")(fn)
    fn = click.option("--embed-url", default=None,
                      help="Embedding service base URL for cosine/greedy.")(fn)
    fn = click.option("--stem", is_flag=True, default=False,
                      help="Apply suffix stemming to overlap metrics.")(fn)
    fn = click.option("--jobs", type=int, default=1, show_default=True,
                      help="Parallelism bound.")(fn)
    fn = click.option("--cost-table", "cost_table_path", hidden=True, default=None,
                      type=click.Path(exists=True, dir_okay=False),
                      help="JSON file of fixed substitution costs.")(fn)
    return fn


def _echo_issue_warnings(label: str, issues) -> int:
    for issue in issues:
        _warn(f"{label}: {issue}")
    return len(issues)


@cli.command("score")
@click.option("--system", "system_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="System catalogue text file, or JSONL of {id, catalogue}.")
@click.option("--reference", "reference_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Reference catalogue text file, or corpus JSONL.")
@_scoring_options
@click.option("--lexicon", "lexicon_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Template lexicon file (default: built-in).")
@click.option("--cqe-unit", type=click.Choice(("tokens", "items")), default="tokens",
              show_default=True, help="Denominator for template coverage.")
@click.option("--format", "fmt", type=click.Choice(("json", "table")), default="json",
              show_default=True, help="Output format.")
@_guarded
def cmd_score(system_path: str, reference_path: str, alpha: float, sim: str,
              embeddings: str | None, embed_url: str | None, stem: bool, jobs: int,
              cost_table_path: str | None, lexicon_path: str | None,
              cqe_unit: str, fmt: str) -> None:
    """Score system catalogues against references."""
    config = RunConfig(alpha=alpha, sim=sim, embeddings=embeddings,
                       embed_url=embed_url, stem=stem, jobs=jobs, fmt=fmt,
                       cqe_unit=cqe_unit)
    config.check()
    cost_table = CostTable.from_path(cost_table_path) if cost_table_path else None
    provider = config.provider()
    lexicon = _load_lexicon(lexicon_path)
    warnings = 0

    sys_is_jsonl = _looks_like_jsonl(system_path)
    ref_is_jsonl = _looks_like_jsonl(reference_path)
    if sys_is_jsonl != ref_is_jsonl:
        raise click.UsageError("--system and --reference must both be catalogue "
                               "text files or both be JSONL")

    if sys_is_jsonl:
        entries = load_system_outputs(system_path)
        records = load_corpus(reference_path)
        for entry in entries:
            warnings += _echo_issue_warnings(f"system {entry.id}", entry.issues)
        for record in records:
            warnings += _echo_issue_warnings(f"reference {record.id}", record.issues)
        reports, aggregate = score_corpus(
            entries, records, provider=provider, config=config.cost_config(),
            cost_table=cost_table, lexicon=lexicon, stem=stem,
            cqe_unit=cqe_unit, jobs=jobs)
    else:
        system_cat, sys_issues = _read_catalogue(system_path)
        reference_cat, ref_issues = _read_catalogue(reference_path)
        warnings += _echo_issue_warnings("system", sys_issues)
        warnings += _echo_issue_warnings("reference", ref_issues)
        report = score_pair(system_cat, reference_cat, provider=provider,
                            config=config.cost_config(), cost_table=cost_table,
                            lexicon=lexicon, stem=stem, cqe_unit=cqe_unit,
                            pair_id="pair")
        reports, aggregate = [report], AggregateReport.from_reports([report])

    if fmt == "json":
        click.echo(score_json(reports, aggregate), nl=False)
    else:
        click.echo(score_table(reports, aggregate), nl=False)
    if warnings:
        _fail(EXIT_WARNINGS, f"{warnings} validation warnings")


@cli.command("align")
@click.option("--system", "system_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="System catalogue text file.")
@click.option("--reference", "reference_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Reference catalogue text file.")
@_scoring_options
@click.option("--format", "fmt", type=click.Choice(("json", "table")), default="table",
              show_default=True, help="Output format.")
@_guarded
def cmd_align(system_path: str, reference_path: str, alpha: float, sim: str,
              embeddings: str | None, embed_url: str | None, stem: bool, jobs: int,
              cost_table_path: str | None, fmt: str) -> None:
    """Print the optimal edit script between two catalogues."""
    config = RunConfig(alpha=alpha, sim=sim, embeddings=embeddings,
                       embed_url=embed_url, stem=stem, jobs=jobs, fmt=fmt)
    config.check()
    cost_table = CostTable.from_path(cost_table_path) if cost_table_path else None
    provider = config.provider()
    system_cat, sys_issues = _read_catalogue(system_path)
    reference_cat, ref_issues = _read_catalogue(reference_path)
    warnings = _echo_issue_warnings("system", sys_issues)
    warnings += _echo_issue_warnings("reference", ref_issues)

    distance, trace = catalogue_edit_distance(
        system_cat, reference_cat, provider=provider,
        config=config.cost_config(), cost_table=cost_table)
    score = ceds_from_distance(distance, len(system_cat), len(reference_cat))

    if fmt == "json":
        click.echo(stable_json(trace_to_dict(trace, system_cat, reference_cat, score)))
    else:
        click.echo(trace_table(trace, system_cat, reference_cat), nl=False)
    if warnings:
        _fail(EXIT_WARNINGS, f"{warnings} validation warnings")


@cli.command("stats")
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--apply-filters", "filtered", is_flag=True, default=False,
              help="Drop records below the item/reference thresholds first.")
@click.option("--split", type=click.Choice(("train", "val", "test")), default=None,
              help="Restrict to one deterministic 80/10/10 split bucket.")
@click.option("--lexicon", "lexicon_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Template lexicon file (default: built-in).")
@click.option("--format", "fmt", type=click.Choice(("json", "table")), default="json",
              show_default=True, help="Output format.")
@_guarded
def cmd_stats(corpus_path: str, filtered: bool, split: str | None,
              lexicon_path: str | None, fmt: str) -> None:
    """Descriptive statistics over a corpus file."""
    records = load_corpus(corpus_path)
    if filtered:
        records = [res.record for res in map(apply_filters, records) if res.kept]
    if split:
        records = [rec for rec in records if deterministic_split(rec.id) == split]
    stats = corpus_stats(records, _load_lexicon(lexicon_path))
    if fmt == "json":
        click.echo(stable_json(stats_to_dict(stats)))
    else:
        click.echo(stats_table(stats), nl=False)


@cli.command("corr")
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(("json", "table")), default="json",
              show_default=True, help="Output format.")
@_guarded
def cmd_corr(csv_path: str, fmt: str) -> None:
    """Pearson consistency between two metric columns (CSV with header)."""
    xs: list[float] = []
    ys: list[float] = []
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise ParseError(f"{csv_path}: need a header row with two columns")
        for lineno, row in enumerate(reader, 2):
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise ParseError(f"{csv_path}:{lineno}: need two columns")
            try:
                xs.append(float(row[0]))
                ys.append(float(row[1]))
            except ValueError as exc:
                raise ParseError(f"{csv_path}:{lineno}: not numeric: {exc}") from None
    result = pearson(xs, ys)
    if fmt == "json":
        click.echo(stable_json(correlation_to_dict(result)))
    else:
        click.echo(f"r={result.r:.4f} p={result.p:.4g} n={result.n}")


def run() -> None:
    cli(auto_envvar_prefix="CATSCORE")


if __name__ == "__main__":
    run()
