"""Parsing and evaluation of hierarchical literature-review catalogues.

The public surface re-exports the pieces most callers need: the
catalogue model, the edit-distance scorer with its alignment trace,
token-overlap metrics, corpus statistics and the pair/corpus report
builders.
"""

from .catalogue import (Catalogue, CatalogueItem, CatalogueTree, IssueKind,
                        TreeNode, ValidationIssue, build_tree, parse_catalogue,
                        serialize_catalogue, slice_level, strip_level_marks,
                        validate)
from .ced import (AlignmentTrace, CostConfig, CostTable, EditOp, SizeLimit,
                  brute_force_ced, catalogue_edit_distance, ceds,
                  ceds_from_distance)
from .corpus import (CorpusStats, DuplicateId, EmptyCorpus, FilterResult,
                     ParseError, Reference, ReviewRecord, SystemEntry,
                     apply_filters, corpus_stats, count_sentences,
                     deterministic_split, level_rouge_matrix, load_corpus,
                     load_system_outputs, truncate_abstract)
from .analysis import (AggregateReport, CorrelationResult, DegenerateInput,
                       MetricReport, MissingId, pearson, score_corpus,
                       score_pair)
from .output import (correlation_to_dict, score_json, score_table, stable_json,
                     stats_table, stats_to_dict, trace_table, trace_to_dict)
from .porter import stem
from .similarity import (CosineItemSimilarity, EmptyText, FileEmbeddingSource,
                         GreedyTokenMatchSimilarity, LexicalSimilarity,
                         MissingEmbedding, ProviderError,
                         ServiceEmbeddingSource, SimilarityProvider, cosine)
from .textmetrics import (RougeScore, TemplateLexicon, cqe, lcs_length, ngrams,
                          novel_ngram_ratio, rouge_l, rouge_n)
from .tokens import normalize, tokenize

__version__ = "0.1.0"

__all__ = [
    "AggregateReport", "AlignmentTrace", "Catalogue", "CatalogueItem",
    "CatalogueTree", "CorrelationResult", "CorpusStats", "CosineItemSimilarity",
    "CostConfig", "CostTable", "DegenerateInput", "DuplicateId", "EditOp",
    "EmptyCorpus", "EmptyText", "FileEmbeddingSource", "FilterResult",
    "GreedyTokenMatchSimilarity", "IssueKind", "LexicalSimilarity",
    "MetricReport", "MissingEmbedding", "MissingId", "ParseError",
    "ProviderError", "Reference", "ReviewRecord", "RougeScore",
    "ServiceEmbeddingSource", "SimilarityProvider", "SizeLimit", "SystemEntry",
    "TemplateLexicon", "TreeNode", "ValidationIssue", "apply_filters",
    "brute_force_ced", "build_tree", "catalogue_edit_distance", "ceds",
    "ceds_from_distance", "correlation_to_dict", "corpus_stats", "cosine",
    "count_sentences", "cqe", "deterministic_split", "lcs_length",
    "level_rouge_matrix", "load_corpus", "load_system_outputs", "ngrams",
    "normalize", "novel_ngram_ratio", "parse_catalogue", "pearson", "rouge_l",
    "rouge_n", "score_corpus", "score_json", "score_pair", "score_table",
    "serialize_catalogue", "slice_level", "stable_json", "stats_table",
    "stats_to_dict", "stem", "strip_level_marks", "tokenize", "trace_table",
    "trace_to_dict", "truncate_abstract", "validate",
]
