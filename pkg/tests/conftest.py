"""Shared fixtures: data paths, random catalogue generation, providers."""

from __future__ import annotations

import hashlib
import json
import random
from pathlib import Path

import pytest

from catscore import Catalogue, build_tree
from catscore.similarity import SimilarityProvider

DATA_DIR = Path(__file__).parent / "data"

VOCAB = (
    "introduction", "background", "methods", "evaluation", "adaptation",
    "translation", "neural", "data", "models", "training", "analysis",
    "conclusion",
)


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def nmt_paths() -> tuple[Path, Path, Path]:
    return (DATA_DIR / "nmt_system.txt", DATA_DIR / "nmt_reference.txt",
            DATA_DIR / "nmt_costs.json")


class TableSimilarity(SimilarityProvider):
    """Deterministic pseudo-random similarity per text pair.

    Hash-derived, so it is symmetric, stable across runs and processes,
    and different seeds give unrelated tables.
    """

    def __init__(self, seed: int) -> None:
        super().__init__()
        self._seed = seed

    def _score(self, na: str, nb: str) -> float:
        lo, hi = (na, nb) if na <= nb else (nb, na)
        digest = hashlib.sha256(f"{self._seed}|{lo}|{hi}".encode()).digest()
        return int.from_bytes(digest[:8], "big") / 2.0 ** 64


def random_catalogue(rng: random.Random, max_items: int = 5, *,
                     allow_jumps: bool = False) -> Catalogue:
    n = rng.randint(0, max_items)
    pairs: list[tuple[int, str]] = []
    prev = 0
    for i in range(n):
        if allow_jumps:
            level = rng.randint(1, 3)
        elif i == 0:
            level = 1
        else:
            level = rng.randint(1, min(3, prev + 1))
        text = " ".join(rng.choice(VOCAB) for _ in range(rng.randint(1, 3)))
        pairs.append((level, text))
        prev = level
    return Catalogue.from_pairs(pairs)


def ancestor_sets(catalogue: Catalogue) -> dict[int, set[int]]:
    """Map each item index to the indices of its tree ancestors."""
    anc: dict[int, set[int]] = {i: set() for i in range(len(catalogue))}

    def walk(node, path: tuple[int, ...]) -> None:
        for child in node.children:
            anc[child.doc_index] = set(path)
            walk(child, path + (child.doc_index,))

    walk(build_tree(catalogue).root, ())
    return anc


SAMPLE_RECORDS = [
    {
        "id": "survey-a",
        "title": "A survey of widget calibration",
        "domain": "engineering",
        "references": [
            {"title": "Widgets one", "abstract": "We calibrate widgets. Results are strong."},
            {"title": "Widgets two", "abstract": "A second look at calibration of widgets."},
        ],
        "catalogue": ("<l1> introduction\n<l1> calibration methods\n"
                      "<l2> widgets\n<l2> gadget tuning\n<l1> conclusion"),
    },
    {
        "id": "survey-b",
        "title": "Trends in gadget analysis",
        "references": [
            {"title": "Gadget basics", "abstract": "Foundational gadget analysis. Two sentences here."},
        ],
        "catalogue": ("<l1> introduction\n<l1> gadget analysis\n<l2> trends\n"
                      "<l1> future directions\n<l1> conclusion"),
    },
]


def write_jsonl(path: Path, rows: list[dict]) -> Path:
    path.write_text("".join(json.dumps(row) + "\n" for row in rows), encoding="utf-8")
    return path


_ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE_RESULTS.append((report.nodeid.split("::")[-1], report.passed))


def pytest_terminal_summary(terminalreporter):
    """One visible pass/fail line per acceptance criterion."""
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")


@pytest.fixture
def corpus_file(tmp_path: Path) -> Path:
    return write_jsonl(tmp_path / "corpus.jsonl", SAMPLE_RECORDS)


@pytest.fixture
def system_file(tmp_path: Path) -> Path:
    rows = [
        {"id": "survey-a",
         "catalogue": "<l1> introduction\n<l1> methods of calibration\n<l2> widgets\n<l1> conclusion"},
        {"id": "survey-b",
         "catalogue": "<l1> introduction\n<l1> gadget analysis\n<l2> trends\n<l1> future directions\n<l1> conclusion"},
    ]
    return write_jsonl(tmp_path / "system.jsonl", rows)
