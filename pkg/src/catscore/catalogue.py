"""Level-marked catalogue parsing, validation, and tree construction.

A catalogue is an ordered list of headings, each tagged with a depth mark
``<l1>``/``<l2>``/``<l3>``, one heading per line. The ordered tree built
from those marks is what the edit-distance engine operates on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from .tokens import tokenize

MAX_LEVEL = 3

_MARK_RE = re.compile(r"<l\d+>", re.IGNORECASE)
_LINE_RE = re.compile(r"^\s*<l(\d+)>\s*(.*)$", re.IGNORECASE)


class IssueKind(str, Enum):
    """Why a catalogue line or item is suspect. All kinds are warnings."""

    LEVEL_JUMP = "LevelJump"
    LEADING_DEEP_LEVEL = "LeadingDeepLevel"
    EMPTY_HEADING = "EmptyHeading"
    UNKNOWN_MARK = "UnknownMark"


@dataclass(frozen=True)
class ValidationIssue:
    index: int
    kind: IssueKind
    message: str

    def __str__(self) -> str:
        return f"{self.kind.value}@{self.index}: {self.message}"


@dataclass(frozen=True)
class CatalogueItem:
    """One heading: a depth in 1..3 and its lowercase text."""

    level: int
    text: str

    def __post_init__(self) -> None:
        if self.level not in (1, 2, 3):
            raise ValueError(f"item level must be 1..{MAX_LEVEL}, got {self.level}")
        if _MARK_RE.search(self.text):
            raise ValueError(f"heading text contains a level mark: {self.text!r}")

    def tokens(self) -> list[str]:
        return tokenize(self.text)


@dataclass(frozen=True)
class Catalogue:
    """Ordered sequence of catalogue items. Order is document order."""

    items: tuple[CatalogueItem, ...] = ()

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[CatalogueItem]:
        return iter(self.items)

    def __getitem__(self, i: int) -> CatalogueItem:
        return self.items[i]

    @classmethod
    def from_pairs(cls, pairs) -> "Catalogue":
        """Build from (level, text) pairs; convenient in code and tests."""
        return cls(tuple(CatalogueItem(lv, tx) for lv, tx in pairs))


@dataclass
class TreeNode:
    """Node of the ordered catalogue tree.

    ``item`` is None only for the virtual root. ``doc_index`` is the
    position of the item in the source catalogue (-1 for the root).
    ``effective_level`` equals the node's depth, which may be lower than
    the item's declared level when the declaration skipped a level.
    """

    item: CatalogueItem | None
    effective_level: int
    doc_index: int
    children: list["TreeNode"] = field(default_factory=list)


@dataclass
class CatalogueTree:
    """Ordered labeled tree over catalogue items plus a virtual root."""

    root: TreeNode
    size: int

    def document_order(self) -> list[TreeNode]:
        """Non-root nodes in original item order (preorder)."""
        out: list[TreeNode] = []
        stack = list(reversed(self.root.children))
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(reversed(node.children))
        return out


def parse_catalogue(text: str) -> tuple[Catalogue, list[ValidationIssue]]:
    """Parse level-marked lines into a catalogue.

    Nothing here is fatal: malformed lines (no mark, a mark deeper than
    ``<l3>``, a second mark embedded in the heading, an empty heading)
    are reported and skipped, and structural oddities are reported by
    :func:`validate`. Heading text is lowercased.
    """
    items: list[CatalogueItem] = []
    issues: list[ValidationIssue] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        m = _LINE_RE.match(line)
        if m is None:
            issues.append(ValidationIssue(
                len(items), IssueKind.UNKNOWN_MARK,
                f"line {lineno}: no leading level mark, line dropped"))
            continue
        level = int(m.group(1))
        heading = m.group(2).strip().lower()
        if not 1 <= level <= MAX_LEVEL:
            issues.append(ValidationIssue(
                len(items), IssueKind.UNKNOWN_MARK,
                f"line {lineno}: mark <l{level}> is beyond <l{MAX_LEVEL}>, line dropped"))
            continue
        if _MARK_RE.search(heading):
            issues.append(ValidationIssue(
                len(items), IssueKind.UNKNOWN_MARK,
                f"line {lineno}: embedded level mark in heading, line dropped"))
            continue
        if not heading:
            issues.append(ValidationIssue(
                len(items), IssueKind.EMPTY_HEADING,
                f"line {lineno}: empty heading, line dropped"))
            continue
        items.append(CatalogueItem(level, heading))
    catalogue = Catalogue(tuple(items))
    issues.extend(validate(catalogue))
    return catalogue, issues


def validate(catalogue: Catalogue) -> list[ValidationIssue]:
    """Report structural warnings; never raises.

    The first item should sit at level 1 and no item may be more than one
    level deeper than its predecessor. Blank headings are flagged for
    catalogues assembled in code (the parser never produces them).
    """
    issues: list[ValidationIssue] = []
    prev_level = 0
    for i, item in enumerate(catalogue.items):
        if not item.text.strip():
            issues.append(ValidationIssue(
                i, IssueKind.EMPTY_HEADING, "blank heading text"))
        if i == 0:
            if item.level > 1:
                issues.append(ValidationIssue(
                    0, IssueKind.LEADING_DEEP_LEVEL,
                    f"first item declared at level {item.level}"))
        elif item.level > prev_level + 1:
            issues.append(ValidationIssue(
                i, IssueKind.LEVEL_JUMP,
                f"level {item.level} follows level {prev_level}"))
        prev_level = item.level
    return issues


def build_tree(catalogue: Catalogue) -> CatalogueTree:
    """Build the ordered tree the edit distance operates on.

    An item declared at level k becomes a child of the nearest open item
    declared shallower than k. When the declaration skipped a level (for
    which :func:`validate` already warned), the item's effective level is
    reduced to its parent's depth plus one so the tree stays well formed.
    """
    root = TreeNode(item=None, effective_level=0, doc_index=-1)
    stack: list[tuple[TreeNode, int]] = [(root, 0)]  # (node, declared level)
    for i, item in enumerate(catalogue.items):
        while stack[-1][1] >= item.level:
            stack.pop()
        parent = stack[-1][0]
        node = TreeNode(item=item,
                        effective_level=parent.effective_level + 1,
                        doc_index=i)
        parent.children.append(node)
        stack.append((node, item.level))
    return CatalogueTree(root=root, size=len(catalogue))


def strip_level_marks(catalogue: Catalogue) -> list[str]:
    """Flatten the catalogue to one token stream, marks discarded."""
    out: list[str] = []
    for item in catalogue.items:
        out.extend(item.tokens())
    return out


def slice_level(catalogue: Catalogue, level: int) -> Catalogue:
    """Subsequence of items declared at ``level``, order preserved."""
    if level not in (1, 2, 3):
        raise ValueError(f"level must be 1..{MAX_LEVEL}, got {level}")
    return Catalogue(tuple(it for it in catalogue.items if it.level == level))


def serialize_catalogue(catalogue: Catalogue) -> str:
    """Render the canonical text form: ``<lK> heading`` per line.

    Output is bit-exact: lowercase mark, single space, newline separators,
    no trailing newline.
    """
    return "\n".join(f"<l{it.level}> {it.text}" for it in catalogue.items)
