"""Ordered-tree edit distance between catalogues.

The distance is computed with the classic keyroot dynamic program over
ordered labeled trees. What makes it catalogue-aware is the substitution
cost: relabeling one heading into another costs ``min(1, alpha * (1 -
similarity))``, so near-synonymous headings are cheap to align while
insertions and deletions stay at unit cost. The similarity score
``ceds`` rescales the distance by the larger catalogue size onto a
0..100 scale (it can go negative for pathologically disjoint trees but
never below -100).

Every distance comes with an :class:`AlignmentTrace`, the argmin edit
script recovered from the dynamic program, which downstream reporting
renders as a three-column alignment table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

from .catalogue import Catalogue, CatalogueTree, build_tree
from .similarity import LexicalSimilarity, SimilarityProvider
from .tokens import normalize

_TOL = 1e-9


class SizeLimit(Exception):
    """Raised when the exhaustive reference is asked to do too much."""


@dataclass(frozen=True)
class CostConfig:
    """Edit-cost knobs.

    ``alpha`` scales dissimilarity into substitution cost; at the default
    1.2 a pair needs similarity above 1/6 before relabeling beats a
    delete-insert pair. Insert and delete stay at unit cost.
    """

    alpha: float = 1.2
    insert_cost: float = 1.0
    delete_cost: float = 1.0

    def substitution(self, similarity: float) -> float:
        return min(1.0, self.alpha * (1.0 - similarity))


class CostTable:
    """Fixed substitution costs for chosen heading pairs.

    Lookup is symmetric and uses normalized text. Pairs not listed fall
    back to ``default`` when one is set, otherwise to the similarity
    provider. Useful for replaying a published alignment or pinning
    costs in tests.
    """

    def __init__(self, pairs: dict[tuple[str, str], float], default: float | None = None) -> None:
        self._pairs = {self._key(a, b): float(c) for (a, b), c in pairs.items()}
        self.default = default

    @staticmethod
    def _key(a: str, b: str) -> tuple[str, str]:
        na, nb = normalize(a), normalize(b)
        return (na, nb) if na <= nb else (nb, na)

    def lookup(self, a: str, b: str) -> float | None:
        return self._pairs.get(self._key(a, b))

    @classmethod
    def from_path(cls, path: str | Path) -> "CostTable":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict) or "pairs" not in doc:
            raise ValueError(f"{path}: expected an object with a 'pairs' array")
        default = doc.get("default")
        if default is not None:
            default = float(default)
        pairs: dict[tuple[str, str], float] = {}
        for i, row in enumerate(doc["pairs"]):
            try:
                pairs[(row["a"], row["b"])] = float(row["cost"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}: pairs[{i}] needs 'a', 'b' and a numeric 'cost'") from exc
        return cls(pairs, default)


@dataclass(frozen=True)
class EditOp:
    """One step of an edit script, in catalogue item indices."""

    kind: str  # "map", "delete" or "insert"
    a_index: int | None
    b_index: int | None
    cost: float


@dataclass(frozen=True)
class AlignmentTrace:
    """An optimal edit script; op costs sum to the distance."""

    ops: tuple[EditOp, ...]
    total: float

    def mapped_pairs(self) -> list[tuple[int, int]]:
        return [(op.a_index, op.b_index) for op in self.ops if op.kind == "map"]

    def unmatched_a(self) -> list[int]:
        return [op.a_index for op in self.ops if op.kind == "delete"]

    def unmatched_b(self) -> list[int]:
        return [op.b_index for op in self.ops if op.kind == "insert"]


class _Annotated:
    """Postorder arrays for one tree: labels, leftmost leaves, keyroots."""

    __slots__ = ("texts", "doc", "lmd", "keyroots", "kr_of", "n")

    def __init__(self, tree: CatalogueTree) -> None:
        order = []
        stack = [(tree.root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
            else:
                stack.append((node, True))
                for child in reversed(node.children):
                    stack.append((child, False))
        index = {id(node): i for i, node in enumerate(order)}
        self.n = len(order)
        self.texts = [node.item.text if node.item is not None else None for node in order]
        self.doc = [node.doc_index for node in order]
        lmd = [0] * self.n
        for i, node in enumerate(order):
            lmd[i] = lmd[index[id(node.children[0])]] if node.children else i
        self.lmd = lmd
        last_per_lmd: dict[int, int] = {}
        for i in range(self.n):
            last_per_lmd[lmd[i]] = i
        self.keyroots = sorted(last_per_lmd.values())
        self.kr_of = [last_per_lmd[lmd[i]] for i in range(self.n)]


class _SubCosts:
    """Substitution costs between postorder positions of two trees.

    The virtual roots carry a reserved label: aligning root with root is
    free, aligning a root with a real heading costs a full unit. Real
    pairs go through the cost table and then the provider.
    """

    def __init__(self, a: _Annotated, b: _Annotated, provider: SimilarityProvider,
                 config: CostConfig, table: CostTable | None) -> None:
        self._cells: list[list[float]] = [[0.0] * b.n for _ in range(a.n)]
        for x in range(a.n):
            tx = a.texts[x]
            row = self._cells[x]
            for y in range(b.n):
                ty = b.texts[y]
                if tx is None or ty is None:
                    row[y] = 0.0 if tx is ty else 1.0
                    continue
                row[y] = self._pair_cost(tx, ty, provider, config, table)

    @staticmethod
    def _pair_cost(tx: str, ty: str, provider: SimilarityProvider,
                   config: CostConfig, table: CostTable | None) -> float:
        if table is not None:
            fixed = table.lookup(tx, ty)
            if fixed is not None:
                return fixed
            if table.default is not None:
                return table.default
        return config.substitution(provider.similarity(tx, ty))

    def __getitem__(self, x: int) -> list[float]:
        return self._cells[x]


class _Engine:
    """Keyroot dynamic program plus edit-script recovery.

    Forest tables are kept per keyroot pair so the backtrace can replay
    any subtree-versus-subtree decision without recomputation. The
    backtrace re-evaluates the exact expressions the forward pass
    minimized over, so matching within a tiny absolute tolerance finds
    the move that produced each cell.
    """

    def __init__(self, a: _Annotated, b: _Annotated, sub: _SubCosts, config: CostConfig) -> None:
        self.a = a
        self.b = b
        self.sub = sub
        self.del_cost = config.delete_cost
        self.ins_cost = config.insert_cost
        self.treedist = [[0.0] * b.n for _ in range(a.n)]
        self.forests: dict[tuple[int, int], list[list[float]]] = {}
        for i in a.keyroots:
            for j in b.keyroots:
                self._keyroot_pass(i, j)

    def _keyroot_pass(self, i: int, j: int) -> None:
        al, bl = self.a.lmd, self.b.lmd
        ioff = al[i] - 1
        joff = bl[j] - 1
        rows = i - al[i] + 2
        cols = j - bl[j] + 2
        dcost, icost = self.del_cost, self.ins_cost
        sub, treedist = self.sub, self.treedist

        fd = [[0.0] * cols for _ in range(rows)]
        for x in range(1, rows):
            fd[x][0] = fd[x - 1][0] + dcost
        row0 = fd[0]
        for y in range(1, cols):
            row0[y] = row0[y - 1] + icost

        lmd_i, lmd_j = al[i], bl[j]
        for x in range(1, rows):
            xi = x + ioff
            fx, fprev = fd[x], fd[x - 1]
            subx = sub[xi]
            tdx = treedist[xi]
            x_anchored = al[xi] == lmd_i
            for y in range(1, cols):
                yj = y + joff
                if x_anchored and bl[yj] == lmd_j:
                    best = fprev[y - 1] + subx[yj]
                    alt = fprev[y] + dcost
                    if alt < best:
                        best = alt
                    alt = fx[y - 1] + icost
                    if alt < best:
                        best = alt
                    fx[y] = best
                    tdx[yj] = best
                else:
                    best = fd[al[xi] - 1 - ioff][bl[yj] - 1 - joff] + tdx[yj]
                    alt = fprev[y] + dcost
                    if alt < best:
                        best = alt
                    alt = fx[y - 1] + icost
                    if alt < best:
                        best = alt
                    fx[y] = best
        self.forests[(i, j)] = fd

    def distance(self) -> float:
        return self.treedist[self.a.n - 1][self.b.n - 1]

    def trace(self) -> tuple[list[tuple[int, int, float]], list[int], list[int]]:
        """Recover one optimal script as postorder index operations."""
        maps: list[tuple[int, int, float]] = []
        dels: list[int] = []
        inss: list[int] = []
        self._walk_subtrees(self.a.n - 1, self.b.n - 1, maps, dels, inss)
        return maps, dels, inss

    def _walk_subtrees(self, i: int, j: int, maps, dels, inss) -> None:
        """Replay the table that aligned subtree ``i`` against subtree ``j``."""
        ki, kj = self.a.kr_of[i], self.b.kr_of[j]
        fd = self.forests[(ki, kj)]
        al, bl = self.a.lmd, self.b.lmd
        ioff = al[ki] - 1
        joff = bl[kj] - 1
        lmd_i, lmd_j = al[ki], bl[kj]
        x, y = i - ioff, j - joff
        while x > 0 or y > 0:
            if x == 0:
                inss.append(y + joff)
                y -= 1
                continue
            if y == 0:
                dels.append(x + ioff)
                x -= 1
                continue
            xi, yj = x + ioff, y + joff
            here = fd[x][y]
            if al[xi] == lmd_i and bl[yj] == lmd_j:
                if abs(fd[x - 1][y - 1] + self.sub[xi][yj] - here) <= _TOL:
                    maps.append((xi, yj, self.sub[xi][yj]))
                    x -= 1
                    y -= 1
                elif abs(fd[x - 1][y] + self.del_cost - here) <= _TOL:
                    dels.append(xi)
                    x -= 1
                else:
                    inss.append(yj)
                    y -= 1
            else:
                p = al[xi] - 1 - ioff
                q = bl[yj] - 1 - joff
                if abs(fd[p][q] + self.treedist[xi][yj] - here) <= _TOL:
                    self._walk_subtrees(xi, yj, maps, dels, inss)
                    x, y = p, q
                elif abs(fd[x - 1][y] + self.del_cost - here) <= _TOL:
                    dels.append(xi)
                    x -= 1
                else:
                    inss.append(yj)
                    y -= 1


def _ordered_ops(a: _Annotated, b: _Annotated, engine: _Engine,
                 config: CostConfig) -> tuple[EditOp, ...]:
    """Convert postorder operations into document-order catalogue ops.

    Mapped pairs keep document order on both sides (a property of valid
    tree mappings), so deletes and inserts can be threaded into the gaps
    between successive anchors, deletions first. Virtual roots map to
    each other at zero cost and are dropped from the script.
    """
    post_maps, post_dels, post_inss = engine.trace()
    maps = sorted(
        ((a.doc[x], b.doc[y], cost) for x, y, cost in post_maps if a.doc[x] >= 0),
        key=lambda t: t[0],
    )
    dels = sorted(a.doc[x] for x in post_dels)
    inss = sorted(b.doc[y] for y in post_inss)

    ops: list[EditOp] = []
    di = si = 0
    for a_idx, b_idx, cost in maps:
        while di < len(dels) and dels[di] < a_idx:
            ops.append(EditOp("delete", dels[di], None, config.delete_cost))
            di += 1
        while si < len(inss) and inss[si] < b_idx:
            ops.append(EditOp("insert", None, inss[si], config.insert_cost))
            si += 1
        ops.append(EditOp("map", a_idx, b_idx, cost))
    for idx in dels[di:]:
        ops.append(EditOp("delete", idx, None, config.delete_cost))
    for idx in inss[si:]:
        ops.append(EditOp("insert", None, idx, config.insert_cost))
    return tuple(ops)


def catalogue_edit_distance(a: Catalogue, b: Catalogue, *,
                            provider: SimilarityProvider | None = None,
                            config: CostConfig | None = None,
                            cost_table: CostTable | None = None,
                            ) -> tuple[float, AlignmentTrace]:
    """Distance between two catalogues plus one optimal edit script.

    Without an explicit provider the lexical one is used; a cost table,
    when given, takes precedence pair by pair.
    """
    config = config or CostConfig()
    provider = provider or LexicalSimilarity()
    provider.prepare([item.text for item in a] + [item.text for item in b])
    ann_a = _Annotated(build_tree(a))
    ann_b = _Annotated(build_tree(b))
    sub = _SubCosts(ann_a, ann_b, provider, config, cost_table)
    engine = _Engine(ann_a, ann_b, sub, config)
    distance = engine.distance()
    ops = _ordered_ops(ann_a, ann_b, engine, config)
    return distance, AlignmentTrace(ops=ops, total=distance)


def ceds_from_distance(distance: float, size_a: int, size_b: int) -> float:
    """Rescale a distance onto 0..100; two empty catalogues score 100."""
    denom = max(size_a, size_b)
    if denom == 0:
        return 100.0
    return 100.0 * (1.0 - distance / denom)


def ceds(a: Catalogue, b: Catalogue, *,
         provider: SimilarityProvider | None = None,
         config: CostConfig | None = None,
         cost_table: CostTable | None = None) -> float:
    """Catalogue similarity on a 0..100 scale (higher is closer)."""
    distance, _ = catalogue_edit_distance(a, b, provider=provider,
                                          config=config, cost_table=cost_table)
    return ceds_from_distance(distance, len(a), len(b))


def brute_force_ced(a: Catalogue, b: Catalogue, *,
                    provider: SimilarityProvider | None = None,
                    config: CostConfig | None = None,
                    cost_table: CostTable | None = None,
                    max_nodes: int = 10) -> float:
    """Exhaustive reference distance for small catalogues.

    Enumerates every one-to-one node mapping that preserves postorder
    and ancestry on both sides and returns the cheapest script cost.
    Exponential by design; inputs beyond ``max_nodes`` combined items
    raise :class:`SizeLimit`.
    """
    if len(a) + len(b) > max_nodes:
        raise SizeLimit(f"{len(a)} + {len(b)} items exceeds the {max_nodes}-node cap")
    config = config or CostConfig()
    ann_a = _Annotated(build_tree(a))
    ann_b = _Annotated(build_tree(b))
    sub = _SubCosts(ann_a, ann_b, provider, config, cost_table)

    # Real nodes only: the virtual roots always pair up for free and
    # cannot disturb any other pair's ordering or ancestry.
    na, nb = ann_a.n - 1, ann_b.n - 1

    def contains(lmd: list[int], anc: int, desc: int) -> bool:
        return lmd[anc] <= desc < anc

    best = config.delete_cost * na + config.insert_cost * nb
    for k in range(1, min(na, nb) + 1):
        for xs in combinations(range(na), k):
            for ys in combinations(range(nb), k):
                ok = True
                for p in range(k):
                    for q in range(p + 1, k):
                        if contains(ann_a.lmd, xs[q], xs[p]) != contains(ann_b.lmd, ys[q], ys[p]):
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    continue
                cost = (config.delete_cost * (na - k) + config.insert_cost * (nb - k)
                        + sum(sub[x][y] for x, y in zip(xs, ys)))
                if cost < best:
                    best = cost
    return best
