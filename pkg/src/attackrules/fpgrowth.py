"""FP-growth frequent itemset mining over discretized transactions.

Items are mapped to integer ids in global frequency order (descending
count, ties broken by the item's canonical order), so sorting a
transaction by id is sorting it by ``item_order``.  Conditional trees keep
the global order, which keeps every tree path sorted the same way.

All counts are exact integers.  A fractional ``min_support`` is resolved
once, to ``ceil(min_support * |D|)``, and an itemset is frequent when its
count is at least that (inclusive).
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from .core import AttackRulesError, Item, Itemset, Transaction, canonicalize


class EmptyDatasetError(AttackRulesError):
    pass


def as_fraction(value: Fraction | float | int | str) -> Fraction:
    """Exact rational from user input; floats go through their shortest repr,
    so ``0.1`` becomes 1/10 rather than its binary approximation."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"not a finite number: {value}")
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class MiningParams:
    """Minimum support as a fraction of |D| (``min_support``) or as an
    absolute transaction count (``min_count``); set exactly one."""

    min_support: Fraction | float | None = Fraction(7, 1000)
    min_count: int | None = None
    max_itemset_size: int | None = None

    def __post_init__(self):
        if self.min_count is not None:
            if self.min_support is not None and self.min_support != MiningParams.min_support:
                raise ValueError("give either min_support or min_count, not both")
            object.__setattr__(self, "min_support", None)
            if int(self.min_count) != self.min_count or self.min_count < 1:
                raise ValueError(f"min_count must be an integer >= 1, got {self.min_count}")
        else:
            if self.min_support is None:
                raise ValueError("min_support or min_count is required")
            frac = as_fraction(self.min_support)
            if not (0 < frac <= 1):
                raise ValueError(f"min_support must lie in (0, 1], got {self.min_support}")
            object.__setattr__(self, "min_support", frac)
        if self.max_itemset_size is not None and self.max_itemset_size < 1:
            raise ValueError("max_itemset_size must be >= 1")

    def resolve(self, n_transactions: int) -> int:
        if self.min_count is not None:
            return int(self.min_count)
        return max(1, math.ceil(self.min_support * n_transactions))

    def describe(self, n_transactions: int) -> str:
        count = self.resolve(n_transactions)
        return f"min_count={count} min_support={Fraction(count, n_transactions)} (of {n_transactions})"


def support_count(itemset: Itemset | Iterable[Item], transactions: Sequence[Transaction]) -> int:
    items = tuple(itemset)
    return sum(1 for t in transactions if all(it in t.items for it in items))


def support(itemset: Itemset | Iterable[Item], transactions: Sequence[Transaction]) -> Fraction:
    """Fraction of transactions containing every item of ``itemset``."""
    if not transactions:
        raise EmptyDatasetError("support is undefined on an empty dataset")
    return Fraction(support_count(itemset, transactions), len(transactions))


class FPNode:
    __slots__ = ("item", "count", "parent", "children", "link")

    def __init__(self, item: int | None, parent: FPNode | None):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children: dict[int, FPNode] = {}
        self.link: FPNode | None = None


class _Header:
    __slots__ = ("head", "tail", "count")

    def __init__(self):
        self.head: FPNode | None = None
        self.tail: FPNode | None = None
        self.count = 0


class FPTree:
    """Prefix tree over id-sorted transactions with per-item node chains."""

    def __init__(self):
        self.root = FPNode(None, None)
        self.header: dict[int, _Header] = {}
        # filled in by build_tree for the top-level tree only
        self.items: list[Item] = []
        self.n_transactions = 0
        self.min_count = 0

    def insert(self, path: Sequence[int], count: int) -> None:
        node = self.root
        for item in path:
            child = node.children.get(item)
            if child is None:
                child = FPNode(item, node)
                node.children[item] = child
                h = self.header.get(item)
                if h is None:
                    h = self.header[item] = _Header()
                if h.tail is None:
                    h.head = child
                else:
                    h.tail.link = child
                h.tail = child
            child.count += count
            self.header[item].count += count
            node = child

    def chain(self, item: int):
        node = self.header[item].head
        while node is not None:
            yield node
            node = node.link

    def prefix_paths(self, item: int) -> list[tuple[tuple[int, ...], int]]:
        """Conditional pattern base of ``item``: root-to-parent paths with counts."""
        base = []
        for node in self.chain(item):
            path = []
            p = node.parent
            while p is not None and p.item is not None:
                path.append(p.item)
                p = p.parent
            if path:
                path.reverse()
                base.append((tuple(path), node.count))
        return base

    def single_path(self) -> list[FPNode] | None:
        nodes = []
        node = self.root
        while node.children:
            if len(node.children) > 1:
                return None
            node = next(iter(node.children.values()))
            nodes.append(node)
        return nodes

    @property
    def item_order(self) -> list[Item]:
        return [self.items[i] for i in sorted(self.header)]

    def header_counts(self) -> dict[Item, int]:
        return {self.items[i]: h.count for i, h in self.header.items()}


def _conditional_tree(base: list[tuple[tuple[int, ...], int]], min_count: int) -> FPTree:
    counts: Counter[int] = Counter()
    for path, c in base:
        for item in path:
            counts[item] += c
    tree = FPTree()
    for path, c in base:
        kept = [i for i in path if counts[i] >= min_count]
        if kept:
            tree.insert(kept, c)
    return tree


def _mine_tree(tree: FPTree, suffix: tuple[int, ...], min_count: int, max_size: int | None,
               out: list[tuple[tuple[int, ...], int]]) -> None:
    path = tree.single_path()
    if path is not None:
        # every combination of path nodes; its count is the deepest node's count
        room = len(path) if max_size is None else min(len(path), max_size - len(suffix))
        for k in range(1, room + 1):
            for combo in combinations(path, k):
                out.append((tuple(n.item for n in combo) + suffix, combo[-1].count))
        return
    for item in sorted(tree.header, reverse=True):
        total = tree.header[item].count
        if total < min_count:
            continue
        _mine_item(tree, item, total, suffix, min_count, max_size, out)


def _mine_item(tree: FPTree, item: int, total: int, suffix: tuple[int, ...], min_count: int,
               max_size: int | None, out: list) -> None:
    new = (item,) + suffix
    out.append((new, total))
    if max_size is not None and len(new) >= max_size:
        return
    cond = _conditional_tree(tree.prefix_paths(item), min_count)
    if cond.header:
        _mine_tree(cond, new, min_count, max_size, out)


def _mine_pattern_base(args) -> list[tuple[tuple[int, ...], int]]:
    item, total, base, min_count, max_size = args
    out: list[tuple[tuple[int, ...], int]] = [((item,), total)]
    if max_size is None or max_size > 1:
        cond = _conditional_tree(base, min_count)
        if cond.header:
            _mine_tree(cond, (item,), min_count, max_size, out)
    return out


def build_tree(transactions: Sequence[Transaction], params: MiningParams) -> FPTree:
    """Build the FP-tree of the frequent items of ``transactions``.

    Identical transactions are inserted once with their multiplicity, which
    is what makes low-cardinality historian data cheap to mine.
    """
    if not transactions:
        raise EmptyDatasetError("cannot mine an empty dataset")
    n = len(transactions)
    min_count = params.resolve(n)

    distinct = Counter(t.items for t in transactions)
    item_counts: Counter[Item] = Counter()
    for items, c in distinct.items():
        for it in items:
            item_counts[it] += c
    frequent = sorted((it for it, c in item_counts.items() if c >= min_count),
                      key=lambda it: (-item_counts[it], it))
    ids = {it: i for i, it in enumerate(frequent)}

    paths: Counter[tuple[int, ...]] = Counter()
    for items, c in distinct.items():
        path = tuple(sorted(ids[it] for it in items if it in ids))
        if path:
            paths[path] += c

    tree = FPTree()
    tree.items = frequent
    tree.n_transactions = n
    tree.min_count = min_count
    for path in sorted(paths):
        tree.insert(path, paths[path])
    return tree


def mine(transactions: Sequence[Transaction], params: MiningParams, workers: int = 1) -> list[Itemset]:
    """All itemsets with support count >= the resolved minimum, with exact counts.

    With ``workers > 1`` each top-level conditional pattern base is mined in
    its own process; the merged result is re-sorted, so the output does not
    depend on the worker count.
    """
    tree = build_tree(transactions, params)
    min_count, max_size = tree.min_count, params.max_itemset_size
    jobs = [
        (item, tree.header[item].count, tree.prefix_paths(item), min_count, max_size)
        for item in sorted(tree.header, reverse=True)
    ]
    found: list[tuple[tuple[int, ...], int]] = []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_mine_pattern_base, jobs, chunksize=max(1, len(jobs) // (4 * workers))):
                found.extend(part)
    else:
        for job in jobs:
            found.extend(_mine_pattern_base(job))

    decode = tree.items
    result = [canonicalize((decode[i] for i in ids), count) for ids, count in found]
    result.sort(key=Itemset.sort_key)
    return result


def write_itemsets(itemsets: Iterable[Itemset], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for s in itemsets:
            fh.write(f"{s}\t{s.support_count}\n")


def read_itemsets(path: str | Path) -> list[Itemset]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            items, sep, count = line.rpartition("\t")
            if not sep:
                raise AttackRulesError(f"{path}:{line_no}: expected '<items>\\t<count>'")
            out.append(canonicalize((Item.parse(t) for t in items.split(",")), int(count)))
    return out
