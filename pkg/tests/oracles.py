"""Brute-force reference implementations used as test oracles.

Nothing here shares code with the miner or rule generator: candidates are
enumerated exhaustively and counted straight off the transaction list.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, product

from attackrules.core import Item, Transaction


def count(items, transactions) -> int:
    items = set(items)
    return sum(1 for t in transactions if items <= t.items)


def brute_force_itemsets(transactions, min_count: int, max_size: int | None = None) -> dict[tuple, int]:
    """Every consistent itemset (one state per attribute) with count >= min_count."""
    states: dict[str, set[str]] = {}
    for t in transactions:
        for it in t.items:
            states.setdefault(it.attribute, set()).add(it.state)
    attrs = sorted(states)
    top = len(attrs) if max_size is None else min(max_size, len(attrs))
    out = {}
    for k in range(1, top + 1):
        for chosen in combinations(attrs, k):
            for combo in product(*(sorted(states[a]) for a in chosen)):
                items = tuple(Item(a, s) for a, s in zip(chosen, combo))
                c = count(items, transactions)
                if c >= min_count:
                    out[items] = c
    return out


def brute_force_rules(transactions, min_count: int, min_confidence=Fraction(1),
                      min_ante: int = 1, max_ante: int | None = None) -> set[str]:
    """Keys of every rule Z - {y} => y, checking support and confidence from raw counts."""
    keys = set()
    for z in brute_force_itemsets(transactions, min_count):
        if len(z) < 2:
            continue
        size = len(z) - 1
        if size < min_ante or (max_ante is not None and size > max_ante):
            continue
        for y in z:
            x = tuple(i for i in z if i != y)
            if Fraction(count(z, transactions), count(x, transactions)) >= min_confidence:
                keys.add(",".join(map(str, sorted(x))) + "=>" + str(y))
    return keys


def random_dataset(rng: random.Random, max_rows: int = 12, max_attrs: int = 8,
                   full_rows: bool = True) -> list[Transaction]:
    """Random binary dataset; with ``full_rows`` every row has all attributes."""
    n_rows = rng.randint(1, max_rows)
    n_attrs = rng.randint(1, max_attrs)
    labels = [("On", "Off"), ("Open", "Close"), (">=0.5", "<0.5")]
    attrs = [(f"A{j}", labels[j % 3]) for j in range(n_attrs)]
    bias = [rng.random() for _ in attrs]
    rows = []
    for i in range(n_rows):
        items = []
        for (name, (s1, s0)), b in zip(attrs, bias):
            if not full_rows and rng.random() < 0.2:
                continue
            items.append(Item(name, s1 if rng.random() < b else s0))
        rows.append(Transaction(frozenset(items), i))
    return rows
