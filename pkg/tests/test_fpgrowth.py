import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from attackrules.core import Item, Itemset, Transaction
from attackrules.fpgrowth import (
    EmptyDatasetError, MiningParams, build_tree, mine, read_itemsets, support, support_count,
    write_itemsets,
)
from oracles import brute_force_itemsets, count, random_dataset


def tx(*texts, i=0):
    return Transaction(frozenset(Item.parse(t) for t in texts), i)


ABC = [tx("A=On", "B=Off"), tx("A=On", "B=On"), tx("A=Off", "B=Off")]

BASKET = [
    tx("Bread=1", "Milk=1"),
    tx("Bread=1", "Diaper=1", "Beer=1", "Eggs=1"),
    tx("Milk=1", "Diaper=1", "Beer=1", "Coke=1"),
    tx("Bread=1", "Milk=1", "Diaper=1", "Beer=1"),
    tx("Bread=1", "Milk=1", "Diaper=1", "Coke=1"),
]


def as_dict(itemsets):
    return {s.items: s.support_count for s in itemsets}


def test_support_of_empty_itemset_is_one():
    assert support(Itemset(()), ABC) == 1


def test_support_small():
    assert count([Item("A", "On"), Item("B", "Off")], ABC) == 1  # oracle
    assert support([Item("A", "On"), Item("B", "Off")], ABC) == Fraction(1, 3)


def test_support_rare_state():
    on, off = tx("P602=On"), tx("P602=Off")
    data = [on] * 3164 + [off] * (410_400 - 3164)
    assert support([Item("P602", "On")], data) == Fraction(3164, 410400)
    assert support_count([Item("P602", "On")], data) == 3164


def test_support_empty_dataset():
    with pytest.raises(EmptyDatasetError):
        support([Item("A", "On")], [])


def test_resolve_uses_ceiling_inclusive():
    assert MiningParams(Fraction(7, 1000)).resolve(410_400) == 2873
    assert MiningParams(0.008).resolve(410_400) == 3284
    assert MiningParams(0.1).resolve(30) == 3  # float goes through its decimal repr
    assert MiningParams(min_support=None, min_count=5).resolve(3) == 5


@pytest.mark.parametrize("kwargs", [dict(min_support=0), dict(min_support=1.5), dict(min_support=None, min_count=0),
                                    dict(min_support=None)])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        MiningParams(**kwargs)


def test_build_tree_identical_rows_single_path():
    data = [tx("A=On", "B=Off", "C=On")] * 7
    tree = build_tree(data, MiningParams(1.0))
    path = tree.single_path()
    assert path is not None and len(path) == 3
    assert all(n.count == 7 for n in path)


def test_build_tree_nothing_frequent():
    tree = build_tree(ABC, MiningParams(min_support=None, min_count=4))
    assert tree.root.children == {} and tree.header == {}


def test_build_tree_header_counts_basket():
    tree = build_tree(BASKET, MiningParams(min_support=None, min_count=1))
    oracle = {it: count([it], BASKET) for t in BASKET for it in t.items}
    assert tree.header_counts() == oracle
    assert {str(k): v for k, v in oracle.items()} == {
        "Bread=1": 4, "Milk=1": 4, "Diaper=1": 4, "Beer=1": 3, "Coke=1": 2, "Eggs=1": 1}
    # ties broken by canonical order
    assert [str(i) for i in tree.item_order] == ["Bread=1", "Diaper=1", "Milk=1", "Beer=1", "Coke=1", "Eggs=1"]


def _tree_invariants(tree, data):
    rank = {it: i for i, it in enumerate(tree.items)}
    for item_id, header in tree.header.items():
        assert sum(n.count for n in tree.chain(item_id)) == header.count
        assert header.count == count([tree.items[item_id]], data)

    def walk(node, last):
        for child in node.children.values():
            assert child.item > last
            walk(child, child.item)
    walk(tree.root, -1)
    assert all(rank[it] == i for i, it in enumerate(tree.item_order))


@given(st.randoms(use_true_random=False))
def test_tree_invariants_random(rnd):
    data = random_dataset(rnd, full_rows=False)
    tree = build_tree(data, MiningParams(min_support=None, min_count=rnd.randint(1, 3)))
    _tree_invariants(tree, data)


def test_mine_uniform():
    data = [tx("A=On", "B=Off")] * 3
    got = mine(data, MiningParams(1.0))
    assert [(str(s), s.support_count) for s in got] == [("A=On", 3), ("B=Off", 3), ("A=On,B=Off", 3)]


def test_mine_half_support():
    data = [tx("A=1", "B=1"), tx("A=1"), tx("B=1")]
    got = as_dict(mine(data, MiningParams(0.5)))
    assert got == {(Item("A", "1"),): 2, (Item("B", "1"),): 2}


def test_mine_random_10x6_matches_enumeration():
    rng = random.Random(10)
    data = []
    for i in range(10):
        data.append(Transaction(frozenset(Item(f"A{j}", rng.choice(["On", "Off"])) for j in range(6)), i))
    got = as_dict(mine(data, MiningParams(min_support=None, min_count=2)))
    assert got == brute_force_itemsets(data, 2)


def test_mine_empty_dataset():
    with pytest.raises(EmptyDatasetError):
        mine([], MiningParams())


def test_mine_output_order():
    got = mine(BASKET, MiningParams(min_support=None, min_count=2))
    assert got == sorted(got, key=lambda s: (len(s), s.items))


def _random_params(rnd, n):
    if rnd.random() < 0.5:
        return MiningParams(min_support=None, min_count=rnd.randint(1, n + 1))
    return MiningParams(Fraction(rnd.randint(1, 20), 20))


@given(st.randoms(use_true_random=False), st.booleans(), st.none() | st.integers(1, 4))
def test_mine_matches_brute_force(rnd, full, cap):
    data = random_dataset(rnd, full_rows=full)
    params = _random_params(rnd, len(data))
    params = MiningParams(params.min_support, params.min_count, cap)
    got = as_dict(mine(data, params))
    assert got == brute_force_itemsets(data, params.resolve(len(data)), cap)


@given(st.randoms(use_true_random=False))
def test_downward_closure_and_antimonotone(rnd):
    data = random_dataset(rnd)
    got = as_dict(mine(data, _random_params(rnd, len(data))))
    for items, c in got.items():
        attrs = [i.attribute for i in items]
        assert len(set(attrs)) == len(attrs)
        for k in range(1, len(items)):
            for sub in combinations(items, k):
                assert sub in got and got[sub] >= c


def test_mine_deterministic_across_workers():
    rnd = random.Random(3)
    data = [Transaction(frozenset(Item(f"A{j}", rnd.choice("xy")) for j in range(8)), i) for i in range(300)]
    params = MiningParams(0.02)
    base = mine(data, params, workers=1)
    assert mine(data, params, workers=2) == base
    assert [s.support_count for s in mine(data, params, workers=3)] == [s.support_count for s in base]


def test_itemset_file_roundtrip(tmp_path):
    got = mine(BASKET, MiningParams(min_support=None, min_count=2))
    path = tmp_path / "itemsets.tsv"
    write_itemsets(got, path)
    assert path.read_text().splitlines()[0] == "Beer=1\t3"
    assert read_itemsets(path) == got
