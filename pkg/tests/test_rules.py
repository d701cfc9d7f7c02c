from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from attackrules.core import Item, Itemset, Rule, RuleSet, rule_key
from attackrules.differ import PUBLISHED_TALLY, PUBLISHED_TOTAL
from attackrules.fpgrowth import MiningParams, mine
from attackrules.rules import (
    MissingSupportError, RuleParams, ZeroSupportError, confidence, generate_rules, read_rules,
    tally_by_antecedent_size, write_rules,
)
from oracles import brute_force_rules, count, random_dataset
from test_fpgrowth import tx

A, B = Item("A", "On"), Item("B", "Off")


def test_confidence_equal_counts_is_one():
    assert confidence([A], B, {(A,): 3164, (A, B): 3164}) == 1


def test_confidence_exact_rational_below_threshold():
    c = confidence([A], B, {(A,): 3, (A, B): 2})
    assert c == Fraction(2, 3) and not c >= 1


def test_confidence_from_data():
    data = [tx("A=On", "B=Off"), tx("A=On", "B=Off"), tx("A=On", "B=On")]
    lookup = {(A,): count([A], data), (A, B): count([A, B], data)}
    assert confidence([A], B, lookup) == Fraction(2, 3)


def test_confidence_errors():
    with pytest.raises(MissingSupportError):
        confidence([A], B, {(A,): 3})
    with pytest.raises(ZeroSupportError):
        confidence([A], B, {(A,): 0, (A, B): 0})


def test_generate_uniform():
    data = [tx("A=On", "B=Off")] * 3
    rules = generate_rules(mine(data, MiningParams(1.0)), RuleParams())
    assert {rule_key(r) for r in rules} == {"A=On=>B=Off", "B=Off=>A=On"}


def test_generate_singletons_only():
    assert len(generate_rules([Itemset((A,), 3), Itemset((B,), 2)])) == 0


def test_generate_requires_downward_closure():
    with pytest.raises(MissingSupportError):
        generate_rules([Itemset((A, B), 2)])


def test_rule_params_validation():
    with pytest.raises(ValueError):
        RuleParams(min_confidence=0)
    with pytest.raises(ValueError):
        RuleParams(min_antecedent_size=3, max_antecedent_size=2)


def _check_against_oracle(data, min_count, conf, lo, hi):
    itemsets = mine(data, MiningParams(min_support=None, min_count=min_count))
    rules = generate_rules(itemsets, RuleParams(conf, lo, hi), len(data))
    assert {rule_key(r) for r in rules} == brute_force_rules(data, min_count, conf, lo, hi)
    for r in rules:
        z = (*r.antecedent, r.consequent)
        # soundness from raw transactions, exact rationals
        assert Fraction(count(z, data), count(r.antecedent, data)) >= conf
        assert r.support == Fraction(count(z, data), len(data))
        assert r.confidence >= r.support
        if conf == 1:
            assert all(r.consequent in t.items for t in data if set(r.antecedent) <= t.items)
    return rules


@given(st.randoms(use_true_random=False), st.sampled_from([Fraction(1), Fraction(2, 3), Fraction(1, 2)]),
       st.integers(1, 3), st.none() | st.integers(3, 6))
def test_generate_matches_brute_force(rnd, conf, lo, hi):
    data = random_dataset(rnd)
    _check_against_oracle(data, rnd.randint(1, max(1, len(data) // 2)), conf, lo, hi)


def test_tally_empty():
    assert tally_by_antecedent_size(RuleSet()) == {}


def test_published_tally_sums_to_reported_total():
    assert sum(PUBLISHED_TALLY.values()) == 329069 == PUBLISHED_TOTAL


def test_tally_partitions():
    data = [tx("A=On", "B=Off", "C=On")] * 3
    rules = generate_rules(mine(data, MiningParams(1.0)))
    tally = tally_by_antecedent_size(rules)
    assert tally == {1: 6, 2: 3}
    assert sum(tally.values()) == len(rules)


def test_antecedent_bounds():
    data = [tx("A=On", "B=Off", "C=On", "D=On")] * 2
    rules = generate_rules(mine(data, MiningParams(1.0)), RuleParams(1, 2, 2))
    assert set(tally_by_antecedent_size(rules)) == {2}


@pytest.mark.parametrize("suffix", [".tsv", ".jsonl"])
def test_rule_file_roundtrip(tmp_path, suffix):
    data = [tx("A=On", "B=Off", "C=On"), tx("A=On", "B=Off", "C=Off"), tx("A=Off", "B=On", "C=On")]
    rules = generate_rules(mine(data, MiningParams(min_support=None, min_count=1)), RuleParams(Fraction(1, 2)), 3)
    path = tmp_path / f"rules{suffix}"
    write_rules(rules, path)
    back = read_rules(path, 3)
    assert back == rules
    for r in rules:
        b = back.get(r)
        assert (b.support_count, b.antecedent_count, b.support) == (r.support_count, r.antecedent_count, r.support)


def test_text_dump_format(tmp_path):
    r = Rule((Item("MV304", "Close"), Item("FIT301", "<0.5")), Item("P302", "Off"), 4, 6)
    path = tmp_path / "r.tsv"
    write_rules([r], path)
    assert path.read_text() == "FIT301<0.5,MV304=Close => P302=Off\t4\t2/3\n"
