"""Domain vocabulary: items, transactions, itemsets, rules and rule sets.

Items render the way an operator reads them: ``MV304=Close`` for
actuators and ``FIT301<0.5`` for thresholded sensors.  Rule identity is
structural, so two rules with the same antecedent and consequent are the
same rule no matter which dataset (and hence which metrics) they came from.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple


class AttackRulesError(Exception):
    """Base class for all data errors raised by this package."""


class InconsistentItemsetError(AttackRulesError, ValueError):
    """Two states of the same attribute were placed in one itemset."""


class ItemFormatError(AttackRulesError, ValueError):
    pass


_ATTRIBUTE_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")
_ITEM_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_.\-]*)(?:=(.+)|([<>].*))$")
_FORBIDDEN_IN_STATE = (",", "\t", "\n", "\r", "=>")


class Item(NamedTuple):
    """One attribute in one state, e.g. ``Item("MV101", "Open")``.

    Ordering is (attribute, state), which fixes every canonical form.
    """

    attribute: str
    state: str

    def __str__(self) -> str:
        if self.state[0] in "<>":
            return f"{self.attribute}{self.state}"
        return f"{self.attribute}={self.state}"

    @classmethod
    def parse(cls, text: str) -> "Item":
        m = _ITEM_RE.match(text.strip())
        if m is None:
            raise ItemFormatError(f"cannot parse item {text!r}")
        state = m.group(2) if m.group(2) is not None else m.group(3)
        return make_item(m.group(1), state)


def make_item(attribute: str, state: str) -> Item:
    """Build an Item after checking it renders unambiguously."""
    if not attribute or not _ATTRIBUTE_RE.match(attribute):
        raise ItemFormatError(f"invalid attribute name {attribute!r}")
    if not state or any(tok in state for tok in _FORBIDDEN_IN_STATE):
        raise ItemFormatError(f"invalid state {state!r} for {attribute}")
    return Item(attribute, state)


def _check_consistent(items: tuple[Item, ...]) -> None:
    for prev, cur in zip(items, items[1:]):
        if prev.attribute == cur.attribute:
            raise InconsistentItemsetError(
                f"attribute {cur.attribute} appears as both {prev.state!r} and {cur.state!r}"
            )


@dataclass(frozen=True)
class Transaction:
    """A discretized historian row: exactly one item per retained attribute."""

    items: frozenset[Item]
    row_index: int = 0

    def __post_init__(self):
        attrs = [it.attribute for it in self.items]
        if len(set(attrs)) != len(attrs):
            raise InconsistentItemsetError(f"row {self.row_index}: attribute repeated in transaction")

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, item: object) -> bool:
        return item in self.items

    def sorted_items(self) -> tuple[Item, ...]:
        return tuple(sorted(self.items))


@dataclass(frozen=True)
class Itemset:
    """Canonically sorted, duplicate-free items.

    ``support_count`` is the number of transactions containing every item,
    or None for an itemset that has not been counted against any data.
    """

    items: tuple[Item, ...]
    support_count: int | None = None

    def __post_init__(self):
        if self.support_count is not None and self.support_count < 0:
            raise ValueError("support_count must be nonnegative")

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[Item]:
        return iter(self.items)

    def __str__(self) -> str:
        return ",".join(map(str, self.items))

    @property
    def attributes(self) -> tuple[str, ...]:
        return tuple(it.attribute for it in self.items)

    def sort_key(self) -> tuple:
        return (len(self.items), self.items)


def canonicalize(items: Iterable[Item], support_count: int | None = None) -> Itemset:
    """Sort and deduplicate ``items``; reject two states of one attribute."""
    canon = tuple(sorted(set(items)))
    _check_consistent(canon)
    return Itemset(canon, support_count)


@dataclass(frozen=True)
class Rule:
    """``antecedent => consequent`` with exact integer counts behind its metrics.

    Equality and hashing only look at the antecedent items and the
    consequent.  ``origin`` is a provenance tag used by symmetric
    differences (``"A"`` or ``"B"``).
    """

    antecedent: tuple[Item, ...]
    consequent: Item
    support_count: int = field(default=0, compare=False)
    antecedent_count: int = field(default=0, compare=False)
    n_transactions: int | None = field(default=None, compare=False)
    origin: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.antecedent:
            raise ValueError("a rule needs a nonempty antecedent")
        ante = tuple(self.antecedent)
        if list(ante) != sorted(set(ante)):
            ante = canonicalize(ante).items
        else:
            _check_consistent(ante)
        object.__setattr__(self, "antecedent", ante)
        if self.consequent.attribute in {it.attribute for it in self.antecedent}:
            raise InconsistentItemsetError(
                f"consequent attribute {self.consequent.attribute} also appears in the antecedent"
            )
        if self.support_count > self.antecedent_count:
            raise ValueError("rule support cannot exceed antecedent support")

    @property
    def size(self) -> int:
        """Antecedent size."""
        return len(self.antecedent)

    @property
    def confidence(self) -> Fraction:
        if self.antecedent_count == 0:
            return Fraction(0)
        return Fraction(self.support_count, self.antecedent_count)

    @property
    def support(self) -> Fraction | None:
        if not self.n_transactions:
            return None
        return Fraction(self.support_count, self.n_transactions)

    def sort_key(self) -> tuple:
        return (len(self.antecedent), self.antecedent, self.consequent)

    def pretty(self) -> str:
        """Human-facing form: ``FIT301<0.5, MV304=Close → P302=Off``."""
        return ", ".join(map(str, self.antecedent)) + " → " + str(self.consequent)

    def __str__(self) -> str:
        return rule_key(self)


def rule_key(rule: Rule) -> str:
    """Canonical text identity of a rule, e.g. ``FIT301<0.5,MV304=Close=>P302=Off``.

    Metrics are ignored.  Item names cannot contain ``,`` or ``=>`` (enforced
    by :func:`make_item`), so the key is injective; encode as UTF-8 for bytes.
    """
    return ",".join(map(str, rule.antecedent)) + "=>" + str(rule.consequent)


def parse_rule_key(key: str) -> tuple[tuple[Item, ...], Item]:
    left, sep, right = key.partition("=>")
    if not sep or not left:
        raise ItemFormatError(f"malformed rule {key!r}")
    antecedent = canonicalize(Item.parse(t) for t in left.split(",")).items
    return antecedent, Item.parse(right)


class RuleSet:
    """Rules with set semantics on :func:`rule_key`.

    Iteration is sorted by antecedent size, then canonical item order.
    When the same key is added twice the first copy (and its metrics) wins.
    """

    def __init__(self, rules: Iterable[Rule] = ()):
        self._rules: dict[tuple, Rule] = {}
        for r in rules:
            self._rules.setdefault((r.antecedent, r.consequent), r)
        self._order: list[Rule] | None = None

    @staticmethod
    def _k(rule: Rule) -> tuple:
        return (rule.antecedent, rule.consequent)

    def __len__(self) -> int:
        return len(self._rules)

    def __iter__(self) -> Iterator[Rule]:
        if self._order is None:
            self._order = sorted(self._rules.values(), key=Rule.sort_key)
        return iter(self._order)

    def __contains__(self, rule: object) -> bool:
        return isinstance(rule, Rule) and self._k(rule) in self._rules

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RuleSet):
            return NotImplemented
        return self._rules.keys() == other._rules.keys()

    def __repr__(self) -> str:
        return f"RuleSet({len(self)} rules)"

    def get(self, rule: Rule) -> Rule | None:
        return self._rules.get(self._k(rule))

    def keys(self) -> set[str]:
        return {rule_key(r) for r in self._rules.values()}

    def difference(self, other: "RuleSet") -> "RuleSet":
        return RuleSet(r for k, r in self._rules.items() if k not in other._rules)

    def intersection(self, other: "RuleSet") -> "RuleSet":
        return RuleSet(r for k, r in self._rules.items() if k in other._rules)

    def union(self, other: "RuleSet") -> "RuleSet":
        return RuleSet([*self._rules.values(), *other._rules.values()])

    __sub__ = difference
    __and__ = intersection
    __or__ = union

    def attributes(self) -> set[str]:
        out = set()
        for r in self._rules.values():
            out.update(it.attribute for it in r.antecedent)
            out.add(r.consequent.attribute)
        return out
