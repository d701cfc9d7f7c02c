"""Association rules with single-item consequents, from frequent itemsets."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

from .core import AttackRulesError, Item, Itemset, Rule, RuleSet, canonicalize, parse_rule_key
from .fpgrowth import as_fraction


class MissingSupportError(AttackRulesError):
    """An antecedent's count was not available; the itemset list was not downward closed."""


class ZeroSupportError(AttackRulesError):
    pass


@dataclass(frozen=True)
class RuleParams:
    min_confidence: Fraction | float = Fraction(1)
    min_antecedent_size: int = 1
    # None means no cap beyond what the data allows (|attributes| - 1)
    max_antecedent_size: int | None = None

    def __post_init__(self):
        conf = as_fraction(self.min_confidence)
        if not (0 < conf <= 1):
            raise ValueError(f"min_confidence must lie in (0, 1], got {self.min_confidence}")
        object.__setattr__(self, "min_confidence", conf)
        if self.min_antecedent_size < 1:
            raise ValueError("min_antecedent_size must be >= 1")
        if self.max_antecedent_size is not None and self.max_antecedent_size < self.min_antecedent_size:
            raise ValueError("min_antecedent_size exceeds max_antecedent_size")

    def admits(self, size: int) -> bool:
        if size < self.min_antecedent_size:
            return False
        return self.max_antecedent_size is None or size <= self.max_antecedent_size


def confidence(antecedent: Itemset | Iterable[Item], consequent: Item,
               supports: Mapping[tuple[Item, ...], int]) -> Fraction:
    """Exact ``count(X ∪ {y}) / count(X)`` from a count lookup keyed by canonical item tuples."""
    x = canonicalize(antecedent).items
    xy = canonicalize((*x, consequent)).items
    try:
        num, den = supports[xy], supports[x]
    except KeyError as exc:
        raise MissingSupportError(f"no support count for {','.join(map(str, exc.args[0]))}") from None
    if den == 0:
        raise ZeroSupportError(f"antecedent {','.join(map(str, x))} has zero support")
    return Fraction(num, den)


def generate_rules(frequent: Iterable[Itemset], params: RuleParams = RuleParams(),
                   n_transactions: int | None = None) -> RuleSet:
    """Every ``Z \\ {y} => y`` over frequent Z with confidence >= the threshold.

    ``n_transactions`` is only used to attach a support fraction to each rule.
    """
    frequent = list(frequent)
    counts = {s.items: s.support_count for s in frequent}
    if None in counts.values():
        raise MissingSupportError("frequent itemsets must carry support counts")
    min_conf = params.min_confidence
    out = []
    for z in frequent:
        size = len(z.items) - 1
        if size < 1 or not params.admits(size):
            continue
        z_count = counts[z.items]
        for j, y in enumerate(z.items):
            x = z.items[:j] + z.items[j + 1:]
            x_count = counts.get(x)
            if x_count is None:
                raise MissingSupportError(f"no support count for {','.join(map(str, x))}")
            if x_count == 0:
                raise ZeroSupportError(f"antecedent {','.join(map(str, x))} has zero support")
            if Fraction(z_count, x_count) >= min_conf:
                out.append(Rule(x, y, z_count, x_count, n_transactions))
    return RuleSet(out)


def tally_by_antecedent_size(rules: Iterable[Rule]) -> dict[int, int]:
    return dict(sorted(Counter(r.size for r in rules).items()))


def _fmt_fraction(f: Fraction) -> str:
    return str(f)


def write_rules(rules: Iterable[Rule], path: str | Path) -> None:
    """Text dump (``items => item\\tcount\\tconfidence``), or JSON lines for ``*.jsonl``."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        if path.suffix == ".jsonl":
            for r in rules:
                fh.write(json.dumps(rule_to_record(r), sort_keys=True) + "\n")
        else:
            for r in rules:
                fh.write(format_rule_line(r) + "\n")


def format_rule_line(r: Rule) -> str:
    return f"{','.join(map(str, r.antecedent))} => {r.consequent}\t{r.support_count}\t{_fmt_fraction(r.confidence)}"


def rule_to_record(r: Rule) -> dict:
    rec = {
        "antecedent": [str(it) for it in r.antecedent],
        "consequent": str(r.consequent),
        "support_count": r.support_count,
        "antecedent_count": r.antecedent_count,
        "confidence": _fmt_fraction(r.confidence),
        "n_transactions": r.n_transactions,
        "support": None if r.support is None else _fmt_fraction(r.support),
    }
    if r.origin is not None:
        rec["origin"] = r.origin
    return rec


def read_rules(path: str | Path, n_transactions: int | None = None) -> RuleSet:
    path = Path(path)
    rules = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                if path.suffix == ".jsonl":
                    rec = json.loads(line)
                    ante = [Item.parse(t) for t in rec["antecedent"]]
                    rules.append(Rule(tuple(ante), Item.parse(rec["consequent"]), rec["support_count"],
                                      rec["antecedent_count"], rec.get("n_transactions") or n_transactions,
                                      rec.get("origin")))
                    continue
                body, count, conf = line.split("\t")
                ante, cons = parse_rule_key(body.replace(" => ", "=>"))
                count_i, conf_f = int(count), Fraction(conf)
                ante_count = count_i / conf_f if conf_f else 0
                if ante_count != int(ante_count):
                    raise ValueError(f"inconsistent count {count} and confidence {conf}")
                rules.append(Rule(ante, cons, count_i, int(ante_count), n_transactions))
            except (ValueError, KeyError) as exc:
                raise AttackRulesError(f"{path}:{line_no}: {exc}") from exc
    return RuleSet(rules)

