"""Isolating attack signatures: rules mined from attack-period data that do
not also hold under normal operation.

Comparison is by rule identity only; a rule found in both datasets with
different support or confidence counts as shared.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable

from .core import Rule, RuleSet
from .rules import tally_by_antecedent_size

# Antecedent size -> number of attack patterns in the published SWaT run.
PUBLISHED_TALLY: dict[int, int] = {
    2: 96, 3: 1554, 4: 8133, 5: 20485, 6: 45006, 7: 68294, 8: 74348,
    9: 58936, 10: 33903, 11: 13832, 12: 3802, 13: 632, 14: 48,
}
PUBLISHED_TOTAL = 329069
PUBLISHED_SIZES = range(2, 15)


class VocabularyMismatchWarning(UserWarning):
    """The two rule sets were mined over different attribute alphabets."""


@dataclass
class VocabularyCheck:
    only_in_attack: list[str] = field(default_factory=list)
    only_in_normal: list[str] = field(default_factory=list)

    @property
    def mismatched(self) -> bool:
        return bool(self.only_in_attack or self.only_in_normal)


def check_vocabulary(attack_attributes: Iterable[str] | None,
                     normal_attributes: Iterable[str] | None) -> VocabularyCheck:
    if attack_attributes is None or normal_attributes is None:
        return VocabularyCheck()
    a, b = set(attack_attributes), set(normal_attributes)
    check = VocabularyCheck(sorted(a - b), sorted(b - a))
    if check.mismatched:
        warnings.warn(
            f"attribute alphabets differ: only in attack {check.only_in_attack}, "
            f"only in normal {check.only_in_normal}",
            VocabularyMismatchWarning,
            stacklevel=3,
        )
    return check


def diff(attack_rules: RuleSet, normal_rules: RuleSet,
         attack_attributes: Iterable[str] | None = None,
         normal_attributes: Iterable[str] | None = None) -> RuleSet:
    """Rules of ``attack_rules`` whose key is absent from ``normal_rules``.

    The retained attribute lists of the two datasets, when given, are only
    compared to warn about a vocabulary mismatch; see :func:`report`.
    """
    check_vocabulary(attack_attributes, normal_attributes)
    return attack_rules.difference(normal_rules)


def symmetric_diff(a: RuleSet, b: RuleSet) -> RuleSet:
    """``(a - b) | (b - a)``, each rule tagged with ``origin`` "A" or "B"."""
    return RuleSet([
        *(replace(r, origin="A") for r in a.difference(b)),
        *(replace(r, origin="B") for r in b.difference(a)),
    ])


@dataclass
class DiffReport:
    attack_rule_count: int
    normal_rule_count: int
    diff_count: int
    overlap_count: int
    per_size_tally: dict[int, int]
    sample_rules: dict[int, list[str]]
    # attributes missing from the other dataset's alphabet, and how many
    # diff rules mention one of them
    vocabulary: VocabularyCheck = field(default_factory=VocabularyCheck)
    flagged_rule_count: int = 0

    def __post_init__(self):
        if self.diff_count + self.overlap_count != self.attack_rule_count:
            raise ValueError("diff_count + overlap_count must equal attack_rule_count")

    def records(self) -> list[dict]:
        """Line-delimited structured form: one summary record, then one per size."""
        out = [{
            "type": "summary",
            "attack_rule_count": self.attack_rule_count,
            "normal_rule_count": self.normal_rule_count,
            "diff_count": self.diff_count,
            "overlap_count": self.overlap_count,
            "flagged_rule_count": self.flagged_rule_count,
            "only_in_attack": self.vocabulary.only_in_attack,
            "only_in_normal": self.vocabulary.only_in_normal,
        }]
        for size, count in self.per_size_tally.items():
            out.append({"type": "size", "size": size, "count": count,
                        "samples": self.sample_rules.get(size, [])})
        return out

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n" for r in self.records())

    def format(self) -> str:
        lines = [
            f"attack rules (A):   {self.attack_rule_count}",
            f"normal rules (B):   {self.normal_rule_count}",
            f"shared (A & B):     {self.overlap_count}",
            f"signatures (A - B): {self.diff_count}",
        ]
        if self.vocabulary.mismatched:
            lines.append(f"vocabulary mismatch: only in attack {self.vocabulary.only_in_attack or '-'}, "
                         f"only in normal {self.vocabulary.only_in_normal or '-'}; "
                         f"{self.flagged_rule_count} signatures mention such attributes")
        lines.append("")
        lines.append(f"{'size':>4}  {'count':>8}  sample")
        for size, count in self.per_size_tally.items():
            samples = self.sample_rules.get(size) or [""]
            lines.append(f"{size:>4}  {count:>8}  {samples[0]}")
            lines.extend(f"{'':>4}  {'':>8}  {s}" for s in samples[1:])
        lines.append(f"{'all':>4}  {sum(self.per_size_tally.values()):>8}")
        return "\n".join(lines)


def report(diff_rules: RuleSet, samples_per_size: int = 1, *,
           attack_rules: RuleSet | None = None, normal_rules: RuleSet | None = None,
           sizes: Iterable[int] | None = None,
           attack_attributes: Iterable[str] | None = None,
           normal_attributes: Iterable[str] | None = None) -> DiffReport:
    """Tally signatures per antecedent size and keep the first few of each size.

    ``sizes`` restricts the tally (e.g. ``range(2, 15)`` for comparison
    with the published table).  Without ``attack_rules`` the diff is taken
    to be all of A, so the overlap is zero.
    """
    if samples_per_size < 0:
        raise ValueError("samples_per_size must be >= 0")
    keep = set(sizes) if sizes is not None else None
    rules = [r for r in diff_rules if keep is None or r.size in keep]
    tally = tally_by_antecedent_size(rules)
    samples: dict[int, list[str]] = {}
    for r in rules:  # canonical order
        if len(samples.get(r.size, ())) < samples_per_size:
            samples.setdefault(r.size, []).append(r.pretty())

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", VocabularyMismatchWarning)
        vocab = check_vocabulary(attack_attributes, normal_attributes)
    foreign = set(vocab.only_in_attack)
    flagged = sum(1 for r in rules if foreign & {it.attribute for it in (*r.antecedent, r.consequent)})

    n_diff = len(diff_rules)
    n_attack = len(attack_rules) if attack_rules is not None else n_diff
    return DiffReport(
        attack_rule_count=n_attack,
        normal_rule_count=len(normal_rules) if normal_rules is not None else 0,
        diff_count=n_diff,
        overlap_count=n_attack - n_diff,
        per_size_tally=tally,
        sample_rules=samples,
        vocabulary=vocab,
        flagged_rule_count=flagged,
    )


@dataclass
class PublishedComparison:
    rows: list[tuple[int, int, int]]  # (size, mined, published)
    total: int
    published_total: int = PUBLISHED_TOTAL

    @property
    def same_order_of_magnitude(self) -> bool:
        return self.total > 0 and math.floor(math.log10(self.total)) == math.floor(math.log10(self.published_total))

    def format(self) -> str:
        lines = [f"{'size':>4}  {'mined':>8}  {'published':>9}"]
        lines += [f"{s:>4}  {m:>8}  {p:>9}" for s, m, p in self.rows]
        lines.append(f"{'all':>4}  {self.total:>8}  {self.published_total:>9}")
        verdict = "yes" if self.same_order_of_magnitude else "no"
        lines.append(f"same order of magnitude as published total: {verdict}")
        return "\n".join(lines)


def compare_with_published(tally: dict[int, int]) -> PublishedComparison:
    rows = [(s, tally.get(s, 0), PUBLISHED_TALLY[s]) for s in PUBLISHED_SIZES]
    return PublishedComparison(rows, sum(m for _, m, _ in rows))


def explain_absence(rule: Rule, normal_counts, min_count: int, min_confidence) -> bool:
    """True when ``rule`` cannot be a normal rule under the given thresholds:
    its itemset is infrequent in the normal data or its confidence there is
    too low.  ``normal_counts(items)`` returns a support count."""
    z = tuple(sorted((*rule.antecedent, rule.consequent)))
    x_count = normal_counts(rule.antecedent)
    z_count = normal_counts(z)
    if x_count < min_count or z_count < min_count:
        return True
    return z_count < min_confidence * x_count
