"""Mine attack-pattern rules for industrial control systems from historian logs."""

from .core import (
    AttackRulesError, InconsistentItemsetError, Item, Itemset, Rule, RuleSet, Transaction,
    canonicalize, make_item, rule_key,
)
from .differ import DiffReport, diff, report, symmetric_diff
from .fpgrowth import MiningParams, build_tree, mine, support, support_count
from .ingest import TransformConfig, binarize_flow, ingest, resolve_valve, transform
from .rules import RuleParams, confidence, generate_rules, tally_by_antecedent_size

__version__ = "0.1.0"
