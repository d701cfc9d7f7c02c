"""Command-line pipeline: simulate -> transform -> mine -> rules -> diff -> report.

Every subcommand prints its resolved configuration as ``key = value`` lines
(valid input for ``--config``) and writes it next to its output as
``<out>.meta.json``.  Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from .core import AttackRulesError
from .differ import PUBLISHED_SIZES, compare_with_published, diff, report
from .fpgrowth import MiningParams, as_fraction, mine, read_itemsets, write_itemsets
from .ingest import (
    ConfigError, TransformConfig, ingest, read_flat_file, read_transactions, transform,
    transform_config_from_flat, write_transactions,
)
from .plantsim import AttackScenario, PlantConfig, sim_transform_config, write_traces
from .rules import RuleParams, generate_rules, read_rules, write_rules

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_min_support(text: str) -> MiningParams:
    """``"0.007"`` or ``"3164/410400"`` is a fraction of |D|; a bare integer is a count."""
    text = str(text).strip()
    try:
        if text.isdigit():
            return MiningParams(min_support=None, min_count=int(text))
        return MiningParams(min_support=as_fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad min_support {text!r}: {exc}") from None


@dataclass
class PipelineConfig:
    min_support: str = "0.007"
    min_confidence: str = "1"
    min_antecedent_size: int = 1
    max_antecedent_size: int | None = None
    max_itemset_size: int | None = None
    samples_per_size: int = 1
    workers: int = 1
    seed: int = 0
    ticks: int = 5000
    preset: str = "swat"
    transform: TransformConfig = field(default_factory=TransformConfig)

    def mining(self) -> MiningParams:
        p = parse_min_support(self.min_support)
        if self.max_itemset_size is not None:
            p = MiningParams(p.min_support, p.min_count, self.max_itemset_size)
        return p

    def rule_params(self) -> RuleParams:
        try:
            return RuleParams(as_fraction(self.min_confidence), self.min_antecedent_size, self.max_antecedent_size)
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(str(exc)) from None

    def to_flat(self) -> dict[str, str]:
        out = {
            "preset": self.preset,
            "min_support": self.min_support,
            "min_confidence": self.min_confidence,
            "min_antecedent_size": str(self.min_antecedent_size),
            "max_antecedent_size": "" if self.max_antecedent_size is None else str(self.max_antecedent_size),
            "max_itemset_size": "" if self.max_itemset_size is None else str(self.max_itemset_size),
            "samples_per_size": str(self.samples_per_size),
            "workers": str(self.workers),
        }
        out.update(self.transform.to_flat())
        return out


_INT_KEYS = ("min_antecedent_size", "max_antecedent_size", "max_itemset_size", "samples_per_size",
             "workers", "seed", "ticks")


def _opt_int(v: str) -> int | None:
    return None if v.strip() in ("", "none", "None") else int(v)


def resolve_config(args: argparse.Namespace) -> tuple[PipelineConfig, dict[str, str]]:
    """Defaults, overridden by ``--config`` file keys, overridden by flags."""
    flat: dict[str, str] = {}
    if getattr(args, "config", None):
        try:
            flat = read_flat_file(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
    flag_map = {
        "min_support": "min_support", "min_confidence": "min_confidence",
        "min_antecedent": "min_antecedent_size", "max_antecedent": "max_antecedent_size",
        "max_itemset_size": "max_itemset_size", "samples_per_size": "samples_per_size",
        "workers": "workers", "seed": "seed", "ticks": "ticks", "preset": "preset",
    }
    for attr, key in flag_map.items():
        value = getattr(args, attr, None)
        if value is not None:
            flat[key] = str(value)

    cfg = PipelineConfig()
    try:
        for key in ("min_support", "min_confidence", "preset"):
            if key in flat:
                setattr(cfg, key, flat[key].strip())
        for key in _INT_KEYS:
            if key in flat:
                val = _opt_int(flat[key])
                if val is None and key not in ("max_antecedent_size", "max_itemset_size"):
                    raise UsageError(f"{key} needs a value")
                setattr(cfg, key, val)
    except ValueError as exc:
        raise UsageError(f"bad config value: {exc}") from None
    if cfg.preset not in ("swat", "sim"):
        raise UsageError(f"unknown preset {cfg.preset!r} (expected swat or sim)")
    if cfg.workers < 1:
        raise UsageError("workers must be >= 1")
    base = sim_transform_config() if cfg.preset == "sim" else TransformConfig()
    cfg.transform = transform_config_from_flat(flat, base)
    return cfg, flat


def _echo(command: str, flat: dict[str, str]) -> None:
    print(f"# attackrules {__version__} {command}")
    for k, v in flat.items():
        print(f"{k} = {v}")


def _write_meta(path: Path, command: str, flat: dict[str, str], **extra) -> None:
    meta = {"command": command, "config": flat, **extra}
    Path(f"{path}.meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _read_meta(path: str | Path) -> dict:
    p = Path(f"{path}.meta.json")
    if p.exists():
        return json.loads(p.read_text(encoding="utf-8"))
    return {}


def _require(args, *names):
    for n in names:
        if getattr(args, n, None) in (None, ""):
            raise UsageError(f"--{n.replace('_', '-')} is required")


# -- subcommands ------------------------------------------------------------

def cmd_transform(args) -> int:
    _require(args, "input", "out")
    cfg, _ = resolve_config(args)
    flat = {"input": str(args.input), **cfg.transform.to_flat()}
    _echo("transform", flat)
    records = ingest(args.input, cfg.transform)
    transactions, rep = transform(records, cfg.transform)
    write_transactions(transactions, args.out)
    _write_meta(Path(args.out), "transform", flat, n_transactions=len(transactions),
                attributes=rep.retained_attributes, report=rep.to_dict())
    print(rep.format())
    return EXIT_OK


def cmd_mine(args) -> int:
    _require(args, "input", "out")
    cfg, _ = resolve_config(args)
    params = cfg.mining()
    transactions = read_transactions(args.input)
    n = len(transactions)
    upstream = _read_meta(args.input)
    flat = {"input": str(args.input), "min_support": cfg.min_support,
            "max_itemset_size": "" if cfg.max_itemset_size is None else str(cfg.max_itemset_size),
            "workers": str(cfg.workers)}
    _echo("mine", flat)
    print(f"# resolved: {params.describe(n)}")
    itemsets = mine(transactions, params, workers=cfg.workers)
    write_itemsets(itemsets, args.out)
    _write_meta(Path(args.out), "mine", flat, n_transactions=n, min_count=params.resolve(n),
                attributes=upstream.get("attributes"))
    print(f"frequent itemsets: {len(itemsets)}")
    return EXIT_OK


def cmd_rules(args) -> int:
    _require(args, "input", "out")
    cfg, _ = resolve_config(args)
    params = cfg.rule_params()
    upstream = _read_meta(args.input)
    flat = {"input": str(args.input), "min_confidence": cfg.min_confidence,
            "min_antecedent_size": str(cfg.min_antecedent_size),
            "max_antecedent_size": "" if cfg.max_antecedent_size is None else str(cfg.max_antecedent_size)}
    _echo("rules", flat)
    itemsets = read_itemsets(args.input)
    rules = generate_rules(itemsets, params, upstream.get("n_transactions"))
    write_rules(rules, args.out)
    _write_meta(Path(args.out), "rules", flat, n_transactions=upstream.get("n_transactions"),
                attributes=upstream.get("attributes"))
    print(f"rules: {len(rules)}")
    return EXIT_OK


def cmd_diff(args) -> int:
    _require(args, "attack", "normal", "out")
    cfg, _ = resolve_config(args)
    a_meta, b_meta = _read_meta(args.attack), _read_meta(args.normal)
    attack_rules = read_rules(args.attack, a_meta.get("n_transactions"))
    normal_rules = read_rules(args.normal, b_meta.get("n_transactions"))
    flat = {"attack": str(args.attack), "normal": str(args.normal), "samples_per_size": str(cfg.samples_per_size)}
    _echo("diff", flat)
    a_attrs, b_attrs = a_meta.get("attributes"), b_meta.get("attributes")
    result = diff(attack_rules, normal_rules, a_attrs, b_attrs)
    write_rules(result, args.out)
    _write_meta(Path(args.out), "diff", flat, n_transactions=a_meta.get("n_transactions"), attributes=a_attrs,
                normal_attributes=b_attrs)
    rep = report(result, cfg.samples_per_size, attack_rules=attack_rules, normal_rules=normal_rules,
                 attack_attributes=a_attrs, normal_attributes=b_attrs)
    print(rep.format())
    if args.report_out:
        Path(args.report_out).write_text(rep.to_jsonl(), encoding="utf-8")
    return EXIT_OK


def cmd_report(args) -> int:
    _require(args, "input")
    cfg, _ = resolve_config(args)
    meta = _read_meta(args.input)
    rules = read_rules(args.input, meta.get("n_transactions"))
    flat = {"input": str(args.input), "samples_per_size": str(cfg.samples_per_size),
            "compare_published": str(bool(args.compare_published)).lower()}
    _echo("report", flat)
    rep = report(rules, cfg.samples_per_size, sizes=PUBLISHED_SIZES if args.compare_published else None,
                 attack_attributes=meta.get("attributes"), normal_attributes=meta.get("normal_attributes"))
    print(rep.format())
    if args.compare_published:
        print()
        print(compare_with_published(rep.per_size_tally).format())
    if args.out:
        Path(args.out).write_text(rep.to_jsonl(), encoding="utf-8")
    return EXIT_OK


def _scenario(args, flat: dict[str, str]) -> AttackScenario:
    keys = dict(flat)
    for attr, key in (("attack_kind", "kind"), ("attack_start", "start_tick"), ("attack_end", "end_tick"),
                      ("spoof_value", "spoof_value")):
        v = getattr(args, attr, None)
        if v is not None:
            keys[key] = str(v)
    return AttackScenario.from_flat(keys)


def cmd_simulate(args) -> int:
    _require(args, "out")
    cfg, raw = resolve_config(args)
    scenario = _scenario(args, raw)
    flat = {"ticks": str(cfg.ticks), "seed": str(cfg.seed), **scenario.to_flat()}
    _echo("simulate", flat)
    write_traces(args.out, cfg.ticks, scenario, cfg.seed, PlantConfig())
    _write_meta(Path(args.out), "simulate", flat)
    print(f"wrote {cfg.ticks} rows to {args.out}")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    """Both datasets through transform, mine and rules, then diff and report."""
    _require(args, "normal", "attack", "out")
    cfg, _ = resolve_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    flat = {"normal": str(args.normal), "attack": str(args.attack), **cfg.to_flat()}
    _echo("pipeline", flat)
    (out / "config.txt").write_text("".join(f"{k} = {v}\n" for k, v in flat.items()), encoding="utf-8")

    mining, rparams = cfg.mining(), cfg.rule_params()
    results = {}
    for name, src in (("normal", args.normal), ("attack", args.attack)):
        transactions, rep = transform(ingest(src, cfg.transform), cfg.transform)
        write_transactions(transactions, out / f"{name}.tx")
        n = len(transactions)
        print(f"[{name}] {n} transactions; dropped constant: {', '.join(rep.dropped_attributes) or '-'}")
        print(f"[{name}] {mining.describe(n)}")
        itemsets = mine(transactions, mining, workers=cfg.workers)
        write_itemsets(itemsets, out / f"{name}.itemsets.tsv")
        rules = generate_rules(itemsets, rparams, n)
        write_rules(rules, out / f"{name}.rules.tsv")
        print(f"[{name}] {len(itemsets)} frequent itemsets, {len(rules)} rules")
        results[name] = (rules, rep.retained_attributes)

    (a_rules, a_attrs), (b_rules, b_attrs) = results["attack"], results["normal"]
    signatures = diff(a_rules, b_rules, a_attrs, b_attrs)
    write_rules(signatures, out / "diff.rules.tsv")
    write_rules(signatures, out / "diff.rules.jsonl")
    rep = report(signatures, cfg.samples_per_size, attack_rules=a_rules, normal_rules=b_rules,
                 sizes=PUBLISHED_SIZES if args.compare_published else None, attack_attributes=a_attrs, normal_attributes=b_attrs)
    text = rep.format()
    if args.compare_published:
        text += "\n\n" + compare_with_published(rep.per_size_tally).format()
    (out / "report.txt").write_text(text + "\n", encoding="utf-8")
    (out / "report.jsonl").write_text(rep.to_jsonl(), encoding="utf-8")
    print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="attackrules", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, *flags):
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--preset", choices=("swat", "sim"), default=None,
                       help="base transform config (default swat)")
        for f in flags:
            if f == "input":
                p.add_argument("--input")
            elif f == "out":
                p.add_argument("--out")
            elif f == "support":
                p.add_argument("--min-support", dest="min_support",
                               help="fraction (0.007, 3164/410400) or integer count")
                p.add_argument("--max-itemset-size", dest="max_itemset_size", type=int)
                p.add_argument("--workers", type=int)
            elif f == "confidence":
                p.add_argument("--min-confidence", dest="min_confidence")
                p.add_argument("--min-antecedent", dest="min_antecedent", type=int)
                p.add_argument("--max-antecedent", dest="max_antecedent", type=int)
            elif f == "samples":
                p.add_argument("--samples-per-size", dest="samples_per_size", type=int)

    p = sub.add_parser("transform", help="binarize a historian CSV into a transaction file")
    common(p, "input", "out")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("mine", help="frequent itemsets from a transaction file")
    common(p, "input", "out", "support")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("rules", help="association rules from an itemset file")
    common(p, "input", "out", "confidence")
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("diff", help="attack rules not present among normal rules")
    common(p, "out", "samples")
    p.add_argument("--attack")
    p.add_argument("--normal")
    p.add_argument("--report-out", dest="report_out", help="write the JSON-lines report here")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("report", help="per-antecedent-size tally of a rule file")
    common(p, "input", "out", "samples")
    p.add_argument("--compare-published", action="store_true",
                   help="restrict to antecedent sizes 2-14 and print the published counts alongside")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("simulate", help="historian CSV from the tank simulator")
    common(p, "out")
    p.add_argument("--ticks", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--attack-kind", dest="attack_kind", choices=("none", "force_valve_open", "spoof_level"))
    p.add_argument("--attack-start", dest="attack_start", type=int)
    p.add_argument("--attack-end", dest="attack_end", type=int)
    p.add_argument("--spoof-value", dest="spoof_value", type=float)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pipeline", help="normal + attack CSVs end to end")
    common(p, "out", "support", "confidence", "samples")
    p.add_argument("--normal")
    p.add_argument("--attack")
    p.add_argument("--compare-published", action="store_true")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"attackrules {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AttackRulesError, OSError, ValueError) as exc:
        print(f"attackrules {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
