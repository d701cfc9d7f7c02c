"""Historian CSV ingestion and binarization.

Actuators arrive as integer codes (SWaT convention: 1 = Close/Off,
2 = Open/On, 0 = Transition).  Motorized valves in Transition are resolved
through their paired flow meter; real-valued sensors are thresholded with an
inclusive ``>=``.  Attributes that end up constant over a dataset carry no
information for rule mining and are dropped.
"""

from __future__ import annotations

import configparser
import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

from .core import AttackRulesError, Item, Transaction, make_item

# The 15 attributes of the published configuration (flow meters, motorized
# valves, pumps).
DEFAULT_ATTRIBUTES: tuple[str, ...] = (
    "FIT101", "FIT201", "FIT301", "FIT601",
    "MV101", "MV201", "MV301", "MV302", "MV303", "MV304",
    "P101", "P203", "P205", "P302", "P602",
)

# Only MV101 -> FIT101 is documented; the rest follow plant topology and
# are meant to be overridden.
DEFAULT_VALVE_FLOW_PAIRING: dict[str, str] = {
    "MV101": "FIT101",
    "MV201": "FIT201",
    "MV301": "FIT301",
    "MV302": "FIT301",
    "MV303": "FIT301",
    "MV304": "FIT301",
}

OPEN, CLOSE, TRANSITION = "Open", "Close", "Transition"
ON, OFF = "On", "Off"

DEFAULT_ACTUATOR_CODES: dict[str, dict[int, str]] = {
    "valve": {1: CLOSE, 2: OPEN, 0: TRANSITION},
    "pump": {1: OFF, 2: ON},
}

LABEL_COLUMNS = ("Normal/Attack", "label", "Label")
TIMESTAMP_COLUMNS = ("Timestamp", "timestamp", "time", "Time")


class IngestError(AttackRulesError):
    pass


class MissingColumnError(IngestError):
    def __init__(self, column: str, path: str | Path | None = None):
        self.column = column
        where = f" in {path}" if path else ""
        super().__init__(f"missing column {column!r}{where}")


class ValueParseError(IngestError):
    def __init__(self, row: int, column: str, value: str):
        self.row, self.column, self.value = row, column, value
        super().__init__(f"row {row}, column {column!r}: cannot parse {value!r}")


class EmptyFileError(IngestError):
    pass


class MissingPairingError(IngestError):
    pass


class NonFiniteValueError(IngestError, ValueError):
    pass


class ConfigError(AttackRulesError):
    pass


def infer_kind(attribute: str) -> str:
    """Guess an attribute's class from its SWaT-style tag prefix."""
    tag = attribute.upper()
    if tag.startswith("MV"):
        return "valve"
    if tag.startswith("P") and tag[1:2].isdigit():
        return "pump"
    return "analog"


@dataclass(frozen=True)
class RawRecord:
    timestamp: str
    values: Mapping[str, float]
    label: str | None = None


@dataclass
class TransformConfig:
    selected_attributes: list[str] = field(default_factory=lambda: list(DEFAULT_ATTRIBUTES))
    valve_flow_pairing: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_VALVE_FLOW_PAIRING))
    flow_threshold: float = 0.5
    actuator_code_map: dict[str, dict[int, str]] = field(
        default_factory=lambda: {k: dict(v) for k, v in DEFAULT_ACTUATOR_CODES.items()}
    )
    drop_constant_attributes: bool = True
    # per-attribute overrides; anything not listed falls back to infer_kind / flow_threshold
    attribute_kinds: dict[str, str] = field(default_factory=dict)
    thresholds: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.selected_attributes:
            raise ConfigError("selected_attributes is empty")
        if len(set(self.selected_attributes)) != len(self.selected_attributes):
            raise ConfigError("selected_attributes contains duplicates")
        for t in [self.flow_threshold, *self.thresholds.values()]:
            if not (math.isfinite(t) and t > 0):
                raise ConfigError(f"thresholds must be finite and > 0, got {t}")
        for attr in self.selected_attributes:
            kind = self.kind(attr)
            if kind not in ("valve", "pump", "analog"):
                raise ConfigError(f"unknown attribute kind {kind!r} for {attr}")
            if kind in ("valve", "pump") and kind not in self.actuator_code_map:
                raise ConfigError(f"no actuator code map for class {kind!r}")
            if kind == "valve" and attr not in self.valve_flow_pairing:
                raise ConfigError(f"valve {attr} has no paired flow meter")

    def kind(self, attribute: str) -> str:
        return self.attribute_kinds.get(attribute, infer_kind(attribute))

    def threshold(self, attribute: str) -> float:
        return self.thresholds.get(attribute, self.flow_threshold)

    def required_columns(self) -> list[str]:
        cols = list(self.selected_attributes)
        for attr in self.selected_attributes:
            if self.kind(attr) == "valve":
                flow = self.valve_flow_pairing[attr]
                if flow not in cols:
                    cols.append(flow)
        return cols

    def alphabet(self, attribute: str) -> tuple[str, str]:
        """The two labels an attribute can take after binarization."""
        kind = self.kind(attribute)
        if kind == "analog":
            t = format_threshold(self.threshold(attribute))
            return (f">={t}", f"<{t}")
        labels = [s for s in self.actuator_code_map[kind].values() if s != TRANSITION]
        return tuple(sorted(set(labels)))  # type: ignore[return-value]

    def to_flat(self) -> dict[str, str]:
        """Flat key/value form accepted back by :func:`load_flat_config`."""
        out = {
            "selected_attributes": ",".join(self.selected_attributes),
            "valve_flow_pairing": ",".join(f"{k}:{v}" for k, v in sorted(self.valve_flow_pairing.items())),
            "flow_threshold": repr(self.flow_threshold),
            "drop_constant_attributes": str(self.drop_constant_attributes).lower(),
        }
        for kind, codes in sorted(self.actuator_code_map.items()):
            out[f"{kind}_codes"] = ",".join(f"{c}:{s}" for c, s in sorted(codes.items()))
        if self.attribute_kinds:
            out["attribute_kinds"] = ",".join(f"{k}:{v}" for k, v in sorted(self.attribute_kinds.items()))
        if self.thresholds:
            out["thresholds"] = ",".join(f"{k}:{v!r}" for k, v in sorted(self.thresholds.items()))
        return out


def format_threshold(t: float) -> str:
    return format(t, "g")


def _pairs(text: str) -> list[tuple[str, str]]:
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        k, sep, v = part.partition(":")
        if not sep:
            raise ConfigError(f"expected key:value, got {part!r}")
        out.append((k.strip(), v.strip()))
    return out


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def read_flat_file(path: str | Path) -> dict[str, str]:
    """Read a sectionless ``key = value`` file (``#`` comments allowed)."""
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep key case
    text = Path(path).read_text(encoding="utf-8")
    parser.read_string("[_]\n" + text)
    return dict(parser["_"])


def transform_config_from_flat(flat: Mapping[str, str], base: TransformConfig | None = None) -> TransformConfig:
    base = base or TransformConfig()
    kwargs = dict(
        selected_attributes=list(base.selected_attributes),
        valve_flow_pairing=dict(base.valve_flow_pairing),
        flow_threshold=base.flow_threshold,
        actuator_code_map={k: dict(v) for k, v in base.actuator_code_map.items()},
        drop_constant_attributes=base.drop_constant_attributes,
        attribute_kinds=dict(base.attribute_kinds),
        thresholds=dict(base.thresholds),
    )
    try:
        if "selected_attributes" in flat:
            kwargs["selected_attributes"] = [a.strip() for a in flat["selected_attributes"].split(",") if a.strip()]
        if "valve_flow_pairing" in flat:
            kwargs["valve_flow_pairing"] = dict(_pairs(flat["valve_flow_pairing"]))
        if "flow_threshold" in flat:
            kwargs["flow_threshold"] = float(flat["flow_threshold"])
        if "drop_constant_attributes" in flat:
            kwargs["drop_constant_attributes"] = _bool(flat["drop_constant_attributes"])
        if "attribute_kinds" in flat:
            kwargs["attribute_kinds"] = dict(_pairs(flat["attribute_kinds"]))
        if "thresholds" in flat:
            kwargs["thresholds"] = {k: float(v) for k, v in _pairs(flat["thresholds"])}
        for key, value in flat.items():
            if key.endswith("_codes"):
                kwargs["actuator_code_map"][key[: -len("_codes")]] = {int(c): s for c, s in _pairs(value)}
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return TransformConfig(**kwargs)


def _find_column(header: list[str], candidates: Iterable[str]) -> int | None:
    for name in candidates:
        if name in header:
            return header.index(name)
    return None


def ingest(path: str | Path, config: TransformConfig) -> list[RawRecord]:
    """Read a historian CSV, keeping only the columns the transform needs.

    Header names are whitespace-stripped (SWaT exports pad them).  A
    timestamp column and a trailing ``Normal/Attack`` label are carried
    through as opaque metadata.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyFileError(f"{path} is empty") from None
        wanted = config.required_columns()
        index = {}
        for col in wanted:
            if col not in header:
                raise MissingColumnError(col, path)
            index[col] = header.index(col)
        ts_col = _find_column(header, TIMESTAMP_COLUMNS)
        label_col = _find_column(header, LABEL_COLUMNS)

        records = []
        for row_no, row in enumerate(reader):
            if not row or all(not c.strip() for c in row):
                continue
            values = {}
            for col, i in index.items():
                raw = row[i].strip() if i < len(row) else ""
                try:
                    values[col] = float(raw)
                except ValueError:
                    raise ValueParseError(row_no, col, raw) from None
            records.append(RawRecord(
                timestamp=row[ts_col].strip() if ts_col is not None and ts_col < len(row) else str(row_no),
                values=values,
                label=row[label_col].strip() if label_col is not None and label_col < len(row) else None,
            ))
    if not records:
        raise EmptyFileError(f"{path} has a header but no data rows")
    return records


def binarize_flow(value: float, threshold: float) -> str:
    """``">=t"`` when ``value >= threshold`` (inclusive, no epsilon), else ``"<t"``."""
    if not math.isfinite(threshold):
        raise NonFiniteValueError(f"threshold {threshold} is not finite")
    if not math.isfinite(value):
        raise NonFiniteValueError(f"value {value} is not finite")
    t = format_threshold(threshold)
    return f">={t}" if value >= threshold else f"<{t}"


def resolve_valve(valve_code: str, paired_flow: float | None, threshold: float) -> str:
    """Collapse a ternary valve state to Open/Close using its flow meter."""
    if valve_code == OPEN or valve_code == CLOSE:
        return valve_code
    if valve_code != TRANSITION:
        raise IngestError(f"unknown valve state {valve_code!r}")
    if paired_flow is None:
        raise MissingPairingError("valve in Transition has no paired flow meter")
    if not math.isfinite(paired_flow):
        raise NonFiniteValueError(f"paired flow {paired_flow} is not finite")
    return CLOSE if paired_flow < threshold else OPEN


@dataclass
class TransformReport:
    n_rows: int
    retained_attributes: list[str]
    dropped_attributes: list[str]
    state_frequencies: dict[str, dict[str, int]]
    transitions_resolved: dict[str, int] = field(default_factory=dict)

    def frequency(self, attribute: str, state: str) -> Fraction:
        return Fraction(self.state_frequencies[attribute].get(state, 0), self.n_rows)

    def to_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "retained_attributes": self.retained_attributes,
            "dropped_attributes": self.dropped_attributes,
            "state_frequencies": self.state_frequencies,
            "transitions_resolved": self.transitions_resolved,
        }

    def format(self) -> str:
        lines = [f"rows: {self.n_rows}"]
        lines.append(f"retained ({len(self.retained_attributes)}): {', '.join(self.retained_attributes)}")
        lines.append(f"dropped constant ({len(self.dropped_attributes)}): {', '.join(self.dropped_attributes) or '-'}")
        for attr, freqs in self.state_frequencies.items():
            parts = ", ".join(f"{s}={c}/{self.n_rows}" for s, c in sorted(freqs.items()))
            extra = ""
            if self.transitions_resolved.get(attr):
                extra = f"  (transitions resolved: {self.transitions_resolved[attr]})"
            lines.append(f"  {attr}: {parts}{extra}")
        return "\n".join(lines)


def _binarize_record(rec: RawRecord, row: int, config: TransformConfig, kinds: dict[str, str]) -> list[str]:
    states = []
    for attr in config.selected_attributes:
        kind = kinds[attr]
        value = rec.values[attr]
        try:
            if kind == "analog":
                states.append(binarize_flow(value, config.threshold(attr)))
                continue
            code = int(value)
            if code != value:
                raise ValueParseError(row, attr, repr(value))
            try:
                label = config.actuator_code_map[kind][code]
            except KeyError:
                raise ValueParseError(row, attr, repr(value)) from None
            if kind == "valve":
                flow_attr = config.valve_flow_pairing.get(attr)
                flow = rec.values.get(flow_attr) if flow_attr else None
                label = resolve_valve(label, flow, config.flow_threshold)
            elif label == TRANSITION:
                raise IngestError(f"{attr} is a {kind} but reported a Transition")
            states.append(label)
        except IngestError as exc:
            if isinstance(exc, ValueParseError):
                raise
            raise type(exc)(f"row {row}, {attr}: {exc}") from exc
    return states


def transform(records: list[RawRecord], config: TransformConfig) -> tuple[list[Transaction], TransformReport]:
    """Binarize every record; optionally drop attributes constant over the data."""
    if not records:
        raise EmptyFileError("no records to transform")
    attrs = config.selected_attributes
    kinds = {a: config.kind(a) for a in attrs}
    for a in attrs:
        if a not in records[0].values:
            raise MissingColumnError(a)

    rows = []
    freqs = {a: Counter() for a in attrs}
    transitions = Counter()
    transition_code = {
        kind: [c for c, s in config.actuator_code_map.get(kind, {}).items() if s == TRANSITION]
        for kind in ("valve",)
    }
    for i, rec in enumerate(records):
        states = _binarize_record(rec, i, config, kinds)
        for a, s in zip(attrs, states):
            freqs[a][s] += 1
            if kinds[a] == "valve" and rec.values[a] in transition_code["valve"]:
                transitions[a] += 1
        rows.append(states)

    dropped = [a for a in attrs if config.drop_constant_attributes and len(freqs[a]) < 2]
    keep = [j for j, a in enumerate(attrs) if a not in dropped]
    retained = [attrs[j] for j in keep]

    # Items are shared across transactions; build each (attribute, state) once.
    cache: dict[tuple[str, str], Item] = {}

    def item(a: str, s: str) -> Item:
        it = cache.get((a, s))
        if it is None:
            it = cache[(a, s)] = make_item(a, s)
        return it

    transactions = [
        Transaction(frozenset(item(attrs[j], states[j]) for j in keep), row_index=i)
        for i, states in enumerate(rows)
    ]
    report = TransformReport(
        n_rows=len(records),
        retained_attributes=retained,
        dropped_attributes=dropped,
        state_frequencies={a: dict(sorted(freqs[a].items())) for a in attrs},
        transitions_resolved={a: transitions[a] for a in attrs if transitions[a]},
    )
    return transactions, report


def write_transactions(transactions: Iterable[Transaction], path: str | Path) -> None:
    """One line per transaction, canonical items joined by commas."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for t in transactions:
            fh.write(",".join(map(str, t.sorted_items())))
            fh.write("\n")


def read_transactions(path: str | Path) -> list[Transaction]:
    out = []
    cache: dict[str, Item] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.rstrip("\n")
            items = []
            for tok in filter(None, line.split(",")):
                it = cache.get(tok)
                if it is None:
                    it = cache[tok] = Item.parse(tok)
                items.append(it)
            out.append(Transaction(frozenset(items), row_index=i))
    if not out:
        raise EmptyFileError(f"{path} contains no transactions")
    return out
