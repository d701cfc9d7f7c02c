"""Desk-scale simulator of a raw-water stage: tank, inlet valve MV101 with
flow meter FIT101, outlet pump P101 with flow meter FIT201, level LIT101.

Each state is the snapshot of one sampled second: the level at the start of
the tick, the actuator states applied during the tick, and the true flows
during the tick.  The PLC opens the inlet at the low setpoint and closes it
at the high setpoint, acting on the *reported* level, so a spoofed level
sensor steers the controller.

Valves spend ``transition_ticks`` in Transition when commanded.  An
opening valve passes a ramping partial flow, a closing valve is shut at
once, so Transition rows resolve to either side through FIT101.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from pathlib import Path
from typing import Mapping

from .ingest import CLOSE, OFF, ON, OPEN, TRANSITION, ConfigError, TransformConfig

VALVE_CODES = {CLOSE: 1, OPEN: 2, TRANSITION: 0}
PUMP_CODES = {OFF: 1, ON: 2}
ATTACK_KINDS = ("none", "force_valve_open", "spoof_level")
CSV_COLUMNS = ("Timestamp", "FIT101", "LIT101", "MV101", "P101", "FIT201", "Normal/Attack")


@dataclass(frozen=True)
class PlantConfig:
    capacity: float = 1000.0
    low_level: float = 500.0
    high_level: float = 800.0
    pump_cutoff_level: float = 250.0  # protects the pump from running dry
    initial_level: float = 600.0
    inflow_rate: float = 10.0
    outflow_rate: float = 4.0
    transition_ticks: int = 2
    demand_toggle_prob: float = 0.01
    flow_noise: float = 0.05
    start_time: str = "2015-12-22 16:00:00"

    def __post_init__(self):
        if not (0 <= self.pump_cutoff_level <= self.low_level < self.high_level <= self.capacity):
            raise ConfigError("need 0 <= pump_cutoff_level <= low_level < high_level <= capacity")
        if self.inflow_rate < 0 or self.outflow_rate < 0 or self.transition_ticks < 0:
            raise ConfigError("rates and transition_ticks must be nonnegative")


@dataclass(frozen=True)
class AttackScenario:
    kind: str = "none"
    start_tick: int = 0
    end_tick: int = 0
    spoof_value: float | None = None

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ConfigError(f"unknown attack kind {self.kind!r}; expected one of {ATTACK_KINDS}")
        if self.start_tick > self.end_tick:
            raise ConfigError("start_tick must not exceed end_tick")
        if self.kind == "spoof_level" and self.spoof_value is None:
            raise ConfigError("spoof_level needs a spoof_value")

    def active(self, tick: int) -> bool:
        return self.kind != "none" and self.start_tick <= tick <= self.end_tick

    @classmethod
    def from_flat(cls, flat: Mapping[str, str]) -> "AttackScenario":
        try:
            return cls(
                kind=flat.get("kind", "none"),
                start_tick=int(flat.get("start_tick", 0)),
                end_tick=int(flat.get("end_tick", 0)),
                spoof_value=float(flat["spoof_value"]) if flat.get("spoof_value") not in (None, "") else None,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_flat(self) -> dict[str, str]:
        out = {"kind": self.kind, "start_tick": str(self.start_tick), "end_tick": str(self.end_tick)}
        if self.spoof_value is not None:
            out["spoof_value"] = repr(self.spoof_value)
        return out


NO_ATTACK = AttackScenario()


@dataclass(frozen=True)
class PlantState:
    level: float
    mv101: str
    p101: str
    fit101: float
    fit201: float
    tick: int = 0
    reported_level: float = 0.0
    valve_target: str = CLOSE  # last PLC command
    transition_left: int = 0
    demand: bool = True
    attacked: bool = False


def _flows(mv101: str, p101: str, target: str, left: int, config: PlantConfig) -> tuple[float, float]:
    if mv101 == OPEN:
        inflow = config.inflow_rate
    elif mv101 == TRANSITION and target == OPEN and config.transition_ticks:
        # tick k of T passes k/T of the full flow
        inflow = config.inflow_rate * (config.transition_ticks - 1 - left) / config.transition_ticks
    else:
        inflow = 0.0
    return inflow, (config.outflow_rate if p101 == ON else 0.0)


def _decide(level: float, tick: int, position: str, target: str, left: int, demand: bool,
            scenario: AttackScenario, config: PlantConfig) -> PlantState:
    attacked = scenario.active(tick)
    reported = scenario.spoof_value if attacked and scenario.kind == "spoof_level" else level

    if reported <= config.low_level:
        command = OPEN
    elif reported >= config.high_level:
        command = CLOSE
    else:
        command = target

    if attacked and scenario.kind == "force_valve_open":
        mv, target, left = OPEN, OPEN, 0
    elif command != target:
        target = command
        if config.transition_ticks:
            mv, left = TRANSITION, config.transition_ticks - 1
        else:
            mv, left = target, 0
    elif position == TRANSITION and left > 0:
        mv, left = TRANSITION, left - 1
    else:
        mv, left = target, 0

    p101 = ON if demand and level > config.pump_cutoff_level else OFF
    inflow, outflow = _flows(mv, p101, target, left, config)
    return PlantState(level=level, mv101=mv, p101=p101, fit101=inflow, fit201=outflow, tick=tick,
                      reported_level=reported, valve_target=target, transition_left=left,
                      demand=demand, attacked=attacked)


def initial_state(config: PlantConfig = PlantConfig(), scenario: AttackScenario = NO_ATTACK,
                  demand: bool = True) -> PlantState:
    """Tick-0 snapshot with the valve settled on whatever the PLC would command."""
    target = OPEN if config.initial_level <= config.low_level else CLOSE
    return _decide(config.initial_level, 0, target, target, 0, demand, scenario, config)


def step(state: PlantState, scenario: AttackScenario = NO_ATTACK,
         config: PlantConfig = PlantConfig()) -> PlantState:
    """Advance one tick: integrate this tick's flows, then let the PLC (and
    any active attack) set the actuators for the next tick.

    Overflow is not clipped; a level above ``capacity`` is the recorded
    consequence of an attack.
    """
    level = state.level + state.fit101 - state.fit201
    return _decide(level, state.tick + 1, state.mv101, state.valve_target, state.transition_left,
                   state.demand, scenario, config)


def simulate(ticks: int, scenario: AttackScenario = NO_ATTACK, seed: int = 0,
             config: PlantConfig = PlantConfig()) -> list[PlantState]:
    if ticks < 1:
        raise ConfigError("ticks must be >= 1")
    rng = random.Random(seed)
    state = initial_state(config, scenario)
    states = [state]
    for _ in range(ticks - 1):
        if rng.random() < config.demand_toggle_prob:
            state = replace(state, demand=not state.demand)
        state = step(state, scenario, config)
        states.append(state)
    return states


def _reading(flow: float, rng: random.Random, noise: float) -> float:
    # a shut line reads exactly zero; an open one jitters but never goes negative
    if flow <= 0:
        return 0.0
    return max(0.0, flow + rng.uniform(-noise, noise))


def generate_traces(ticks: int, scenario: AttackScenario = NO_ATTACK, seed: int = 0,
                    config: PlantConfig = PlantConfig()) -> str:
    """Historian-style CSV text for ``ticks`` seconds of operation.

    Identical ``(ticks, scenario, seed, config)`` give identical bytes.
    """
    states = simulate(ticks, scenario, seed, config)
    noise_rng = random.Random(f"{seed}:readings")
    t0 = datetime.fromisoformat(config.start_time)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for s in states:
        writer.writerow([
            (t0 + timedelta(seconds=s.tick)).isoformat(sep=" "),
            f"{_reading(s.fit101, noise_rng, config.flow_noise):.4f}",
            f"{s.reported_level:.4f}",
            VALVE_CODES[s.mv101],
            PUMP_CODES[s.p101],
            f"{_reading(s.fit201, noise_rng, config.flow_noise):.4f}",
            "Attack" if s.attacked else "Normal",
        ])
    return buf.getvalue()


def write_traces(path: str | Path, ticks: int, scenario: AttackScenario = NO_ATTACK, seed: int = 0,
                 config: PlantConfig = PlantConfig()) -> None:
    Path(path).write_text(generate_traces(ticks, scenario, seed, config), encoding="utf-8", newline="")


def sim_transform_config(config: PlantConfig = PlantConfig()) -> TransformConfig:
    """Binarization for simulator traces, including a high-level flag on LIT101."""
    return TransformConfig(
        selected_attributes=["FIT101", "FIT201", "LIT101", "MV101", "P101"],
        valve_flow_pairing={"MV101": "FIT101"},
        thresholds={"LIT101": config.high_level},
    )
