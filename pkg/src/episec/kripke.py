"""Adversarial frames and epistemic structures over explicit global states."""

from __future__ import annotations

import json
import re
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Union

from . import dy
from .term import MessageSyntaxError, parse_message, render, sorted_messages

__all__ = [
    "GlobalState", "Frame", "EpistemicStructure", "InformationFunction",
    "AdversarialReport", "ModelError", "k_local", "validate_adversarial",
    "possible", "build_dy_frame", "load_model", "model_from_dict", "RESERVED_PROP",
]

AdvLocal = Union[str, frozenset]

# names generated for the has/exchanged construction; user vocabularies may not use them
RESERVED_PROP = re.compile(r"(has|exchanged)_[0-9a-f]{16}\Z")


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class GlobalState:
    id: str
    adv: AdvLocal
    env: str = ""
    locals: tuple[tuple[str, str], ...] = ()

    def local(self, agent: str) -> str:
        for name, label in self.locals:
            if name == agent:
                return label
        raise ModelError(f"state {self.id} has no local state for agent {agent!r}")

    @property
    def structured(self) -> bool:
        return isinstance(self.adv, frozenset)

    def adv_label(self) -> str:
        if self.structured:
            return "{" + ", ".join(render(m) for m in sorted_messages(self.adv)) + "}"
        return self.adv


@dataclass(frozen=True)
class Frame:
    states: tuple[GlobalState, ...]
    relation: frozenset[tuple[str, str]]

    def __post_init__(self):
        ids = [s.id for s in self.states]
        if len(set(ids)) != len(ids):
            raise ModelError("duplicate state ids")
        known = set(ids)
        for a, b in self.relation:
            if a not in known or b not in known:
                raise ModelError(f"relation pair ({a}, {b}) names an undeclared state")

    @cached_property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.states)

    @cached_property
    def by_id(self) -> dict[str, GlobalState]:
        return {s.id: s for s in self.states}

    @cached_property
    def successors(self) -> dict[str, frozenset[str]]:
        succ = defaultdict(set)
        for a, b in self.relation:
            succ[a].add(b)
        return {i: frozenset(succ.get(i, ())) for i in self.ids}


@dataclass(frozen=True, eq=False)
class EpistemicStructure:
    frame: Frame
    interp: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        known = set(self.frame.ids)
        for prop, ids in self.interp.items():
            bad = set(ids) - known
            if bad:
                raise ModelError(f"proposition {prop!r} names undeclared states {sorted(bad)}")

    def with_interp(self, interp: Mapping[str, Iterable[str]]) -> "EpistemicStructure":
        return EpistemicStructure(self.frame, {p: frozenset(v) for p, v in interp.items()})


@dataclass(frozen=True)
class InformationFunction:
    agent: str
    value: Mapping[str, str]

    def __call__(self, state_id: str) -> str:
        return self.value[state_id]

    def image(self) -> list[str]:
        return sorted(set(self.value.values()))

    def preimage(self, v: str) -> frozenset[str]:
        return frozenset(s for s, x in self.value.items() if x == v)

    def validate(self, frame: Frame) -> None:
        missing = [i for i in frame.ids if i not in self.value]
        if missing:
            raise ModelError(f"information function is partial: no value for {missing}")
        seen: dict[str, tuple[str, str]] = {}
        for s in frame.states:
            label = s.local(self.agent)
            if label in seen and seen[label][1] != self.value[s.id]:
                other = seen[label][0]
                raise ModelError(
                    f"information function is not determined by {self.agent}'s local state: "
                    f"{other} and {s.id} share it but differ in value")
            seen.setdefault(label, (s.id, self.value[s.id]))


@dataclass
class AdversarialReport:
    ok: bool
    violations: list[tuple[str, str]]

    def __bool__(self):
        return self.ok


def k_local(states: Iterable[GlobalState]) -> frozenset[tuple[str, str]]:
    """Pairs of states with equal adversary local state."""
    groups = defaultdict(list)
    for s in states:
        groups[s.adv].append(s.id)
    return frozenset((a, b) for ids in groups.values() for a in ids for b in ids)


def validate_adversarial(F: Frame) -> AdversarialReport:
    missing = sorted(k_local(F.states) - F.relation)
    return AdversarialReport(not missing, missing)


def possible(F: Frame, s: str) -> frozenset[str]:
    try:
        return F.successors[s]
    except KeyError:
        raise ModelError(f"unknown state {s!r}") from None


def build_dy_frame(states: Iterable[GlobalState]) -> Frame:
    states = tuple(states)
    groups = defaultdict(list)
    for s in states:
        if not s.structured:
            raise ModelError(f"state {s.id} has an unstructured adversary local state")
        groups[dy.pattern_state(s.adv)].append(s.id)
    rel = frozenset((a, b) for ids in groups.values() for a in ids for b in ids)
    F = Frame(states, rel)
    report = validate_adversarial(F)
    assert report.ok, report.violations
    return F


def _parse_adv(raw, keys, sid):
    if isinstance(raw, str):
        return raw
    if isinstance(raw, list):
        try:
            return frozenset(parse_message(t, keys) for t in raw)
        except MessageSyntaxError as e:
            raise ModelError(f"state {sid}: {e}") from None
    raise ModelError(f"state {sid}: adv must be a label or a list of messages")


def model_from_dict(doc: Mapping) -> tuple[EpistemicStructure, dict[str, InformationFunction]]:
    """Build a structure and its information functions from a model document.

    Fields: ``states`` (``id``, ``env``, ``adv``, ``locals``), ``relation``
    (``"local"``, ``"dy"`` or explicit pairs), ``interpretation`` and
    ``functions``.  An optional ``keys`` map declares key families used by
    message-set ``adv`` entries.
    """
    if not isinstance(doc, Mapping) or "states" not in doc:
        raise ModelError("model must be an object with a 'states' list")
    keys = doc.get("keys", {})
    states = []
    for raw in doc["states"]:
        try:
            sid = str(raw["id"])
            adv = _parse_adv(raw["adv"], keys, sid)
        except (KeyError, TypeError):
            raise ModelError(f"malformed state entry {raw!r}") from None
        locals_ = tuple(sorted((str(a), str(l)) for a, l in raw.get("locals", {}).items()))
        states.append(GlobalState(sid, adv, str(raw.get("env", "")), locals_))

    rel_spec = doc.get("relation", "local")
    if rel_spec == "local":
        frame = Frame(tuple(states), k_local(states))
    elif rel_spec == "dy":
        frame = build_dy_frame(states)
    elif isinstance(rel_spec, list):
        try:
            pairs = frozenset((str(a), str(b)) for a, b in rel_spec)
        except (TypeError, ValueError):
            raise ModelError("relation pairs must be [id, id] lists") from None
        frame = Frame(tuple(states), pairs)
        report = validate_adversarial(frame)
        if not report:
            raise ModelError(f"relation is not adversarial; missing K^local pairs {report.violations}")
    else:
        raise ModelError(f"unknown relation {rel_spec!r}")

    interp = {}
    for prop, ids in doc.get("interpretation", {}).items():
        if RESERVED_PROP.match(prop):
            raise ModelError(f"proposition name {prop!r} is reserved")
        interp[str(prop)] = frozenset(str(i) for i in ids)
    structure = EpistemicStructure(frame, interp)

    functions = {}
    for name, raw in doc.get("functions", {}).items():
        try:
            f = InformationFunction(str(raw["agent"]), {str(k): str(v) for k, v in raw["values"].items()})
        except (KeyError, TypeError, AttributeError):
            raise ModelError(f"malformed information function {name!r}") from None
        f.validate(frame)
        functions[str(name)] = f
    return structure, functions


def load_model(path) -> tuple[EpistemicStructure, dict[str, InformationFunction]]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ModelError(f"{path}: {e}") from None
    return model_from_dict(doc)
