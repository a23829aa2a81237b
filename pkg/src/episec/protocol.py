"""Message-transmission protocols and explicit generation of their global states.

Agent 1 sends a payload drawn from a finite candidate set to agent 2 following a
fixed script.  The adversary intercepts (destructively), forwards intercepted
messages and injects messages it can derive.  Every payload gets its own branch
of the state space; ``G(m)`` is the set of states in branch ``m``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Optional

from . import dy
from .kripke import Frame, GlobalState, build_dy_frame
from .term import (Atom, Enc, Key, Message, MessageSyntaxError, Pair,
                   is_box_free, parse_message, render, sorted_messages, substitute)

__all__ = [
    "PLACEHOLDER", "Step", "ProtocolSpec", "StateSpace", "SpecError",
    "BoundExceeded", "load_spec", "spec_from_dict", "generate", "g_states",
    "matches_shape",
]

PLACEHOLDER = Atom("PAYLOAD")
ADV = "adv"


class SpecError(ValueError):
    pass


class BoundExceeded(RuntimeError):
    def __init__(self, bound: str, value: int):
        super().__init__(f"state-space bound exceeded: {bound}={value}")
        self.bound = bound
        self.value = value


@dataclass(frozen=True)
class Step:
    sender: str
    to: str
    template: Message


@dataclass(frozen=True)
class ProtocolSpec:
    agents: tuple[str, ...]
    keys: Mapping[str, bool]
    payloads: tuple[Message, ...]
    adv_initial: frozenset
    script: tuple[Step, ...]
    max_steps: int = 8
    max_injections: int = 1
    compose_depth: int = 0
    max_states: int = 200_000

    def __post_init__(self):
        if len(self.agents) < 2:
            raise SpecError("need at least a sender and a receiver")
        if ADV in self.agents:
            raise SpecError(f"agent name {ADV!r} is reserved for the adversary")
        if not self.payloads:
            raise SpecError("no payloads declared")
        for m in self.payloads:
            if not is_box_free(m) or PLACEHOLDER in _atoms(m):
                raise SpecError(f"bad payload {render(m)}")
        for step in self.script:
            for who in (step.sender, step.to):
                if who not in self.agents:
                    raise SpecError(f"undeclared agent {who!r} in script")
        carriers = sum(_count(step.template, PLACEHOLDER) for step in self.script)
        if carriers != 1:
            raise SpecError(f"script must mention PAYLOAD exactly once, found {carriers}")
        if min(self.max_steps, self.max_injections, self.compose_depth) < 0:
            raise SpecError("bounds must be non-negative")

    def instantiate(self, payload: Message) -> tuple[Step, ...]:
        return tuple(Step(s.sender, s.to, substitute(s.template, PLACEHOLDER, payload))
                     for s in self.script)

    @cached_property
    def expected(self) -> dict[str, tuple[Message, ...]]:
        """Per agent, the templates it expects to receive, in script order."""
        return {a: tuple(s.template for s in self.script if s.to == a) for a in self.agents}


def _atoms(m: Message) -> set:
    if isinstance(m, Pair):
        return _atoms(m.left) | _atoms(m.right)
    if isinstance(m, Enc):
        return _atoms(m.body)
    return {m} if isinstance(m, Atom) else set()


def _count(m: Message, t: Message) -> int:
    if m == t:
        return 1
    if isinstance(m, Pair):
        return _count(m.left, t) + _count(m.right, t)
    if isinstance(m, Enc):
        return _count(m.body, t)
    return 0


def matches_shape(msg: Message, template: Message) -> bool:
    """Type-flaw-tolerant receiver check on outer structure.

    The payload slot accepts anything; pairs are checked componentwise;
    ciphertexts only by their key, since the receiver need not open them.
    """
    if template == PLACEHOLDER:
        return True
    if isinstance(template, Pair):
        return (isinstance(msg, Pair) and matches_shape(msg.left, template.left)
                and matches_shape(msg.right, template.right))
    if isinstance(template, Enc):
        return isinstance(msg, Enc) and msg.key == template.key
    return msg == template


def _parse_all(texts, keys, what, placeholder=None):
    out = []
    for t in texts:
        try:
            out.append(parse_message(str(t), keys, placeholder=placeholder))
        except MessageSyntaxError as e:
            raise SpecError(f"{what}: {e}") from None
    return out


def spec_from_dict(doc: Mapping) -> ProtocolSpec:
    if not isinstance(doc, Mapping):
        raise SpecError("protocol must be an object")
    try:
        keys = {str(k["id"]): bool(k.get("symmetric", False)) for k in doc.get("keys", [])}
        agents = tuple(str(a) for a in doc["agents"])
        payloads = _parse_all(doc.get("payloads", []), keys, "payloads")
        adv_initial = _parse_all(doc.get("adv_initial", []), keys, "adv_initial")
        script = []
        for raw in doc.get("script", []):
            (tmpl,) = _parse_all([raw["msg"]], keys, "script", placeholder=PLACEHOLDER.name)
            script.append(Step(str(raw["from"]), str(raw["to"]), tmpl))
        bounds = doc.get("bounds", {})
        return ProtocolSpec(
            agents=agents,
            keys=keys,
            payloads=tuple(dict.fromkeys(payloads)),
            adv_initial=frozenset(adv_initial),
            script=tuple(script),
            max_steps=int(bounds.get("max_steps", 8)),
            max_injections=int(bounds.get("max_injections", 1)),
            compose_depth=int(bounds.get("compose_depth", 0)),
            max_states=int(bounds.get("max_states", 200_000)),
        )
    except (KeyError, TypeError, AttributeError, ValueError) as e:
        if isinstance(e, SpecError):
            raise
        raise SpecError(f"malformed protocol: {e!r}") from None


def load_spec(path) -> ProtocolSpec:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SpecError(f"{path}: {e}") from None
    return spec_from_dict(doc)


@dataclass(frozen=True)
class _Config:
    sent: int
    recv: tuple[tuple[Message, ...], ...]  # per agent, messages accepted so far
    flight: tuple[tuple[str, str, Message], ...]  # sorted multiset (src, to, msg)
    captured: frozenset
    forwardable: tuple[tuple[str, Message], ...]  # sorted multiset (to, msg)
    injections: int


def _sorted_flight(items):
    return tuple(sorted(items, key=lambda t: (t[0], t[1], render(t[2]))))


def _sorted_fwd(items):
    return tuple(sorted(items, key=lambda t: (t[0], render(t[1]))))


def _remove_one(seq, item):
    i = seq.index(item)
    return seq[:i] + seq[i + 1:]


def _compose(base: frozenset, depth: int) -> frozenset:
    out = set(base)
    for _ in range(depth):
        keys = [m.key for m in out if isinstance(m, Key)]
        layer = {Pair(a, b) for a in out for b in out}
        layer |= {Enc(a, k) for a in out for k in keys}
        out |= layer
    return frozenset(out)


@dataclass
class StateSpace:
    spec: ProtocolSpec
    states: tuple[GlobalState, ...]
    payload_of: dict[str, Message]
    parent: dict[str, Optional[tuple[str, str]]] = field(repr=False)

    @cached_property
    def G(self) -> dict[Message, frozenset[str]]:
        groups = {m: set() for m in self.spec.payloads}
        for sid, m in self.payload_of.items():
            groups[m].add(sid)
        return {m: frozenset(ids) for m, ids in groups.items()}

    @property
    def payloads(self) -> tuple[Message, ...]:
        return self.spec.payloads

    @cached_property
    def frame(self) -> Frame:
        return build_dy_frame(self.states)

    @cached_property
    def by_id(self) -> dict[str, GlobalState]:
        return {s.id: s for s in self.states}

    def path(self, sid: str) -> list[tuple[str, str]]:
        """(state id, action) pairs from the branch's initial state to ``sid``."""
        out = []
        while self.parent[sid] is not None:
            prev, action = self.parent[sid]
            out.append((sid, action))
            sid = prev
        out.append((sid, "init"))
        return out[::-1]


def _label(parts: Iterable[Message]) -> str:
    return "[" + ",".join(render(m) for m in parts) + "]"


def _global(spec, sid, payload, steps, c: _Config) -> GlobalState:
    locals_ = []
    for i, agent in enumerate(spec.agents):
        sent = [s.template for s in steps[:c.sent] if s.sender == agent]
        label = f"sent={_label(sent)};recv={_label(c.recv[i])}"
        if i == 0:
            label = f"secret={render(payload)};" + label
        locals_.append((agent, label))
    env = ("flight=[" + ",".join(f"{a}>{b}:{render(m)}" for a, b, m in c.flight) + "]"
           + ";fwd=[" + ",".join(f"{b}:{render(m)}" for b, m in c.forwardable) + "]"
           + f";inj={c.injections}")
    return GlobalState(sid, frozenset(spec.adv_initial | c.captured), env, tuple(sorted(locals_)))


def _successors(spec: ProtocolSpec, steps: tuple[Step, ...], c: _Config):
    agent_ix = {a: i for i, a in enumerate(spec.agents)}
    # agent sends, in script order, once it has received everything addressed to it so far
    if c.sent < len(steps):
        step = steps[c.sent]
        owed = sum(1 for s in steps[:c.sent] if s.to == step.sender)
        if len(c.recv[agent_ix[step.sender]]) >= owed:
            yield (f"send {step.sender}>{step.to}:{render(step.template)}",
                   _Config(c.sent + 1, c.recv,
                           _sorted_flight(c.flight + ((step.sender, step.to, step.template),)),
                           c.captured, c.forwardable, c.injections))
    for item in dict.fromkeys(c.flight):
        src, to, msg = item
        rest = _remove_one(c.flight, item)
        i = agent_ix[to]
        expected = spec.expected[to]
        if len(c.recv[i]) < len(expected) and matches_shape(msg, expected[len(c.recv[i])]):
            recv = c.recv[:i] + (c.recv[i] + (msg,),) + c.recv[i + 1:]
            yield (f"recv {to}:{render(msg)}",
                   _Config(c.sent, recv, rest, c.captured, c.forwardable, c.injections))
        if src != ADV:
            yield (f"intercept {src}>{to}:{render(msg)}",
                   _Config(c.sent, c.recv, rest, c.captured | {msg},
                           _sorted_fwd(c.forwardable + ((to, msg),)), c.injections))
    for item in dict.fromkeys(c.forwardable):
        to, msg = item
        yield (f"forward {to}:{render(msg)}",
               _Config(c.sent, c.recv, _sorted_flight(c.flight + ((ADV, to, msg),)),
                       c.captured, _remove_one(c.forwardable, item), c.injections))
    if c.injections < spec.max_injections:
        known = _compose(dy.close(spec.adv_initial | c.captured), spec.compose_depth)
        for agent in spec.agents:
            i = agent_ix[agent]
            expected = spec.expected[agent]
            if len(c.recv[i]) >= len(expected):
                continue
            template = expected[len(c.recv[i])]
            for msg in sorted_messages(m for m in known if matches_shape(m, template)):
                yield (f"inject {agent}:{render(msg)}",
                       _Config(c.sent, c.recv, _sorted_flight(c.flight + ((ADV, agent, msg),)),
                               c.captured, c.forwardable, c.injections + 1))


def generate(spec: ProtocolSpec) -> StateSpace:
    """Breadth-first exploration of every payload branch up to ``max_steps`` actions."""
    states: list[GlobalState] = []
    payload_of: dict[str, Message] = {}
    parent: dict[str, Optional[tuple[str, str]]] = {}
    for payload in spec.payloads:
        steps = spec.instantiate(payload)
        init = _Config(0, tuple(() for _ in spec.agents), (), frozenset(), (), 0)
        ids = {init: f"s{len(states)}"}
        states.append(_global(spec, ids[init], payload, steps, init))
        payload_of[ids[init]] = payload
        parent[ids[init]] = None
        queue = deque([(init, 0)])
        while queue:
            c, depth = queue.popleft()
            if depth >= spec.max_steps:
                continue
            for action, nxt in _successors(spec, steps, c):
                if nxt in ids:
                    continue
                if len(states) >= spec.max_states:
                    raise BoundExceeded("max_states", spec.max_states)
                sid = f"s{len(states)}"
                ids[nxt] = sid
                states.append(_global(spec, sid, payload, steps, nxt))
                payload_of[sid] = payload
                parent[sid] = (ids[c], action)
                queue.append((nxt, depth + 1))
    return StateSpace(spec, tuple(states), payload_of, parent)


def g_states(SP: StateSpace, m: Message) -> frozenset[str]:
    try:
        return SP.G[m]
    except KeyError:
        raise SpecError(f"unknown payload {render(m)}") from None
