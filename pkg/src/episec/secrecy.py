"""Confidentiality checkers and their knowledge-based counterparts.

Each semantic checker returns a :class:`Verdict`; the matching ``*_oracle`` /
``*_logical_check`` function decides the same property through formulas of the
form ``!K p`` (or ``exchanged_m -> !has_m``) evaluated by :mod:`episec.logic`.
On a finite frame the f-local nontrivial formulas are, up to extension, exactly
the propositions true on ``f^-1(V)`` for a nonempty proper subset ``V`` of
``image(f)``, so enumerating those subsets covers every interpretation.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, Sequence

from . import dy
from .kripke import EpistemicStructure, Frame, InformationFunction, ModelError, possible, validate_adversarial
from .logic import Implies, Know, Not, Prop, valid_in
from .protocol import StateSpace
from .term import Message, parse_message, render, sorted_messages, subterms

__all__ = [
    "Verdict", "Witness", "MAX_IMAGE", "check_f_secrecy", "f_secrecy_syntactic_oracle",
    "check_message_secrecy", "message_secrecy_syntactic_oracle", "check_dy_secrecy",
    "dy_secrecy_logical_check", "prop_name", "value_subsets", "recheck_witness",
]

MAX_IMAGE = 16


@dataclass(frozen=True)
class Witness:
    state: str
    detail: dict

    def to_json(self) -> dict:
        return {"state": self.state, **self.detail}


@dataclass
class Verdict:
    holds: bool
    witnesses: list[Witness] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        assert self.holds == (not self.witnesses)

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "witnesses": [w.to_json() for w in self.witnesses],
            "stats": dict(sorted(self.stats.items())),
        }


def prop_name(kind: str, m: Message) -> str:
    """Stable proposition name ``<kind>_<16 hex digits of sha256(render(m))>``."""
    return f"{kind}_{hashlib.sha256(render(m).encode()).hexdigest()[:16]}"


def value_subsets(values: Sequence) -> Iterator[tuple]:
    """Nonempty proper subsets of ``values``, smallest first."""
    for r in range(1, len(values)):
        yield from combinations(values, r)


def _require_adversarial(F: Frame) -> None:
    report = validate_adversarial(F)
    if not report:
        raise ModelError(f"frame is not adversarial; missing pairs {report.violations[:5]}")


def _require_total(F: Frame, f: InformationFunction) -> None:
    missing = [s for s in F.ids if s not in f.value]
    if missing:
        raise ModelError(f"information function is partial: no value for {missing}")


def check_f_secrecy(F: Frame, f: InformationFunction) -> Verdict:
    """Every state's possibility set meets every preimage class of ``f``."""
    _require_adversarial(F)
    _require_total(F, f)
    image = f.image()
    witnesses = []
    for s in F.ids:
        seen = {f(t) for t in possible(F, s)}
        for v in image:
            if v not in seen:
                witnesses.append(Witness(s, {"value": v}))
    return Verdict(not witnesses, witnesses,
                   {"states": len(F.ids), "values": len(image), "checks": len(F.ids) * len(image)})


def f_secrecy_syntactic_oracle(F: Frame, f: InformationFunction) -> bool:
    """For every nonempty proper value set V, ``!K p`` is valid where p is true on f^-1(V)."""
    _require_adversarial(F)
    _require_total(F, f)
    image = f.image()
    if len(image) > MAX_IMAGE:
        raise ValueError(f"|image(f)| = {len(image)} exceeds the enumeration cap {MAX_IMAGE}")
    phi = Not(Know(Prop("p")))
    for V in value_subsets(image):
        ext = frozenset().union(*(f.preimage(v) for v in V))
        if not valid_in(EpistemicStructure(F, {"p": ext}), phi):
            return False
    return True


def check_message_secrecy(SP: StateSpace) -> Verdict:
    if not SP.payloads:
        raise ValueError("empty payload set")
    F = SP.frame
    witnesses = []
    for s in F.ids:
        seen = {SP.payload_of[t] for t in possible(F, s)}
        for m in sorted_messages(SP.payloads):
            if m not in seen:
                witnesses.append(Witness(s, {"payload": render(m)}))
    return Verdict(not witnesses, witnesses,
                   {"states": len(F.ids), "payloads": len(SP.payloads),
                    "checks": len(F.ids) * len(SP.payloads)})


def message_secrecy_syntactic_oracle(SP: StateSpace) -> bool:
    F = SP.frame
    payloads = sorted_messages(SP.payloads)
    if len(payloads) > MAX_IMAGE:
        raise ValueError(f"|payloads| = {len(payloads)} exceeds the enumeration cap {MAX_IMAGE}")
    phi = Not(Know(Prop("p")))
    for V in value_subsets(payloads):
        ext = frozenset().union(*(SP.G[m] for m in V))
        if not valid_in(EpistemicStructure(F, {"p": ext}), phi):
            return False
    return True


def check_dy_secrecy(SP: StateSpace) -> Verdict:
    """The exchanged payload is never derivable from the adversary's messages."""
    witnesses = []
    for s in SP.states:
        m = SP.payload_of[s.id]
        proof = dy.derives(s.adv, m)
        if proof is not None:
            witnesses.append(Witness(s.id, {"payload": render(m), "proof": proof.to_json()}))
    return Verdict(not witnesses, witnesses, {"states": len(SP.states)})


def dy_secrecy_logical_check(SP: StateSpace) -> bool:
    """Validity of ``exchanged_m -> !has_m`` for every payload in the fixed model."""
    universe = set(SP.payloads)
    for s in SP.states:
        for m in s.adv:
            universe |= subterms(m)
    interp: dict[str, set[str]] = {}
    for m in universe:
        interp[prop_name("has", m)] = set()
        interp[prop_name("exchanged", m)] = set()
    for s in SP.states:
        for m in dy.close(s.adv):
            interp[prop_name("has", m)].add(s.id)
        interp[prop_name("exchanged", SP.payload_of[s.id])].add(s.id)
    M0 = EpistemicStructure(SP.frame, {p: frozenset(ids) for p, ids in interp.items()})
    return all(
        valid_in(M0, Implies(Prop(prop_name("exchanged", m)), Not(Prop(prop_name("has", m)))))
        for m in sorted_messages(SP.payloads)
    )


def recheck_witness(kind: str, subject, w: Witness, f: InformationFunction | None = None) -> bool:
    """Confirm a failure witness from the raw definitions, without the checker.

    ``kind`` is ``"f"`` (subject: a Frame, with ``f``), ``"message"`` or
    ``"dy"`` (subject: a StateSpace).
    """
    if kind == "f":
        F = subject
        row = {b for a, b in F.relation if a == w.state}
        return not any(f(t) == w.detail["value"] for t in row)
    SP: StateSpace = subject
    if kind == "message":
        s = SP.by_id[w.state]
        mine = dy.pattern_state(s.adv)
        target = next(m for m in SP.payloads if render(m) == w.detail["payload"])
        return all(dy.pattern_state(SP.by_id[t].adv) != mine for t in SP.G[target])
    if kind == "dy":
        s = SP.by_id[w.state]
        payload = SP.payload_of[w.state]
        if render(payload) != w.detail["payload"]:
            return False
        proof = _proof_from_json(w.detail["proof"], SP.spec.keys)
        return proof.conclusion == payload and proof.check(s.adv)
    raise ValueError(f"unknown witness kind {kind!r}")


def _proof_from_json(doc: dict, keys) -> dy.DerivationProof:
    return dy.DerivationProof(parse_message(doc["conclusion"], keys), doc["rule"],
                              tuple(_proof_from_json(p, keys) for p in doc["premises"]))
