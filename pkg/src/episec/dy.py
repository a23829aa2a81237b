"""Dolev-Yao deduction: the four-rule closure, derivable keys, patterns and K^dy."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .term import BOX, Enc, Key, KeyId, Message, Pair, render, sorted_messages, subterms

__all__ = [
    "DerivationProof", "close", "derives", "keys_of", "pattern", "pattern_state",
    "dy_equivalent", "recoverable",
]

MEMBER, DECRYPT, PROJ_LEFT, PROJ_RIGHT = "member", "decrypt", "proj-left", "proj-right"


@dataclass(frozen=True)
class DerivationProof:
    conclusion: Message
    rule: str
    premises: tuple["DerivationProof", ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "conclusion": render(self.conclusion),
            "premises": [p.to_json() for p in self.premises],
        }

    def count(self, rule: str) -> int:
        return (self.rule == rule) + sum(p.count(rule) for p in self.premises)

    def check(self, H: Iterable[Message]) -> bool:
        """Re-validate this tree rule by rule against ``H``."""
        H = frozenset(H)
        c, ps = self.conclusion, self.premises
        if self.rule == MEMBER:
            return not ps and c in H
        if not all(p.check(H) for p in ps):
            return False
        if self.rule == DECRYPT:
            if len(ps) != 2:
                return False
            enc, key = ps[0].conclusion, ps[1].conclusion
            return (isinstance(enc, Enc) and enc.body == c
                    and key == Key(enc.key.inverse()))
        if self.rule in (PROJ_LEFT, PROJ_RIGHT):
            if len(ps) != 1 or not isinstance(ps[0].conclusion, Pair):
                return False
            pair = ps[0].conclusion
            return c == (pair.left if self.rule == PROJ_LEFT else pair.right)
        return False


def _saturate(H: Iterable[Message]) -> dict[Message, tuple]:
    """Worklist saturation; maps each derivable message to its justification."""
    why: dict[Message, tuple] = {}
    waiting: dict[KeyId, list[Enc]] = {}  # decryption key -> ciphertexts blocked on it
    work: deque[Message] = deque()

    def add(m, reason):
        if m not in why:
            why[m] = reason
            work.append(m)

    for m in sorted_messages(set(H)):
        add(m, (MEMBER,))
    while work:
        m = work.popleft()
        if isinstance(m, Pair):
            add(m.left, (PROJ_LEFT, m))
            add(m.right, (PROJ_RIGHT, m))
        elif isinstance(m, Enc):
            dk = m.key.inverse()
            if Key(dk) in why:
                add(m.body, (DECRYPT, m, Key(dk)))
            else:
                waiting.setdefault(dk, []).append(m)
        elif isinstance(m, Key):
            for enc in waiting.pop(m.key, ()):
                add(enc.body, (DECRYPT, enc, m))
    return why


def close(H: Iterable[Message]) -> frozenset[Message]:
    """{m : H |- m} under member, decrypt and the two projections."""
    return frozenset(_saturate(H))


def derives(H: Iterable[Message], m: Message) -> Optional[DerivationProof]:
    why = _saturate(H)
    if m not in why:
        return None
    built: dict[Message, DerivationProof] = {}

    def proof(t: Message) -> DerivationProof:
        if t not in built:
            rule, *prem = why[t]
            built[t] = DerivationProof(t, rule, tuple(proof(p) for p in prem))
        return built[t]

    return proof(m)


def keys_of(H: Iterable[Message]) -> frozenset[KeyId]:
    return frozenset(m.key for m in close(H) if isinstance(m, Key))


def pattern(m: Message, K: Iterable[KeyId]) -> Message:
    K = K if isinstance(K, (set, frozenset)) else frozenset(K)
    if isinstance(m, Pair):
        return Pair(pattern(m.left, K), pattern(m.right, K))
    if isinstance(m, Enc):
        if m.key.inverse() in K:
            return Enc(pattern(m.body, K), m.key)
        return BOX
    return m


def pattern_state(H: Iterable[Message]) -> frozenset[Message]:
    H = frozenset(H)
    K = keys_of(H)
    return frozenset(pattern(m, K) for m in H)


def dy_equivalent(H1: Iterable[Message], H2: Iterable[Message]) -> bool:
    return pattern_state(H1) == pattern_state(H2)


def _reach(m: Message, K: frozenset[KeyId]) -> set[Message]:
    out: set[Message] = set()
    stack = [m]
    while stack:
        t = stack.pop()
        out.add(t)
        if isinstance(t, Pair):
            stack.extend((t.left, t.right))
        elif isinstance(t, Enc) and t.key.inverse() in K:
            stack.append(t.body)
    return out


def recoverable(m: Message, K0: Iterable[KeyId]) -> frozenset[Message]:
    """Subterms of ``m`` an adversary holding ``K0`` and ``m`` can extract.

    Descends pairs freely and ciphertexts whose inverse key is derivable from
    ``K0`` plus ``m``.  Keys of ``K0`` that occur anywhere in ``m`` are
    included too, since they are held outright.
    """
    K0 = frozenset(K0)
    kstar = keys_of({Key(k) for k in K0} | {m})
    held = {Key(k) for k in K0} & subterms(m)
    return frozenset(_reach(m, kstar) | held)
