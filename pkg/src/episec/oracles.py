"""Deliberately naive reference implementations used to cross-check the checkers.

Nothing here shares code with the paths it checks beyond the data types.
"""

from __future__ import annotations

from itertools import combinations

from .kripke import Frame, InformationFunction
from .term import Enc, Key, Message, Pair, subterms


def naive_closure(H, max_rounds: int | None = None) -> frozenset[Message]:
    """Apply every rule to every element, round by round, until nothing changes.

    Each productive round adds at least one subterm of H, so the number of
    distinct subterms bounds the rounds needed.
    """
    known = set(H)
    if max_rounds is None:
        max_rounds = len(set().union(*(subterms(m) for m in known))) + 1 if known else 1
    for _ in range(max_rounds):
        new = set()
        for m in known:
            if isinstance(m, Pair):
                new.add(m.left)
                new.add(m.right)
            if isinstance(m, Enc):
                for k in known:
                    if isinstance(k, Key) and k.key.inverse() == m.key:
                        new.add(m.body)
        if new <= known:
            break
        known |= new
    return frozenset(known)


def derivable_subterms(m: Message, K0) -> frozenset[Message]:
    """{m' in subterms(m) : K0 + {m} |- m'}, computed with the naive closure."""
    derivable = naive_closure({Key(k) for k in K0} | {m})
    return frozenset(t for t in subterms(m) if t in derivable)


def brute_f_secrecy(F: Frame, f: InformationFunction) -> bool:
    """Double loop over states and values straight from the relation pairs."""
    values = set(f.value.values())
    for s in F.ids:
        for v in values:
            if not any(a == s and f.value[b] == v for a, b in F.relation):
                return False
    return True


def f_local_nontrivial_extensions(F: Frame, f: InformationFunction) -> set[frozenset]:
    """Every state subset that is f-local and nontrivial, by enumerating all subsets."""
    ids = list(F.ids)
    out = set()
    for r in range(1, len(ids)):
        for subset in combinations(ids, r):
            ext = frozenset(subset)
            if all((a in ext) == (b in ext) for a in ids for b in ids if f.value[a] == f.value[b]):
                out.add(ext)
    return out


def brute_message_secrecy(SP) -> bool:
    """Pairwise pattern-state comparison, without building a frame."""
    from .dy import pattern_state

    ps = {s.id: pattern_state(s.adv) for s in SP.states}
    for s in SP.states:
        for m in SP.payloads:
            if not any(ps[t] == ps[s.id] for t in SP.G[m]):
                return False
    return True
