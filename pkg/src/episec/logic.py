"""Epistemic formulas and their evaluation over epistemic structures.

Grammar (loosest binding last)::

    phi := "true" | "false" | IDENT | "!" phi | "K" phi | "(" phi ")"
         | phi "&" phi | phi "|" phi | phi "->" phi

``!`` and ``K`` bind tightest, then ``&``, ``|`` and the right-associative ``->``.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from typing import Union
from weakref import WeakKeyDictionary

from .kripke import EpistemicStructure, InformationFunction, ModelError, possible

__all__ = [
    "Prop", "Not", "And", "Or", "Implies", "Know", "Top", "Bottom", "Formula",
    "FormulaSyntaxError", "parse_formula", "extension", "eval", "valid_in",
    "is_f_local", "is_f_local_by_classes",
]


@dataclass(frozen=True)
class Prop:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Not:
    arg: "Formula"

    def __str__(self):
        return f"!{_wrap(self.arg)}"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"({self.left} -> {self.right})"


@dataclass(frozen=True)
class Know:
    arg: "Formula"

    def __str__(self):
        return f"K {_wrap(self.arg)}"


@dataclass(frozen=True)
class Top:
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class Bottom:
    def __str__(self):
        return "false"


Formula = Union[Prop, Not, And, Or, Implies, Know, Top, Bottom]


def _wrap(f):
    s = str(f)
    return s if isinstance(f, (Prop, Top, Bottom, Not, Know)) or s.startswith("(") else f"({s})"


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.position = position


_FTOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>->|[!&|()]))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _FTOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        toks.append((m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("", len(text)))
    return toks


def parse_formula(text: str) -> Formula:
    toks = _tokenize(text)
    i = 0

    def peek():
        return toks[i][0]

    def expect(tok):
        nonlocal i
        if toks[i][0] != tok:
            got = toks[i][0] or "end of input"
            raise FormulaSyntaxError(f"expected {tok!r}, got {got!r}", toks[i][1], text)
        i += 1

    def implication():
        nonlocal i
        left = disjunction()
        if peek() == "->":
            i += 1
            return Implies(left, implication())
        return left

    def disjunction():
        nonlocal i
        f = conjunction()
        while peek() == "|":
            i += 1
            f = Or(f, conjunction())
        return f

    def conjunction():
        nonlocal i
        f = unary()
        while peek() == "&":
            i += 1
            f = And(f, unary())
        return f

    def unary():
        nonlocal i
        tok, pos = toks[i]
        if tok == "!":
            i += 1
            return Not(unary())
        if tok == "K":
            i += 1
            return Know(unary())
        if tok == "(":
            i += 1
            f = implication()
            expect(")")
            return f
        if tok == "true":
            i += 1
            return Top()
        if tok == "false":
            i += 1
            return Bottom()
        if tok and (tok[0].isalpha() or tok[0] == "_"):
            i += 1
            return Prop(tok)
        raise FormulaSyntaxError(f"unexpected {tok or 'end of input'!r}", pos, text)

    f = implication()
    if peek() != "":
        raise FormulaSyntaxError(f"trailing input {peek()!r}", toks[i][1], text)
    return f


# Extensions are cached per structure.  Entries are only ever added, each value is
# a complete frozenset, so concurrent readers see either a miss or a full result.
_memo: "WeakKeyDictionary[EpistemicStructure, dict]" = WeakKeyDictionary()
_memo_lock = threading.Lock()


def _cache(M: EpistemicStructure) -> dict:
    try:
        return _memo[M]
    except KeyError:
        with _memo_lock:
            return _memo.setdefault(M, {})


def extension(M: EpistemicStructure, phi: Formula) -> frozenset[str]:
    """The set of state ids where ``phi`` holds."""
    cache = _cache(M)
    hit = cache.get(phi)
    if hit is not None:
        return hit
    every = frozenset(M.frame.ids)
    if isinstance(phi, Prop):
        if phi.name not in M.interp:
            raise ModelError(f"unknown proposition {phi.name!r}")
        out = M.interp[phi.name]
    elif isinstance(phi, Top):
        out = every
    elif isinstance(phi, Bottom):
        out = frozenset()
    elif isinstance(phi, Not):
        out = every - extension(M, phi.arg)
    elif isinstance(phi, And):
        out = extension(M, phi.left) & extension(M, phi.right)
    elif isinstance(phi, Or):
        out = extension(M, phi.left) | extension(M, phi.right)
    elif isinstance(phi, Implies):
        out = (every - extension(M, phi.left)) | extension(M, phi.right)
    elif isinstance(phi, Know):
        inner = extension(M, phi.arg)
        succ = M.frame.successors
        out = frozenset(s for s in M.frame.ids if succ[s] <= inner)
    else:
        raise TypeError(f"not a formula: {phi!r}")
    cache[phi] = out
    return out


def eval(M: EpistemicStructure, s: str, phi: Formula) -> bool:  # noqa: A001
    possible(M.frame, s)  # raises on unknown state
    return s in extension(M, phi)


def valid_in(M: EpistemicStructure, phi: Formula) -> bool:
    return len(extension(M, phi)) == len(M.frame.ids)


def is_f_local(M: EpistemicStructure, phi: Formula, f: InformationFunction) -> bool:
    """Whether the truth of ``phi`` is determined by the value of ``f``."""
    ext = extension(M, phi)
    truth: dict[str, bool] = {}
    for s in M.frame.ids:
        v = f(s)
        if truth.setdefault(v, s in ext) != (s in ext):
            return False
    return True


def is_f_local_by_classes(M: EpistemicStructure, phi: Formula, f: InformationFunction) -> bool:
    """Set-level check: the extension is a union of preimage classes of ``f``."""
    ext = extension(M, phi)
    union = frozenset().union(*(f.preimage(v) for v in f.image() if f.preimage(v) <= ext))
    return union == ext
