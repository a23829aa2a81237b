"""Symbolic message algebra: atoms, keys, pairs, encryptions and the box placeholder.

Concrete syntax::

    msg := "(" msg "," msg ")" | "{" msg "}" key | key | atom
    key := IDENT | "inv(" IDENT ")"

Atoms are lowercase identifiers; key identifiers must be declared in a key
table mapping each key family name to whether it is symmetric.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

__all__ = [
    "KeyId", "Atom", "Key", "Pair", "Enc", "Box", "BOX", "Message",
    "MessageSyntaxError", "keytable", "parse_message", "render",
    "subterms", "node_count", "is_box_free", "substitute", "sorted_messages",
]


@dataclass(frozen=True, order=True)
class KeyId:
    """A key of a family ``name``; asymmetric families come in ``+``/``-`` pairs."""

    name: str
    polarity: str = "+"
    symmetric: bool = False

    def __post_init__(self):
        if self.polarity not in ("+", "-"):
            raise ValueError(f"bad polarity {self.polarity!r}")
        if self.symmetric and self.polarity != "+":
            raise ValueError(f"symmetric key {self.name} has no negative polarity")

    def inverse(self) -> "KeyId":
        if self.symmetric:
            return self
        return KeyId(self.name, "-" if self.polarity == "+" else "+", False)

    def __str__(self):
        if self.symmetric or self.polarity == "+":
            return self.name
        return f"inv({self.name})"


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Key:
    key: KeyId

    def __str__(self):
        return str(self.key)


@dataclass(frozen=True)
class Pair:
    left: "Message"
    right: "Message"

    def __str__(self):
        return f"({self.left},{self.right})"


@dataclass(frozen=True)
class Enc:
    body: "Message"
    key: KeyId

    def __str__(self):
        return f"{{{self.body}}}{self.key}"


@dataclass(frozen=True)
class Box:
    def __str__(self):
        return "<>"


BOX = Box()

Message = Union[Atom, Key, Pair, Enc, Box]


class MessageSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.position = position
        self.text = text


def keytable(keys: Union[Mapping[str, bool], Iterable[KeyId], None]) -> dict[str, bool]:
    """Normalise a key declaration to ``{family name: symmetric}``."""
    if keys is None:
        return {}
    if isinstance(keys, Mapping):
        return {str(k): bool(v) for k, v in keys.items()}
    return {k.name: k.symmetric for k in keys}


_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<box><>)|(?P<punct>[(){},]))")
_ATOM = re.compile(r"[a-z][a-z0-9_]*\Z")


class _MessageParser:
    def __init__(self, text: str, keys: dict[str, bool], placeholder: str | None):
        self.text = text
        self.keys = keys
        self.placeholder = placeholder
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if m is None:
                start = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise MessageSyntaxError(f"unexpected character {text[start]!r}", start, text)
            kind = m.lastgroup
            start = m.start(kind)
            if kind == "box":
                raise MessageSyntaxError("box literal '<>' is not allowed in input", start, text)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.i = 0

    def peek(self):
        if self.i < len(self.tokens):
            return self.tokens[self.i]
        return ("eof", "", len(self.text))

    def take(self, value: str | None = None):
        tok = self.peek()
        if tok[0] == "eof":
            raise MessageSyntaxError("unexpected end of input", tok[2], self.text)
        if value is not None and tok[1] != value:
            raise MessageSyntaxError(f"expected {value!r}, got {tok[1]!r}", tok[2], self.text)
        self.i += 1
        return tok

    def parse(self) -> Message:
        msg = self.message()
        tok = self.peek()
        if tok[0] != "eof":
            raise MessageSyntaxError(f"trailing input {tok[1]!r}", tok[2], self.text)
        return msg

    def message(self) -> Message:
        kind, value, pos = self.peek()
        if value == "(":
            self.take()
            left = self.message()
            self.take(",")
            right = self.message()
            self.take(")")
            return Pair(left, right)
        if value == "{":
            self.take()
            body = self.message()
            self.take("}")
            return Enc(body, self.keyref())
        if kind == "ident":
            if value == "inv" or value in self.keys:
                return Key(self.keyref())
            self.take()
            if value == self.placeholder:
                return Atom(value)
            if _ATOM.match(value):
                return Atom(value)
            raise MessageSyntaxError(f"undeclared key {value!r}", pos, self.text)
        if kind == "eof":
            raise MessageSyntaxError("unexpected end of input", pos, self.text)
        raise MessageSyntaxError(f"unexpected {value!r}", pos, self.text)

    def keyref(self) -> KeyId:
        kind, value, pos = self.take()
        if kind != "ident":
            raise MessageSyntaxError(f"expected a key, got {value!r}", pos, self.text)
        negative = False
        if value == "inv":
            self.take("(")
            kind, value, pos = self.take()
            if kind != "ident":
                raise MessageSyntaxError(f"expected a key, got {value!r}", pos, self.text)
            self.take(")")
            negative = True
        if value not in self.keys:
            raise MessageSyntaxError(f"undeclared key {value!r}", pos, self.text)
        symmetric = self.keys[value]
        return KeyId(value, "-" if negative and not symmetric else "+", symmetric)


def parse_message(text: str, keys=None, placeholder: str | None = None) -> Message:
    """Parse ``text`` into a message; ``keys`` declares the key families.

    ``placeholder`` names an extra (non-lowercase) token accepted as an atom,
    used for protocol templates.
    """
    return _MessageParser(text, keytable(keys), placeholder).parse()


def render(m: Message) -> str:
    return str(m)


def subterms(m: Message) -> set[Message]:
    """All subtrees of ``m``, plus ``Key k`` for every ``Enc(_, k)``."""
    out: set[Message] = set()
    stack = [m]
    while stack:
        t = stack.pop()
        if t in out:
            continue
        out.add(t)
        if isinstance(t, Pair):
            stack.extend((t.left, t.right))
        elif isinstance(t, Enc):
            stack.extend((t.body, Key(t.key)))
    return out


def node_count(m: Message) -> int:
    if isinstance(m, Pair):
        return 1 + node_count(m.left) + node_count(m.right)
    if isinstance(m, Enc):
        return 1 + node_count(m.body)
    return 1


def enc_count(m: Message) -> int:
    if isinstance(m, Pair):
        return enc_count(m.left) + enc_count(m.right)
    if isinstance(m, Enc):
        return 1 + enc_count(m.body)
    return 0


def is_box_free(m: Message) -> bool:
    if isinstance(m, Box):
        return False
    if isinstance(m, Pair):
        return is_box_free(m.left) and is_box_free(m.right)
    if isinstance(m, Enc):
        return is_box_free(m.body)
    return True


def substitute(m: Message, old: Message, new: Message) -> Message:
    if m == old:
        return new
    if isinstance(m, Pair):
        return Pair(substitute(m.left, old, new), substitute(m.right, old, new))
    if isinstance(m, Enc):
        return Enc(substitute(m.body, old, new), m.key)
    return m


def sorted_messages(ms: Iterable[Message]) -> list[Message]:
    return sorted(ms, key=render)
