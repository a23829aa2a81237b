"""Seeded random instance generators for the cross-check harness and tests.

All generators take a ``random.Random`` so runs are reproducible from one seed.
"""

from __future__ import annotations

import random

from .kripke import Frame, GlobalState, InformationFunction, k_local
from .protocol import PLACEHOLDER, ProtocolSpec, Step
from .term import Atom, Enc, Key, KeyId, Message, Pair

ATOMS = ("a", "b", "c", "d", "e", "f")


def random_keys(rng: random.Random, families: int = 4) -> list[KeyId]:
    """Both polarities of each family; roughly half the families symmetric."""
    out = []
    for i in range(1, families + 1):
        if rng.random() < 0.5:
            out.append(KeyId(f"k{i}", "+", True))
        else:
            out += [KeyId(f"k{i}", "+"), KeyId(f"k{i}", "-")]
    return out


def random_message(rng: random.Random, depth: int, atoms=ATOMS, keys=()) -> Message:
    if depth <= 0 or rng.random() < 0.3:
        if keys and rng.random() < 0.35:
            return Key(rng.choice(keys))
        return Atom(rng.choice(atoms))
    if not keys or rng.random() < 0.45:
        return Pair(random_message(rng, depth - 1, atoms, keys),
                    random_message(rng, depth - 1, atoms, keys))
    return Enc(random_message(rng, depth - 1, atoms, keys), rng.choice(keys))


def random_message_set(rng: random.Random, max_size: int = 5, max_depth: int = 4,
                       n_atoms: int = 6, families: int = 4) -> frozenset[Message]:
    keys = random_keys(rng, rng.randint(1, families))
    atoms = ATOMS[: rng.randint(1, n_atoms)]
    return frozenset(random_message(rng, rng.randint(0, max_depth), atoms, keys)
                     for _ in range(rng.randint(0, max_size)))


def random_pattern_instance(rng: random.Random) -> tuple[Message, frozenset[KeyId]]:
    keys = random_keys(rng, rng.randint(1, 4))
    m = random_message(rng, rng.randint(0, 4), ATOMS[: rng.randint(1, 6)], keys)
    K0 = frozenset(k for k in keys if rng.random() < 0.3)
    return m, K0


def random_frame(rng: random.Random, max_states: int = 8, values=(2, 3, 4),
                 density: float | None = None) -> tuple[Frame, InformationFunction]:
    """An adversarial frame with an information function over agent ``hi``.

    The function's image has exactly ``k`` values for ``k`` drawn from ``values``;
    the relation is K^local plus random extra pairs.
    """
    k = rng.choice(values)
    n = rng.randint(k, max(k, max_states))
    vals = [f"v{i}" for i in range(k)]
    assign = vals + [rng.choice(vals) for _ in range(n - k)]
    rng.shuffle(assign)
    adv_pool = [f"o{i}" for i in range(rng.randint(1, n))]
    states = tuple(
        GlobalState(f"w{i}", rng.choice(adv_pool), "",
                    (("hi", f"{assign[i]}.{rng.randint(0, 1)}"),))
        for i in range(n))
    rel = set(k_local(states))
    p = rng.random() if density is None else density
    for a in states:
        for b in states:
            if rng.random() < p * 0.5:
                rel.add((a.id, b.id))
    f = InformationFunction("hi", {s.id: assign[i] for i, s in enumerate(states)})
    return Frame(states, frozenset(rel)), f


_PAYLOAD_TEMPLATES = (
    lambda k1, k2: PLACEHOLDER,
    lambda k1, k2: Enc(PLACEHOLDER, k1),
    lambda k1, k2: Pair(PLACEHOLDER, Atom("n")),
    lambda k1, k2: Enc(Pair(PLACEHOLDER, Atom("n")), k1),
    lambda k1, k2: Enc(Enc(PLACEHOLDER, k1), k2),
)

_OTHER_TEMPLATES = (
    lambda k1, k2: Atom("n"),
    lambda k1, k2: Key(k1.inverse()),
    lambda k1, k2: Enc(Key(k1.inverse()), k2),
    lambda k1, k2: Enc(Atom("n"), k2),
    lambda k1, k2: Pair(Atom("n"), Key(k2.inverse())),
)


def random_protocol_spec(rng: random.Random, payload_counts=(2, 3)) -> ProtocolSpec:
    """A small single-payload transmission protocol between A and B.

    Payloads are atoms that never occur elsewhere in the protocol or in the
    adversary's initial knowledge.
    """
    fams = {f"k{i}": rng.random() < 0.5 for i in (1, 2)}
    k1 = KeyId("k1", "+", fams["k1"])
    k2 = KeyId("k2", "+", fams["k2"])
    payloads = tuple(Atom(x) for x in ("a", "b", "c")[: rng.choice(payload_counts)])
    n_steps = rng.randint(1, 3)
    carrier = rng.randrange(n_steps)
    script = []
    for i in range(n_steps):
        sender, to = ("A", "B") if rng.random() < 0.7 else ("B", "A")
        pool = _PAYLOAD_TEMPLATES if i == carrier else _OTHER_TEMPLATES
        script.append(Step(sender, to, rng.choice(pool)(k1, k2)))
    initial_pool = [Key(k1.inverse()), Key(k2.inverse()), Atom("n"), Atom("e")]
    adv_initial = frozenset(m for m in initial_pool if rng.random() < 0.25)
    return ProtocolSpec(
        agents=("A", "B"), keys=fams, payloads=payloads, adv_initial=adv_initial,
        script=tuple(script), max_steps=rng.randint(2, 5), max_injections=rng.randint(0, 1),
    )
