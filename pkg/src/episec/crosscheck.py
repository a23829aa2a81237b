"""Randomized checker-versus-oracle harness.

Suites:

``dy-closure``     saturation closure vs. round-by-round rule application
``pattern-lemma``  ``recoverable`` vs. derivable subterms
``thm1``           f-secrecy vs. the ``!K p`` oracle (also vs. a brute double loop)
``thm2``           message secrecy vs. the ``!K p`` oracle on generated protocols
``thm3``           DY-secrecy vs. ``exchanged_m -> !has_m`` on generated protocols
"""

from __future__ import annotations

import random
from typing import Callable

from . import dy, oracles, secrecy
from .generators import random_frame, random_message_set, random_pattern_instance, random_protocol_spec
from .protocol import generate
from .term import render, sorted_messages

SUITES: dict[str, Callable] = {}


def suite(name):
    def register(fn):
        SUITES[name] = fn
        return fn
    return register


@suite("dy-closure")
def _closure(rng):
    H = random_message_set(rng)
    ok = dy.close(H) == oracles.naive_closure(H)
    return ok, {"H": [render(m) for m in sorted_messages(H)]}


@suite("pattern-lemma")
def _pattern(rng):
    m, K0 = random_pattern_instance(rng)
    ok = dy.recoverable(m, K0) == oracles.derivable_subterms(m, K0)
    return ok, {"m": render(m), "K0": sorted(str(k) for k in K0)}


@suite("thm1")
def _thm1(rng):
    F, f = random_frame(rng)
    semantic = secrecy.check_f_secrecy(F, f).holds
    ok = semantic == secrecy.f_secrecy_syntactic_oracle(F, f) == oracles.brute_f_secrecy(F, f)
    return ok, {"states": len(F.ids), "values": len(f.image()), "holds": semantic}


@suite("thm2")
def _thm2(rng):
    SP = generate(random_protocol_spec(rng))
    semantic = secrecy.check_message_secrecy(SP).holds
    ok = semantic == secrecy.message_secrecy_syntactic_oracle(SP)
    return ok, {"states": len(SP.states), "payloads": len(SP.payloads), "holds": semantic}


@suite("thm3")
def _thm3(rng):
    SP = generate(random_protocol_spec(rng))
    semantic = secrecy.check_dy_secrecy(SP).holds
    ok = semantic == secrecy.dy_secrecy_logical_check(SP)
    return ok, {"states": len(SP.states), "holds": semantic}


def run(name: str, count: int, seed: int) -> dict:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = random.Random(seed)
    mismatches = []
    holds = 0
    for i in range(count):
        ok, info = SUITES[name](rng)
        holds += bool(info.get("holds"))
        if not ok:
            mismatches.append({"instance": i, **info})
    return {
        "suite": name,
        "count": count,
        "seed": seed,
        "mismatches": len(mismatches),
        "mismatch_examples": mismatches[:10],
        "property_held": holds,
    }
