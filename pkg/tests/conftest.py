import random

import pytest

from episec.term import Atom, Enc, Key

from helpers import K1, K2


@pytest.fixture
def leak_chain():
    """{m}k1, {inv(k1)}k2, inv(k2)."""
    return frozenset({Enc(Atom("m"), K1), Enc(Key(K1.inverse()), K2), Key(K2.inverse())})


@pytest.fixture
def rng():
    return random.Random(1234)
