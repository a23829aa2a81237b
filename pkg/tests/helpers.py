"""Shared constants and hypothesis strategies for the test suite."""

from importlib import resources
from pathlib import Path

from hypothesis import strategies as st

from episec.term import Atom, Enc, Key, KeyId, Pair

FIXTURES = Path(str(resources.files("episec") / "fixtures"))

K1 = KeyId("k1")
K2 = KeyId("k2")
KEYS = {"k1": False, "k2": False}
ALL_KEYS = {"k1": False, "k2": False, "s1": True, "s2": True}


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.json"


key_ids = st.one_of(
    st.builds(KeyId, st.sampled_from(["k1", "k2"]), st.sampled_from(["+", "-"]), st.just(False)),
    st.builds(KeyId, st.sampled_from(["s1", "s2"]), st.just("+"), st.just(True)),
)
leaves = st.one_of(st.builds(Atom, st.sampled_from(["a", "b", "c", "m"])), st.builds(Key, key_ids))
messages = st.recursive(
    leaves,
    lambda inner: st.one_of(st.builds(Pair, inner, inner), st.builds(Enc, inner, key_ids)),
    max_leaves=8,
)
message_sets = st.frozensets(messages, max_size=5)
