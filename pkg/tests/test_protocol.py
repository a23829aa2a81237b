import json
import random
from dataclasses import replace

import pytest

from episec import dy
from episec.generators import random_protocol_spec
from episec.kripke import validate_adversarial
from episec.protocol import (PLACEHOLDER, BoundExceeded, SpecError, Step, g_states, generate,
                             load_spec, matches_shape, spec_from_dict)
from episec.term import Atom, Enc, KeyId, Pair

from helpers import fixture_path

a, b, n = Atom("a"), Atom("b"), Atom("n")
K = KeyId("k", "+", True)


def _spec(name, **bounds):
    spec = load_spec(fixture_path(name))
    return replace(spec, **bounds) if bounds else spec


def test_load_fixtures():
    spec = _spec("key-leak")
    assert spec.agents == ("A", "B")
    assert spec.payloads == (a, b)
    assert spec.script[0] == Step("A", "B", Enc(PLACEHOLDER, KeyId("k1")))
    assert spec.keys == {"k1": False, "k2": False}


@pytest.mark.parametrize("patch, msg", [
    ({"script": [{"from": "A", "to": "B", "msg": "{PAYLOAD}zz"}]}, "undeclared"),
    ({"script": [{"from": "A", "to": "B", "msg": "n"}]}, "exactly once"),
    ({"script": [{"from": "A", "to": "C", "msg": "PAYLOAD"}]}, "undeclared agent"),
    ({"agents": ["A", "adv"]}, "reserved"),
    ({"payloads": []}, "no payloads"),
    ({"bounds": {"max_steps": -1}}, "non-negative"),
])
def test_spec_errors(patch, msg):
    doc = json.loads(fixture_path("cleartext").read_text())
    doc.update(patch)
    with pytest.raises(SpecError, match=msg):
        spec_from_dict(doc)


def test_matches_shape():
    assert matches_shape(Pair(b, n), Pair(PLACEHOLDER, n))
    assert not matches_shape(Pair(b, a), Pair(PLACEHOLDER, n))
    assert matches_shape(Enc(b, K), Enc(Pair(a, n), K))
    assert not matches_shape(Enc(b, KeyId("j", "+", True)), Enc(a, K))
    assert matches_shape(Enc(a, K), PLACEHOLDER)


def test_symmetric_enc_branch_size():
    SP = generate(_spec("symmetric-enc", max_injections=0))
    for payload in (a, b):
        ids = g_states(SP, payload)
        assert len(ids) == 6
        for sid in ids:
            assert SP.by_id[sid].adv <= {Enc(payload, K)}


def test_cleartext_exposes_payload():
    SP = generate(_spec("cleartext"))
    assert any(a in s.adv for s in SP.states)


def test_zero_steps_gives_initial_states_only():
    SP = generate(_spec("key-leak", max_steps=0))
    assert len(SP.states) == len(SP.payloads)
    assert [s.id for s in SP.states] == ["s0", "s1"]


def test_g_partitions_states():
    SP = generate(_spec("key-leak"))
    parts = [SP.G[m] for m in SP.payloads]
    assert sum(map(len, parts)) == len(SP.states)
    assert frozenset().union(*parts) == frozenset(SP.frame.ids)
    for m in SP.payloads:
        solo = generate(replace(SP.spec, payloads=(m,)))
        assert len(solo.states) == len(SP.G[m])


def test_unknown_payload():
    SP = generate(_spec("cleartext", max_steps=1))
    with pytest.raises(SpecError):
        g_states(SP, Atom("zz"))


def test_generation_is_deterministic():
    one = generate(_spec("key-leak"))
    two = generate(_spec("key-leak"))
    assert one.states == two.states and one.parent == two.parent


def test_adv_knowledge_grows_along_paths():
    SP = generate(_spec("key-leak"))
    for s in SP.states:
        assert SP.spec.adv_initial <= s.adv
        parent = SP.parent[s.id]
        if parent is not None:
            assert SP.by_id[parent[0]].adv <= s.adv


def test_path_starts_at_init():
    SP = generate(_spec("symmetric-enc"))
    last = SP.states[-1].id
    steps = SP.path(last)
    assert steps[0][1] == "init" and steps[-1][0] == last


def test_dy_frame_is_adversarial():
    rng = random.Random(2)
    for _ in range(25):
        SP = generate(random_protocol_spec(rng))
        assert validate_adversarial(SP.frame).ok


def test_dy_frame_relates_equal_patterns():
    SP = generate(_spec("symmetric-enc"))
    for x, y in SP.frame.relation:
        assert dy.dy_equivalent(SP.by_id[x].adv, SP.by_id[y].adv)


def test_state_bound():
    with pytest.raises(BoundExceeded) as err:
        generate(_spec("key-leak", max_states=5))
    assert err.value.bound == "max_states"


def test_injection_adds_states():
    base = len(generate(_spec("key-leak", max_injections=0)).states)
    assert len(generate(_spec("key-leak", max_injections=1)).states) > base


def test_sender_local_state_records_secret():
    SP = generate(_spec("cleartext", max_steps=0))
    assert SP.states[0].local("A").startswith("secret=a;")
