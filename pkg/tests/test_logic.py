import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from episec.generators import random_frame
from episec.kripke import EpistemicStructure, ModelError, load_model
from episec.logic import (And, Bottom, FormulaSyntaxError, Implies, Know, Not, Or, Prop, Top,
                          eval, extension, is_f_local, is_f_local_by_classes, parse_formula,
                          valid_in)

from helpers import fixture_path

p, q, r = Prop("p"), Prop("q"), Prop("r")


@pytest.mark.parametrize("text, expected", [
    ("K p", Know(p)),
    ("!K p & q", And(Not(Know(p)), q)),
    ("p -> q -> r", Implies(p, Implies(q, r))),
    ("p | q & r", Or(p, And(q, r))),
    ("K (p -> q)", Know(Implies(p, q))),
    ("true & !false", And(Top(), Not(Bottom()))),
    ("K K p", Know(Know(p))),
])
def test_parse(text, expected):
    assert parse_formula(text) == expected


@pytest.mark.parametrize("text, pos", [("p &", 3), ("(p", 2), ("p q", 2), ("", 0), ("p $ q", 2)])
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(FormulaSyntaxError) as err:
        parse_formula(text)
    assert err.value.position == pos


def test_render_roundtrip():
    for text in ["K p", "!K p & q", "p -> q -> r", "(p -> q) -> r", "K !(p | q)"]:
        phi = parse_formula(text)
        assert parse_formula(str(phi)) == phi


@pytest.fixture
def murder():
    M, _ = load_model(fixture_path("murder"))
    return M


def test_murder_knowledge(murder):
    assert eval(murder, "w1", parse_formula("K g1"))
    assert not eval(murder, "w1", parse_formula("K g2"))
    assert not eval(murder, "w3", parse_formula("g1"))
    assert eval(murder, "w3", parse_formula("K !g1"))


def test_eval_unknown_state_and_prop(murder):
    with pytest.raises(ModelError):
        eval(murder, "nowhere", Top())
    with pytest.raises(ModelError, match="unknown proposition"):
        extension(murder, Prop("zzz"))


def test_valid_in(murder):
    assert valid_in(murder, parse_formula("g2 -> g1"))
    assert not valid_in(murder, parse_formula("g1"))
    assert valid_in(murder, parse_formula("K g1 -> g1"))


def test_is_f_local_examples():
    M, fs = load_model(fixture_path("fullrelation"))
    f = fs["secret"]
    assert is_f_local(M, Prop("secret_is_one"), f)
    assert is_f_local(M, Top(), f)
    # under the full relation nobody knows the secret, so K of it is uniformly false
    assert is_f_local(M, parse_formula("K secret_is_one"), f)
    assert not eval(M, "s2", parse_formula("K secret_is_one"))
    M2 = M.with_interp({"low": frozenset({"s1", "s2"})})
    assert not is_f_local(M2, Prop("low"), f)
    assert not is_f_local_by_classes(M2, Prop("low"), f)


def _structures(seed, count):
    rng = random.Random(seed)
    for _ in range(count):
        F, f = random_frame(rng)
        ids = list(F.ids)
        interp = {name: frozenset(s for s in ids if rng.random() < 0.5) for name in "pqr"}
        yield EpistemicStructure(F, interp), f


formulas = st.recursive(
    st.sampled_from([p, q, r, Top(), Bottom()]),
    lambda sub: st.one_of(
        sub.map(Not), sub.map(Know),
        st.builds(And, sub, sub), st.builds(Or, sub, sub), st.builds(Implies, sub, sub)),
    max_leaves=8)


@given(formulas, formulas, st.integers(0, 10_000))
@settings(max_examples=150)
def test_boolean_connectives(phi, psi, seed):
    M, _ = next(_structures(seed, 1))
    every = frozenset(M.frame.ids)
    assert extension(M, Not(phi)) == every - extension(M, phi)
    assert extension(M, And(phi, psi)) == extension(M, phi) & extension(M, psi)
    assert extension(M, Implies(phi, psi)) == extension(M, Or(Not(phi), psi))


@given(formulas, st.integers(0, 10_000))
@settings(max_examples=150)
def test_veridicality_on_adversarial_frames(phi, seed):
    M, _ = next(_structures(seed, 1))
    assert valid_in(M, Implies(Know(phi), phi))


@given(formulas, st.integers(0, 10_000))
@settings(max_examples=150)
def test_generalization(phi, seed):
    M, _ = next(_structures(seed, 1))
    if valid_in(M, phi):
        assert valid_in(M, Know(phi))


@given(formulas, st.integers(0, 10_000))
@settings(max_examples=150)
def test_f_local_matches_class_check(phi, seed):
    M, f = next(_structures(seed, 1))
    assert is_f_local(M, phi, f) == is_f_local_by_classes(M, phi, f)


def test_memo_survives_repeated_queries(murder):
    phi = parse_formula("K g1 & !K g2")
    assert extension(murder, phi) is extension(murder, phi)
