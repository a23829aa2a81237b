"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""

import random
import time

import pytest

from episec import crosscheck, cryptolab, dy, logic, oracles, secrecy
from episec.dy import DECRYPT
from episec.generators import random_frame, random_message_set, random_pattern_instance, random_protocol_spec
from episec.kripke import GlobalState, build_dy_frame, load_model, validate_adversarial
from episec.protocol import generate, load_spec
from episec.term import Atom, Enc, Key, KeyId

from helpers import K1, K2, fixture_path

SEED = 7
PROTOCOLS = ("cleartext", "symmetric-enc", "key-leak")


def verdict(capsys, n, ok, elapsed, limit, detail=""):
    within = limit is None or elapsed < limit
    line = (f"ACCEPTANCE {n:>2}: {'PASS' if ok and within else 'FAIL'}"
            f"  ({elapsed:.2f}s{'' if limit is None else f' / {limit}s'}) {detail}")
    with capsys.disabled():
        print("\n" + line)
    assert ok, line
    assert within, line


@pytest.fixture(scope="module")
def random_spaces():
    rng = random.Random(SEED)
    t0 = time.perf_counter()
    spaces = [generate(random_protocol_spec(rng)) for _ in range(200)]
    return spaces, time.perf_counter() - t0


def test_criterion_01_derivation(capsys):
    t0 = time.perf_counter()
    m = Atom("m")
    H = {Enc(m, K1), Enc(Key(K1.inverse()), K2), Key(K2.inverse())}
    proof = dy.derives(H, m)
    without = dy.derives(H - {Key(K2.inverse())}, m)
    ok = proof is not None and proof.check(H) and without is None
    verdict(capsys, 1, ok, time.perf_counter() - t0, 1, "m derivable; not without inv(k2)")


def test_criterion_02_murder(capsys):
    t0 = time.perf_counter()
    M, _ = load_model(fixture_path("murder"))
    P = logic.parse_formula
    got = (logic.eval(M, "w1", P("K g1")), logic.eval(M, "w1", P("K g2")), logic.eval(M, "w3", P("g1")))
    verdict(capsys, 2, got == (True, False, False), time.perf_counter() - t0, 1,
            f"(K g1@w1, K g2@w1, g1@w3) = {got}")


def test_criterion_03_closure_oracle(capsys):
    t0 = time.perf_counter()
    rng = random.Random(SEED)
    bad = sum(dy.close(H) != oracles.naive_closure(H) for H in (random_message_set(rng) for _ in range(1000)))
    verdict(capsys, 3, bad == 0, time.perf_counter() - t0, 30, f"{bad} mismatches / 1000")


def test_criterion_04_submessage(capsys):
    t0 = time.perf_counter()
    rng = random.Random(SEED)
    bad = 0
    for _ in range(1000):
        m, K0 = random_pattern_instance(rng)
        bad += dy.recoverable(m, K0) != oracles.derivable_subterms(m, K0)
    verdict(capsys, 4, bad == 0, time.perf_counter() - t0, 30, f"{bad} mismatches / 1000")


def test_criterion_05_f_secrecy(capsys):
    t0 = time.perf_counter()
    rng = random.Random(SEED)
    bad = held = 0
    for _ in range(500):
        F, f = random_frame(rng)
        sem = secrecy.check_f_secrecy(F, f).holds
        held += sem
        bad += sem != secrecy.f_secrecy_syntactic_oracle(F, f)
    verdict(capsys, 5, bad == 0, time.perf_counter() - t0, 60,
            f"{bad} mismatches / 500 ({held} secret)")


def test_criterion_06_message_secrecy(capsys, random_spaces):
    spaces, gen_time = random_spaces
    t0 = time.perf_counter()
    bad = held = 0
    for SP in spaces:
        sem = secrecy.check_message_secrecy(SP).holds
        held += sem
        bad += sem != secrecy.message_secrecy_syntactic_oracle(SP)
    verdict(capsys, 6, bad == 0, gen_time + time.perf_counter() - t0, 120,
            f"{bad} mismatches / {len(spaces)} ({held} secret)")


def test_criterion_07_dy_secrecy(capsys, random_spaces):
    spaces, _ = random_spaces
    t0 = time.perf_counter()
    spaces = [generate(load_spec(fixture_path(n))) for n in PROTOCOLS] + spaces
    bad = sum(secrecy.check_dy_secrecy(SP).holds != secrecy.dy_secrecy_logical_check(SP) for SP in spaces)
    verdict(capsys, 7, bad == 0, time.perf_counter() - t0, None, f"{bad} mismatches / {len(spaces)}")


def test_criterion_08_fixture_verdicts(capsys):
    t0 = time.perf_counter()
    sp = {n: generate(load_spec(fixture_path(n))) for n in PROTOCOLS}
    sym, clear, leak = sp["symmetric-enc"], sp["cleartext"], sp["key-leak"]
    ok = secrecy.check_message_secrecy(sym).holds and secrecy.check_dy_secrecy(sym).holds
    for kind, check in (("message", secrecy.check_message_secrecy), ("dy", secrecy.check_dy_secrecy)):
        v = check(clear)
        ok &= not v.holds and all(secrecy.recheck_witness(kind, clear, w) for w in v.witnesses)
    v = secrecy.check_dy_secrecy(leak)
    wrapped_key = Enc(Key(KeyId("k1").inverse()), KeyId("k2"))
    post = {s.id for s in leak.states
            if Enc(leak.payload_of[s.id], KeyId("k1")) in s.adv and wrapped_key in s.adv}
    ok &= {w.state for w in v.witnesses} == post and 0 < len(post) < len(leak.states)
    for w in v.witnesses:
        proof = secrecy._proof_from_json(w.detail["proof"], leak.spec.keys)
        ok &= proof.count(DECRYPT) == 2 and secrecy.recheck_witness("dy", leak, w)
    verdict(capsys, 8, ok, time.perf_counter() - t0, 10,
            f"key-leak fails at exactly {len(post)} post-leak states of {len(leak.states)}")


def test_criterion_09_local_in_dy(capsys):
    t0 = time.perf_counter()
    frames = [generate(load_spec(fixture_path(n))).frame for n in PROTOCOLS]
    rng = random.Random(SEED)
    for _ in range(500):
        pool = [random_message_set(rng, max_size=3) for _ in range(rng.randint(1, 3))]
        states = [GlobalState(f"s{i}", rng.choice(pool)) for i in range(rng.randint(1, 8))]
        frames.append(build_dy_frame(states))
    bad = sum(not validate_adversarial(F).ok for F in frames)
    verdict(capsys, 9, bad == 0, time.perf_counter() - t0, None, f"{bad} violations / {len(frames)} frames")


def test_criterion_10_leaky_scheme(capsys):
    t0 = time.perf_counter()
    x = cryptolab.bits_from_hex("0" * 16, 64)
    y = x.copy()
    y[0] = 1
    est = cryptolab.estimate(cryptolab.SCHEMES["leaky-first-bit"], cryptolab.DISTINGUISHERS["first-bit"],
                             x, y, cryptolab.bits_from_hex(""), 8, 10_000, SEED)
    verdict(capsys, 10, est.standard_adv >= 0.99, time.perf_counter() - t0, 10,
            f"standard advantage {est.standard_adv:.4f}")


def test_criterion_11_ideal_scheme(capsys):
    t0 = time.perf_counter()
    states, props = cryptolab.load_states(fixture_path("crypto-states"))
    props.setdefault("first_bit", cryptolab.first_bit_states(states))
    cs = cryptolab.build_crypt_structure(states, cryptolab.SCHEMES["ideal"], cryptolab.DEFAULT_BATTERY,
                                         10_000, 0.02, SEED, props)
    ests = [e for group in cs.estimates.values() for e in group]
    pairs = len(states) * (len(states) - 1) // 2
    expected = pairs * len(cryptolab.DEFAULT_BATTERY) * 3
    within = all(e.standard_adv <= 0.02 + e.standard_adv_ci95 for e in ests)
    worst = max(e.standard_adv - e.standard_adv_ci95 for e in ests)
    report = cryptolab.theorem4_check(cs)
    ok = (len(ests) == expected and within and report["approximate"] is True
          and report["holds"] and not report["vacuous"])
    verdict(capsys, 11, ok, time.perf_counter() - t0, 60,
            f"{len(ests)} estimates, max(adv - ci95) = {worst:.4f}; theorem4 holds (approximate)")


def test_crosscheck_entry_points_agree(capsys):
    # the CLI harness runs the same comparisons as criteria 3-6
    for name in crosscheck.SUITES:
        assert crosscheck.run(name, 25, SEED)["mismatches"] == 0
