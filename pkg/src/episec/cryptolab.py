"""Fixed-parameter statistical stand-in for indistinguishability of encryptions.

Everything here is approximate: the "for every feasible algorithm" quantifier is
replaced by a finite distinguisher battery, and negligibility by a threshold at
a handful of security parameters.  Bits are ``numpy.uint8`` arrays of 0/1.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .kripke import EpistemicStructure, Frame, GlobalState, k_local, validate_adversarial
from .logic import Know, Not, Prop, extension, valid_in

__all__ = [
    "Scheme", "SCHEMES", "Distinguisher", "DISTINGUISHERS", "DEFAULT_BATTERY",
    "CryptoState", "AdvantageEstimate", "CryptStructure", "CryptoError",
    "encrypt", "estimate", "indistinguishable", "build_crypt_structure",
    "theorem4_check", "load_states", "states_from_dict", "bits_from_hex", "bits_to_hex",
    "DEFAULT_ETAS", "MIN_SAMPLES", "BLOCK",
]

DEFAULT_ETAS = (4, 8, 12)
MIN_SAMPLES = 100
BLOCK = 1000  # trials per independent random substream
Z95 = 1.96


class CryptoError(ValueError):
    pass


# -- schemes -----------------------------------------------------------------

@dataclass(frozen=True)
class Scheme:
    """A probabilistic symmetric scheme with keys of eta bits and plaintexts of eta**2."""

    name: str
    _encrypt: Callable = field(repr=False)
    extra_bits: Callable[[int], int] = field(default=lambda eta: 0, repr=False)

    def key_len(self, eta: int) -> int:
        return eta

    def msg_len(self, eta: int) -> int:
        return eta * eta

    def cipher_len(self, eta: int) -> int:
        return eta * eta + self.extra_bits(eta)

    def encrypt_batch(self, eta: int, keys: np.ndarray, plaintexts: np.ndarray,
                      rng: np.random.Generator) -> np.ndarray:
        if keys.shape[1] != self.key_len(eta) or plaintexts.shape[1] != self.msg_len(eta):
            raise CryptoError(f"{self.name}: key/plaintext length mismatch for eta={eta}")
        return self._encrypt(eta, keys, plaintexts, rng)


def _ideal(eta, keys, pts, rng):
    return rng.integers(0, 2, size=pts.shape, dtype=np.uint8)


def _leaky_first_bit(eta, keys, pts, rng):
    ct = _ideal(eta, keys, pts, rng)
    ct[:, 0] = pts[:, 0]
    return ct


def _keystream(key: np.ndarray, nonce: np.ndarray, nbits: int) -> np.ndarray:
    seed = np.packbits(key).tobytes() + b"|" + np.packbits(nonce).tobytes()
    raw = hashlib.shake_256(seed).digest((nbits + 7) // 8)
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[:nbits]


def _xor_stream(eta, keys, pts, rng):
    nonces = rng.integers(0, 2, size=(len(pts), eta), dtype=np.uint8)
    body = np.stack([p ^ _keystream(k, n, p.size) for k, n, p in zip(keys, nonces, pts)]) \
        if len(pts) else pts.copy()
    return np.concatenate([nonces, body], axis=1)


SCHEMES: dict[str, Scheme] = {
    "ideal": Scheme("ideal", _ideal),
    "leaky-first-bit": Scheme("leaky-first-bit", _leaky_first_bit),
    "xor-stream": Scheme("xor-stream", _xor_stream, lambda eta: eta),
}


def encrypt(scheme: Scheme, eta: int, key: np.ndarray, plaintext: np.ndarray,
            rng: np.random.Generator) -> np.ndarray:
    key = np.asarray(key, dtype=np.uint8)
    plaintext = np.asarray(plaintext, dtype=np.uint8)
    return scheme.encrypt_batch(eta, key[None, :], plaintext[None, :], rng)[0]


# -- distinguishers ----------------------------------------------------------

@dataclass(frozen=True)
class Distinguisher:
    name: str
    run: Callable[[np.ndarray, np.ndarray, np.random.Generator], np.ndarray] = field(repr=False)


def _first_aux_bit(aux):
    return aux[0] if aux.size else 0


DISTINGUISHERS: dict[str, Distinguisher] = {
    d.name: d for d in [
        Distinguisher("constant", lambda ct, aux, rng: np.zeros(len(ct), dtype=np.uint8)),
        Distinguisher("first-bit", lambda ct, aux, rng: ct[:, 0].astype(np.uint8)),
        Distinguisher("parity", lambda ct, aux, rng: (ct.sum(axis=1) % 2).astype(np.uint8)),
        Distinguisher("byte-majority",
                      lambda ct, aux, rng: (ct[:, :8].sum(axis=1) >= 5).astype(np.uint8)),
        Distinguisher("aux-comparison",
                      lambda ct, aux, rng: (ct[:, 0] == _first_aux_bit(aux)).astype(np.uint8)),
        # randomized: ignores its input; not part of the default battery
        Distinguisher("coin", lambda ct, aux, rng: rng.integers(0, 2, len(ct), dtype=np.uint8)),
    ]
}

DEFAULT_BATTERY = ("constant", "first-bit", "parity", "byte-majority", "aux-comparison")


# -- states ------------------------------------------------------------------

def bits_from_hex(text: str, nbits: int | None = None) -> np.ndarray:
    text = text.strip().lower().removeprefix("0x")
    if not text:
        raw = np.zeros(0, dtype=np.uint8)
    else:
        try:
            value = int(text, 16)
        except ValueError:
            raise CryptoError(f"bad hex string {text!r}") from None
        width = 4 * len(text)
        raw = np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)
    if nbits is None:
        return raw
    if raw.size < nbits:
        raise CryptoError(f"hex string {text!r} holds {raw.size} bits, need {nbits}")
    if raw[: raw.size - nbits].any():
        raise CryptoError(f"hex string {text!r} exceeds {nbits} bits")
    return raw[raw.size - nbits:]


def bits_to_hex(bits: np.ndarray) -> str:
    width = -(-len(bits) // 4) * 4
    value = int("".join(map(str, bits.tolist())) or "0", 2)
    return format(value, f"0{width // 4}x") if width else ""


@dataclass(frozen=True, eq=False)
class CryptoState:
    """Adversary local state: plaintexts x_eta and auxiliary inputs z_eta per eta."""

    xs: Mapping[int, np.ndarray]
    zs: Mapping[int, np.ndarray]
    aux_factor: int = 4

    def __post_init__(self):
        if set(self.xs) != set(self.zs):
            raise CryptoError("xs and zs must cover the same security parameters")
        for eta, x in self.xs.items():
            if len(x) != eta * eta:
                raise CryptoError(f"|x_{eta}| = {len(x)}, expected {eta * eta}")
            if len(self.zs[eta]) > self.aux_factor * eta * eta:
                raise CryptoError(f"|z_{eta}| exceeds {self.aux_factor}*eta^2")

    @property
    def etas(self) -> tuple[int, ...]:
        return tuple(sorted(self.xs))

    def label(self) -> str:
        return ";".join(f"{eta}:{bits_to_hex(self.xs[eta])}/{bits_to_hex(self.zs[eta])}"
                        for eta in self.etas)

    def same_aux(self, other: "CryptoState") -> bool:
        return self.etas == other.etas and all(
            np.array_equal(self.zs[e], other.zs[e]) for e in self.etas)


def states_from_dict(doc: Mapping) -> tuple[list[CryptoState], dict[str, list[int]]]:
    try:
        states = []
        for raw in doc["states"]:
            xs = {int(e): bits_from_hex(h, int(e) ** 2) for e, h in raw["xs"].items()}
            zs = {int(e): bits_from_hex(h) for e, h in raw.get("zs", {e: "" for e in raw["xs"]}).items()}
            states.append(CryptoState(xs, zs))
        props = {str(k): [int(i) for i in v] for k, v in doc.get("propositions", {}).items()}
    except (KeyError, TypeError, AttributeError) as e:
        raise CryptoError(f"malformed states document: {e!r}") from None
    for name, ids in props.items():
        if any(not 0 <= i < len(states) for i in ids):
            raise CryptoError(f"proposition {name!r} names an unknown state index")
    return states, props


def load_states(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CryptoError(f"{path}: {e}") from None
    return states_from_dict(doc)


# -- estimation --------------------------------------------------------------

@dataclass(frozen=True)
class AdvantageEstimate:
    scheme: str
    distinguisher: str
    eta: int
    samples: int
    agreement: float
    agreement_ci95: float
    standard_adv: float
    standard_adv_ci95: float
    p_x: float
    p_y: float

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme, "distinguisher": self.distinguisher, "eta": self.eta,
            "samples": self.samples,
            "agreement": round(self.agreement, 6), "agreement_ci95": round(self.agreement_ci95, 6),
            "standard_adv": round(self.standard_adv, 6),
            "standard_adv_ci95": round(self.standard_adv_ci95, 6),
            "p_x": round(self.p_x, 6), "p_y": round(self.p_y, 6),
            "approximate": True,
        }


def _ci95(p: float, n: int) -> float:
    return Z95 * math.sqrt(p * (1 - p) / n)


def estimate(scheme: Scheme, A: Distinguisher, x: np.ndarray, y: np.ndarray, z: np.ndarray,
             eta: int, samples: int, seed: int | Sequence[int]) -> AdvantageEstimate:
    """Run ``samples`` paired trials of A on fresh encryptions of ``x`` and ``y``.

    Trials are split into blocks of ``BLOCK``, each with its own child of the
    seed sequence, so the result does not depend on how blocks are scheduled.
    """
    if samples < MIN_SAMPLES:
        raise CryptoError(f"samples must be at least {MIN_SAMPLES}")
    x = np.asarray(x, dtype=np.uint8)
    y = np.asarray(y, dtype=np.uint8)
    z = np.asarray(z, dtype=np.uint8)
    n = scheme.msg_len(eta)
    if len(x) != n or len(y) != n:
        raise CryptoError(f"plaintexts must have {n} bits for eta={eta}")
    entropy = list(seed) if isinstance(seed, (list, tuple)) else [int(seed)]
    blocks = np.random.SeedSequence(entropy).spawn(-(-samples // BLOCK))
    outs_x, outs_y = [], []
    for i, child in enumerate(blocks):
        rng = np.random.default_rng(child)
        size = min(BLOCK, samples - i * BLOCK)
        kx = rng.integers(0, 2, (size, eta), dtype=np.uint8)
        ky = rng.integers(0, 2, (size, eta), dtype=np.uint8)
        cx = scheme.encrypt_batch(eta, kx, np.broadcast_to(x, (size, n)), rng)
        cy = scheme.encrypt_batch(eta, ky, np.broadcast_to(y, (size, n)), rng)
        outs_x.append(A.run(cx, z, rng))
        outs_y.append(A.run(cy, z, rng))
    ax = np.concatenate(outs_x)
    ay = np.concatenate(outs_y)
    agreement = float(np.mean(ax != ay))
    px, py = float(np.mean(ax)), float(np.mean(ay))
    return AdvantageEstimate(
        scheme=scheme.name, distinguisher=A.name, eta=eta, samples=samples,
        agreement=agreement, agreement_ci95=_ci95(agreement, samples),
        standard_adv=abs(px - py),
        standard_adv_ci95=Z95 * math.sqrt((px * (1 - px) + py * (1 - py)) / samples),
        p_x=px, p_y=py,
    )


def _battery(names: Iterable[str | Distinguisher]) -> list[Distinguisher]:
    out = []
    for d in names:
        if isinstance(d, Distinguisher):
            out.append(d)
        elif d in DISTINGUISHERS:
            out.append(DISTINGUISHERS[d])
        else:
            raise CryptoError(f"unknown distinguisher {d!r}")
    return out


def indistinguishable(battery, state_x: CryptoState, state_y: CryptoState, samples: int,
                      threshold: float, seed: int, scheme: Scheme,
                      estimates: list | None = None) -> bool:
    """True iff every battery member's standard advantage is within threshold + ci95 at every eta."""
    battery = _battery(battery)
    if not battery:
        raise CryptoError("empty distinguisher battery")
    if state_x.etas != state_y.etas:
        raise CryptoError("states cover different security parameters")
    if not state_x.same_aux(state_y):
        raise CryptoError("states must share their auxiliary inputs")
    ok = True
    for j, A in enumerate(battery):
        for eta in state_x.etas:
            est = estimate(scheme, A, state_x.xs[eta], state_y.xs[eta], state_x.zs[eta],
                           eta, samples, [seed, eta, j])
            if estimates is not None:
                estimates.append(est)
            if est.standard_adv > threshold + est.standard_adv_ci95:
                ok = False
    return ok


@dataclass
class CryptStructure:
    structure: EpistemicStructure
    states: list[CryptoState]
    lengths_agree: dict[tuple[str, str], bool]
    estimates: dict[tuple[str, str], list[AdvantageEstimate]]

    @property
    def frame(self) -> Frame:
        return self.structure.frame


def build_crypt_structure(states: Sequence[CryptoState], scheme: Scheme, battery=DEFAULT_BATTERY,
                          samples: int = 10_000, threshold: float = 0.02, seed: int = 0,
                          interp: Mapping[str, Iterable[int]] | None = None) -> CryptStructure:
    """Approximate K^crypt over ``states``: related iff same aux and no battery member separates them."""
    battery = _battery(battery)
    if not battery:
        raise CryptoError("empty distinguisher battery")
    gstates = tuple(GlobalState(f"c{i}", s.label()) for i, s in enumerate(states))
    ids = [g.id for g in gstates]
    rel = set(k_local(gstates)) | {(i, i) for i in ids}
    lengths = {}
    ests: dict[tuple[str, str], list[AdvantageEstimate]] = {}
    for (i, si), (j, sj) in combinations(enumerate(states), 2):
        a, b = ids[i], ids[j]
        same_len = si.etas == sj.etas and all(
            len(si.xs[e]) == len(sj.xs[e]) for e in si.etas)
        lengths[(a, b)] = lengths[(b, a)] = same_len
        if not same_len or not si.same_aux(sj) or (a, b) in rel:
            continue
        found: list[AdvantageEstimate] = []
        if indistinguishable(battery, si, sj, samples, threshold, seed, scheme, found):
            rel |= {(a, b), (b, a)}
        ests[(a, b)] = found
    frame = Frame(gstates, frozenset(rel))
    assert validate_adversarial(frame).ok
    props = {p: frozenset(ids[i] for i in v) for p, v in (interp or {}).items()}
    return CryptStructure(EpistemicStructure(frame, props), list(states), lengths, ests)


def theorem4_check(cs: CryptStructure) -> dict:
    """For each proposition that depends only on messages and is nontrivial among
    equal-length states, report whether ``!K p`` is valid."""
    M = cs.structure
    by_label: dict[str, set[str]] = {}
    for g in M.frame.states:
        by_label.setdefault(g.adv, set()).add(g.id)
    results = {}
    for p in sorted(M.interp):
        ext = extension(M, Prop(p))
        message_only = all(len(group & ext) in (0, len(group)) for group in by_label.values())
        nontrivial = any(cs.lengths_agree.get((s, t), False)
                         for s in ext for t in M.frame.ids if t not in ext)
        applies = message_only and nontrivial
        not_known = valid_in(M, Not(Know(Prop(p))))
        known_at = sorted(extension(M, Know(Prop(p))))
        results[p] = {
            "message_dependent": message_only,
            "length_nontrivial": nontrivial,
            "applies": applies,
            "not_known_valid": not_known,
            "known_at": known_at,
        }
    applicable = [r for r in results.values() if r["applies"]]
    return {
        "approximate": True,
        "holds": all(r["not_known_valid"] for r in applicable),
        "vacuous": not applicable,
        "propositions": results,
    }


def first_bit_states(states: Sequence[CryptoState]) -> list[int]:
    """Indices of states whose plaintext bit 0 is 1 at every eta."""
    return [i for i, s in enumerate(states) if all(s.xs[e][0] == 1 for e in s.etas)]
