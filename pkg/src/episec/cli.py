"""Command-line entry point.

Machine-readable JSON goes to stdout (or ``--out``), one-line summaries to
stderr.  Exit status: 0 when the property holds, 1 when it is violated, 2 on
usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, crosscheck, cryptolab, dy, logic, secrecy
from .kripke import ModelError, load_model
from .protocol import BoundExceeded, SpecError, generate, load_spec
from .term import MessageSyntaxError, parse_message, render, sorted_messages

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE = 0, 1, 2
DEFAULT_SEED = 7


class UsageError(Exception):
    pass


def resolve_input(name: str) -> Path:
    """A path, or the name of a bundled fixture (``fixtures/cleartext`` also works)."""
    p = Path(name)
    for cand in (p, p.with_name(p.name + ".json")):
        if cand.is_file():
            return cand
    bundled = resources.files("episec") / "fixtures" / (p.stem + ".json")
    if bundled.is_file():
        return Path(str(bundled))
    raise UsageError(f"no such file or fixture: {name}")


def _keytable(specs: list[str]) -> dict[str, bool]:
    table = {}
    for spec in specs or []:
        name, _, kind = spec.partition(":")
        if kind not in ("", "sym", "asym"):
            raise UsageError(f"bad key declaration {spec!r}; use NAME, NAME:sym or NAME:asym")
        table[name] = kind == "sym"
    return table


def _messages(texts, keys):
    return frozenset(parse_message(t, keys) for t in texts)


def _report(command: str, result, seed=None) -> dict:
    return {"command": command, "tool_version": __version__, "seed": seed, "result": result}


def _emit(args, report: dict) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- commands ----------------------------------------------------------------

def cmd_check(args) -> int:
    M, _ = load_model(resolve_input(args.model))
    phi = logic.parse_formula(args.formula)
    ext = logic.extension(M, phi)
    table = {s: s in ext for s in M.frame.ids}
    valid = logic.valid_in(M, phi)
    result = {"formula": str(phi), "truth": table, "valid": valid}
    if args.state is not None:
        result["state"] = args.state
        result["holds"] = logic.eval(M, args.state, phi)
        ok = result["holds"]
    else:
        ok = valid
    _emit(args, _report("check", result))
    _note(f"check {phi}: {'valid' if valid else 'not valid'}; true at {sorted(ext)}")
    return EXIT_OK if ok else EXIT_VIOLATED


def cmd_secrecy(args) -> int:
    if args.kind == "f":
        M, functions = load_model(resolve_input(args.input))
        if args.function is None:
            if len(functions) != 1:
                raise UsageError(f"choose --function from {sorted(functions)}")
            (args.function,) = functions
        if args.function not in functions:
            raise UsageError(f"unknown information function {args.function!r}")
        f = functions[args.function]
        verdict = secrecy.check_f_secrecy(M.frame, f)
        oracle = secrecy.f_secrecy_syntactic_oracle if args.oracle else None
        subject = M.frame
        if oracle:
            verdict.stats["oracle_vacuous"] = len(f.image()) < 2
            verdict.stats["oracle_subsets"] = 2 ** len(f.image()) - 2
        oracle_value = oracle(M.frame, f) if oracle else None
    else:
        SP = generate(load_spec(resolve_input(args.input)))
        if args.kind == "message":
            verdict = secrecy.check_message_secrecy(SP)
            oracle_value = secrecy.message_secrecy_syntactic_oracle(SP) if args.oracle else None
            if args.oracle:
                verdict.stats["oracle_vacuous"] = len(SP.payloads) < 2
        else:
            verdict = secrecy.check_dy_secrecy(SP)
            oracle_value = secrecy.dy_secrecy_logical_check(SP) if args.oracle else None
        subject, f = SP, None
    witnesses_ok = all(secrecy.recheck_witness(args.kind, subject, w, f) for w in verdict.witnesses)
    result = verdict.to_json()
    result["witnesses_revalidated"] = witnesses_ok
    if args.oracle:
        result["oracle"] = oracle_value
        result["oracle_agrees"] = oracle_value == verdict.holds
    _emit(args, _report(f"secrecy {args.kind}", result))
    _note(f"secrecy {args.kind}: {'holds' if verdict.holds else 'VIOLATED'}"
          f" ({len(verdict.witnesses)} witnesses)"
          + (f"; oracle agrees: {result['oracle_agrees']}" if args.oracle else ""))
    return EXIT_OK if verdict.holds else EXIT_VIOLATED


def cmd_dy(args) -> int:
    keys = _keytable(args.key)
    if args.action == "derive":
        H = _messages(args.messages, keys)
        goal = parse_message(args.goal, keys)
        proof = dy.derives(H, goal)
        result = {"goal": render(goal), "derivable": proof is not None,
                  "proof": proof.to_json() if proof else None,
                  "keys": sorted(str(k) for k in dy.keys_of(H))}
        _emit(args, _report("dy derive", result))
        _note(f"{render(goal)}: {'derivable' if proof else 'not derivable'}")
        return EXIT_OK if proof else EXIT_VIOLATED
    if args.action == "pattern":
        H = _messages(args.messages, keys)
        result = {"keys": sorted(str(k) for k in dy.keys_of(H)),
                  "pattern_state": [render(m) for m in sorted_messages(dy.pattern_state(H))]}
        _emit(args, _report("dy pattern", result))
        return EXIT_OK
    H1, H2 = _messages(args.left, keys), _messages(args.right, keys)
    same = dy.dy_equivalent(H1, H2)
    result = {"equivalent": same,
              "left": [render(m) for m in sorted_messages(dy.pattern_state(H1))],
              "right": [render(m) for m in sorted_messages(dy.pattern_state(H2))]}
    _emit(args, _report("dy equiv", result))
    _note("equivalent" if same else "distinguishable")
    return EXIT_OK if same else EXIT_VIOLATED


def cmd_generate(args) -> int:
    SP = generate(load_spec(resolve_input(args.protocol)))
    F = SP.frame
    classes = {}
    for s in SP.states:
        classes.setdefault(dy.pattern_state(s.adv), []).append(s.id)
    states = [{
        "id": s.id,
        "payload": render(SP.payload_of[s.id]),
        "adv": [render(m) for m in sorted_messages(s.adv)],
        "pattern_state": [render(m) for m in sorted_messages(dy.pattern_state(s.adv))],
        "env": s.env,
        "locals": dict(s.locals),
    } for s in SP.states]
    result = {
        "states": states,
        "G": {render(m): sorted(ids, key=_sid) for m, ids in SP.G.items()},
        "kdy_classes": sorted((sorted(ids, key=_sid) for ids in classes.values()), key=lambda c: _sid(c[0])),
        "kdy_pairs": len(F.relation),
    }
    _emit(args, _report("generate", result))
    _note(f"generated {len(SP.states)} states over {len(SP.payloads)} payloads")
    return EXIT_OK


def _sid(s: str) -> int:
    return int(s[1:])


def cmd_crosscheck(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    result = crosscheck.run(args.suite, args.count, args.seed)
    _emit(args, _report("crosscheck", result, args.seed))
    _note(f"crosscheck {args.suite}: {result['mismatches']} mismatches in {args.count}")
    return EXIT_OK if result["mismatches"] == 0 else EXIT_VIOLATED


def _scheme(name):
    try:
        return cryptolab.SCHEMES[name]
    except KeyError:
        raise UsageError(f"unknown scheme {name!r}; choose from {sorted(cryptolab.SCHEMES)}") from None


def cmd_crypto(args) -> int:
    scheme = _scheme(args.scheme)
    if args.action == "estimate":
        eta = args.eta[0] if args.eta else 8
        n = eta * eta
        x = cryptolab.bits_from_hex(args.x, n) if args.x else np.zeros(n, dtype=np.uint8)
        if args.y:
            y = cryptolab.bits_from_hex(args.y, n)
        else:
            y = x.copy()
            y[0] ^= 1
        z = cryptolab.bits_from_hex(args.z) if args.z else np.zeros(0, dtype=np.uint8)
        names = args.distinguisher or list(cryptolab.DEFAULT_BATTERY)
        results = []
        for j, A in enumerate(cryptolab._battery(names)):
            for e in args.eta or [eta]:
                if e != eta:
                    raise UsageError("estimate takes one --eta (plaintexts are eta^2 bits)")
                results.append(cryptolab.estimate(scheme, A, x, y, z, e, args.samples,
                                                  [args.seed, e, j]).to_json())
        _emit(args, _report("crypto estimate", results, args.seed))
        for r in results:
            _note(f"{r['distinguisher']:>15} eta={r['eta']}: adv={r['standard_adv']:.4f} "
                  f"(ci95 {r['standard_adv_ci95']:.4f}) agreement={r['agreement']:.4f} [approximate]")
        return EXIT_OK

    states, props = cryptolab.load_states(resolve_input(args.states))
    if args.eta:
        states = [cryptolab.CryptoState({e: s.xs[e] for e in args.eta}, {e: s.zs[e] for e in args.eta})
                  for s in states]
    battery = args.distinguisher or list(cryptolab.DEFAULT_BATTERY)
    props.setdefault("first_bit", cryptolab.first_bit_states(states))
    cs = cryptolab.build_crypt_structure(states, scheme, battery, args.samples, args.threshold,
                                         args.seed, props)
    related = sorted([a, b] for a, b in cs.frame.relation if a < b)
    if args.action == "indist":
        estimates = {f"{a}~{b}": [e.to_json() for e in ests] for (a, b), ests in sorted(cs.estimates.items())}
        result = {"approximate": True, "related": related, "estimates": estimates,
                  "threshold": args.threshold, "samples": args.samples}
        all_related = len(cs.frame.relation) == len(states) ** 2
        _emit(args, _report("crypto indist", result, args.seed))
        _note(f"approximate K^crypt: {len(related)} related pairs of {len(states) * (len(states) - 1) // 2}")
        return EXIT_OK if all_related else EXIT_VIOLATED
    result = cryptolab.theorem4_check(cs)
    result["related"] = related
    result["scheme"] = scheme.name
    _emit(args, _report("crypto theorem4", result, args.seed))
    _note(f"theorem4 (approximate): {'!K p valid for all applicable p' if result['holds'] else 'some p is known'}")
    return EXIT_OK if result["holds"] else EXIT_VIOLATED


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--json", action="store_true", help="JSON output (the default)")

    p = argparse.ArgumentParser(prog="episec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"episec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="evaluate a formula on a model file")
    c.add_argument("model")
    c.add_argument("formula")
    c.add_argument("--state", help="report truth at this state (exit status follows it)")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("secrecy", parents=[common], help="check f-, message or DY-secrecy")
    s.add_argument("kind", choices=["f", "message", "dy"])
    s.add_argument("input", help="model file (f) or protocol file (message, dy)")
    s.add_argument("--function", help="information function name (kind f)")
    s.add_argument("--oracle", action="store_true", help="also run the knowledge-based check")
    s.set_defaults(func=cmd_secrecy)

    d = sub.add_parser("dy", help="Dolev-Yao derivations and patterns")
    dsub = d.add_subparsers(dest="action", required=True)
    keyhelp = "declare a key family: NAME (asymmetric) or NAME:sym"
    dd = dsub.add_parser("derive", parents=[common])
    dd.add_argument("--key", action="append", default=[], help=keyhelp)
    dd.add_argument("--goal", required=True)
    dd.add_argument("messages", nargs="*")
    dp = dsub.add_parser("pattern", parents=[common])
    dp.add_argument("--key", action="append", default=[], help=keyhelp)
    dp.add_argument("messages", nargs="*")
    de = dsub.add_parser("equiv", parents=[common])
    de.add_argument("--key", action="append", default=[], help=keyhelp)
    de.add_argument("--left", nargs="*", default=[])
    de.add_argument("--right", nargs="*", default=[])
    d.set_defaults(func=cmd_dy)

    g = sub.add_parser("generate", parents=[common], help="dump a protocol's state space")
    g.add_argument("protocol")
    g.set_defaults(func=cmd_generate)

    x = sub.add_parser("crosscheck", parents=[common], help="randomized checker/oracle agreement")
    x.add_argument("suite", choices=sorted(crosscheck.SUITES))
    x.add_argument("--count", type=int, default=100)
    x.add_argument("--seed", type=int, default=DEFAULT_SEED)
    x.set_defaults(func=cmd_crosscheck)

    k = sub.add_parser("crypto", help="statistical indistinguishability lab (approximate)")
    ksub = k.add_subparsers(dest="action", required=True)
    for name in ("estimate", "indist", "theorem4"):
        kp = ksub.add_parser(name, parents=[common])
        if name != "estimate":
            kp.add_argument("states", help="states file {states:[{xs:{eta:hex}, zs:{eta:hex}}]}")
            kp.add_argument("--threshold", type=float, default=0.02)
        else:
            kp.add_argument("--x", help="plaintext x as hex (default all zeros)")
            kp.add_argument("--y", help="plaintext y as hex (default x with bit 0 flipped)")
            kp.add_argument("--z", help="auxiliary input as hex")
        kp.add_argument("--scheme", default="ideal")
        kp.add_argument("--eta", type=int, action="append")
        kp.add_argument("--samples", type=int, default=10_000)
        kp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        kp.add_argument("--distinguisher", action="append",
                        choices=sorted(cryptolab.DISTINGUISHERS))
    k.set_defaults(func=cmd_crypto)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ModelError, SpecError, MessageSyntaxError, logic.FormulaSyntaxError,
            cryptolab.CryptoError, BoundExceeded, OSError, ValueError) as e:
        print(f"episec: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
