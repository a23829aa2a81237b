import json
import subprocess
import sys

import pytest

from episec.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def test_check_murder(capsys):
    code, doc, _ = run(capsys, "check", "murder", "K g1", "--state", "w1")
    assert code == 0
    assert doc["command"] == "check" and doc["result"]["holds"] is True
    code, doc, _ = run(capsys, "check", "murder", "K g2", "--state", "w1")
    assert code == 1 and doc["result"]["holds"] is False


def test_check_validity_exit(capsys):
    code, doc, _ = run(capsys, "check", "fixtures/murder", "K g1 -> g1")
    assert code == 0 and doc["result"]["valid"]
    assert set(doc) == {"command", "tool_version", "seed", "result"}


@pytest.mark.parametrize("argv, expected", [
    (["secrecy", "f", "fullrelation", "--oracle"], 0),
    (["secrecy", "f", "identity", "--oracle"], 1),
    (["secrecy", "message", "symmetric-enc", "--oracle"], 0),
    (["secrecy", "message", "cleartext", "--oracle"], 1),
    (["secrecy", "dy", "cleartext", "--oracle"], 1),
    (["secrecy", "dy", "key-leak", "--oracle"], 1),
    (["secrecy", "dy", "symmetric-enc", "--oracle"], 0),
])
def test_secrecy_verdicts(capsys, argv, expected):
    code, doc, _ = run(capsys, *argv)
    assert code == expected
    res = doc["result"]
    assert res["holds"] == (expected == 0)
    assert res["oracle_agrees"] and res["witnesses_revalidated"]


def test_dy_derive(capsys):
    argv = ["dy", "derive", "--key", "k1", "--key", "k2", "--goal", "m",
            "{m}k1", "{inv(k1)}k2", "inv(k2)"]
    code, doc, _ = run(capsys, *argv)
    assert code == 0 and doc["result"]["proof"]["rule"] == "decrypt"
    code, doc, _ = run(capsys, *argv[:-1])
    assert code == 1 and doc["result"]["proof"] is None


def test_dy_pattern_and_equiv(capsys):
    code, doc, _ = run(capsys, "dy", "pattern", "--key", "k:sym", "{a}k")
    assert code == 0 and doc["result"]["pattern_state"] == ["<>"]
    _, doc, _ = run(capsys, "dy", "pattern", "--key", "k:sym", "{a}k", "k")
    assert doc["result"]["pattern_state"] == ["k", "{a}k"]
    code, _, _ = run(capsys, "dy", "equiv", "--key", "k:sym", "--left", "{a}k", "--right", "{b}k")
    assert code == 0
    code, _, _ = run(capsys, "dy", "equiv", "--key", "k:sym", "--left", "{a}k", "k", "--right", "{b}k", "k")
    assert code == 1


def test_generate_shape(capsys):
    code, doc, _ = run(capsys, "generate", "symmetric-enc")
    res = doc["result"]
    assert code == 0
    assert set(res) == {"states", "G", "kdy_classes", "kdy_pairs"}
    assert sorted(res["G"]) == ["a", "b"]
    assert sum(map(len, res["kdy_classes"])) == len(res["states"])


def test_crosscheck(capsys):
    code, doc, _ = run(capsys, "crosscheck", "thm1", "--count", "20", "--seed", "3")
    assert code == 0 and doc["seed"] == 3 and doc["result"]["mismatches"] == 0


def test_crypto_commands(capsys):
    code, doc, _ = run(capsys, "crypto", "estimate", "--scheme", "leaky-first-bit",
                       "--distinguisher", "first-bit", "--samples", "1000")
    assert code == 0 and doc["result"][0]["standard_adv"] == 1.0 and doc["result"][0]["approximate"]
    code, doc, _ = run(capsys, "crypto", "theorem4", "crypto-states", "--scheme", "leaky-first-bit",
                       "--samples", "1000")
    assert code == 1 and doc["result"]["approximate"]
    code, doc, _ = run(capsys, "crypto", "indist", "crypto-states", "--eta", "4", "--samples", "1000",
                       "--distinguisher", "first-bit")
    assert code == 0 and len(doc["result"]["related"]) == 6


@pytest.mark.parametrize("argv", [
    ["crosscheck", "thm1", "--count", "0"],
    ["check", "murder", "K ("],
    ["check", "no-such-model", "p"],
    ["check", "murder", "p", "--state", "nowhere"],
    ["secrecy", "f", "murder", "--function", "nope"],
    ["dy", "derive", "--goal", "{a}zz"],
    ["crypto", "estimate", "--scheme", "rot13"],
    ["crypto", "estimate", "--samples", "10"],
])
def test_errors_exit_2(capsys, argv):
    code, doc, err = run(capsys, *argv)
    assert code == 2 and doc is None and "error" in err


def test_out_file_and_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["secrecy", "dy", "key-leak", "--out", str(path)]) == 1
    assert a.read_bytes() == b.read_bytes()
    for path in (a, b):
        main(["crypto", "estimate", "--samples", "500", "--seed", "4", "--out", str(path)])
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "episec", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "episec" in proc.stdout
