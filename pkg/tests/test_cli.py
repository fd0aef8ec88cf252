import io
import json

import pytest

from conftest import ANBNCN, FOO_BAR_BAZ
from sped.cli import main


def run(argv, stdin=None):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_bytes(text.encode() if isinstance(text, str) else text)
        return str(p)
    return write


def test_run_match_and_fail(files):
    g = files("fbb.peg", FOO_BAR_BAZ)
    code, out, _ = run(["run", g, files("in", "baz")])
    rec = json.loads(out)
    assert code == 0 and rec["verdict"] == "match" and rec["consumed_through"] == 3
    assert rec["input_length"] == 3 and rec["backend"] == "sped"
    code, out, _ = run(["run", g, files("in2", "bax")])
    assert code == 1 and "consumed_through" not in json.loads(out)


def test_run_anbncn_both_backends(files):
    g = files("abc.peg", ANBNCN)
    inp = files("in", "aabbcc")
    for backend in ("sped", "oracle"):
        code, out, _ = run(["run", g, inp, "--backend", backend])
        assert code == 0 and json.loads(out)["consumed_through"] == 6


def test_run_empty_input_fails_on_char(files):
    code, _, _ = run(["run", files("a.peg", "S <- 'a'"), files("empty", "")])
    assert code == 1


def test_run_trace_records(files):
    g = files("g.peg", "S <- 'a' 'b'")
    code, out, err = run(["run", g, files("in", "ab"), "--trace"])
    lines = [json.loads(x) for x in err.splitlines()]
    assert code == 0 and [r["step"] for r in lines] == [1, 2]
    assert lines[-1]["outcome"] == "match" and lines[0]["outcome"] is None
    assert json.loads(out)["peak_live_nodes"] >= 1


def test_run_errors(files, tmp_path):
    g = files("a.peg", "S <- 'a'")
    assert run(["run", str(tmp_path / "missing.peg"), g])[0] == 2
    assert run(["run", g, str(tmp_path / "missing.txt")])[0] == 2
    code, _, err = run(["run", files("lr.peg", "A <- A 'a' / 'a'"), g])
    assert code == 2 and "not well-formed" in err
    code, _, err = run(["run", files("bad.peg", "S <- 'a"), g])
    assert code == 2 and "bad.peg" in err
    assert run(["run", g, g, "--backend", "oracle", "--trace"])[0] == 2
    assert run(["nonsense"])[0] == 2


def test_check_text_and_json(files):
    code, out, _ = run(["check", files("lr.peg", "A <- A 'a' / 'a'")])
    assert code == 1 and "not well-formed" in out and "A → A" in out
    code, out, _ = run(["check", files("ok.peg", "S <- 'x' T\nT <- 'y'* ")])
    assert code == 0 and out.splitlines()[-1] == "well-formed"
    assert "T: lambda=1 nu=1" in out
    code, out, _ = run(["check", files("ok2.peg", "S <- 'x' / FAIL"), "--json"])
    recs = [json.loads(x) for x in out.splitlines()]
    assert recs[0] == {"rule": "S", "lambda": False, "nu": False}
    assert {"simplified": "S", "before": "('x' / FAIL)", "after": "'x'"} in recs
    assert recs[-1] == {"well_formed": True}


def test_simplify(files):
    code, out, _ = run(["simplify", files("r.peg", "S <- FAIL / 'y' ''")])
    assert code == 0 and out.splitlines()[-1] == "S <- 'y'"


def test_fuzz_command():
    code, out, _ = run(["fuzz", "--seed", "5", "--count", "200"])
    rec = json.loads(out.splitlines()[0])
    assert code == 0 and rec["summary"] == "200/200 agree" and rec["seed"] == 5
    code, out, _ = run(["fuzz", "--count", "0"])
    assert code == 0


def test_fuzz_mutant_prints_minimized_case():
    code, out, _ = run(["fuzz", "--seed", "42", "--mutant", "second-follower", "--stop-after", "1"])
    lines = [json.loads(x) for x in out.splitlines()]
    assert code == 1 and len(lines) == 2
    assert "grammar" in lines[1] and lines[1]["engine"] != lines[1]["oracle"]


def test_bench_with_figures(files, tmp_path):
    g = files("a.peg", "S <- ('a' / 'b')*")
    inp = files("in", "ab" * 500)
    code, out, _ = run(["bench", g, inp, "--backend", "sped", "--backend", "oracle",
                        "--repeat", "1", "--figures", str(tmp_path / "figs")])
    recs = [json.loads(x) for x in out.splitlines()]
    assert code == 0
    assert [r["backend"] for r in recs[:2]] == ["sped", "oracle"]
    assert all(r["consumed_through"] == 1000 for r in recs[:2])
    figs = [r["figure"] for r in recs[2:]]
    assert len(figs) == 2
    assert all(open(f, "rb").read(8) == b"\x89PNG\r\n\x1a\n" for f in figs)


def test_scale_small_sizes():
    code, out, _ = run(["scale", "--sizes", "2k,4k", "--factor", "100"])
    recs = [json.loads(x) for x in out.splitlines()]
    assert [r["input_length"] >= s for r, s in zip(recs, (2000, 4000))] == [True, True]
    assert recs[-1]["live_nodes_equal"] is True
    assert code == 0 and recs[-1]["ok"] is True


def test_gen_json(tmp_path):
    path = tmp_path / "x.json"
    assert run(["gen-json", "3k", "-o", str(path)])[0] == 0
    data = path.read_bytes()
    assert len(data) >= 3000
    json.loads(data)
