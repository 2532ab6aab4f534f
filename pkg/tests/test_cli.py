from __future__ import annotations

import io
import os
import random
import shutil
import subprocess
import sys
import tempfile

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA
from pvn.cli import main

FIG1 = str(DATA / "fig1.pvn")
REASSIGN = str(DATA / "reassign.pvn")


def run(*argv, stdin: str = ""):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), io.StringIO(stdin), out, err)
    return code, out.getvalue(), err.getvalue()


def test_check():
    code, out, _ = run("check", FIG1)
    assert code == 0
    assert out == "ok: 4 groups, 7 members, 7 assignments\n"


def test_check_cycle(tmp_path):
    f = tmp_path / "cycle.pvn"
    f.write_text("group A;\ngroup B < A;\nlink A < B;\n")
    code, _, err = run("check", str(f))
    assert code == 1
    assert "A" in err and "B" in err and "3:1" in err


def test_check_missing_file(tmp_path):
    assert run("check", str(tmp_path / "nope.pvn"))[0] == 3


def test_check_syntax_error(tmp_path):
    f = tmp_path / "bad.pvn"
    f.write_text("group A\n")
    code, _, err = run("check", str(f))
    assert code == 2 and "expected" in err


def test_check_bad_encoding(tmp_path):
    f = tmp_path / "bin.pvn"
    f.write_bytes(b"\xff\xfe\x00group")
    assert run("check", str(f))[0] == 3


def test_eval_can():
    code, out, _ = run("eval", FIG1, "-e", "can JJ see Nina:/Everything/PersonalInfo/Phone;")
    assert (code, out) == (0, "VISIBLE\n")
    assert run("eval", FIG1, "-e", "can Sue see Nina:/Everything/Blog;")[1] == "INVISIBLE\n"


def test_eval_can_machine():
    code, out, _ = run("--machine", "eval", FIG1, "-e", "can Sue see Nina:/Everything/PersonalInfo/NinaPhoto;")
    assert code == 0
    assert out == (
        "query=can viewer=Sue owner=Nina path=/Everything/PersonalInfo/NinaPhoto verdict=visible"
        " winner_subject=all winner_content=/Everything/PersonalInfo/NinaPhoto protocol=optimistic\n"
    )
    assert run("eval", FIG1, "--machine", "-e", "can Sue see Nina:/Everything/PersonalInfo/NinaPhoto;")[1] == out


def test_eval_show():
    assert run("eval", FIG1, "-e", "show Prema for Nina;")[1] == "(none)\n"
    assert run("eval", FIG1, "-e", "show Bob for Nina;")[1] == (
        "/Everything/Blog\n/Everything/PersonalInfo/NinaPhoto\n/Everything/PistonPhotos\n"
    )
    assert run("--machine", "eval", FIG1, "-e", "show Prema for Nina;")[1] == ""


def test_eval_audience():
    out = run("eval", FIG1, "-e", "audience Nina:/Everything/PersonalInfo/Phone;")[1]
    assert out.split() == ["Alex", "JJ", "Nina", "Taylor"]


def test_eval_explain():
    code, out, _ = run("eval", FIG1, "-e", "explain JJ see Nina:/Everything/PersonalInfo/Phone;")
    assert code == 0
    assert "UMichStudents" in out and "Michiganders" in out
    assert "combination: conflict-optimistic" in out
    assert out.rstrip().endswith("VISIBLE")
    code, out, _ = run("--machine", "eval", FIG1, "-e", "explain JJ see Nina:/Everything/PersonalInfo/Phone;")
    lines = out.splitlines()
    assert all(line.startswith("query=explain") for line in lines)
    assert lines[-1].split()[-1] == "rule=conflict-optimistic"


def test_eval_unknown_name():
    code, _, err = run("eval", FIG1, "-e", "can Zoe see Nina:/Everything;")
    assert code == 1 and "Zoe" in err


def test_eval_query_syntax_error():
    assert run("eval", FIG1, "-e", "can JJ see Nina:/Everything")[0] == 2


def test_eval_whatif_inline():
    out = run("eval", FIG1, "-e", "whatif { leave Bob PistonFans; } diff Nina;")[1]
    assert "Bob" in out and "visible→invisible" in out


def test_diff_reassignment():
    code, out, _ = run("diff", FIG1, "--mutations", REASSIGN, "--owner", "Nina")
    assert code == 0
    rows = [line.split() for line in out.splitlines()]
    viewers = {r[0] for r in rows}
    assert {"Bob", "Mike", "Taylor"} <= viewers and "Sue" not in viewers
    assert ["Bob", "/Everything/Blog", "visible→invisible"] in rows
    assert ["Mike", "/Everything/PersonalInfo/NinaPhoto", "absent→visible"] in rows
    assert rows == sorted(rows)


def test_diff_machine_is_stable():
    a = run("--machine", "diff", FIG1, "--mutations", REASSIGN, "--owner", "Nina")[1]
    b = run("--machine", "diff", FIG1, "--mutations", REASSIGN, "--owner", "Nina")[1]
    assert a == b
    assert "query=diff owner=Nina viewer=Bob path=/Everything/Blog old=visible new=invisible" in a.splitlines()


def test_diff_empty_and_unknown_owner():
    assert run("diff", FIG1, "-e", "", "--owner", "Nina")[:2] == (0, "no changes\n")
    assert run("diff", FIG1, "-e", "", "--owner", "Zoe")[0] == 1


def test_diff_rejects_non_mutations():
    assert run("diff", FIG1, "-e", "show Bob for Nina;", "--owner", "Nina")[0] == 1


def test_diff_commit(tmp_path):
    out_file = tmp_path / "after.pvn"
    assert run("diff", FIG1, "--mutations", REASSIGN, "--owner", "Nina", "--commit", str(out_file))[0] == 0
    assert "group Yankees;" in out_file.read_text()
    assert run("eval", str(out_file), "-e", "show Mike for Nina;")[1] == "/Everything/PersonalInfo/NinaPhoto\n"
    assert run("diff", str(out_file), "--mutations", REASSIGN, "--owner", "Nina")[0] == 1


def test_repl_watch_and_move(tmp_path):
    script = "watch Nina\ncreate group Yankees;\nmove Bob to Yankees\ncan Bob see Nina:/Everything/Blog;\nquit\n"
    code, out, err = run("repl", FIG1, stdin=script)
    assert code == 0 and err == ""
    lines = out.splitlines()
    assert lines[0] == "watching Nina"
    assert any(line.startswith("Bob") and "/Everything/Blog" in line for line in lines)
    assert any(line.startswith("Bob") and "/Everything/PistonPhotos" in line for line in lines)
    assert lines[-1] == "INVISIBLE"


def test_repl_recovers_from_errors():
    code, out, err = run("repl", FIG1, stdin="can JJ see ;\nfrobnicate;\ncan JJ see Nina:/Everything;\n")
    assert code == 0
    assert len(err.splitlines()) == 2
    assert out == "VISIBLE\n"


def test_repl_multiline_statement():
    out = run("repl", FIG1, stdin="can JJ see\n  Nina:/Everything;\n")[1]
    assert out == "VISIBLE\n"


def test_repl_save_round_trip(tmp_path):
    saved = tmp_path / "s.pvn"
    script = f"create group Yankees;\njoin Sue Yankees;\nsave {saved}\nquit\n"
    assert run("repl", FIG1, stdin=script)[0] == 0
    queries = "".join(f"show {m} for Nina; " for m in ("Sue", "Bob", "JJ", "Taylor", "Prema"))
    assert run("eval", str(saved), "-e", queries)[1] == run("eval", FIG1, "-e", queries)[1]


def test_golden_outputs_stable():
    cmds = [
        ("check", FIG1),
        ("eval", FIG1, "-e", "explain Taylor see Nina:/Everything/PersonalInfo/Phone;"),
        ("--machine", "eval", FIG1, "-e", "audience Nina:/Everything/Blog;"),
        ("diff", FIG1, "--mutations", REASSIGN, "--owner", "Nina"),
    ]
    for c in cmds:
        assert run(*c) == run(*c)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.text(alphabet="{};:/<[], \nabNina", max_size=6))
def test_exit_codes_for_malformed_input(seed, junk):
    text = (DATA / "fig1.pvn").read_text()
    cut = random.Random(seed).randrange(len(text) + 1)
    with tempfile.NamedTemporaryFile("w", suffix=".pvn", delete=False) as f:
        f.write(text[:cut] + junk + text[cut:])
    try:
        code, out, err = run("check", f.name)
    finally:
        os.unlink(f.name)
    assert code in (0, 1, 2)
    assert (code == 0) == (err == "")
    if code == 2:
        assert "syntax error" in err


@pytest.mark.skipif(shutil.which("pvn") is None, reason="console script not installed")
def test_console_script():
    p = subprocess.run(["pvn", "check", FIG1], capture_output=True, text=True)
    assert (p.returncode, p.stdout) == (0, "ok: 4 groups, 7 members, 7 assignments\n")


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "pvn", "eval", FIG1, "-e", "show Sue for Nina;"], capture_output=True, text=True)
    assert p.returncode == 0 and p.stdout == "/Everything/PersonalInfo/NinaPhoto\n"
