import io
import json

import pytest

from gmeta.cli import run
from gmeta.corpus_gen import tail_casts

from conftest import corpus_file


def gm(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_run_value():
    code, out, _ = gm("run", str(corpus_file("quote_add")))
    assert (code, out) == (0, "code{ 4 + 3 }@eps\n")


def test_run_blame_reports_label_and_write_site():
    path = str(corpus_file("extrusion_gradual"))
    code, out, _ = gm("run", path)
    assert code == 1
    assert out.splitlines() == [f"blame L1 at {path}:2:1", f"raised at {path}:3:30"]


def test_static_check_rejects_extrusion_at_the_write():
    path = str(corpus_file("extrusion_static"))
    code, _, err = gm("check", "--static", path)
    assert code == 2
    assert f"{path}:3:30" in err


def test_gradual_check_accepts_extrusion():
    code, out, _ = gm("check", str(corpus_file("extrusion_gradual")))
    assert (code, out) == (0, "Code<Int>@?\n")


def test_static_run_of_static_program():
    code, out, _ = gm("run", "--static", str(corpus_file("wrap_body")))
    assert code == 0
    assert out == "code{ clam (u : Int) . clam (x : Int) . u + x }@eps\n"


def test_static_rejects_unknown_types():
    code, _, _ = gm("check", "--static", str(corpus_file("dyn_arith")))
    assert code == 2


@pytest.mark.parametrize("mode", ["naive", "space-efficient"])
def test_json_record(mode):
    code, out, _ = gm("run", "--json", "--mode", mode, str(corpus_file("extrusion_gradual")))
    rec = json.loads(out)
    assert code == 1
    assert rec["status"] == "blame" and rec["blame_label"] == "L1"
    assert rec["steps"] > 0 and rec["max_adjacent_casts"] >= 0
    assert ("max_hyper_height" in rec) == (mode == "space-efficient")


def test_json_value_record():
    _, out, _ = gm("run", "--json", str(corpus_file("dyn_arith")))
    rec = json.loads(out)
    assert rec["status"] == "value" and rec["rendered_value"] == "42"


def test_step_limit_exit_code(tmp_path):
    p = tmp_path / "loop.gm"
    p.write_text(tail_casts(30))
    code, out, _ = gm("run", "--json", "--step-limit", "10", str(p))
    assert code == 3 and json.loads(out)["status"] == "limit"


def test_parse_error_exit_code(tmp_path):
    p = tmp_path / "bad.gm"
    p.write_text("let x : Int = in x\n")
    code, _, err = gm("run", str(p))
    assert code == 4 and "parse error" in err


def test_missing_file_and_bad_usage():
    assert gm("run", "/nonexistent.gm")[0] == 4
    assert gm("frobnicate")[0] == 4
    assert gm("run", "--mode", "fast", "x.gm")[0] == 4


def test_check_steps_on_corpus():
    for name in ("wrap_body", "escape_via_function", "poly_dyn"):
        code, _, err = gm("run", "--check-steps", str(corpus_file(name)))
        assert code in (0, 1) and err == ""


def test_trace_and_emit_cc_go_to_stderr():
    code, out, err = gm("run", "--trace", "--emit-cc", str(corpus_file("lambda_splice")))
    assert code == 0 and out == "code{ clam (x : Int) . x }@eps\n"
    lines = err.splitlines()
    assert "clam-generate" in err and any("|D|=1" in ln for ln in lines)


def test_elab_prints_term_and_type():
    code, out, _ = gm("elab", str(corpus_file("dyn_arith")))
    assert code == 0 and out.splitlines()[-1] == ": Int"


def test_modes_agree_on_corpus():
    from conftest import CORPUS

    for p in sorted(CORPUS.glob("*.gm")):
        a = gm("run", "--json", str(p))
        b = gm("run", "--json", "--mode", "space-efficient", str(p))
        assert a[0] == b[0]
        if a[0] in (0, 1):
            ra, rb = json.loads(a[1]), json.loads(b[1])
            assert ra.get("rendered_value") == rb.get("rendered_value")
            assert ra.get("blame_label") == rb.get("blame_label")


def test_module_entry_point():
    import subprocess
    import sys

    p = subprocess.run([sys.executable, "-m", "gmeta.cli", "run", str(corpus_file("quote_add"))],
                       capture_output=True, text=True)
    assert (p.returncode, p.stdout) == (0, "code{ 4 + 3 }@eps\n")
