import io
import json

import jsonschema
import numpy as np
import pytest

from liegen import __version__
from liegen.cli import SCHEMAS, load_schema, run
from liegen.lie_core import loads
from liegen.constructors import build

STOCHASTIC = {"generate", "perturb", "pairs", "helly"}


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def _json_body(text, command):
    lines = text.splitlines()
    if command in STOCHASTIC:
        lines = lines[1:]
    return json.loads("\n".join(lines))


CASES = [
    ("build", "--algebra", "su:2"),
    ("report", "--algebra", "su_pq:2,1", "--roots"),
    ("vogan", "--algebra", "sl_real:3"),
    ("regularity", "--algebra", "su:3"),
    ("generate", "--algebra", "su:2", "--trials", "4", "--seed", "7"),
    ("perturb", "--algebra", "su:2", "--trials", "5", "--seed", "7"),
    ("pairs", "--group", "su2", "--trials", "2", "--seed", "7"),
    ("helly", "--algebra", "sum:su:2+su:2", "--samples", "3", "--seed", "7"),
    ("charindex", "--algebra", "sl_real:2"),
]


@pytest.mark.parametrize("argv", CASES, ids=[c[0] for c in CASES])
def test_json_output_validates(argv):
    code, out, _ = _run(*argv, "--format", "json")
    assert code == 0
    doc = _json_body(out, argv[0])
    jsonschema.validate(doc, load_schema(SCHEMAS[argv[0]]))


@pytest.mark.parametrize("argv", [c for c in CASES if c[0] in STOCHASTIC], ids=lambda c: c[0])
def test_seed_on_first_line(argv):
    code, out, _ = _run(*argv)
    assert code == 0
    assert out.splitlines()[0] == f"seed 7 (liegen {__version__})"


@pytest.mark.parametrize("cmd", sorted(STOCHASTIC))
def test_unseeded_stochastic_refused(cmd):
    argv = [cmd, "--group", "so3"] if cmd == "pairs" else [cmd, "--algebra", "su:2"]
    code, _, _ = _run(*argv)
    assert code == 2


@pytest.mark.parametrize("argv", [
    ("frobnicate",),
    ("build", "--algebra", "su:2", "--bogus"),
    ("build", "--algebra", "nope:1"),
    ("build", "--algebra", "su:6"),
    ("generate", "--algebra", "su:2", "--seed", "-1"),
    ("generate", "--algebra", "su:2", "--seed", "1", "--sigma", "0"),
    ("regularity", "--algebra", "su:3", "--element", "1,2,3"),
    ("regularity", "--algebra", "sl_real:2", "--element", "1,0,0"),
    ("perturb", "--algebra", "su:2", "--seed", "1", "--delta", "-1"),
])
def test_error_exit_codes(argv):
    code, _, err = _run(*argv)
    assert code == 2


def test_charindex_example():
    code, out, _ = _run("charindex", "--algebra", "sum:sl_real:2+sl_real:2")
    assert code == 0 and out.strip() == "4"


def test_emit_json_round_trips(tmp_path):
    code, out, _ = _run("build", "--algebra", "su:2", "--emit-json")
    assert code == 0
    L = loads(out)
    assert np.array_equal(L.constants, build("su:2").constants)
    jsonschema.validate(json.loads(out), load_schema("algebra"))
    path = tmp_path / "su2.json"
    assert _run("build", "--algebra", "su:2", "--out", str(path))[0] == 0
    assert np.array_equal(loads(path.read_text()).constants, L.constants)


def test_generate_files_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p, w in ((a, "1"), (b, "2")):
        code, _, _ = _run("generate", "--algebra", "su:2", "--trials", "30", "--seed", "7",
                          "--workers", w, "--json", str(p))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    jsonschema.validate(json.loads(a.read_text()), load_schema("genreport"))


def test_csv_projection():
    code, out, _ = _run("vogan", "--algebra", "su_pq:2,1", "--format", "csv")
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "key,value"
    assert "painted,[1]" in rows


def test_text_report_roots():
    code, out, _ = _run("report", "--algebra", "sl_real:3", "--roots")
    assert code == 0
    assert "roots: 6 (3 positive)" in out


def test_regularity_custom_element():
    code, out, _ = _run("regularity", "--algebra", "su:2", "--element", "0,0,0")
    assert code == 0 and out.strip() == "false"
