import json
import os
import subprocess
import sys

import pytest

from hmf import io_json
from hmf.cli import main
from hmf.corpus import GOLDEN_BUILDERS, codim2_xa_yb, corpus_dir, load_golden
from hmf.factorization import validate_hmf
from hmf.io_json import SchemaError
from hmf.resolutions import build_finite


def test_ring_round_trip():
    ring = codim2_xa_yb().ring
    obj = io_json.ring_to_json(ring)
    ring2 = io_json.ring_from_json(obj)
    assert ring2.var_names == ring.var_names
    assert [str(f) for f in ring2.regseq] == [str(f) for f in ring.regseq]


def test_hmf_round_trip_bytes():
    F = codim2_xa_yb()
    obj = io_json.hmf_to_json(F)
    F2 = io_json.hmf_from_json(obj)
    assert io_json.dumps(io_json.hmf_to_json(F2)) == io_json.dumps(obj)
    assert validate_hmf(F2).ok


def test_complex_round_trip():
    F = codim2_xa_yb()
    L = build_finite(F).complex
    obj = io_json.complex_to_json(L, provenance="finite")
    L2 = io_json.complex_from_json(obj)
    assert L2.betti_list() == L.betti_list()
    assert not L2.validate()
    assert io_json.dumps(io_json.complex_to_json(L2)) == io_json.dumps(
        io_json.complex_to_json(L)
    )


def test_strong_ext_round_trip():
    from hmf.extract import strengthen
    from hmf.factorization import validate_strong

    S = strengthen(codim2_xa_yb())
    obj = io_json.hmf_to_json(S)
    assert obj["flags"]["strong"]
    S2 = io_json.hmf_from_json(obj)
    assert validate_strong(S2).ok


def test_schema_errors():
    with pytest.raises(SchemaError):
        io_json.hmf_from_json({"schema": 2, "kind": "hmf"})
    with pytest.raises(SchemaError):
        io_json.hmf_from_json({"schema": 1, "kind": "nope"})
    bad = io_json.hmf_to_json(codim2_xa_yb())
    bad["d_blocks"]["1->2"] = [["y"], ["x"]]
    with pytest.raises(SchemaError):
        io_json.hmf_from_json(bad)


def test_goldens_self_check():
    for name in GOLDEN_BUILDERS:
        F = load_golden(name)
        assert validate_hmf(F).ok, name


def test_tex_emitter():
    F = codim2_xa_yb()
    L = build_finite(F).complex
    tex = io_json.complex_to_tex(L)
    assert "\\xrightarrow" in tex and "pmatrix" in tex


def test_junit_emitter():
    from hmf.oracle import CheckItem

    rows = [CheckItem("a", 1, 1, "PASS"), CheckItem("b", 1, 2, "FAIL"),
            CheckItem("c", None, None, "N-A")]
    xml = io_json.report_rows_to_junit(rows)
    assert 'failures="1"' in xml and "skipped" in xml


def golden_path(name):
    return os.path.join(corpus_dir(), f"{name}.json")


def test_cli_validate_pass(tmp_path, capsys):
    rc = main(["validate", golden_path("codim2_xa_yb")])
    assert rc == 0
    out = capsys.readouterr().out
    payload = json.loads(out)
    assert payload["verdict"] == "PASS"


def test_cli_validate_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    rc = main(["validate", str(bad)])
    assert rc == 2
    # wrong kind: a complex file where a factorization is expected
    F = codim2_xa_yb()
    L = build_finite(F).complex
    cpath = tmp_path / "cx.json"
    cpath.write_text(io_json.dumps(io_json.complex_to_json(L)))
    assert main(["validate", str(cpath)]) == 2


def test_cli_resolve_r_betti_line(tmp_path, capsys):
    tex = tmp_path / "tower.tex"
    rc = main(["resolve-r", golden_path("codim2_xa_yb"), "--steps", "9",
               "--degree-bound", "8", "-o", os.devnull, "--tex", str(tex)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "betti: 3 4 5 6 7 8 9 10 11 12" in out
    assert "\\xrightarrow" in tex.read_text()


def test_cli_suite_strict_stability(tmp_path, capsys):
    rc = main(["suite", golden_path("codim2_xz_y2"), "--steps", "6",
               "--degree-bound", "6", "-o", str(tmp_path / "r.json")])
    assert rc == 0
    rc = main(["suite", golden_path("codim2_xz_y2"), "--steps", "6",
               "--degree-bound", "6", "--strict-stability",
               "-o", str(tmp_path / "r2.json")])
    assert rc == 1


def test_cli_gen_random_deterministic(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["gen-random", "--seed", "5", "--c", "2", "-o", str(a)]) == 0
    assert main(["gen-random", "--seed", "5", "--c", "2", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    F = io_json.load(str(a))
    assert validate_hmf(F).ok


def test_cli_extract_round_trip(tmp_path, capsys):
    rc = main(["extract", golden_path("micro_codim1"), "--steps", "6",
               "--trace", str(tmp_path / "extraction-trace.json"),
               "-o", str(tmp_path / "out.json")])
    assert rc == 0
    assert (tmp_path / "extraction-trace.json").exists()
    F = io_json.load(str(tmp_path / "out.json"))
    assert validate_hmf(F).ok


def test_cli_strengthen(tmp_path):
    rc = main(["strengthen", golden_path("codim2_xa_yb"),
               "-o", str(tmp_path / "s.json")])
    assert rc == 0
    payload = json.loads((tmp_path / "s.json").read_text())
    assert payload["strong_report"]["failures"] == []


def test_cli_box_and_peel(tmp_path):
    rc = main(["box", golden_path("codim2_xa_yb"), "--degree-bound", "8",
               "-o", str(tmp_path / "box.json")])
    assert rc == 0
    rc = main(["peel", golden_path("codim2_xa_yb"), "--steps", "6",
               "-o", str(tmp_path / "peel.json")])
    assert rc == 0


def test_cli_reports_byte_identical(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for out in (a, b):
        rc = main(["suite", golden_path("micro_codim1"), "--steps", "6",
                   "--degree-bound", "6", "-o", str(out)])
        assert rc == 0
    assert a.read_bytes() == b.read_bytes()


def test_cli_entry_point_subprocess():
    env = dict(os.environ)
    root = os.path.dirname(corpus_dir())
    env["PYTHONPATH"] = os.path.join(root, "src")
    proc = subprocess.run(
        [sys.executable, "-m", "hmf.cli", "validate", golden_path("codim2_xa_yb")],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode == 0
