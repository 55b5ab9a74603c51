import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mwkit.cli import main
from mwkit.cli.config import evaluate, format_config, parse_config
from mwkit.cli.formats import format_report, parse_boxes, parse_certificate, parse_report
from mwkit.cli.render import decode_ppm, encode_ppm
from mwkit.errors import CertificateParse, ConfigError
from mwkit.systems import names, path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, json.loads(capsys.readouterr().out)


def sys_(name):
    return path(name)


def write_cfg(tmp_path, text, name="s.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


CONTRACTING_ONE = """
[vertices]
v | 0 | 1
[edges]
1 v v | 1 | 0
2 v v | 1/3 | 2/3
"""


def test_bundled_systems_listed():
    assert {"cantor", "tent", "sierpinski", "sierpinski_phi", "sierpinski_psi"} <= set(names())


def test_validate_cantor(capsys):
    code, rep = run(capsys, "validate", sys_("cantor"))
    assert code == 0 and rep["valid"]
    assert rep["c1"] == pytest.approx(1 / 3) and rep["c"] == pytest.approx(1 / 3)


def test_validate_rejects_non_contraction(capsys, tmp_path):
    code, rep = run(capsys, "validate", write_cfg(tmp_path, CONTRACTING_ONE))
    assert code == 2 and not rep["valid"]
    assert {"kind": "NotContraction", "subject": "1"} in rep["issues"]


def test_malformed_matrix_names_the_edge(capsys, tmp_path):
    bad = CONTRACTING_ONE.replace("1 v v | 1 | 0", "1 v v | 1/3 x | 0")
    code, rep = run(capsys, "validate", write_cfg(tmp_path, bad))
    assert code == 2
    assert "edge 1" in rep["error"] and "line 5" in rep["error"]


def test_parse_config_collects_every_error():
    text = "[bogus]\n[vertices]\nv | 0\n[edges]\n1 v v | a | 0\n"
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert [e.line for e in err.value.errors] == [1, 3, 5]


def test_config_round_trip():
    cfg = parse_config(sys_("sierpinski_phi").read_text())
    again = parse_config(format_config(cfg))
    assert np.allclose(again.edges[0][3], cfg.edges[0][3])
    assert again.vertices == cfg.vertices


def test_expression_evaluator():
    assert evaluate("3^-6") == pytest.approx(3.0 ** -6)
    assert evaluate("sqrt(3)/2") == pytest.approx(np.sqrt(3) / 2)
    with pytest.raises(ValueError):
        evaluate("__import__('os')")
    x = np.array([0.0, 1.0])
    assert evaluate("1 - x", {"x": x}).tolist() == [1.0, 0.0]


def test_attractor_cantor_boxes(capsys, tmp_path):
    out = tmp_path / "k.boxes"
    code, rep = run(capsys, "attractor", sys_("cantor"), "--out", out)
    assert code == 0 and rep["cells"] == {"v": 64}
    covers, h = parse_boxes(out.read_text())
    assert h == pytest.approx(3.0 ** -6)
    idx = sorted(covers["v"].indices[:, 0].tolist())
    assert idx[:4] == [0, 2, 6, 8] and len(idx) == 64


def test_attractor_tent_single_component(capsys):
    code, rep = run(capsys, "attractor", sys_("tent"))
    assert code == 0 and rep["cells"] == {"v": 1024}


def test_attractor_gasket_and_csv(capsys, tmp_path):
    csv = tmp_path / "pts.csv"
    code, rep = run(capsys, "attractor", sys_("sierpinski"), "--csv", csv, "--points", 50)
    assert code == 0 and rep["cells"] == {"v": 6561}
    lines = csv.read_text().splitlines()
    assert lines[0] == "vertex,x0,x1" and len(lines) == 51


def test_attractor_exhaustion_exit_code(capsys, tmp_path):
    out = tmp_path / "partial.boxes"
    code, rep = run(capsys, "attractor", sys_("sierpinski"), "--max-iterations", 2, "--out", out)
    assert code == 3 and rep["partial"]
    assert out.exists()


@pytest.mark.parametrize("k", [4, 6, 8])
def test_render_gasket_fraction(capsys, tmp_path, k):
    out = tmp_path / "g.ppm"
    code, rep = run(capsys, "render", sys_("sierpinski"), "--out", out,
                    "--width", 2 ** k, "--height", 2 ** k, "--resolution", f"2^-{k}")
    assert code == 0
    mask = decode_ppm(out.read_bytes())
    assert abs(mask.mean() / 0.75 ** k - 1) <= 0.1
    assert mask.sum() == rep["set_pixels"]


def test_render_cantor_middle_third_empty(capsys, tmp_path):
    out = tmp_path / "c.ppm"
    run(capsys, "render", sys_("cantor"), "--out", out, "--width", 729, "--height", 8)
    mask = decode_ppm(out.read_bytes())
    assert mask.shape == (8, 729)
    assert not mask[:, 243:486].any()
    assert mask[:, 0].all() and mask[:, -1].all()


def test_render_chaos_is_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
    for p in (a, b):
        run(capsys, "render", sys_("sierpinski_phi"), "--out", p, "--mode", "chaos",
            "--points", 5000, "--seed", 9)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().startswith(b"P6\n256 256\n255\n")


def test_ppm_round_trip():
    mask = np.random.default_rng(0).random((5, 7)) > 0.5
    assert np.array_equal(decode_ppm(encode_ppm(mask)), mask)


def test_classify(capsys):
    assert run(capsys, "classify", sys_("cantor"))[1]["verdict"] == "Disjoint"
    _, rep = run(capsys, "classify", sys_("tent"))
    assert rep["verdict"] == "Overlapping"
    assert rep["witness"][0] == pytest.approx(0.5, abs=2.0 ** -10)
    assert run(capsys, "classify", sys_("sierpinski"))[1]["verdict"] == "Overlapping"


def test_code_command(capsys):
    code, rep = run(capsys, "code", sys_("cantor"), "--prefix", "1", "--cycle", "2",
                    "--eps", "1e-9")
    assert code == 0
    assert rep["point"][0] == pytest.approx(1 / 3, abs=1e-9)
    assert rep["deviation"] <= 1e-9


def test_code_rejects_non_cycle(capsys):
    code, rep = run(capsys, "code", sys_("two_vertex"), "--cycle", "2")
    assert code == 2


def test_decide_and_verify_round_trip(capsys, tmp_path):
    cert = tmp_path / "c.cert"
    code, rep = run(capsys, "decide-iso", sys_("cantor"), sys_("cantor14"), "--out", cert)
    assert code == 0 and rep["verdict"] == "Isomorphic"
    assert cert.read_text().startswith("mwkit-certificate 1")
    code, rep = run(capsys, "verify-cert", sys_("cantor"), sys_("cantor14"), cert,
                    "--tol", "1e-3")
    assert code == 0 and rep["passed"]


def test_decide_refusal(capsys):
    code, rep = run(capsys, "decide-iso", sys_("cantor"), sys_("tent"))
    assert code == 1 and rep["verdict"] == "NotIsomorphic"
    assert rep["witness"]["point"][0] == pytest.approx(0.5, abs=1e-3)


def test_decide_unknown_with_table(capsys):
    code, rep = run(capsys, "decide-iso", sys_("sierpinski_phi"), sys_("sierpinski_psi"))
    assert code == 1 and rep["verdict"] == "Unknown"
    assert len(rep["identity_refutation"]) == 6
    assert rep["min_identity_residual"] >= 0.05


def test_decide_graph_mismatch(capsys):
    code, rep = run(capsys, "decide-iso", sys_("cantor"), sys_("sierpinski"))
    assert code == 2 and rep["kind"] == "GraphMismatch"


FLIP_CERT = """mwkit-certificate 1
edges 1 2
map affine
matrix -1.0
offset 1.0
vertex_map v=v
sets 1
set all
sigma {sigma}
"""


@pytest.mark.parametrize("sigma,expected", [("2 1", 0), ("1 2", 1)])
def test_verify_flip_certificate(capsys, tmp_path, sigma, expected):
    cert = tmp_path / "flip.cert"
    cert.write_text(FLIP_CERT.format(sigma=sigma))
    code, rep = run(capsys, "verify-cert", sys_("cantor"), sys_("cantor"), cert)
    assert code == expected
    assert rep["passed"] == (expected == 0)
    assert rep["overlapping_sets"] == []


def test_verify_reports_non_partition_cover(capsys, tmp_path):
    cert = tmp_path / "twice.cert"
    cert.write_text(FLIP_CERT.format(sigma="2 1").replace("sets 1", "sets 2")
                    + "set all\nsigma 2 1\n")
    code, rep = run(capsys, "verify-cert", sys_("cantor"), sys_("cantor"), cert)
    assert code == 0 and rep["overlapping_sets"] == [[0, 1]]


def test_verify_flags_cover_gap(capsys, tmp_path):
    cert = tmp_path / "gap.cert"
    cert.write_text(FLIP_CERT.format(sigma="2 1").replace(
        "set all", "set cells").replace("sigma 2 1\n", "sigma 2 1\ngrid v | 0.5 | 0.0 | 2\n"
                                       "cells v | 0\n"))
    code, rep = run(capsys, "verify-cert", sys_("cantor"), sys_("cantor"), cert)
    assert code == 1 and rep["cover_gap"]


def test_certificate_parse_errors(cantor, invariant):
    K = invariant("cantor")
    with pytest.raises(CertificateParse) as err:
        parse_certificate(FLIP_CERT.format(sigma="2 1").replace("map affine", "map spline"),
                          cantor, cantor, K, K)
    assert err.value.line == 3
    with pytest.raises(CertificateParse):
        parse_certificate(FLIP_CERT.format(sigma="2 2"), cantor, cantor, K, K)


def test_bad_certificate_is_input_error(capsys, tmp_path):
    cert = tmp_path / "bad.cert"
    cert.write_text("not a certificate\n")
    code, rep = run(capsys, "verify-cert", sys_("cantor"), sys_("cantor"), cert)
    assert code == 2 and rep["kind"] == "CertificateParse"


@pytest.mark.parametrize("n0", [1, 2])
def test_witness_command(capsys, n0):
    code, rep = run(capsys, "witness", sys_("cantor"), "--n0", n0, "--eps", 0.1)
    assert code == 0 and rep["passed"]
    assert rep["sup_xax"] >= 0.9 and rep["max_twisted"] == 0.0


def test_witness_with_expression(capsys):
    code, rep = run(capsys, "witness", sys_("sierpinski_phi"), "--a0", "x*y", "--n0", 2)
    assert code == 0 and rep["passed"]


def test_witness_from_sample_file(capsys, tmp_path):
    values = tmp_path / "a0.txt"
    values.write_text("\n".join(["1"] + ["0"] * 63))
    code, rep = run(capsys, "witness", sys_("cantor"), "--a0", f"@{values}")
    assert code == 1 and rep["kind"] == "NoQualifyingCenter"


def test_report_file_and_digest(capsys, tmp_path):
    out = tmp_path / "r.report"
    _, rep = run(capsys, "classify", sys_("cantor"), "--report", out)
    saved = parse_report(out.read_text())
    assert saved == rep
    _, again = run(capsys, "classify", sys_("cantor"))
    assert again["inputs"] == rep["inputs"] and len(rep["inputs"]) == 64


def test_missing_file_is_input_error(capsys, tmp_path):
    code, rep = run(capsys, "validate", tmp_path / "nope.cfg")
    assert code == 2


json_values = st.recursive(
    st.none() | st.booleans() | st.integers() | st.floats(allow_nan=False, allow_infinity=False)
    | st.text(), lambda kids: st.lists(kids) | st.dictionaries(st.text(), kids), max_leaves=20)


@given(st.dictionaries(st.text(), json_values))
def test_report_round_trip(report):
    text = format_report(report)
    assert parse_report(text) == report
    assert format_report(parse_report(text)) == text
