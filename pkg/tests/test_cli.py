import json

import pytest

from curvlab import pseudosym as ps
from curvlab.catalog import builtin, golden_path
from curvlab.cli import (
    DERIVED_NAMES,
    TENSOR_NAMES,
    DSLError,
    GoldenFormatError,
    ReportDocument,
    check_identity_text,
    compare_golden,
    compute_tensor,
    main,
    parse_golden,
)
from curvlab.exprcore import parse


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# -- compute ------------------------------------------------------------------------

def test_compute_ricci_godel(capsys):
    code, out, _ = run(capsys, "compute", "--metric", "godel", "--tensor", "ricci")
    assert code == 0
    assert out.splitlines() == ["S[2][2] = exp(2*x1)", "S[2][4] = exp(x1)", "S[4][4] = 1"]


def test_compute_flat(capsys):
    code, out, _ = run(capsys, "compute", "--metric", "minkowski", "--tensor", "riemann")
    assert code == 0 and out.strip() == "(all components zero)"


def test_compute_scalar(capsys):
    _code, out, _ = run(capsys, "compute", "--metric", "godel", "--tensor", "scalar")
    assert out.strip() == "kappa = 1/a^2"


def test_compute_CC_lists_the_17_base_components(capsys):
    code, out, _ = run(capsys, "compute", "--metric", "godel", "--tensor", "CC")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 17
    assert "CC[1][2][2][4][1][2] = 1/24*a^2*exp(3*x1)" in lines


@pytest.mark.parametrize("metric,tensor", [
    ("godel", "gamma"), ("godel", "weyl"), ("godel", "nabla_ricci"), ("godel", "QgC"), ("godel", "conhR"),
    ("som_raychaudhuri", "riemann"), ("ex21ii", "RR"), ("const_curv", "concircular"),
])
def test_compute_output_parses_back(capsys, metric, tensor):
    code, out, _ = run(capsys, "compute", "--metric", metric, "--tensor", tensor)
    assert code == 0
    value = compute_tensor(builtin(metric).metric, tensor)
    if value.is_zero():
        assert out.strip() == "(all components zero)"
        return
    for line in out.splitlines():
        lhs, rhs = line.split(" = ")
        idx = tuple(int(k) - 1 for k in lhs[lhs.index("["):].strip("[]").split("]["))
        assert parse(rhs) == value[idx]


def test_compute_json(capsys):
    _code, out, _ = run(capsys, "compute", "--metric", "godel", "--tensor", "ricci", "--format", "json")
    doc = json.loads(out)
    assert doc["label"] == "S"
    assert doc["components"][0] == {"index": [2, 2], "value": "exp(2*x1)"}


def test_compute_errors(capsys, tmp_path):
    code, _, err = run(capsys, "compute", "--metric", "godel", "--tensor", "bogus")
    assert code == 2 and "unknown tensor" in err
    bad = tmp_path / "bad.metric"
    bad.write_text("name: bad\ncoords: x y\ng 1 1: 1 +\n")
    code, _, err = run(capsys, "compute", "--metric", str(bad), "--tensor", "ricci")
    assert code == 3 and "line 3" in err
    code, _, err = run(capsys, "compute", "--metric", str(tmp_path / "nope"), "--tensor", "ricci")
    assert code == 3


def test_compute_from_metric_file(capsys, tmp_path):
    p = tmp_path / "sphere.metric"
    p.write_text("name: s2\ncoords: th ph\ng 1 1: 1\ng 2 2: x\n".replace("x", "th^2"))
    code, out, _ = run(capsys, "compute", "--metric", str(p), "--tensor", "riemann")
    assert code == 0 and out.strip() == "(all components zero)"


def test_tensor_registry():
    assert len(set(TENSOR_NAMES)) == len(TENSOR_NAMES)
    for n in ("RR", "CC", "RS", "RC", "CR", "QgR", "QSR", "QgC", "QSC", "QgS", "QSK", "QgK"):
        assert n in DERIVED_NAMES


# -- classify ----------------------------------------------------------------------------

def test_classify_text_is_deterministic(capsys):
    _, a, _ = run(capsys, "classify", "--metric", "ex21i")
    _, b, _ = run(capsys, "classify", "--metric", "ex21i")
    assert a == b
    assert "pseudosymmetric" in a


def test_classify_json_schema_and_round_trip(capsys):
    code, out, _ = run(capsys, "classify", "--metric", "godel", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert list(doc["conditions"]) == list(ps.CONDITION_IDS)
    assert doc["conditions"]["weyl_pseudosymmetric"]["factor"] == "1/(6*a^2)"
    assert doc["conditions"]["codazzi"]["witness"]["index"] == [1, 2, 2]
    assert doc["conditions"]["quasi_einstein"]["data"]["omega"] == ["0", "a*exp(x1)", "0", "a"]
    assert doc["invariants"]["kappa"] == "1/a^2"
    assert doc["seed"] == 42 and len(doc["points"]) == 5
    rd = ReportDocument.from_json(out)
    assert ReportDocument.from_json(rd.to_json()) == rd
    assert rd.to_json() == out.rstrip("\n")


def test_report_document_round_trip_all_metrics():
    for name in ("minkowski", "ex21ii", "const_curv"):
        rd = ReportDocument.from_report(ps.classify(builtin(name).metric))
        assert ReportDocument.from_json(rd.to_json()) == rd


def test_classify_minkowski_all_hold(capsys):
    _, out, _ = run(capsys, "classify", "--metric", "minkowski", "--format", "json")
    conds = json.loads(out)["conditions"]
    assert all(conds[c]["verdict"] == "holds" for c in ps.CONDITION_IDS[:19])


def test_classify_rejects_few_points(capsys):
    code, _, _ = run(capsys, "classify", "--metric", "godel", "--points", "2")
    assert code == 2


def test_classify_seed_changes_points(capsys):
    _, a, _ = run(capsys, "classify", "--metric", "ex21i", "--format", "json", "--seed", "1")
    _, b, _ = run(capsys, "classify", "--metric", "ex21i", "--format", "json", "--seed", "2")
    assert json.loads(a)["points"] != json.loads(b)["points"]


# -- check --------------------------------------------------------------------------------

@pytest.mark.parametrize("identity", [
    "R.R = Q(S,R)",
    "C.C = (kappa/6) * Q(g,C)",
    "C.C = kappa/6 * Q(g,C)",
    "6*a^2 * C.C = Q(g,C)",
    "conh.conh = 0",
    "G = 1/2 * g~g",
    "kappa = 1/a^2",
    "S~S = 0",
    "R.R - Q(S,R) = 0",
])
def test_check_holds(capsys, identity):
    code, out, _ = run(capsys, "check", "--metric", "godel", identity)
    assert code == 0 and out.startswith("holds")


def test_check_fails_with_witness(capsys):
    code, out, _ = run(capsys, "check", "--metric", "godel", "R.R = 0")
    assert code == 1
    assert out.startswith("fails")
    # lexicographically first nonzero component of R.R
    assert "[1][2][1][2][2][4]" in out


@pytest.mark.parametrize("identity", ["R.R =", "R.R == Q(S,R)", "Q(S R) = 0", "R.R = Q(S,R) extra", "R $ R = 0"])
def test_check_syntax_errors(capsys, identity):
    code, _, err = run(capsys, "check", "--metric", "godel", identity)
    assert code == 2 and "identity" in err


@pytest.mark.parametrize("identity", ["R * R = 0", "R = 1", "S.R = 0", "Q(R,R) = 0", "zeta = 0", "R + S = 0"])
def test_check_semantic_errors(identity):
    g = builtin("godel").metric
    with pytest.raises(DSLError):
        check_identity_text(g, identity)


def test_check_on_example_metric():
    g = builtin("ex21i").metric
    assert check_identity_text(g, "R.R = 1/(4*eps*x1^2) * Q(g,R)").verdict == ps.HOLDS
    assert check_identity_text(g, "C = 0").verdict == ps.HOLDS


def test_check_dimension_guard():
    from curvlab.catalog import godel_base
    with pytest.raises(DSLError):
        check_identity_text(godel_base(), "C = 0")


# -- table ----------------------------------------------------------------------------------

def test_table_all_shipped_goldens_pass(capsys):
    code, out, _ = run(capsys, "table", "--metric", "godel")
    assert code == 0
    assert len(out.splitlines()) == len(builtin("godel").goldens)
    assert all(": ok" in line for line in out.splitlines())


@pytest.mark.parametrize("name", ["godel_riemann.txt", "godel_QgC.txt", "godel_CC.txt"])
def test_table_single_golden(capsys, name):
    code, _out, _ = run(capsys, "table", "--metric", "godel", "--golden", str(golden_path(name)))
    assert code == 0


def test_table_mutation_gives_one_diff(capsys, tmp_path):
    text = golden_path("godel_riemann.txt").read_text()
    bad = tmp_path / "mut.txt"
    bad.write_text(text.replace("R[1][2][1][2] = 3/4*a^2*exp(2*x1)", "R[1][2][1][2] = a^2*exp(2*x1)"))
    code, out, _ = run(capsys, "table", "--metric", "godel", "--golden", str(bad))
    assert code == 1
    assert "1 diff(s)" in out
    assert sum(1 for line in out.splitlines() if line.startswith("  ")) == 1


def test_table_closure_catches_missing_entry(capsys, tmp_path):
    text = golden_path("godel_ricci.txt").read_text()
    bad = tmp_path / "short.txt"
    bad.write_text("\n".join(line for line in text.splitlines() if "S[4][4]" not in line))
    code, out, _ = run(capsys, "table", "--metric", "godel", "--golden", str(bad))
    assert code == 1 and "S[4][4]: expected 0" in out
    bad.write_text("\n".join(line for line in text.splitlines() if "S[4][4]" not in line and "closure" not in line))
    code, _, _ = run(capsys, "table", "--metric", "godel", "--golden", str(bad))
    assert code == 0


def test_table_symmetry_images_are_derived(capsys, tmp_path):
    p = tmp_path / "img.txt"
    p.write_text("closure: zero\nS[2][2] = exp(2*x1)\nS[4][2] = exp(x1)\nS[4][4] = 1\n")
    code, _, _ = run(capsys, "table", "--metric", "godel", "--golden", str(p))
    assert code == 0


@pytest.mark.parametrize("text", [
    "closure: sometimes\nS[1][1] = 1\n",
    "S[1][1] = 1 +\n",
    "S[0][1] = 1\n",
    "S[1][1] = 1\nR[1][2][1][2] = 1\n",
    "tensor: nonsense\nS[1][1] = 1\n",
    "garbage\n",
    "",
])
def test_golden_format_errors(text):
    with pytest.raises(GoldenFormatError):
        parse_golden(text)


def test_golden_format_errors_exit_3(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("S[9][9] = 1\n")
    code, _, _err = run(capsys, "table", "--metric", "godel", "--golden", str(p))
    assert code == 3
    p.write_text("S[1][1] = (\n")
    code, _, _ = run(capsys, "table", "--metric", "godel", "--golden", str(p))
    assert code == 3
    code, _, _ = run(capsys, "table", "--metric", "godel", "--golden", str(tmp_path / "none.txt"))
    assert code == 3


def test_compare_golden_scalar():
    g = builtin("godel").metric
    assert compare_golden(g, parse_golden("kappa = 1/a^2\n")) == []
    assert len(compare_golden(g, parse_golden("kappa = a^2\n"))) == 1


def test_table_without_shipped_goldens(capsys):
    code, _, _ = run(capsys, "table", "--metric", "minkowski")
    assert code == 2


# -- list ------------------------------------------------------------------------------------------

def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    for word in ("godel", "som_raychaudhuri", "nabla_riemann", "QgC", "family_viii"):
        assert word in out
