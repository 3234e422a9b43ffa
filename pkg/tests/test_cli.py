import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from nokbody.cli import SeriesDocument, main, parse_document, run, to_csv, to_json
from nokbody.errors import DocumentError
from nokbody.series import GradedLinearSeries

SIMPLEX_DOC = {"type": "toric", "d": 2, "polytope": [[0, 0], [1, 0], [0, 1]]}
INDEX2_DOC = {"type": "generated", "d": 1, "generators": [
    {"degree": 2, "poly": {"0": "1"}}, {"degree": 2, "poly": {"1": "1"}}, {"degree": 2, "poly": {"2": "1"}}]}
BODY_DOC = {"type": "semigroup", "d": 1, "generators": [[0, 1], [2, 1]]}
ZERO_DOC = {"type": "explicit", "d": 1, "bases": {}, "max_degree": 4}


def parse(obj):
    return parse_document(json.dumps(obj))


def write(tmp_path, obj, name="doc.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_parse_examples():
    L = parse(SIMPLEX_DOC).build()
    assert isinstance(L, GradedLinearSeries) and L.mode == "toric" and L.dim(2) == 6
    L = parse(INDEX2_DOC).build()
    assert L.index(10) == 2 and L.kappa(6) == 1


@pytest.mark.parametrize("coeff,code", [("1.5", "BAD_RATIONAL"), ("1/0", "BAD_RATIONAL"), (1.5, "SCHEMA_ERROR"),
                                        ("abc", "BAD_RATIONAL"), ("-3/4", None), (7, None)])
def test_rational_coefficients(coeff, code):
    doc = {"type": "generated", "d": 1, "generators": [{"degree": 1, "poly": {"0": coeff}}]}
    if code is None:
        parse(doc)
        return
    with pytest.raises(DocumentError) as e:
        parse(doc)
    assert e.value.code == code
    assert e.value.pointer.startswith("/generators/0/poly")


@pytest.mark.parametrize("key", ["1,2", "-1", "a", "1;2", ""])
def test_bad_exponent(key):
    doc = {"type": "generated", "d": 1, "generators": [{"degree": 1, "poly": {key: "1"}}]}
    with pytest.raises(DocumentError) as e:
        parse(doc)
    assert e.value.code == "BAD_EXPONENT"


@pytest.mark.parametrize("doc,pointer", [
    ({"type": "toric", "d": 2}, ""),
    ({"type": "toric", "d": 2, "polytope": [[0, 0], [1]]}, "/polytope/1"),
    ({"type": "toric", "d": 0, "polytope": [[0]]}, "/d"),
    ({"type": "nonsense"}, "/type"),
    ({"type": "generated", "d": 1, "generators": [{"degree": 0, "poly": {}}]}, "/generators/0/degree"),
    ({"schema_version": "2", **SIMPLEX_DOC}, "/schema_version"),
    ({"type": "multicomponent", "component_dims": [1], "components": [SIMPLEX_DOC]}, "/components/0/d"),
])
def test_schema_errors_carry_pointer(doc, pointer):
    with pytest.raises(DocumentError) as e:
        parse(doc)
    assert e.value.code == "SCHEMA_ERROR"
    assert e.value.pointer == pointer


def test_invalid_json():
    with pytest.raises(DocumentError) as e:
        parse_document("{not json")
    assert e.value.code == "SCHEMA_ERROR"


rationals = st.fractions(min_value=-9, max_value=9, max_denominator=6).filter(bool)


def poly_objs(d):
    keys = st.tuples(*[st.integers(0, 3)] * d).map(lambda t: ",".join(map(str, t)))
    return st.dictionaries(keys, rationals.map(str), max_size=3)


generated_docs = st.integers(1, 3).flatmap(lambda d: st.fixed_dictionaries({
    "type": st.just("generated"), "d": st.just(d),
    "generators": st.lists(st.fixed_dictionaries({"degree": st.integers(1, 3), "poly": poly_objs(d)}), max_size=3),
}))
toric_docs = st.integers(1, 3).flatmap(lambda d: st.fixed_dictionaries({
    "type": st.just("toric"), "d": st.just(d),
    "polytope": st.lists(st.lists(st.integers(-2, 2), min_size=d, max_size=d), min_size=1, max_size=4),
}))
explicit_docs = st.fixed_dictionaries({
    "type": st.just("explicit"), "d": st.just(2),
    "bases": st.dictionaries(st.integers(1, 3).map(str), st.lists(poly_objs(2), max_size=2), max_size=3),
    "max_degree": st.just(3),
})
semigroup_docs = st.fixed_dictionaries({
    "type": st.just("semigroup"), "d": st.just(1),
    "generators": st.lists(st.tuples(st.integers(-3, 3), st.integers(1, 3)).map(list), min_size=1, max_size=3),
})
options = st.fixed_dictionaries({}, optional={"max_degree": st.integers(1, 30), "p": st.lists(st.integers(1, 4), min_size=1, max_size=3),
                                              "tolerance": rationals.map(str)})


@settings(max_examples=150, deadline=None)
@given(st.one_of(generated_docs, toric_docs, explicit_docs, semigroup_docs), options)
def test_round_trip(doc, opts):
    if opts:
        doc = {**doc, "options": opts}
    parsed = parse(doc)
    again = parse_document(json.dumps(parsed.to_json()))
    assert again == parsed
    assert isinstance(again, SeriesDocument)


def test_round_trip_multicomponent():
    doc = {"type": "multicomponent", "component_dims": [1, 1], "max_degree": 6,
           "generators": [{"degree": 2, "polys": [{"0": "1"}, {}]}, {"degree": 3, "polys": [{}, {"1": "2/3"}]}]}
    parsed = parse(doc)
    assert parse_document(json.dumps(parsed.to_json())) == parsed


def test_limit_simplex_report():
    report = run("limit", parse(SIMPLEX_DOC), {"max_degree": 60})
    last = report["rows"][-1]
    assert last["n"] == 60 and last["ratio"] == "1891/3600" and last["dim"] == 61 * 62 // 2
    assert report["predicted"] == "1/2" and last["approx"] == "0.525277777778"


def test_body_report():
    report = run("body", parse(BODY_DOC))
    assert report["normalized_volume"] == "2" and report["ind"] == 2 and report["body_limit"] == "1"
    assert report["vertices"] == [["0"], ["2"]]


def test_analyze_zero_series():
    assert run("analyze", parse(ZERO_DOC))["kappa"] == "-inf"


def test_analyze_generated_dims():
    report = run("analyze", parse(INDEX2_DOC), {"max_degree": 6})
    assert report["m"] == 2 and report["kappa"] == 1
    assert [r["dim"] for r in report["rows"]] == [1, 0, 3, 0, 5, 0, 7]
    assert all(r["dim"] == r["slice_size"] for r in report["rows"])


def test_degree_and_sumset_reports():
    report = run("degree", parse(SIMPLEX_DOC), {"p": [1, 2]})
    assert [r["ratio"] for r in report["rows"]] == ["1/2", "1/2"]
    report = run("sumset", parse(INDEX2_DOC), {"p": [3], "max_degree": 15})
    assert report["summary"][0]["sandwich_ok"]
    assert all(r["sumset"] <= r["middle"] <= r["upper"] for r in report["rows"])


def test_decompose_report_and_options_from_document():
    doc = {"type": "multicomponent", "component_dims": [1, 1],
           "components": [{"type": "toric", "d": 1, "polytope": [[0], [1]]},
                          {"type": "toric", "d": 1, "polytope": [[0], [2]]}],
           "options": {"max_degree": 8, "ordering": [2, 1]}}
    report = run("decompose", parse(doc))
    assert report["ordering"] == [2, 1] and report["r"] == 1 and report["additive"]
    assert report["tables"][0]["predicted"] == "3"


def test_csv_projection():
    report = run("limit", parse(SIMPLEX_DOC), {"max_degree": 3})
    lines = to_csv(report).splitlines()
    assert lines[0] == "approx,degree,dim,n,ratio"
    assert lines[1] == "3,1,3,1,3"
    assert lines[3] == "1.11111111111,3,10,3,10/9"
    assert to_csv(run("body", parse(BODY_DOC))).startswith("key,value\n")


def test_main_exit_codes_and_determinism(tmp_path, capsys):
    path = write(tmp_path, SIMPLEX_DOC)
    assert main(["limit", path, "--max-degree", "20"]) == 0
    first = capsys.readouterr().out
    assert main(["limit", path, "--max-degree", "20"]) == 0
    assert capsys.readouterr().out == first
    assert json.loads(first) == json.loads(to_json(run("limit", parse(SIMPLEX_DOC), {"max_degree": 20})))

    bad = write(tmp_path, {"type": "generated", "d": 1, "generators": [{"degree": 1, "poly": {"0": "1.5"}}]}, "bad.json")
    assert main(["analyze", bad]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "BAD_RATIONAL" and err["pointer"] == "/generators/0/poly/0"

    zero = write(tmp_path, ZERO_DOC, "zero.json")
    assert main(["limit", zero]) == 3
    assert json.loads(capsys.readouterr().err)["error"] == "KAPPA_UNDEFINED"

    assert main(["analyze", str(tmp_path / "missing.json")]) == 2


def test_main_reads_stdin_and_csv(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(BODY_DOC)))
    assert main(["body", "-", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert "body_limit,1" in out and "ind,2" in out


def test_flags_override_document_options(tmp_path, capsys):
    path = write(tmp_path, {**SIMPLEX_DOC, "options": {"max_degree": 3, "tolerance": "1/10"}})
    assert main(["limit", path, "--max-degree", "5", "--tolerance", "1/2"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["max_degree"] == 5 and len(report["rows"]) == 5
