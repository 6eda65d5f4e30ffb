import json
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from contract_diag.cases import (
    ALICE_COLUMNS,
    alice_dict,
    alice_log,
    alice_spec,
    data_path,
    example1_spec,
    example3_log,
    example3_spec,
    load_bundled,
)
from contract_diag.contract import compose
from contract_diag.diagnostics import Diagnoser
from contract_diag.errors import SpecFormatError
from contract_diag.harness import gen_system
from contract_diag.sysio import (
    dump_log_csv,
    dump_spec,
    expand_replicate,
    export_dot,
    load_log,
    load_spec,
    missing_variables,
    render_report,
    spec_from_dict,
    valuation_from_rows,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


# -- specs ---------------------------------------------------------------------

@pytest.mark.parametrize("name", ["example1.yaml", "example3.yaml", "alice.yaml"])
def test_bundled_round_trip(tmp_path, name):
    spec = load_bundled(name)
    again = load_spec(write(tmp_path, "s.yaml", dump_spec(spec)))
    assert again == spec
    again_json = load_spec(write(tmp_path, "s.json", dump_spec(spec, fmt="json")))
    assert again_json == spec


def test_bundled_match_builders():
    assert load_bundled("example1.yaml") == example1_spec()
    assert load_bundled("example3.yaml") == example3_spec()
    assert load_bundled("alice.yaml") == alice_spec()


@settings(max_examples=20, deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
@given(st.integers(0, 5000), st.integers(3, 8), st.sampled_from(["linear", "prop"]))
def test_generated_round_trip(tmp_path, seed, n, theory):
    spec = gen_system(seed, n, theory)
    assert load_spec(write(tmp_path, "g.yaml", dump_spec(spec))) == spec


def test_replicate_slots():
    entry = {
        "name": "P", "component": "P", "inputs": ["x@t-1", "u@t"], "outputs": ["x@t"],
        "assumptions": [], "guarantees": ["x@t <=> (x@t-1 & u@t)"],
        "replicate": {"count": 2, "start": 1},
    }
    clones = expand_replicate(entry)
    assert [c["name"] for c in clones] == ["P@1", "P@2"]
    assert clones[1]["guarantees"] == ["x@2 <=> (x@1 & u@2)"]
    assert clones[0]["inputs"] == ["x@0", "u@1"]


def test_replicate_wiring():
    entry = {"name": "T", "inputs": ["prev"], "outputs": ["cur@t"], "guarantees": ["cur@t <= prev"],
             "replicate": {"count": 1, "start": 3, "wiring": {"prev": "cur@t-1"}}}
    (clone,) = expand_replicate(entry)
    assert clone["inputs"] == ["cur@2"] and clone["guarantees"] == ["cur@3 <= cur@2"]


def test_replicate_bad_count():
    with pytest.raises(SpecFormatError):
        expand_replicate({"name": "X", "replicate": {"count": 0}})


def test_alice_unrolls_to_six_components():
    spec = alice_spec()
    assert spec.composition_order == [
        "Perception@1", "Planner@1", "Tracker@1", "Perception@2", "Planner@2", "Tracker@2",
    ]
    assert spec.order().terms_total == 58
    scaled = spec_from_dict(alice_dict(fillers=100)).order().terms_total
    assert scaled == 58 + 6 * 100


@pytest.mark.parametrize("data, msg", [
    ([], "must be an object"),
    ({"components": []}, "missing 'theory'"),
    ({"theory": "modal", "components": []}, "unknown theory"),
    ({"theory": "linear", "components": [{"inputs": []}]}, "needs a name"),
    ({"theory": "linear", "components": [{"name": "A", "inputs": "x", "outputs": []}]}, "must be a list"),
    ({"theory": "linear", "components": [{"name": "A", "inputs": [], "outputs": []}],
      "composition_order": ["A", "B"]}, "composition_order"),
    ({"theory": "linear", "components": [{"name": "A", "inputs": ["i"], "outputs": ["o"],
                                          "guarantees": ["o <= z"]}]}, "component A"),
    ({"theory": "linear", "components": [{"name": "A", "inputs": ["i"], "outputs": ["o"],
                                          "guarantees": ["o <="]}]}, "component A"),
])
def test_spec_errors(data, msg):
    with pytest.raises(SpecFormatError, match=msg):
        spec = spec_from_dict(data)
        spec.contracts()


def test_spec_file_syntax_error(tmp_path):
    with pytest.raises(SpecFormatError):
        load_spec(write(tmp_path, "bad.yaml", "theory: [unclosed"))


# -- logs ----------------------------------------------------------------------

def test_table_row_zero():
    log = load_log(data_path("alice_full.csv"), alice_spec())
    row0 = {k: v for k, v in log.items() if k.endswith("@0")}
    assert row0 == {
        "poor_visibility@0": False, "icy_roads@0": False,
        "c_T1@0": True, "c_T2@0": True, "c_T3@0": True,
        "c_P1@0": True, "c_P2@0": True, "c_P3@0": True,
        "q1@0": False, "q2@0": False, "q3@0": False, "q4@0": True, "v@0": False,
    }
    assert log == alice_log()


def test_masked_log_skips_absent():
    log = load_log(data_path("alice_masked.csv"), alice_spec())
    assert "c_P1@1" not in log and "v@2" in log
    assert log == alice_log(masked=True)
    assert "q1@1" in missing_variables(alice_spec(), log)
    assert not missing_variables(alice_spec(), alice_log())


def test_flat_json_log():
    log = load_log(data_path("example3_log.json"), example3_spec())
    assert log == {k: Fraction(v) for k, v in example3_log().items()}


def test_rational_spellings(tmp_path):
    p = write(tmp_path, "l.csv", "i,j,a,b,o\n1,0.5,3/2,7,-2\n")
    log = load_log(p, example3_spec())
    assert log == {"i": 1, "j": Fraction(1, 2), "a": Fraction(3, 2), "b": 7, "o": -2}


def test_step_column(tmp_path):
    p = write(tmp_path, "l.csv", "step,x\n4,1\n")
    assert load_log(p, theory="prop") == {"x@4": True}


def test_list_log(tmp_path):
    p = write(tmp_path, "l.json", json.dumps([{"x": 1}, {"x": 0}]))
    assert load_log(p, theory="prop") == {"x@0": True, "x@1": False}


@pytest.mark.parametrize("name, text, msg", [
    ("e.csv", "", "non-total"),
    ("e.json", "{}", "non-total"),
    ("h.csv", "i,j\n", "non-total"),
    ("d.csv", "i,i\n1,2\n", "duplicate"),
    ("r.csv", "i,j\n1\n", "non-total row"),
    ("c.csv", "i,j\n1,\n", "non-total row"),
    ("u.csv", "i,zz\n1,2\n", "unknown variable"),
    ("t.csv", "i,j\ntrue,1\n", "type mismatch"),
    ("t.json", '{"i": true}', "type mismatch"),
    ("n.json", '{"i": null}', "non-total"),
    ("s.json", '[{"i": 1}, {"j": 1}]', "non-total row"),
])
def test_log_errors(tmp_path, name, text, msg):
    with pytest.raises(SpecFormatError, match=msg):
        load_log(write(tmp_path, name, text), example3_spec())


def test_timed_log_unknown_signal(tmp_path):
    p = write(tmp_path, "l.csv", "v,ghost\n0,1\n1,1\n")
    with pytest.raises(SpecFormatError, match="ghost"):
        load_log(p, alice_spec())


def test_prop_type_mismatch():
    with pytest.raises(SpecFormatError, match="type mismatch"):
        valuation_from_rows(["x"], [["2"]], theory="prop")


def test_dump_log_csv_round_trip(tmp_path):
    p = tmp_path / "l.csv"
    dump_log_csv({"o": Fraction(5, 2), "i": 1}, p)
    assert load_log(p) == {"i": 1, "o": Fraction(5, 2)}


# -- dot and reports -----------------------------------------------------------

def test_dot_example1():
    c1, c2 = example1_spec().contracts()
    _, g = compose(c1, c2, name="comp_2")
    text = export_dot(g, "example1")
    nodes = [ln for ln in text.splitlines() if "[label=" in ln]
    edges = [ln for ln in text.splitlines() if "->" in ln]
    assert len(nodes) == 8 and len(edges) == 4
    assert '  "C1.g0" -> "comp_2.g0";' in edges
    assert "i + o <= 3" in text
    assert text == export_dot(g, "example1")
    assert text.startswith("digraph example1 {") and text.rstrip().endswith("}")


def test_dot_escapes_quotes():
    from contract_diag.graph import ProvenanceGraph
    from contract_diag.ids import TermId

    g = ProvenanceGraph()
    g.add_vertex(TermId('C"1', "guarantee", 0), "x")
    assert '\\"' in export_dot(g)


def test_reports_agree():
    report = Diagnoser(example3_spec().order()).diagnose_all(example3_log())
    text = render_report(report, "text")
    data = json.loads(render_report(report, "json"))
    assert data["faulty_components"] == ["M2"]
    assert "faulty components: M2" in text
    assert f"terms checked: {data['terms_checked']}/{data['terms_total']}" in text
    assert sorted(data) == [
        "evaluations", "faulty_components", "low_confidence", "system_guarantees",
        "terms_checked", "terms_total", "trace", "violated_guarantees", "warnings",
    ]


def test_report_color():
    report = Diagnoser(example3_spec().order()).diagnose_all(example3_log())
    assert "\033[" in render_report(report, "text", color=True)
    assert "\033[" not in render_report(report, "text")
    with pytest.raises(ValueError):
        render_report(report, "xml")


def test_alice_columns_cover_log():
    assert {k.split("@")[0] for k in alice_log()} == set(ALICE_COLUMNS)
