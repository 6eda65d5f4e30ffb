import itertools
from pathlib import Path

import pytest

from contract_diag.cases import alice_log, alice_spec, example3_log, example3_spec
from contract_diag.contract import Status, evaluate_status
from contract_diag.diagnostics import build_system, component_statuses
from contract_diag.errors import NoWitnessError
from contract_diag.harness import gen_system, inject_fault, oracle_diagnose, oracle_term_count
from contract_diag.prop import Iff
from contract_diag.sysio import load_spec, spec_from_dict
from contract_diag.theory import get_theory

GOLDEN = Path(__file__).parent / "golden"


def statuses(spec, log):
    return {n: st for n, (st, _) in component_statuses(spec.order(), log).items()}


# -- generator -----------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 9, 0])
def test_component_bounds(n):
    with pytest.raises(ValueError, match="between 3 and 8"):
        gen_system(0, n)


def test_deterministic():
    assert gen_system(7, 5, "linear") == gen_system(7, 5, "linear")
    assert gen_system(7, 5, "prop") == gen_system(7, 5, "prop")
    assert gen_system(7, 5, "linear") != gen_system(8, 5, "linear")


def test_golden_linear_chain():
    spec = gen_system(1, 3, "linear")
    assert spec == load_spec(GOLDEN / "gen_linear_s1_n3.yaml")
    # each component reads the previous output
    assert [c.inputs for c in spec.components][1:] == [["y1"], ["y2"]]


def test_golden_prop_iff_chain():
    spec = gen_system(2, 3, "prop")
    assert spec == load_spec(GOLDEN / "gen_prop_s2_n3.yaml")
    assert all(isinstance(t, Iff) for c in spec.contracts() for _, t in c.guarantees)


@pytest.mark.parametrize("theory", ["linear", "prop"])
def test_generated_systems_are_usable(theory):
    th = get_theory(theory)
    for seed in range(40):
        spec = gen_system(seed, 3 + seed % 6, theory)
        system, _ = build_system(spec.order())
        assert th.satisfiable([t for _, t in system.assumptions])
        # DAG wiring: inputs come from earlier outputs or fresh system inputs
        seen = set()
        for c in spec.components:
            assert all(v.startswith("x") or v in seen for v in c.inputs)
            seen |= set(c.outputs)


# -- injection -----------------------------------------------------------------

def test_inject_example3_m2():
    spec = example3_spec()
    log = inject_fault(spec, 0, {"M2"})
    assert statuses(spec, log) == statuses(spec, example3_log())
    assert oracle_diagnose(spec, log) == {"M2"}


def test_inject_example3_m1():
    spec = example3_spec()
    log = inject_fault(spec, 0, {"M1"})
    assert log["a"] > 2
    assert 0 <= log["i"] <= 2
    assert statuses(spec, log)["C1"] is Status.FAIL


def test_inject_accepts_contract_names():
    spec = example3_spec()
    log = inject_fault(spec, 0, {"C2"})
    assert statuses(spec, log) == statuses(spec, inject_fault(spec, 0, {"M2"}))


def _cascade():
    # any fault of M1 flips y, which breaks the assumption of M2
    return spec_from_dict({
        "theory": "prop",
        "components": [
            {"name": "M1", "inputs": ["x"], "outputs": ["y"], "assumptions": ["x"], "guarantees": ["y <=> x"]},
            {"name": "M2", "inputs": ["y"], "outputs": ["z"], "assumptions": ["y"], "guarantees": ["z <=> y"]},
        ],
    })


def test_cascade_has_no_witness():
    spec = _cascade()
    m1, m2 = spec.contracts()
    both = [
        v for v in (dict(zip("xyz", bits)) for bits in itertools.product((False, True), repeat=3))
        if evaluate_status(m1, v)[0] is Status.FAIL and evaluate_status(m2, v)[0] is Status.FAIL
    ]
    assert both == []
    with pytest.raises(NoWitnessError):
        inject_fault(spec, 0, {"M1", "M2"})


def test_inject_needs_targets():
    with pytest.raises(ValueError):
        inject_fault(example3_spec(), 0, set())
    with pytest.raises(ValueError, match="unknown"):
        inject_fault(example3_spec(), 0, {"M9"})


@pytest.mark.parametrize("theory", ["linear", "prop"])
def test_injected_logs_meet_their_contract(theory):
    for seed in range(15):
        spec = gen_system(seed, 3 + seed % 6, theory)
        target = {spec.components[seed % len(spec.components)].name}
        try:
            log = inject_fault(spec, seed, target)
        except NoWitnessError:
            continue
        system, _ = build_system(spec.order())
        th = get_theory(theory)
        assert all(th.evaluate(t, log) for _, t in system.assumptions)
        assert any(not th.evaluate(t, log) for _, t in system.guarantees)
        assert {n for n, s in statuses(spec, log).items() if s is Status.FAIL} == target


# -- oracle --------------------------------------------------------------------

def test_oracle_examples():
    assert oracle_diagnose(example3_spec(), example3_log()) == {"M2"}
    assert oracle_diagnose(alice_spec(), alice_log()) == {"Perception"}


def test_oracle_all_active():
    log = {"i": 1, "j": 1, "a": 1, "b": 1, "o": 1}
    assert oracle_diagnose(example3_spec(), log) == set()


def test_oracle_term_count():
    assert oracle_term_count(example3_spec()) == 10
    assert oracle_term_count(alice_spec()) == 58
