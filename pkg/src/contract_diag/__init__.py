"""Assume-guarantee contracts with provenance-tracked composition and log-driven fault localization."""

from .contract import (
    IOContract,
    Status,
    compose,
    contract_from_terms,
    evaluate_status,
    make_contract,
    refines,
)
from .diagnostics import (
    CompositionOrder,
    Diagnoser,
    DiagnosisReport,
    build_system,
    component_statuses,
    diagnose,
    diagnose_all,
    diagnostics_map,
    find_cause_for_assumption,
)
from .errors import (
    CapacityError,
    CompositionError,
    ContractDiagError,
    ContractError,
    DiagnosisError,
    EliminationError,
    MissingVariableError,
    NotSystemFailureError,
    NoViolationError,
    NoWitnessError,
    SpecFormatError,
    TermSyntaxError,
)
from .graph import CompositionGraph, DiagnosticsGraph, ProvenanceGraph
from .harness import gen_system, inject_fault, oracle_diagnose
from .ids import TermId
from .linear import (
    LinearTerm,
    eliminate_by_refinement_linear,
    eliminate_by_relaxation_linear,
    evaluate_linear,
    implies_linear,
    parse_linear,
)
from .prop import PropTerm, eliminate_prop, evaluate_prop, implies_prop, parse_prop
from .sysio import SystemSpec, export_dot, load_log, load_spec, render_report
from .theory import get_theory

__version__ = "0.1.0"
