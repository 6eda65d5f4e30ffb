"""Diagnostics graph over a composition order, the diagnostics map, and the trace search.

The search starts from a violated system guarantee, walks back through the
provenance graph to the component terms that produced it, and checks only
those.  A component whose guarantee is broken while its assumptions hold is
faulty.  When an assumption is broken instead, the terms of the upstream
composition that were needed to discharge it are located by redoing the
refinement, and the search continues from them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .contract import IOContract, compose, evaluate_status
from .errors import (
    CompositionError,
    DiagnosisError,
    EliminationError,
    NoViolationError,
    NotSystemFailureError,
)
from .graph import ProvenanceGraph
from .ids import TermId
from .theory import get_theory

log = logging.getLogger(__name__)

SATISFIED = "satisfied"
VIOLATED = "violated"


def auto_keep(contracts):
    """Per-stage keep sets exposing every connection variable a later component still reads.

    Entry ``k`` (0-based) belongs to the stage that adds ``contracts[k + 1]``.
    """
    keeps = []
    for k in range(1, len(contracts)):
        prefix_out = set().union(*(c.outputs for c in contracts[:k]))
        prefix_in = set().union(*(c.inputs for c in contracts[:k]))
        cur = contracts[k]
        connections = (prefix_out & cur.inputs) | (cur.outputs & prefix_in)
        later = set().union(*(c.inputs for c in contracts[k + 1:])) if k + 1 < len(contracts) else set()
        keeps.append(frozenset(connections & later))
    return keeps


@dataclass
class CompositionOrder:
    """Contracts in the order they are folded, plus what each stage keeps visible.

    ``keep_sets[k]`` applies to the stage composing ``contracts[k + 1]``;
    when omitted it is derived with :func:`auto_keep`.  ``labels`` maps a
    contract name to the component it describes (defaults to the contract
    name) and only affects how faulty components are reported.
    """

    contracts: list
    keep_sets: list | None = None
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        self.contracts = list(self.contracts)
        if not self.contracts:
            raise CompositionError("a composition order needs at least one contract")
        names = [c.name for c in self.contracts]
        if len(set(names)) != len(names):
            raise CompositionError(f"duplicate contract names in composition order: {names}")
        if len({c.theory for c in self.contracts}) > 1:
            raise CompositionError("all contracts of a composition order must use the same theory")
        if self.keep_sets is None:
            self.keep_sets = auto_keep(self.contracts)
        else:
            self.keep_sets = [frozenset(k) for k in self.keep_sets]
        if len(self.keep_sets) != len(self.contracts) - 1:
            raise CompositionError(
                f"expected {len(self.contracts) - 1} keep sets, got {len(self.keep_sets)}"
            )

    def __len__(self):
        return len(self.contracts)

    @property
    def names(self):
        return [c.name for c in self.contracts]

    @property
    def theory(self):
        return self.contracts[0].theory

    def index(self, name):
        return self.names.index(name)

    def contract(self, name):
        return self.contracts[self.index(name)]

    def label(self, name):
        return self.labels.get(name, name)

    @property
    def terms_total(self):
        return sum(len(c.assumptions) + len(c.guarantees) for c in self.contracts)


def stage_name(k):
    return f"comp_{k}"


def _fold(contracts, keeps, label):
    """Left fold; returns the running compositions (first entry is contracts[0]) and graph."""
    acc = contracts[0]
    stages = [acc]
    graph = ProvenanceGraph()
    for tid, t in acc.terms:
        graph.add_vertex(tid, t)
    for k in range(1, len(contracts)):
        try:
            acc, g = compose(acc, contracts[k], keep=keeps[k - 1], name=label(k + 1))
        except CompositionError as exc:
            raise CompositionError(str(exc), stage=k + 1) from exc
        graph = graph | g
        stages.append(acc)
    return stages, graph


def build_stages(order: CompositionOrder):
    """Every prefix composition ``C1 || ... || Ck`` together with the diagnostics graph."""
    return _fold(order.contracts, order.keep_sets, stage_name)


def build_system(order: CompositionOrder):
    """System contract and diagnostics graph (the union of all stage graphs)."""
    stages, graph = build_stages(order)
    return stages[-1], graph


def diagnostics_map(graph: ProvenanceGraph, order: CompositionOrder, s: TermId):
    """Component-level leaf terms with a provenance path to ``s``, paired with their contract.

    Sorted by position of the owning contract in the order, then by term id.
    """
    if s not in graph:
        raise KeyError(f"unknown term {s}")
    names = set(order.names)
    out = [(t, t.owner) for t in graph.leaves_above(s) if t.owner in names]
    pos = {n: i for i, n in enumerate(order.names)}
    out.sort(key=lambda p: (pos[p[1]], p[0]))
    return out


def _connected(term, pool):
    focus = set(term.vars)
    picked = []
    rest = list(pool)
    changed = True
    while changed:
        changed = False
        for item in list(rest):
            if item[1].vars & focus:
                picked.append(item)
                focus |= item[1].vars
                rest.remove(item)
                changed = True
    return picked


def find_cause_for_assumption(a_v, other: IOContract):
    """Terms of ``other`` needed to discharge assumption ``a_v``.

    Returns ``(causes, low_confidence)``.  ``causes`` is the list of
    ``(TermId, term)`` that the refinement of ``a_v`` over the outputs of
    ``other`` relied on.  If that refinement is impossible the terms of
    ``other`` sharing variables with ``a_v`` are returned instead and
    ``low_confidence`` is set.
    """
    th = get_theory(other.theory)
    context = sorted(other.guarantees) + sorted(other.assumptions)
    elim = a_v.vars & other.outputs
    if not elim:
        return [], False
    by_id = dict(context)
    try:
        _, used = th.refine(a_v, elim, context)
    except EliminationError as exc:
        log.debug("refinement of %s failed (%s); falling back to shared-variable terms", a_v, exc)
        return _connected(a_v, context), True
    return [(tid, by_id[tid]) for tid in used], False


@dataclass
class Evaluation:
    tid: TermId
    term: str
    verdict: str

    @property
    def ok(self):
        return self.verdict == SATISFIED


@dataclass
class DiagnosisReport:
    """Outcome of tracing one or more violated system guarantees through a log."""

    faulty_components: frozenset
    violated_guarantees: tuple
    evaluations: list
    trace_tree: list
    warnings: list
    low_confidence: bool
    terms_checked: int
    terms_total: int
    system_guarantees: int = 0

    @property
    def violated_guarantee(self):
        return self.violated_guarantees[0] if self.violated_guarantees else None

    @property
    def ratio(self):
        return self.terms_checked / self.terms_total if self.terms_total else 0.0

    def as_dict(self):
        return {
            "faulty_components": sorted(self.faulty_components),
            "violated_guarantees": [str(t) for t in self.violated_guarantees],
            "evaluations": [
                {"term_id": str(e.tid), "term": e.term, "verdict": e.verdict}
                for e in self.evaluations
            ],
            "trace": self.trace_tree,
            "warnings": list(self.warnings),
            "low_confidence": self.low_confidence,
            "terms_checked": self.terms_checked,
            "terms_total": self.terms_total,
            "system_guarantees": self.system_guarantees,
        }


class Diagnoser:
    """Builds the system once and answers diagnosis queries against logs."""

    def __init__(self, order: CompositionOrder):
        self.order = order
        self.theory = get_theory(order.theory)
        self.stages, self.graph = build_stages(order)
        self.system = self.stages[-1]
        self._suffix = None
        self._names = set(order.names)

    def system_assumptions_hold(self, valuation):
        return all(self.theory.evaluate(t, valuation) for _, t in self.system.assumptions)

    def violated_guarantees(self, valuation):
        return [tid for tid, t in self.system.guarantees if not self.theory.evaluate(t, valuation)]

    def diagnostics_map(self, s):
        return diagnostics_map(self.graph, self.order, s)

    def _suffix_context(self):
        # context for the first contract: everything after it, keeping what it reads
        if self._suffix is None:
            rest = self.order.contracts[1:]
            first = self.order.contracts[0]
            keeps = []
            for k in range(1, len(rest)):
                later = set(first.inputs)
                for c in rest[k + 1:]:
                    later |= c.inputs
                prefix_out = set().union(*(c.outputs for c in rest[:k]))
                prefix_in = set().union(*(c.inputs for c in rest[:k]))
                conn = (prefix_out & rest[k].inputs) | (rest[k].outputs & prefix_in)
                keeps.append(frozenset(conn & later))
            stages, graph = _fold(rest, keeps, lambda k: f"rest_{k}")
            self._suffix = (stages[-1], graph)
        return self._suffix

    def diagnose(self, g_v, valuation):
        return self.diagnose_all(valuation, [g_v])

    def diagnose_all(self, valuation, targets=None):
        """Trace every violated system guarantee (or the given ones) with shared bookkeeping."""
        if not self.system_assumptions_hold(valuation):
            bad = [str(tid) for tid, t in self.system.assumptions
                   if not self.theory.evaluate(t, valuation)]
            raise NotSystemFailureError(
                f"system assumptions {bad} are violated: not a system-level failure"
            )
        violated = self.violated_guarantees(valuation)
        if targets is None:
            targets = violated
            if not targets:
                raise NoViolationError("no violated system guarantee")
        else:
            sys_ids = {tid for tid, _ in self.system.guarantees}
            for t in targets:
                if t not in sys_ids:
                    raise DiagnosisError(f"{t} is not a system-level guarantee")
                if t not in violated:
                    raise NoViolationError(f"system guarantee {t} is satisfied by the log")
        run = _Trace(self, valuation)
        tree = [run.trace(t, self.graph) for t in targets]
        return DiagnosisReport(
            faulty_components=frozenset(self.order.label(n) for n in run.faulty),
            violated_guarantees=tuple(targets),
            evaluations=run.evaluations,
            trace_tree=tree,
            warnings=run.warnings,
            low_confidence=run.low_confidence,
            terms_checked=len({e.tid for e in run.evaluations}),
            terms_total=self.order.terms_total,
            system_guarantees=len(self.system.guarantees),
        )


class _Trace:
    def __init__(self, dx: Diagnoser, valuation):
        self.dx = dx
        self.valuation = valuation
        self.verdicts = {}
        self.evaluations = []
        self.faulty = []
        self.warnings = []
        self.low_confidence = False
        self.traced = set()
        self.component_ok = {}

    def check(self, tid, term):
        if tid not in self.verdicts:
            ok = self.dx.theory.evaluate(term, self.valuation)
            self.verdicts[tid] = ok
            self.evaluations.append(Evaluation(tid, str(term), SATISFIED if ok else VIOLATED))
        return self.verdicts[tid]

    def trace(self, s, graph):
        node = {"term_id": str(s), "term": str(graph.terms[s]), "leaves": []}
        if s in self.traced:
            node["repeat"] = True
            return node
        self.traced.add(s)
        order = self.dx.order
        for leaf, owner in diagnostics_map(graph, order, s):
            contract = order.contract(owner)
            term = graph.terms[leaf]
            if not leaf.is_guarantee:
                if not term.vars <= self.dx.system.inputs:
                    self.warn(f"assumption leaf {leaf} ({term}) is not over system inputs; skipped")
                continue
            entry = {"term_id": str(leaf), "term": str(term), "component": order.label(owner)}
            node["leaves"].append(entry)
            if self.check(leaf, term):
                entry["verdict"] = SATISFIED
                continue
            entry["verdict"] = VIOLATED
            entry["assumptions"] = self.examine(contract, entry)
        return node

    def examine(self, contract, entry):
        """Check the assumptions of a component with a violated guarantee."""
        results = []
        bad = []
        for tid, t in contract.assumptions:
            ok = self.check(tid, t)
            results.append({"term_id": str(tid), "term": str(t), "verdict": SATISFIED if ok else VIOLATED})
            if not ok:
                bad.append((tid, t, results[-1]))
        first_visit = contract.name not in self.component_ok
        self.component_ok[contract.name] = not bad
        if not bad:
            if contract.name not in self.faulty:
                self.faulty.append(contract.name)
            entry["faulty"] = True
            return results
        if not first_visit:
            return results
        for tid, t, rec in bad:
            if t.vars <= self.dx.system.inputs:
                self.warn(f"assumption {tid} ({t}) only reads system inputs but is violated")
                continue
            other, graph = self.context_for(contract.name)
            if other is None:
                self.warn(f"no upstream composition to explain {tid}")
                continue
            causes, low = find_cause_for_assumption(t, other)
            if low:
                self.low_confidence = True
                rec["low_confidence"] = True
            if not causes:
                self.warn(f"no upstream term explains violated assumption {tid} ({t})")
            rec["causes"] = [self.trace(c, graph) for c, _ in causes]
        return results

    def context_for(self, name):
        i = self.dx.order.index(name)
        if len(self.dx.order) == 1:
            return None, None
        if i == 0:
            self.warn(f"{name} comes first in the order; its assumptions were explained "
                      "against the composition of the remaining components")
            other, g = self.dx._suffix_context()
            return other, self.dx.graph | g
        return self.dx.stages[i - 1], self.dx.graph

    def warn(self, msg):
        if msg not in self.warnings:
            self.warnings.append(msg)


def diagnose(g_v, order: CompositionOrder, valuation):
    """Trace one violated system guarantee; see :class:`Diagnoser`."""
    return Diagnoser(order).diagnose(g_v, valuation)


def diagnose_all(order: CompositionOrder, valuation):
    return Diagnoser(order).diagnose_all(valuation)


def component_statuses(order: CompositionOrder, valuation):
    """FAIL/ACTIVE/IDLE of every component under a log, in composition order."""
    return {c.name: evaluate_status(c, valuation) for c in order.contracts}
