"""IO contracts, their FAIL/ACTIVE/IDLE status, refinement, and composition.

Composition keeps the stem of the raw composed contract (the conjunction of
both operands' assumptions, resp. guarantees) and rewrites every stem term
that mentions a variable which must not appear at the new interface.
Assumptions are strengthened (refinement) using the other operand's terms;
guarantees are weakened (relaxation) using the term pool of both operands.
Which operand terms went into each composed term is recorded as a
:class:`~contract_diag.graph.ProvenanceGraph`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .errors import CapacityError, CompositionError, ContractError, EliminationError
from .graph import ProvenanceGraph
from .ids import ASSUMPTION, GUARANTEE, TermId
from .theory import get_theory

log = logging.getLogger(__name__)

__all__ = [
    "IOContract",
    "Status",
    "make_contract",
    "contract_from_terms",
    "evaluate_status",
    "refines",
    "compose",
    "trivial_contract",
]


class Status(str, Enum):
    IDLE = "IDLE"
    ACTIVE = "ACTIVE"
    FAIL = "FAIL"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class IOContract:
    """``(inputs, outputs, assumptions, guarantees)`` with identified terms.

    ``assumptions`` and ``guarantees`` are tuples of ``(TermId, term)``.
    Construction validates the alphabet and scope rules: inputs and outputs
    are disjoint, assumptions mention inputs only, guarantees mention
    inputs and outputs only.
    """

    name: str
    inputs: frozenset
    outputs: frozenset
    assumptions: tuple = ()
    guarantees: tuple = ()
    theory: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "inputs", frozenset(self.inputs))
        object.__setattr__(self, "outputs", frozenset(self.outputs))
        object.__setattr__(self, "assumptions", tuple(self.assumptions))
        object.__setattr__(self, "guarantees", tuple(self.guarantees))
        th = get_theory(self.theory)
        overlap = self.inputs & self.outputs
        if overlap:
            raise ContractError(
                f"{self.name}: variables {sorted(overlap)} are both inputs and outputs"
            )
        for section, items, allowed in (
            (ASSUMPTION, self.assumptions, self.inputs),
            (GUARANTEE, self.guarantees, self.inputs | self.outputs),
        ):
            for k, (tid, term) in enumerate(items):
                if tid.owner != self.name or tid.section != section:
                    raise ContractError(f"{self.name}: term id {tid} is not a {section} of this contract")
                if not th.accepts(term):
                    raise ContractError(f"{self.name}: {tid} is not a {self.theory} term")
                stray = term.vars - allowed
                if stray:
                    what = "inputs" if section == ASSUMPTION else "inputs or outputs"
                    raise ContractError(
                        f"{self.name}: {section} {term} mentions {sorted(stray)}, which are not {what}"
                    )

    @property
    def terms(self):
        return self.assumptions + self.guarantees

    @property
    def variables(self):
        return self.inputs | self.outputs

    def term(self, tid):
        for t, term in self.terms:
            if t == tid:
                return term
        raise KeyError(tid)

    def __str__(self):
        a = ", ".join(str(t) for _, t in self.assumptions)
        g = ", ".join(str(t) for _, t in self.guarantees)
        return (
            f"{self.name}: I={sorted(self.inputs)} O={sorted(self.outputs)} "
            f"A={{{a}}} G={{{g}}}"
        )


def contract_from_terms(name, inputs, outputs, assumptions, guarantees, theory="linear"):
    """Build a contract from already parsed terms, numbering them by position."""
    return IOContract(
        name,
        inputs,
        outputs,
        tuple((TermId(name, ASSUMPTION, k), t) for k, t in enumerate(assumptions)),
        tuple((TermId(name, GUARANTEE, k), t) for k, t in enumerate(guarantees)),
        theory,
    )


def make_contract(name, inputs, outputs, assumption_texts, guarantee_texts, theory="linear"):
    """Parse term texts and build a validated contract.

    A linear equality contributes two terms (both directions), so term
    indices follow the parsed terms rather than the input strings.
    """
    th = get_theory(theory)
    a = [t for text in assumption_texts for t in th.parse(text)]
    g = [t for text in guarantee_texts for t in th.parse(text)]
    return contract_from_terms(name, inputs, outputs, a, g, theory)


def trivial_contract(name="trivial", theory="linear"):
    return IOContract(name, frozenset(), frozenset(), (), (), theory)


def evaluate_status(c: IOContract, valuation):
    """FAIL/ACTIVE/IDLE of ``c`` under a valuation, plus the terms responsible.

    IDLE lists the false assumptions, FAIL the false guarantees, ACTIVE
    nothing.
    """
    th = get_theory(c.theory)
    bad = [tid for tid, t in c.assumptions if not th.evaluate(t, valuation)]
    if bad:
        return Status.IDLE, bad
    bad = [tid for tid, t in c.guarantees if not th.evaluate(t, valuation)]
    if bad:
        return Status.FAIL, bad
    return Status.ACTIVE, []


def refines(c1: IOContract, c2: IOContract) -> bool:
    """Whether ``c1 <= c2``: c1 assumes less and, under c2's assumptions, guarantees more.

    Checked as ``AND(a2) => a1_k`` for every assumption of c1 and
    ``AND(a2) & AND(g1) => g2_k`` for every guarantee of c2.
    """
    if c1.inputs != c2.inputs or c1.outputs != c2.outputs:
        raise ContractError("refinement is only defined between contracts with equal alphabets")
    if c1.theory != c2.theory:
        raise ContractError("refinement across theories")
    th = get_theory(c1.theory)
    a1 = [t for _, t in c1.assumptions]
    a2 = [t for _, t in c2.assumptions]
    g1 = [t for _, t in c1.guarantees]
    g2 = [t for _, t in c2.guarantees]
    return all(th.implies(a2, t) for t in a1) and all(th.implies(a2 + g1, t) for t in g2)


def _relevant(term, pool):
    """Members of ``pool`` connected to ``term`` through shared variables."""
    focus = set(term.vars)
    picked, rest = [], list(pool)
    changed = True
    while changed:
        changed = False
        remaining = []
        for t in rest:
            if t.vars & focus:
                picked.append(t)
                focus |= t.vars
                changed = True
            else:
                remaining.append(t)
        rest = remaining
    return picked


def _prune(th, items):
    """Drop items whose term is implied by the remaining ones (later items first)."""
    kept = list(range(len(items)))
    for i in reversed(range(len(items))):
        term = items[i][0]
        others = [items[j][0] for j in kept if j != i]
        if term in others:
            kept.remove(i)
            continue
        try:
            if th.implies(_relevant(term, others), term):
                kept.remove(i)
        except CapacityError:
            pass
    return [items[i] for i in kept]


def _by_id(items):
    return sorted(items, key=lambda it: it[0])


def compose(c1: IOContract, c2: IOContract, keep: Iterable[str] = (), name=None):
    """Compose two IO contracts; returns ``(contract, composition_graph)``.

    Connection variables (outputs of one operand read by the other) become
    internal and are eliminated unless listed in ``keep``.  The composed
    inputs are the operands' inputs not produced by either operand.

    Assumption terms mentioning any non-input are refined with the other
    operand's guarantees, then its assumptions, as context.  Guarantee terms
    mentioning internal variables are relaxed with, in order of preference,
    the other operand's guarantees, the own operand's other guarantees, the
    other's assumptions and the own assumptions.  A guarantee that cannot be
    relaxed is dropped (relaxing it to true is always sound); an assumption
    that cannot be refined is an error.  Results equal to true are dropped
    and results implied by the remaining terms are pruned.
    """
    if c1.theory != c2.theory:
        raise CompositionError(f"cannot compose a {c1.theory} contract with a {c2.theory} one")
    clash = c1.outputs & c2.outputs
    if clash:
        raise CompositionError(f"{c1.name} and {c2.name} both drive {sorted(clash)}")
    th = get_theory(c1.theory)
    name = name or f"({c1.name}||{c2.name})"
    keep = frozenset(keep)
    produced = c1.outputs | c2.outputs
    connections = (c1.outputs & c2.inputs) | (c2.outputs & c1.inputs)
    internal = connections - keep
    inputs = (c1.inputs | c2.inputs) - produced
    outputs = produced - internal

    pairs = ((c1, c2), (c2, c1))

    assumptions = []  # (term, [source ids])
    for own, other in pairs:
        context = _by_id(other.guarantees) + _by_id(other.assumptions)
        for tid, t in own.assumptions:
            elim = t.vars - inputs
            if not elim:
                assumptions.append((t, [tid]))
                continue
            try:
                new, used = th.refine(t, produced, context)
            except EliminationError as exc:
                raise CompositionError(
                    f"assumption {tid} ({t}) cannot be expressed over the inputs of {name}: {exc}"
                ) from exc
            if new.is_true:
                continue
            assumptions.append((new, [tid] + list(used)))

    guarantees = []
    for own, other in pairs:
        for tid, t in own.guarantees:
            if not (t.vars & internal):
                guarantees.append((t, [tid]))
                continue
            context = (
                _by_id(other.guarantees)
                + [it for it in _by_id(own.guarantees) if it[0] != tid]
                + _by_id(other.assumptions)
                + _by_id(own.assumptions)
            )
            try:
                new, used = th.relax(t, internal, context)
            except EliminationError as exc:
                log.debug("dropping guarantee %s of %s: %s", tid, name, exc)
                continue
            if new.is_true:
                continue
            guarantees.append((new, [tid] + list(used)))

    assumptions = _prune(th, assumptions)
    guarantees = _prune(th, guarantees)

    result = contract_from_terms(
        name, inputs, outputs,
        [t for t, _ in assumptions], [t for t, _ in guarantees], c1.theory,
    )
    graph = ProvenanceGraph()
    for c in (c1, c2):
        for tid, t in c.terms:
            graph.add_vertex(tid, t)
    for (tid, t), (_, sources) in zip(result.terms, assumptions + guarantees):
        graph.add_vertex(tid, t)
        for src in sources:
            graph.add_edge(src, tid)
    return result, graph
