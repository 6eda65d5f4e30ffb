"""Random systems, fault injection and the check-everything diagnosis oracle.

Generated systems are DAGs of single-output components.  Linear components
bound their output from above by each input (``a*y - b*v <= d``) and assume
upper bounds on their inputs, loose enough that composition always
succeeds.  Propositional components define their output as a small Boolean
function of their inputs (``y <=> f``).

Fault injection simulates the system in composition order.  A component
whose assumptions hold and that is not a target produces the largest output
its guarantees allow (linear) or exactly ``f`` (propositional).  Targets,
and components whose assumptions are already broken, overshoot that value
or negate ``f``.
"""

from __future__ import annotations

import random
from fractions import Fraction
from math import ceil

from .contract import Status, evaluate_status
from .diagnostics import build_system
from .errors import ContractDiagError, ContractError, NoWitnessError
from .prop import Iff, Var, evaluate_prop
from .sysio import ComponentSpec, SystemSpec
from .theory import get_theory

MIN_COMPONENTS = 3
MAX_COMPONENTS = 8
MAX_TRIES = 200

# overshoot sizes tried by fault injection, smallest first
_EPSILONS = (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3), Fraction(6))


def gen_system(seed, n_components=3, theory="linear"):
    """Deterministic random system with ``n_components`` components."""
    if not MIN_COMPONENTS <= n_components <= MAX_COMPONENTS:
        raise ValueError(
            f"n_components must be between {MIN_COMPONENTS} and {MAX_COMPONENTS}, got {n_components}"
        )
    th = get_theory(theory)
    rng = random.Random(f"{seed}:{n_components}:{theory}")
    gen = _gen_linear if theory == "linear" else _gen_prop
    for _ in range(MAX_TRIES):
        spec = gen(rng, n_components)
        try:
            system, _ = build_system(spec.order())
        except ContractDiagError:
            continue
        if th.satisfiable([t for _, t in system.assumptions]):
            return spec
    raise NoWitnessError(f"could not generate a composable system for seed {seed}")


def _wiring(rng, n):
    """Inputs of each component: earlier outputs or fresh system inputs."""
    wires = []
    fresh = 0
    for k in range(1, n + 1):
        m = rng.choice((1, 2)) if k > 1 else rng.choice((1, 1, 2))
        ins = []
        earlier = [f"y{j}" for j in range(1, k)]
        for slot in range(m):
            if earlier and (slot == 0 or rng.random() < 0.5):
                cand = [e for e in earlier if e not in ins]
                if cand:
                    ins.append(rng.choice(cand))
                    continue
            fresh += 1
            ins.append(f"x{fresh}")
        wires.append(ins)
    return wires


def _gen_linear(rng, n):
    wires = _wiring(rng, n)
    upper = {}  # largest value a variable can take when everything behaves
    comps = []
    for k, ins in enumerate(wires, 1):
        y = f"y{k}"
        assumptions, guarantees, peaks = [], [], []
        for v in ins:
            if v.startswith("x"):
                upper[v] = rng.randint(1, 5)
                assumptions += [f"{v} >= 0", f"{v} <= {upper[v]}"]
            else:
                assumptions.append(f"{v} <= {upper[v]}")
            a, b, d = rng.randint(1, 3), rng.randint(1, 3), rng.randint(0, 5)
            guarantees.append(f"{a}*{y} - {b}*{v} <= {d}")
            peaks.append(Fraction(d + b * upper[v], a))
        # consumers assume a bound with slack above every guarantee's peak
        upper[y] = ceil(max(peaks)) + rng.randint(1, 3)
        comps.append(ComponentSpec(f"M{k}", ins, [y], assumptions, guarantees))
    return SystemSpec("linear", comps, [c.name for c in comps])


_PROP_FUNCS = (
    lambda a: a,
    lambda a: f"!{a}",
    lambda a, b: f"{a} & {b}",
    lambda a, b: f"{a} | {b}",
    lambda a, b: f"!({a} <=> {b})",
    lambda a, b: f"{a} <=> {b}",
)


def _gen_prop(rng, n):
    wires = _wiring(rng, n)
    comps = []
    for k, ins in enumerate(wires, 1):
        y = f"y{k}"
        arity = len(ins)
        funcs = [f for f in _PROP_FUNCS if f.__code__.co_argcount == arity]
        body = rng.choice(funcs)(*ins)
        assumptions = []
        if rng.random() < 0.4:
            v = rng.choice(ins)
            assumptions.append(v if rng.random() < 0.5 else f"!{v}")
        comps.append(ComponentSpec(f"M{k}", ins, [y], assumptions, [f"{y} <=> ({body})"]))
    return SystemSpec("prop", comps, [c.name for c in comps])


# ---------------------------------------------------------------------------
# simulation

class _Model:
    """Per-component output rules read off the contracts."""

    def __init__(self, spec: SystemSpec):
        self.spec = spec
        self.theory = get_theory(spec.theory)
        self.order = spec.order()
        self.contracts = self.order.contracts
        self.inputs = sorted(set().union(*(c.inputs for c in self.contracts))
                             - set().union(*(c.outputs for c in self.contracts)))
        self.rules = {}
        for c in self.contracts:
            if len(c.outputs) != 1:
                raise ContractError(f"{c.name}: fault injection needs exactly one output per component")
            (y,) = c.outputs
            rule = self._prop_rule(c, y) if spec.theory == "prop" else self._linear_rule(c, y)
            self.rules[c.name] = (y, rule)

    @staticmethod
    def _prop_rule(c, y):
        for _, g in c.guarantees:
            if isinstance(g, Iff):
                if g.lhs == Var(y) and y not in g.rhs.vars:
                    return g.rhs
                if g.rhs == Var(y) and y not in g.lhs.vars:
                    return g.lhs
        raise ContractError(f"{c.name}: no guarantee of the form {y} <=> f(inputs)")

    @staticmethod
    def _linear_rule(c, y):
        bounds = []
        for _, g in c.guarantees:
            cy = g.coeff(y)
            if cy <= 0:
                raise ContractError(f"{c.name}: guarantee {g} is not an upper bound on {y}")
            bounds.append((cy, g))
        if not bounds:
            raise ContractError(f"{c.name}: no guarantee bounds {y}")
        return bounds

    def input_ranges(self):
        """Integer ranges for system inputs from single-variable assumptions."""
        lo = {v: 0 for v in self.inputs}
        hi = {v: 5 for v in self.inputs}
        for c in self.contracts:
            for _, a in c.assumptions:
                if len(a.vars) != 1:
                    continue
                (v,) = a.vars
                if v not in lo:
                    continue
                coef = a.coeff(v)
                bound = a.constant / coef
                if coef > 0:
                    hi[v] = min(hi[v], bound) if v in hi else bound
                else:
                    lo[v] = max(lo[v], bound)
        return {v: (ceil(lo[v]), int(hi[v] // 1)) for v in self.inputs}

    def sample_inputs(self, rng):
        if self.spec.theory == "prop":
            return {v: rng.random() < 0.5 for v in self.inputs}
        out = {}
        for v, (a, b) in self.input_ranges().items():
            out[v] = Fraction(rng.randint(a, b) if a <= b else a)
        return out

    def run(self, inputs, faulty, eps):
        val = dict(inputs)
        for c in self.contracts:
            y, rule = self.rules[c.name]
            holds = all(self.theory.evaluate(a, val) for _, a in c.assumptions)
            bad = c.name in faulty or not holds
            if self.spec.theory == "prop":
                good = evaluate_prop(rule, val)
                val[y] = (not good) if bad else good
            else:
                tight = min(
                    (g.constant - sum(cv * val[v] for v, cv in g.coeffs if v != y)) / cy
                    for cy, g in rule
                )
                val[y] = tight + eps if bad else tight
        return val


def _system_verdicts(system, theory, val):
    ok_a = all(theory.evaluate(t, val) for _, t in system.assumptions)
    bad_g = {tid for tid, t in system.guarantees if not theory.evaluate(t, val)}
    return ok_a, bad_g


def inject_fault(spec: SystemSpec, log_seed, targets, system=None):
    """Complete log in which exactly ``targets`` fail and the failure shows at system level.

    Every target is FAIL, no other component is FAIL, system assumptions
    hold, some system guarantee is violated, and repairing any single
    target clears at least one of the violated system guarantees.  Raises
    :class:`NoWitnessError` when no such log turns up within the retry
    budget.
    """
    if not targets:
        raise ValueError("inject_fault needs at least one target component")
    model = _Model(spec)
    by_label = {model.order.label(n): n for n in model.order.names}
    unknown = {t for t in targets if t not in model.rules and t not in by_label}
    if unknown:
        raise ValueError(f"unknown target components {sorted(unknown)}")
    names = {t if t in model.rules else by_label[t] for t in targets}
    labels = {model.order.label(n) for n in names}
    if system is None:
        system, _ = build_system(model.order)
    rng = random.Random(f"log:{log_seed}:{sorted(targets)}")
    for attempt in range(MAX_TRIES):
        inputs = model.sample_inputs(rng)
        eps = _EPSILONS[attempt % len(_EPSILONS)]
        val = model.run(inputs, names, eps)
        if oracle_diagnose(spec, val, model) != labels:
            continue
        ok_a, bad_g = _system_verdicts(system, model.theory, val)
        if not ok_a or not bad_g:
            continue
        if all(_repair_shows(model, system, inputs, names, t, eps, bad_g) for t in names):
            return val
    raise NoWitnessError(
        f"no observable independent fault for targets {sorted(targets)} (log seed {log_seed})"
    )


def _repair_shows(model, system, inputs, targets, t, eps, bad_g):
    val = model.run(inputs, targets - {t}, eps)
    _, still = _system_verdicts(system, model.theory, val)
    return bool(bad_g - still)


def oracle_diagnose(spec: SystemSpec, log, model=None):
    """Components with FAIL status under the log; checks every term of every component."""
    order = model.order if model is not None else spec.order()
    return {order.label(c.name) for c in order.contracts if evaluate_status(c, log)[0] is Status.FAIL}


def oracle_term_count(spec: SystemSpec):
    return sum(len(c.assumptions) + len(c.guarantees) for c in spec.contracts())
