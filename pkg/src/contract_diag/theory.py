"""Uniform access to the two term theories, keyed by name."""

from . import linear, prop
from .errors import ContractError


class LinearTheory:
    name = "linear"

    def parse(self, text):
        return linear.parse_linear_multi(text)

    def implies(self, context, t):
        return linear.implies_linear(context, t)

    def satisfiable(self, terms):
        return linear.feasible_linear(terms)

    def refine(self, t, elim, context):
        return linear.eliminate_by_refinement_linear(t, elim, context)

    def relax(self, t, elim, context):
        return linear.eliminate_by_relaxation_linear(t, elim, context)

    def evaluate(self, t, valuation):
        return linear.evaluate_linear(t, valuation)

    def coerce(self, value):
        return linear.to_fraction(value)

    def accepts(self, term):
        return isinstance(term, linear.LinearTerm)


class PropTheory:
    name = "prop"

    def parse(self, text):
        return [prop.parse_prop(text)]

    def implies(self, context, t):
        return prop.implies_prop(context, t)

    def satisfiable(self, terms):
        return prop.satisfiable_prop(terms)

    def refine(self, t, elim, context):
        return prop.eliminate_prop(t, elim, context, prop.REFINEMENT)

    def relax(self, t, elim, context):
        return prop.eliminate_prop(t, elim, context, prop.RELAXATION)

    def evaluate(self, t, valuation):
        return prop.evaluate_prop(t, valuation)

    def coerce(self, value):
        return prop.to_bool(value)

    def accepts(self, term):
        return isinstance(term, prop.PropTerm)


LINEAR = LinearTheory()
PROP = PropTheory()
THEORIES = {"linear": LINEAR, "prop": PROP}


def get_theory(name):
    try:
        return THEORIES[name]
    except KeyError:
        raise ContractError(f"unknown theory {name!r}; expected one of {sorted(THEORIES)}") from None
