"""Linear inequality terms over the rationals.

A :class:`LinearTerm` is one constraint ``sum(c_v * v) <= constant`` held in a
canonical form, so structural equality coincides with syntactic identity of
the normalized constraint.  Everything is computed with :class:`Fraction`;
no floating point enters the decision procedures.

Implication is decided by Fourier-Motzkin elimination with strictness
tracking, which is exact for rational-valued semantics.  Variable
elimination against a context of identified terms is the primitive that
contract composition and fault tracing are built on.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import EliminationError, MissingVariableError, TermSyntaxError

__all__ = [
    "LinearTerm",
    "TRUE",
    "FALSE",
    "parse_linear",
    "parse_linear_multi",
    "evaluate_linear",
    "implies_linear",
    "feasible_linear",
    "eliminate_by_refinement_linear",
    "eliminate_by_relaxation_linear",
    "to_fraction",
]


def to_fraction(value):
    """Exact conversion of ints, Fractions and numeric strings (``"3/4"``, ``"0.1"``)."""
    if isinstance(value, bool):
        raise TypeError("Boolean value where a rational was expected")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # floats are accepted only through their shortest decimal repr
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(num.strip()) / Fraction(den.strip())
        return Fraction(text)
    raise TypeError(f"cannot interpret {value!r} as a rational")


@dataclass(frozen=True)
class LinearTerm:
    """``sum(coeffs[v] * v) <= constant`` in canonical form.

    Use :meth:`make` rather than the constructor; it removes zero
    coefficients and scales the row (by a positive factor only, since a
    negative one would flip the relation) to coprime integers.  A term with
    no variables is either the TRUE marker ``0 <= 0`` or the FALSE marker
    ``0 <= -1``.
    """

    coeffs: tuple  # sorted tuple of (var, Fraction)
    constant: Fraction

    @classmethod
    def make(cls, coeffs: Mapping[str, object], constant=0) -> "LinearTerm":
        items = {}
        for var, c in coeffs.items():
            c = to_fraction(c)
            if c != 0:
                items[var] = c
        constant = to_fraction(constant)
        if not items:
            return TRUE if constant >= 0 else FALSE
        values = list(items.values()) + [constant]
        den = math.lcm(*(v.denominator for v in values))
        nums = [int(v * den) for v in values]
        g = math.gcd(*nums)
        scale = Fraction(den, g)
        return cls(
            tuple(sorted((v, c * scale) for v, c in items.items())),
            constant * scale,
        )

    @property
    def vars(self) -> frozenset:
        return frozenset(v for v, _ in self.coeffs)

    def coeff(self, var) -> Fraction:
        for v, c in self.coeffs:
            if v == var:
                return c
        return Fraction(0)

    def as_dict(self):
        return dict(self.coeffs)

    @property
    def is_true(self):
        return not self.coeffs and self.constant >= 0

    @property
    def is_false(self):
        return not self.coeffs and self.constant < 0

    def evaluate(self, valuation):
        return evaluate_linear(self, valuation)

    def __str__(self):
        if not self.coeffs:
            return "true" if self.is_true else "false"
        coeffs, rel, const = self.coeffs, "<=", self.constant
        if all(c < 0 for _, c in coeffs):
            coeffs = tuple((v, -c) for v, c in coeffs)
            rel, const = ">=", -const
        else:
            # lead with a positive coefficient: "o - a <= 0" rather than "-a + o <= 0"
            coeffs = tuple(sorted(coeffs, key=lambda vc: vc[1] < 0))
        parts = []
        for k, (v, c) in enumerate(coeffs):
            mag = abs(c)
            body = v if mag == 1 else f"{mag}*{v}"
            if k == 0:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return f"{' '.join(parts)} {rel} {const}"

    def __repr__(self):
        return f"LinearTerm({str(self)!r})"


TRUE = LinearTerm((), Fraction(0))
FALSE = LinearTerm((), Fraction(-1))


def _combine(t: LinearTerm, k: LinearTerm, lam: Fraction) -> LinearTerm:
    """``t - lam * k`` as a canonical term."""
    coeffs = t.as_dict()
    for v, c in k.coeffs:
        coeffs[v] = coeffs.get(v, 0) - lam * c
    return LinearTerm.make(coeffs, t.constant - lam * k.constant)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>\d+(?:\.\d*)?|\.\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_'@]*)"
    r"|(?P<op><=|>=|==|≤|≥|=|\+|-|\*|/|\(|\))"
    r")"
)
_RELATIONS = {"<=": "<=", "≤": "<=", ">=": ">=", "≥": ">=", "=": "=", "==": "="}


def _tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TermSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        start = m.start(m.lastgroup)
        out.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _AffineParser:
    """Recursive descent over affine expressions; values are (coeffs, const)."""

    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise TermSyntaxError(msg, self.text, tok[2])

    def expr(self):
        acc = self.product()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.product()
            acc = _add(acc, rhs, 1 if op == "+" else -1)
        return acc

    def product(self):
        acc = self.unary()
        while True:
            kind, val, _ = self.peek()
            if val == "*":
                tok = self.take()
                acc = self._mul(acc, self.unary(), tok)
            elif val == "/":
                tok = self.take()
                rhs = self.unary()
                if rhs[0] or rhs[1] == 0:
                    self.fail("division by a non-constant or zero", tok)
                acc = _scale(acc, 1 / rhs[1])
            elif kind in ("ident", "num") or val == "(":
                # implicit multiplication, as in 2o'
                tok = self.peek()
                acc = self._mul(acc, self.unary(), tok)
            else:
                return acc

    def _mul(self, lhs, rhs, tok):
        if lhs[0] and rhs[0]:
            self.fail("nonlinear product of two variables", tok)
        if lhs[0]:
            return _scale(lhs, rhs[1])
        return _scale(rhs, lhs[1])

    def unary(self):
        kind, val, pos = self.peek()
        if val in ("+", "-"):
            self.take()
            inner = self.unary()
            return inner if val == "+" else _scale(inner, -1)
        if kind == "num":
            self.take()
            return ({}, Fraction(val))
        if kind == "ident":
            self.take()
            if val in ("true", "false"):
                self.fail("Boolean literal inside an arithmetic expression")
            return ({val: Fraction(1)}, Fraction(0))
        if val == "(":
            self.take()
            inner = self.expr()
            if self.peek()[1] != ")":
                self.fail("expected ')'")
            self.take()
            return inner
        self.fail("expected a number, variable or '('")


def _add(a, b, sign):
    coeffs = dict(a[0])
    for v, c in b[0].items():
        coeffs[v] = coeffs.get(v, 0) + sign * c
    return ({v: c for v, c in coeffs.items() if c != 0}, a[1] + sign * b[1])


def _scale(a, k):
    return ({v: c * k for v, c in a[0].items() if c * k != 0}, a[1] * k)


def parse_linear_multi(text: str) -> list:
    """Parse ``lhs REL rhs``; ``=`` yields the two directions ``<=`` and ``>=``."""
    stripped = text.strip()
    if stripped in ("true", "false"):
        return [TRUE if stripped == "true" else FALSE]
    p = _AffineParser(text)
    lhs = p.expr()
    kind, val, pos = p.peek()
    if kind != "op" or val not in _RELATIONS:
        p.fail("expected one of <=, >=, =")
    rel = _RELATIONS[p.take()[1]]
    rhs = p.expr()
    if p.peek()[0] != "end":
        p.fail("unexpected trailing input")
    # lhs - rhs REL 0  ->  coeffs . v  REL  -const
    coeffs, const = _add(lhs, rhs, -1)
    le = LinearTerm.make(coeffs, -const)
    ge = LinearTerm.make({v: -c for v, c in coeffs.items()}, const)
    if rel == "<=":
        return [le]
    if rel == ">=":
        return [ge]
    return [le, ge]


def parse_linear(text: str) -> LinearTerm:
    """Parse a single non-strict inequality such as ``"o + i <= 3"``."""
    terms = parse_linear_multi(text)
    if len(terms) != 1:
        raise TermSyntaxError(
            "equality denotes two terms; use parse_linear_multi", text, text.find("=")
        )
    return terms[0]


# ---------------------------------------------------------------------------
# semantics

def evaluate_linear(t: LinearTerm, valuation: Mapping) -> bool:
    total = Fraction(0)
    for v, c in t.coeffs:
        if v not in valuation:
            raise MissingVariableError(v)
        total += c * to_fraction(valuation[v])
    return total <= t.constant


def _normalize_row(coeffs, const, strict):
    """Scale a row so its first coefficient is +-1; returns a hashable key."""
    if not coeffs:
        return None, const, strict
    first = min(coeffs)
    s = abs(coeffs[first])
    key = tuple(sorted((v, c / s) for v, c in coeffs.items()))
    return key, const / s, strict


def _reduce(rows):
    """Drop dominated parallel rows; return None when a constant row is violated."""
    best = {}
    for coeffs, const, strict in rows:
        key, const, strict = _normalize_row(coeffs, const, strict)
        if key is None:
            if const < 0 or (strict and const == 0):
                return None
            continue
        old = best.get(key)
        if old is None or const < old[0] or (const == old[0] and strict and not old[1]):
            best[key] = (const, strict)
    return [(dict(k), c, s) for k, (c, s) in best.items()]


def _fm_feasible(rows) -> bool:
    rows = _reduce(rows)
    while rows:
        if rows is None:
            return False
        counts = {}
        for coeffs, _, _ in rows:
            for v, c in coeffs.items():
                p, n = counts.get(v, (0, 0))
                counts[v] = (p + 1, n) if c > 0 else (p, n + 1)
        var = min(counts, key=lambda v: (counts[v][0] * counts[v][1], v))
        pos, neg, rest = [], [], []
        for row in rows:
            c = row[0].get(var, 0)
            (pos if c > 0 else neg if c < 0 else rest).append(row)
        for pc, pk, ps in pos:
            a = pc[var]
            for nc, nk, ns in neg:
                b = -nc[var]
                coeffs = {}
                for v, c in pc.items():
                    coeffs[v] = coeffs.get(v, 0) + b * c
                for v, c in nc.items():
                    coeffs[v] = coeffs.get(v, 0) + a * c
                coeffs = {v: c for v, c in coeffs.items() if c != 0}
                rest.append((coeffs, b * pk + a * nk, ps or ns))
        rows = _reduce(rest)
    return rows is not None


def feasible_linear(terms: Iterable[LinearTerm]) -> bool:
    """True iff some rational valuation satisfies every term."""
    return _fm_feasible([(t.as_dict(), t.constant, False) for t in terms])


def implies_linear(context: Iterable[LinearTerm], t: LinearTerm) -> bool:
    """Decide ``AND(context) => t`` over the rationals, exactly.

    The negation of ``a.x <= c`` is the strict ``-a.x < -c``; the conjunction
    with the context is infeasible iff the implication holds.
    """
    if t.is_true:
        return True
    rows = [(k.as_dict(), k.constant, False) for k in context]
    rows.append(({v: -c for v, c in t.coeffs}, -t.constant, True))
    return not _fm_feasible(rows)


# ---------------------------------------------------------------------------
# elimination

_SEARCH_BUDGET = 4000


def _eliminate(t, elim, context, refine):
    elim = frozenset(elim)
    context = list(context)
    if not (t.vars & elim):
        return t, []
    budget = [_SEARCH_BUDGET]
    best = [None]

    def bad(term):
        return term.is_false if refine else term.is_true

    def search(cur, used):
        if budget[0] <= 0:
            return True
        budget[0] -= 1
        pending = sorted(cur.vars & elim)
        if not pending:
            if best[0] is None or (bad(best[0][0]) and not bad(cur)):
                best[0] = (cur, list(used))
            return not bad(cur)
        x = pending[0]
        a = cur.coeff(x)
        cands = []
        for pos, (tid, k) in enumerate(context):
            if tid in used:
                continue
            b = k.coeff(x)
            if b == 0 or ((a > 0) == (b > 0)) != refine:
                continue
            new = _combine(cur, k, a / b)
            fresh = len((new.vars & elim) - set(pending))
            cands.append((fresh, pos, tid, new))
        cands.sort(key=lambda c: (c[0], c[1]))
        for _, _, tid, new in cands:
            used.append(tid)
            done = search(new, used)
            used.pop()
            if done:
                return True
        return False

    search(t, [])
    if best[0] is None:
        x = min(t.vars & elim)
        kind = "refinement" if refine else "relaxation"
        raise EliminationError(f"no {kind} of {t} eliminates {x} with the given context")
    result, used = best[0]
    if refine and result.is_false:
        raise EliminationError(f"refinement of {t} over {sorted(elim)} collapses to false")
    return result, _minimize(t, result, used, dict(context), refine)


def _minimize(t, result, used, lookup, refine):
    """Drop context terms that the soundness implication does not need."""
    used = list(used)
    for tid in reversed(list(used)):
        trial = [lookup[u] for u in used if u != tid]
        ok = implies_linear(trial + [result], t) if refine else implies_linear(trial + [t], result)
        if ok:
            used.remove(tid)
    return used


def eliminate_by_refinement_linear(
    t: LinearTerm, elim: Iterable[str], context: Sequence
) -> tuple:
    """Strengthen ``t`` into ``t'`` free of ``elim`` so that ``t' AND used => t``.

    ``context`` is a sequence of ``(term_id, LinearTerm)``; its order is the
    preference order among equally applicable terms.  Variables are removed
    in lexicographic order, one context term per step.  Returns ``(t', used)``
    where ``used`` lists the term ids that were combined into ``t'``.
    """
    return _eliminate(t, elim, context, refine=True)


def eliminate_by_relaxation_linear(
    t: LinearTerm, elim: Iterable[str], context: Sequence
) -> tuple:
    """Weaken ``t`` into ``t'`` free of ``elim`` so that ``t AND used => t'``."""
    return _eliminate(t, elim, context, refine=False)
