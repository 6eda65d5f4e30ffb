"""Propositional terms: AST, parser, evaluation, implication and elimination.

Implication is decided by enumerating assignments, vectorized with numpy so
a query over up to :data:`MAX_QUERY_VARS` variables stays fast.  Elimination
substitutes a defining equivalence ``x <=> e`` from the context when one is
available and otherwise falls back to Boolean quantification (universal for
refinement, existential for relaxation).
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    CapacityError,
    EliminationError,
    MissingVariableError,
    TermSyntaxError,
)

__all__ = [
    "PropTerm", "Var", "Const", "Not", "And", "Or", "Implies", "Iff",
    "TRUE", "FALSE", "not_", "and_", "or_",
    "parse_prop", "evaluate_prop", "implies_prop", "equivalent_prop",
    "satisfiable_prop", "truth_table", "simplify", "substitute",
    "exists", "forall", "eliminate_prop", "to_bool", "MAX_QUERY_VARS",
]

MAX_QUERY_VARS = 24

REFINEMENT = "refinement"
RELAXATION = "relaxation"


class PropTerm:
    """Base class of the immutable propositional AST."""

    __slots__ = ("_hash", "_vars")
    prec = 9

    def _key(self):
        raise NotImplementedError

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and hash(self) == hash(other)
            and self._key() == other._key()
        )

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            h = hash((type(self).__name__, self._key()))
            object.__setattr__(self, "_hash", h)
            return h

    @property
    def vars(self) -> frozenset:
        try:
            return self._vars
        except AttributeError:
            vs = self._collect_vars()
            object.__setattr__(self, "_vars", vs)
            return vs

    def _collect_vars(self):
        out = set()
        for child in self.children:
            out |= child.vars
        return frozenset(out)

    children: tuple = ()

    @property
    def is_true(self):
        return self is TRUE or (isinstance(self, Const) and self.value)

    @property
    def is_false(self):
        return isinstance(self, Const) and not self.value

    def evaluate(self, valuation):
        return evaluate_prop(self, valuation)

    def __repr__(self):
        return f"{type(self).__name__}({str(self)!r})"

    def _wrap(self, child, min_prec):
        s = str(child)
        return f"({s})" if child.prec < min_prec else s


class Var(PropTerm):
    __slots__ = ("name",)

    def __init__(self, name):
        object.__setattr__(self, "name", name)

    def __setattr__(self, *_):
        raise AttributeError("PropTerm is immutable")

    def _key(self):
        return self.name

    def _collect_vars(self):
        return frozenset([self.name])

    def __str__(self):
        return self.name


class Const(PropTerm):
    __slots__ = ("value",)

    def __init__(self, value):
        object.__setattr__(self, "value", bool(value))

    def __setattr__(self, *_):
        raise AttributeError("PropTerm is immutable")

    def _key(self):
        return self.value

    def _collect_vars(self):
        return frozenset()

    def __str__(self):
        return "true" if self.value else "false"


class Not(PropTerm):
    __slots__ = ("arg",)
    prec = 4

    def __init__(self, arg):
        object.__setattr__(self, "arg", arg)

    def __setattr__(self, *_):
        raise AttributeError("PropTerm is immutable")

    @property
    def children(self):
        return (self.arg,)

    def _key(self):
        return (self.arg,)

    def __str__(self):
        return "!" + self._wrap(self.arg, 5)


class _NAry(PropTerm):
    __slots__ = ("args",)
    symbol = ""

    def __init__(self, args):
        args = tuple(args)
        if len(args) < 2:
            raise ValueError(f"{type(self).__name__} needs at least two children")
        object.__setattr__(self, "args", args)

    def __setattr__(self, *_):
        raise AttributeError("PropTerm is immutable")

    @property
    def children(self):
        return self.args

    def _key(self):
        return self.args

    def __str__(self):
        return f" {self.symbol} ".join(self._wrap(a, self.prec + 1) for a in self.args)


class And(_NAry):
    __slots__ = ()
    prec = 3
    symbol = "&"


class Or(_NAry):
    __slots__ = ()
    prec = 2
    symbol = "|"


class _Binary(PropTerm):
    __slots__ = ("lhs", "rhs")

    def __init__(self, lhs, rhs):
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "rhs", rhs)

    def __setattr__(self, *_):
        raise AttributeError("PropTerm is immutable")

    @property
    def children(self):
        return (self.lhs, self.rhs)

    def _key(self):
        return (self.lhs, self.rhs)


class Implies(_Binary):
    __slots__ = ()
    prec = 1

    def __str__(self):
        # right associative
        return f"{self._wrap(self.lhs, 2)} => {self._wrap(self.rhs, 1)}"


class Iff(_Binary):
    __slots__ = ()
    prec = 0

    def __str__(self):
        # left associative
        return f"{self._wrap(self.lhs, 0)} <=> {self._wrap(self.rhs, 1)}"


TRUE = Const(True)
FALSE = Const(False)


def not_(a):
    return a.arg if isinstance(a, Not) else Not(a)


def _flat(cls, args):
    out = []
    for a in args:
        if isinstance(a, cls):
            out.extend(a.args)
        else:
            out.append(a)
    return out


def and_(*args):
    args = _flat(And, args)
    if not args:
        return TRUE
    return args[0] if len(args) == 1 else And(args)


def or_(*args):
    args = _flat(Or, args)
    if not args:
        return FALSE
    return args[0] if len(args) == 1 else Or(args)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(<=>|=>|!|&|\||\(|\)|[A-Za-z_][A-Za-z0-9_'@]*)")


def _tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise TermSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        out.append((m.group(1), m.start(1)))
        pos = m.end()
    out.append(("", len(text)))
    return out


class _Parser:
    # precedence, loosest first: <=> (left), => (right), |, &, !
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg):
        raise TermSyntaxError(msg, self.text, self.toks[self.i][1])

    def iff(self):
        lhs = self.implies()
        while self.peek() == "<=>":
            self.take()
            lhs = Iff(lhs, self.implies())
        return lhs

    def implies(self):
        lhs = self.disj()
        if self.peek() == "=>":
            self.take()
            return Implies(lhs, self.implies())
        return lhs

    def disj(self):
        args = [self.conj()]
        while self.peek() == "|":
            self.take()
            args.append(self.conj())
        return or_(*args)

    def conj(self):
        args = [self.unary()]
        while self.peek() == "&":
            self.take()
            args.append(self.unary())
        return and_(*args)

    def unary(self):
        tok = self.peek()
        if tok == "!":
            self.take()
            return not_(self.unary())
        if tok == "(":
            self.take()
            inner = self.iff()
            if self.peek() != ")":
                self.fail("expected ')'")
            self.take()
            return inner
        if tok and (tok[0].isalpha() or tok[0] == "_"):
            self.take()
            if tok == "true":
                return TRUE
            if tok == "false":
                return FALSE
            return Var(tok)
        self.fail("expected a variable, constant, '!' or '('")


def parse_prop(text: str) -> PropTerm:
    """Parse ``!``, ``&``, ``|``, ``=>``, ``<=>``, parentheses, ``true``/``false``."""
    p = _Parser(text)
    if p.peek() == "":
        p.fail("empty formula")
    term = p.iff()
    if p.peek() != "":
        p.fail("unexpected trailing input")
    return term


# ---------------------------------------------------------------------------
# semantics

def to_bool(value):
    """Log cells accept Python bools, 0/1, and the strings true/false/1/0."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    if isinstance(value, str) and value.strip().lower() in ("true", "false", "1", "0"):
        return value.strip().lower() in ("true", "1")
    raise TypeError(f"cannot interpret {value!r} as a Boolean")


def evaluate_prop(t: PropTerm, valuation: Mapping) -> bool:
    if isinstance(t, Var):
        if t.name not in valuation:
            raise MissingVariableError(t.name)
        return to_bool(valuation[t.name])
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Not):
        return not evaluate_prop(t.arg, valuation)
    if isinstance(t, And):
        return all(evaluate_prop(a, valuation) for a in t.args)
    if isinstance(t, Or):
        return any(evaluate_prop(a, valuation) for a in t.args)
    if isinstance(t, Implies):
        return (not evaluate_prop(t.lhs, valuation)) or evaluate_prop(t.rhs, valuation)
    if isinstance(t, Iff):
        return evaluate_prop(t.lhs, valuation) == evaluate_prop(t.rhs, valuation)
    raise TypeError(f"not a PropTerm: {t!r}")


# Tables are bit-packed: a query over n variables is a uint8 array of
# 2**n / 8 bytes, assignment i at bit i (most significant bit first).
_MIN_VARS = 3  # pad so a table fills at least one byte
_PATTERN_CACHE = {}


def _patterns(n):
    """Packed column of every variable position for an n-variable table."""
    hit = _PATTERN_CACHE.get(n)
    if hit is None:
        idx = np.arange(1 << n, dtype=np.uint32)
        hit = [np.packbits(((idx >> np.uint32(n - 1 - j)) & 1).astype(bool)) for j in range(n)]
        if n <= 20:
            _PATTERN_CACHE[n] = hit
    return hit


def _columns(names):
    n = len(names)
    if n > MAX_QUERY_VARS:
        raise CapacityError(
            f"query over {n} variables exceeds the limit of {MAX_QUERY_VARS}"
        )
    pats = _patterns(max(n, _MIN_VARS))
    return dict(zip(names, pats))


# tables above this many bytes are recomputed rather than cached per subterm
_MEMO_BYTES = 1 << 13


def _table(t, cols, size, memo):
    hit = memo.get(id(t))
    if hit is not None:
        return hit[1]
    if isinstance(t, Var):
        out = cols[t.name]
    elif isinstance(t, Const):
        out = np.full(size, 0xFF if t.value else 0, dtype=np.uint8)
    elif isinstance(t, Not):
        out = ~_table(t.arg, cols, size, memo)
    elif isinstance(t, And):
        out = _table(t.args[0], cols, size, memo).copy()
        for a in t.args[1:]:
            out &= _table(a, cols, size, memo)
    elif isinstance(t, Or):
        out = _table(t.args[0], cols, size, memo).copy()
        for a in t.args[1:]:
            out |= _table(a, cols, size, memo)
    elif isinstance(t, Implies):
        out = ~_table(t.lhs, cols, size, memo)
        out |= _table(t.rhs, cols, size, memo)
    elif isinstance(t, Iff):
        out = _table(t.lhs, cols, size, memo) ^ _table(t.rhs, cols, size, memo)
        np.invert(out, out=out)
    else:
        raise TypeError(f"not a PropTerm: {t!r}")
    if size <= _MEMO_BYTES or isinstance(t, Var):
        memo[id(t)] = (t, out)
    return out


def _size(names):
    return max(1, (1 << len(names)) // 8)


def truth_table(t: PropTerm, names: Sequence[str]) -> np.ndarray:
    """Values of ``t`` on all ``2**len(names)`` assignments, first name most significant."""
    names = list(names)
    missing = t.vars - set(names)
    if missing:
        raise MissingVariableError(min(missing))
    n = len(names)
    padded = names + [f"\0pad{j}" for j in range(_MIN_VARS - n)]
    bits = np.unpackbits(_table(t, _columns(padded), _size(padded), {})).astype(bool)
    # with padding, every assignment of the real variables repeats 2**pad times
    return bits[:: 1 << (len(padded) - n)]


def _conj_table(terms, names):
    names = list(names) + [f"\0pad{j}" for j in range(_MIN_VARS - len(names))]
    cols = _columns(names)
    size = _size(names)
    memo = {}
    acc = np.full(size, 0xFF, dtype=np.uint8)
    for k in terms:
        acc &= _table(k, cols, size, memo)
    return acc, cols, size, memo


def _components(terms):
    """Group terms whose variable sets are transitively connected."""
    groups = []
    for t in terms:
        vs = set(t.vars)
        merged = [t]
        keep = []
        for gvars, gterms in groups:
            if gvars & vs:
                vs |= gvars
                merged.extend(gterms)
            else:
                keep.append((gvars, gterms))
        keep.append((vs, merged))
        groups = keep
    return groups


def satisfiable_prop(terms: Iterable[PropTerm]) -> bool:
    for gvars, gterms in _components(list(terms)):
        acc = _conj_table(gterms, sorted(gvars))[0]
        if not acc.any():
            return False
    return True


def implies_prop(context: Iterable[PropTerm], t: PropTerm) -> bool:
    """Decide whether ``AND(context) => t`` is a tautology.

    Context terms not connected to ``t`` through shared variables only
    matter if they are jointly unsatisfiable, so they are checked separately
    and the enumeration runs over the connected part alone.  Raises
    :class:`CapacityError` when that part exceeds :data:`MAX_QUERY_VARS`.
    """
    context = list(context)
    if t.is_true:
        return True
    focus = set(t.vars)
    relevant, others = [], list(context)
    changed = True
    while changed:
        changed = False
        rest = []
        for k in others:
            if k.vars & focus or not k.vars:
                relevant.append(k)
                focus |= k.vars
                changed = True
            else:
                rest.append(k)
        others = rest
    if others and not satisfiable_prop(others):
        return True
    names = sorted(focus)
    acc, cols, size, memo = _conj_table(relevant, names)
    return bool(np.all((~acc | _table(t, cols, size, memo)) == 0xFF))


def equivalent_prop(a: PropTerm, b: PropTerm) -> bool:
    return implies_prop([a], b) and implies_prop([b], a)


# ---------------------------------------------------------------------------
# rewriting

def substitute(t: PropTerm, var: str, repl: PropTerm) -> PropTerm:
    if var not in t.vars:
        return t
    if isinstance(t, Var):
        return repl
    if isinstance(t, Not):
        return not_(substitute(t.arg, var, repl))
    if isinstance(t, And):
        return and_(*(substitute(a, var, repl) for a in t.args))
    if isinstance(t, Or):
        return or_(*(substitute(a, var, repl) for a in t.args))
    if isinstance(t, Implies):
        return Implies(substitute(t.lhs, var, repl), substitute(t.rhs, var, repl))
    if isinstance(t, Iff):
        return Iff(substitute(t.lhs, var, repl), substitute(t.rhs, var, repl))
    return t


def _dedupe(args):
    seen, out = set(), []
    for a in args:
        if a not in seen:
            seen.add(a)
            out.append(a)
    return out


def _absorb(args, inner_cls):
    # A & (A | B) -> A  and  A | (A & B) -> A
    plain = set(a for a in args if not isinstance(a, inner_cls))
    out = []
    for a in args:
        if isinstance(a, inner_cls) and any(x in plain for x in a.args):
            continue
        out.append(a)
    return out


def simplify(t: PropTerm) -> PropTerm:
    """Constant folding, flattening, duplicate removal and absorption.

    Deliberately not a minimizer: the output stays close to the input shape.
    """
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, Not):
        a = simplify(t.arg)
        if isinstance(a, Const):
            return FALSE if a.value else TRUE
        return not_(a)
    if isinstance(t, (And, Or)):
        is_and = isinstance(t, And)
        unit, zero = (TRUE, FALSE) if is_and else (FALSE, TRUE)
        args = _flat(type(t), (simplify(a) for a in t.args))
        if zero in args:
            return zero
        args = _dedupe([a for a in args if a != unit])
        args = _absorb(args, Or if is_and else And)
        return (and_ if is_and else or_)(*args)
    if isinstance(t, Implies):
        lhs, rhs = simplify(t.lhs), simplify(t.rhs)
        if lhs.is_true:
            return rhs
        if lhs.is_false or rhs.is_true:
            return TRUE
        if rhs.is_false:
            return not_(lhs)
        return Implies(lhs, rhs)
    if isinstance(t, Iff):
        lhs, rhs = simplify(t.lhs), simplify(t.rhs)
        for a, b in ((lhs, rhs), (rhs, lhs)):
            if a.is_true:
                return b
            if a.is_false:
                return not_(b)
        return Iff(lhs, rhs)
    raise TypeError(f"not a PropTerm: {t!r}")


def exists(var: str, t: PropTerm) -> PropTerm:
    return simplify(or_(substitute(t, var, TRUE), substitute(t, var, FALSE)))


def forall(var: str, t: PropTerm) -> PropTerm:
    return simplify(and_(substitute(t, var, TRUE), substitute(t, var, FALSE)))


def _definition(k: PropTerm, var: str):
    """If ``k`` is ``var <=> e`` (either side) with ``var`` not in ``e``, return ``e``."""
    if not isinstance(k, Iff):
        return None
    for side, other in ((k.lhs, k.rhs), (k.rhs, k.lhs)):
        if isinstance(side, Var) and side.name == var and var not in other.vars:
            return other
    return None


def _sound(t, result, used_terms, refine):
    if refine:
        return implies_prop(list(used_terms) + [result], t)
    return implies_prop(list(used_terms) + [t], result)


def eliminate_prop(
    t: PropTerm, elim: Iterable[str], context: Sequence, direction: str = REFINEMENT
) -> tuple:
    """Remove the variables ``elim`` from ``t`` using identified context terms.

    ``direction`` is ``"refinement"`` (result and used context imply ``t``)
    or ``"relaxation"`` (``t`` and used context imply the result).  For each
    variable, in lexicographic order, a context equivalence ``x <=> e`` is
    substituted when one exists; otherwise the first context term (in the
    given order) that makes the quantified result strictly more informative
    than quantifying ``t`` alone is folded in.  Returns ``(t', used_ids)``.
    """
    if direction not in (REFINEMENT, RELAXATION):
        raise ValueError(f"direction must be refinement or relaxation, got {direction!r}")
    refine = direction == REFINEMENT
    elim = frozenset(elim)
    context = list(context)
    lookup = dict(context)
    cur = simplify(t)
    if refine and cur.vars & elim:
        # a single context term that already implies t discharges it outright
        for tid, k in context:
            if not (k.vars & cur.vars & elim):
                continue
            try:
                if implies_prop([k], cur):
                    return TRUE, _minimize(t, TRUE, [tid], lookup, refine)
            except CapacityError:
                continue
    used = []
    spent = set()
    limit = 4 * (len(context) + len(elim)) + 8
    steps = 0
    while cur.vars & elim:
        steps += 1
        if steps > limit:
            raise EliminationError(f"elimination of {sorted(elim)} from {t} does not terminate")
        x = min(cur.vars & elim)
        for tid, k in context:
            if tid in spent:
                continue
            e = _definition(k, x)
            if e is not None:
                cur = simplify(substitute(cur, x, e))
                # a definition free of eliminated variables cannot cycle, so it stays available
                if e.vars & elim:
                    spent.add(tid)
                if tid not in used:
                    used.append(tid)
                break
        else:
            if not refine and _definition(cur, x) is not None:
                # t only defines x; every other term learns about x by substitution
                cur = TRUE
                continue
            cur, tid = _quantify_step(cur, x, context, spent, refine)
            if tid is not None:
                spent.add(tid)
                used.append(tid)
    if refine and cur.is_false:
        raise EliminationError(f"refinement of {t} over {sorted(elim)} collapses to false")
    return cur, _minimize(t, cur, used, lookup, refine)


def _quantify_step(cur, x, context, spent, refine):
    quant = forall if refine else exists
    base = quant(x, cur)
    for tid, k in context:
        if tid in spent or x not in k.vars:
            continue
        cand = quant(x, Implies(k, cur) if refine else and_(cur, k))
        if cand == base:
            continue
        try:
            helpful = not (implies_prop([cand], base) if refine else implies_prop([base], cand))
        except CapacityError:
            helpful = not (cand.is_false if refine else cand.is_true)
        if helpful:
            return cand, tid
    return base, None


def _minimize(t, result, used, lookup, refine):
    used = list(used)
    for tid in reversed(list(used)):
        trial = [lookup[u] for u in used if u != tid]
        try:
            if _sound(t, result, trial, refine):
                used.remove(tid)
        except CapacityError:
            break
    return used
