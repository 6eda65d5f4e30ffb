from fractions import Fraction

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from _oracles import lin_holds, lp_implies
from contract_diag.errors import EliminationError, MissingVariableError, TermSyntaxError
from contract_diag.ids import TermId
from contract_diag.linear import (
    FALSE,
    TRUE,
    LinearTerm,
    eliminate_by_refinement_linear,
    eliminate_by_relaxation_linear,
    evaluate_linear,
    feasible_linear,
    implies_linear,
    parse_linear,
    parse_linear_multi,
)

VARS = ("w", "x", "y", "z")


def gid(k):
    return TermId("K", "guarantee", k)


@st.composite
def terms(draw, names=VARS, max_vars=3):
    vs = draw(st.lists(st.sampled_from(names), min_size=1, max_size=max_vars, unique=True))
    coeffs = {v: draw(st.integers(-3, 3).filter(bool)) for v in vs}
    return LinearTerm.make(coeffs, draw(st.integers(-5, 5)))


valuations = st.fixed_dictionaries(
    {v: st.fractions(min_value=-10, max_value=10, max_denominator=6) for v in VARS}
)


# -- parsing -----------------------------------------------------------------

def test_parse_sum():
    assert parse_linear("o + i <= 3").as_dict() == {"o": 1, "i": 1}
    assert parse_linear("o + i <= 3").constant == 3


def test_parse_ge_flips_sign():
    t = parse_linear("i >= 0")
    assert t.as_dict() == {"i": -1} and t.constant == 0


def test_parse_rearranges_both_sides():
    t = parse_linear("2*o' >= 6 - o")
    assert t.as_dict() == {"o'": -2, "o": -1} and t.constant == -6


@settings(max_examples=100)
@given(o=st.fractions(-20, 20, max_denominator=7), p=st.fractions(-20, 20, max_denominator=7))
def test_rearranged_form_agrees_with_source(o, p):
    t = parse_linear("2*o' >= 6 - o")
    assert evaluate_linear(t, {"o": o, "o'": p}) == (2 * p >= 6 - o)


def test_parse_rationals():
    t = parse_linear("0.5*x + 1/3*y <= 1")
    # scaled to coprime integers
    assert t.as_dict() == {"x": 3, "y": 2} and t.constant == 6


def test_parse_equality_needs_multi():
    with pytest.raises(TermSyntaxError):
        parse_linear("x = 1")
    le, ge = parse_linear_multi("x = 1")
    assert le == parse_linear("x <= 1") and ge == parse_linear("x >= 1")


def test_parse_implicit_product():
    assert parse_linear("o + 2o' >= 6") == parse_linear("o + 2*o' >= 6")


@pytest.mark.parametrize("text", ["x * y <= 1", "x y <= 1", "x <=", "<= 3", "x + <= 2", "x $ 1", "x <= 1 <= 2"])
def test_parse_errors(text):
    with pytest.raises(TermSyntaxError):
        parse_linear(text)


def test_syntax_error_has_position():
    with pytest.raises(TermSyntaxError) as exc:
        parse_linear("x + $ <= 1")
    assert exc.value.pos == 4


def test_degenerate_terms_are_markers():
    assert parse_linear("x - x <= 1") == TRUE
    assert parse_linear("0 <= -2") == FALSE
    assert str(TRUE) == "true"


@given(terms())
def test_canonical_idempotent(t):
    assert parse_linear(str(t)) == t
    assert LinearTerm.make(t.as_dict(), t.constant) == t


# -- evaluation ----------------------------------------------------------------

def test_evaluate_examples():
    assert not evaluate_linear(parse_linear("o <= a"), {"o": 3, "a": 2})
    assert evaluate_linear(parse_linear("i <= 2"), {"i": 1})
    assert evaluate_linear(parse_linear("x <= 0"), {"x": 0})


def test_evaluate_missing_variable():
    with pytest.raises(MissingVariableError) as exc:
        evaluate_linear(parse_linear("x + y <= 0"), {"x": 1})
    assert "y" in str(exc.value)


def test_evaluate_rejects_boolean():
    with pytest.raises(TypeError):
        evaluate_linear(parse_linear("x <= 0"), {"x": True})


# -- implication -------------------------------------------------------------

def test_implies_chain():
    ctx = [parse_linear("o + i <= 3"), parse_linear("i >= 0")]
    t = parse_linear("o <= 5")
    assert lp_implies(ctx, t)
    assert implies_linear(ctx, t)


def test_implies_unconstrained():
    assert not implies_linear([], parse_linear("x <= 1"))


def test_implies_reflexive():
    t = parse_linear("x <= 1")
    assert implies_linear([t], t)


def test_implies_strictness_boundary():
    # x <= 1 does not give x <= 1 - tiny, but does give 2x <= 2
    assert not implies_linear([parse_linear("x <= 1")], parse_linear("x <= 0.999"))
    assert implies_linear([parse_linear("x <= 1")], parse_linear("2*x <= 2"))


def test_infeasible_context_implies_anything():
    ctx = [parse_linear("x <= 0"), parse_linear("x >= 1")]
    assert not feasible_linear(ctx)
    assert implies_linear(ctx, parse_linear("y <= -100"))


@settings(max_examples=300, suppress_health_check=[HealthCheck.too_slow])
@given(st.lists(terms(), max_size=4), terms())
def test_implies_matches_lp(ctx, t):
    assert implies_linear(ctx, t) == lp_implies(ctx, t)


@settings(max_examples=200)
@given(st.lists(terms(), max_size=4), terms(), st.lists(valuations, min_size=5, max_size=5))
def test_implication_consistent_with_evaluation(ctx, t, vals):
    if not implies_linear(ctx, t):
        return
    for v in vals:
        if all(lin_holds(k, v) for k in ctx):
            assert lin_holds(t, v)


# -- elimination -------------------------------------------------------------

def test_refinement_example():
    t = parse_linear("o <= 5")
    g1 = TermId("C1", "guarantee", 0)
    new, used = eliminate_by_refinement_linear(t, {"o"}, [(g1, parse_linear("o + i <= 3"))])
    assert new == parse_linear("-i <= 2") and used == [g1]
    assert lp_implies([new, parse_linear("o + i <= 3")], t)


def test_refinement_nothing_to_do():
    t = parse_linear("i <= 2")
    assert eliminate_by_refinement_linear(t, set(), []) == (t, [])


def test_refinement_to_true():
    g2 = TermId("C2", "guarantee", 0)
    new, used = eliminate_by_refinement_linear(parse_linear("b <= 5"), {"b"}, [(g2, parse_linear("b <= 3"))])
    assert new == TRUE and used == [g2]


def test_relaxation_example():
    g1 = TermId("C1", "guarantee", 0)
    t = parse_linear("-o - 2*o' <= -6")
    new, used = eliminate_by_relaxation_linear(t, {"o"}, [(g1, parse_linear("o + i <= 3"))])
    assert new == parse_linear("i - 2*o' <= -3") and used == [g1]


def test_relaxation_unchanged():
    t = parse_linear("o <= a")
    assert eliminate_by_relaxation_linear(t, set(), []) == (t, [])


def test_relaxation_through_upper_bound():
    # an upper bound on b caps o when o <= b
    g2 = TermId("C2", "guarantee", 0)
    new, used = eliminate_by_relaxation_linear(parse_linear("o <= b"), {"b"}, [(g2, parse_linear("b <= 3"))])
    assert new == parse_linear("o <= 3") and used == [g2]


def test_relaxation_failure():
    g2 = TermId("C2", "guarantee", 0)
    with pytest.raises(EliminationError):
        eliminate_by_relaxation_linear(parse_linear("o >= b"), {"b"}, [(g2, parse_linear("b <= 3"))])


def test_refinement_failure():
    with pytest.raises(EliminationError):
        eliminate_by_refinement_linear(parse_linear("o <= 5"), {"o"}, [(gid(0), parse_linear("o >= 1"))])


def test_tie_break_prefers_earlier_context():
    ctx = [(gid(0), parse_linear("b <= 3")), (gid(1), parse_linear("b <= 1"))]
    _, used = eliminate_by_refinement_linear(parse_linear("b <= 5"), {"b"}, ctx)
    assert used == [gid(0)]


def _check_elimination(t, elim, ctx, refine):
    fn = eliminate_by_refinement_linear if refine else eliminate_by_relaxation_linear
    try:
        new, used = fn(t, elim, ctx)
    except EliminationError:
        return None
    lookup = dict(ctx)
    assert not (new.vars & elim)
    assert len(set(used)) == len(used) and set(used) <= set(lookup)
    used_terms = [lookup[u] for u in used]

    def sound(extra):
        return lp_implies(extra + [new], t) if refine else lp_implies(extra + [t], new)

    assert sound(used_terms)
    for k in range(len(used)):
        assert not sound(used_terms[:k] + used_terms[k + 1:])
    return new, used


@settings(max_examples=150, suppress_health_check=[HealthCheck.too_slow])
@given(terms(), st.lists(terms(), min_size=1, max_size=4), st.sets(st.sampled_from(VARS), min_size=1, max_size=2),
       st.booleans())
def test_elimination_sound_and_minimal(t, ks, elim, refine):
    assume(t.vars & elim)
    ctx = [(gid(k), term) for k, term in enumerate(ks)]
    _check_elimination(t, frozenset(elim), ctx, refine)
