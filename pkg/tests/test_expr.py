import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tubefocal.exprcurve import (
    ExprSyntaxError,
    ExpressionError,
    UnknownIdentifier,
    diff,
    eval_jet,
    evaluate,
    parse_expr,
    to_text,
)
from tubefocal.exprcurve.expr import Binary, Const, Num, Unary, Var, variables_of


def test_cos_of_scaled_variable():
    tree = parse_expr("cos(u/sqrt(2))")
    assert isinstance(tree, Unary) and tree.op == "cos"
    assert math.isclose(evaluate(tree, {"u": 1.0}), math.cos(1 / math.sqrt(2)))


def test_spiral_curvature_value_at_zero():
    assert evaluate(parse_expr("1/(u+sqrt(2))"), {"u": 0.0}) == 0.7071067811865475


def test_spiral_component():
    tree = parse_expr("(u/sqrt(2)+1)*cos(ln(u/sqrt(2)+1))")
    u = 0.8
    w = u / math.sqrt(2) + 1
    assert math.isclose(evaluate(tree, {"u": u}), w * math.cos(math.log(w)), rel_tol=1e-15)


def test_whitespace_and_power_spellings():
    a = parse_expr("u ^ 2 + 1")
    b = parse_expr("u**2+1")
    assert a == b


def test_precedence_and_unary_minus():
    assert evaluate(parse_expr("-u^2"), {"u": 3.0}) == -9.0
    assert evaluate(parse_expr("2^-1"), {}) == 0.5
    assert evaluate(parse_expr("1 - 2 - 3"), {}) == -4.0
    assert evaluate(parse_expr("8 / 4 / 2"), {}) == 1.0


def test_builtin_constants_and_log_alias():
    assert evaluate(parse_expr("pi + e + sqrt2"), {}) == math.pi + math.e + math.sqrt(2)
    assert parse_expr("log(u)") == parse_expr("ln(u)")


def test_user_constants():
    tree = parse_expr("a*u", constants={"a": 2.5})
    assert evaluate(tree, {"u": 2.0}) == 5.0


def test_syntax_error_reports_position_and_expectations():
    with pytest.raises(ExprSyntaxError) as err:
        parse_expr("1 + * u")
    assert err.value.pos == 4
    assert err.value.expected


def test_unbalanced_parenthesis():
    with pytest.raises(ExprSyntaxError):
        parse_expr("sin(u")


def test_empty_text_is_rejected():
    with pytest.raises(ExprSyntaxError):
        parse_expr("   ")


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier) as err:
        parse_expr("foo(u)")
    assert err.value.name == "foo"
    with pytest.raises(UnknownIdentifier):
        parse_expr("x + 1")


def test_variable_exponent_is_rejected():
    with pytest.raises(ExpressionError):
        parse_expr("u^u")


def test_array_evaluation():
    u = np.linspace(0, 1, 5)
    np.testing.assert_allclose(evaluate(parse_expr("sin(u)*u"), {"u": u}), np.sin(u) * u)


def test_symbolic_diff_matches_jets():
    tree = parse_expr("sin(s)*t^2 + exp(s*t)", ("s", "t"))
    ds = diff(tree, "s")
    s, t = 0.4, 1.3
    jet = eval_jet(tree, s, 1, var="s", env={"t": t})
    assert math.isclose(evaluate(ds, {"s": s, "t": t}), jet.f1, rel_tol=1e-14)


def test_variables_of():
    assert variables_of(parse_expr("s*t + pi", ("s", "t"))) == {"s", "t"}


# random trees ----------------------------------------------------------------------

_leaf = st.one_of(
    st.just(Var("u")),
    st.floats(0.1, 3, allow_nan=False).map(lambda x: Num(round(x, 3))),
    st.just(Const("pi", math.pi)),
)


def _grow(children):
    return st.one_of(
        st.tuples(st.sampled_from(["+", "-", "*"]), children, children).map(lambda t: Binary(t[0], t[1], t[2])),
        st.tuples(st.sampled_from(["sin", "cos", "neg"]), children).map(lambda t: Unary(t[0], t[1])),
        st.tuples(children, st.sampled_from([2.0, 3.0])).map(lambda t: Binary("^", t[0], Num(t[1]))),
    )


trees = st.recursive(_leaf, _grow, max_leaves=8)


@given(trees)
def test_print_parse_roundtrip(tree):
    text = to_text(tree)
    again = parse_expr(text)
    assert to_text(again) == text
    u = 0.37
    a, b = evaluate(tree, {"u": u}), evaluate(again, {"u": u})
    assert a == b or math.isclose(a, b, rel_tol=1e-15)


@given(trees, st.floats(-2, 2, allow_nan=False))
@settings(max_examples=60)
def test_product_of_random_trees_is_leibniz(tree, u):
    other = parse_expr("cos(u) + u^2")
    a = eval_jet(tree, u, 3).derivatives()
    b = eval_jet(other, u, 3).derivatives()
    prod = eval_jet(Binary("*", tree, other), u, 3).derivatives()
    want = [sum(math.comb(k, i) * a[i] * b[k - i] for i in range(k + 1)) for k in range(4)]
    scale = np.maximum(np.abs(want), 1.0)
    assert np.max(np.abs(prod - want) / scale) <= 1e-12
