# Copyright 2026 pairsys.ai (DBA Goodmem.ai)
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Unit tests for the expression language."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from broken_virasoro.expr import (
    Add,
    Const,
    Div,
    Expression,
    ExpressionDomainError,
    ExpressionSyntaxError,
    Func,
    Mul,
    Neg,
    Pow,
    Sub,
    UnboundVariableError,
    UnknownIdentifierError,
    Var,
    X,
    cos,
    differentiate,
    evaluate,
    free_variables,
    parse,
    sin,
    substitute,
    unparse,
)

FD_STEP = 1e-5
FD_POINTS = 20


def _richardson(e: Expression, x: float) -> float:
    def central(h: float) -> float:
        return (evaluate(e, {"x": x + h}) - evaluate(e, {"x": x - h})) / (2 * h)

    return (4 * central(FD_STEP / 2) - central(FD_STEP)) / 3


def _random_expression(rng: np.random.Generator, depth: int) -> Expression:
    """Random tree whose products only see bounded factors."""
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.6:
            return X
        return Const(round(float(rng.uniform(-1, 1)), 3))
    op = rng.choice(["add", "sub", "mul", "sin", "cos", "atan", "square"])
    bounded = ["sin", "cos", "atan"]
    if op == "add":
        return Add(_random_expression(rng, depth - 1), _random_expression(rng, depth - 1))
    if op == "sub":
        return Sub(_random_expression(rng, depth - 1), _random_expression(rng, depth - 1))
    if op == "mul":
        left = Func(str(rng.choice(bounded)), _random_expression(rng, depth - 1))
        right = Func(str(rng.choice(bounded)), _random_expression(rng, depth - 1))
        return Mul(left, right)
    if op == "square":
        return Pow(Func(str(rng.choice(bounded)), _random_expression(rng, depth - 1)), 2)
    return Func(str(op), _random_expression(rng, depth - 1))


_leaves = st.one_of(
    st.sampled_from([Var("x"), Var("t"), Var("p1"), Var("p9")]),
    st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False).map(
        Const
    ),
)


def _extend(children: st.SearchStrategy[Expression]) -> st.SearchStrategy[Expression]:
    return st.one_of(
        st.builds(Add, children, children),
        st.builds(Sub, children, children),
        st.builds(Mul, children, children),
        st.builds(Div, children, children),
        st.builds(Neg, children),
        st.builds(Pow, children, st.integers(min_value=-3, max_value=4)),
        st.builds(
            Func, st.sampled_from(["sin", "cos", "exp", "log", "atan"]), children
        ),
    )


expressions = st.recursive(_leaves, _extend, max_leaves=12)


class TestParse:
    """Tests for parsing expression text."""

    def test_function_call(self) -> None:
        assert parse("sin(x)") == Func("sin", Var("x"))

    def test_precedence(self) -> None:
        assert parse("x*p1 + 2") == Add(Mul(Var("x"), Var("p1")), Const(2.0))

    def test_nested_round_trip(self) -> None:
        e = parse("sin(2*(x - p1))")
        assert e == Func("sin", Mul(Const(2.0), Sub(Var("x"), Var("p1"))))
        assert parse(unparse(e)) == e

    def test_pi_is_a_constant(self) -> None:
        assert parse("pi") == Const(math.pi)

    def test_negative_literal(self) -> None:
        assert parse("-2 * x") == Mul(Const(-2.0), Var("x"))

    def test_minus_binds_looser_than_power(self) -> None:
        assert parse("-2^2") == Neg(Pow(Const(2.0), 2))
        assert evaluate(parse("-2^2"), {}) == -4.0

    def test_left_associative_subtraction(self) -> None:
        assert parse("x - 1 - 2") == Sub(Sub(Var("x"), Const(1.0)), Const(2.0))

    def test_negative_exponent(self) -> None:
        assert parse("x^-2") == Pow(Var("x"), -2)

    def test_scientific_notation(self) -> None:
        assert parse("1e-05 + x") == Add(Const(1e-05), Var("x"))

    def test_syntax_error_reports_position(self) -> None:
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse("x + ")
        assert excinfo.value.position == 4

    def test_unbalanced_parenthesis(self) -> None:
        with pytest.raises(ExpressionSyntaxError):
            parse("sin(x")

    def test_unknown_function(self) -> None:
        with pytest.raises(UnknownIdentifierError) as excinfo:
            parse("tan(x)")
        assert excinfo.value.name == "tan"
        assert excinfo.value.position == 0

    def test_unknown_variable(self) -> None:
        with pytest.raises(UnknownIdentifierError):
            parse("x + p10")

    def test_fractional_exponent_rejected(self) -> None:
        with pytest.raises(ExpressionSyntaxError):
            parse("x^1.5")

    def test_unexpected_character(self) -> None:
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse("x $ 2")
        assert excinfo.value.position == 2


class TestPrintRoundTrip:
    """Printing then re-parsing yields the same tree."""

    @pytest.mark.parametrize(
        "tree",
        [
            Sub(Var("x"), Const(-2.0)),
            Neg(Const(2.0)),
            Neg(Const(-2.0)),
            Neg(Neg(Const(2.0))),
            Neg(Pow(Const(2.0), 2)),
            Pow(Neg(Var("x")), 3),
            Pow(Const(-2.0), 2),
            Mul(Neg(Const(2.0)), Var("x")),
            Add(Var("x"), Sub(Var("t"), Var("p1"))),
            Div(Var("x"), Mul(Var("t"), Var("p2"))),
            Pow(Pow(Var("x"), 2), -1),
        ],
    )
    def test_tricky_trees(self, tree: Expression) -> None:
        assert parse(unparse(tree)) == tree

    def test_integers_print_without_fraction(self) -> None:
        assert unparse(Mul(Const(2.0), Var("x"))) == "2 * x"

    @settings(max_examples=300, deadline=None)
    @given(expressions)
    def test_round_trip_property(self, tree: Expression) -> None:
        assert parse(unparse(tree)) == tree


class TestDifferentiate:
    """Tests for symbolic differentiation."""

    def test_sin(self) -> None:
        assert differentiate(parse("sin(x)"), "x") == cos(X)

    def test_product_in_break_variable(self) -> None:
        assert differentiate(parse("x*p1"), "p1") == Var("x")

    def test_constant_in_other_variable(self) -> None:
        assert differentiate(parse("sin(p1)"), "x") == Const(0.0)

    def test_higher_order(self) -> None:
        third = differentiate(parse("sin(2*x)"), "x", order=3)
        for x in (0.1, 0.7, 2.5):
            assert evaluate(third, {"x": x}) == pytest.approx(-8 * math.cos(2 * x), abs=1e-12)

    def test_unknown_variable_rejected(self) -> None:
        with pytest.raises(ValueError):
            differentiate(parse("x"), "y")

    def test_log_and_atan_rules(self) -> None:
        e = parse("log(2 + sin(x)) * atan(x^2)")
        d = differentiate(e, "x")
        for x in np.linspace(-1.0, 1.0, 7):
            assert evaluate(d, {"x": x}) == pytest.approx(_richardson(e, x), rel=1e-6, abs=1e-8)

    def test_matches_finite_differences_on_random_trees(self) -> None:
        rng = np.random.default_rng(20260301)
        for _ in range(25):
            e = _random_expression(rng, 6)
            d = differentiate(e, "x")
            for x in rng.uniform(-1.0, 1.0, size=FD_POINTS):
                exact = evaluate(d, {"x": x})
                approx = _richardson(e, x)
                scale = 1.0 + abs(exact) + abs(evaluate(e, {"x": x}))
                assert abs(exact - approx) <= 1e-6 * scale

    def test_linearity(self) -> None:
        e1 = parse("sin(x)*cos(3*x)")
        e2 = parse("exp(x/2) - x^3")
        a, b = 1.5, -0.25
        combined = differentiate(a * e1 + b * e2, "x")
        separate = a * differentiate(e1, "x") + b * differentiate(e2, "x")
        points = np.linspace(-2.0, 2.0, 11)
        np.testing.assert_allclose(
            evaluate(combined, {"x": points}), evaluate(separate, {"x": points}), rtol=1e-12, atol=1e-12
        )


class TestEvaluate:
    """Tests for numeric evaluation."""

    def test_sin_at_half_pi(self) -> None:
        assert evaluate(parse("sin(x)"), {"x": math.pi / 2}) == pytest.approx(1.0)

    def test_log_at_one(self) -> None:
        assert evaluate(parse("log(x)"), {"x": 1.0}) == 0.0

    def test_log_of_negative_is_domain_error(self) -> None:
        with pytest.raises(ExpressionDomainError) as excinfo:
            evaluate(parse("log(x)"), {"x": -1.0})
        assert excinfo.value.subterm == Func("log", Var("x"))

    def test_division_by_zero_names_subterm(self) -> None:
        with pytest.raises(ExpressionDomainError) as excinfo:
            evaluate(parse("1 + 1/(x - 1)"), {"x": 1.0})
        assert excinfo.value.subterm == Div(Const(1.0), Sub(Var("x"), Const(1.0)))

    def test_unbound_variable(self) -> None:
        with pytest.raises(UnboundVariableError) as excinfo:
            evaluate(parse("x + p2"), {"x": 1.0})
        assert excinfo.value.name == "p2"

    def test_vectorised(self) -> None:
        values = evaluate(parse("x^2 + p1"), {"x": np.array([1.0, 2.0, 3.0]), "p1": 1.0})
        np.testing.assert_array_equal(values, [2.0, 5.0, 10.0])

    def test_constant_expression_returns_float(self) -> None:
        assert isinstance(evaluate(parse("2 + 3"), {}), float)


class TestStructuralHelpers:
    """Tests for substitution and free variables."""

    def test_free_variables(self) -> None:
        assert free_variables(parse("sin(x - p1) + t*p3")) == {"x", "p1", "t", "p3"}

    def test_substitute_folds_constants(self) -> None:
        e = substitute(parse("x*p1 + p1"), {"p1": 0.0})
        assert e == Const(0.0)

    def test_substitute_expression(self) -> None:
        e = substitute(parse("sin(x)"), {"x": parse("x + p1")})
        assert e == sin(parse("x + p1"))

    def test_expressions_are_hashable(self) -> None:
        assert len({parse("x + 1"), parse("x + 1"), parse("x + 2")}) == 2
