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

"""Unit tests for break configurations, piecewise maps and quadrature."""

import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial
from pydantic import ValidationError

from broken_virasoro.expr import evaluate, parse, substitute
from broken_virasoro.geometry import (
    TWO_PI,
    BreakConfig,
    BreakConfigError,
    BreakMismatchError,
    ContinuityError,
    ExpressionMap,
    JetOrderError,
    MonotonicityError,
    QuadratureError,
    QuadratureSpec,
    Tolerances,
    compose_maps,
    identity_map,
    integrate_arc,
    invert_map,
    jet_of,
    merge_breaks,
    random_break_config,
    rotation_map,
)

ONE_BREAK = BreakConfig((0.0,))
TWO_BREAKS = BreakConfig((0.0, math.pi))
PHI_TEXT = "x + 0.3*sin(x)"
PSI_TEXT = "x + 0.1*sin(2*x)"


class TestBreakConfig:
    """Tests for BreakConfig."""

    def test_arcs_are_one_based_and_close_the_circle(self) -> None:
        p = BreakConfig((0.5, 2.0, 4.0))
        assert p.arc(1) == (0.5, 2.0)
        assert p.arc(3) == (4.0, 0.5 + TWO_PI)

    def test_arc_index_out_of_range(self) -> None:
        with pytest.raises(ValueError):
            TWO_BREAKS.arc(3)

    def test_too_close_breaks_rejected(self) -> None:
        with pytest.raises(BreakConfigError):
            BreakConfig((1.0, 1.0 + 1e-7))

    def test_wrapping_span_rejected(self) -> None:
        with pytest.raises(BreakConfigError):
            BreakConfig((0.0, TWO_PI))

    def test_unsorted_rejected(self) -> None:
        with pytest.raises(BreakConfigError):
            BreakConfig((2.0, 1.0))

    def test_canonical_sorts_modulo_two_pi(self) -> None:
        p = BreakConfig.canonical([7.0, -1.0])
        assert p.angles == pytest.approx((7.0 - TWO_PI, TWO_PI - 1.0))

    def test_matches_modulo_two_pi(self) -> None:
        assert BreakConfig((0.0, 1.0)).matches(BreakConfig((TWO_PI, 1.0 + TWO_PI)), 1e-9)
        assert not BreakConfig((0.0, 1.0)).matches(BreakConfig((0.0, 1.1)), 1e-9)

    def test_label_shift(self) -> None:
        p = BreakConfig.canonical([3.0, 7.0])
        q = BreakConfig((3.0, 7.0))
        assert p.label_shift(q, 1e-9) == 1
        assert q.label_shift(p, 1e-9) == 1
        assert q.label_shift(q, 1e-9) == 0
        three = BreakConfig((0.5, 2.0, 4.0))
        assert three.label_shift(BreakConfig((4.0, 0.5 + TWO_PI, 2.0 + TWO_PI)), 1e-9) == 2

    def test_label_shift_of_different_points(self) -> None:
        assert TWO_BREAKS.label_shift(BreakConfig((0.0, 3.0)), 1e-9) is None
        assert TWO_BREAKS.label_shift(ONE_BREAK, 1e-9) is None

    def test_normalized(self) -> None:
        p = BreakConfig((TWO_PI + 0.5, TWO_PI + 1.0)).normalized()
        assert p.angles == pytest.approx((0.5, 1.0))

    def test_locate(self) -> None:
        assert TWO_BREAKS.locate(1.0) == 1
        assert TWO_BREAKS.locate(4.0) == 2
        assert TWO_BREAKS.locate(math.pi, side="right") == 2
        assert TWO_BREAKS.locate(math.pi, side="left") == 1
        assert TWO_BREAKS.locate(-1.0) == 2

    def test_random_break_config_respects_gap(self) -> None:
        rng = np.random.default_rng(7)
        for n in (1, 2, 3):
            p = random_break_config(n, rng, min_gap=0.5)
            assert p.n == n
            gaps = np.diff(np.append(p.angles, p.upper))
            assert gaps.min() >= 0.5

    def test_merge_breaks_deduplicates(self) -> None:
        merged = merge_breaks((0.0, 1.0), (TWO_PI, 2.0), 1e-9, 1e-6)
        assert merged.angles == pytest.approx((0.0, 1.0, 2.0))


class TestConfiguration:
    """Tests for the pydantic tolerance models."""

    def test_defaults(self) -> None:
        tol = Tolerances()
        assert tol.tol_cont == 1e-9
        assert tol.eps_sep == 1e-6
        assert tol.delta_min == 1e-8
        assert QuadratureSpec().abs_tol == 1e-10
        assert QuadratureSpec().max_depth == 40
        assert QuadratureSpec().panel_order == 15

    def test_abs_tol_must_be_positive(self) -> None:
        with pytest.raises(ValidationError):
            QuadratureSpec(abs_tol=0.0)


class TestJets:
    """Tests for jet_of on expression-backed maps."""

    def test_identity(self) -> None:
        assert jet_of(identity_map(ONE_BREAK), 1.3, 3).values == (1.3, 1.0, 0.0, 0.0)

    def test_rotation(self) -> None:
        jet = jet_of(rotation_map(ONE_BREAK, 0.4), 1.0, 3)
        assert jet.values == pytest.approx((1.4, 1.0, 0.0, 0.0))

    def test_lift_periodicity(self) -> None:
        m = ExpressionMap(ONE_BREAK, [PHI_TEXT])
        assert m.jet(1.0 + TWO_PI, 0).value == pytest.approx(m.jet(1.0, 0).value + TWO_PI)
        assert m.jet(1.0 - 2 * TWO_PI, 0).value == pytest.approx(
            m.jet(1.0, 0).value - 2 * TWO_PI
        )

    def test_sin_profile_matches_symbolic_derivatives(self) -> None:
        profile = parse("sin(2*x) + 0.5*cos(x)")
        m = ExpressionMap(TWO_BREAKS, [profile], degree=0)
        rng = np.random.default_rng(3)
        for x in rng.uniform(-10.0, 10.0, size=50):
            jet = m.jet(float(x), 4)
            for k in range(5):
                expected = evaluate(profile.derivative("x", k), {"x": float(x)})
                assert jet[k] == pytest.approx(expected, abs=1e-12)

    def test_one_sided_jets_at_break(self) -> None:
        m = ExpressionMap(TWO_BREAKS, ["x", "x + 0.5*sin(x)"])
        assert m.jet(math.pi, 1, side="left")[1] == pytest.approx(1.0)
        assert m.jet(math.pi, 1, side="right")[1] == pytest.approx(0.5)
        assert m.jet(math.pi, 1, side="auto")[1] == pytest.approx(0.5)

    def test_auto_side_at_break_is_flagged_when_strict(self) -> None:
        m = ExpressionMap(TWO_BREAKS, ["x"], tolerances=Tolerances(strict=True))
        with pytest.raises(BreakConfigError):
            m.jet(math.pi, 1)

    def test_order_above_four_rejected(self) -> None:
        with pytest.raises(JetOrderError):
            jet_of(identity_map(ONE_BREAK), 0.0, 5)

    def test_discontinuous_pieces_rejected(self) -> None:
        with pytest.raises(ContinuityError):
            ExpressionMap(TWO_BREAKS, ["x", "x + 0.1"])


class TestCompose:
    """Tests for compose_maps."""

    def test_rotations_add(self) -> None:
        composed = compose_maps(rotation_map(ONE_BREAK, 0.2), rotation_map(ONE_BREAK, 0.5))
        for x in np.linspace(-3.0, 9.0, 13):
            jet = composed.jet(float(x), 3)
            assert jet.values == pytest.approx((x + 0.7, 1.0, 0.0, 0.0), abs=1e-12)

    def test_right_identity(self) -> None:
        f = ExpressionMap(ONE_BREAK, [PHI_TEXT])
        composed = compose_maps(f, identity_map(ONE_BREAK))
        for x in np.linspace(0.0, TWO_PI, 17):
            assert composed.jet(float(x), 4).values == pytest.approx(
                f.jet(float(x), 4).values, abs=1e-12
            )

    def test_matches_symbolic_composition(self) -> None:
        f_expr, g_expr = parse(PHI_TEXT), parse(PSI_TEXT)
        composed = compose_maps(ExpressionMap(ONE_BREAK, [f_expr]), ExpressionMap(ONE_BREAK, [g_expr]))
        symbolic = substitute(f_expr, {"x": g_expr})
        rng = np.random.default_rng(11)
        for x in rng.uniform(0.0, TWO_PI, size=30):
            jet = composed.jet(float(x), 4)
            for k in range(5):
                expected = evaluate(symbolic.derivative("x", k), {"x": float(x)})
                assert jet[k] == pytest.approx(expected, abs=1e-9)

    def test_associativity(self) -> None:
        f = ExpressionMap(ONE_BREAK, [PHI_TEXT])
        g = ExpressionMap(ONE_BREAK, [PSI_TEXT])
        h = ExpressionMap(ONE_BREAK, ["x + 0.2*sin(3*x)"])
        left = compose_maps(compose_maps(f, g), h)
        right = compose_maps(f, compose_maps(g, h))
        for x in np.linspace(0.1, 6.0, 25):
            assert left.jet(float(x), 3).values == pytest.approx(
                right.jet(float(x), 3).values, abs=1e-9
            )

    def test_break_bookkeeping_merges_pullbacks(self) -> None:
        g = rotation_map(BreakConfig((0.5,)), 0.3)
        f = ExpressionMap(BreakConfig((2.0,)), ["x"])
        composed = compose_maps(f, g)
        assert composed.breaks.angles == pytest.approx((0.5, 1.7))

    def test_matching_breaks_keep_source(self) -> None:
        g = rotation_map(TWO_BREAKS, 0.3)
        f = identity_map(BreakConfig((0.3, math.pi + 0.3)))
        assert compose_maps(f, g).breaks == TWO_BREAKS

    def test_cyclically_relabelled_breaks_keep_source(self) -> None:
        g = rotation_map(BreakConfig((1.0, 5.0)), 2.0)
        f = identity_map(BreakConfig.canonical([3.0, 7.0]))
        assert compose_maps(f, g, strict=True).breaks == BreakConfig((1.0, 5.0))

    def test_strict_mismatch_rejected(self) -> None:
        g = rotation_map(BreakConfig((0.5,)), 0.3)
        f = identity_map(BreakConfig((2.0,)))
        with pytest.raises(BreakMismatchError):
            compose_maps(f, g, strict=True)


class TestInvert:
    """Tests for invert_map."""

    def test_rotation(self) -> None:
        inverse = invert_map(rotation_map(ONE_BREAK, 0.4))
        for x in np.linspace(-2.0, 8.0, 11):
            assert inverse.jet(float(x), 3).values == pytest.approx(
                (x - 0.4, 1.0, 0.0, 0.0), abs=1e-12
            )

    def test_breaks_are_images(self) -> None:
        f = ExpressionMap(TWO_BREAKS, [PHI_TEXT])
        assert invert_map(f).breaks.angles == pytest.approx((0.0, math.pi))
        shifted = invert_map(rotation_map(TWO_BREAKS, 0.25))
        assert shifted.breaks.angles == pytest.approx((0.25, math.pi + 0.25))

    def test_self_consistency(self) -> None:
        f = ExpressionMap(ONE_BREAK, [PHI_TEXT])
        inverse = invert_map(f)
        points = np.linspace(-1.0, 7.0, 100)
        assert np.max(np.abs(inverse(f(points)) - points)) < 1e-10

    def test_involution(self) -> None:
        f = ExpressionMap(ONE_BREAK, [PSI_TEXT])
        twice = invert_map(invert_map(f))
        points = np.linspace(0.0, TWO_PI, 50)
        assert np.max(np.abs(twice(points) - f(points))) < 1e-10

    def test_inverse_jets(self) -> None:
        f = ExpressionMap(ONE_BREAK, [PHI_TEXT])
        inverse = invert_map(f)
        identity = compose_maps(f, inverse)
        for y in np.linspace(0.2, 6.0, 9):
            assert identity.jet(float(y), 4).values == pytest.approx(
                (y, 1.0, 0.0, 0.0, 0.0), abs=1e-9
            )

    def test_non_monotone_rejected(self) -> None:
        with pytest.raises(MonotonicityError):
            invert_map(ExpressionMap(ONE_BREAK, ["x + 2*sin(x)"]))


class TestIntegrateArc:
    """Tests for adaptive quadrature."""

    def test_sin_over_half_turn(self) -> None:
        assert integrate_arc(np.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-12)

    def test_cos_over_full_turn(self) -> None:
        assert abs(integrate_arc(np.cos, 0.0, TWO_PI)) < 1e-12

    def test_reversed_limits(self) -> None:
        assert integrate_arc(np.sin, math.pi, 0.0) == pytest.approx(-2.0, abs=1e-12)

    def test_random_polynomials(self) -> None:
        rng = np.random.default_rng(5)
        for _ in range(10):
            poly = Polynomial(rng.uniform(-1.0, 1.0, size=9))
            a, b = sorted(rng.uniform(-2.0, 2.0, size=2))
            antiderivative = poly.integ()
            expected = antiderivative(b) - antiderivative(a)
            assert integrate_arc(poly, a, b) == pytest.approx(expected, abs=1e-11)

    def test_constant_integrand(self) -> None:
        assert integrate_arc(lambda x: 3.0, 0.0, 2.0) == pytest.approx(6.0)

    def test_depth_exhaustion_reports_panel(self) -> None:
        spec = QuadratureSpec(abs_tol=1e-14, max_depth=2)
        with pytest.raises(QuadratureError) as excinfo:
            integrate_arc(lambda x: np.abs(x - 0.3) ** 0.5, 0.0, 1.0, spec)
        lo, hi = excinfo.value.panel
        assert lo <= 0.3 <= hi

    def test_non_finite_integrand(self) -> None:
        with pytest.raises(QuadratureError):
            integrate_arc(lambda x: np.full_like(x, np.nan), 0.0, 1.0)
