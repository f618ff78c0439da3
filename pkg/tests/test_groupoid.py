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

"""Unit tests for arrows, Bott cocycles, the extended groupoid and bisections."""

import math
from typing import Callable

import numpy as np
import pytest

from broken_virasoro.geometry import TWO_PI, BreakConfig, MonotonicityError
from broken_virasoro.groupoid import (
    BaseMapError,
    Bisection,
    BrokenDiffeo,
    ComposabilityError,
    ExtendedDiffeo,
    associativity_residual,
    base_map_composition_residual,
    bisection_compose,
    bott_boundary_relation,
    chi,
    chi_i,
    compose_diffeos,
    composable,
    extended_inverse,
    extended_multiply,
    groupoid_cocycle_residual,
    label_shift,
)

HALVES = BreakConfig((0.0, math.pi))
ONE_BREAK = BreakConfig((0.4,))
SAMPLE_X = np.array([0.1, 1.0, 2.5, 3.5, 5.0, 6.2])
MOVED = BreakConfig((1.0, 5.0))
TILT = "x + 0.25*sin(x)*sin(x)"


def kinked() -> BrokenDiffeo:
    """Fixes 0 and pi; the derivative jumps at both breaks."""
    return BrokenDiffeo.from_expressions(HALVES, ["x + 0.2*sin(x)", "x - 0.1*sin(x)"])


def wobble() -> BrokenDiffeo:
    return BrokenDiffeo.from_expressions(HALVES, ["x + 0.1*sin(2*x)"])


def tilt() -> BrokenDiffeo:
    return BrokenDiffeo.from_expressions(HALVES, [TILT])


def drift() -> BrokenDiffeo:
    """Carries the breaks (1, 5) to about (3.17, 6.81)."""
    return BrokenDiffeo.from_expressions(MOVED, ["x + 2 + 0.2*sin(x)"])


def relabelled(breaks: BreakConfig, order: str) -> BreakConfig:
    """The same points as ``breaks`` listed smallest first, or starting from the last label."""
    first, second = breaks.angles
    if order == "canonical":
        return BreakConfig.canonical([first, second])
    return BreakConfig((second, first + TWO_PI))


def gauss(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int = 80) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (b - a) * nodes + 0.5 * (a + b)
    return 0.5 * (b - a) * float(np.sum(weights * f(x)))


class TestBrokenDiffeo:
    """Tests for arrows and their composition."""

    def test_rotation_target_is_normalized(self) -> None:
        arrow = BrokenDiffeo.rotation(BreakConfig((0.5,)), 7.0)
        assert arrow.trg.angles[0] == pytest.approx(7.5 - TWO_PI)
        assert arrow.src == BreakConfig((0.5,))

    def test_kinked_arrow_fixes_breaks(self) -> None:
        arrow = kinked()
        assert arrow.trg.matches(HALVES, 1e-12)
        assert float(arrow(1.0)[0]) == pytest.approx(1.0 + 0.2 * math.sin(1.0))
        assert float(arrow(4.0)[0]) == pytest.approx(4.0 - 0.1 * math.sin(4.0))

    def test_non_monotone_rejected(self) -> None:
        with pytest.raises(MonotonicityError):
            BrokenDiffeo.from_expressions(BreakConfig((0.0,)), ["x + 2*sin(x)"])

    def test_compose(self) -> None:
        psi = BrokenDiffeo.from_expressions(BreakConfig((0.0,)), ["x + 0.2*sin(x)"])
        phi = BrokenDiffeo.rotation(BreakConfig((0.0,)), 0.3)
        composite = compose_diffeos(phi, psi)
        assert composite.src == psi.src
        assert float(composite(1.0)[0]) == pytest.approx(1.3 + 0.2 * math.sin(1.0))
        assert composite.trg.angles[0] == pytest.approx(0.3)

    def test_compose_requires_matching_breaks(self) -> None:
        psi = BrokenDiffeo.identity(BreakConfig((0.0,)))
        phi = BrokenDiffeo.identity(BreakConfig((0.5,)))
        assert not composable(phi, psi)
        with pytest.raises(ComposabilityError):
            compose_diffeos(phi, psi)

    def test_breaks_compared_modulo_two_pi(self) -> None:
        psi = BrokenDiffeo.rotation(BreakConfig((0.5,)), TWO_PI - 0.5)
        phi = BrokenDiffeo.identity(BreakConfig((0.0,)))
        assert composable(phi, psi)

    def test_compose_with_smallest_first_source(self) -> None:
        psi = BrokenDiffeo.rotation(MOVED, 2.0)
        assert psi.trg.angles == pytest.approx((3.0, 7.0))
        phi = BrokenDiffeo.from_expressions(BreakConfig.canonical([3.0, 7.0]), ["x + 0.1*sin(x)"])
        assert phi.src.angles == pytest.approx((7.0 - TWO_PI, 3.0))
        assert composable(phi, psi)
        assert label_shift(phi, psi) == 1
        composite = compose_diffeos(phi, psi)
        assert composite.src == MOVED
        assert float(composite(2.0)[0]) == pytest.approx(4.0 + 0.1 * math.sin(4.0))

    @pytest.mark.parametrize("order", ["canonical", "shifted"])
    def test_compose_with_relabelled_source(self, order: str) -> None:
        psi = drift()
        phi = BrokenDiffeo.from_expressions(relabelled(psi.trg, order), [TILT])
        composite = compose_diffeos(phi, psi)
        assert composite.src == MOVED
        y = 2.0 + 2.0 + 0.2 * math.sin(2.0)
        assert float(composite(2.0)[0]) == pytest.approx(y + 0.25 * math.sin(y) ** 2)

    def test_inverse(self) -> None:
        arrow = kinked()
        inverse = arrow.inverse()
        np.testing.assert_allclose(inverse(arrow(SAMPLE_X)), SAMPLE_X, atol=1e-12)
        identity = compose_diffeos(arrow, inverse)
        np.testing.assert_allclose(identity(SAMPLE_X), SAMPLE_X, atol=1e-12)


class TestBottCocycle:
    """Tests for chi and the groupoid cocycle identity."""

    def test_rotation_outside_contributes_nothing(self) -> None:
        rotation = BrokenDiffeo.rotation(HALVES, 0.0)
        assert chi(rotation, kinked()) == pytest.approx([0.0, 0.0], abs=1e-12)

    def test_identity_inside_contributes_nothing(self) -> None:
        assert chi(tilt(), BrokenDiffeo.identity(HALVES)) == pytest.approx([0.0, 0.0], abs=1e-12)

    def test_not_composable(self) -> None:
        other = BrokenDiffeo.identity(BreakConfig((0.2, 3.0)))
        with pytest.raises(ComposabilityError):
            chi_i(other, kinked(), 1)

    @pytest.mark.parametrize("order", ["canonical", "shifted"])
    def test_relabelled_outer_source(self, order: str) -> None:
        psi = drift()
        outer = BrokenDiffeo.from_expressions(relabelled(psi.trg, order), [TILT])
        reference = BrokenDiffeo.from_expressions(psi.trg, [TILT])
        assert label_shift(outer, psi) == 1
        assert label_shift(reference, psi) == 0
        np.testing.assert_allclose(chi(outer, psi), chi(reference, psi), atol=1e-12)

    def test_relabelled_arcs_follow_inner_source(self) -> None:
        psi = drift()
        outer = BrokenDiffeo.from_expressions(relabelled(psi.trg, "canonical"), [TILT])

        def integrand(x: np.ndarray) -> np.ndarray:
            y = x + 2.0 + 0.2 * np.sin(x)
            return np.log(1.0 + 0.25 * np.sin(2.0 * y)) * (-0.2 * np.sin(x)) / (1.0 + 0.2 * np.cos(x))

        for arc, (a, b) in enumerate([(1.0, 5.0), (5.0, 1.0 + TWO_PI)], start=1):
            assert chi_i(outer, psi, arc) == pytest.approx(gauss(integrand, a, b), abs=1e-9)

    def test_arc_index_checked(self) -> None:
        with pytest.raises(ValueError):
            chi_i(tilt(), kinked(), 3)

    def test_components_match_chi_i(self) -> None:
        values = chi(tilt(), kinked())
        assert values[1] == pytest.approx(chi_i(tilt(), kinked(), 2), abs=1e-14)

    def test_cocycle_identity(self) -> None:
        residual = groupoid_cocycle_residual(tilt(), wobble(), kinked())
        assert np.max(np.abs(residual)) < 1e-8

    def test_cocycle_identity_across_rotation(self) -> None:
        eta = BrokenDiffeo.rotation(HALVES, 0.5)
        moved = eta.trg
        psi = BrokenDiffeo.from_expressions(moved, ["x + 0.1*sin(2*(x - 0.5))"])
        phi = BrokenDiffeo.from_expressions(moved, ["x + 0.2*sin(x - 0.5)*sin(x - 0.5)"])
        residual = groupoid_cocycle_residual(phi, psi, eta)
        assert np.max(np.abs(residual)) < 1e-8

    def test_inverse_law(self) -> None:
        arrow = tilt()
        forward = chi(arrow.inverse(), arrow)
        backward = chi(arrow, arrow.inverse())
        np.testing.assert_allclose(forward, backward, atol=1e-8)


class TestBottRelation:
    """Tests for bott_boundary_relation."""

    def test_smooth_arrow_has_no_boundary(self) -> None:
        relation = bott_boundary_relation(tilt(), wobble())
        assert relation.boundary == pytest.approx(0.0, abs=1e-12)
        assert abs(relation.residual) < 1e-8

    def test_boundary_term_of_a_kink(self) -> None:
        relation = bott_boundary_relation(tilt(), kinked())
        expected = 0.5 * (
            math.log(1.2) ** 2 - math.log(0.9) ** 2 + math.log(1.1) ** 2 - math.log(0.8) ** 2
        )
        assert relation.boundary == pytest.approx(expected, abs=1e-12)
        assert abs(relation.residual) < 1e-8

    def test_rotation_reduces_to_boundary(self) -> None:
        relation = bott_boundary_relation(BrokenDiffeo.rotation(HALVES, 0.0), kinked())
        assert relation.lhs == pytest.approx(0.0, abs=1e-12)
        assert relation.classical == pytest.approx(-relation.boundary, abs=1e-8)


class TestExtendedGroupoid:
    """Tests for the centrally extended groupoid."""

    def test_charge_length_checked(self) -> None:
        with pytest.raises(ValueError):
            ExtendedDiffeo(kinked(), (1.0,))

    def test_associativity_defect_is_the_cocycle(self) -> None:
        a = ExtendedDiffeo(tilt(), (0.5, -1.0))
        b = ExtendedDiffeo(wobble(), (0.0, 2.0))
        c = ExtendedDiffeo(kinked(), (1.5, 0.25))
        defect = associativity_residual(a, b, c)
        cocycle = groupoid_cocycle_residual(tilt(), wobble(), kinked())
        np.testing.assert_allclose(defect, cocycle, atol=1e-12)
        assert np.max(np.abs(defect)) < 1e-8

    def test_units(self) -> None:
        a = ExtendedDiffeo(kinked(), (0.5, -1.0))
        left = extended_multiply(ExtendedDiffeo.unit(a.arrow.trg), a)
        right = extended_multiply(a, ExtendedDiffeo.unit(a.arrow.src))
        assert left.charge == pytest.approx(a.charge, abs=1e-12)
        assert right.charge == pytest.approx(a.charge, abs=1e-12)

    def test_inverses(self) -> None:
        a = ExtendedDiffeo(kinked(), (0.5, -1.0))
        inverse = extended_inverse(a)
        assert extended_multiply(a, inverse).charge == pytest.approx((0.0, 0.0), abs=1e-12)
        assert extended_multiply(inverse, a).charge == pytest.approx((0.0, 0.0), abs=1e-8)

    def test_charges_follow_relabelled_source(self) -> None:
        psi = drift()
        inner = ExtendedDiffeo(psi, (0.25, 2.0))
        outer = BrokenDiffeo.from_expressions(relabelled(psi.trg, "canonical"), [TILT])
        reference = BrokenDiffeo.from_expressions(psi.trg, [TILT])
        # Arc 1 of the smallest-first source is arc 2 of trg(psi).
        product = extended_multiply(ExtendedDiffeo(outer, (0.5, -1.0)), inner)
        expected = extended_multiply(ExtendedDiffeo(reference, (-1.0, 0.5)), inner)
        assert product.arrow.src == MOVED
        assert product.charge == pytest.approx(expected.charge, abs=1e-12)
        assert product.charge != pytest.approx(
            extended_multiply(ExtendedDiffeo(reference, (0.5, -1.0)), inner).charge, abs=1e-6
        )


class TestBisection:
    """Tests for bisections and their products."""

    def test_evaluate(self) -> None:
        bisection = Bisection(1, ["x + 0.2*sin(x - p1)"])
        value, base = bisection.evaluate(1.0, ONE_BREAK)
        assert value == pytest.approx(1.0 + 0.2 * math.sin(0.6))
        assert base.angles == pytest.approx((0.4,))

    def test_unknown_variables_rejected(self) -> None:
        with pytest.raises(ValueError):
            Bisection(1, ["x + p2"])

    def test_product_acts_pointwise(self) -> None:
        phi = Bisection(1, ["x + 0.1 + 0.05*sin(p1)"])
        psi = Bisection(1, ["x + 0.2*sin(x - p1)"])
        product = bisection_compose(phi, psi, [ONE_BREAK])
        for x in (0.5, 2.0, 5.5):
            chained = phi.evaluate(*psi.evaluate(x, ONE_BREAK))
            direct = product.evaluate(x, ONE_BREAK)
            assert direct[0] == pytest.approx(chained[0], abs=1e-12)
            assert direct[1].angles == pytest.approx(chained[1].angles, abs=1e-12)

    def test_base_maps_compose(self) -> None:
        phi = Bisection(2, ["x + 0.1*sin(p1) + 0.05*cos(p2)"])
        psi = Bisection(2, ["x + 0.2*sin(x - p1)*sin(x - p2)"])
        samples = [BreakConfig((0.3, 2.5)), BreakConfig((1.0, 4.0))]
        assert base_map_composition_residual(phi, psi, samples) < 1e-12

    def test_degenerate_base_map_rejected(self) -> None:
        with pytest.raises(BaseMapError):
            bisection_compose(Bisection(1, ["x - p1"]), Bisection.identity(1), [ONE_BREAK])

    def test_base_map_checked_only_at_samples(self) -> None:
        phi = Bisection(1, ["x + 2*sin(p1)"])
        product = bisection_compose(phi, Bisection.identity(1), [ONE_BREAK])
        assert product.base_map(ONE_BREAK).angles == pytest.approx((0.4 + 2 * math.sin(0.4),))
        with pytest.raises(BaseMapError):
            bisection_compose(phi, Bisection.identity(1), [BreakConfig((2 * math.pi / 3,))])
