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

"""Unit tests for interval cocycles, the sin-basis oracle and the certificate."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from broken_virasoro.algebroid import IsotropyError
from broken_virasoro.geometry import ContinuityError, MonotonicityError
from broken_virasoro.groupoid import ComposabilityError
from broken_virasoro.interval import (
    IntervalDiffeo,
    IntervalField,
    SegmentedField,
    boundary_form_defect,
    certificate_lambda,
    chi_interval,
    interval_bracket,
    interval_cocycle_residual,
    multibreak_interval_cocycles,
    nontriviality_certificate,
    omega_interval,
    segmented_bracket,
    sin_basis_bracket,
    sin_basis_omega,
    sin_basis_table,
)

HALF = math.pi / 2.0
PARTITION = (0.0, HALF, math.pi)


def segmented(*pieces: str) -> SegmentedField:
    return SegmentedField(PARTITION, tuple(pieces))


class TestIntervalField:
    """Tests for IntervalField."""

    def test_sin_basis(self) -> None:
        field = IntervalField.sin_basis(3)
        assert (field.a, field.b) == (0.0, math.pi)
        assert float(field(0.5)[0]) == pytest.approx(math.sin(1.5))

    def test_sin_basis_index_checked(self) -> None:
        with pytest.raises(ValueError):
            IntervalField.sin_basis(0)

    def test_non_vanishing_rejected(self) -> None:
        with pytest.raises(IsotropyError):
            IntervalField(0.0, math.pi, "cos(x)")

    def test_empty_interval_rejected(self) -> None:
        with pytest.raises(ValueError):
            IntervalField(1.0, 1.0, "x", vanishing=False)

    def test_bracket(self) -> None:
        bracket = interval_bracket(IntervalField.sin_basis(1), IntervalField.sin_basis(2))
        x = 0.7
        expected = 2 * math.sin(x) * math.cos(2 * x) - math.cos(x) * math.sin(2 * x)
        assert float(bracket(x)[0]) == pytest.approx(expected)
        assert bracket.vanishing


class TestOmegaInterval:
    """Tests for omega_interval and boundary_form_defect."""

    def test_first_pair(self) -> None:
        value = omega_interval(IntervalField.sin_basis(1), IntervalField.sin_basis(2))
        assert value == pytest.approx(-20.0 / 3.0, abs=1e-9)

    def test_requires_vanishing_fields(self) -> None:
        free = IntervalField(0.0, math.pi, "cos(x)", vanishing=False)
        with pytest.raises(IsotropyError):
            omega_interval(free, IntervalField.sin_basis(1))

    def test_intervals_must_agree(self) -> None:
        other = IntervalField(0.0, 1.0, "x*(1 - x)")
        with pytest.raises(ValueError):
            omega_interval(other, IntervalField.sin_basis(1))

    def test_boundary_term(self) -> None:
        comparison = boundary_form_defect(IntervalField.sin_basis(1), IntervalField.sin_basis(2))
        assert comparison.skew == pytest.approx(-20.0 / 3.0, abs=1e-9)
        assert comparison.third_order == pytest.approx(-32.0 / 3.0, abs=1e-9)
        assert comparison.boundary == pytest.approx(-4.0, abs=1e-12)
        assert comparison.defect == pytest.approx(0.0, abs=1e-9)


class TestSinBasis:
    """Tests for the exact sin-basis values."""

    def test_closed_form(self) -> None:
        assert sin_basis_omega(1, 2) == Fraction(-20, 3)
        assert sin_basis_omega(2, 3) == Fraction(-156, 5)
        assert sin_basis_omega(2, 1) == Fraction(20, 3)

    def test_same_parity_vanishes(self) -> None:
        assert sin_basis_omega(1, 3) == 0
        assert sin_basis_omega(4, 4) == 0

    @given(st.integers(min_value=1, max_value=30), st.integers(min_value=1, max_value=30))
    def test_antisymmetric(self, m: int, n: int) -> None:
        assert sin_basis_omega(m, n) == -sin_basis_omega(n, m)

    def test_bracket_coefficients(self) -> None:
        assert sin_basis_bracket(1, 2) == {1: Fraction(-3, 2), 3: Fraction(1, 2)}
        assert sin_basis_bracket(2, 2) == {}

    def test_table_matches_quadrature(self) -> None:
        rows = sin_basis_table(5)
        assert [(m, n) for m, n, _, _ in rows][:3] == [(1, 2), (1, 3), (1, 4)]
        assert len(rows) == 10
        for _, _, exact, numeric in rows:
            assert numeric == pytest.approx(float(exact), abs=1e-8 * max(1.0, abs(float(exact))))

    def test_table_bound_checked(self) -> None:
        with pytest.raises(ValueError):
            sin_basis_table(0)


class TestCertificate:
    """Tests for nontriviality_certificate."""

    def test_lambdas(self) -> None:
        assert certificate_lambda(1) == 0
        assert certificate_lambda(3) == Fraction(-20, 3)
        assert certificate_lambda(5) == Fraction(-156, 5)

    def test_witness(self) -> None:
        certificate = nontriviality_certificate(5)
        assert certificate.valid
        assert certificate.witness == (5, 3)
        row = certificate.rows[-1]
        assert (row.k, row.l) == (5, 3)
        assert row.lhs == Fraction(136, 15)
        assert row.rhs == Fraction(904, 15)
        assert row.residual == Fraction(-768, 15)

    def test_rows_with_unit_l_are_solved(self) -> None:
        certificate = nontriviality_certificate(9)
        assert all(row.residual == 0 for row in certificate.rows if row.l == 1)
        assert len(certificate.rows) == 10

    def test_rows_match_sin_basis(self) -> None:
        assert nontriviality_certificate(11).sin_basis_mismatches() == []

    @pytest.mark.parametrize("bound", [3, 6, 101])
    def test_bound_checked(self, bound: int) -> None:
        with pytest.raises(ValueError):
            nontriviality_certificate(bound)


class TestSegmentedField:
    """Tests for fields on a partitioned interval."""

    def test_discontinuity_rejected(self) -> None:
        with pytest.raises(ContinuityError):
            segmented("sin(2*x)", "1 + sin(2*x)")

    def test_single_field_gives_one_cocycle(self) -> None:
        values = multibreak_interval_cocycles(
            IntervalField.sin_basis(1), IntervalField.sin_basis(2)
        )
        np.testing.assert_allclose(values, [-20.0 / 3.0], atol=1e-9)

    def test_components_add_up(self) -> None:
        values = multibreak_interval_cocycles(
            segmented("sin(2*x)", "sin(2*x)"), segmented("sin(4*x)", "sin(4*x)")
        )
        assert values.shape == (2,)
        assert float(np.sum(values)) == pytest.approx(0.0, abs=1e-9)

    def test_must_vanish_at_nodes(self) -> None:
        field = SegmentedField((0.0, 1.0, math.pi), ("sin(x)", "sin(x)"))
        with pytest.raises(IsotropyError):
            multibreak_interval_cocycles(field, field)

    def test_cocycle_identity_per_segment(self) -> None:
        u = segmented("sin(2*x)", "-0.5*sin(2*x)")
        v = segmented("sin(4*x)", "sin(4*x)")
        w = segmented("sin(2*x)*sin(2*x)", "sin(6*x)")
        total = (
            multibreak_interval_cocycles(segmented_bracket(u, v), w)
            + multibreak_interval_cocycles(segmented_bracket(v, w), u)
            + multibreak_interval_cocycles(segmented_bracket(w, u), v)
        )
        np.testing.assert_allclose(total, [0.0, 0.0], atol=1e-7)

    def test_bracket_needs_shared_partition(self) -> None:
        other = SegmentedField((0.0, 1.0, math.pi), ("sin(x)", "sin(x)"))
        with pytest.raises(ValueError):
            segmented_bracket(segmented("sin(2*x)", "sin(2*x)"), other)


class TestIntervalDiffeo:
    """Tests for interval diffeomorphisms and their group cocycle."""

    def test_decreasing_map_rejected(self) -> None:
        with pytest.raises(MonotonicityError):
            IntervalDiffeo(0.0, 1.0, "-x")

    def test_fixed_endpoints_checked(self) -> None:
        with pytest.raises(ValueError):
            IntervalDiffeo(0.0, 1.0, "x + 0.5", fixed_endpoints=True)

    def test_compose(self) -> None:
        outer = IntervalDiffeo(0.5, 2.5, "x*x")
        inner = IntervalDiffeo(0.0, 1.0, "2*x + 0.5")
        composite = outer.compose(inner)
        assert float(composite(0.25)[0]) == pytest.approx(1.0)
        assert composite.image == pytest.approx((0.25, 6.25))

    def test_compose_requires_matching_image(self) -> None:
        with pytest.raises(ComposabilityError):
            chi_interval(IntervalDiffeo.identity(0.0, 1.0), IntervalDiffeo(0.0, 1.0, "2*x"))

    def test_identity_contributes_nothing(self) -> None:
        phi = IntervalDiffeo(0.0, math.pi, "x + 0.2*sin(x)", fixed_endpoints=True)
        assert chi_interval(phi, IntervalDiffeo.identity(0.0, math.pi)) == pytest.approx(0.0, abs=1e-14)

    def test_fixed_endpoint_cocycle(self) -> None:
        phi = IntervalDiffeo(0.0, math.pi, "x + 0.2*sin(x)", fixed_endpoints=True)
        psi = IntervalDiffeo(0.0, math.pi, "x - 0.1*sin(2*x)", fixed_endpoints=True)
        eta = IntervalDiffeo(0.0, math.pi, "x + 0.15*sin(x)*sin(x)", fixed_endpoints=True)
        assert abs(interval_cocycle_residual(phi, psi, eta)) < 1e-8

    def test_moving_endpoint_cocycle(self) -> None:
        eta = IntervalDiffeo(0.0, 1.0, "2*x + 0.5")
        psi = IntervalDiffeo(0.5, 2.5, "x + 0.1*sin(x)")
        lo, hi = psi.image
        phi = IntervalDiffeo(lo, hi, "x*x")
        assert abs(interval_cocycle_residual(phi, psi, eta)) < 1e-8
