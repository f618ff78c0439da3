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

"""Cocycles on an interval and its diffeomorphisms.

On ``[a, b]`` the fields vanishing at both ends carry the cocycle
``integral of (u_x v_xx - u_xx v_x)``. In the basis ``e_m = sin(m x) d/dx``
of ``[0, pi]`` it is known in closed form, which gives an exact oracle and an
exact-rational certificate that the cocycle is not a coboundary.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from .algebroid import IsotropyError
from .expr import X, Expression, as_expression, evaluate, sin, substitute
from .geometry import (
    DEFAULT_TOLERANCES,
    ContinuityError,
    MonotonicityError,
    QuadratureSpec,
    Tolerances,
    integrate_arc,
)
from .groupoid import ComposabilityError

logger = logging.getLogger(__name__)

MONOTONE_SAMPLES = 65
MAX_TABLE_BOUND = 99

PieceLike = Union[Expression, str]


def _jets(profile: Expression, x: np.ndarray, order: int) -> List[np.ndarray]:
  points = np.asarray(x, dtype=float)
  return [
      np.array(np.broadcast_to(evaluate(profile.derivative("x", k), {"x": points}), points.shape))
      for k in range(order + 1)
  ]


@dataclass(frozen=True)
class IntervalField:
  """A smooth field ``u(x) d/dx`` on ``[a, b]``."""

  a: float
  b: float
  profile: Expression
  vanishing: bool = True
  tolerances: Tolerances = DEFAULT_TOLERANCES

  def __post_init__(self) -> None:
    object.__setattr__(self, "profile", as_expression(self.profile))
    if not self.a < self.b:
      raise ValueError(f"Interval [{self.a}, {self.b}] is empty")
    if self.profile.free_variables - {"x"}:
      raise ValueError(f"Interval profiles depend on x only, got {self.profile}")
    if self.vanishing:
      ends = np.abs(self(np.array([self.a, self.b])))
      if not np.all(ends < self.tolerances.tol_cont):
        raise IsotropyError(
            f"Field {self.profile} does not vanish at the endpoints: {ends.tolist()}"
        )

  @classmethod
  def sin_basis(cls, m: int) -> "IntervalField":
    """``e_m = sin(m x) d/dx`` on ``[0, pi]``."""
    if m < 1:
      raise ValueError(f"Sin-basis indices start at 1, got {m}")
    return cls(0.0, math.pi, sin(X * m))

  def __call__(self, x: Union[float, np.ndarray]) -> np.ndarray:
    return _jets(self.profile, np.atleast_1d(x), 0)[0]

  def jets(self, x: np.ndarray, order: int) -> List[np.ndarray]:
    return _jets(self.profile, x, order)


@dataclass(frozen=True)
class SegmentedField:
  """A continuous field given by one profile per subinterval of a partition."""

  partition: Tuple[float, ...]
  pieces: Tuple[Expression, ...]
  tolerances: Tolerances = DEFAULT_TOLERANCES

  def __post_init__(self) -> None:
    partition = tuple(float(q) for q in self.partition)
    pieces = tuple(as_expression(p) for p in self.pieces)
    object.__setattr__(self, "partition", partition)
    object.__setattr__(self, "pieces", pieces)
    if len(partition) < 2 or any(b <= a for a, b in zip(partition, partition[1:])):
      raise ValueError(f"Partition {partition} is not strictly increasing")
    if len(pieces) != len(partition) - 1:
      raise ValueError(f"Expected {len(partition) - 1} pieces, got {len(pieces)}")
    for j in range(1, len(pieces)):
      q = np.array([partition[j]])
      gap = abs(float(_jets(pieces[j - 1], q, 0)[0][0] - _jets(pieces[j], q, 0)[0][0]))
      if gap > self.tolerances.tol_cont:
        raise ContinuityError(f"Discontinuity of {gap!r} at q{j} = {partition[j]!r}")

  @classmethod
  def from_field(cls, u: IntervalField) -> "SegmentedField":
    return cls((u.a, u.b), (u.profile,), u.tolerances)

  @property
  def n(self) -> int:
    return len(self.pieces)

  def segment(self, j: int) -> Tuple[float, float]:
    """Bounds of subinterval ``j`` (1-based)."""
    return self.partition[j - 1], self.partition[j]

  def values_at_nodes(self) -> np.ndarray:
    values = [float(_jets(self.pieces[0], np.array([self.partition[0]]), 0)[0][0])]
    for j, piece in enumerate(self.pieces, start=1):
      values.append(float(_jets(piece, np.array([self.partition[j]]), 0)[0][0]))
    return np.array(values)


# ---------------------------------------------------------------------------
# Lie algebra cocycles
# ---------------------------------------------------------------------------


def _skew_integrand(u: Expression, v: Expression):
  def integrand(x: np.ndarray) -> np.ndarray:
    _, ux, uxx = _jets(u, x, 2)
    _, vx, vxx = _jets(v, x, 2)
    return ux * vxx - uxx * vx

  return integrand


def omega_interval(
    u: IntervalField, v: IntervalField, q: Optional[QuadratureSpec] = None
) -> float:
  """``integral over [a, b] of (u_x v_xx - u_xx v_x)`` for fields vanishing at the ends.

  Raises:
    IsotropyError: If a field is not flagged as vanishing.
    ValueError: If the intervals differ.
    QuadratureError: If the integral does not converge.
  """
  if not (u.vanishing and v.vanishing):
    raise IsotropyError("The interval cocycle is defined on fields vanishing at the ends")
  tol = u.tolerances.tol_cont
  if abs(u.a - v.a) > tol or abs(u.b - v.b) > tol:
    raise ValueError(f"Fields live on [{u.a}, {u.b}] and [{v.a}, {v.b}]")
  return integrate_arc(_skew_integrand(u.profile, v.profile), u.a, u.b, q)


def interval_bracket(u: IntervalField, v: IntervalField) -> IntervalField:
  """``(u v_x - u_x v) d/dx``."""
  profile = u.profile * v.profile.derivative("x") - u.profile.derivative("x") * v.profile
  return IntervalField(u.a, u.b, profile, u.vanishing and v.vanishing, u.tolerances)


def multibreak_interval_cocycles(
    u: Union[SegmentedField, IntervalField],
    v: Union[SegmentedField, IntervalField],
    q: Optional[QuadratureSpec] = None,
) -> np.ndarray:
  """One interval cocycle per subinterval of a shared partition.

  Raises:
    IsotropyError: If a field does not vanish at every partition node.
    ValueError: If the partitions differ.
  """
  su = u if isinstance(u, SegmentedField) else SegmentedField.from_field(u)
  sv = v if isinstance(v, SegmentedField) else SegmentedField.from_field(v)
  if not np.allclose(su.partition, sv.partition, rtol=0.0, atol=su.tolerances.tol_cont):
    raise ValueError(f"Partitions {su.partition} and {sv.partition} differ")
  for label, field in (("u", su), ("v", sv)):
    nodes = np.abs(field.values_at_nodes())
    if not np.all(nodes < field.tolerances.tol_cont):
      raise IsotropyError(f"Field {label} does not vanish at the partition: {nodes.tolist()}")
  return np.array(
      [
          integrate_arc(_skew_integrand(pu, pv), *su.segment(j), q)
          for j, (pu, pv) in enumerate(zip(su.pieces, sv.pieces), start=1)
      ]
  )


class FormComparison(NamedTuple):
  """Skew form, third-order form and the boundary term ``[u_x v_x]_a^b``."""

  skew: float
  third_order: float
  boundary: float

  @property
  def defect(self) -> float:
    """``skew - third_order + boundary``; zero up to quadrature error."""
    return self.skew - self.third_order + self.boundary


def boundary_form_defect(
    u: IntervalField, v: IntervalField, q: Optional[QuadratureSpec] = None
) -> FormComparison:
  """Compares ``integral of (u_x v_xx - u_xx v_x)`` with ``-2 integral of u v_xxx``.

  On the circle both expressions define the same cocycle; on an interval
  they differ by ``[u_x v_x]_a^b`` when ``u`` vanishes at the ends.
  """
  skew = omega_interval(u, v, q)
  third_profile = v.profile.derivative("x", 3)

  def third_integrand(x: np.ndarray) -> np.ndarray:
    return -2.0 * _jets(u.profile, x, 0)[0] * _jets(third_profile, x, 0)[0]

  third_order = integrate_arc(third_integrand, u.a, u.b, q)
  ends = np.array([u.a, u.b])
  product = _jets(u.profile, ends, 1)[1] * _jets(v.profile, ends, 1)[1]
  return FormComparison(skew, third_order, float(product[1] - product[0]))


# ---------------------------------------------------------------------------
# Exact sin-basis values
# ---------------------------------------------------------------------------


def sin_basis_bracket(m: int, n: int) -> Dict[int, Fraction]:
  """``[e_m, e_n]`` as exact coefficients ``{k: c_k}``.

  ``[e_m, e_n] = (n - m)/2 e_{m+n} + (m + n)/2 e_{m-n}`` with
  ``e_{-k} = -e_k`` and ``e_0 = 0``; zero coefficients are dropped.
  """
  if m < 1 or n < 1:
    raise ValueError(f"Sin-basis indices start at 1, got ({m}, {n})")
  terms: Dict[int, Fraction] = {}

  def accumulate(index: int, coefficient: Fraction) -> None:
    if index == 0:
      return
    if index < 0:
      index, coefficient = -index, -coefficient
    terms[index] = terms.get(index, Fraction(0)) + coefficient

  accumulate(m + n, Fraction(n - m, 2))
  accumulate(m - n, Fraction(m + n, 2))
  return {k: c for k, c in sorted(terms.items()) if c != 0}


def sin_basis_omega(m: int, n: int) -> Fraction:
  """Exact ``Omega(e_m, e_n)`` on ``[0, pi]``.

  Equals ``2 m n (m^2 + n^2) / (m^2 - n^2)`` for opposite parity and zero
  otherwise; ``m == n`` is zero by antisymmetry.
  """
  if m < 1 or n < 1:
    raise ValueError(f"Sin-basis indices start at 1, got ({m}, {n})")
  if m == n:
    logger.info("Omega(e_%d, e_%d) is zero by antisymmetry", m, n)
    return Fraction(0)
  if (m - n) % 2 == 0:
    return Fraction(0)
  return Fraction(2 * m * n * (m * m + n * n), m * m - n * n)


def sin_basis_table(bound: int, q: Optional[QuadratureSpec] = None) -> List[Tuple[int, int, Fraction, float]]:
  """Rows ``(m, n, exact, quadrature)`` for ``1 <= m < n <= bound``."""
  if not 1 <= bound <= MAX_TABLE_BOUND:
    raise ValueError(f"Table bound must be in 1..{MAX_TABLE_BOUND}, got {bound}")
  rows = []
  for m in range(1, bound + 1):
    for n in range(m + 1, bound + 1):
      numeric = omega_interval(IntervalField.sin_basis(m), IntervalField.sin_basis(n), q)
      rows.append((m, n, sin_basis_omega(m, n), numeric))
  return rows


class CertificateRow(NamedTuple):
  """One coboundary equation ``lhs = k lambda_l - l lambda_k`` in exact arithmetic."""

  k: int
  l: int
  lambda_l: Fraction
  lambda_k: Fraction
  lhs: Fraction
  rhs: Fraction
  residual: Fraction


@dataclass(frozen=True)
class Certificate:
  """Rows of the coboundary ansatz and the verdict.

  The certificate is valid when some row has a nonzero residual; ``witness``
  is the first such ``(k, l)`` in increasing order.
  """

  bound: int
  lambdas: Dict[int, Fraction]
  rows: Tuple[CertificateRow, ...]

  @property
  def witness(self) -> Optional[Tuple[int, int]]:
    for row in self.rows:
      if row.residual != 0:
        return row.k, row.l
    return None

  @property
  def valid(self) -> bool:
    return self.witness is not None

  def sin_basis_mismatches(self) -> List[Tuple[int, int]]:
    """Rows whose left side differs from ``Omega(e_m, e_n)``, ``m = (k+l)/2``, ``n = (k-l)/2``."""
    return [
        (row.k, row.l)
        for row in self.rows
        if row.lhs != sin_basis_omega((row.k + row.l) // 2, (row.k - row.l) // 2)
    ]


def certificate_lambda(k: int) -> Fraction:
  """``lambda_1 = 0`` and ``lambda_k = -(k^4 - 1) / (4 k)``."""
  if k == 1:
    return Fraction(0)
  return Fraction(-(k**4 - 1), 4 * k)


def nontriviality_certificate(bound: int) -> Certificate:
  """Exact certificate that the interval cocycle is not a coboundary.

  A coboundary ``Omega(e_m, e_n) = lambda([e_m, e_n])`` forces, with
  ``k = m + n`` and ``l = m - n`` odd, the equations
  ``(k^4 - l^4) / (4 k l) = k lambda_l - l lambda_k``. The rows with
  ``l = 1`` fix every ``lambda_k``; a later row then fails.

  Args:
    bound: Largest odd index ``K``; at least 5.

  Raises:
    ValueError: If ``bound`` is even, below 5 or above 99.
  """
  if bound < 5 or bound % 2 == 0 or bound > MAX_TABLE_BOUND:
    raise ValueError(f"Certificate bound must be odd and in 5..{MAX_TABLE_BOUND}, got {bound}")
  odd = list(range(1, bound + 1, 2))
  lambdas = {k: certificate_lambda(k) for k in odd}
  rows = []
  for k in odd:
    for l in odd:
      if l >= k:
        break
      lhs = Fraction(k**4 - l**4, 4 * k * l)
      rhs = k * lambdas[l] - l * lambdas[k]
      rows.append(CertificateRow(k, l, lambdas[l], lambdas[k], lhs, rhs, lhs - rhs))
  return Certificate(bound, lambdas, tuple(rows))


# ---------------------------------------------------------------------------
# Interval diffeomorphisms and their group cocycle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntervalDiffeo:
  """An increasing map of ``[a, b]`` onto its image."""

  a: float
  b: float
  profile: Expression
  fixed_endpoints: bool = False
  tolerances: Tolerances = DEFAULT_TOLERANCES

  def __post_init__(self) -> None:
    object.__setattr__(self, "profile", as_expression(self.profile))
    if not self.a < self.b:
      raise ValueError(f"Interval [{self.a}, {self.b}] is empty")
    if self.profile.free_variables - {"x"}:
      raise ValueError(f"Interval maps depend on x only, got {self.profile}")
    grid = np.linspace(self.a, self.b, MONOTONE_SAMPLES)
    slope = self.jets(grid, 1)[1]
    worst = int(np.argmin(slope))
    if not slope[worst] >= self.tolerances.delta_min:
      raise MonotonicityError(
          f"Derivative {slope[worst]!r} below {self.tolerances.delta_min} at x = {grid[worst]!r}"
      )
    if self.fixed_endpoints:
      lo, hi = self.image
      tol = self.tolerances.tol_cont
      if abs(lo - self.a) > tol or abs(hi - self.b) > tol:
        raise ValueError(f"Map sends [{self.a}, {self.b}] to [{lo}, {hi}], not onto itself")

  @classmethod
  def identity(cls, a: float, b: float) -> "IntervalDiffeo":
    return cls(a, b, X, fixed_endpoints=True)

  @property
  def image(self) -> Tuple[float, float]:
    values = self.jets(np.array([self.a, self.b]), 0)[0]
    return float(values[0]), float(values[1])

  def jets(self, x: np.ndarray, order: int) -> List[np.ndarray]:
    return _jets(self.profile, x, order)

  def __call__(self, x: Union[float, np.ndarray]) -> np.ndarray:
    return _jets(self.profile, np.atleast_1d(x), 0)[0]

  def compose(self, inner: "IntervalDiffeo") -> "IntervalDiffeo":
    """``self o inner``, defined when ``inner`` maps onto the source of ``self``."""
    _require_segment_composable(self, inner)
    profile = substitute(self.profile, {"x": inner.profile})
    return IntervalDiffeo(
        inner.a, inner.b, profile, self.fixed_endpoints and inner.fixed_endpoints, self.tolerances
    )


def _require_segment_composable(phi: IntervalDiffeo, psi: IntervalDiffeo) -> None:
  lo, hi = psi.image
  tol = phi.tolerances.tol_cont
  if abs(lo - phi.a) > tol or abs(hi - phi.b) > tol:
    raise ComposabilityError(
        f"Image [{lo}, {hi}] of the inner map is not the source [{phi.a}, {phi.b}]"
    )


def chi_interval(
    phi: IntervalDiffeo, psi: IntervalDiffeo, q: Optional[QuadratureSpec] = None
) -> float:
  """``integral over src(psi) of log(phi_x(psi)) psi_xx / psi_x``.

  Raises:
    ComposabilityError: If the image of ``psi`` is not the source of ``phi``.
    MonotonicityError: If a derivative falls below ``delta_min``.
  """
  _require_segment_composable(phi, psi)
  delta = phi.tolerances.delta_min

  def integrand(x: np.ndarray) -> np.ndarray:
    y, psi_x, psi_xx = psi.jets(x, 2)
    phi_x = phi.jets(y, 1)[1]
    if not (np.all(psi_x >= delta) and np.all(phi_x >= delta)):
      raise MonotonicityError(f"Derivative below {delta} inside [{psi.a}, {psi.b}]")
    return np.log(phi_x) * psi_xx / psi_x

  return integrate_arc(integrand, psi.a, psi.b, q)


def interval_cocycle_residual(
    phi: IntervalDiffeo,
    psi: IntervalDiffeo,
    eta: IntervalDiffeo,
    q: Optional[QuadratureSpec] = None,
) -> float:
  """``chi(phi, psi eta) + chi(psi, eta) - chi(phi psi, eta) - chi(phi, psi)``."""
  psi_eta = psi.compose(eta)
  phi_psi = phi.compose(psi)
  return (
      chi_interval(phi, psi_eta, q)
      + chi_interval(psi, eta, q)
      - chi_interval(phi_psi, eta, q)
      - chi_interval(phi, psi, q)
  )


def segmented_bracket(u: SegmentedField, v: SegmentedField) -> SegmentedField:
  """``(u v_x - u_x v) d/dx`` piece by piece on a shared partition."""
  if not np.allclose(u.partition, v.partition, rtol=0.0, atol=u.tolerances.tol_cont):
    raise ValueError(f"Partitions {u.partition} and {v.partition} differ")
  pieces = tuple(
      pu * pv.derivative("x") - pu.derivative("x") * pv for pu, pv in zip(u.pieces, v.pieces)
  )
  return SegmentedField(u.partition, pieces, u.tolerances)
