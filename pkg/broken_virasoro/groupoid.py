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

"""The groupoid of broken circle diffeomorphisms and its Bott cocycles.

An arrow is a monotone degree-1 lift broken at ``src``; it carries ``src``
onto ``trg``. Arrows compose only when the source of the outer arrow is the
target of the inner one. Per-arc Bott cocycles

  chi_i(phi, psi) = integral over arc i of src(psi) of
                    log(phi_x(psi(x))) * psi_xx(x) / psi_x(x) dx

define the extended groupoid ``(phi, s) (psi, t) = (phi psi, s + t + chi)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .expr import Expression, as_expression, evaluate, substitute
from .geometry import (
    DEFAULT_TOLERANCES,
    BreakConfig,
    BreakMismatchError,
    ComposedMap,
    ExpressionMap,
    MonotonicityError,
    PiecewiseJetMap,
    QuadratureSpec,
    Tolerances,
    integrate_arc,
    invert_map,
    random_break_config,
)

logger = logging.getLogger(__name__)

BASE_MAP_MIN_DETERMINANT = 1e-8
BISECTION_SAMPLES = 10
BISECTION_SEED = 0

PieceLike = Union[Expression, str]


class ComposabilityError(BreakMismatchError):
  """Raised when the source of one arrow is not the target of the other."""


class BaseMapError(ValueError):
  """Raised when a bisection's base map is not invertible at a sample."""


# ---------------------------------------------------------------------------
# Arrows
# ---------------------------------------------------------------------------


class BrokenDiffeo:
  """An arrow of the groupoid: a broken diffeomorphism from ``src`` to ``trg``.

  Attributes:
    map: The underlying lift, broken at ``src``.
    src: Source break configuration.
    trg: Images of the source breaks, labels kept, first angle in [0, 2pi).
  """

  def __init__(
      self,
      lift: PiecewiseJetMap,
      tolerances: Optional[Tolerances] = None,
      check: bool = True,
  ) -> None:
    if lift.degree != 1:
      raise ValueError("Arrows must be degree-1 lifts")
    self.map = lift
    self.tolerances = tolerances or lift.tolerances
    if check:
      lift.validate_monotone()
    self.src = lift.breaks
    self.trg = BreakConfig(lift.image_of_breaks(), self.tolerances.eps_sep).normalized()

  @classmethod
  def from_expressions(
      cls,
      breaks: BreakConfig,
      pieces: Sequence[PieceLike],
      bindings: Optional[Dict[str, float]] = None,
      tolerances: Optional[Tolerances] = None,
  ) -> "BrokenDiffeo":
    return cls(ExpressionMap(breaks, pieces, 1, bindings, tolerances), tolerances)

  @classmethod
  def identity(cls, breaks: BreakConfig, tolerances: Optional[Tolerances] = None) -> "BrokenDiffeo":
    return cls.from_expressions(breaks, ["x"], tolerances=tolerances)

  @classmethod
  def rotation(
      cls, breaks: BreakConfig, angle: float, tolerances: Optional[Tolerances] = None
  ) -> "BrokenDiffeo":
    return cls.from_expressions(breaks, [as_expression("x") + float(angle)], tolerances=tolerances)

  @property
  def n(self) -> int:
    return self.src.n

  def inverse(self) -> "BrokenDiffeo":
    return BrokenDiffeo(invert_map(self.map), self.tolerances)

  def __call__(self, x: Union[float, np.ndarray]) -> np.ndarray:
    return self.map(x)

  def jets(self, x: Union[float, np.ndarray], order: int, right: Union[bool, np.ndarray] = True) -> List[np.ndarray]:
    return self.map.evaluate_jets(x, order, right)

  def __repr__(self) -> str:
    return f"BrokenDiffeo(src={self.src.angles}, trg={self.trg.angles})"


def label_shift(
    phi: BrokenDiffeo, psi: BrokenDiffeo, tolerances: Optional[Tolerances] = None
) -> Optional[int]:
  """Offset ``k`` with break ``j`` of ``trg(psi)`` labelled ``j + k`` in ``src(phi)``.

  ``trg(psi)`` keeps the labels of ``src(psi)``; ``src(phi)`` may list the same
  points in another cyclic order, e.g. smallest angle first. ``None`` when
  the point sets differ.
  """
  tol = (tolerances or phi.tolerances).tol_cont
  return phi.src.label_shift(psi.trg, tol)


def composable(phi: BrokenDiffeo, psi: BrokenDiffeo, tolerances: Optional[Tolerances] = None) -> bool:
  """Whether ``phi o psi`` is defined: ``src(phi) = trg(psi)`` as point sets modulo 2pi."""
  return label_shift(phi, psi, tolerances) is not None


def _require_composable(phi: BrokenDiffeo, psi: BrokenDiffeo) -> int:
  shift = label_shift(phi, psi)
  if shift is None:
    raise ComposabilityError(
        f"Source {phi.src.angles} of the outer arrow is not the target"
        f" {psi.trg.angles} of the inner arrow"
    )
  return shift


def compose_diffeos(phi: BrokenDiffeo, psi: BrokenDiffeo) -> BrokenDiffeo:
  """``phi o psi``, broken at ``src(psi)`` and labelled like it.

  Raises:
    ComposabilityError: If ``src(phi)`` and ``trg(psi)`` are different points.
  """
  _require_composable(phi, psi)
  lift = ComposedMap(phi.map, psi.map, psi.src, phi.tolerances)
  return BrokenDiffeo(lift, phi.tolerances, check=False)


# ---------------------------------------------------------------------------
# Bott cocycles
# ---------------------------------------------------------------------------


def _check_slope(values: np.ndarray, label: str, tolerances: Tolerances) -> None:
  if not np.all(values >= tolerances.delta_min):
    worst = float(np.min(values))
    raise MonotonicityError(
        f"Derivative of {label} drops to {worst!r}, below {tolerances.delta_min}"
    )


def _log_derivative_integrand(phi: BrokenDiffeo, psi: BrokenDiffeo, arc: int):
  a, b = psi.src.arc(arc)
  mid = 0.5 * (a + b)
  tolerances = phi.tolerances

  def integrand(x: np.ndarray) -> np.ndarray:
    y, psi_x, psi_xx = psi.map.arc_jets(arc, x, 2)
    phi_x = phi.map.evaluate_jets(y, 1, x < mid)[1]
    _check_slope(psi_x, "psi", tolerances)
    _check_slope(phi_x, "phi", tolerances)
    return np.log(phi_x) * psi_xx / psi_x

  return integrand


def chi_i(phi: BrokenDiffeo, psi: BrokenDiffeo, i: int, q: Optional[QuadratureSpec] = None) -> float:
  """The Bott cocycle of arc ``i`` of ``src(psi)``.

  Args:
    phi: Outer arrow.
    psi: Inner arrow; ``trg(psi)`` must be the points of ``src(phi)``, labels may shift.
    i: Arc index of ``src(psi)``, 1-based.
    q: Quadrature settings.

  Raises:
    ComposabilityError: If the arrows do not compose.
    MonotonicityError: If a derivative falls below ``delta_min``.
    QuadratureError: If the integral does not converge.
  """
  _require_composable(phi, psi)
  a, b = psi.src.arc(i)
  return integrate_arc(_log_derivative_integrand(phi, psi, i), a, b, q)


def chi(phi: BrokenDiffeo, psi: BrokenDiffeo, q: Optional[QuadratureSpec] = None) -> np.ndarray:
  """All arc components ``(chi_1, ..., chi_n)``."""
  return np.array([chi_i(phi, psi, i, q) for i in range(1, psi.n + 1)])


def groupoid_cocycle_residual(
    phi: BrokenDiffeo,
    psi: BrokenDiffeo,
    eta: BrokenDiffeo,
    q: Optional[QuadratureSpec] = None,
) -> np.ndarray:
  """``chi(phi, psi eta) + chi(psi, eta) - chi(phi psi, eta) - chi(phi, psi)``."""
  _require_composable(phi, psi)
  _require_composable(psi, eta)
  psi_eta = compose_diffeos(psi, eta)
  phi_psi = compose_diffeos(phi, psi)
  return chi(phi, psi_eta, q) + chi(psi, eta, q) - chi(phi_psi, eta, q) - chi(phi, psi, q)


def bott_classical(phi: BrokenDiffeo, psi: BrokenDiffeo, q: Optional[QuadratureSpec] = None) -> float:
  """``integral of log((phi psi)_x) d log psi_x`` over the whole circle."""
  composite = compose_diffeos(phi, psi)
  total = 0.0
  for arc in range(1, psi.n + 1):
    a, b = psi.src.arc(arc)

    def integrand(x: np.ndarray, arc: int = arc) -> np.ndarray:
      _, psi_x, psi_xx = psi.map.arc_jets(arc, x, 2)
      composite_x = composite.map.arc_jets(arc, x, 1)[1]
      _check_slope(composite_x, "phi o psi", phi.tolerances)
      return np.log(composite_x) * psi_xx / psi_x

    total += integrate_arc(integrand, a, b, q)
  return total


class BottRelation(NamedTuple):
  """Both sides of the boundary-corrected Bott relation."""

  lhs: float
  rhs: float
  classical: float
  boundary: float

  @property
  def residual(self) -> float:
    return self.lhs - self.rhs


def bott_boundary_relation(
    phi: BrokenDiffeo, psi: BrokenDiffeo, q: Optional[QuadratureSpec] = None
) -> BottRelation:
  """Compares ``sum_i chi_i`` with the classical Bott integral.

  The right-hand side is the classical integral plus
  ``1/2 sum_i (log^2 psi_x(p_i+) - log^2 psi_x(p_i-))``, which vanishes
  when ``psi_x`` is continuous.
  """
  lhs = float(np.sum(chi(phi, psi, q)))
  classical = bott_classical(phi, psi, q)
  boundary = 0.0
  for i, angle in enumerate(psi.src.angles, start=1):
    right = float(psi.map.arc_jets(i, np.array([angle]), 1)[1][0])
    if i == 1:
      left = float(psi.map.arc_jets(psi.n, np.array([psi.src.upper]), 1)[1][0])
    else:
      left = float(psi.map.arc_jets(i - 1, np.array([angle]), 1)[1][0])
    boundary += 0.5 * (np.log(right) ** 2 - np.log(left) ** 2)
  return BottRelation(lhs, classical + boundary, classical, boundary)


# ---------------------------------------------------------------------------
# The extended groupoid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtendedDiffeo:
  """An arrow with a central charge in R^n."""

  arrow: BrokenDiffeo
  charge: Tuple[float, ...]

  def __post_init__(self) -> None:
    charge = tuple(float(c) for c in self.charge)
    object.__setattr__(self, "charge", charge)
    if len(charge) != self.arrow.n:
      raise ValueError(f"Expected {self.arrow.n} charge components, got {len(charge)}")

  @classmethod
  def unit(cls, breaks: BreakConfig, tolerances: Optional[Tolerances] = None) -> "ExtendedDiffeo":
    return cls(BrokenDiffeo.identity(breaks, tolerances), (0.0,) * breaks.n)


def extended_multiply(
    a: ExtendedDiffeo, b: ExtendedDiffeo, q: Optional[QuadratureSpec] = None
) -> ExtendedDiffeo:
  """``(phi, s) (psi, t) = (phi psi, s + t + chi(phi, psi))``.

  Charges are indexed by source arcs; ``s`` is relabelled onto the arcs of
  ``src(psi)`` before the sum.
  """
  shift = _require_composable(a.arrow, b.arrow)
  product = compose_diffeos(a.arrow, b.arrow)
  outer = np.roll(np.asarray(a.charge), -shift)
  charge = outer + np.asarray(b.charge) + chi(a.arrow, b.arrow, q)
  return ExtendedDiffeo(product, tuple(charge))


def extended_inverse(a: ExtendedDiffeo, q: Optional[QuadratureSpec] = None) -> ExtendedDiffeo:
  """``(phi, s)^-1 = (phi^-1, -s - chi(phi, phi^-1))``."""
  inverse = a.arrow.inverse()
  charge = -np.asarray(a.charge) - chi(a.arrow, inverse, q)
  return ExtendedDiffeo(inverse, tuple(charge))


def associativity_residual(
    a: ExtendedDiffeo,
    b: ExtendedDiffeo,
    c: ExtendedDiffeo,
    q: Optional[QuadratureSpec] = None,
) -> np.ndarray:
  """Charge of ``a (b c)`` minus charge of ``(a b) c``."""
  left = extended_multiply(a, extended_multiply(b, c, q), q)
  right = extended_multiply(extended_multiply(a, b, q), c, q)
  return np.asarray(left.charge) - np.asarray(right.charge)


# ---------------------------------------------------------------------------
# Bisections
# ---------------------------------------------------------------------------


class Bisection:
  """A family ``phi(x, p)`` of arrows with ``src = p``.

  As a map of the circle times the configuration space it reads
  ``(x, p) -> (phi(x, p), f(p))`` with base map
  ``f(p) = (phi(p_1, p), ..., phi(p_n, p))``.
  """

  def __init__(
      self,
      n: int,
      pieces: Sequence[PieceLike],
      tolerances: Optional[Tolerances] = None,
  ) -> None:
    if not 1 <= n <= 9:
      raise ValueError(f"Bisections support 1..9 breaks, got {n}")
    expressions = tuple(as_expression(piece) for piece in pieces)
    if len(expressions) not in (1, n):
      raise ValueError(f"Expected 1 or {n} pieces, got {len(expressions)}")
    allowed = {"x", *(f"p{i}" for i in range(1, n + 1))}
    for piece in expressions:
      unknown = piece.free_variables - allowed
      if unknown:
        raise ValueError(f"Piece {piece} uses variables outside x, p1..p{n}: {sorted(unknown)}")
    self.n = n
    self.is_global = len(expressions) == 1
    self.pieces = expressions * n if self.is_global else expressions
    self.tolerances = tolerances or DEFAULT_TOLERANCES

  @classmethod
  def identity(cls, n: int, tolerances: Optional[Tolerances] = None) -> "Bisection":
    return cls(n, ["x"], tolerances)

  def piece(self, arc: int) -> Expression:
    return self.pieces[arc - 1]

  def distinct_pieces(self) -> Tuple[Expression, ...]:
    return self.pieces[:1] if self.is_global else self.pieces

  def base_expressions(self) -> Tuple[Expression, ...]:
    return tuple(
        substitute(self.piece(i), {"x": f"p{i}"}) for i in range(1, self.n + 1)
    )

  def arrow(self, p: BreakConfig) -> BrokenDiffeo:
    """The arrow ``phi(., p)``, checked continuous and monotone."""
    if p.n != self.n:
      raise ValueError(f"Configuration has {p.n} breaks, bisection expects {self.n}")
    lift = ExpressionMap(p, self.distinct_pieces(), 1, p.binding(), self.tolerances)
    return BrokenDiffeo(lift, self.tolerances)

  def base_map(self, p: BreakConfig) -> BreakConfig:
    """``f(p)`` with labels kept (not normalised)."""
    env = p.binding()
    values = tuple(float(evaluate(e, env)) for e in self.base_expressions())
    return BreakConfig(values, self.tolerances.eps_sep)

  def jacobian(self, p: BreakConfig) -> np.ndarray:
    env = p.binding()
    rows = []
    for e in self.base_expressions():
      rows.append([float(evaluate(e.derivative(f"p{j}"), env)) for j in range(1, self.n + 1)])
    return np.array(rows)

  def evaluate(self, x: float, p: BreakConfig) -> Tuple[float, BreakConfig]:
    """``(phi(x, p), f(p))``."""
    return float(self.arrow(p)(x)[0]), self.base_map(p)

  def sample_configs(self) -> List[BreakConfig]:
    rng = np.random.default_rng(BISECTION_SEED)
    return [random_break_config(self.n, rng) for _ in range(BISECTION_SAMPLES)]


def bisection_compose(
    phi: Bisection, psi: Bisection, samples: Optional[Sequence[BreakConfig]] = None
) -> Bisection:
  """``(phi psi)(x, p) = phi(psi(x, p), f_psi(p))``.

  The base map of the product is ``f_phi o f_psi``. Its invertibility is
  only sampled: the Jacobian determinant is checked at ``samples`` (ten
  seeded random configurations by default). A product that passes is not
  proven to have a globally invertible base map.

  Raises:
    BaseMapError: If the product's base map has a vanishing Jacobian at a
      sample configuration.
    ValueError: If the break counts differ.
  """
  if phi.n != psi.n:
    raise ValueError(f"Cannot compose bisections with {phi.n} and {psi.n} breaks")
  transport = {f"p{i}": e for i, e in enumerate(psi.base_expressions(), start=1)}
  if phi.is_global and psi.is_global:
    arcs = [1]
  else:
    arcs = list(range(1, phi.n + 1))
  pieces = []
  for arc in arcs:
    mapping = dict(transport)
    mapping["x"] = psi.piece(arc)
    pieces.append(substitute(phi.piece(arc), mapping))
  product = Bisection(phi.n, pieces, phi.tolerances)
  for p in samples if samples is not None else product.sample_configs():
    determinant = float(np.linalg.det(product.jacobian(p)))
    if abs(determinant) < BASE_MAP_MIN_DETERMINANT:
      raise BaseMapError(
          f"Base map Jacobian determinant {determinant!r} at p = {p.angles}"
      )
  return product


def base_map_composition_residual(
    phi: Bisection, psi: Bisection, samples: Sequence[BreakConfig]
) -> float:
  """Largest ``|f_{phi psi}(p) - f_phi(f_psi(p))|`` over the samples."""
  product = bisection_compose(phi, psi, samples)
  worst = 0.0
  for p in samples:
    direct = np.asarray(product.base_map(p).angles)
    chained = np.asarray(phi.base_map(psi.base_map(p)).angles)
    worst = max(worst, float(np.max(np.abs(direct - chained))))
  return worst
