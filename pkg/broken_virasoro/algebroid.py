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

"""The Lie algebroid of broken vector fields over break configurations.

A section is a family ``u(x, p) d/dx`` of continuous fields whose breaks sit
at ``p = (p_1, ..., p_n)``. The anchor sends a section to its values at the
breaks, and the bracket is

  [[u, v]] = (u v_x - v u_x)
             + sum_i (u(p_i, p) dv/dp_i - v(p_i, p) du/dp_i).

Each arc carries a Gelfand-Fuchs type cocycle

  Omega_i(u, v) = integral over [p_i, p_{i+1}] of (u_x v_xx - u_xx v_x) dx.

Everything symbolic stays symbolic; only Lie derivatives of quadrature
valued functions of ``p`` use finite differences.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import (
    Dict,
    List,
    NamedTuple,
    Optional,
    Protocol,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from .expr import Const, Expression, as_expression, evaluate, substitute
from .geometry import (
    BreakConfig,
    BreakMismatchError,
    ExpressionMap,
    QuadratureSpec,
    Tolerances,
    integrate_arc,
    random_break_config,
)

logger = logging.getLogger(__name__)

DEFAULT_LIE_STEP = 1e-4
CONTINUITY_SAMPLES = 10
CONTINUITY_SEED = 0

PieceLike = Union[Expression, str]


class IsotropyError(ValueError):
  """Raised when a field expected to vanish at the breaks does not."""


# ---------------------------------------------------------------------------
# Fields and sections
# ---------------------------------------------------------------------------


class BrokenField:
  """A continuous field ``u(x) d/dx`` over a fixed break configuration.

  Attributes:
    breaks: The break configuration.
    pieces: One expression per arc (a single global piece is repeated).
    bindings: Values of break variables used by the pieces.
  """

  def __init__(
      self,
      breaks: BreakConfig,
      pieces: Sequence[PieceLike],
      bindings: Optional[Dict[str, float]] = None,
      tolerances: Optional[Tolerances] = None,
  ) -> None:
    self._map = ExpressionMap(breaks, pieces, 0, bindings, tolerances)
    self.breaks = breaks
    self.pieces = self._map.pieces
    self.is_global = self._map.is_global
    self.bindings = self._map.bindings
    self.tolerances = self._map.tolerances

  def piece(self, arc: int) -> Expression:
    return self._map.piece(arc)

  def arc_jets(self, arc: int, x: np.ndarray, order: int) -> List[np.ndarray]:
    return self._map.arc_jets(arc, np.asarray(x, dtype=float), order)

  def jets(self, x: np.ndarray, order: int, right: Union[bool, np.ndarray] = True) -> List[np.ndarray]:
    return self._map.evaluate_jets(x, order, right)

  def __call__(self, x: Union[float, np.ndarray]) -> np.ndarray:
    return self._map(x)

  def anchor(self) -> np.ndarray:
    """Values at the breaks."""
    return np.array(
        [
            float(self.arc_jets(i, np.array([a]), 0)[0][0])
            for i, a in enumerate(self.breaks.angles, start=1)
        ]
    )

  def vanishes_at_breaks(self, tol: Optional[float] = None) -> bool:
    tol = self.tolerances.tol_cont if tol is None else tol
    return bool(np.all(np.abs(self.anchor()) < tol))

  def scaled(self, factor: float) -> "BrokenField":
    return BrokenField(
        self.breaks,
        [Const(factor) * piece for piece in self._distinct_pieces()],
        self.bindings,
        self.tolerances,
    )

  def _distinct_pieces(self) -> Tuple[Expression, ...]:
    return self.pieces[:1] if self.is_global else self.pieces

  def __repr__(self) -> str:
    pieces = ", ".join(str(piece) for piece in self._distinct_pieces())
    return f"BrokenField(breaks={self.breaks.angles}, pieces=[{pieces}])"


class Section:
  """A family ``u(x, p) d/dx`` of broken fields over configurations ``p``.

  Pieces are expressions in ``x`` and ``p1`` ... ``pn``. A section built
  around a ``reference`` configuration (for example a p-independent
  extension of a single field) is only checked there.
  """

  def __init__(
      self,
      n: int,
      pieces: Sequence[PieceLike],
      reference: Optional[BreakConfig] = None,
  ) -> None:
    if not 1 <= n <= 9:
      raise ValueError(f"Sections support 1..9 breaks, got {n}")
    expressions = tuple(as_expression(piece) for piece in pieces)
    if len(expressions) not in (1, n):
      raise ValueError(f"Expected 1 or {n} pieces, got {len(expressions)}")
    allowed = {"x", *(f"p{i}" for i in range(1, n + 1))}
    for piece in expressions:
      unknown = piece.free_variables - allowed
      if unknown:
        raise ValueError(
            f"Piece {piece} uses variables {', '.join(sorted(unknown))} outside x, p1..p{n}"
        )
    if reference is not None and reference.n != n:
      raise ValueError(f"Reference configuration has {reference.n} breaks, expected {n}")
    self.n = n
    self.is_global = len(expressions) == 1
    self.pieces = expressions if not self.is_global else expressions * n
    self.reference = reference

  @classmethod
  def from_field(cls, field: BrokenField) -> "Section":
    """The p-independent extension of a field, anchored at its breaks."""
    if field.bindings:
      pieces = [substitute(piece, field.bindings) for piece in field._distinct_pieces()]
    else:
      pieces = list(field._distinct_pieces())
    reference = None if field.is_global else field.breaks
    return cls(field.breaks.n, pieces, reference)

  def piece(self, arc: int) -> Expression:
    return self.pieces[arc - 1]

  def distinct_pieces(self) -> Tuple[Expression, ...]:
    return self.pieces[:1] if self.is_global else self.pieces

  def at(self, p: BreakConfig, tolerances: Optional[Tolerances] = None) -> BrokenField:
    """Specialises the section to configuration ``p`` (continuity checked)."""
    if p.n != self.n:
      raise ValueError(f"Configuration has {p.n} breaks, section expects {self.n}")
    return BrokenField(p, self.distinct_pieces(), p.binding(), tolerances)

  def anchor_expressions(self) -> Tuple[Expression, ...]:
    """``u(p_i, p)`` as expressions in the break variables."""
    return tuple(
        substitute(self.piece(i), {"x": f"p{i}"}) for i in range(1, self.n + 1)
    )

  def value(self, x: Union[float, np.ndarray], p: BreakConfig) -> np.ndarray:
    return self.at(p)(x)

  def sample_configs(self) -> List[BreakConfig]:
    if self.reference is not None:
      return [self.reference]
    rng = np.random.default_rng(CONTINUITY_SEED)
    return [random_break_config(self.n, rng) for _ in range(CONTINUITY_SAMPLES)]

  def __repr__(self) -> str:
    pieces = ", ".join(str(piece) for piece in self.distinct_pieces())
    return f"Section(n={self.n}, pieces=[{pieces}])"


FieldLike = Union[BrokenField, Section]


def as_section(u: FieldLike) -> Section:
  return u if isinstance(u, Section) else Section.from_field(u)


def _specialize(u: FieldLike, p: BreakConfig, tolerances: Optional[Tolerances] = None) -> BrokenField:
  if isinstance(u, Section):
    return u.at(p, tolerances)
  tol = (tolerances or u.tolerances).tol_cont
  if not u.breaks.matches(p, tol):
    raise BreakMismatchError(f"Field breaks {u.breaks.angles} differ from {p.angles}")
  return u


def scale_section(f: PieceLike, v: Section) -> Section:
  """``f(p) v``: multiplication by a base function."""
  factor = as_expression(f)
  if "x" in factor.free_variables:
    raise ValueError("A base function may not depend on x")
  return Section(v.n, [factor * piece for piece in v.distinct_pieces()], v.reference)


# ---------------------------------------------------------------------------
# Anchor and bracket
# ---------------------------------------------------------------------------


def anchor(u: FieldLike, p: Optional[BreakConfig] = None) -> np.ndarray:
  """``(u(p_1, p), ..., u(p_n, p))``."""
  if isinstance(u, Section):
    if p is None:
      raise ValueError("A configuration is required to anchor a section")
    return u.at(p).anchor()
  return _specialize(u, p).anchor() if p is not None else u.anchor()


def _bracket_piece(u: Section, v: Section, arc: int, au: Sequence[Expression], av: Sequence[Expression]) -> Expression:
  uj, vj = u.piece(arc), v.piece(arc)
  result = uj * vj.derivative("x") - vj * uj.derivative("x")
  for i in range(1, u.n + 1):
    name = f"p{i}"
    result = result + au[i - 1] * vj.derivative(name) - av[i - 1] * uj.derivative(name)
  return result


def bracket_sections(
    u: FieldLike,
    v: FieldLike,
    samples: Optional[Sequence[BreakConfig]] = None,
    tolerances: Optional[Tolerances] = None,
) -> Section:
  """The algebroid bracket of two sections.

  Args:
    u: First section (a field is extended p-independently).
    v: Second section.
    samples: Configurations at which continuity of the result is checked;
      defaults to the reference configuration or 10 seeded random ones.
    tolerances: Tolerances for the continuity check.

  Returns:
    The bracket as a symbolic section.

  Raises:
    ContinuityError: If the result is discontinuous at a sample.
    ValueError: If the break counts differ.
  """
  su, sv = as_section(u), as_section(v)
  if su.n != sv.n:
    raise ValueError(f"Cannot bracket sections with {su.n} and {sv.n} breaks")
  au, av = su.anchor_expressions(), sv.anchor_expressions()
  arcs = [1] if su.is_global and sv.is_global else range(1, su.n + 1)
  pieces = [_bracket_piece(su, sv, arc, au, av) for arc in arcs]
  reference = su.reference or sv.reference
  result = Section(su.n, pieces, reference)
  if samples is None:
    samples = result.sample_configs()
  for p in samples:
    result.at(p, tolerances)
  return result


@dataclass(frozen=True)
class EmbeddedField:
  """A vector field on the circle times the configuration space.

  Coordinates are ``(x, p1, ..., pn)``. The ``x`` component may differ per
  arc; the ``p`` components depend on the configuration only.
  """

  n: int
  x_components: Tuple[Expression, ...]
  p_components: Tuple[Expression, ...]

  def coordinates(self) -> Tuple[str, ...]:
    return ("x",) + tuple(f"p{i}" for i in range(1, self.n + 1))

  def x_component(self, arc: int) -> Expression:
    return self.x_components[arc - 1]

  def component(self, coordinate: str, arc: int) -> Expression:
    if coordinate == "x":
      return self.x_component(arc)
    return self.p_components[int(coordinate[1:]) - 1]

  def evaluate(self, x: float, p: BreakConfig) -> np.ndarray:
    arc = p.locate(x)
    env: Dict[str, float] = dict(p.binding())
    env["x"] = float(x)
    return np.array(
        [float(evaluate(self.component(c, arc), env)) for c in self.coordinates()]
    )

  def is_tangent(self, p: BreakConfig, tol: float = 1e-9) -> bool:
    """Whether the field is tangent to every hypersurface ``x = p_i``."""
    env: Dict[str, float] = dict(p.binding())
    for i, angle in enumerate(p.angles, start=1):
      env["x"] = angle
      x_part = evaluate(self.x_component(i), env)
      if abs(x_part - evaluate(self.p_components[i - 1], env)) > tol:
        return False
    return True


def embed_section(u: FieldLike) -> EmbeddedField:
  """``u d/dx + sum_i u(p_i, p) d/dp_i``."""
  section = as_section(u)
  return EmbeddedField(section.n, section.pieces, section.anchor_expressions())


def lie_bracket(a: EmbeddedField, b: EmbeddedField) -> EmbeddedField:
  """The standard Lie bracket of vector fields on the product space."""
  if a.n != b.n:
    raise ValueError("Embedded fields live over different configuration spaces")
  coordinates = a.coordinates()

  def bracket_component(target: str, arc: int) -> Expression:
    total: Expression = Const(0.0)
    for c in coordinates:
      total = total + a.component(c, arc) * b.component(target, arc).derivative(c)
      total = total - b.component(c, arc) * a.component(target, arc).derivative(c)
    return total

  x_parts = tuple(bracket_component("x", arc) for arc in range(1, a.n + 1))
  p_parts = tuple(bracket_component(f"p{k}", 1) for k in range(1, a.n + 1))
  return EmbeddedField(a.n, x_parts, p_parts)


def anchor_morphism_residual(u: FieldLike, v: FieldLike, p: BreakConfig) -> float:
  """``max |#[[u, v]] - [#u, #v]|`` at ``p``; the anchor is a bracket morphism."""
  bracket = bracket_sections(u, v, samples=[p])
  on_base = lie_bracket(embed_section(u), embed_section(v)).p_components
  env = p.binding()
  expected = np.array([float(evaluate(c, env)) for c in on_base])
  return float(np.max(np.abs(anchor(bracket, p) - expected)))


def jacobi_residual(
    u: FieldLike, v: FieldLike, w: FieldLike, points: Sequence[Tuple[float, BreakConfig]]
) -> float:
  """Largest ``|[[u,[[v,w]]]] + [[v,[[w,u]]]] + [[w,[[u,v]]]]|`` over sample points."""
  samples = sorted({p for _, p in points}, key=lambda c: c.angles)
  terms = [
      bracket_sections(u, bracket_sections(v, w, samples), samples),
      bracket_sections(v, bracket_sections(w, u, samples), samples),
      bracket_sections(w, bracket_sections(u, v, samples), samples),
  ]
  worst = 0.0
  for x, p in points:
    total = sum(float(term.value(x, p)[0]) for term in terms)
    worst = max(worst, abs(total))
  return worst


def leibniz_residual(
    u: FieldLike, v: FieldLike, f: PieceLike, points: Sequence[Tuple[float, BreakConfig]]
) -> float:
  """Largest ``|[[u, f v]] - f [[u, v]] - (L_{#u} f) v|`` over sample points."""
  su, sv = as_section(u), as_section(v)
  factor = as_expression(f)
  samples = sorted({p for _, p in points}, key=lambda c: c.angles)
  left = bracket_sections(su, scale_section(factor, sv), samples)
  right = bracket_sections(su, sv, samples)
  transport = ExpressionFunction(su.n, factor).lie_derivative(su)
  worst = 0.0
  for x, p in points:
    value = (
        float(left.value(x, p)[0])
        - float(evaluate(factor, p.binding())) * float(right.value(x, p)[0])
        - transport(p) * float(sv.value(x, p)[0])
    )
    worst = max(worst, abs(value))
  return worst


# ---------------------------------------------------------------------------
# The arc cocycles
# ---------------------------------------------------------------------------


def omega_i(
    u: FieldLike,
    v: FieldLike,
    p: BreakConfig,
    i: int,
    q: Optional[QuadratureSpec] = None,
) -> float:
  """``Omega_i(u, v)``: the integral of ``u_x v_xx - u_xx v_x`` over arc ``i``.

  Args:
    u: First field or section.
    v: Second field or section.
    p: The break configuration.
    i: Arc index, 1-based; arc ``i`` is ``[p_i, p_{i+1}]``.
    q: Quadrature settings.

  Raises:
    BreakMismatchError: If a field's breaks are not ``p``.
    QuadratureError: If the integral does not converge.
  """
  fu, fv = _specialize(u, p), _specialize(v, p)
  a, b = fu.breaks.arc(i)

  def integrand(x: np.ndarray) -> np.ndarray:
    _, ux, uxx = fu.arc_jets(i, x, 2)
    _, vx, vxx = fv.arc_jets(i, x, 2)
    return ux * vxx - uxx * vx

  return integrate_arc(integrand, a, b, q)


def omega_vector(
    u: FieldLike, v: FieldLike, p: BreakConfig, q: Optional[QuadratureSpec] = None
) -> np.ndarray:
  """All ``n`` arc cocycles of a pair."""
  return np.array([omega_i(u, v, p, i, q) for i in range(1, p.n + 1)])


# ---------------------------------------------------------------------------
# Base functions
# ---------------------------------------------------------------------------


class BaseFunction(ABC):
  """A smooth function on the configuration space."""

  def __init__(self, n: int) -> None:
    self.n = n

  @abstractmethod
  def __call__(self, p: BreakConfig) -> float:
    """Value at ``p``."""

  def lie_derivative(self, u: FieldLike, step: float = DEFAULT_LIE_STEP) -> "BaseFunction":
    """``L_{#u} f``, the derivative along the anchor of ``u``."""
    return DirectionalDerivative(self, as_section(u), step)

  def __add__(self, other: "BaseFunction") -> "BaseFunction":
    return LinearCombination(self.n, ((1.0, self), (1.0, other)))

  def __sub__(self, other: "BaseFunction") -> "BaseFunction":
    return LinearCombination(self.n, ((1.0, self), (-1.0, other)))

  def __rmul__(self, factor: float) -> "BaseFunction":
    return LinearCombination(self.n, ((float(factor), self),))


class ExpressionFunction(BaseFunction):
  """A base function given by an expression in ``p1`` ... ``pn``."""

  def __init__(self, n: int, expression: PieceLike) -> None:
    super().__init__(n)
    self.expression = as_expression(expression)
    if "x" in self.expression.free_variables:
      raise ValueError(f"Base function {self.expression} may not depend on x")

  def __call__(self, p: BreakConfig) -> float:
    return float(evaluate(self.expression, p.binding()))

  def lie_derivative(self, u: FieldLike, step: float = DEFAULT_LIE_STEP) -> "ExpressionFunction":
    section = as_section(u)
    total: Expression = Const(0.0)
    for i, a_i in enumerate(section.anchor_expressions(), start=1):
      total = total + a_i * self.expression.derivative(f"p{i}")
    return ExpressionFunction(self.n, total)

  def __repr__(self) -> str:
    return f"ExpressionFunction({self.expression})"


class OmegaFunction(BaseFunction):
  """``p -> Omega_i(u, v)(p)`` for two sections."""

  def __init__(
      self, arc: int, u: FieldLike, v: FieldLike, q: Optional[QuadratureSpec] = None
  ) -> None:
    su, sv = as_section(u), as_section(v)
    super().__init__(su.n)
    self.arc = arc
    self.u = su
    self.v = sv
    self.quadrature = q

  def __call__(self, p: BreakConfig) -> float:
    return omega_i(self.u, self.v, p, self.arc, self.quadrature)


class DirectionalDerivative(BaseFunction):
  """Central difference of a base function along the anchor of a section.

  Two steps ``h`` and ``h/2`` are combined by Richardson extrapolation.
  """

  def __init__(self, base: BaseFunction, u: Section, step: float = DEFAULT_LIE_STEP) -> None:
    super().__init__(base.n)
    self.base = base
    self.u = u
    self.step = step

  def _central(self, p: BreakConfig, direction: np.ndarray, h: float) -> float:
    forward = self.base(p.shifted(h * direction))
    backward = self.base(p.shifted(-h * direction))
    return (forward - backward) / (2.0 * h)

  def __call__(self, p: BreakConfig) -> float:
    direction = anchor(self.u, p)
    if not np.any(direction):
      return 0.0
    coarse = self._central(p, direction, self.step)
    fine = self._central(p, direction, self.step / 2.0)
    return (4.0 * fine - coarse) / 3.0


class LinearCombination(BaseFunction):
  """``sum_k c_k f_k``; Lie derivatives distribute over the terms."""

  def __init__(self, n: int, terms: Sequence[Tuple[float, BaseFunction]]) -> None:
    super().__init__(n)
    self.terms = tuple((float(c), f) for c, f in terms)

  def __call__(self, p: BreakConfig) -> float:
    return sum(c * f(p) for c, f in self.terms if c != 0.0)

  def lie_derivative(self, u: FieldLike, step: float = DEFAULT_LIE_STEP) -> "BaseFunction":
    return LinearCombination(
        self.n, tuple((c, f.lie_derivative(u, step)) for c, f in self.terms if c != 0.0)
    )


def as_base_function(n: int, value: Union[BaseFunction, PieceLike, float]) -> BaseFunction:
  if isinstance(value, BaseFunction):
    return value
  return ExpressionFunction(n, as_expression(value))


# ---------------------------------------------------------------------------
# Two-forms, one-forms and coboundaries
# ---------------------------------------------------------------------------


class TwoForm(Protocol):
  """A skew form on sections with values in base functions."""

  def function(self, u: FieldLike, v: FieldLike) -> BaseFunction:
    ...

  def __call__(self, u: FieldLike, v: FieldLike, p: BreakConfig) -> float:
    ...


class OmegaForm:
  """``Omega_i`` seen as a two-form."""

  def __init__(self, arc: int, q: Optional[QuadratureSpec] = None, step: float = DEFAULT_LIE_STEP) -> None:
    self.arc = arc
    self.quadrature = q
    self.step = step

  def function(self, u: FieldLike, v: FieldLike) -> BaseFunction:
    return OmegaFunction(self.arc, u, v, self.quadrature)

  def __call__(self, u: FieldLike, v: FieldLike, p: BreakConfig) -> float:
    return omega_i(u, v, p, self.arc, self.quadrature)


class CombinedOmegaForm:
  """``sum_i c_i Omega_i``."""

  def __init__(self, coefficients: Sequence[float], q: Optional[QuadratureSpec] = None) -> None:
    self.coefficients = tuple(float(c) for c in coefficients)
    self.quadrature = q

  def function(self, u: FieldLike, v: FieldLike) -> BaseFunction:
    n = as_section(u).n
    return LinearCombination(
        n,
        tuple(
            (c, OmegaFunction(i, u, v, self.quadrature))
            for i, c in enumerate(self.coefficients, start=1)
        ),
    )

  def __call__(self, u: FieldLike, v: FieldLike, p: BreakConfig) -> float:
    return self.function(u, v)(p)


class OneFormTerm(NamedTuple):
  """``weight(p) * d^order u / dx^order`` evaluated at ``x = location(p)``."""

  weight: Expression
  location: Expression
  order: int = 0
  arc: Optional[int] = None


class OneForm:
  """A finite combination of weighted point evaluations of a section.

  For sections with per-arc pieces every term names the arc whose piece is
  evaluated, so the location must stay inside that arc.
  """

  def __init__(self, n: int, terms: Sequence[OneFormTerm] = ()) -> None:
    self.n = n
    self.terms = tuple(
        OneFormTerm(as_expression(t.weight), as_expression(t.location), t.order, t.arc)
        for t in terms
    )
    for term in self.terms:
      if "x" in term.weight.free_variables | term.location.free_variables:
        raise ValueError("One-form weights and locations depend on p only")

  @classmethod
  def point_evaluation(cls, n: int, location: PieceLike, arc: Optional[int] = None) -> "OneForm":
    """``Theta(u) = u(location)``."""
    return cls(n, [OneFormTerm(Const(1.0), as_expression(location), 0, arc)])

  def __call__(self, u: FieldLike) -> ExpressionFunction:
    section = as_section(u)
    total: Expression = Const(0.0)
    for term in self.terms:
      if term.arc is None and not section.is_global:
        raise ValueError("Per-arc sections need one-form terms that name an arc")
      piece = section.piece(term.arc or 1)
      derivative = piece.derivative("x", term.order)
      total = total + term.weight * substitute(derivative, {"x": term.location})
    return ExpressionFunction(self.n, total)


class CoboundaryForm:
  """``d Theta(u, v) = L_{#u} Theta(v) - L_{#v} Theta(u) - Theta([[u, v]])``."""

  def __init__(self, theta: OneForm) -> None:
    self.theta = theta

  def function(self, u: FieldLike, v: FieldLike) -> ExpressionFunction:
    su, sv = as_section(u), as_section(v)
    bracket = bracket_sections(su, sv, samples=[])
    expression = (
        self.theta(sv).lie_derivative(su).expression
        - self.theta(su).lie_derivative(sv).expression
        - self.theta(bracket).expression
    )
    return ExpressionFunction(self.theta.n, expression)

  def __call__(self, u: FieldLike, v: FieldLike, p: BreakConfig) -> float:
    return self.function(u, v)(p)


def coboundary(theta: OneForm) -> CoboundaryForm:
  """The coboundary ``d Theta`` of a one-form, a two-cocycle."""
  return CoboundaryForm(theta)


def algebroid_cocycle_residual(
    form: Union[int, TwoForm],
    u: FieldLike,
    v: FieldLike,
    w: FieldLike,
    p: BreakConfig,
    q: Optional[QuadratureSpec] = None,
    step: float = DEFAULT_LIE_STEP,
) -> float:
  """Cyclic sum of ``L_{#u} Omega(v, w) - Omega([[u, v]], w)`` at ``p``.

  Args:
    form: An arc index (meaning ``Omega_i``) or any two-form.
    u: First section.
    v: Second section.
    w: Third section.
    p: Configuration at which the residual is evaluated.
    q: Quadrature settings for arc cocycles.
    step: Finite-difference step for Lie derivatives of integrals.

  Returns:
    The scalar residual; zero for a cocycle.
  """
  two_form: TwoForm = OmegaForm(form, q, step) if isinstance(form, int) else form
  su, sv, sw = as_section(u), as_section(v), as_section(w)
  samples = [p]

  def term(a: Section, b: Section, c: Section) -> float:
    transported = two_form.function(b, c).lie_derivative(a, step)(p)
    return transported - two_form(bracket_sections(a, b, samples), c, p)

  return term(su, sv, sw) + term(sv, sw, su) + term(sw, su, sv)


# ---------------------------------------------------------------------------
# Central extension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtendedSection:
  """A pair ``(u, f)`` of a section and ``n`` base functions."""

  section: Section
  central: Tuple[BaseFunction, ...]

  def __post_init__(self) -> None:
    if len(self.central) != self.section.n:
      raise ValueError(
          f"Expected {self.section.n} central components, got {len(self.central)}"
      )

  @classmethod
  def of(cls, u: FieldLike, central: Optional[Sequence[Union[BaseFunction, PieceLike, float]]] = None) -> "ExtendedSection":
    section = as_section(u)
    values = central if central is not None else [0.0] * section.n
    return cls(section, tuple(as_base_function(section.n, c) for c in values))

  def central_values(self, p: BreakConfig) -> np.ndarray:
    return np.array([f(p) for f in self.central])


def extended_bracket(
    a: ExtendedSection,
    b: ExtendedSection,
    c: Optional[Sequence[float]] = None,
    q: Optional[QuadratureSpec] = None,
    step: float = DEFAULT_LIE_STEP,
    samples: Optional[Sequence[BreakConfig]] = None,
) -> ExtendedSection:
  """``[(u, f), (v, g)] = ([[u, v]], c_i Omega_i(u, v) + L_{#u} g_i - L_{#v} f_i)``."""
  n = a.section.n
  if b.section.n != n:
    raise ValueError("Extended sections over different break counts")
  coefficients = tuple(float(x) for x in (c if c is not None else [1.0] * n))
  if len(coefficients) != n:
    raise ValueError(f"Expected {n} coefficients, got {len(coefficients)}")
  section = bracket_sections(a.section, b.section, samples)
  central = []
  for i in range(1, n + 1):
    f_i, g_i = a.central[i - 1], b.central[i - 1]
    terms: List[Tuple[float, BaseFunction]] = [
        (coefficients[i - 1], OmegaFunction(i, a.section, b.section, q)),
        (1.0, g_i.lie_derivative(a.section, step)),
        (-1.0, f_i.lie_derivative(b.section, step)),
    ]
    central.append(LinearCombination(n, terms))
  return ExtendedSection(section, tuple(central))


def extended_jacobi_residual(
    a: ExtendedSection,
    b: ExtendedSection,
    c: ExtendedSection,
    p: BreakConfig,
    coefficients: Optional[Sequence[float]] = None,
    q: Optional[QuadratureSpec] = None,
    step: float = DEFAULT_LIE_STEP,
) -> np.ndarray:
  """Central part of the cyclic Jacobi sum of the extended bracket at ``p``."""
  samples = [p]

  def nested(x: ExtendedSection, y: ExtendedSection, z: ExtendedSection) -> np.ndarray:
    inner = extended_bracket(y, z, coefficients, q, step, samples)
    return extended_bracket(x, inner, coefficients, q, step, samples).central_values(p)

  return nested(a, b, c) + nested(b, c, a) + nested(c, a, b)


# ---------------------------------------------------------------------------
# Isotropy
# ---------------------------------------------------------------------------


def _require_isotropy(u: BrokenField, label: str) -> None:
  if not u.vanishes_at_breaks():
    raise IsotropyError(
        f"Field {label} does not vanish at the breaks: anchor {anchor(u).tolist()}"
    )


def isotropy_bracket(u: BrokenField, v: BrokenField, p: Optional[BreakConfig] = None) -> BrokenField:
  """``(u v_x - u_x v) d/dx`` for fields vanishing at every break.

  Raises:
    IsotropyError: If ``u`` or ``v`` does not vanish at the breaks.
    BreakMismatchError: If the fields live over different breaks.
  """
  breaks = p or u.breaks
  fu, fv = _specialize(u, breaks), _specialize(v, breaks)
  _require_isotropy(fu, "u")
  _require_isotropy(fv, "v")
  if fu.is_global and fv.is_global:
    arcs = [1]
  else:
    arcs = list(range(1, breaks.n + 1))
  pieces = []
  for arc in arcs:
    uj, vj = fu.piece(arc), fv.piece(arc)
    pieces.append(uj * vj.derivative("x") - uj.derivative("x") * vj)
  bindings = {**fu.bindings, **fv.bindings}
  return BrokenField(fu.breaks, pieces, bindings, fu.tolerances)


@dataclass(frozen=True)
class IsotropyCocycle:
  """``Omega_i`` restricted to fields vanishing at the breaks of ``p``."""

  arc: int
  breaks: BreakConfig
  quadrature: Optional[QuadratureSpec] = None

  def __call__(self, u: BrokenField, v: BrokenField) -> float:
    _require_isotropy(_specialize(u, self.breaks), "u")
    _require_isotropy(_specialize(v, self.breaks), "v")
    return omega_i(u, v, self.breaks, self.arc, self.quadrature)

  def identity_residual(self, u: BrokenField, v: BrokenField, w: BrokenField) -> float:
    """``Omega([u, v], w) + Omega([v, w], u) + Omega([w, u], v)``."""
    return (
        self(isotropy_bracket(u, v, self.breaks), w)
        + self(isotropy_bracket(v, w, self.breaks), u)
        + self(isotropy_bracket(w, u, self.breaks), v)
    )


def restrict_cocycle_to_isotropy(
    i: int, p: BreakConfig, q: Optional[QuadratureSpec] = None
) -> IsotropyCocycle:
  """The Lie-algebra cocycle ``Omega_i`` on the isotropy algebra at ``p``."""
  p.arc(i)
  return IsotropyCocycle(i, p, q)
