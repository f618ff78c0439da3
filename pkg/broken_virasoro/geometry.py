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

"""Circle geometry: break configurations, jets, piecewise maps, quadrature.

Circle maps are stored as lifts ``F: R -> R``. A degree-1 lift satisfies
``F(x + 2pi) = F(x) + 2pi``; a degree-0 "lift" is a 2pi-periodic function
such as a vector field profile. Break angles live on the lift too, so the
cyclic arc ``[p_i, p_{i+1}]`` is an ordinary real interval with
``p_{n+1} = p_1 + 2pi``. Arcs are numbered from 1.

All jet evaluation is vectorised: a map evaluates one piece on a whole
array of lift points at once, which is what the quadrature feeds it.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .expr import X, Expression, as_expression, evaluate

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
MAX_JET_ORDER = 4
DEFAULT_EPS_SEP = 1e-6

ArrayLike = Union[float, Sequence[float], np.ndarray]
Integrand = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


class Tolerances(BaseModel):
  """Geometric tolerances shared by maps, fields and arrows."""

  model_config = ConfigDict(frozen=True)

  tol_cont: float = Field(
      default=1e-9,
      gt=0,
      description="Allowed gap between one-sided values at a break.",
  )
  eps_sep: float = Field(
      default=DEFAULT_EPS_SEP,
      gt=0,
      description="Minimal separation between consecutive breaks (radians).",
  )
  delta_min: float = Field(
      default=1e-8,
      gt=0,
      description="Lower bound for one-sided first derivatives of diffeomorphisms.",
  )
  strict: bool = Field(
      default=False,
      description=(
          "Reject ambiguous break-point evaluations and mismatched break sets"
          " instead of resolving them."
      ),
  )


class QuadratureSpec(BaseModel):
  """Settings for adaptive Gauss-Legendre integration over an arc."""

  model_config = ConfigDict(frozen=True)

  abs_tol: float = Field(
      default=1e-10, gt=0, description="Absolute error target for the whole arc."
  )
  max_depth: int = Field(
      default=40, ge=1, le=200, description="Maximal number of bisection levels."
  )
  panel_order: int = Field(
      default=15, ge=2, le=64, description="Gauss-Legendre nodes per panel."
  )


DEFAULT_TOLERANCES = Tolerances()
DEFAULT_QUADRATURE = QuadratureSpec()


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class BreakConfigError(ValueError):
  """Raised for invalid break configurations or ambiguous break evaluations."""


class ContinuityError(ValueError):
  """Raised when one-sided values at a break disagree beyond tol_cont."""


class MonotonicityError(ValueError):
  """Raised when a lift is not increasing with derivative at least delta_min."""


class JetOrderError(ValueError):
  """Raised when a jet order beyond what a map provides is requested."""


class BreakMismatchError(ValueError):
  """Raised when break sets that must coincide do not."""


class QuadratureError(RuntimeError):
  """Raised when adaptive quadrature cannot reach its tolerance."""

  def __init__(self, message: str, panel: Tuple[float, float], estimate: float) -> None:
    super().__init__(f"{message}; worst panel [{panel[0]!r}, {panel[1]!r}], error {estimate!r}")
    self.panel = panel
    self.estimate = estimate


class ConvergenceError(RuntimeError):
  """Raised when a root solve exhausts its iterations."""


# ---------------------------------------------------------------------------
# Break configurations
# ---------------------------------------------------------------------------


def wrap_angle(delta: float) -> float:
  """Reduces an angle difference to ``(-pi, pi]``."""
  reduced = math.fmod(delta, TWO_PI)
  if reduced > math.pi:
    reduced -= TWO_PI
  elif reduced <= -math.pi:
    reduced += TWO_PI
  return reduced


@dataclass(frozen=True)
class BreakConfig:
  """Cyclically ordered break points ``p_1 < ... < p_n`` on the lift.

  The angles are strictly increasing and span less than a full turn, with
  every cyclic gap (including ``p_1 + 2pi - p_n``) at least ``min_gap``.
  Use :meth:`canonical` to build one from arbitrary angles.
  """

  angles: Tuple[float, ...]
  min_gap: float = field(default=DEFAULT_EPS_SEP, compare=False, repr=False)

  def __post_init__(self) -> None:
    angles = tuple(float(a) for a in self.angles)
    object.__setattr__(self, "angles", angles)
    if not angles:
      raise BreakConfigError("A break configuration needs at least one break")
    if not all(math.isfinite(a) for a in angles):
      raise BreakConfigError(f"Break angles must be finite, got {angles}")
    gaps = [b - a for a, b in zip(angles, angles[1:])]
    gaps.append(angles[0] + TWO_PI - angles[-1])
    if min(gaps) < self.min_gap:
      raise BreakConfigError(
          f"Breaks {angles} are not cyclically ordered with gaps of at least"
          f" {self.min_gap}"
      )

  @classmethod
  def canonical(
      cls, angles: Sequence[float], min_gap: float = DEFAULT_EPS_SEP
  ) -> "BreakConfig":
    """Reduces angles to ``[0, 2pi)`` and sorts them, smallest first."""
    reduced = sorted(float(a) % TWO_PI for a in angles)
    return cls(tuple(reduced), min_gap)

  @property
  def n(self) -> int:
    return len(self.angles)

  @property
  def upper(self) -> float:
    """``p_1 + 2pi``, the closing end of the last arc."""
    return self.angles[0] + TWO_PI

  def normalized(self) -> "BreakConfig":
    """Shifts all angles by a multiple of 2pi so that ``p_1`` is in ``[0, 2pi)``."""
    shift = TWO_PI * math.floor(self.angles[0] / TWO_PI)
    if shift == 0.0:
      return self
    return BreakConfig(tuple(a - shift for a in self.angles), self.min_gap)

  def arc(self, index: int) -> Tuple[float, float]:
    """Lift bounds of arc ``index`` (1-based)."""
    if not 1 <= index <= self.n:
      raise ValueError(f"Arc index must be in 1..{self.n}, got {index}")
    upper = self.angles[index] if index < self.n else self.upper
    return self.angles[index - 1], upper

  def arcs(self) -> List[Tuple[float, float]]:
    return [self.arc(i) for i in range(1, self.n + 1)]

  def matches(self, other: "BreakConfig", tol: float) -> bool:
    """Label-wise equality modulo 2pi."""
    if self.n != other.n:
      return False
    return all(
        abs(wrap_angle(a - b)) <= tol for a, b in zip(self.angles, other.angles)
    )

  def label_shift(self, other: "BreakConfig", tol: float) -> Optional[int]:
    """Cyclic relabelling between two configurations of the same points.

    Returns the ``k`` for which ``p_{j+k}`` equals ``q_j`` modulo 2pi for every
    label ``j`` (indices taken mod ``n``), where ``p`` is ``self`` and ``q`` is
    ``other``; ``None`` when the point sets differ. ``matches`` is the case
    ``k == 0``.
    """
    if self.n != other.n:
      return None
    for k in range(self.n):
      if all(
          abs(wrap_angle(self.angles[(j + k) % self.n] - b)) <= tol
          for j, b in enumerate(other.angles)
      ):
        return k
    return None

  def is_break(self, x: float, tol: float) -> bool:
    return any(abs(wrap_angle(x - a)) <= tol for a in self.angles)

  def locate(self, x: float, side: str = "right") -> int:
    """Returns the arc containing ``x``; ``side`` resolves break points."""
    arcs, _ = _reduce_to_window(self, np.array([float(x)]), np.array([side != "left"]))
    return int(arcs[0])

  def shifted(self, delta: Sequence[float]) -> "BreakConfig":
    return BreakConfig(
        tuple(a + float(d) for a, d in zip(self.angles, delta)), self.min_gap
    )

  def binding(self) -> Dict[str, float]:
    """Variable binding ``{"p1": p_1, ...}`` for expression evaluation."""
    return {f"p{i}": a for i, a in enumerate(self.angles, start=1)}


def random_break_config(
    n: int, rng: np.random.Generator, min_gap: float = 0.3
) -> BreakConfig:
  """Draws a canonical configuration of ``n`` breaks with gaps >= ``min_gap``."""
  if n * min_gap >= TWO_PI:
    raise ValueError(f"Cannot place {n} breaks with gaps of {min_gap}")
  while True:
    angles = np.sort(rng.uniform(0.0, TWO_PI, size=n))
    gaps = np.diff(np.append(angles, angles[0] + TWO_PI))
    if gaps.min() >= min_gap:
      return BreakConfig(tuple(float(a) for a in angles))


def merge_breaks(
    first: Sequence[float], second: Sequence[float], tol: float, min_gap: float
) -> BreakConfig:
  """Union of two break sets modulo 2pi, merging points closer than ``tol``."""
  values = sorted(float(v) % TWO_PI for v in (*first, *second))
  merged: List[float] = []
  for value in values:
    if not merged or value - merged[-1] > tol:
      merged.append(value)
  if len(merged) > 1 and merged[0] + TWO_PI - merged[-1] <= tol:
    merged.pop()
  return BreakConfig(tuple(merged), min_gap)


def _reduce_to_window(
    breaks: BreakConfig, x: np.ndarray, right: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
  """Maps lift points into the window starting at ``p_1``.

  Right-sided points land in ``[p_1, p_1 + 2pi)``, left-sided ones in
  ``(p_1, p_1 + 2pi]``. Returns the governing arc per point and the number
  of turns removed.
  """
  offset = (x - breaks.angles[0]) / TWO_PI
  turns = np.where(right, np.floor(offset), np.ceil(offset) - 1.0)
  reduced = x - TWO_PI * turns
  angles = np.asarray(breaks.angles)
  arcs = np.where(
      right,
      np.searchsorted(angles, reduced, side="right"),
      np.searchsorted(angles, reduced, side="left"),
  )
  return np.clip(arcs, 1, breaks.n), turns


# ---------------------------------------------------------------------------
# Jets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Jet:
  """Value and derivatives ``(f, f', f'', ...)`` of a map at one point."""

  values: Tuple[float, ...]

  def __post_init__(self) -> None:
    values = tuple(float(v) for v in self.values)
    object.__setattr__(self, "values", values)
    if not 1 <= len(values) <= MAX_JET_ORDER + 1:
      raise JetOrderError(f"Jet order must be in 0..{MAX_JET_ORDER}")
    if not all(math.isfinite(v) for v in values):
      raise ValueError(f"Jet entries must be finite, got {values}")

  @property
  def order(self) -> int:
    return len(self.values) - 1

  @property
  def value(self) -> float:
    return self.values[0]

  def __getitem__(self, k: int) -> float:
    return self.values[k]

  def __len__(self) -> int:
    return len(self.values)


def compose_jets(
    outer: Sequence[np.ndarray], inner: Sequence[np.ndarray], order: int
) -> List[np.ndarray]:
  """Faa di Bruno: jets of ``f o g`` from jets of ``f`` at ``g`` and of ``g``."""
  f = list(outer) + [0.0] * (MAX_JET_ORDER + 1 - len(outer))
  g = list(inner) + [0.0] * (MAX_JET_ORDER + 1 - len(inner))
  h = [f[0], f[1] * g[1]]
  if order >= 2:
    h.append(f[2] * g[1] ** 2 + f[1] * g[2])
  if order >= 3:
    h.append(f[3] * g[1] ** 3 + 3.0 * f[2] * g[1] * g[2] + f[1] * g[3])
  if order >= 4:
    h.append(
        f[4] * g[1] ** 4
        + 6.0 * f[3] * g[1] ** 2 * g[2]
        + f[2] * (3.0 * g[2] ** 2 + 4.0 * g[1] * g[3])
        + f[1] * g[4]
    )
  return [np.asarray(v, dtype=float) for v in h[: order + 1]]


def inverse_jets(jets: Sequence[np.ndarray], order: int) -> List[np.ndarray]:
  """Derivatives of ``f^-1`` at ``y = f(x)`` from the jets of ``f`` at ``x``."""
  f1 = jets[1] if order >= 1 else None
  result: List[np.ndarray] = [np.asarray(jets[0], dtype=float)]
  if order >= 1:
    result.append(1.0 / f1)
  if order >= 2:
    f2 = jets[2]
    result.append(-f2 / f1**3)
  if order >= 3:
    f3 = jets[3]
    result.append((3.0 * f2**2 - f1 * f3) / f1**5)
  if order >= 4:
    f4 = jets[4]
    result.append((10.0 * f1 * f2 * f3 - f1**2 * f4 - 15.0 * f2**3) / f1**7)
  return result


def _full(value: Union[float, np.ndarray], shape: Tuple[int, ...]) -> np.ndarray:
  return np.array(np.broadcast_to(np.asarray(value, dtype=float), shape))


# ---------------------------------------------------------------------------
# Piecewise maps
# ---------------------------------------------------------------------------


class PiecewiseJetMap(ABC):
  """A lift that is smooth on each closed arc of its break configuration.

  Subclasses implement :meth:`arc_jets`, which evaluates the piece of one
  arc at lift points inside that arc (endpoints included, one-sided).
  Everything else, window reduction and break-side resolution, is shared.
  """

  max_order: int = MAX_JET_ORDER

  def __init__(self, breaks: BreakConfig, degree: int, tolerances: Optional[Tolerances]) -> None:
    if degree not in (0, 1):
      raise ValueError(f"Degree must be 0 or 1, got {degree}")
    self.breaks = breaks
    self.degree = degree
    self.tolerances = tolerances or DEFAULT_TOLERANCES

  @abstractmethod
  def arc_jets(self, arc: int, x: np.ndarray, order: int) -> List[np.ndarray]:
    """Jets of the piece of ``arc`` at points ``x`` of that arc's lift interval."""

  def _check_order(self, order: int) -> None:
    if not 0 <= order <= self.max_order:
      raise JetOrderError(
          f"{type(self).__name__} provides jets up to order {self.max_order},"
          f" requested {order}"
      )

  def evaluate_jets(
      self, x: ArrayLike, order: int, right: Union[bool, np.ndarray] = True
  ) -> List[np.ndarray]:
    """Jets at arbitrary lift points, one-sided at breaks as selected by ``right``."""
    self._check_order(order)
    points = np.atleast_1d(np.asarray(x, dtype=float))
    sides = np.broadcast_to(np.asarray(right, dtype=bool), points.shape)
    arcs, turns = _reduce_to_window(self.breaks, points, sides)
    reduced = points - TWO_PI * turns
    outputs = [np.empty_like(points) for _ in range(order + 1)]
    for arc in np.unique(arcs):
      mask = arcs == arc
      jets = self.arc_jets(int(arc), reduced[mask], order)
      for out, jet in zip(outputs, jets):
        out[mask] = jet
    outputs[0] = outputs[0] + self.degree * TWO_PI * turns
    return outputs

  def jet(self, x: float, order: int, side: str = "auto") -> Jet:
    """Jet at a single point.

    Args:
      x: Lift point.
      order: Highest derivative wanted (at most ``max_order``).
      side: ``"left"``, ``"right"`` or ``"auto"`` (right-sided).

    Raises:
      BreakConfigError: ``side="auto"`` at a break while strict.
      JetOrderError: ``order`` beyond what this map provides.
    """
    if side not in ("left", "right", "auto"):
      raise ValueError(f"Side must be left, right or auto, got {side!r}")
    if side == "auto" and self.tolerances.strict:
      if self.breaks.is_break(x, 1e-12):
        raise BreakConfigError(f"Point {x!r} is a break; choose a side explicitly")
    jets = self.evaluate_jets(np.array([x]), order, side != "left")
    return Jet(tuple(float(j[0]) for j in jets))

  def __call__(self, x: ArrayLike) -> np.ndarray:
    return self.evaluate_jets(x, 0)[0]

  def image_of_breaks(self) -> Tuple[float, ...]:
    """``F(p_i)`` for every break, from the right-hand pieces."""
    return tuple(
        float(self.arc_jets(i, np.array([a]), 0)[0][0])
        for i, a in enumerate(self.breaks.angles, start=1)
    )

  def validate_continuity(self) -> None:
    """Checks that one-sided values agree at every break."""
    n = self.breaks.n
    for i in range(1, n + 1):
      start, _ = self.breaks.arc(i)
      right_value = self.arc_jets(i, np.array([start]), 0)[0][0]
      if i == 1:
        left_value = (
            self.arc_jets(n, np.array([self.breaks.upper]), 0)[0][0]
            - self.degree * TWO_PI
        )
      else:
        left_value = self.arc_jets(i - 1, np.array([start]), 0)[0][0]
      gap = abs(float(right_value) - float(left_value))
      if not gap <= self.tolerances.tol_cont:
        raise ContinuityError(
            f"Discontinuity of {gap!r} at break p{i} = {start!r}"
            f" (tolerance {self.tolerances.tol_cont})"
        )

  def validate_monotone(self, samples: int = 33) -> None:
    """Checks ``F' >= delta_min`` on a sample grid of every closed arc."""
    for i, (a, b) in enumerate(self.breaks.arcs(), start=1):
      grid = np.linspace(a, b, samples)
      slope = self.arc_jets(i, grid, 1)[1]
      worst = int(np.argmin(slope))
      if not slope[worst] >= self.tolerances.delta_min:
        raise MonotonicityError(
            f"Derivative {slope[worst]!r} below {self.tolerances.delta_min} at"
            f" x = {grid[worst]!r} on arc {i}"
        )


class ExpressionMap(PiecewiseJetMap):
  """Map whose pieces are expressions in ``x``.

  Pieces may mention break variables; ``bindings`` fixes their values.
  A single piece is used on every arc.
  """

  def __init__(
      self,
      breaks: BreakConfig,
      pieces: Sequence[Union[Expression, str]],
      degree: int = 1,
      bindings: Optional[Mapping[str, float]] = None,
      tolerances: Optional[Tolerances] = None,
      check: bool = True,
  ) -> None:
    super().__init__(breaks, degree, tolerances)
    expressions = tuple(as_expression(piece) for piece in pieces)
    if len(expressions) not in (1, breaks.n):
      raise ValueError(
          f"Expected 1 or {breaks.n} pieces for {breaks.n} breaks, got {len(expressions)}"
      )
    self.bindings: Dict[str, float] = dict(bindings or {})
    allowed = {"x", *self.bindings}
    for piece in expressions:
      unknown = piece.free_variables - allowed
      if unknown:
        raise ValueError(
            f"Piece {piece} uses unbound variables {', '.join(sorted(unknown))}"
        )
    self.is_global = len(expressions) == 1
    self.pieces = expressions * breaks.n if self.is_global else expressions
    if check:
      self.validate_continuity()

  def piece(self, arc: int) -> Expression:
    return self.pieces[arc - 1]

  def arc_jets(self, arc: int, x: np.ndarray, order: int) -> List[np.ndarray]:
    self._check_order(order)
    piece = self.piece(arc)
    env: Dict[str, Union[float, np.ndarray]] = dict(self.bindings)
    env["x"] = x
    return [
        _full(evaluate(piece.derivative("x", k), env), x.shape) for k in range(order + 1)
    ]


class ComposedMap(PiecewiseJetMap):
  """``outer o inner`` with jets by the Faa di Bruno formula.

  ``breaks`` must contain the breaks of ``inner`` and the pull-back of the
  breaks of ``outer``, so that each arc sits inside one piece of each map.
  """

  def __init__(
      self,
      outer: PiecewiseJetMap,
      inner: PiecewiseJetMap,
      breaks: BreakConfig,
      tolerances: Optional[Tolerances] = None,
  ) -> None:
    super().__init__(breaks, outer.degree * inner.degree, tolerances or outer.tolerances)
    self.outer = outer
    self.inner = inner
    self.max_order = min(outer.max_order, inner.max_order)

  def arc_jets(self, arc: int, x: np.ndarray, order: int) -> List[np.ndarray]:
    self._check_order(order)
    a, b = self.breaks.arc(arc)
    right = x < 0.5 * (a + b)
    inner = self.inner.evaluate_jets(x, order, right)
    outer = self.outer.evaluate_jets(inner[0], order, right)
    return compose_jets(outer, inner, order)


class InverseMap(PiecewiseJetMap):
  """Inverse of a monotone degree-1 lift.

  Values come from a safeguarded Newton iteration on each arc (bisection
  whenever a Newton step leaves the bracket); derivatives from the inverse
  function rule. Arc ``i`` of the inverse is the image of arc ``i``.
  """

  max_iterations = 100
  tolerance = 1e-13

  def __init__(self, forward: PiecewiseJetMap, tolerances: Optional[Tolerances] = None) -> None:
    tolerances = tolerances or forward.tolerances
    image = BreakConfig(forward.image_of_breaks(), tolerances.eps_sep)
    super().__init__(image, 1, tolerances)
    self.forward = forward
    self.max_order = forward.max_order

  def _solve(self, arc: int, y: np.ndarray) -> np.ndarray:
    a, b = self.forward.breaks.arc(arc)
    fa, fb = (float(v) for v in self.forward.arc_jets(arc, np.array([a, b]), 0)[0])
    lo = np.full_like(y, a)
    hi = np.full_like(y, b)
    x = np.clip(a + (y - fa) * (b - a) / (fb - fa), a, b)
    scale = np.maximum(1.0, np.abs(y))
    for _ in range(self.max_iterations):
      value, slope = self.forward.arc_jets(arc, x, 1)
      residual = value - y
      done = (np.abs(residual) <= self.tolerance * scale) | (
          hi - lo <= 4.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(x))
      )
      if done.all():
        return x
      hi = np.where(residual > 0, x, hi)
      lo = np.where(residual < 0, x, lo)
      with np.errstate(divide="ignore", invalid="ignore"):
        step = x - residual / slope
      outside = ~np.isfinite(step) | (step <= lo) | (step >= hi)
      x = np.where(done, x, np.where(outside, 0.5 * (lo + hi), step))
    raise ConvergenceError(
        f"Inverse on arc {arc} did not converge in {self.max_iterations} iterations"
    )

  def arc_jets(self, arc: int, x: np.ndarray, order: int) -> List[np.ndarray]:
    self._check_order(order)
    preimage = self._solve(arc, x)
    jets = self.forward.arc_jets(arc, preimage, order)
    result = inverse_jets(jets, order)
    result[0] = preimage
    return result


def identity_map(breaks: BreakConfig, tolerances: Optional[Tolerances] = None) -> ExpressionMap:
  return ExpressionMap(breaks, ["x"], 1, tolerances=tolerances)


def rotation_map(
    breaks: BreakConfig, angle: float, tolerances: Optional[Tolerances] = None
) -> ExpressionMap:
  """The lift ``x + angle``."""
  return ExpressionMap(breaks, [X + float(angle)], 1, tolerances=tolerances)


def expression_map(
    breaks: BreakConfig,
    pieces: Sequence[Union[Expression, str]],
    degree: int = 1,
    bindings: Optional[Mapping[str, float]] = None,
    tolerances: Optional[Tolerances] = None,
) -> ExpressionMap:
  return ExpressionMap(breaks, pieces, degree, bindings, tolerances)


def jet_of(m: PiecewiseJetMap, x: float, order: int, side: str = "auto") -> Jet:
  """Jet of ``m`` at ``x``; at a break ``side`` picks the governing piece."""
  return m.jet(x, order, side)


def compose_maps(
    f: PiecewiseJetMap,
    g: PiecewiseJetMap,
    tolerances: Optional[Tolerances] = None,
    strict: Optional[bool] = None,
) -> ComposedMap:
  """Returns ``f o g``.

  When the breaks of ``f`` are the image of the breaks of ``g`` the result
  keeps the breaks of ``g``. Otherwise the result is broken at the union of
  the breaks of ``g`` and the pull-back of the breaks of ``f``, unless
  ``strict`` is set.

  Raises:
    BreakMismatchError: In strict mode when the break sets do not match.
    ValueError: If ``g`` is not a degree-1 lift.
  """
  tolerances = tolerances or f.tolerances
  strict = tolerances.strict if strict is None else strict
  if g.degree != 1:
    raise ValueError("The inner map of a composition must be a degree-1 lift")
  image = BreakConfig(g.image_of_breaks(), tolerances.eps_sep)
  if f.breaks.label_shift(image, tolerances.tol_cont) is not None:
    return ComposedMap(f, g, g.breaks, tolerances)
  if strict:
    raise BreakMismatchError(
        f"Breaks {f.breaks.angles} do not match the image {image.angles}"
    )
  pulled = invert_map(g)(np.asarray(f.breaks.angles))
  breaks = merge_breaks(g.breaks.angles, pulled, tolerances.tol_cont, tolerances.eps_sep)
  logger.debug("Composition merged breaks into %s", breaks.angles)
  return ComposedMap(f, g, breaks, tolerances)


def invert_map(f: PiecewiseJetMap) -> InverseMap:
  """Returns ``f^-1`` for a monotone degree-1 lift.

  Raises:
    MonotonicityError: If ``f`` is not increasing on some arc.
    ValueError: If ``f`` is not a degree-1 lift.
  """
  if f.degree != 1:
    raise ValueError("Only degree-1 lifts can be inverted")
  f.validate_monotone()
  return InverseMap(f)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
  return np.polynomial.legendre.leggauss(order)


def integrate_arc(
    integrand: Integrand, a: float, b: float, spec: Optional[QuadratureSpec] = None
) -> float:
  """Integrates a vectorised integrand over ``[a, b]``.

  Panels are bisected level by level; all panels of a level are evaluated
  in one integrand call. A panel is accepted when its Gauss-Legendre value
  and the sum over its two halves differ by less than ``abs_tol`` times the
  panel's share of ``[a, b]``.

  Args:
    integrand: Maps an array of points to an array of values.
    a: Lower limit.
    b: Upper limit.
    spec: Quadrature settings.

  Returns:
    The integral.

  Raises:
    QuadratureError: When ``max_depth`` is exceeded or values are not finite.
  """
  spec = spec or DEFAULT_QUADRATURE
  if a == b:
    return 0.0
  if b < a:
    return -integrate_arc(integrand, b, a, spec)
  nodes, weights = _gauss_legendre(spec.panel_order)
  length = b - a

  def panel_values(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    points = mid[:, None] + half[:, None] * nodes[None, :]
    values = np.asarray(integrand(points.ravel()), dtype=float)
    values = np.broadcast_to(values, (points.size,)).reshape(points.shape)
    if not np.all(np.isfinite(values)):
      bad = int(np.argmax(~np.isfinite(values).all(axis=1)))
      raise QuadratureError(
          "Integrand is not finite", (float(lo[bad]), float(hi[bad])), math.inf
      )
    return half * (values @ weights)

  lo = np.array([float(a)])
  hi = np.array([float(b)])
  whole = panel_values(lo, hi)
  total = 0.0
  depth = 0
  while True:
    mid = 0.5 * (lo + hi)
    halves = panel_values(np.concatenate([lo, mid]), np.concatenate([mid, hi]))
    left, right = halves[: lo.size], halves[lo.size :]
    refined = left + right
    error = np.abs(whole - refined)
    allowed = spec.abs_tol * (hi - lo) / length
    accepted = error <= allowed
    total += float(refined[accepted].sum())
    if accepted.all():
      break
    depth += 1
    if depth > spec.max_depth:
      excess = np.where(accepted, -np.inf, error - allowed)
      worst = int(np.argmax(excess))
      raise QuadratureError(
          f"Maximal depth {spec.max_depth} exceeded on [{a!r}, {b!r}]",
          (float(lo[worst]), float(hi[worst])),
          float(error[worst]),
      )
    rejected = ~accepted
    lo, hi = (
        np.concatenate([lo[rejected], mid[rejected]]),
        np.concatenate([mid[rejected], hi[rejected]]),
    )
    whole = np.concatenate([left[rejected], right[rejected]])
  logger.debug("Integrated [%s, %s] with %d refinement levels", a, b, depth)
  return total
