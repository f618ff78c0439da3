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

"""Flows of broken fields and the derivative of the Bott cocycles.

Flows are integrated with fixed-step RK4 on each closed arc together with
the variational equations

  d/dt phi_x  = u_x(phi) phi_x
  d/dt phi_xx = u_xx(phi) phi_x^2 + u_x(phi) phi_xx

so arrows built here provide jets up to order 2. Differentiating the
antisymmetrised Bott cocycle of two flows at the identity recovers the arc
cocycle of the generating fields.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, List, NamedTuple, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .algebroid import BrokenField, IsotropyError, Section, omega_i
from .expr import evaluate
from .geometry import (
    BreakConfig,
    MonotonicityError,
    PiecewiseJetMap,
    QuadratureSpec,
    Tolerances,
)
from .groupoid import BrokenDiffeo, chi_i, compose_diffeos

logger = logging.getLogger(__name__)

NOISE_FLOOR = 1e-11
MONOTONE_SAMPLES = 65

FieldLike = Union[BrokenField, Section]
RightHandSide = Callable[[np.ndarray], np.ndarray]


class FlowError(RuntimeError):
  """Raised when a flow cannot be integrated into a monotone arrow."""


class FlowSpec(BaseModel):
  """Fixed-step RK4 settings for flows."""

  model_config = ConfigDict(frozen=True)

  steps_per_unit: int = Field(
      default=2000, ge=100, description="RK4 steps per unit of flow time."
  )
  min_steps: int = Field(
      default=1, ge=1, description="Lower bound on the number of steps of any flow."
  )
  max_refinements: int = Field(
      default=2,
      ge=0,
      le=8,
      description="Times the step count is doubled when monotonicity is lost.",
  )


DEFAULT_FLOW = FlowSpec()


def rk4_step(state: np.ndarray, dt: float, rhs: RightHandSide) -> np.ndarray:
  k1 = rhs(state)
  k2 = rhs(state + 0.5 * dt * k1)
  k3 = rhs(state + 0.5 * dt * k2)
  k4 = rhs(state + dt * k3)
  return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class FlowMap(PiecewiseJetMap):
  """The time-``t`` flow of a broken field as a lift.

  Points of arc ``i`` stay in arc ``i`` for all times: either the field
  vanishes at the breaks, or the breaks are carried along with the points
  (global profiles and sections).
  """

  max_order = 2

  def __init__(
      self,
      field: FieldLike,
      time: float,
      breaks: BreakConfig,
      spec: Optional[FlowSpec] = None,
      tolerances: Optional[Tolerances] = None,
  ) -> None:
    super().__init__(breaks, 1, tolerances)
    self.field = field
    self.time = float(time)
    self.spec = spec or DEFAULT_FLOW
    self.steps = max(self.spec.min_steps, math.ceil(abs(self.time) * self.spec.steps_per_unit))
    self._autonomous = isinstance(field, BrokenField)

  def _velocity(self, arc: int, x: np.ndarray, p: np.ndarray) -> List[np.ndarray]:
    if self._autonomous:
      return self.field.arc_jets(arc, x, 2)
    env = {f"p{i}": float(v) for i, v in enumerate(p, start=1)}
    env["x"] = x
    piece = self.field.piece(arc)
    return [
        np.broadcast_to(np.asarray(evaluate(piece.derivative("x", k), env), dtype=float), x.shape)
        for k in range(3)
    ]

  def _anchor(self, p: np.ndarray) -> np.ndarray:
    env = {f"p{i}": float(v) for i, v in enumerate(p, start=1)}
    values = []
    for i, angle in enumerate(p, start=1):
      env["x"] = float(angle)
      values.append(float(evaluate(self.field.piece(i), env)))
    return np.array(values)

  def arc_jets(self, arc: int, x: np.ndarray, order: int) -> List[np.ndarray]:
    self._check_order(order)
    m = x.size
    n = self.breaks.n
    state = np.concatenate([x, np.ones(m), np.zeros(m), np.asarray(self.breaks.angles)])

    def rhs(s: np.ndarray) -> np.ndarray:
      points, j1, j2, p = s[:m], s[m : 2 * m], s[2 * m : 3 * m], s[3 * m :]
      u, ux, uxx = self._velocity(arc, points, p)
      moving = np.zeros(n) if self._autonomous else self._anchor(p)
      return np.concatenate([u, ux * j1, uxx * j1**2 + ux * j2, moving])

    dt = self.time / self.steps
    if dt != 0.0:
      for _ in range(self.steps):
        state = rk4_step(state, dt, rhs)
    return [state[:m], state[m : 2 * m], state[2 * m : 3 * m]][: order + 1]

  def validate_monotone(self, samples: int = MONOTONE_SAMPLES) -> None:
    super().validate_monotone(samples)


def _flow_breaks(field: FieldLike, p: Optional[BreakConfig]) -> BreakConfig:
  if isinstance(field, Section):
    if p is None:
      raise ValueError("Flowing a section needs a base configuration")
    field.at(p)
    return p
  if p is not None and not field.breaks.matches(p, field.tolerances.tol_cont):
    raise FlowError(f"Field breaks {field.breaks.angles} differ from {p.angles}")
  return field.breaks


def flow(
    u: FieldLike,
    time: float,
    spec: Optional[FlowSpec] = None,
    p: Optional[BreakConfig] = None,
    tolerances: Optional[Tolerances] = None,
) -> BrokenDiffeo:
  """The time-``time`` flow of ``u`` as an arrow.

  Args:
    u: A broken field, or a section together with ``p``.
    time: Flow time, any sign.
    spec: RK4 settings.
    p: Base configuration (required for sections).
    tolerances: Tolerances for the monotonicity check.

  Returns:
    An arrow with ``src`` the breaks of ``u`` and ``trg`` the flowed breaks.

  Raises:
    FlowError: If monotonicity is lost after all refinements, or if ``u`` is
      a piecewise field that does not vanish at its breaks.
  """
  breaks = _flow_breaks(u, p)
  if isinstance(u, BrokenField) and not u.is_global and not u.vanishes_at_breaks():
    raise FlowError(
        "A piecewise field that moves its breaks must be given as a section"
    )
  spec = spec or DEFAULT_FLOW
  lift = FlowMap(u, time, breaks, spec, tolerances)
  refinements = 0
  while True:
    try:
      lift.validate_monotone()
      break
    except MonotonicityError as error:
      if refinements == spec.max_refinements:
        raise FlowError(
            f"Flow for time {time} is not monotone with {lift.steps} steps: {error}"
        ) from error
      refinements += 1
      lift.steps *= 2
      logger.info("Refining flow for time %s to %d steps", time, lift.steps)
  return BrokenDiffeo(lift, tolerances, check=False)


def flow_group_law_residual(
    u: FieldLike,
    t: float,
    s: float,
    points: Sequence[float],
    spec: Optional[FlowSpec] = None,
    p: Optional[BreakConfig] = None,
) -> float:
  """Largest ``|flow(t + s)(x) - (flow(t) o flow(s))(x)|`` over ``points``."""
  first = flow(u, s, spec, p)
  if isinstance(u, Section):
    second = flow(u, t, spec, first.trg)
  elif u.vanishes_at_breaks():
    second = flow(u, t, spec)
  else:
    moved = BrokenField(first.trg, u.pieces[:1], u.bindings, u.tolerances)
    second = flow(moved, t, spec)
  total = flow(u, t + s, spec, p)
  composite = compose_diffeos(second, first)
  x = np.asarray(points, dtype=float)
  return float(np.max(np.abs(total(x) - composite(x))))


def _require_isotropy(u: FieldLike, p: BreakConfig, label: str) -> BrokenField:
  field = u.at(p) if isinstance(u, Section) else u
  if not field.breaks.matches(p, field.tolerances.tol_cont):
    raise ValueError(f"Field {label} is not broken at {p.angles}")
  if not field.vanishes_at_breaks():
    raise IsotropyError(f"Field {label} does not vanish at the breaks {p.angles}")
  return field


def derive_algebroid_cocycle(
    u: FieldLike,
    v: FieldLike,
    p: BreakConfig,
    i: int,
    h: float = 1e-3,
    spec: Optional[FlowSpec] = None,
    q: Optional[QuadratureSpec] = None,
) -> float:
  """Mixed central difference of the antisymmetrised Bott cocycle.

  With ``D(t, s) = chi_i(phi^t, psi^s) - chi_i(psi^s, phi^t)`` for the flows
  ``phi^t`` of ``u`` and ``psi^s`` of ``v``, returns

    (D(h, h) - D(h, -h) - D(-h, h) + D(-h, -h)) / (4 h^2),

  which tends to ``Omega_i(u, v)`` at rate ``O(h^2)``.

  Raises:
    IsotropyError: If ``u`` or ``v`` does not vanish at the breaks.
    FlowError: If a flow cannot be built.
  """
  fu = _require_isotropy(u, p, "u")
  fv = _require_isotropy(v, p, "v")
  flows_u = {sign: flow(fu, sign * h, spec) for sign in (1, -1)}
  flows_v = {sign: flow(fv, sign * h, spec) for sign in (1, -1)}

  def antisymmetrized(a: int, b: int) -> float:
    phi, psi = flows_u[a], flows_v[b]
    return chi_i(phi, psi, i, q) - chi_i(psi, phi, i, q)

  numerator = (
      antisymmetrized(1, 1)
      - antisymmetrized(1, -1)
      - antisymmetrized(-1, 1)
      + antisymmetrized(-1, -1)
  )
  if abs(numerator) < NOISE_FLOOR:
    logger.warning(
        "Mixed difference %s for h=%s is below the noise floor %s", numerator, h, NOISE_FLOOR
    )
  return numerator / (4.0 * h * h)


class ConvergenceEstimate(NamedTuple):
  """Errors of the derived cocycle at ``h`` and ``h/2`` and the observed order."""

  order: float
  error_h: float
  error_half: float
  exact: float


def convergence_order(
    u: FieldLike,
    v: FieldLike,
    p: BreakConfig,
    i: int,
    h: float = 0.1,
    spec: Optional[FlowSpec] = None,
    q: Optional[QuadratureSpec] = None,
) -> ConvergenceEstimate:
  """Observed order of ``derive_algebroid_cocycle`` from steps ``h`` and ``h/2``."""
  exact = omega_i(u, v, p, i, q)
  error_h = abs(derive_algebroid_cocycle(u, v, p, i, h, spec, q) - exact)
  error_half = abs(derive_algebroid_cocycle(u, v, p, i, h / 2.0, spec, q) - exact)
  if error_half == 0.0 or error_h == 0.0:
    order = math.inf
  else:
    order = math.log2(error_h / error_half)
  return ConvergenceEstimate(order, error_h, error_half, exact)
