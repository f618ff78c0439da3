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

"""Verification suites.

Each suite draws seeded random inputs, runs its checks and collects one
:class:`~broken_virasoro.scenario.CheckRecord` per check. A check passes when
its residual is finite and at most its tolerance; an exception raised by a
check is logged and recorded as a failure without stopping the suite.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebroid import (
    BrokenField,
    ExtendedSection,
    OneForm,
    Section,
    algebroid_cocycle_residual,
    anchor_morphism_residual,
    bracket_sections,
    coboundary,
    embed_section,
    extended_jacobi_residual,
    jacobi_residual,
    leibniz_residual,
    lie_bracket,
    omega_i,
)
from .expr import X, Const, Expression, cos, p, sin
from .geometry import (
    TWO_PI,
    BreakConfig,
    QuadratureSpec,
    Tolerances,
    random_break_config,
)
from .groupoid import (
    Bisection,
    BrokenDiffeo,
    ExtendedDiffeo,
    associativity_residual,
    base_map_composition_residual,
    bisection_compose,
    bott_boundary_relation,
    extended_inverse,
    extended_multiply,
    groupoid_cocycle_residual,
)
from .interval import (
    IntervalDiffeo,
    IntervalField,
    SegmentedField,
    interval_cocycle_residual,
    multibreak_interval_cocycles,
    nontriviality_certificate,
    omega_interval,
    segmented_bracket,
    sin_basis_omega,
)
from .linkage import (
    FlowSpec,
    convergence_order,
    derive_algebroid_cocycle,
    flow,
    flow_group_law_residual,
)
from .scenario import (
    CheckRecord,
    Report,
    Scenario,
    SuiteSettings,
    format_value,
    inputs_digest,
)

logger = logging.getLogger(__name__)

CheckResult = Tuple[float, Dict[str, Any]]

LINKAGE_MIN_GAP = 1.0
CONVERGENCE_PAIRS = 3
FLOW_TRIPLES = 5
STRUCTURE_POINTS = 5
EXTENSION_SAMPLES = 5
ASSOCIATIVITY_TRIPLES = 3
SEGMENT_IDENTITY_SAMPLES = 5

# The arc cocycle of e_1 = sin(x) and e_2 = sin(2x) on the arc [0, pi].
PINNED_OMEGA = -20.0 / 3.0


@dataclass
class SuiteContext:
  """Settings, random state and collected records of one suite run."""

  settings: SuiteSettings
  quadrature: QuadratureSpec
  tolerances: Tolerances
  flow: FlowSpec
  seed: int = 0
  scenario: Optional[Scenario] = None
  rng: np.random.Generator = field(init=False)
  records: List[CheckRecord] = field(default_factory=list)

  def __post_init__(self) -> None:
    self.rng = np.random.default_rng(self.seed)

  def break_count(self, index: int) -> int:
    counts = self.settings.break_counts
    return counts[index % len(counts)]

  def check(
      self,
      name: str,
      inputs: Dict[str, Any],
      tolerance: float,
      compute: Callable[[], CheckResult],
  ) -> CheckRecord:
    """Runs one check and records its outcome."""
    record_id = len(self.records) + 1
    digest = inputs_digest(inputs)
    try:
      residual, values = compute()
      residual = abs(float(residual))
      passed = bool(math.isfinite(residual) and residual <= tolerance)
      record = CheckRecord(
          id=record_id,
          name=name,
          inputs_digest=digest,
          values={key: format_value(value) for key, value in values.items()},
          residual=residual if math.isfinite(residual) else None,
          tolerance=tolerance,
          passed=passed,
      )
    except Exception as error:  # pylint: disable=broad-exception-caught
      logger.error("Check %d (%s) raised %s", record_id, name, error, exc_info=True)
      record = CheckRecord(
          id=record_id,
          name=name,
          inputs_digest=digest,
          tolerance=tolerance,
          passed=False,
          error=f"{type(error).__name__}: {error}",
      )
    level = logging.DEBUG if record.passed else logging.WARNING
    logger.log(
        level, "Check %d %s: residual=%s tolerance=%s passed=%s",
        record_id, name, record.residual, tolerance, record.passed,
    )
    self.records.append(record)
    return record


# ---------------------------------------------------------------------------
# Random inputs
# ---------------------------------------------------------------------------


def _uniform(rng: np.random.Generator, low: float, high: float) -> float:
  return float(rng.uniform(low, high))


def _arc_end(n: int, i: int) -> Expression:
  return p(i + 1) if i < n else p(1) + TWO_PI


def random_section(n: int, rng: np.random.Generator, max_degree: int = 3) -> Section:
  """A continuous section with a smooth part, a part moving with each break
  and a kink at every break.

  The smooth part is a trigonometric polynomial with coefficients decaying
  like ``1/k``; the kinks ``d_i sin(pi (x - p_i) / (p_{i+1} - p_i))`` vanish at
  both ends of their arc, so the section is continuous for every ``p``.
  """
  common: Expression = Const(_uniform(rng, -1.0, 1.0))
  for k in range(1, max_degree + 1):
    a, b = _uniform(rng, -1.0, 1.0) / k, _uniform(rng, -1.0, 1.0) / k
    common = common + a * cos(X * k) + b * sin(X * k)
  for j in range(1, n + 1):
    common = common + _uniform(rng, -0.5, 0.5) * sin(X - p(j))
  pieces = []
  for i in range(1, n + 1):
    width = _arc_end(n, i) - p(i)
    kink = _uniform(rng, -0.5, 0.5) * sin(math.pi * (X - p(i)) / width)
    pieces.append(common + kink)
  return Section(n, pieces)


def random_isotropy_field(
    breaks: BreakConfig,
    rng: np.random.Generator,
    terms: int = 2,
    amplitude: float = 0.5,
    tolerances: Optional[Tolerances] = None,
) -> BrokenField:
  """A field vanishing at every break: a short sine series on each arc."""
  pieces = []
  for a, b in breaks.arcs():
    piece: Expression = Const(0.0)
    for k in range(1, terms + 1):
      c = _uniform(rng, -amplitude, amplitude) / k**2
      piece = piece + c * sin((math.pi * k / (b - a)) * (X - a))
    pieces.append(piece)
  return BrokenField(breaks, pieces, tolerances=tolerances)


def random_jump_diffeo(
    src: BreakConfig,
    rng: np.random.Generator,
    rotate: bool = True,
    tolerances: Optional[Tolerances] = None,
) -> BrokenDiffeo:
  """An arrow whose derivative jumps at the breaks.

  On arc ``[a, b]`` the lift is ``x + angle + c (x - a)(b - x)/(b - a)`` with
  ``|c| < 0.8``, so its slope stays in ``[0.2, 1.8]``.
  """
  angle = _uniform(rng, -1.0, 1.0) if rotate else 0.0
  pieces = []
  for a, b in src.arcs():
    c = _uniform(rng, -0.8, 0.8)
    pieces.append(X + angle + c * (X - a) * (b - X) / (b - a))
  return BrokenDiffeo.from_expressions(src, pieces, tolerances=tolerances)


def random_smooth_diffeo(
    src: BreakConfig, rng: np.random.Generator, tolerances: Optional[Tolerances] = None
) -> BrokenDiffeo:
  """``x + angle + c sin(x + d)`` with ``|c| < 0.5``: smooth across every break."""
  angle = _uniform(rng, -1.0, 1.0)
  c, d = _uniform(rng, -0.5, 0.5), _uniform(rng, 0.0, TWO_PI)
  return BrokenDiffeo.from_expressions(src, [X + angle + c * sin(X + d)], tolerances=tolerances)


def random_flow_diffeo(
    src: BreakConfig,
    rng: np.random.Generator,
    spec: Optional[FlowSpec] = None,
    tolerances: Optional[Tolerances] = None,
) -> BrokenDiffeo:
  """The flow of a random field vanishing at the breaks, for a short time."""
  u = random_isotropy_field(src, rng, tolerances=tolerances)
  t = _uniform(rng, 0.1, 0.3) * (1.0 if rng.uniform() < 0.5 else -1.0)
  return flow(u, t, spec, tolerances=tolerances)


def random_arrow(
    src: BreakConfig,
    rng: np.random.Generator,
    use_flow: bool = False,
    spec: Optional[FlowSpec] = None,
    tolerances: Optional[Tolerances] = None,
) -> BrokenDiffeo:
  if use_flow:
    return random_flow_diffeo(src, rng, spec, tolerances)
  kind = int(rng.integers(0, 3))
  if kind == 0:
    return random_smooth_diffeo(src, rng, tolerances)
  return random_jump_diffeo(src, rng, rotate=kind == 2, tolerances=tolerances)


def random_composable_triple(
    src: BreakConfig,
    rng: np.random.Generator,
    allow_flow: bool = False,
    spec: Optional[FlowSpec] = None,
    tolerances: Optional[Tolerances] = None,
) -> Tuple[BrokenDiffeo, BrokenDiffeo, BrokenDiffeo]:
  """``(phi, psi, eta)`` with ``src(phi) = trg(psi)`` and ``src(psi) = trg(eta)``.

  At most one of the three is a flow.
  """
  flow_slot = int(rng.integers(0, 4)) if allow_flow else 3
  eta = random_arrow(src, rng, flow_slot == 2, spec, tolerances)
  psi = random_arrow(eta.trg, rng, flow_slot == 1, spec, tolerances)
  phi = random_arrow(psi.trg, rng, flow_slot == 0, spec, tolerances)
  return phi, psi, eta


def random_bisection(n: int, rng: np.random.Generator) -> Bisection:
  """``x + a + c sin(x - p_1)`` with ``|c| < 0.5``: order-preserving on breaks."""
  a, c = _uniform(rng, -0.5, 0.5), _uniform(rng, -0.5, 0.5)
  return Bisection(n, [X + a + c * sin(X - p(1))])


def _describe(*objects: Any) -> List[str]:
  return [repr(o) for o in objects]


def _circle_gap(a: np.ndarray, b: np.ndarray) -> float:
  """Largest distance between two arrays of angles, modulo 2pi."""
  d = np.remainder(np.asarray(a) - np.asarray(b) + math.pi, TWO_PI) - math.pi
  return float(np.max(np.abs(d)))


def _points(rng: np.random.Generator, breaks: BreakConfig, count: int) -> List[Tuple[float, BreakConfig]]:
  return [(_uniform(rng, 0.0, TWO_PI), breaks) for _ in range(count)]


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def verify_algebroid_cocycle(ctx: SuiteContext) -> None:
  """Cocycle identity of every arc cocycle on random section triples."""
  s = ctx.settings
  for index in range(s.algebroid_count):
    n = ctx.break_count(index)
    breaks = random_break_config(n, ctx.rng)
    u, v, w = (random_section(n, ctx.rng, s.max_degree) for _ in range(3))
    inputs = {"p": breaks.angles, "sections": _describe(u, v, w)}
    for arc in range(1, n + 1):
      ctx.check(
          f"algebroid cocycle arc {arc}",
          {**inputs, "arc": arc},
          s.algebroid_tol,
          lambda arc=arc: (
              algebroid_cocycle_residual(arc, u, v, w, breaks, ctx.quadrature, s.lie_step),
              {"arc": arc},
          ),
      )
    if index < EXTENSION_SAMPLES:
      end = breaks.angles[1] if n > 1 else breaks.upper
      location = (p(1) + p(2)) / 2 if n > 1 else p(1) + math.pi
      theta = OneForm.point_evaluation(n, location, arc=1)
      ctx.check(
          "coboundary is a cocycle",
          {**inputs, "location": str(location)},
          s.algebroid_tol,
          lambda: (
              algebroid_cocycle_residual(coboundary(theta), u, v, w, breaks),
              {"location": 0.5 * (breaks.angles[0] + end)},
          ),
      )
  if ctx.scenario is not None and len(ctx.scenario.fields) >= 3:
    names = list(ctx.scenario.fields)[:3]
    fu, fv, fw = (ctx.scenario.field(name) for name in names)
    pinned = ctx.scenario.breaks
    for arc in range(1, pinned.n + 1):
      ctx.check(
          f"algebroid cocycle arc {arc} on {', '.join(names)}",
          {"p": pinned.angles, "fields": names, "arc": arc},
          s.algebroid_tol,
          lambda arc=arc: (
              algebroid_cocycle_residual(arc, fu, fv, fw, pinned, ctx.quadrature, s.lie_step),
              {"arc": arc},
          ),
      )


def _check_groupoid_triple(
    ctx: SuiteContext, label: str, triple: Sequence[BrokenDiffeo], inputs: Dict[str, Any]
) -> None:
  phi, psi, eta = triple

  def compute() -> Tuple[float, Dict[str, Any]]:
    residual = groupoid_cocycle_residual(phi, psi, eta, ctx.quadrature)
    return float(np.max(np.abs(residual))), {"residual": residual}

  ctx.check(label, inputs, ctx.settings.groupoid_tol, compute)


def verify_groupoid_cocycle(ctx: SuiteContext) -> None:
  """Cocycle identity of the Bott cocycles, plus the unit, inverse and
  associativity laws of the extended groupoid."""
  s = ctx.settings
  if ctx.scenario is not None and len(ctx.scenario.diffeos) >= 3:
    names = list(ctx.scenario.diffeos)[:3]
    triple = [ctx.scenario.diffeo(name) for name in names]
    _check_groupoid_triple(
        ctx, f"groupoid cocycle on {', '.join(names)}", triple, {"diffeos": names}
    )
  for index in range(s.groupoid_count):
    n = ctx.break_count(index)
    breaks = random_break_config(n, ctx.rng)
    triple = random_composable_triple(
        breaks, ctx.rng, index < FLOW_TRIPLES, ctx.flow, ctx.tolerances
    )
    inputs = {"p": breaks.angles, "arrows": _describe(*triple), "index": index}
    _check_groupoid_triple(ctx, "groupoid cocycle", triple, inputs)
    if index < ASSOCIATIVITY_TRIPLES:
      _check_extended_laws(ctx, triple, inputs)


def _check_extended_laws(
    ctx: SuiteContext, triple: Sequence[BrokenDiffeo], inputs: Dict[str, Any]
) -> None:
  q = ctx.quadrature
  tol = ctx.settings.groupoid_tol
  charges = [tuple(ctx.rng.uniform(-1.0, 1.0, size=arrow.n)) for arrow in triple]
  a, b, c = (ExtendedDiffeo(arrow, charge) for arrow, charge in zip(triple, charges))
  phi, psi, eta = triple

  def associativity() -> Tuple[float, Dict[str, Any]]:
    residual = associativity_residual(a, b, c, q)
    cocycle = groupoid_cocycle_residual(phi, psi, eta, q)
    # The charge defect of the two bracketings is the cocycle residual itself.
    return float(np.max(np.abs(residual - cocycle))), {"associativity": residual}

  ctx.check("associativity defect equals cocycle residual", inputs, 1e-12, associativity)

  def units() -> Tuple[float, Dict[str, Any]]:
    left = ExtendedDiffeo.unit(phi.trg, ctx.tolerances)
    right = ExtendedDiffeo.unit(phi.src, ctx.tolerances)
    worst = 0.0
    x = np.linspace(phi.src.angles[0], phi.src.upper, 17)
    for product in (extended_multiply(left, a, q), extended_multiply(a, right, q)):
      worst = max(
          worst,
          float(np.max(np.abs(np.asarray(product.charge) - np.asarray(a.charge)))),
          _circle_gap(product.arrow(x), phi(x)),
      )
    return worst, {}

  ctx.check("extended unit laws", inputs, tol, units)

  def inverses() -> Tuple[float, Dict[str, Any]]:
    product = extended_multiply(extended_inverse(a, q), a, q)
    x = np.linspace(phi.src.angles[0], phi.src.upper, 17)
    arrow_gap = _circle_gap(product.arrow(x), x)
    charge_gap = float(np.max(np.abs(product.charge)))
    return max(arrow_gap, charge_gap), {"charge": product.charge}

  ctx.check("extended inverse law", inputs, tol, inverses)


def verify_jacobi(ctx: SuiteContext) -> None:
  """Axioms of the algebroid, its extension and bisection composition."""
  s = ctx.settings
  tol = s.jacobi_tol
  for index in range(s.jacobi_count):
    n = ctx.break_count(index)
    breaks = random_break_config(n, ctx.rng)
    u, v, w = (random_section(n, ctx.rng, s.max_degree) for _ in range(3))
    points = _points(ctx.rng, breaks, STRUCTURE_POINTS)
    inputs = {"p": breaks.angles, "sections": _describe(u, v, w)}

    def antisymmetry() -> Tuple[float, Dict[str, Any]]:
      uv = bracket_sections(u, v, [breaks])
      vu = bracket_sections(v, u, [breaks])
      return max(abs(float(uv.value(x, c)[0] + vu.value(x, c)[0])) for x, c in points), {}

    ctx.check("bracket antisymmetry", inputs, tol, antisymmetry)
    ctx.check("Jacobi identity", inputs, tol, lambda: (jacobi_residual(u, v, w, points), {}))

    def embedding() -> Tuple[float, Dict[str, Any]]:
      bracket = bracket_sections(u, v, [breaks])
      direct = embed_section(bracket)
      lifted = lie_bracket(embed_section(u), embed_section(v))
      worst = max(
          float(np.max(np.abs(direct.evaluate(x, c) - lifted.evaluate(x, c)))) for x, c in points
      )
      return worst, {"tangent": lifted.is_tangent(breaks)}

    ctx.check("embedding preserves brackets", inputs, tol, embedding)

    factor = _uniform(ctx.rng, -1.0, 1.0) * sin(p(1)) + _uniform(ctx.rng, -1.0, 1.0) * cos(p(n))
    ctx.check(
        "Leibniz rule",
        {**inputs, "f": str(factor)},
        tol,
        lambda: (leibniz_residual(u, v, factor, points), {}),
    )
    ctx.check(
        "anchor is a morphism",
        inputs,
        tol,
        lambda: (anchor_morphism_residual(u, v, breaks), {}),
    )

    if index < EXTENSION_SAMPLES:
      coefficients = ctx.rng.uniform(-1.0, 1.0, size=n)
      central = [
          [_uniform(ctx.rng, -1.0, 1.0) * sin(p(i)) for i in range(1, n + 1)] for _ in range(3)
      ]
      a, b, c = (ExtendedSection.of(x, f) for x, f in zip((u, v, w), central))
      ctx.check(
          "extended Jacobi identity",
          {**inputs, "coefficients": coefficients.tolist()},
          s.extension_tol,
          lambda: (
              float(np.max(np.abs(extended_jacobi_residual(
                  a, b, c, breaks, coefficients, ctx.quadrature, s.lie_step
              )))),
              {},
          ),
      )

    phi, psi = random_bisection(n, ctx.rng), random_bisection(n, ctx.rng)
    samples = [random_break_config(n, ctx.rng) for _ in range(STRUCTURE_POINTS)]
    bisection_inputs = {"bisections": [str(b.piece(1)) for b in (phi, psi)], "n": n}
    ctx.check(
        "bisection base maps compose",
        bisection_inputs,
        tol,
        lambda: (base_map_composition_residual(phi, psi, samples), {}),
    )

    def bisection_action() -> Tuple[float, Dict[str, Any]]:
      product = bisection_compose(phi, psi, samples)
      worst = 0.0
      for q in samples:
        x = _uniform(ctx.rng, 0.0, TWO_PI)
        y, moved = psi.evaluate(x, q)
        direct, _ = product.evaluate(x, q)
        chained, _ = phi.evaluate(y, moved)
        worst = max(worst, abs(direct - chained))
      return worst, {}

    ctx.check("bisection composition acts pointwise", bisection_inputs, tol, bisection_action)


def verify_bott_boundary(ctx: SuiteContext) -> None:
  """Boundary-corrected Bott relation, for smooth and for jumping arrows."""
  s = ctx.settings
  for index in range(s.bott_count):
    n = ctx.break_count(index)
    breaks = random_break_config(n, ctx.rng)
    smooth = index % 2 == 0
    if smooth:
      psi = random_smooth_diffeo(breaks, ctx.rng, ctx.tolerances)
    else:
      psi = random_jump_diffeo(breaks, ctx.rng, rotate=bool(index % 4 == 1), tolerances=ctx.tolerances)
    phi = random_arrow(psi.trg, ctx.rng, tolerances=ctx.tolerances)
    inputs = {"p": breaks.angles, "arrows": _describe(phi, psi), "smooth": smooth}
    relation: Dict[str, Any] = {}

    def compute() -> Tuple[float, Dict[str, Any]]:
      result = bott_boundary_relation(phi, psi, ctx.quadrature)
      relation["value"] = result
      return result.residual, {
          "lhs": result.lhs,
          "rhs": result.rhs,
          "classical": result.classical,
          "boundary": result.boundary,
      }

    ctx.check("Bott relation" + (" (smooth)" if smooth else " (jump)"), inputs, s.bott_tol, compute)
    if smooth and "value" in relation:
      boundary = relation["value"].boundary
      ctx.check(
          "boundary term vanishes for smooth arrows",
          inputs,
          s.bott_smooth_tol,
          lambda: (boundary, {"boundary": boundary}),
      )


def _linkage_check(
    ctx: SuiteContext,
    label: str,
    u: BrokenField,
    v: BrokenField,
    breaks: BreakConfig,
    arc: int,
    inputs: Dict[str, Any],
    exact: Optional[float] = None,
) -> None:
  s = ctx.settings
  reference = exact if exact is not None else omega_i(u, v, breaks, arc, ctx.quadrature)
  tolerance = s.linkage_tol * max(1.0, abs(reference))

  def compute() -> Tuple[float, Dict[str, Any]]:
    derived = derive_algebroid_cocycle(u, v, breaks, arc, s.linkage_step, ctx.flow, ctx.quadrature)
    return derived - reference, {"derived": derived, "exact": reference}

  ctx.check(label, {**inputs, "arc": arc, "h": s.linkage_step}, tolerance, compute)


def verify_linkage(ctx: SuiteContext) -> None:
  """Differentiating the Bott cocycles recovers the arc cocycles."""
  s = ctx.settings
  pinned = BreakConfig((0.0, math.pi))
  e1 = BrokenField(pinned, [sin(X)], tolerances=ctx.tolerances)
  e2 = BrokenField(pinned, [sin(X * 2)], tolerances=ctx.tolerances)
  _linkage_check(
      ctx, "derived cocycle of sin(x), sin(2x)", e1, e2, pinned, 1,
      {"p": pinned.angles, "fields": ["sin(x)", "sin(2*x)"]}, PINNED_OMEGA,
  )
  if ctx.scenario is not None:
    fields = [f for f in ctx.scenario.fields.values() if f.vanishes_at_breaks()]
    if len(fields) >= 2:
      fu, fv = fields[:2]
      for arc in range(1, ctx.scenario.breaks.n + 1):
        _linkage_check(
            ctx, f"derived cocycle of scenario fields, arc {arc}", fu, fv,
            ctx.scenario.breaks, arc, {"fields": _describe(fu, fv)},
        )

  lo, hi = s.order_range
  for index in range(s.linkage_count):
    n = ctx.break_count(index)
    breaks = random_break_config(n, ctx.rng, min_gap=LINKAGE_MIN_GAP)
    u = random_isotropy_field(breaks, ctx.rng, tolerances=ctx.tolerances)
    v = random_isotropy_field(breaks, ctx.rng, tolerances=ctx.tolerances)
    arc = int(ctx.rng.integers(1, n + 1))
    inputs = {"p": breaks.angles, "fields": _describe(u, v)}
    _linkage_check(ctx, "derived cocycle", u, v, breaks, arc, inputs)
    if index >= CONVERGENCE_PAIRS:
      continue

    def order_check(u=u, v=v, breaks=breaks, arc=arc) -> Tuple[float, Dict[str, Any]]:
      estimate = convergence_order(
          u, v, breaks, arc, s.convergence_step, ctx.flow, ctx.quadrature
      )
      outside = max(lo - estimate.order, estimate.order - hi, 0.0)
      return outside, {
          "order": estimate.order,
          "error_h": estimate.error_h,
          "error_half": estimate.error_half,
      }

    ctx.check("convergence order", {**inputs, "arc": arc}, 0.0, order_check)

    points = np.linspace(breaks.angles[0], breaks.upper, STRUCTURE_POINTS, endpoint=False)
    ctx.check(
        "flow group law",
        inputs,
        s.groupoid_tol,
        lambda u=u, points=points: (
            flow_group_law_residual(u, 0.2, 0.15, points, ctx.flow), {}
        ),
    )


def _fixed_interval_diffeo(rng: np.random.Generator) -> IntervalDiffeo:
  k = int(rng.integers(1, 4))
  c = _uniform(rng, -0.8, 0.8)
  return IntervalDiffeo(0.0, 1.0, X + c * sin(X * (k * math.pi)) / (k * math.pi), True)


def _moving_interval_diffeo(length: float, image: float, rng: np.random.Generator) -> IntervalDiffeo:
  c = _uniform(rng, -0.5, 0.5) * image / length
  profile = (image / length) * X + c * (length / math.pi) * sin((math.pi / length) * X)
  return IntervalDiffeo(0.0, length, profile)


def _random_segmented_field(partition: Sequence[float], rng: np.random.Generator) -> SegmentedField:
  pieces = []
  for a, b in zip(partition, partition[1:]):
    piece: Expression = Const(0.0)
    for k in (1, 2):
      piece = piece + (_uniform(rng, -1.0, 1.0) / k) * sin((math.pi * k / (b - a)) * (X - a))
    pieces.append(piece)
  return SegmentedField(tuple(partition), tuple(pieces))


def verify_interval_cocycle(ctx: SuiteContext) -> None:
  """Sin-basis oracle, non-triviality certificate and the interval group cocycle."""
  s = ctx.settings
  for n_index in range(2, s.table_bound + 1):
    for m_index in range(1, n_index):
      exact = sin_basis_omega(m_index, n_index)
      ctx.check(
          f"sin-basis cocycle ({m_index}, {n_index})",
          {"m": m_index, "n": n_index},
          s.interval_tol * max(1.0, abs(float(exact))),
          lambda m=m_index, k=n_index, exact=exact: _sin_basis_check(ctx, m, k, exact),
      )

  def certificate() -> Tuple[float, Dict[str, Any]]:
    result = nontriviality_certificate(s.certificate_bound)
    values: Dict[str, Any] = {f"lambda_{k}": v for k, v in result.lambdas.items()}
    if result.witness is not None:
      k, l = result.witness
      row = next(r for r in result.rows if (r.k, r.l) == (k, l))
      values.update({"witness_k": k, "witness_l": l, "lhs": row.lhs, "rhs": row.rhs, "residual": row.residual})
    mismatches = result.sin_basis_mismatches()
    values["sin_basis_mismatches"] = len(mismatches)
    return (0.0 if result.valid and not mismatches else 1.0), values

  ctx.check("non-triviality certificate", {"bound": s.certificate_bound}, 0.0, certificate)

  for index in range(s.interval_count):
    triple = [_fixed_interval_diffeo(ctx.rng) for _ in range(3)]
    ctx.check(
        "interval cocycle (fixed endpoints)",
        {"maps": [str(d.profile) for d in triple], "index": index},
        s.interval_tol,
        lambda triple=triple: (interval_cocycle_residual(*triple, ctx.quadrature), {}),
    )

  for index in range(s.segment_count):
    lengths = ctx.rng.uniform(0.5, 2.0, size=4)
    eta = _moving_interval_diffeo(float(lengths[0]), float(lengths[1]), ctx.rng)
    psi = _moving_interval_diffeo(float(lengths[1]), float(lengths[2]), ctx.rng)
    phi = _moving_interval_diffeo(float(lengths[2]), float(lengths[3]), ctx.rng)
    ctx.check(
        "interval cocycle (moving endpoints)",
        {"maps": [str(d.profile) for d in (phi, psi, eta)], "index": index},
        s.interval_tol,
        lambda phi=phi, psi=psi, eta=eta: (interval_cocycle_residual(phi, psi, eta, ctx.quadrature), {}),
    )

  for index in range(SEGMENT_IDENTITY_SAMPLES):
    interior = np.sort(ctx.rng.uniform(0.3, math.pi - 0.3, size=index % 3))
    partition = (0.0, *interior.tolist(), math.pi)
    if any(b - a < 0.2 for a, b in zip(partition, partition[1:])):
      partition = tuple(np.linspace(0.0, math.pi, len(partition)).tolist())
    u, v, w = (_random_segmented_field(partition, ctx.rng) for _ in range(3))

    def identity(u=u, v=v, w=w) -> Tuple[float, Dict[str, Any]]:
      total = (
          multibreak_interval_cocycles(segmented_bracket(u, v), w, ctx.quadrature)
          + multibreak_interval_cocycles(segmented_bracket(v, w), u, ctx.quadrature)
          + multibreak_interval_cocycles(segmented_bracket(w, u), v, ctx.quadrature)
      )
      return float(np.max(np.abs(total))), {"components": total}

    ctx.check(
        "multi-break interval cocycle identity",
        {"partition": partition, "index": index},
        s.jacobi_tol * 100,
        identity,
    )


def _sin_basis_check(ctx: SuiteContext, m: int, n: int, exact: Fraction) -> Tuple[float, Dict[str, Any]]:
  numeric = omega_interval(IntervalField.sin_basis(m), IntervalField.sin_basis(n), ctx.quadrature)
  return numeric - float(exact), {"exact": exact, "numeric": numeric}


Suite = Callable[[SuiteContext], None]

SUITES: Dict[str, Suite] = {
    "algebroid-cocycle": verify_algebroid_cocycle,
    "groupoid-cocycle": verify_groupoid_cocycle,
    "jacobi": verify_jacobi,
    "bott-boundary": verify_bott_boundary,
    "linkage": verify_linkage,
    "interval-cocycle": verify_interval_cocycle,
}

SUITE_COUNT_FIELDS: Dict[str, Tuple[str, ...]] = {
    "algebroid-cocycle": ("algebroid_count",),
    "groupoid-cocycle": ("groupoid_count",),
    "jacobi": ("jacobi_count",),
    "bott-boundary": ("bott_count",),
    "linkage": ("linkage_count",),
    "interval-cocycle": ("interval_count", "segment_count"),
}

SUITE_TOLERANCE_FIELDS: Dict[str, Tuple[str, ...]] = {
    "algebroid-cocycle": ("algebroid_tol",),
    "groupoid-cocycle": ("groupoid_tol",),
    "jacobi": ("jacobi_tol", "extension_tol"),
    "bott-boundary": ("bott_tol", "bott_smooth_tol"),
    "linkage": ("linkage_tol",),
    "interval-cocycle": ("interval_tol",),
}


def suite_names() -> List[str]:
  return list(SUITES)


def run_suite(
    name: str,
    scenario: Optional[Scenario] = None,
    seed: int = 0,
    settings: Optional[SuiteSettings] = None,
    count: Optional[int] = None,
    tolerance: Optional[float] = None,
) -> Report:
  """Runs one suite and returns its report.

  Args:
    name: One of :func:`suite_names`.
    scenario: Optional scenario; its settings, tolerances, quadrature and
      flow settings apply and its objects are checked as pinned inputs.
    seed: Seed of the random inputs.
    settings: Overrides the scenario's suite settings.
    count: Overrides the number of random inputs.
    tolerance: Overrides the suite's tolerances.

  Raises:
    ValueError: If the suite name is unknown.
  """
  if name not in SUITES:
    raise ValueError(f"Unknown suite {name!r}; available: {', '.join(SUITES)}")
  document = scenario.document if scenario is not None else None
  base = settings or (document.settings if document is not None else SuiteSettings())
  updates: Dict[str, Any] = {}
  if count is not None:
    updates.update({key: count for key in SUITE_COUNT_FIELDS[name]})
  if tolerance is not None:
    updates.update({key: tolerance for key in SUITE_TOLERANCE_FIELDS[name]})
  if updates:
    base = SuiteSettings.model_validate({**base.model_dump(), **updates})
  ctx = SuiteContext(
      settings=base,
      quadrature=document.quadrature if document is not None else QuadratureSpec(),
      tolerances=document.tolerances if document is not None else Tolerances(),
      flow=document.flow if document is not None else FlowSpec(),
      seed=seed,
      scenario=scenario,
  )
  logger.info("Running suite %s with seed %d", name, seed)
  started = time.perf_counter()
  SUITES[name](ctx)
  elapsed = time.perf_counter() - started
  report = Report(
      suite=name,
      seed=seed,
      checks=ctx.records,
      environment={
          "seed": seed,
          "numpy": np.__version__,
          "lie_step": base.lie_step,
          "linkage_step": base.linkage_step,
          "steps_per_unit": ctx.flow.steps_per_unit,
          "abs_tol": ctx.quadrature.abs_tol,
          "scenario": document.name if document is not None else None,
      },
      wall_time=elapsed,
  )
  logger.info(
      "Suite %s: %d checks, %d failed, %.2fs",
      name, len(report.checks), len(report.failures), elapsed,
  )
  return report
