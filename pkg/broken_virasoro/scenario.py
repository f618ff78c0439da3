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

"""Scenario and report documents.

A scenario is a JSON document naming a break configuration, fields and
arrows, with optional overrides of the numeric settings::

  {
    "name": "sin-arc",
    "breaks": [0, "pi"],
    "fields": {"e1": "sin(x)", "e2": "sin(2*x)"},
    "diffeos": {"rot": {"rotation": 0.5}},
    "quadrature": {"abs_tol": 1e-11}
  }

Reports collect one record per check with its residual and tolerance.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .algebroid import BrokenField
from .expr import evaluate, parse
from .geometry import BreakConfig, QuadratureSpec, Tolerances
from .groupoid import BrokenDiffeo
from .linkage import FlowSpec, flow

logger = logging.getLogger(__name__)

BUNDLED_PACKAGE = "broken_virasoro.scenarios"

AngleValue = Union[float, str]
PieceValue = Union[str, List[str]]
ReportValue = Union[bool, int, float, str, List[float], None]

# Stands in for a float while the report is dumped; json writes it as \u0000.
_NUMBER_MARK = "\x00"
_NUMBER_SLOT = re.compile(r'"\\u0000(\d+)"')


class ScenarioError(ValueError):
  """Raised when a scenario document cannot be read, validated or built."""


def _angle(value: AngleValue) -> float:
  if isinstance(value, str):
    return float(evaluate(parse(value), {}))
  return float(value)


def _pieces(value: PieceValue) -> List[str]:
  return [value] if isinstance(value, str) else list(value)


class SuiteSettings(BaseModel):
  """Sizes, tolerances and steps of the verification suites."""

  model_config = ConfigDict(frozen=True)

  algebroid_count: int = Field(default=50, ge=1, description="Random section triples.")
  groupoid_count: int = Field(default=30, ge=1, description="Random composable triples.")
  jacobi_count: int = Field(default=20, ge=1, description="Random structure-axiom samples.")
  bott_count: int = Field(default=20, ge=1, description="Random Bott relation pairs.")
  linkage_count: int = Field(default=20, ge=1, description="Random isotropy pairs.")
  interval_count: int = Field(default=20, ge=1, description="Fixed-endpoint interval triples.")
  segment_count: int = Field(default=10, ge=1, description="Moving-endpoint interval triples.")
  break_counts: Tuple[int, ...] = Field(
      default=(1, 2, 3), description="Break counts cycled through by random inputs."
  )
  max_degree: int = Field(
      default=3, ge=1, le=5, description="Largest trigonometric degree of random sections."
  )
  algebroid_tol: float = Field(default=1e-5, gt=0)
  groupoid_tol: float = Field(default=1e-8, gt=0)
  jacobi_tol: float = Field(default=1e-8, gt=0)
  extension_tol: float = Field(default=1e-5, gt=0)
  bott_tol: float = Field(default=1e-7, gt=0)
  bott_smooth_tol: float = Field(default=1e-9, gt=0)
  linkage_tol: float = Field(default=1e-3, gt=0)
  interval_tol: float = Field(default=1e-8, gt=0)
  lie_step: float = Field(default=1e-4, gt=0, description="Step of Lie derivatives in p.")
  linkage_step: float = Field(default=1e-3, gt=0, description="Step h of the mixed difference.")
  convergence_step: float = Field(
      default=0.1, gt=0, description="Coarse step of the convergence-order estimate."
  )
  order_range: Tuple[float, float] = Field(default=(1.7, 2.3))
  certificate_bound: int = Field(default=7, ge=5, le=99)
  table_bound: int = Field(default=10, ge=2, le=99)

  @field_validator("break_counts")
  @classmethod
  def _check_break_counts(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
    if not value or any(not 1 <= n <= 9 for n in value):
      raise ValueError(f"Break counts must be in 1..9, got {value}")
    return value


class FlowReference(BaseModel):
  """An arrow given as the flow of a named field."""

  model_config = ConfigDict(extra="forbid")

  field: str
  time: float


class DiffeoSpec(BaseModel):
  """An arrow: lift pieces, a rotation angle or a flow."""

  model_config = ConfigDict(extra="forbid")

  pieces: Optional[PieceValue] = None
  rotation: Optional[AngleValue] = None
  flow: Optional[FlowReference] = None
  breaks: Optional[List[AngleValue]] = Field(
      default=None, description="Source breaks; defaults to the scenario breaks."
  )

  @model_validator(mode="after")
  def _exactly_one_kind(self) -> "DiffeoSpec":
    kinds = [k for k in ("pieces", "rotation", "flow") if getattr(self, k) is not None]
    if len(kinds) != 1:
      raise ValueError(f"A diffeo needs exactly one of pieces, rotation or flow, got {kinds}")
    if self.pieces is not None:
      for piece in _pieces(self.pieces):
        parse(piece)
    return self


class ScenarioFile(BaseModel):
  """The scenario document."""

  model_config = ConfigDict(extra="forbid")

  name: str = "scenario"
  description: str = ""
  breaks: List[AngleValue] = Field(min_length=1, max_length=9)
  fields: Dict[str, PieceValue] = Field(default_factory=dict)
  diffeos: Dict[str, DiffeoSpec] = Field(default_factory=dict)
  quadrature: QuadratureSpec = Field(default_factory=QuadratureSpec)
  tolerances: Tolerances = Field(default_factory=Tolerances)
  flow: FlowSpec = Field(default_factory=FlowSpec)
  settings: SuiteSettings = Field(default_factory=SuiteSettings)

  @field_validator("breaks")
  @classmethod
  def _parse_breaks(cls, value: List[AngleValue]) -> List[AngleValue]:
    for angle in value:
      _angle(angle)
    return value

  @field_validator("fields")
  @classmethod
  def _parse_fields(cls, value: Dict[str, PieceValue]) -> Dict[str, PieceValue]:
    for pieces in value.values():
      for piece in _pieces(pieces):
        parse(piece)
    return value

  @model_validator(mode="after")
  def _check_references(self) -> "ScenarioFile":
    for name, spec in self.diffeos.items():
      if spec.flow is not None and spec.flow.field not in self.fields:
        raise ValueError(f"Diffeo {name!r} flows the undefined field {spec.flow.field!r}")
    return self

  def break_config(self) -> BreakConfig:
    return BreakConfig(tuple(_angle(a) for a in self.breaks), self.tolerances.eps_sep)

  def build(self) -> "Scenario":
    """Constructs every field and arrow.

    Raises:
      ScenarioError: If an object violates its invariants (for example a
        discontinuous field or a non-monotone lift).
    """
    breaks = self.break_config()
    try:
      fields = {
          name: BrokenField(breaks, _pieces(pieces), breaks.binding(), self.tolerances)
          for name, pieces in self.fields.items()
      }
      diffeos = {
          name: self._build_diffeo(spec, breaks, fields) for name, spec in self.diffeos.items()
      }
    except (ValueError, RuntimeError) as error:
      raise ScenarioError(f"Scenario {self.name!r} cannot be built: {error}") from error
    return Scenario(self, breaks, fields, diffeos)

  def _build_diffeo(
      self, spec: DiffeoSpec, breaks: BreakConfig, fields: Dict[str, BrokenField]
  ) -> BrokenDiffeo:
    source = breaks
    if spec.breaks is not None:
      source = BreakConfig(tuple(_angle(a) for a in spec.breaks), self.tolerances.eps_sep)
    if spec.flow is not None:
      field = fields[spec.flow.field]
      if not field.breaks.matches(source, self.tolerances.tol_cont):
        field = BrokenField(source, field.pieces[:1] if field.is_global else field.pieces,
                            source.binding(), self.tolerances)
      return flow(field, spec.flow.time, self.flow, tolerances=self.tolerances)
    if spec.rotation is not None:
      return BrokenDiffeo.rotation(source, _angle(spec.rotation), self.tolerances)
    return BrokenDiffeo.from_expressions(
        source, _pieces(spec.pieces or []), source.binding(), self.tolerances
    )


@dataclass(frozen=True)
class Scenario:
  """A built scenario."""

  document: ScenarioFile
  breaks: BreakConfig
  fields: Dict[str, BrokenField]
  diffeos: Dict[str, BrokenDiffeo]

  def field(self, name: str) -> BrokenField:
    if name not in self.fields:
      raise ScenarioError(f"Unknown field {name!r}; defined: {sorted(self.fields)}")
    return self.fields[name]

  def diffeo(self, name: str) -> BrokenDiffeo:
    if name not in self.diffeos:
      raise ScenarioError(f"Unknown diffeo {name!r}; defined: {sorted(self.diffeos)}")
    return self.diffeos[name]


def bundled_scenarios() -> List[str]:
  """Names of the scenarios shipped with the package."""
  root = resources.files(BUNDLED_PACKAGE)
  return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_scenario(source: Union[str, Path]) -> ScenarioFile:
  """Reads a scenario from a file path or a bundled scenario name.

  Raises:
    ScenarioError: If the document is missing, not JSON or invalid.
  """
  path = Path(source)
  try:
    if path.is_file():
      text = path.read_text(encoding="utf-8")
    elif str(source) in bundled_scenarios():
      text = resources.files(BUNDLED_PACKAGE).joinpath(f"{source}.json").read_text(encoding="utf-8")
    else:
      raise ScenarioError(
          f"No scenario file or bundled scenario named {str(source)!r};"
          f" bundled: {', '.join(bundled_scenarios())}"
      )
    return ScenarioFile.model_validate_json(text)
  except ValidationError as error:
    raise ScenarioError(f"Scenario {str(source)!r} is invalid: {error}") from error
  except OSError as error:
    raise ScenarioError(f"Cannot read scenario {str(source)!r}: {error}") from error


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def format_value(value: Any) -> ReportValue:
  """Converts rationals to ``"num/den"`` and numpy scalars to floats."""
  if isinstance(value, Fraction):
    return f"{value.numerator}/{value.denominator}"
  if isinstance(value, (list, tuple)):
    return [float(v) for v in value]
  if hasattr(value, "tolist"):
    converted = value.tolist()
    return converted if isinstance(converted, list) else float(converted)
  if isinstance(value, bool) or value is None or isinstance(value, str):
    return value
  if isinstance(value, int):
    return value
  return float(value)


def inputs_digest(inputs: Dict[str, Any]) -> str:
  """Stable digest of the JSON description of a check's inputs."""
  text = json.dumps(inputs, sort_keys=True, default=str)
  return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


class CheckRecord(BaseModel):
  """One verification check."""

  id: int = Field(description="Position of the check in its suite.")
  name: str = Field(description="What was checked.")
  inputs_digest: str = Field(description="Digest of the inputs.")
  values: Dict[str, ReportValue] = Field(default_factory=dict)
  residual: Optional[float] = Field(default=None, description="Measured residual.")
  tolerance: Optional[float] = Field(default=None, description="Allowed residual.")
  passed: bool
  error: Optional[str] = Field(default=None, description="Error raised by the check, if any.")


class Report(BaseModel):
  """The outcome of a suite or a computation."""

  suite: str
  seed: int = 0
  checks: List[CheckRecord] = Field(default_factory=list)
  environment: Dict[str, ReportValue] = Field(default_factory=dict)
  wall_time: float = 0.0

  @property
  def passed(self) -> bool:
    return all(check.passed for check in self.checks)

  @property
  def failures(self) -> List[CheckRecord]:
    return [check for check in self.checks if not check.passed]

  def to_json(self) -> str:
    """JSON text with finite floats written to 17 significant digits, others as null."""
    numbers: List[str] = []

    def mark(value: Any) -> Any:
      if isinstance(value, float) and math.isfinite(value):
        numbers.append(_number_text(value))
        return f"{_NUMBER_MARK}{len(numbers) - 1}"
      if isinstance(value, float):
        return None
      if isinstance(value, dict):
        return {key: mark(item) for key, item in value.items()}
      if isinstance(value, list):
        return [mark(item) for item in value]
      return value

    text = json.dumps(mark(self.model_dump(mode="json")), indent=2)
    return _NUMBER_SLOT.sub(lambda match: numbers[int(match.group(1))], text)

  def to_csv(self) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["id", "name", "inputs_digest", "residual", "tolerance", "passed", "error", "values"])
    for check in self.checks:
      writer.writerow(
          [
              check.id,
              check.name,
              check.inputs_digest,
              _csv_number(check.residual),
              _csv_number(check.tolerance),
              check.passed,
              check.error or "",
              json.dumps(check.values, sort_keys=True),
          ]
      )
    return buffer.getvalue()


def _number_text(value: float) -> str:
  return format(value, ".17g")


def _csv_number(value: Optional[float]) -> str:
  return "" if value is None else _number_text(value)
