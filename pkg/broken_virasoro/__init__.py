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

"""Broken diffeomorphisms of the circle and their Virasoro-type cocycles.

Provides four integration points:

- **Algebroid**: ``BrokenField`` / ``Section`` with ``bracket_sections``,
  ``anchor`` and the arc cocycles ``omega_i``
- **Groupoid**: ``BrokenDiffeo`` with ``compose_diffeos`` and the Bott
  cocycles ``chi_i``
- **Linkage**: ``flow`` and ``derive_algebroid_cocycle``, which recovers the
  arc cocycles from the Bott cocycles
- **Suites**: ``run_suite`` and the ``broken-virasoro`` command
"""

__version__ = "0.1.0"

from .algebroid import (
    BrokenField,
    ExtendedSection,
    IsotropyError,
    OneForm,
    Section,
    algebroid_cocycle_residual,
    anchor,
    bracket_sections,
    coboundary,
    extended_bracket,
    omega_i,
    restrict_cocycle_to_isotropy,
)
from .expr import differentiate, evaluate, parse
from .geometry import (
    BreakConfig,
    QuadratureSpec,
    Tolerances,
    compose_maps,
    integrate_arc,
)
from .groupoid import (
    Bisection,
    BrokenDiffeo,
    ComposabilityError,
    ExtendedDiffeo,
    bisection_compose,
    bott_boundary_relation,
    chi_i,
    compose_diffeos,
    extended_multiply,
    groupoid_cocycle_residual,
)
from .interval import (
    IntervalField,
    boundary_form_defect,
    multibreak_interval_cocycles,
    nontriviality_certificate,
    omega_interval,
    sin_basis_omega,
)
from .linkage import FlowError, FlowSpec, convergence_order, derive_algebroid_cocycle, flow
from .scenario import Report, ScenarioError, ScenarioFile, SuiteSettings, load_scenario
from .suites import run_suite

__all__ = [
    # Expressions and geometry
    "parse",
    "evaluate",
    "differentiate",
    "BreakConfig",
    "Tolerances",
    "QuadratureSpec",
    "compose_maps",
    "integrate_arc",
    # Algebroid
    "BrokenField",
    "Section",
    "ExtendedSection",
    "OneForm",
    "IsotropyError",
    "anchor",
    "bracket_sections",
    "omega_i",
    "algebroid_cocycle_residual",
    "coboundary",
    "extended_bracket",
    "restrict_cocycle_to_isotropy",
    # Groupoid
    "BrokenDiffeo",
    "ExtendedDiffeo",
    "Bisection",
    "ComposabilityError",
    "compose_diffeos",
    "chi_i",
    "groupoid_cocycle_residual",
    "bott_boundary_relation",
    "extended_multiply",
    "bisection_compose",
    # Linkage
    "FlowSpec",
    "FlowError",
    "flow",
    "derive_algebroid_cocycle",
    "convergence_order",
    # Interval
    "IntervalField",
    "omega_interval",
    "multibreak_interval_cocycles",
    "boundary_form_defect",
    "sin_basis_omega",
    "nontriviality_certificate",
    # Scenarios and suites
    "ScenarioFile",
    "ScenarioError",
    "SuiteSettings",
    "Report",
    "load_scenario",
    "run_suite",
]
