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

"""Command-line front end.

Usage::

  broken-virasoro verify groupoid-cocycle --scenario circle_n1 --seed 7
  broken-virasoro compute omega --scenario sin_arc --u e1 --v e2 --arc 1
  broken-virasoro table certificate --bound 7 --format csv

Exit codes are 0 when every check passes, 1 when a check fails and 2 for
usage, schema and construction errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .algebroid import anchor, bracket_sections, omega_i, omega_vector
from .expr import unparse
from .geometry import BreakConfig
from .groupoid import chi, chi_i
from .interval import nontriviality_certificate, sin_basis_table
from .linkage import flow
from .scenario import (
    CheckRecord,
    Report,
    Scenario,
    ScenarioError,
    bundled_scenarios,
    format_value,
    inputs_digest,
    load_scenario,
)
from .suites import run_suite, suite_names

logger = logging.getLogger(__name__)

LOG_LEVEL_ENV = "BROKEN_VIRASORO_LOG_LEVEL"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
TABLE_TOLERANCE = 1e-8
FLOW_POINTS = 9

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _configure_logging(debug: bool) -> None:
  level_name = os.getenv(LOG_LEVEL_ENV, "WARNING").upper()
  level = logging.DEBUG if debug else getattr(logging, level_name, logging.WARNING)
  logging.basicConfig(level=level, format=LOG_FORMAT)
  package_logger = logging.getLogger("broken_virasoro")
  package_logger.setLevel(level)
  if debug:
    logger.debug("Debug logging enabled")


def build_parser() -> argparse.ArgumentParser:
  output = argparse.ArgumentParser(add_help=False)
  output.add_argument("--report", type=Path, help="Write the report to this file.")
  output.add_argument(
      "--format", choices=("json", "csv"), default=None,
      help="Report format (default json); prints the report when --report is absent.",
  )

  parser = argparse.ArgumentParser(
      prog="broken-virasoro",
      description="Verify the broken-diffeomorphism groupoid, its algebroid and their cocycles.",
  )
  parser.add_argument("--debug", action="store_true", help="Enable debug logging.")
  parser.add_argument("--list-suites", action="store_true", help="List the suites and exit.")
  commands = parser.add_subparsers(dest="command")

  verify = commands.add_parser("verify", parents=[output], help="Run a verification suite.")
  verify.add_argument("suite", choices=suite_names())
  verify.add_argument("--scenario", help="Scenario file or bundled scenario name.")
  verify.add_argument("--seed", type=int, default=0)
  verify.add_argument("--tol", type=float, help="Override the suite tolerance.")
  verify.add_argument("--count", type=int, help="Override the number of random inputs.")

  compute = commands.add_parser(
      "compute", parents=[output], help="Evaluate an operation on scenario objects."
  )
  compute.add_argument("what", choices=("omega", "chi", "bracket", "anchor", "flow"))
  compute.add_argument("--scenario", required=True, help="Scenario file or bundled name.")
  compute.add_argument("--u", help="First field.")
  compute.add_argument("--v", help="Second field.")
  compute.add_argument("--phi", help="Outer diffeo of chi.")
  compute.add_argument("--psi", help="Inner diffeo of chi.")
  compute.add_argument("--field", help="Field to flow.")
  compute.add_argument("--time", type=float, default=0.5, help="Flow time.")
  compute.add_argument("--points", type=int, default=FLOW_POINTS, help="Rows of the flow table.")
  compute.add_argument("--arc", type=int, help="Single arc index; all arcs when omitted.")

  table = commands.add_parser("table", parents=[output], help="Print an exact table.")
  table.add_argument("what", choices=("sin-basis-omega", "certificate"))
  table.add_argument("--bound", type=int, default=7)
  return parser


def _load(source: str) -> Scenario:
  return load_scenario(source).build()


def _require(value: Optional[str], option: str, what: str) -> str:
  if not value:
    raise ScenarioError(f"compute {what} needs {option}")
  return value


def _record(
    record_id: int,
    name: str,
    values: Dict[str, Any],
    residual: Optional[float] = None,
    tolerance: Optional[float] = None,
    passed: bool = True,
) -> CheckRecord:
  return CheckRecord(
      id=record_id,
      name=name,
      inputs_digest=inputs_digest({"name": name, "values": {k: str(v) for k, v in values.items()}}),
      values={k: format_value(v) for k, v in values.items()},
      residual=residual,
      tolerance=tolerance,
      passed=bool(passed),
  )


def _arcs(arc: Optional[int], breaks: BreakConfig) -> List[int]:
  if arc is None:
    return list(range(1, breaks.n + 1))
  breaks.arc(arc)
  return [arc]


def cmd_verify(args: argparse.Namespace) -> Report:
  scenario = _load(args.scenario) if args.scenario else None
  return run_suite(args.suite, scenario, args.seed, count=args.count, tolerance=args.tol)


def cmd_compute(args: argparse.Namespace) -> Report:
  """Evaluates one operation on named scenario objects and prints the values."""
  scenario = _load(args.scenario)
  q = scenario.document.quadrature
  what = args.what
  records: List[CheckRecord] = []
  if what in ("omega", "bracket"):
    u = scenario.field(_require(args.u, "--u", what))
    v = scenario.field(_require(args.v, "--v", what))
    if what == "omega":
      if args.arc is None:
        values = omega_vector(u, v, scenario.breaks, q)
        arcs = list(range(1, scenario.breaks.n + 1))
      else:
        arcs = _arcs(args.arc, scenario.breaks)
        values = np.array([omega_i(u, v, scenario.breaks, arcs[0], q)])
      for arc, value in zip(arcs, values):
        print(f"Omega_{arc}({args.u}, {args.v}) = {value:.17g}")
        records.append(_record(len(records) + 1, f"omega arc {arc}", {"omega": value}))
    else:
      result = bracket_sections(u, v, [scenario.breaks])
      for arc, piece in enumerate(result.distinct_pieces(), start=1):
        text = unparse(piece)
        print(f"[{args.u}, {args.v}] arc {arc}: {text}")
        records.append(_record(len(records) + 1, f"bracket arc {arc}", {"piece": text}))
  elif what == "anchor":
    u = scenario.field(_require(args.u, "--u", what))
    values = anchor(u, scenario.breaks)
    print(f"anchor({args.u}) = {', '.join(format(float(v), '.17g') for v in values)}")
    records.append(_record(1, "anchor", {"anchor": values}))
  elif what == "chi":
    phi = scenario.diffeo(_require(args.phi, "--phi", what))
    psi = scenario.diffeo(_require(args.psi, "--psi", what))
    if args.arc is None:
      values = chi(phi, psi, q)
    else:
      values = np.array([chi_i(phi, psi, _arcs(args.arc, psi.src)[0], q)])
    arcs = _arcs(args.arc, psi.src)
    for arc, value in zip(arcs, values):
      print(f"chi_{arc}({args.phi}, {args.psi}) = {value:.17g}")
      records.append(_record(len(records) + 1, f"chi arc {arc}", {"chi": value}))
  else:
    u = scenario.field(_require(args.field, "--field", what))
    arrow = flow(u, args.time, scenario.document.flow, tolerances=scenario.document.tolerances)
    x = np.linspace(arrow.src.angles[0], arrow.src.upper, args.points, endpoint=False)
    y = arrow(x)
    print("x\tphi(x)")
    for xi, yi in zip(x, y):
      print(f"{xi:.17g}\t{yi:.17g}")
    records.append(
        _record(1, f"flow of {args.field} for time {args.time}", {"x": x, "phi": y})
    )
  return Report(suite=f"compute {what}", checks=records, environment={"scenario": scenario.document.name})


def cmd_table(args: argparse.Namespace) -> Report:
  """Prints the sin-basis cocycle table or the non-triviality certificate."""
  records: List[CheckRecord] = []
  if args.what == "sin-basis-omega":
    print("m\tn\texact\tquadrature")
    for m, n, exact, numeric in sin_basis_table(args.bound):
      residual = abs(numeric - float(exact))
      tolerance = TABLE_TOLERANCE * max(1.0, abs(float(exact)))
      marker = " (parity)" if (m - n) % 2 == 0 else ""
      print(f"{m}\t{n}\t{format_value(exact)}{marker}\t{numeric:.17g}")
      records.append(
          _record(
              len(records) + 1, f"Omega(e_{m}, e_{n})",
              {"m": m, "n": n, "exact": exact, "numeric": numeric},
              residual=residual, tolerance=tolerance, passed=residual <= tolerance,
          )
      )
    return Report(suite="table sin-basis-omega", checks=records)

  certificate = nontriviality_certificate(args.bound)
  for k, value in certificate.lambdas.items():
    print(f"lambda_{k} = {format_value(value)}")
  print("k\tl\tlhs\trhs\tresidual")
  for row in certificate.rows:
    print(
        f"{row.k}\t{row.l}\t{format_value(row.lhs)}\t{format_value(row.rhs)}"
        f"\t{format_value(row.residual)}"
    )
    records.append(
        _record(
            len(records) + 1, f"row ({row.k}, {row.l})",
            {"k": row.k, "l": row.l, "lhs": row.lhs, "rhs": row.rhs, "residual": row.residual},
        )
    )
  witness = certificate.witness
  verdict = "VALID" if certificate.valid else "INVALID"
  print(f"witness: {witness}" if witness else "witness: none")
  print(f"verdict: {verdict}")
  records.append(
      _record(
          len(records) + 1, "verdict",
          {"verdict": verdict, "witness": list(witness) if witness else None},
          passed=certificate.valid,
      )
  )
  return Report(suite="table certificate", checks=records)


def _emit(report: Report, args: argparse.Namespace) -> None:
  text = report.to_csv() if args.format == "csv" else report.to_json()
  if args.report is not None:
    args.report.write_text(text, encoding="utf-8")
    logger.info("Wrote %s report to %s", args.format or "json", args.report)
  elif args.format is not None:
    print(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
  """Entry point of the ``broken-virasoro`` command."""
  parser = build_parser()
  args = parser.parse_args(argv)
  _configure_logging(args.debug)
  if args.list_suites:
    print("\n".join(suite_names()))
    print(f"bundled scenarios: {', '.join(bundled_scenarios())}")
    return EXIT_OK
  if args.command is None:
    parser.print_usage(sys.stderr)
    return EXIT_USAGE
  handlers = {"verify": cmd_verify, "compute": cmd_compute, "table": cmd_table}
  try:
    report = handlers[args.command](args)
  except ValueError as error:
    print(f"error: {error}", file=sys.stderr)
    return EXIT_USAGE
  except RuntimeError as error:
    logger.error("Evaluation failed: %s", error, exc_info=True)
    print(f"error: {error}", file=sys.stderr)
    return EXIT_FAILED
  _emit(report, args)
  if args.command == "verify":
    print(
        f"{report.suite}: {len(report.checks) - len(report.failures)}/{len(report.checks)}"
        f" checks passed in {report.wall_time:.2f}s"
    )
    for failure in report.failures:
      print(f"  FAILED #{failure.id} {failure.name}: {failure.error or failure.residual}")
  return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == "__main__":
  sys.exit(main())
