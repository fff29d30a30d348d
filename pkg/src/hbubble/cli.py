# Copyright 2019 The hbubble Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"). You
# may not use this file except in compliance with the License. A copy of
# the License is located at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# or in the "license" file accompanying this file. This file is
# distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF
# ANY KIND, either express or implied. See the License for the specific
# language governing permissions and limitations under the License.
"""Experiment drivers.

Every command reads a :class:`hbubble.config.RunConfig`, writes its artifacts into the output
directory together with ``manifest.json`` and exits with status 0 exactly when all of its
checks pass (1 when a check fails, 2 when the run could not be carried out).

Translations and boxes in configurations are given for the curvature ``h0 + eps H1``. Solvers
work with the normalized curvature ``1 + eps H1~`` (see :func:`hbubble.fields.normalize_h0`),
in which lengths are multiplied by ``h0``; records carry both coordinates.
"""
import argparse
import logging
import math
import os
import sys

import attr
import cryptography
import numpy as np
import scipy
from cryptography.hazmat.backends import default_backend
from cryptography.hazmat.primitives import hashes
from scipy.linalg import subspace_angles, svd

from hbubble.config import RunConfig, load_config
from hbubble.diagnostics import bubble_report, export_mesh, mean_curvature_extract
from hbubble.exceptions import (
    ConfigurationError,
    CriticalPointSearchError,
    HBubbleError,
    HypothesisCheckError,
    ReductionError,
)
from hbubble.fields import gaussian_bump, normalize_h0, radial_well
from hbubble.functionals import (
    assemble_e0_hessian,
    dirichlet,
    energy,
    gauss_green_oracle,
    residual_norm,
    volume_v1,
    weighted_volume,
)
from hbubble.identifiers import LOGGER_NAME, Scenario, __version__
from hbubble.internal.formatting.serialize.report import (
    serialize_expansion,
    serialize_json,
    serialize_landscape,
    serialize_records,
)
from hbubble.internal.identifiers import KERNEL_DIMENSION, MAX_DENSE_DEGREE, TEXT_ENCODING, Thresholds
from hbubble.internal.utils import atomic_write
from hbubble.melnikov import find_gamma_critical, gamma
from hbubble.reduction import (
    BASE_ENERGY,
    eta_equation_residual,
    expansion_check,
    find_phi_critical,
    natural_constraint_residual,
    phi_gradient_from_multipliers,
    ratio_spread,
    reduction_context,
    solve_eta,
    tangent_frame,
)
from hbubble.scenarios import (
    check_scenario_hypotheses,
    multiplicity_verdict,
    scenario_config,
    scenario_spec,
)
from hbubble.sphere import base_bubble, build_grid, sphere_bubble

try:  # Only needed for type comments
    from typing import Dict, List, Optional, Sequence, Text  # noqa pylint: disable=unused-import
    from hbubble.fields import CurvatureField  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = (
    "CommandResult",
    "ValidationItem",
    "cmd_validate",
    "cmd_gamma_scan",
    "cmd_reduce",
    "cmd_solve",
    "cmd_multiplicity",
    "config_digest",
    "build_parser",
    "main",
)
_LOGGER = logging.getLogger(LOGGER_NAME)
#: Largest spread of remainder ratios accepted by the expansion check.
MAX_RATIO_SPREAD = 4.0
_GAUSS_GREEN_POINTS = ((0.0, 0.0, 0.0), (2.0, 0.0, 0.0), (0.0, -3.0, 1.0))
_SPHERE_RADII = (0.5, 1.0, 2.0)
#: Gauge quadratures of the Gauss-Green check run on grids of at least this degree.
_GAUSS_GREEN_DEGREE = 32


@attr.s(frozen=True)
class CommandResult(object):
    """Outcome of one command.

    :param str command: Command name
    :param bool passed: Whether every declared check passed
    :param dict summary: JSON-ready summary
    :param list artifacts: Paths written
    """

    command = attr.ib()
    passed = attr.ib()
    summary = attr.ib()
    artifacts = attr.ib(default=attr.Factory(list))


def _write(config, name, text, artifacts):
    path = atomic_write(os.path.join(config.out, name), text)
    artifacts.append(path)
    return path


def _require_field(config):
    if config.field is None:
        raise ConfigurationError("This command needs a field block in the configuration")
    return config.field


def _normalized_box(box, h0):
    bounds = np.sort(np.asarray(box, dtype=float).reshape(3, 2) * h0, axis=1)
    return tuple(bounds.reshape(-1))


@attr.s(frozen=True)
class ValidationItem(object):
    """One check of the unperturbed suite.

    :param str name: Check name
    :param float value: Computed value
    :param float expected: Reference value
    :param float tolerance: Accepted error
    :param bool relative: Whether the error is relative to the reference
    """

    name = attr.ib()
    value = attr.ib(converter=float)
    expected = attr.ib(converter=float)
    tolerance = attr.ib(converter=float)
    relative = attr.ib(default=False)

    @property
    def error(self):
        # type: () -> float
        error = abs(self.value - self.expected)
        return error / abs(self.expected) if self.relative and self.expected != 0 else error

    @property
    def passed(self):
        # type: () -> bool
        return self.error <= self.tolerance

    def as_dict(self):
        return {
            "name": self.name,
            "value": self.value,
            "expected": self.expected,
            "error": self.error,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _shipped_fields(config):
    fields = [
        ("gaussian", gaussian_bump(1.0, (0.0, 0.0, 0.0), 1.0)),
        ("radialwell", radial_well()),
        (
            "bump-pair",
            scenario_spec(Scenario.THM3).field,
        ),
    ]
    if config.field is not None:
        fields.append(("configured", normalize_h0(config.h0, config.field)))
    return fields


def _validation_items(config):
    # pylint: disable=too-many-locals
    grid = build_grid(config.degree)
    u0 = base_bubble(grid)
    items = [
        ValidationItem("energy", energy(u0, 0.0, padding=config.padding).total, BASE_ENERGY, 1e-9, relative=True),
        ValidationItem("dirichlet", dirichlet(u0), 8.0 * math.pi, 1e-10, relative=True),
        ValidationItem("volume_v1", volume_v1(u0, config.padding), -BASE_ENERGY, 1e-10, relative=True),
        ValidationItem("residual_l2", residual_norm(u0), 0.0, 1e-10),
    ]

    dense_grid = build_grid(min(config.degree, MAX_DENSE_DEGREE))
    hessian = assemble_e0_hessian(dense_grid, config.padding)
    _left, singular, right = svd(hessian)
    kernel = int(np.sum(singular < Thresholds.KERNEL_RELATIVE.value * singular[0]))
    frame = tangent_frame(dense_grid)
    angles = subspace_angles(right[-KERNEL_DIMENSION:].T, frame.kernel_basis())
    items.extend(
        [
            ValidationItem("kernel_dimension", kernel, KERNEL_DIMENSION, 0.0),
            ValidationItem("kernel_angle", np.max(angles), 0.0, 1e-6),
            ValidationItem("frame_gram", frame.gram_residual, 0.0, 1e-10),
            ValidationItem("frame_mean", frame.mean_residual, 0.0, 1e-12),
        ]
    )

    padding = max(config.padding, float(_GAUSS_GREEN_DEGREE) / config.degree)
    for name, field in _shipped_fields(config):
        for point in _GAUSS_GREEN_POINTS:
            items.append(
                ValidationItem(
                    "gauss_green[{}@{}]".format(name, ",".join("{:g}".format(c) for c in point)),
                    weighted_volume(u0.translated(point), field, padding=padding),
                    gauss_green_oracle(point, field, tol=min(config.quadrature_tol, 1e-10)),
                    1e-6,
                )
            )
    for radius in _SPHERE_RADII:
        sphere = sphere_bubble(grid, radius, (0.3, -0.2, 0.1))
        curvature = mean_curvature_extract(sphere).samples
        items.append(
            ValidationItem(
                "sphere_curvature[r={:g}]".format(radius),
                np.max(np.abs(curvature - 1.0 / radius)),
                0.0,
                1e-10,
            )
        )
    return items


def cmd_validate(config):
    # type: (RunConfig) -> CommandResult
    """Run the unperturbed suite: energy anchors, kernel dimension, frame invariants, Gauss-Green
    identity and the round-sphere curvature oracle.
    """
    items = _validation_items(config)
    artifacts = []
    for item in items:
        print("{:<40} {:>12.3e}  {}".format(item.name, item.error, "pass" if item.passed else "FAIL"))
    passed = all(item.passed for item in items)
    summary = {"degree": config.degree, "passed": passed, "items": [item.as_dict() for item in items]}
    _write(config, "validate.json", serialize_json(summary), artifacts)
    return CommandResult("validate", passed, summary, artifacts)


def cmd_gamma_scan(config):
    # type: (RunConfig) -> CommandResult
    """Scan the Melnikov function over the box and refine its critical points."""
    field = _require_field(config)
    report = find_gamma_critical(field, h0=config.h0, box=config.box, scan=config.gamma_scan, threads=config.threads)
    artifacts = []
    _write(config, "landscape.csv", serialize_landscape(report.points, report.values, report.gradients), artifacts)
    summary = report.as_dict()
    _write(config, "melnikov.json", serialize_json(summary), artifacts)
    for point in report.critical_points:
        print("{:<10} p={} gamma={:.10g}".format(point.type.value, np.round(point.location, 6).tolist(), point.value))
    return CommandResult("gamma-scan", True, summary, artifacts)


def _solver_options(config, context):
    return {"tol": config.solver_tol, "max_iter": config.max_iter, "mode": config.mode, "context": context}


def cmd_reduce(config):
    # type: (RunConfig) -> CommandResult
    """Solve for the correction at ``(eps, p)`` and tabulate the second-order remainder over ``eps_list``.

    A contraction failure is reported with its update history and fails the command.
    """
    field = normalize_h0(config.h0, config.field) if config.field is not None else None
    p = np.asarray(config.p) * config.h0
    context = reduction_context(config.degree, config.padding)
    options = _solver_options(config, context)
    artifacts = []
    summary = {"eps": config.eps, "h0": config.h0, "p": list(config.p), "p_normalized": p.tolist()}
    try:
        state = solve_eta(config.eps, p, field, **options)
    except ReductionError as error:
        _LOGGER.error("Reduction failed: %s", error)
        summary.update({"error": str(error), "update_norms": error.update_norms})
        _write(config, "reduce.json", serialize_json(summary), artifacts)
        return CommandResult("reduce", False, summary, artifacts)

    phi_value = energy(state.bubble, state.eps, field if state.eps != 0 else None, padding=config.padding).total
    summary.update(state.as_dict())
    summary.update(
        {
            "phi": phi_value,
            "phi_deviation": phi_value - BASE_ENERGY,
            "gradient_from_multipliers": phi_gradient_from_multipliers(state).tolist(),
            "eta_equation_residual": eta_equation_residual(state, field),
            "natural_constraint_residual": natural_constraint_residual(state, field),
        }
    )
    passed = state.converged
    if field is not None:
        summary["gamma"] = gamma(p, field, 1.0, tol=config.quadrature_tol)
        try:
            rows = expansion_check(p, field, config.eps_list, **options)
        except ReductionError as error:
            _LOGGER.error("Expansion check failed: %s", error)
            summary["expansion_error"] = str(error)
            passed = False
        else:
            spread = ratio_spread(rows)
            summary["expansion"] = [row.as_dict() for row in rows]
            summary["ratio_spread"] = spread
            passed = passed and spread <= MAX_RATIO_SPREAD
            _write(config, "expansion.csv", serialize_expansion(rows), artifacts)
            for row in rows:
                print("eps={:<10g} phi={:.12f} remainder/eps^2={:.6g}".format(row.eps, row.phi, row.ratio))
    print("eta W13={:.6e} iterations={} phi={:.12f}".format(state.eta_w13, state.iterations, phi_value))
    _write(config, "reduce.json", serialize_json(summary), artifacts)
    return CommandResult("reduce", passed, summary, artifacts)


def _solve(config, field, h0, out, artifacts):
    """Locate bubbles for ``h0 + eps field`` and write their meshes and reports under ``out``.

    The critical points of the Melnikov function seed the search alongside the lattice scan.
    """
    normalized = normalize_h0(h0, field)
    box = _normalized_box(config.box, h0)
    landscape = find_gamma_critical(normalized, 1.0, box=box, scan=config.gamma_scan, threads=config.threads)
    context = reduction_context(config.degree, config.padding)
    options = _solver_options(config, context)
    try:
        records = find_phi_critical(
            config.eps,
            normalized,
            box=box,
            scan=config.scan,
            threads=config.threads,
            seeds=[point.location for point in landscape.critical_points],
            **options
        )
    except CriticalPointSearchError as error:
        _LOGGER.error("No critical point found: %s", error)
        _write(attr.evolve(config, out=out), "scan.json", serialize_json({"h0": h0, "error": str(error)}), artifacts)
        return [], []

    lines = []
    reports = []
    local = attr.evolve(config, out=out)
    for index, record in enumerate(records):
        state = record.state
        report = bubble_report(state.bubble, config.eps, normalized, eta=state.eta)
        line = record.as_record()
        line.update(
            {
                "h0": h0,
                "p_original": (record.point.location / h0).tolist(),
                "natural_constraint_residual": natural_constraint_residual(state, normalized),
                "branch_free": report.branch_free,
            }
        )
        lines.append(line)
        reports.append(report)
        path = os.path.join(out, "bubble-{}.{}".format(index, config.mesh_format.value))
        artifacts.append(export_mesh(state.bubble, path, config.mesh_format))
        _write(local, "bubble-{}.json".format(index), serialize_json(report.as_dict()), artifacts)
        print(
            "{:<10} p={} phi-E0={:.3e} residual={:.3e}".format(
                record.type.value, np.round(record.point.location, 6).tolist(), record.point.value - BASE_ENERGY,
                report.residual_l2,
            )
        )
    _write(local, "critical_points.jsonl", serialize_records(lines), artifacts)
    return records, reports


def cmd_solve(config):
    # type: (RunConfig) -> CommandResult
    """Find the critical points of the reduced energy and export a bubble for each.

    Passes when at least one branch-point-free bubble is found.
    """
    field = _require_field(config)
    artifacts = []
    records, reports = _solve(config, field, config.h0, config.out, artifacts)
    passed = bool(records) and all(report.branch_free for report in reports)
    summary = {
        "eps": config.eps,
        "h0": config.h0,
        "found": len(records),
        "critical_points": [record.as_record() for record in records],
        "reports": [report.as_dict() for report in reports],
    }
    return CommandResult("solve", passed, summary, artifacts)


def cmd_multiplicity(config, scenario=None):
    # type: (RunConfig, Optional[Scenario]) -> CommandResult
    """Gate a shipped scenario on its hypotheses, solve and compare the bubble count with the guarantee.

    Scenarios with an ``h0`` sweep stop at the smallest ``h0`` that reaches the guaranteed count.
    """
    scenario = config.scenario if scenario is None else Scenario(scenario)
    if scenario is None:
        raise ConfigurationError("multiplicity needs a scenario")
    spec = scenario_spec(scenario)
    field = spec.field if config.field is None else config.field
    sweep = spec.h0_sweep if spec.h0_sweep is not None else (config.h0,)
    artifacts = []
    summary = {"scenario": spec.scenario.value, "eps": config.eps, "runs": []}
    smallest = None
    for h0 in sweep:
        try:
            outcome = check_scenario_hypotheses(spec, h0, config.seed, field)
        except HypothesisCheckError as error:
            _LOGGER.error("%s", error)
            summary["hypotheses"] = error.report.as_dict() if error.report is not None else None
            summary["error"] = str(error)
            summary["verdict"] = "fail"
            _write(config, "multiplicity.json", serialize_json(summary), artifacts)
            return CommandResult("multiplicity", False, summary, artifacts)
        out = config.out if len(sweep) == 1 else os.path.join(config.out, "h0-{:g}".format(h0))
        records, _reports = _solve(config, field, h0, out, artifacts)
        verdict = multiplicity_verdict(spec, h0, records, outcome.passed)
        run = verdict.as_dict()
        run["hypotheses"] = outcome.as_dict()
        summary["runs"].append(run)
        print("{} h0={:g}: {} ({} found, {})".format(spec.scenario.value, h0, run["verdict"], verdict.found, run["counts"]))
        if verdict.passed:
            smallest = h0
            break
    passed = smallest is not None
    summary["smallest_h0"] = smallest
    summary["verdict"] = "pass" if passed else "fail"
    _write(config, "multiplicity.json", serialize_json(summary), artifacts)
    return CommandResult("multiplicity", passed, summary, artifacts)


def config_digest(config):
    # type: (RunConfig) -> Text
    """SHA-256 hex digest of the serialized configuration."""
    digest = hashes.Hash(hashes.SHA256(), backend=default_backend())
    digest.update(config.serialize().encode(TEXT_ENCODING))
    return digest.finalize().hex()


def _manifest(config, result, argv):
    return {
        "command": result.command,
        "argv": list(argv),
        "config_sha256": config_digest(config),
        "config": config.as_dict(),
        "passed": result.passed,
        "artifacts": [os.path.relpath(path, config.out) for path in result.artifacts],
        "versions": {
            "hbubble": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "attrs": attr.__version__,
            "cryptography": cryptography.__version__,
        },
    }


_COMMANDS = {
    "validate": cmd_validate,
    "gamma-scan": cmd_gamma_scan,
    "reduce": cmd_reduce,
    "solve": cmd_solve,
    "multiplicity": cmd_multiplicity,
}


def build_parser():
    # type: () -> argparse.ArgumentParser
    """Argument parser of the ``hbubble`` command."""
    parser = argparse.ArgumentParser(prog="hbubble", description="Numerical laboratory for perturbed H-bubbles.")
    parser.add_argument("--version", action="version", version="%(prog)s {}".format(__version__))
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="run configuration file")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides the configuration)")
    common.add_argument("--threads", metavar="N", type=int, help="worker threads (overrides the configuration)")
    common.add_argument("--verbose", action="store_true", help="log solver iterations")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True
    commands.add_parser("validate", parents=[common], help="unperturbed consistency suite")
    commands.add_parser("gamma-scan", parents=[common], help="Melnikov landscape and critical points")
    commands.add_parser("reduce", parents=[common], help="correction term and expansion check at one point")
    commands.add_parser("solve", parents=[common], help="bubbles at the critical points of the reduced energy")
    multiplicity = commands.add_parser("multiplicity", parents=[common], help="shipped multiplicity scenarios")
    multiplicity.add_argument("--scenario", choices=[member.value for member in Scenario])
    return parser


def _resolve_config(args):
    scenario = getattr(args, "scenario", None)
    if args.config is not None:
        config = load_config(args.config)
    elif scenario is not None:
        config = scenario_config(scenario)
    else:
        config = RunConfig()
    overrides = {}
    if args.out is not None:
        overrides["out"] = args.out
    if args.threads is not None:
        overrides["threads"] = args.threads
    try:
        return attr.evolve(config, **overrides)
    except (ValueError, TypeError) as error:
        raise ConfigurationError(str(error))


def main(argv=None):
    # type: (Optional[Sequence[Text]]) -> int
    """Entry point of the ``hbubble`` command; returns the exit status."""
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = _resolve_config(args)
        if args.command == "multiplicity":
            result = cmd_multiplicity(config, getattr(args, "scenario", None))
        else:
            result = _COMMANDS[args.command](config)
        atomic_write(os.path.join(config.out, "manifest.json"), serialize_json(_manifest(config, result, argv)))
    except HBubbleError as error:
        _LOGGER.error("%s failed: %s", args.command, error)
        return 2
    _LOGGER.info("%s %s", args.command, "passed" if result.passed else "failed")
    return 0 if result.passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
