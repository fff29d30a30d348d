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
"""Shipped multiplicity scenarios and their verdict logic.

Each scenario pairs a perturbation with the hypotheses it is meant to satisfy and the bubble
count those hypotheses guarantee for small ``eps``:

* ``thm1``: a single Gaussian bump; one bubble.
* ``thm2``: a weak positive radial well tilted by an off-centre bump; three bubbles (max, min,
  saddle) whose locations survive a sign flip of ``eps`` up to 1e-3.
* ``thm3``: a two-sign bump pair; two bubbles with opposite energy deviations.
* ``remark2`` / ``remark3``: the ``thm2`` / ``thm3`` fields under the weaker pointwise
  hypotheses, swept over ``h0``.
"""
import collections
import logging

import attr
import numpy as np

from hbubble.config import RunConfig
from hbubble.exceptions import HypothesisCheckError
from hbubble.fields import (
    check_hypotheses,
    check_remark2,
    check_remark3,
    gaussian_bump,
    linear_combination,
    radial_well,
)
from hbubble.identifiers import LOGGER_NAME, CriticalType, Scenario
from hbubble.melnikov import check_h5
from hbubble.reduction import BASE_ENERGY

try:  # Only needed for type comments
    from typing import Dict, List, Optional, Sequence, Tuple  # noqa pylint: disable=unused-import
    from hbubble.fields import CurvatureField  # noqa pylint: disable=unused-import
    from hbubble.reduction import ReducedCriticalPoint  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = (
    "ScenarioSpec",
    "HypothesisOutcome",
    "MultiplicityVerdict",
    "scenario_spec",
    "scenario_config",
    "check_scenario_hypotheses",
    "count_types",
    "multiplicity_verdict",
)
_LOGGER = logging.getLogger(LOGGER_NAME)
_SIGN_POINTS = ((3.0, 0.0, 0.0), (-3.0, 0.0, 0.0))
REMARK_SWEEP = (1.0, 2.0, 4.0)
#: Amplitude of the thm2 field. Its reduced critical points move by about
#: ``2.4 * amplitude * |eps|`` when the sign of ``eps`` flips.
WELL_AMPLITUDE = 0.02


def _single_bump():
    return gaussian_bump(1.0, (0.0, 0.0, 0.0), 1.0)


def _tilted_well():
    return linear_combination(
        [(WELL_AMPLITUDE, radial_well()), (WELL_AMPLITUDE, gaussian_bump(0.5, (3.0, 0.0, 0.0), 3.0))]
    )


def _bump_pair():
    return linear_combination(
        [(1.0, gaussian_bump(1.0, _SIGN_POINTS[0], 1.0)), (-1.0, gaussian_bump(1.0, _SIGN_POINTS[1], 1.0))]
    )


@attr.s(frozen=True)
class ScenarioSpec(object):
    """A shipped experiment.

    :param Scenario scenario: Identifier
    :param field: Perturbation ``H1``
    :param tuple hypotheses: Names of the checks that gate the run
    :param int expected_count: Bubbles guaranteed by the hypotheses
    :param tuple required_types: Critical types that must all appear
    :param bool opposite_signs: Whether two energy deviations of opposite sign are required
    :param tuple h0_sweep: Unperturbed curvatures to try, or ``None`` to use the configured one
    """

    scenario = attr.ib(converter=Scenario)
    field = attr.ib(repr=False)
    hypotheses = attr.ib(converter=tuple)
    expected_count = attr.ib()
    required_types = attr.ib(default=(), converter=tuple)
    opposite_signs = attr.ib(default=False)
    h0_sweep = attr.ib(default=None)
    sign_points = attr.ib(default=_SIGN_POINTS)


_SPECS = {
    Scenario.THM1: lambda: ScenarioSpec(Scenario.THM1, _single_bump(), ("h1", "h2"), 1),
    Scenario.THM2: lambda: ScenarioSpec(
        Scenario.THM2,
        _tilted_well(),
        ("h1", "h2", "h3", "h4"),
        3,
        required_types=(CriticalType.MIN, CriticalType.MAX, CriticalType.SADDLE),
    ),
    Scenario.THM3: lambda: ScenarioSpec(Scenario.THM3, _bump_pair(), ("h1", "h2", "h5"), 2, opposite_signs=True),
    Scenario.REMARK2: lambda: ScenarioSpec(
        Scenario.REMARK2,
        _tilted_well(),
        ("h1", "h2", "remark2"),
        3,
        required_types=(CriticalType.MIN, CriticalType.MAX, CriticalType.SADDLE),
        h0_sweep=REMARK_SWEEP,
    ),
    Scenario.REMARK3: lambda: ScenarioSpec(
        Scenario.REMARK3, _bump_pair(), ("h1", "h2", "remark3"), 2, opposite_signs=True, h0_sweep=REMARK_SWEEP
    ),
}


def scenario_spec(scenario):
    # type: (Scenario) -> ScenarioSpec
    """The shipped definition of a scenario."""
    return _SPECS[Scenario(scenario)]()


def scenario_config(scenario, **overrides):
    # type: (Scenario, **object) -> RunConfig
    """Default configuration of a scenario; keyword arguments override entries."""
    spec = scenario_spec(scenario)
    settings = {"scenario": spec.scenario, "field": spec.field}
    settings.update(overrides)
    return RunConfig(**settings)


@attr.s(frozen=True)
class HypothesisOutcome(object):
    """Result of the hypothesis gate of a scenario at one ``h0``.

    :param float h0: Unperturbed curvature
    :param dict checks: Pass flag per named check
    :param report: Sampled :class:`hbubble.fields.HypothesisReport`
    :param tuple h5_values: Melnikov values at the sign points, when (H5) was checked
    """

    h0 = attr.ib()
    checks = attr.ib()
    report = attr.ib(repr=False)
    h5_values = attr.ib(default=None)

    @property
    def passed(self):
        # type: () -> bool
        return all(self.checks.values())

    def as_dict(self):
        data = {"h0": self.h0, "checks": dict(self.checks), "passed": self.passed, "report": self.report.as_dict()}
        if self.h5_values is not None:
            data["h5_values"] = list(self.h5_values)
        return data


def check_scenario_hypotheses(spec, h0, seed, field=None):
    # type: (ScenarioSpec, float, int, Optional[CurvatureField]) -> HypothesisOutcome
    """Run the hypothesis gate of a scenario.

    :param field: Perturbation to check (defaults to the scenario's own)
    :raises HypothesisCheckError: if any check fails
    """
    field = spec.field if field is None else field
    report = check_hypotheses(field, h0, seed)
    flags = {"h1": report.h1_pass, "h2": report.h2_pass, "h3": report.h3_pass, "h4": report.h4_pass}
    checks = collections.OrderedDict()
    h5_values = None
    for name in spec.hypotheses:
        if name in flags:
            checks[name] = bool(flags[name])
        elif name == "h5":
            gamma1, gamma2, passed = check_h5(field, h0, *spec.sign_points)
            h5_values = (gamma1, gamma2)
            checks[name] = passed
        elif name == "remark2":
            checks[name] = check_remark2(field)
        elif name == "remark3":
            checks[name] = check_remark3(field, *spec.sign_points)
    outcome = HypothesisOutcome(h0=float(h0), checks=checks, report=report, h5_values=h5_values)
    if not outcome.passed:
        failed = ", ".join(name for name, passed in checks.items() if not passed)
        raise HypothesisCheckError(
            "Scenario {} fails hypotheses {} at h0={}".format(spec.scenario.value, failed, h0), report
        )
    _LOGGER.info("Scenario %s hypotheses hold at h0=%g", spec.scenario.value, h0)
    return outcome


def count_types(records):
    # type: (Sequence[ReducedCriticalPoint]) -> Dict[str, int]
    """Number of critical points per Hessian type."""
    counts = collections.OrderedDict((member.value, 0) for member in CriticalType)
    for record in records:
        counts[record.type.value] += 1
    return counts


@attr.s(frozen=True)
class MultiplicityVerdict(object):
    """Outcome of a multiplicity experiment at one ``h0``.

    :param Scenario scenario: Identifier
    :param float h0: Unperturbed curvature
    :param bool hypotheses_pass: Whether the hypothesis gate passed
    :param int found: Number of critical points found
    :param dict counts: Count per Hessian type
    :param bool count_pass: Whether the expected count and types were found
    """

    scenario = attr.ib(converter=Scenario)
    h0 = attr.ib()
    hypotheses_pass = attr.ib()
    found = attr.ib()
    counts = attr.ib()
    count_pass = attr.ib()

    @property
    def passed(self):
        # type: () -> bool
        return bool(self.hypotheses_pass and self.count_pass)

    def as_dict(self):
        return {
            "scenario": self.scenario.value,
            "h0": self.h0,
            "hypotheses_pass": self.hypotheses_pass,
            "found": self.found,
            "counts": dict(self.counts),
            "count_pass": self.count_pass,
            "verdict": "pass" if self.passed else "fail",
        }


def multiplicity_verdict(spec, h0, records, hypotheses_pass=True):
    # type: (ScenarioSpec, float, Sequence[ReducedCriticalPoint], bool) -> MultiplicityVerdict
    """Judge critical points against what the scenario guarantees."""
    counts = count_types(records)
    count_pass = len(records) >= spec.expected_count
    if spec.required_types:
        count_pass = count_pass and all(counts[kind.value] > 0 for kind in spec.required_types)
    if spec.opposite_signs:
        deviations = np.array([record.point.value - BASE_ENERGY for record in records])
        count_pass = count_pass and bool(np.any(deviations > 0) and np.any(deviations < 0))
    verdict = MultiplicityVerdict(
        scenario=spec.scenario,
        h0=float(h0),
        hypotheses_pass=bool(hypotheses_pass),
        found=len(records),
        counts=counts,
        count_pass=bool(count_pass),
    )
    _LOGGER.info("Scenario %s at h0=%g: %s", spec.scenario.value, h0, verdict.as_dict())
    return verdict
