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
"""Functional tests for ``hbubble.melnikov``."""
import math

import numpy as np
import pytest
from hypothesis import given
from scipy import integrate

from hbubble.exceptions import InvalidArgumentError
from hbubble.fields import constant_field, gaussian_bump, normalize_h0, radial_well, zero_field
from hbubble.identifiers import CriticalType, Scenario
from hbubble.melnikov import (
    ball_quadrature,
    check_h5,
    find_gamma_critical,
    gamma,
    gamma_gradient,
    gamma_hessian,
)
from hbubble.scenarios import scenario_spec

from .functional_test_utils import bump_pair, pair_field, rotation_about, single_bump, well  # noqa pylint: disable=unused-import
from .hypothesis_strategies import FEW_EXAMPLES, curvatures, small_points

pytestmark = [pytest.mark.functional, pytest.mark.local]


def _shifted_ball_gaussian(distance, width):
    """Integral of ``exp(-|x|^2 / width^2)`` over the unit ball centred at distance ``distance`` from 0."""

    def shell(rho):
        if rho + distance <= 1.0:
            fraction = 1.0
        elif rho >= 1.0 + distance or (distance > 1.0 and rho <= distance - 1.0):
            fraction = 0.0
        else:
            fraction = 0.5 * (1.0 - (rho * rho + distance * distance - 1.0) / (2.0 * rho * distance))
        return 4.0 * math.pi * rho * rho * math.exp(-rho * rho / (width * width)) * fraction

    upper = 1.0 + distance
    breaks = [point for point in (abs(1.0 - distance),) if 0.0 < point < upper] or None
    value, _error = integrate.quad(shell, 0.0, upper, points=breaks, epsabs=1e-13, epsrel=1e-12, limit=200)
    return value


def test_ball_quadrature_moments():
    center = np.array([0.5, -1.0, 2.0])
    rule = ball_quadrature(center, 1.5)
    offsets = rule.nodes - center

    assert rule.integrate(np.ones(len(rule.weights))) == pytest.approx(4.0 * math.pi * 1.5 ** 3 / 3.0, rel=1e-13)
    assert np.allclose(rule.integrate(rule.nodes), center * 4.0 * math.pi * 1.5 ** 3 / 3.0, rtol=1e-13)
    assert rule.integrate(np.sum(offsets ** 2, axis=-1)) == pytest.approx(4.0 * math.pi * 1.5 ** 5 / 5.0, rel=1e-12)
    assert rule.orders == (24, 24, 48)


@pytest.mark.parametrize(
    "kwargs, message",
    (
        (dict(n_r=1), "three integers >= 2"),
        (dict(n_phi=2.5), "three integers >= 2"),
        (dict(radius=0.0), "must be positive"),
    ),
)
def test_ball_quadrature_rejects(kwargs, message):
    arguments = dict(p=(0.0, 0.0, 0.0), radius=1.0)
    arguments.update(kwargs)

    with pytest.raises(InvalidArgumentError) as excinfo:
        ball_quadrature(**arguments)

    excinfo.match(message)


@pytest.mark.parametrize("h0", (2.0, -2.0, 0.5))
def test_gamma_of_constant(h0):
    assert gamma((1.0, 2.0, 3.0), constant_field(3.0), h0) == pytest.approx(4.0 * math.pi / abs(h0) ** 3, rel=1e-12)


def test_gamma_rejects_zero_curvature():
    with pytest.raises(InvalidArgumentError) as excinfo:
        gamma((0.0, 0.0, 0.0), constant_field(1.0), 0.0)

    excinfo.match("must be nonzero")


def test_gamma_of_odd_field_vanishes_at_origin(pair_field):
    assert abs(gamma((0.0, 0.0, 0.0), pair_field)) < 1e-12


@pytest.mark.parametrize("distance, width", ((0.0, 0.7), (0.0, 3.0), (0.5, 0.7), (2.0, 1.0)))
def test_gamma_of_bump_matches_radial_integral(distance, width):
    field = gaussian_bump(1.0, (0.0, 0.0, 0.0), width)

    value = gamma((distance, 0.0, 0.0), field)

    assert value == pytest.approx(_shifted_ball_gaussian(distance, width), rel=1e-7)


@FEW_EXAMPLES
@given(point=small_points)
def test_gamma_gradient_matches_differences(point):
    field = gaussian_bump(1.0, (0.3, -0.2, 0.1), 1.0)
    point = np.asarray(point)
    step = 1e-4
    expected = np.zeros(3)
    for axis in range(3):
        shift = np.zeros(3)
        shift[axis] = step
        expected[axis] = (gamma(point + shift, field) - gamma(point - shift, field)) / (2.0 * step)

    assert np.allclose(gamma_gradient(point, field), expected, rtol=1e-5, atol=1e-7)


def test_gamma_hessian_of_well_is_positive_definite(well):
    hessian = gamma_hessian((0.0, 0.0, 0.0), well)

    assert np.allclose(hessian, hessian.T, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(hessian)) > 0


def test_gamma_of_radial_field_is_rotation_invariant(well):
    point = np.array([0.7, -0.4, 1.1])
    rotation = rotation_about((0.2, 1.0, -0.5), 1.3)

    assert gamma(rotation.dot(point), well) == pytest.approx(gamma(point, well), rel=1e-8)


@FEW_EXAMPLES
@given(h0=curvatures, point=small_points)
def test_gamma_under_curvature_normalization(h0, point):
    field = gaussian_bump(1.0, (1.0, 0.5, 0.0), 2.0)
    point = np.asarray(point)

    rescaled = gamma(h0 * point, normalize_h0(h0, field), 1.0)

    assert rescaled == pytest.approx(h0 * h0 * gamma(point, field, h0), rel=1e-7)


def test_single_bump_has_one_maximum(single_bump):
    report = find_gamma_critical(single_bump, box=(-3, 3, -3, 3, -3, 3), scan=9)

    assert not report.flat
    assert len(report.critical_points) == 1
    point = report.critical_points[0]
    assert point.type is CriticalType.MAX
    assert np.allclose(point.location, 0.0, atol=1e-6)
    assert point.value == pytest.approx(gamma((0.0, 0.0, 0.0), single_bump), rel=1e-9)
    assert report.points.shape == (9 ** 3, 3)
    assert set(report.as_dict()) == {"h0", "box", "orders", "flat", "critical_points"}


def test_bump_pair_has_opposite_extrema(pair_field):
    report = find_gamma_critical(pair_field, box=(-5, 5, -5, 5, -5, 5), scan=9, threads=2)

    maxima = [point for point in report.critical_points if point.type is CriticalType.MAX]
    minima = [point for point in report.critical_points if point.type is CriticalType.MIN]
    assert any(point.location[0] > 2.0 and point.value > 0 for point in maxima)
    assert any(point.location[0] < -2.0 and point.value < 0 for point in minima)
    for point in report.critical_points:
        assert point.gradient_norm < 1e-6


@pytest.mark.slow
def test_tilted_well_has_min_max_and_saddle():
    report = find_gamma_critical(scenario_spec(Scenario.THM2).field, box=(-5, 5, -5, 5, -5, 5), threads=2)

    types = {point.type for point in report.critical_points}
    assert {CriticalType.MIN, CriticalType.MAX, CriticalType.SADDLE} <= types
    saddles = [point for point in report.critical_points if point.type is CriticalType.SADDLE]
    assert any(point.location[0] < 0 and np.allclose(point.location[1:], 0.0, atol=1e-6) for point in saddles)
    for point in report.critical_points:
        assert point.gradient_norm < 1e-6


def test_zero_field_is_flat():
    report = find_gamma_critical(zero_field(), box=(-2, 2, -2, 2, -2, 2), scan=5)

    assert report.flat
    assert report.critical_points == []


def test_user_seed_is_refined(well):
    report = find_gamma_critical(well, box=(-1, 1, -1, 1, -1, 1), scan=3, seeds=[(0.3, -0.2, 0.1)])

    assert len(report.critical_points) == 1
    assert report.critical_points[0].type is CriticalType.MIN
    assert np.allclose(report.critical_points[0].location, 0.0, atol=1e-6)


def test_check_h5():
    field = bump_pair()

    gamma1, gamma2, passed = check_h5(field, 1.0, (3.0, 0.0, 0.0), (-3.0, 0.0, 0.0))

    assert passed
    assert gamma1 == pytest.approx(-gamma2, rel=1e-10)
    assert not check_h5(field, 1.0, (-3.0, 0.0, 0.0), (3.0, 0.0, 0.0))[2]
