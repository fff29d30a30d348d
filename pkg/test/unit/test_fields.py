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
"""Unit tests for ``hbubble.fields``."""
import math

import numpy as np
import pytest

from hbubble.exceptions import FieldSyntaxError, InvalidArgumentError
from hbubble.fields import (
    CurvatureField,
    check_hypotheses,
    check_remark2,
    check_remark3,
    constant_field,
    format_field,
    gaussian_bump,
    linear_combination,
    normalize_h0,
    parse_field,
    radial_well,
    zero_field,
)
from hbubble.identifiers import DecayHint

from .unit_test_utils import FIELD_BLOCK

pytestmark = [pytest.mark.unit, pytest.mark.local]

_RANDOM_POINTS = np.random.RandomState(42).uniform(-2.0, 2.0, size=(10, 3))


def _finite_difference(fn, point, step=1e-5):
    columns = []
    for axis in range(3):
        shift = np.zeros(3)
        shift[axis] = step
        columns.append((np.asarray(fn(point + shift)) - np.asarray(fn(point - shift))) / (2.0 * step))
    return np.stack(columns, axis=-1)


def test_gaussian_bump_peak():
    field = gaussian_bump(2.0, (1.0, -1.0, 0.5), 0.5)
    center = np.array([1.0, -1.0, 0.5])

    assert field.eval(center) == pytest.approx(2.0)
    assert np.allclose(field.grad(center), 0.0)
    assert np.allclose(field.hess(center), -(2.0 * 2.0 / 0.25) * np.eye(3))


def test_gaussian_bump_tail():
    field = gaussian_bump(3.0, (0.0, 0.0, 0.0), 0.7)

    assert field.eval(np.array([7.1, 0.0, 0.0])) <= 3.0 * math.exp(-100.0)


@pytest.mark.parametrize("width", (0.0, -1.0))
def test_gaussian_bump_rejects_width(width):
    with pytest.raises(InvalidArgumentError) as excinfo:
        gaussian_bump(1.0, (0.0, 0.0, 0.0), width)

    excinfo.match("width must be positive")


@pytest.mark.parametrize(
    "field",
    (gaussian_bump(1.0, (0.5, 0.0, -0.5), 1.3), radial_well(), radial_well(2.0, 1.0, 2.0)),
    ids=("gaussian", "radialwell-default", "radialwell-custom"),
)
def test_analytic_derivatives_match_finite_differences(field):
    for point in _RANDOM_POINTS:
        assert np.allclose(field.grad(point), _finite_difference(field.eval, point), rtol=1e-6, atol=1e-9)
        assert np.allclose(field.hess(point), _finite_difference(field.grad, point), rtol=1e-6, atol=1e-9)


def test_evaluators_are_vectorized():
    field = radial_well()
    points = _RANDOM_POINTS.reshape(2, 5, 3)

    assert field.eval(points).shape == (2, 5)
    assert field.grad(points).shape == (2, 5, 3)
    assert field.hess(points).shape == (2, 5, 3, 3)


def test_radial_well_center():
    field = radial_well(1.5, 4.0, 3.0)

    assert field.eval(np.zeros(3)) == pytest.approx(1.5)
    assert np.allclose(field.grad(np.zeros(3)), 0.0)
    assert np.all(np.linalg.eigvalsh(field.hess(np.zeros(3))) > 0)


@pytest.mark.parametrize("a, b, s", ((0.0, 4.0, 3.0), (1.0, 0.1, 3.0), (1.0, 4.0, -3.0)))
def test_radial_well_rejects_parameters(a, b, s):
    with pytest.raises(InvalidArgumentError):
        radial_well(a, b, s)


def test_constant_field():
    field = constant_field(2.5)

    assert np.all(field.eval(_RANDOM_POINTS) == 2.5)
    assert np.all(field.grad(_RANDOM_POINTS) == 0.0)
    assert field.hess(_RANDOM_POINTS).shape == (10, 3, 3)
    assert field.decay_hint is DecayHint.NONDECAYING
    assert zero_field().decay_hint is DecayHint.COMPACT_LIKE


def test_linear_combination_cancels():
    bump = gaussian_bump(1.0, (0.0, 0.0, 0.0), 1.0)

    field = linear_combination([(1.0, bump), (-1.0, bump)])

    assert np.allclose(field.eval(_RANDOM_POINTS), 0.0)
    assert np.allclose(field.hess(_RANDOM_POINTS), 0.0)


def test_linear_combination_two_signs():
    p1, p2 = np.array([3.0, 0.0, 0.0]), np.array([-3.0, 0.0, 0.0])

    field = linear_combination([(1.0, gaussian_bump(1.0, p1, 1.0)), (-1.0, gaussian_bump(1.0, p2, 1.0))])

    assert field.eval(p1) == pytest.approx(1.0, abs=1e-12)
    assert field.eval(p2) == pytest.approx(-1.0, abs=1e-12)


def test_linear_combination_scales():
    well = radial_well()

    doubled = linear_combination([(2.0, well)])

    assert np.allclose(doubled.eval(_RANDOM_POINTS), 2.0 * well.eval(_RANDOM_POINTS))
    assert np.allclose(doubled.grad(_RANDOM_POINTS), 2.0 * well.grad(_RANDOM_POINTS))
    assert np.allclose(doubled.hess(_RANDOM_POINTS), 2.0 * well.hess(_RANDOM_POINTS))


def test_linear_combination_takes_weakest_decay():
    field = linear_combination([(1.0, radial_well()), (1.0, constant_field(1.0))])

    assert field.decay_hint is DecayHint.NONDECAYING


def test_linear_combination_rejects_empty():
    with pytest.raises(InvalidArgumentError) as excinfo:
        linear_combination([])

    excinfo.match("at least one term")


def test_normalize_h0_identity():
    bump = gaussian_bump(1.0, (0.0, 0.0, 0.0), 1.0)

    assert normalize_h0(1.0, bump) is bump


def test_normalize_h0_rescales():
    bump = gaussian_bump(1.0, (1.0, 0.0, 0.0), 1.0)

    field = normalize_h0(2.0, bump)

    assert field.eval(np.zeros(3)) == pytest.approx(0.5 * math.exp(-1.0))
    for point in _RANDOM_POINTS:
        assert np.allclose(field.grad(point), _finite_difference(field.eval, point), rtol=1e-6, atol=1e-9)
        assert np.allclose(field.hess(point), _finite_difference(field.grad, point), rtol=1e-6, atol=1e-9)


def test_normalize_h0_rejects_zero():
    with pytest.raises(InvalidArgumentError):
        normalize_h0(0.0, radial_well())


def test_from_callable_falls_back_to_finite_differences():
    field = CurvatureField.from_callable(lambda p: np.einsum("...i,...i->...", p, p), description="square")

    assert not field.analytic
    assert np.allclose(field.grad(np.array([1.0, 2.0, 3.0])), [2.0, 4.0, 6.0], atol=1e-6)
    assert np.allclose(field.hess(np.array([1.0, 2.0, 3.0])), 2.0 * np.eye(3), atol=1e-4)


def test_hypotheses_of_single_bump():
    report = check_hypotheses(gaussian_bump(1.0, (0.0, 0.0, 0.0), 1.0), 1.0)

    assert report.h1_pass
    assert report.h2_pass
    assert not report.h3_pass
    assert report.h4_pass
    assert report.samples >= 500
    assert report.h2_note == "verified analytically"


def test_hypotheses_of_radial_well():
    report = check_hypotheses(radial_well(), 1.0)

    assert report.h3_pass
    assert report.h4_pass


def test_hypotheses_of_zero_field():
    report = check_hypotheses(zero_field(), 1.0)

    assert (report.h1_pass, report.h2_pass, report.h3_pass, report.h4_pass) == (True, True, True, False)


def test_nondecaying_field_fails_h1():
    assert not check_hypotheses(constant_field(1.0), 1.0).h1_pass


def test_hypotheses_are_deterministic():
    first = check_hypotheses(radial_well(), 2.0, seed=7).as_dict()
    second = check_hypotheses(radial_well(), 2.0, seed=7).as_dict()

    assert first == second


def test_hypotheses_reject_zero_h0():
    with pytest.raises(InvalidArgumentError):
        check_hypotheses(radial_well(), 0.0)


def test_remark_checks():
    pair = parse_field(FIELD_BLOCK)

    assert check_remark2(radial_well())
    assert not check_remark2(gaussian_bump(1.0, (0.0, 0.0, 0.0), 1.0))
    assert check_remark3(pair, (3.0, 0.0, 0.0), (-3.0, 0.0, 0.0))
    assert not check_remark3(pair, (-3.0, 0.0, 0.0), (3.0, 0.0, 0.0))


def test_parse_field_single_term():
    field = parse_field("1.0 gaussian a=2 c=1,2,3 s=0.5")

    assert field.eval(np.array([1.0, 2.0, 3.0])) == pytest.approx(2.0)
    assert field.terms[0][1] == "gaussian"


def test_parse_field_combination():
    field = parse_field(FIELD_BLOCK)

    assert len(field.terms) == 2
    assert field.eval(np.array([3.0, 0.0, 0.0])) == pytest.approx(1.0, abs=1e-12)
    assert field.eval(np.array([-3.0, 0.0, 0.0])) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize(
    "text",
    (
        "2 RadialWell a=1 b=4 s=3",
        "-0.5 constant c=2",
        "1e-1 gaussian a=1 c=0,0,0 s=1\n+ radialwell a=1 b=4 s=3",
    ),
)
def test_format_field_round_trip(text):
    field = parse_field(text)

    assert format_field(parse_field(format_field(field))) == format_field(field)


@pytest.mark.parametrize(
    "text, line, message",
    (
        ("1.0 gaussian a=1 c=0,0,0", 1, "Missing parameters s"),
        ("\n\n1.0 torus a=1", 3, 'Unknown field kind "torus"'),
        ("1.0 gaussian a=1 c=0,0 s=1", 1, "Centre must be"),
        ("1.0 constant c=x", 1, 'Invalid number "x"'),
        ("1.0 constant k=1", 1, "Invalid parameter"),
        ("times gaussian a=1 c=0,0,0 s=1", 1, "Expected"),
        ("1.0 gaussian a=1 c=0,0,0 s=0", 1, "width must be positive"),
        ("# nothing\n", 1, "empty"),
    ),
)
def test_parse_field_errors(text, line, message):
    with pytest.raises(FieldSyntaxError) as excinfo:
        parse_field(text)

    assert excinfo.value.line_number == line
    excinfo.match(message)


def test_parse_field_offsets_line_numbers():
    with pytest.raises(FieldSyntaxError) as excinfo:
        parse_field("+ constant c=1\n- donut", first_line=12)

    assert excinfo.value.line_number == 13


def test_format_field_needs_terms():
    field = normalize_h0(2.0, radial_well())

    with pytest.raises(InvalidArgumentError):
        format_field(field)
