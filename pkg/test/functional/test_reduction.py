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
"""Functional tests for ``hbubble.reduction``."""
import math

import attr
import numpy as np
import pytest
from scipy.linalg import null_space, subspace_angles

from hbubble.exceptions import InvalidArgumentError, NonConvergenceError
from hbubble.fields import gaussian_bump, radial_well, zero_field
from hbubble.identifiers import CriticalType, SolverMode
from hbubble.melnikov import gamma, gamma_gradient
from hbubble.reduction import (
    BASE_ENERGY,
    eta_equation_residual,
    expansion_check,
    find_phi_critical,
    natural_constraint_residual,
    phi,
    phi_gradient,
    phi_gradient_from_multipliers,
    phi_hessian,
    ratio_spread,
    reduction_context,
    solve_eta,
)

from .functional_test_utils import context8, pair_field, single_bump  # noqa pylint: disable=unused-import

pytestmark = [pytest.mark.functional, pytest.mark.local]

_P = (2.0, 0.5, -0.3)


def _bordered_matrix(context):
    hessian = np.asarray(context.hessian)
    n = hessian.shape[0]
    dirichlet_columns = context.frame.dirichlet_columns()
    mean_columns = np.zeros((3, 3, context.grid.coefficient_count))
    mean_columns[np.arange(3), np.arange(3), 0] = math.sqrt(4.0 * math.pi)
    mean_columns = mean_columns.reshape(3, -1).T
    matrix = np.zeros((n + 9, n + 9))
    matrix[:n, :n] = hessian
    matrix[:n, n : n + 6] = -dirichlet_columns
    matrix[:n, n + 6 :] = mean_columns
    matrix[n : n + 6, :n] = dirichlet_columns.T
    matrix[n + 6 :, :n] = mean_columns.T
    return matrix


def test_tangent_frame_is_orthonormal(context8):
    frame = context8.frame

    assert frame.gram_residual < 1e-12
    assert frame.mean_residual < 1e-13
    assert frame.kernel_basis().shape == (context8.unknowns, 9)
    assert len(frame.maps()) == 6


def test_tangent_frame_spans_hessian_kernel(context8):
    hessian = np.asarray(context8.hessian)
    basis = context8.frame.kernel_basis()

    assert np.max(np.abs(hessian.dot(basis))) < 1e-10
    kernel = null_space(hessian, rcond=1e-8)
    assert kernel.shape[1] == 9
    assert np.max(subspace_angles(kernel, basis)) < 1e-6


def test_bordered_operator_is_well_conditioned(context8):
    assert context8.operator.size == context8.unknowns + 9
    assert 1.0 < context8.operator.condition < 1e8


def test_bordered_operator_solves_constructed_system(context8):
    expected = np.random.RandomState(17).standard_normal(context8.unknowns + 9)
    rhs = _bordered_matrix(context8).dot(expected)

    assert np.allclose(context8.operator.solve(rhs), expected, atol=1e-8)


def test_unperturbed_solve_is_trivial(context8):
    state = solve_eta(0.0, _P, None, context=context8)

    assert state.iterations == 1
    assert state.converged
    assert not np.any(state.eta.coeffs)
    assert not np.any(state.multipliers)
    assert state.eta_w13 == 0.0
    assert np.allclose(state.bubble.mean(), _P)


def test_correction_is_first_order(context8, pair_field):
    large = solve_eta(0.02, _P, pair_field, context=context8)
    small = solve_eta(0.01, _P, pair_field, context=context8)

    assert large.converged and small.converged
    assert large.eta_w13 / small.eta_w13 == pytest.approx(2.0, rel=0.15)


def test_correction_vanishes_far_from_field(context8, pair_field):
    state = solve_eta(0.05, (10.0, 0.0, 0.0), pair_field, context=context8)

    assert state.eta_w13 < 1e-9


def test_constraints_hold(context8, pair_field):
    state = solve_eta(0.02, _P, pair_field, context=context8)

    dirichlet, mean = state.constraint_residuals()

    assert np.max(np.abs(dirichlet)) < 1e-9
    assert np.max(np.abs(mean)) < 1e-9


def test_picard_and_newton_agree(context8, pair_field):
    picard = solve_eta(0.02, _P, pair_field, context=context8, tol=1e-12)
    newton = solve_eta(0.02, _P, pair_field, context=context8, tol=1e-12, mode=SolverMode.NEWTON)

    assert newton.mode is SolverMode.NEWTON
    assert newton.iterations <= picard.iterations
    assert np.max(np.abs(picard.eta.coeffs - newton.eta.coeffs)) < 1e-8
    assert np.allclose(picard.alpha, newton.alpha, atol=1e-8)


def test_eta_equation_holds(context8, pair_field):
    state = solve_eta(0.02, _P, pair_field, context=context8)

    assert eta_equation_residual(state, pair_field) <= 1e-3


@pytest.mark.slow
def test_eta_equation_residual_falls_with_degree(context8, pair_field):
    coarse = eta_equation_residual(solve_eta(0.02, _P, pair_field, context=context8, tol=1e-12), pair_field)
    fine_context = reduction_context(16)
    fine = eta_equation_residual(solve_eta(0.02, _P, pair_field, context=fine_context, tol=1e-12), pair_field)

    assert fine < 0.1 * coarse


def test_eta_equation_at_zero_eps(context8):
    state = solve_eta(0.0, _P, zero_field(), context=context8)

    assert eta_equation_residual(state, zero_field()) <= 1e-10


def test_eta_equation_detects_shifted_multiplier(context8, pair_field):
    state = solve_eta(0.02, _P, pair_field, context=context8)
    # A constant shift of alpha moves the residual by its L^2 norm, 1e-2 * sqrt(4 pi).
    perturbed = attr.evolve(state, alpha=np.asarray(state.alpha) + np.array([1e-2, 0.0, 0.0]))

    assert eta_equation_residual(perturbed, pair_field) >= 3e-2


def test_iteration_budget(context8, pair_field):
    with pytest.raises(NonConvergenceError) as excinfo:
        solve_eta(0.05, _P, pair_field, context=context8, max_iter=1)

    assert len(excinfo.value.update_norms) == 1
    excinfo.match("No convergence")


def test_outside_validation_is_flagged(context8):
    state = solve_eta(0.3, _P, zero_field(), context=context8)

    assert state.converged
    assert state.outside_validation
    assert state.as_dict()["outside_validation"]


def test_solve_needs_field(context8):
    with pytest.raises(InvalidArgumentError) as excinfo:
        solve_eta(0.1, _P, None, context=context8)

    excinfo.match("A curvature field is required")


def test_unperturbed_reduced_energy_is_constant(context8):
    for p in ((0.0, 0.0, 0.0), _P):
        assert phi(0.0, p, None, context=context8) == pytest.approx(BASE_ENERGY, rel=1e-12)


def test_reduced_energy_drops_over_positive_bump(context8, single_bump):
    values = [phi(eps, (0.0, 0.0, 0.0), single_bump, context=context8) for eps in (0.02, 0.01, 0.005)]

    assert all(value < BASE_ENERGY for value in values)
    deviations = [BASE_ENERGY - value for value in values]
    assert deviations[0] > deviations[1] > deviations[2] > 0


def test_phi_rejects_unknown_options(context8, pair_field):
    with pytest.raises(TypeError) as excinfo:
        phi(0.01, _P, pair_field, context=context8, tolerance=1e-3)

    excinfo.match("Unexpected solver options: tolerance")


def test_expansion_of_zero_field(context8):
    rows = expansion_check(_P, zero_field(), eps_list=(0.01, 0.005), context=context8)

    assert [row.eps for row in rows] == [0.01, 0.005]
    for row in rows:
        assert abs(row.remainder) < 1e-12
        assert row.gamma == 0.0


def test_expansion_remainder_is_second_order(context8):
    field = gaussian_bump(1.0, (0.0, 0.0, 0.0), 2.0)
    rows = expansion_check((0.5, 0.0, 0.0), field, eps_list=(0.02, 0.01, 0.005), context=context8, tol=1e-12)

    assert ratio_spread(rows) < 4.0
    assert rows[0].gamma == pytest.approx(gamma((0.5, 0.0, 0.0), field))
    assert set(rows[0].as_dict()) == {"eps", "phi", "gamma", "remainder", "ratio"}


@pytest.mark.parametrize("eps_list", ((), (0.01, 0.0)))
def test_expansion_rejects_sizes(pair_field, eps_list):
    with pytest.raises(InvalidArgumentError) as excinfo:
        expansion_check(_P, pair_field, eps_list=eps_list)

    excinfo.match("nonzero perturbation sizes")


def test_multiplier_gradient_matches_differences(context8, pair_field):
    state = solve_eta(0.02, _P, pair_field, context=context8, tol=1e-12)

    multiplier_gradient = phi_gradient_from_multipliers(state)
    difference_gradient = phi_gradient(0.02, _P, pair_field, h=1e-3, context=context8, tol=1e-12)

    assert np.allclose(multiplier_gradient, difference_gradient, rtol=1e-3, atol=1e-7)


def test_multiplier_gradient_follows_melnikov(context8, pair_field):
    eps = 0.005
    state = solve_eta(eps, _P, pair_field, context=context8)

    expected = -2.0 * eps * gamma_gradient(_P, pair_field)

    assert np.linalg.norm(phi_gradient_from_multipliers(state) - expected) <= 0.1 * np.linalg.norm(expected)


def test_radial_field_gives_radial_gradient(context8):
    p = np.array([0.6, -0.3, 0.2])
    state = solve_eta(0.01, p, radial_well(), context=context8)

    gradient = phi_gradient_from_multipliers(state)

    assert np.linalg.norm(np.cross(gradient, p)) <= 1e-5 * np.linalg.norm(gradient) * np.linalg.norm(p)


def test_reduced_hessian_is_symmetric(context8, single_bump):
    hessian = phi_hessian(0.01, (0.0, 0.0, 0.0), single_bump, context=context8)

    assert np.allclose(hessian, hessian.T)
    # Phi ~ E0 - 2 eps Gamma and Gamma peaks at the bump
    assert np.min(np.linalg.eigvalsh(hessian)) > 0


def test_natural_constraint(context8, pair_field):
    far = solve_eta(0.02, (10.0, 0.0, 0.0), pair_field, context=context8)
    near = solve_eta(0.02, _P, pair_field, context=context8)

    assert natural_constraint_residual(far, pair_field) < 1e-9
    assert natural_constraint_residual(near, pair_field) > 1e-6


def test_find_phi_critical_rejects_zero_eps(pair_field):
    with pytest.raises(InvalidArgumentError) as excinfo:
        find_phi_critical(0.0, pair_field)

    excinfo.match("constant for eps = 0")


@pytest.mark.slow
def test_find_phi_critical_on_bump_pair(context8, pair_field):
    records = find_phi_critical(0.01, pair_field, box=(-5, 5, -5, 5, -5, 5), scan=5, threads=2, context=context8)

    minima = [record for record in records if record.type is CriticalType.MIN]
    maxima = [record for record in records if record.type is CriticalType.MAX]
    assert any(record.point.location[0] > 2.0 and record.point.value < BASE_ENERGY for record in minima)
    assert any(record.point.location[0] < -2.0 and record.point.value > BASE_ENERGY for record in maxima)
    for record in records:
        assert record.point.gradient_norm < 1e-6
        assert record.as_record()["type"] == record.type.value
