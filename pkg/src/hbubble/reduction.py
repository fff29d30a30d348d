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
"""Finite-dimensional reduction of the perturbed H-system.

Near the manifold ``Z`` of translated, rotated and conformally reparametrized unit bubbles,
every map is written ``u = u0 + p + eta`` with ``eta`` orthogonal to the tangent directions of
``Z``. For fixed ``(eps, p)`` the correction ``eta`` and the multipliers ``(lambda, alpha)``
solve the bordered system

    E'_eps(u0 + p + eta) = sum_i lambda_i (-Delta tau_i) - alpha
    integral grad eta . grad tau_i = 0,    integral eta = 0

by a fixed-point iteration with a frozen linear operator. Critical points ``p*`` of the reduced
energy ``Phi_eps(p) = E_eps(u0 + p + eta(eps, p))`` give true solutions ``u0 + p* + eta``.

The unperturbed curvature is 1 throughout; rescale fields with
:func:`hbubble.fields.normalize_h0` first.
"""
import logging
import math
import warnings
from threading import Lock

import attr
import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.linalg.lapack import get_lapack_funcs

from hbubble.diagnostics import w1s_norm
from hbubble.exceptions import (
    ContractionFailureError,
    CriticalPointSearchError,
    FactorizationError,
    FrameBreakdownError,
    InvalidArgumentError,
    NonConvergenceError,
    ReductionError,
)
from hbubble.functionals import (
    area_form,
    assemble_e0_hessian,
    assemble_hessian,
    energy,
    gradient,
    residual_norm,
)
from hbubble.identifiers import LOGGER_NAME, SolverMode
from hbubble.internal.identifiers import DEFAULT_PADDING, Thresholds
from hbubble.internal.utils import (
    box_points,
    deduplicate_points,
    lattice_seeds,
    midpoint_seeds,
    newton_critical,
    parallel_map,
    validate_box,
)
from hbubble.internal.validators import frozen_array, vector3
from hbubble.melnikov import gamma
from hbubble.sphere import MapS2R3, SpectralField, base_bubble, build_grid, laplace_beltrami
from hbubble.structures import CriticalPoint

try:  # Only needed for type comments
    from typing import Dict, List, Optional, Sequence, Tuple  # noqa pylint: disable=unused-import
    from hbubble.fields import CurvatureField  # noqa pylint: disable=unused-import
    from hbubble.sphere import QuadratureGrid  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = (
    "TangentFrame",
    "BorderedOperator",
    "ReductionContext",
    "ReductionState",
    "ExpansionRow",
    "ReducedCriticalPoint",
    "tangent_frame",
    "assemble_bordered",
    "reduction_context",
    "solve_eta",
    "eta_equation_residual",
    "phi",
    "expansion_check",
    "ratio_spread",
    "phi_gradient",
    "phi_gradient_from_multipliers",
    "phi_hessian",
    "natural_constraint_residual",
    "find_phi_critical",
)
_LOGGER = logging.getLogger(LOGGER_NAME)
DEFAULT_DEGREE = 16
#: Energy of the unit bubble.
BASE_ENERGY = 4.0 * math.pi / 3.0
_ROOT_4PI = math.sqrt(4.0 * math.pi)
_GROWTH_LIMIT = 5
_CONTEXTS = {}
_CONTEXTS_LOCK = Lock()


def _dirichlet_product(grid, first, second):
    """Dirichlet inner product of coefficient arrays ``(..., 3, N)``."""
    return np.sum(grid.eigenvalues * first * second, axis=(-2, -1))


@attr.s(frozen=True, eq=False)
class TangentFrame(object):
    """Tangent directions of the bubble manifold at ``u0``.

    :param grid: Quadrature grid
    :param tau: Coefficients ``(6, 3, N)`` of the rotation and conformal directions, orthonormal
        in the Dirichlet inner product and with zero mean
    :param constants: Coefficients ``(3, 3, N)`` of the constant maps ``e_a``
    :param float gram_residual: ``max |integral grad tau_i . grad tau_j - delta_ij|``
    :param float mean_residual: ``max |integral tau_i|``
    """

    grid = attr.ib(repr=False)
    tau = attr.ib(converter=frozen_array, repr=False)
    constants = attr.ib(converter=frozen_array, repr=False)
    gram_residual = attr.ib()
    mean_residual = attr.ib()

    def maps(self):
        """The six directions as maps."""
        return tuple(MapS2R3(self.grid, coeffs) for coeffs in self.tau)

    def kernel_basis(self):
        """Columns ``(3N, 9)`` spanning the tangent space: the six directions then the constants."""
        return np.concatenate([self.tau, self.constants]).reshape(9, -1).T

    def dirichlet_columns(self):
        """Columns ``(3N, 6)`` of the pairings ``phi -> integral grad phi . grad tau_i``."""
        return (self.grid.eigenvalues * self.tau).reshape(6, -1).T


def _raw_directions(grid):
    """Derivatives of ``u0 = -sigma`` along target rotations and conformal dilations."""
    sigma = np.asarray(grid.unit_points)
    fields = []
    for axis in np.eye(3):
        fields.append(-np.cross(axis, sigma))
    for axis in np.eye(3):
        fields.append(-(axis - np.einsum("...i,i->...", sigma, axis)[..., None] * sigma))
    samples = np.moveaxis(np.array(fields), -1, 1)
    return grid.analyze_array(samples)


def tangent_frame(grid):
    # type: (QuadratureGrid) -> TangentFrame
    """Orthonormalize the tangent directions of the bubble manifold at ``u0``.

    The conformal directions carry a constant part, which is removed before Gram-Schmidt in
    the Dirichlet inner product.

    :raises FrameBreakdownError: if the directions are numerically dependent
    """
    raw = _raw_directions(grid)
    raw[:, :, 0] = 0.0
    tau = []
    for index, direction in enumerate(raw):
        reference = math.sqrt(_dirichlet_product(grid, direction, direction))
        # Two passes keep the frame orthonormal to roundoff.
        for _ in range(2):
            for previous in tau:
                direction = direction - _dirichlet_product(grid, direction, previous) * previous
        norm = math.sqrt(max(_dirichlet_product(grid, direction, direction), 0.0))
        if norm <= 1e-8 * max(reference, 1.0):
            raise FrameBreakdownError("Tangent direction {} is dependent on the previous ones".format(index))
        tau.append(direction / norm)
    tau = np.array(tau)
    gram = _dirichlet_product(grid, tau[:, None], tau[None, :])
    constants = np.zeros((3, 3, grid.coefficient_count))
    constants[np.arange(3), np.arange(3), 0] = _ROOT_4PI
    frame = TangentFrame(
        grid=grid,
        tau=tau,
        constants=constants,
        gram_residual=float(np.max(np.abs(gram - np.eye(6)))),
        mean_residual=float(np.max(np.abs(_ROOT_4PI * tau[:, :, 0]))),
    )
    _LOGGER.debug("Tangent frame at degree %d: gram residual %.3e", grid.degree, frame.gram_residual)
    return frame


def _mean_columns(grid):
    """Columns ``(3N, 3)`` of the pairings ``phi -> integral phi_a``."""
    columns = np.zeros((3, 3, grid.coefficient_count))
    columns[np.arange(3), np.arange(3), 0] = _ROOT_4PI
    return columns.reshape(3, -1).T


@attr.s(frozen=True, eq=False)
class BorderedOperator(object):
    """LU-factorized bordered operator.

    :param int size: Number of unknowns ``3N + 9``
    :param float condition: 1-norm condition estimate
    :param factors: ``(lu, piv)`` from :func:`scipy.linalg.lu_factor`
    """

    size = attr.ib()
    condition = attr.ib()
    _factors = attr.ib(repr=False)

    def solve(self, rhs):
        # type: (np.ndarray) -> np.ndarray
        """Solve the bordered system for one or several right-hand sides."""
        return lu_solve(self._factors, rhs)


def assemble_bordered(grid, frame, hessian=None, padding=DEFAULT_PADDING):
    # type: (QuadratureGrid, TangentFrame, Optional[np.ndarray], float) -> BorderedOperator
    """Border a second-variation matrix with the frame constraints and factorize it.

    The unknowns are ``(eta, lambda, alpha)``::

        [ H            -D    M ]
        [ D^T           0    0 ]
        [ M^T           0    0 ]

    with ``D`` the Dirichlet pairings against the frame and ``M`` the mean-value pairings.
    Without ``hessian`` the unperturbed second variation at ``u0`` is used.

    :raises FactorizationError: if the matrix is singular or too badly conditioned
    """
    if hessian is None:
        hessian = assemble_e0_hessian(grid, padding)
    dirichlet_columns = frame.dirichlet_columns()
    mean_columns = _mean_columns(grid)
    n = hessian.shape[0]
    size = n + 9
    matrix = np.zeros((size, size))
    matrix[:n, :n] = hessian
    matrix[:n, n : n + 6] = -dirichlet_columns
    matrix[:n, n + 6 :] = mean_columns
    matrix[n : n + 6, :n] = dirichlet_columns.T
    matrix[n + 6 :, :n] = mean_columns.T
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", LinAlgWarning)
            lu, piv = lu_factor(matrix)
    except (LinAlgWarning, ValueError) as error:
        raise FactorizationError("Bordered operator could not be factorized: {}".format(error))
    if np.any(np.diag(lu) == 0.0):
        raise FactorizationError("Bordered operator is singular")
    (gecon,) = get_lapack_funcs(("gecon",), (lu,))
    rcond, _info = gecon(lu, np.linalg.norm(matrix, 1))
    condition = float("inf") if rcond == 0 else 1.0 / rcond
    if condition > Thresholds.MAX_CONDITION.value:
        raise FactorizationError("Bordered operator condition estimate {:.3e} is too large".format(condition))
    _LOGGER.debug("Bordered operator of size %d, condition estimate %.3e", size, condition)
    return BorderedOperator(size=size, condition=condition, factors=(lu, piv))


@attr.s(frozen=True, eq=False)
class ReductionContext(object):
    """Everything the reduction needs at one degree, built once and shared read-only.

    :param grid: Quadrature grid
    :param float padding: De-aliasing factor of nonlinear terms
    :param hessian: Unperturbed second-variation matrix
    :param frame: :class:`TangentFrame`
    :param operator: Factorized :class:`BorderedOperator`
    :param base: Base bubble ``u0``
    """

    grid = attr.ib()
    padding = attr.ib()
    hessian = attr.ib(repr=False)
    frame = attr.ib(repr=False)
    operator = attr.ib(repr=False)
    base = attr.ib(repr=False)

    @property
    def degree(self):
        # type: () -> int
        """Spectral truncation."""
        return self.grid.degree

    @property
    def unknowns(self):
        # type: () -> int
        """Number of correction coefficients ``3N``."""
        return 3 * self.grid.coefficient_count

    def linearization(self, u, eps, field):
        """Bordered operator around ``u`` with the full second variation of ``E_eps``."""
        hessian = assemble_hessian(u, eps, field, self.padding)
        return assemble_bordered(self.grid, self.frame, hessian=hessian, padding=self.padding)


def reduction_context(degree=DEFAULT_DEGREE, padding=DEFAULT_PADDING):
    # type: (int, float) -> ReductionContext
    """Build (or reuse) the reduction context of a degree.

    :raises InvalidArgumentError: if the degree is out of range or too large for dense assembly
    """
    key = (degree, float(padding))
    with _CONTEXTS_LOCK:
        if key not in _CONTEXTS:
            grid = build_grid(degree)
            _LOGGER.info("Building reduction context at degree %d", degree)
            hessian = assemble_e0_hessian(grid, padding)
            frame = tangent_frame(grid)
            operator = assemble_bordered(grid, frame, hessian=hessian, padding=padding)
            _CONTEXTS[key] = ReductionContext(
                grid=grid,
                padding=float(padding),
                hessian=hessian,
                frame=frame,
                operator=operator,
                base=base_bubble(grid),
            )
        return _CONTEXTS[key]


@attr.s(frozen=True, eq=False)
class ReductionState(object):
    """Correction term and multipliers at ``(eps, p)``.

    :param float eps: Perturbation size
    :param p: Translation
    :param eta: Correction map
    :param multipliers: The six frame multipliers ``lambda``
    :param alpha: The three mean-value multipliers
    :param int iterations: Residual evaluations performed
    :param bool converged: Whether the tolerance was met
    :param tuple update_norms: Sup norm of each update
    :param float residual: Sup norm of the final bordered residual
    :param float eta_w13: ``W^{1,3}`` norm of the correction
    :param SolverMode mode: Iteration used
    :param bool outside_validation: True when ``|eps|`` exceeds the perturbative ceiling
    :param context: Reduction context the state was computed in
    """

    eps = attr.ib()
    p = attr.ib(converter=vector3)
    eta = attr.ib(validator=attr.validators.instance_of(MapS2R3), repr=False)
    multipliers = attr.ib(converter=frozen_array)
    alpha = attr.ib(converter=frozen_array)
    iterations = attr.ib()
    converged = attr.ib()
    update_norms = attr.ib(converter=tuple, repr=False)
    residual = attr.ib()
    eta_w13 = attr.ib()
    mode = attr.ib(converter=SolverMode)
    outside_validation = attr.ib(default=False)
    context = attr.ib(default=None, repr=False)

    @property
    def bubble(self):
        # type: () -> MapS2R3
        """The corrected map ``u0 + p + eta``."""
        base = self.context.base if self.context is not None else base_bubble(self.eta.grid)
        return base.translated(self.p) + self.eta

    def constraint_residuals(self):
        """``(integral grad eta . grad tau_i, integral eta)`` at this state."""
        frame = self.context.frame
        dirichlet = frame.dirichlet_columns().T.dot(self.eta.flat)
        return dirichlet, _ROOT_4PI * self.eta.coeffs[:, 0]

    def as_dict(self):
        # type: () -> Dict
        return {
            "eps": self.eps,
            "p": self.p.tolist(),
            "lambda": self.multipliers.tolist(),
            "alpha": self.alpha.tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
            "update_norms": list(self.update_norms),
            "residual": self.residual,
            "eta_w13": self.eta_w13,
            "mode": self.mode.value,
            "outside_validation": self.outside_validation,
        }


def _equations(context, eps, p, field, unknowns):
    """Bordered residual ``(F1, F2)`` at ``unknowns = (eta, lambda, alpha)`` and the corrected map."""
    n = context.unknowns
    grid = context.grid
    eta = MapS2R3(grid, unknowns[:n].reshape(3, -1))
    u = context.base.translated(p) + eta
    weak, _riesz = gradient(u, eps, field, context.padding)
    dirichlet_columns = context.frame.dirichlet_columns()
    mean_columns = _mean_columns(grid)
    first = weak.reshape(-1) - dirichlet_columns.dot(unknowns[n : n + 6]) + mean_columns.dot(unknowns[n + 6 :])
    second = np.concatenate([dirichlet_columns.T.dot(unknowns[:n]), mean_columns.T.dot(unknowns[:n])])
    return np.concatenate([first, second]), u, eta


def solve_eta(
    eps,
    p,
    field,
    tol=1e-10,
    max_iter=60,
    mode=SolverMode.PICARD,
    context=None,
    eps_ceiling=Thresholds.EPS_CEILING.value,
):  # pylint: disable=too-many-locals
    # type: (float, Sequence[float], Optional[CurvatureField], float, int, SolverMode, Optional[ReductionContext], float) -> ReductionState
    """Solve for the correction ``eta(eps, p)`` and its multipliers.

    Picard mode iterates ``x <- x - L^-1 F(x)`` with the operator frozen at ``u0``; Newton mode
    rebuilds the operator around the current map at every step. Convergence is declared when
    the sup norm of the bordered residual is at most ``tol``; for ``eps = 0`` this holds at the
    first evaluation and ``eta`` is exactly zero.

    :param float eps: Perturbation size
    :param p: Translation in R^3
    :param field: Perturbation (may be None when ``eps == 0``)
    :param float tol: Residual tolerance
    :param int max_iter: Iteration budget
    :param mode: :class:`SolverMode`
    :param context: :class:`ReductionContext` (defaults to degree 16)
    :param float eps_ceiling: Perturbation size beyond which results are labeled unvalidated
    :raises NonConvergenceError: if the budget is exhausted
    :raises ContractionFailureError: if updates grow for five consecutive steps
    """
    if field is None and eps != 0:
        raise InvalidArgumentError("A curvature field is required for eps != 0")
    context = reduction_context() if context is None else context
    mode = SolverMode(mode)
    p = vector3(p)
    outside = abs(eps) > eps_ceiling
    if outside:
        _LOGGER.warning("eps=%g exceeds %g: outside perturbative validation", eps, eps_ceiling)
    n = context.unknowns
    unknowns = np.zeros(n + 9)
    update_norms = []
    growth = 0
    for iteration in range(1, max_iter + 1):
        residual, u, eta = _equations(context, eps, p, field, unknowns)
        residual_sup = float(np.max(np.abs(residual)))
        _LOGGER.debug("eta iteration %d at p=%s: residual %.3e", iteration, p.tolist(), residual_sup)
        if not np.isfinite(residual_sup):
            raise ContractionFailureError("Residual became non-finite", update_norms)
        if residual_sup <= tol:
            return ReductionState(
                eps=float(eps),
                p=p,
                eta=eta,
                multipliers=unknowns[n : n + 6],
                alpha=unknowns[n + 6 :],
                iterations=iteration,
                converged=True,
                update_norms=update_norms,
                residual=residual_sup,
                eta_w13=w1s_norm(eta, 3.0),
                mode=mode,
                outside_validation=outside,
                context=context,
            )
        operator = context.operator if mode is SolverMode.PICARD else context.linearization(u, eps, field)
        step = operator.solve(residual)
        unknowns = unknowns - step
        update = float(np.max(np.abs(step)))
        growth = growth + 1 if update_norms and update > update_norms[-1] else 0
        update_norms.append(update)
        if growth >= _GROWTH_LIMIT or not np.isfinite(update):
            raise ContractionFailureError(
                "Updates grew for {} consecutive steps at eps={}, p={}".format(_GROWTH_LIMIT, eps, p.tolist()),
                update_norms,
            )
    raise NonConvergenceError(
        "No convergence to {} in {} iterations at eps={}, p={}".format(tol, max_iter, eps, p.tolist()), update_norms
    )


def eta_equation_residual(state, field):
    # type: (ReductionState, Optional[CurvatureField]) -> float
    """L^2 norm of ``Delta eta - F(eps, p)``, both sampled on the padded grid.

    ``F = 2 (1 + eps H(u)) J(u) - Delta u0 + sum_i lambda_i Delta tau_i + alpha`` is evaluated
    pointwise without projection onto degree L, so the value also carries the truncation
    error of the correction.
    """
    context = state.context
    fine = context.grid.padded(context.padding)
    u = state.bubble
    values = u.values(fine)
    weight = np.ones(values.shape[1:])
    if state.eps != 0 and field is not None:
        weight = weight + state.eps * field.eval(np.moveaxis(values, 0, -1))
    shift = context.base.coeffs - np.tensordot(state.multipliers, context.frame.tau, axes=(0, 0))
    forcing = 2.0 * weight * area_form(u, fine).samples
    forcing = forcing - fine.synthesize_array(laplace_beltrami(SpectralField(context.grid, shift)).coeffs)
    forcing = forcing + np.asarray(state.alpha, dtype=float)[:, None, None]
    laplacian = fine.synthesize_array(laplace_beltrami(SpectralField(context.grid, state.eta.coeffs)).coeffs)
    difference = laplacian - forcing
    return math.sqrt(max(0.0, float(fine.integrate_array(np.sum(difference * difference, axis=0)))))


def _solve_options(options):
    allowed = ("tol", "max_iter", "mode", "context", "eps_ceiling")
    unknown = set(options) - set(allowed)
    if unknown:
        raise TypeError("Unexpected solver options: {}".format(", ".join(sorted(unknown))))
    return options


def _phi_of_state(state, field):
    return energy(state.bubble, state.eps, field if state.eps != 0 else None, padding=state.context.padding).total


def phi(eps, p, field, **options):
    # type: (float, Sequence[float], Optional[CurvatureField], **object) -> float
    """Reduced energy ``Phi_eps(p) = E_eps(u0 + p + eta(eps, p))``.

    Keyword options are passed to :func:`solve_eta`.
    """
    return _phi_of_state(solve_eta(eps, p, field, **_solve_options(options)), field)


@attr.s(frozen=True)
class ExpansionRow(object):
    """One perturbation size of an expansion check.

    :param float eps: Perturbation size
    :param float phi: Reduced energy
    :param float gamma: Melnikov value at the same point
    :param float remainder: ``Phi_eps - E0 + 2 eps Gamma``
    """

    eps = attr.ib()
    phi = attr.ib()
    gamma = attr.ib()
    remainder = attr.ib()

    @property
    def ratio(self):
        # type: () -> float
        """``remainder / eps^2``."""
        return self.remainder / (self.eps * self.eps)

    def as_dict(self):
        return {"eps": self.eps, "phi": self.phi, "gamma": self.gamma, "remainder": self.remainder, "ratio": self.ratio}


def expansion_check(p, field, eps_list=(1e-2, 5e-3, 2.5e-3), **options):
    # type: (Sequence[float], CurvatureField, Sequence[float], **object) -> List[ExpansionRow]
    """Second-order remainder of ``Phi_eps(p) = E0 - 2 eps Gamma(p) + O(eps^2)`` along ``eps_list``.

    :raises InvalidArgumentError: if ``eps_list`` is empty or contains zero
    """
    eps_list = [float(eps) for eps in eps_list]
    if not eps_list or any(eps == 0 for eps in eps_list):
        raise InvalidArgumentError("Expansion checks need nonzero perturbation sizes")
    gamma_value = gamma(p, field, 1.0)
    rows = []
    for eps in eps_list:
        value = phi(eps, p, field, **options)
        rows.append(
            ExpansionRow(eps=eps, phi=value, gamma=gamma_value, remainder=value - BASE_ENERGY + 2.0 * eps * gamma_value)
        )
        _LOGGER.info("Expansion at p=%s, eps=%g: remainder/eps^2 = %.6g", list(p), eps, rows[-1].ratio)
    return rows


def ratio_spread(rows):
    # type: (Sequence[ExpansionRow]) -> float
    """``max |ratio| / min |ratio|`` over expansion rows (infinite if some remainder vanishes)."""
    magnitudes = [abs(row.ratio) for row in rows]
    return float("inf") if min(magnitudes) == 0 else max(magnitudes) / min(magnitudes)


def phi_gradient_from_multipliers(state):
    # type: (ReductionState) -> np.ndarray
    """``grad Phi_eps(p) = -4 pi alpha``: only the translation multipliers survive differentiation."""
    return -4.0 * math.pi * np.asarray(state.alpha)


def _central_gradient(eps, p, field, step, options):
    gradient_values = np.zeros(3)
    for axis in range(3):
        shift = np.zeros(3)
        shift[axis] = step
        forward = phi(eps, p + shift, field, **options)
        backward = phi(eps, p - shift, field, **options)
        gradient_values[axis] = (forward - backward) / (2.0 * step)
    return gradient_values


def phi_gradient(eps, p, field, h=None, richardson=True, **options):
    # type: (float, Sequence[float], Optional[CurvatureField], Optional[float], bool, **object) -> np.ndarray
    """Central-difference gradient of :func:`phi`.

    :param float h: Step (default ``1e-4 max(1, |p|)``)
    :param bool richardson: Also difference at ``h / 2`` and warn when the two disagree
    :raises ReductionError: if a stencil solve fails
    """
    p = vector3(p)
    options = _solve_options(options)
    h = 1e-4 * max(1.0, float(np.linalg.norm(p))) if h is None else float(h)
    coarse = _central_gradient(eps, p, field, h, options)
    if richardson:
        fine = _central_gradient(eps, p, field, 0.5 * h, options)
        mismatch = float(np.linalg.norm(coarse - fine))
        if mismatch > 1e-5 * float(np.linalg.norm(fine)) + 1e-10:
            _LOGGER.warning("Reduced gradient at p=%s changes by %.3e when halving the step", p.tolist(), mismatch)
    return coarse


def phi_hessian(eps, p, field, h=1e-3, **options):
    # type: (float, Sequence[float], Optional[CurvatureField], float, **object) -> np.ndarray
    """Symmetrized central differences of the multiplier gradient."""
    p = vector3(p)
    options = _solve_options(options)
    columns = []
    for axis in range(3):
        shift = np.zeros(3)
        shift[axis] = h
        forward = phi_gradient_from_multipliers(solve_eta(eps, p + shift, field, **options))
        backward = phi_gradient_from_multipliers(solve_eta(eps, p - shift, field, **options))
        columns.append((forward - backward) / (2.0 * h))
    hessian = np.array(columns).T
    return 0.5 * (hessian + hessian.T)


def natural_constraint_residual(state, field):
    # type: (ReductionState, Optional[CurvatureField]) -> float
    """Sup norm of the full weak gradient of ``E_eps`` at the corrected map, tangent directions included."""
    weak, _riesz = gradient(state.bubble, state.eps, field, state.context.padding)
    return float(np.max(np.abs(weak)))


@attr.s(frozen=True, eq=False)
class ReducedCriticalPoint(object):
    """Critical point of the reduced energy together with its bubble.

    :param point: :class:`CriticalPoint` of ``Phi_eps``
    :param float eps: Perturbation size
    :param float gamma: Melnikov value at the point
    :param float residual_l2: L^2 residual of the H-system for the bubble
    :param state: :class:`ReductionState` at the point
    """

    point = attr.ib(validator=attr.validators.instance_of(CriticalPoint))
    eps = attr.ib()
    gamma = attr.ib()
    residual_l2 = attr.ib()
    state = attr.ib(repr=False)

    @property
    def type(self):
        return self.point.type

    def as_record(self):
        # type: () -> Dict
        """JSON-lines record of the critical point."""
        return {
            "eps": self.eps,
            "p": self.point.location.tolist(),
            "phi": self.point.value,
            "gamma": self.gamma,
            "eta_w13": self.state.eta_w13,
            "iterations": self.state.iterations,
            "type": self.point.type.value,
            "hessian_eigs": self.point.hessian_eigenvalues.tolist(),
            "residual_l2": self.residual_l2,
        }


def find_phi_critical(
    eps,
    field,
    box=(-5, 5, -5, 5, -5, 5),
    scan=9,
    threads=1,
    seeds=None,
    hessian_step=1e-3,
    gradient_tol=Thresholds.CRITICAL_GRADIENT.value,
    **options
):  # pylint: disable=too-many-locals
    # type: (float, CurvatureField, Sequence[float], int, int, Optional[Sequence], float, float, **object) -> List[ReducedCriticalPoint]
    """Locate and classify the critical points of the reduced energy over a box.

    The box is scanned on a ``scan^3`` lattice in parallel. Lattice extrema, local minima of the
    slope, midpoints between them and any user seeds start Newton iterations on the multiplier
    gradient with a finite-difference Hessian. Failing seeds are logged and skipped.

    :raises InvalidArgumentError: if ``eps == 0`` (the reduced energy is then constant)
    :raises CriticalPointSearchError: if every seed fails
    """
    if eps == 0:
        raise InvalidArgumentError("The reduced energy is constant for eps = 0")
    box = validate_box(box)
    options = _solve_options(options)
    if options.get("context") is None:
        options["context"] = reduction_context()
    _axes, points = box_points(box, scan)

    def _evaluate(point):
        try:
            state = solve_eta(eps, point, field, **options)
        except ReductionError as error:
            _LOGGER.warning("Scan point %s skipped: %s", np.round(point, 6).tolist(), error)
            return float("nan"), float("nan")
        return _phi_of_state(state, field), float(np.linalg.norm(phi_gradient_from_multipliers(state)))

    results = parallel_map(_evaluate, points, threads)
    deviations = np.array([value for value, _slope in results]) - BASE_ENERGY
    slopes = np.array([slope for _value, slope in results])
    if np.all(np.isnan(deviations)):
        raise CriticalPointSearchError("Every scan point failed; eps={} may be outside the contraction range".format(eps))
    scale = float(np.nanmax(np.abs(deviations)))
    starts = [points[index] for index in lattice_seeds(deviations, slopes, scan, floor=1e-6 * scale)]
    starts.extend(midpoint_seeds(starts))
    starts.extend(vector3(seed) for seed in (seeds or ()))
    if not starts:
        raise CriticalPointSearchError("The scan of the reduced energy produced no seeds")
    _LOGGER.info("Refining %d reduced-energy seeds at eps=%g", len(starts), eps)

    def _gradient(q):
        return phi_gradient_from_multipliers(solve_eta(eps, q, field, **options))

    def _hessian(q):
        return phi_hessian(eps, q, field, h=hessian_step, **options)

    def _refine(start):
        try:
            location = newton_critical(start, _gradient, _hessian, box, gradient_tol, step_tol=1e-9)
            if location is None:
                _LOGGER.warning("Newton refinement from seed %s diverged; skipping", np.round(start, 6).tolist())
                return None
            state = solve_eta(eps, location, field, **options)
            hessian = _hessian(location)
        except ReductionError as error:
            _LOGGER.warning("Seed %s failed: %s", np.round(start, 6).tolist(), error)
            return None
        point = CriticalPoint(
            location=location,
            value=_phi_of_state(state, field),
            gradient_norm=float(np.linalg.norm(phi_gradient_from_multipliers(state))),
            hessian_eigenvalues=np.linalg.eigvalsh(hessian),
        )
        return ReducedCriticalPoint(
            point=point,
            eps=float(eps),
            gamma=gamma(location, field, 1.0),
            residual_l2=residual_norm(state.bubble, eps, field),
            state=state,
        )

    refined = parallel_map(_refine, starts, threads)
    found = [record for record in refined if record is not None]
    if not found:
        raise CriticalPointSearchError("All {} seeds failed at eps={}".format(len(starts), eps))
    critical = deduplicate_points(found, Thresholds.DEDUPLICATION.value, key=lambda record: record.point.location)
    _LOGGER.info("Found %d critical points of the reduced energy at eps=%g", len(critical), eps)
    return critical
