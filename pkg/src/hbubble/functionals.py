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
"""Energy functional of the H-system and its differentials.

For a map ``u`` of the sphere with area-form vector ``J(u) = u_e1 x u_e2``:

* ``D(u) = integral |grad u|^2``
* ``V1(u) = (1/3) integral u . J(u)``
* ``V_H(u) = integral Q(u) . J(u)`` for any ``Q`` with ``div Q = H``
* ``E_eps(u) = D(u) / 2 + 2 V1(u) + 2 eps V_H(u)``

Critical points of ``E_eps`` solve ``Delta u = 2 (1 + eps H(u)) J(u)``. Weak-form vectors are
pairings against the product basis ``Y_k e_a`` and are stored as ``(3, (L+1)^2)`` arrays.
"""
import functools
import logging
import math

import attr
import numpy as np

from hbubble.exceptions import InvalidArgumentError, QuadratureConvergenceError
from hbubble.identifiers import LOGGER_NAME
from hbubble.internal.identifiers import DEFAULT_PADDING, MAX_DENSE_DEGREE
from hbubble.internal.validators import frozen_array, real_validator
from hbubble.melnikov import gamma
from hbubble.sphere import GridField, MapS2R3, base_bubble, build_grid

try:  # Only needed for type comments
    from typing import Optional, Tuple  # noqa pylint: disable=unused-import
    from hbubble.fields import CurvatureField  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = (
    "MapS2R3",
    "EnergyBreakdown",
    "area_form",
    "dirichlet",
    "volume_v1",
    "weighted_volume",
    "gauss_green_oracle",
    "energy",
    "residual",
    "residual_norm",
    "gradient",
    "second_variation_apply",
    "assemble_e0_hessian",
    "assemble_hessian",
)
_LOGGER = logging.getLogger(LOGGER_NAME)
_GAUGE_START_ORDER = 16
_GAUGE_MAX_ORDER = 1024
_ASSEMBLY_CHUNK = 96


def _cross(a, b):
    """Cross product over the component axis ``-3`` of ``(..., 3, n_theta, n_phi)`` arrays."""
    return np.stack(
        [
            a[..., 1, :, :] * b[..., 2, :, :] - a[..., 2, :, :] * b[..., 1, :, :],
            a[..., 2, :, :] * b[..., 0, :, :] - a[..., 0, :, :] * b[..., 2, :, :],
            a[..., 0, :, :] * b[..., 1, :, :] - a[..., 1, :, :] * b[..., 0, :, :],
        ],
        axis=-3,
    )


def _points(samples):
    """``(3, n_theta, n_phi)`` map samples as ``(n_theta, n_phi, 3)`` points of R^3."""
    return np.moveaxis(np.asarray(samples), 0, -1)


def _padded(u, padding):
    return u.grid.padded(padding)


def _area_form_array(u, grid=None):
    d1, d2 = u.derivatives(grid)
    return _cross(d1, d2)


def area_form(u, grid=None):
    # type: (MapS2R3, Optional[object]) -> GridField
    """Area-form vector ``J(u) = u_e1 x u_e2`` at the nodes of ``grid`` (default: the map's own grid).

    ``J`` is the unnormalized normal; for the base bubble it is ``-u0``, the inward unit normal
    of the image sphere, matching the face orientation of :func:`hbubble.diagnostics.mesh_arrays`.
    """
    grid = u.grid if grid is None else grid
    return GridField(grid, _area_form_array(u, grid))


def dirichlet(u):
    # type: (MapS2R3) -> float
    """Dirichlet integral ``integral |u_e1|^2 + |u_e2|^2`` by quadrature on the map's own grid."""
    d1, d2 = u.derivatives()
    return float(u.grid.integrate_array(np.sum(d1 * d1 + d2 * d2, axis=0)))


def volume_v1(u, padding=DEFAULT_PADDING):
    # type: (MapS2R3, float) -> float
    """Algebraic volume ``(1/3) integral u . J(u)``, exact on the padded grid for band-limited maps."""
    grid = _padded(u, padding)
    values = u.values(grid)
    return float(grid.integrate_array(np.sum(values * _area_form_array(u, grid), axis=0)) / 3.0)


def _gauge(points, field, axis, tol):
    """Antiderivative ``q(x) = integral_0^{x_axis} H(x with x_axis -> t) dt`` at every point.

    Gauss-Legendre on ``t = s x_axis``, doubling the order until consecutive levels agree.
    """
    points = np.asarray(points, dtype=float)
    extent = points[..., axis]
    previous = None
    order = _GAUGE_START_ORDER
    while order <= _GAUGE_MAX_ORDER:
        nodes, weights = np.polynomial.legendre.leggauss(order)
        s = 0.5 * (nodes + 1.0)
        stretched = np.repeat(points[..., None, :], order, axis=-2)
        stretched[..., axis] = s * extent[..., None]
        current = extent * np.einsum("...j,j->...", field.eval(stretched), 0.5 * weights)
        if previous is not None:
            change = float(np.max(np.abs(current - previous)))
            if change <= tol * max(1.0, float(np.max(np.abs(current)))):
                return current
        previous = current
        order *= 2
    raise QuadratureConvergenceError(
        "Gauge quadrature did not reach {} with {} nodes (last change {:.3e})".format(tol, _GAUGE_MAX_ORDER, change)
    )


def weighted_volume(u, field, axis=2, tol=1e-12, padding=DEFAULT_PADDING):
    # type: (MapS2R3, CurvatureField, int, float, float) -> float
    """Weighted volume ``V_H(u) = integral Q(u) . J(u)`` with the gauge ``Q = q e_axis``.

    The value does not depend on the gauge axis; comparing axes is a useful check.

    :param int axis: Coordinate axis of the gauge (0, 1 or 2)
    :raises InvalidArgumentError: if ``axis`` is not a coordinate axis
    :raises QuadratureConvergenceError: if the gauge antiderivative does not converge
    """
    if axis not in (0, 1, 2):
        raise InvalidArgumentError("Gauge axis must be 0, 1 or 2, got {}".format(axis))
    grid = _padded(u, padding)
    q = _gauge(_points(u.values(grid)), field, axis, tol)
    return float(grid.integrate_array(q * _area_form_array(u, grid)[axis]))


def gauss_green_oracle(p, field, tol=1e-10):
    # type: (np.ndarray, CurvatureField, float) -> float
    """``-integral_{B(p, 1)} H``, which equals ``V_H`` of the unit bubble translated by ``p``."""
    return -gamma(p, field, 1.0, tol=tol)


@attr.s(frozen=True)
class EnergyBreakdown(object):
    """Terms of ``E_eps(u)``.

    :param float dirichlet_half: Half the Dirichlet integral
    :param float v1: Algebraic volume
    :param float vh: Weighted volume (0 without a field)
    :param float eps: Perturbation size
    """

    dirichlet_half = attr.ib(validator=real_validator)
    v1 = attr.ib(validator=real_validator)
    vh = attr.ib(validator=real_validator)
    eps = attr.ib(validator=real_validator)

    @property
    def total(self):
        # type: () -> float
        """``E_eps(u)``."""
        return self.dirichlet_half + 2.0 * self.v1 + 2.0 * self.eps * self.vh

    def as_dict(self):
        return {
            "dirichlet_half": self.dirichlet_half,
            "v1": self.v1,
            "vh": self.vh,
            "eps": self.eps,
            "total": self.total,
        }


def energy(u, eps, field=None, tol=1e-12, padding=DEFAULT_PADDING):
    # type: (MapS2R3, float, Optional[CurvatureField], float, float) -> EnergyBreakdown
    """Evaluate ``E_eps(u)``; ``field`` may be omitted when ``eps == 0``.

    :raises InvalidArgumentError: if ``eps != 0`` and no field is given
    """
    if field is None and eps != 0:
        raise InvalidArgumentError("A curvature field is required for eps != 0")
    vh = 0.0 if field is None else weighted_volume(u, field, tol=tol, padding=padding)
    return EnergyBreakdown(
        dirichlet_half=0.5 * dirichlet(u), v1=volume_v1(u, padding), vh=vh, eps=float(eps)
    )


def _weight(values, eps, field):
    """Pointwise ``1 + eps H(u)``."""
    if eps == 0 or field is None:
        return np.ones(values.shape[1:])
    return 1.0 + eps * field.eval(_points(values))


def residual(u, eps=0.0, field=None):
    # type: (MapS2R3, float, Optional[CurvatureField]) -> GridField
    """Nodewise residual ``Delta u - 2 (1 + eps H(u)) J(u)`` of the H-system on the map's own grid."""
    grid = u.grid
    laplacian = grid.synthesize_array(-grid.eigenvalues * u.coeffs)
    weight = _weight(u.values(), eps, field)
    return GridField(grid, laplacian - 2.0 * weight * _area_form_array(u))


def residual_norm(u, eps=0.0, field=None):
    # type: (MapS2R3, float, Optional[CurvatureField]) -> float
    """L^2 norm of :func:`residual` over the sphere."""
    samples = residual(u, eps, field).samples
    return math.sqrt(max(0.0, float(u.grid.integrate_array(np.sum(samples * samples, axis=0)))))


def _nonlinear_coeffs(u, eps, field, padding):
    """Projection of ``2 (1 + eps H(u)) J(u)`` onto degree ``L``, evaluated on the padded grid."""
    grid = _padded(u, padding)
    weight = _weight(u.values(grid), eps, field)
    return grid.analyze_array(2.0 * weight * _area_form_array(u, grid), degree=u.degree)


def gradient(u, eps=0.0, field=None, padding=DEFAULT_PADDING):
    # type: (MapS2R3, float, Optional[CurvatureField], float) -> Tuple[np.ndarray, MapS2R3]
    """First variation of ``E_eps`` at ``u``.

    :returns: weak-form vector ``<E'(u), Y_k e_a>`` of shape ``(3, (L+1)^2)`` and its Riesz
        representative in the ``W^{1,2}`` inner product
    """
    weak = u.grid.eigenvalues * u.coeffs + _nonlinear_coeffs(u, eps, field, padding)
    return weak, MapS2R3(u.grid, weak / (u.grid.eigenvalues + 1.0))


def _second_variation_coeffs(u, directions, eps, field, padding):
    """Rows ``<E''(u) v, Y_k e_a>`` for a batch of directions ``(..., 3, (L+1)^2)``."""
    grid = _padded(u, padding)
    directions = np.asarray(directions, dtype=float)
    u_d1, u_d2 = u.derivatives(grid)
    v_d1, v_d2 = grid.gradient_arrays(directions)
    values = u.values(grid)
    integrand = _weight(values, eps, field) * (_cross(v_d1, u_d2) + _cross(u_d1, v_d2))
    if eps != 0 and field is not None:
        grad_h = np.moveaxis(field.grad(_points(values)), -1, 0)
        v_values = grid.synthesize_array(directions)
        integrand = integrand + eps * np.sum(grad_h * v_values, axis=-3)[..., None, :, :] * _cross(u_d1, u_d2)
    return u.grid.eigenvalues * directions + 2.0 * grid.analyze_array(integrand, degree=u.degree)


def second_variation_apply(u, v, eps=0.0, field=None, padding=DEFAULT_PADDING):
    # type: (MapS2R3, MapS2R3, float, Optional[CurvatureField], float) -> np.ndarray
    """Weak-form vector ``<E''_eps(u) v, Y_k e_a>``, shape ``(3, (L+1)^2)``.

    :raises InvalidArgumentError: if ``u`` and ``v`` have different degrees
    """
    if v.degree != u.degree:
        raise InvalidArgumentError("Direction of degree {} does not match map of degree {}".format(v.degree, u.degree))
    return _second_variation_coeffs(u, v.coeffs, eps, field, padding)


def _check_dense(degree):
    if degree > MAX_DENSE_DEGREE:
        raise InvalidArgumentError(
            "Dense operators are limited to degree {}, got {}".format(MAX_DENSE_DEGREE, degree)
        )


def _assemble(u, eps, field, padding):
    size = 3 * u.grid.coefficient_count
    matrix = np.empty((size, size))
    for start in range(0, size, _ASSEMBLY_CHUNK):
        stop = min(size, start + _ASSEMBLY_CHUNK)
        directions = np.zeros((stop - start, size))
        directions[np.arange(stop - start), np.arange(start, stop)] = 1.0
        rows = _second_variation_coeffs(u, directions.reshape(stop - start, 3, -1), eps, field, padding)
        matrix[:, start:stop] = rows.reshape(stop - start, size).T
    return matrix


@functools.lru_cache(maxsize=8)
def _cached_e0_hessian(degree, padding):
    _LOGGER.info("Assembling the unperturbed Hessian at degree %d", degree)
    return frozen_array(_assemble(base_bubble(build_grid(degree)), 0.0, None, padding))


def assemble_e0_hessian(grid, padding=DEFAULT_PADDING):
    """Dense matrix of ``E''_0`` at the base bubble in the component-major product basis.

    The result is cached per degree and read-only.

    :raises InvalidArgumentError: if the degree exceeds the dense assembly limit
    """
    _check_dense(grid.degree)
    return _cached_e0_hessian(grid.degree, float(padding))


def assemble_hessian(u, eps=0.0, field=None, padding=DEFAULT_PADDING):
    # type: (MapS2R3, float, Optional[CurvatureField], float) -> np.ndarray
    """Dense matrix of ``E''_eps(u)`` in the component-major product basis.

    :raises InvalidArgumentError: if the degree exceeds the dense assembly limit
    """
    _check_dense(u.degree)
    return _assemble(u, eps, field, padding)
