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
"""The Melnikov function: averages of the perturbation over balls and their critical points.

``gamma(p) = integral of H1 over the ball B(p, 1/|H0|)``. Its critical points are the first-order
locations of perturbed bubbles.
"""
import logging
import math

import attr
import numpy as np
from scipy.special import roots_jacobi

from hbubble.exceptions import InvalidArgumentError, QuadratureConvergenceError
from hbubble.identifiers import LOGGER_NAME
from hbubble.internal.identifiers import BallOrders, Thresholds
from hbubble.internal.utils import (
    box_points,
    deduplicate_points,
    lattice_seeds,
    midpoint_seeds,
    newton_critical,
    parallel_map,
    validate_box,
)
from hbubble.internal.validators import frozen_array, positive_validator, vector3
from hbubble.structures import CriticalPoint

try:  # Only needed for type comments
    from typing import Optional, Sequence, Tuple  # noqa pylint: disable=unused-import
    from hbubble.fields import CurvatureField  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = (
    "BallQuadrature",
    "MelnikovReport",
    "ball_quadrature",
    "gamma",
    "gamma_gradient",
    "gamma_hessian",
    "find_gamma_critical",
    "check_h5",
)
_LOGGER = logging.getLogger(LOGGER_NAME)
DEFAULT_ORDERS = (BallOrders.RADIAL.value, BallOrders.POLAR.value, BallOrders.AZIMUTHAL.value)


@attr.s(frozen=True, eq=False)
class BallQuadrature(object):
    """Product quadrature rule over a ball.

    :param center: Ball centre
    :param float radius: Ball radius
    :param nodes: Array ``(n, 3)`` of nodes
    :param weights: Array ``(n,)`` of weights
    :param tuple orders: ``(n_r, n_mu, n_phi)``
    """

    center = attr.ib(converter=vector3)
    radius = attr.ib(validator=positive_validator)
    nodes = attr.ib(converter=frozen_array, repr=False)
    weights = attr.ib(converter=frozen_array, repr=False)
    orders = attr.ib()

    def integrate(self, values):
        """Apply the rule to node values ``(n, ...)``."""
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))


def _check_orders(orders):
    if len(orders) != 3 or any(int(order) != order or order < 2 for order in orders):
        raise InvalidArgumentError("Quadrature orders must be three integers >= 2, got {}".format(orders))
    return tuple(int(order) for order in orders)


def ball_quadrature(p, radius, n_r=DEFAULT_ORDERS[0], n_mu=DEFAULT_ORDERS[1], n_phi=DEFAULT_ORDERS[2]):
    # type: (Sequence[float], float, int, int, int) -> BallQuadrature
    """Gauss-Jacobi in radius (weight r^2) x Gauss-Legendre in cos(theta) x trapezoid in phi.

    :raises InvalidArgumentError: if an order is below 2 or the radius is not positive
    """
    n_r, n_mu, n_phi = _check_orders((n_r, n_mu, n_phi))
    if radius <= 0:
        raise InvalidArgumentError("Ball radius must be positive, got {}".format(radius))
    center = vector3(p)
    x, w_r = roots_jacobi(n_r, 0.0, 2.0)
    r = 0.5 * radius * (x + 1.0)
    w_r = w_r * radius ** 3 / 8.0
    mu, w_mu = np.polynomial.legendre.leggauss(n_mu)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    rho = np.sqrt(1.0 - mu * mu)
    directions = np.stack(
        [
            (rho[:, None] * np.cos(phi)[None, :]).reshape(-1),
            (rho[:, None] * np.sin(phi)[None, :]).reshape(-1),
            np.repeat(mu, n_phi),
        ],
        axis=-1,
    )
    direction_weights = np.repeat(w_mu, n_phi) * (2.0 * math.pi / n_phi)
    nodes = center + (r[:, None, None] * directions[None, :, :]).reshape(-1, 3)
    weights = (w_r[:, None] * direction_weights[None, :]).reshape(-1)
    return BallQuadrature(center=center, radius=float(radius), nodes=nodes, weights=weights, orders=(n_r, n_mu, n_phi))


def _radius(h0):
    if h0 == 0:
        raise InvalidArgumentError("The unperturbed curvature H0 must be nonzero")
    return 1.0 / abs(h0)


def _refined(integrand, p, h0, orders, tol, max_doublings=2):
    """Integrate over the ball, doubling the orders until two consecutive levels agree."""
    radius = _radius(h0)
    orders = _check_orders(orders if orders is not None else DEFAULT_ORDERS)
    previous = ball_quadrature(p, radius, *orders)
    previous_value = previous.integrate(integrand(previous.nodes))
    for _ in range(max_doublings):
        orders = tuple(2 * order for order in orders)
        rule = ball_quadrature(p, radius, *orders)
        value = rule.integrate(integrand(rule.nodes))
        change = np.max(np.abs(value - previous_value))
        if change <= tol * max(1.0, float(np.max(np.abs(value)))):
            return value
        _LOGGER.debug("Ball quadrature at %s changed by %.3e at orders %s", np.asarray(p).tolist(), change, orders)
        previous_value = value
    raise QuadratureConvergenceError(
        "Ball quadrature at {} did not converge to {} (last change {:.3e})".format(np.asarray(p).tolist(), tol, change)
    )


def gamma(p, field, h0=1.0, orders=None, tol=1e-9):
    # type: (Sequence[float], CurvatureField, float, Optional[Tuple[int, int, int]], float) -> float
    """Melnikov function: integral of ``field`` over ``B(p, 1/|h0|)``.

    :raises InvalidArgumentError: if ``h0 == 0``
    :raises QuadratureConvergenceError: if order refinement does not settle
    """
    return float(_refined(field.eval, p, h0, orders, tol))


def gamma_gradient(p, field, h0=1.0, orders=None, tol=1e-9):
    # type: (Sequence[float], CurvatureField, float, Optional[Tuple[int, int, int]], float) -> np.ndarray
    """Gradient of the Melnikov function, the ball integral of ``grad H1``."""
    return np.asarray(_refined(field.grad, p, h0, orders, tol))


def gamma_hessian(p, field, h0=1.0, orders=None, tol=1e-9):
    # type: (Sequence[float], CurvatureField, float, Optional[Tuple[int, int, int]], float) -> np.ndarray
    """Hessian of the Melnikov function, the ball integral of ``Hess H1``."""
    return np.asarray(_refined(field.hess, p, h0, orders, tol))


@attr.s(frozen=True, eq=False)
class MelnikovReport(object):
    """Scan of the Melnikov function over a box and its refined critical points.

    :param box: Array ``(3, 2)`` of bounds
    :param float h0: Unperturbed curvature
    :param points: Scan nodes ``(n, 3)``
    :param values: Melnikov values at the nodes
    :param gradients: Melnikov gradients at the nodes
    :param list critical_points: Refined, deduplicated :class:`CriticalPoint` s sorted by location
    :param tuple orders: Quadrature orders of the base level
    :param bool flat: True when the landscape vanishes on the whole box
    """

    box = attr.ib(converter=frozen_array)
    h0 = attr.ib()
    points = attr.ib(converter=frozen_array, repr=False)
    values = attr.ib(converter=frozen_array, repr=False)
    gradients = attr.ib(converter=frozen_array, repr=False)
    critical_points = attr.ib()
    orders = attr.ib()
    flat = attr.ib(default=False)

    def as_dict(self):
        """JSON-ready summary (the landscape itself goes to CSV)."""
        return {
            "h0": self.h0,
            "box": self.box.reshape(-1).tolist(),
            "orders": list(self.orders),
            "flat": self.flat,
            "critical_points": [point.as_dict() for point in self.critical_points],
        }


def find_gamma_critical(field, h0=1.0, box=(-5, 5, -5, 5, -5, 5), seeds=None, scan=17, threads=1, orders=None):
    # type: (CurvatureField, float, Sequence[float], Optional[Sequence], int, int, Optional[Tuple]) -> MelnikovReport
    """Scan the Melnikov function over a box and refine its critical points by Newton's method.

    Seeds are the strict interior extrema of the scan, interior local minima of the slope, the
    midpoints between those and any user-supplied points. Seeds that diverge are logged and skipped.

    :param field: Perturbation H1
    :param float h0: Unperturbed curvature
    :param box: Six numbers ``(xmin, xmax, ymin, ymax, zmin, zmax)``
    :param seeds: Additional Newton starting points
    :param int scan: Lattice nodes per axis
    :param int threads: Worker threads for the scan
    :raises InvalidArgumentError: if the box is empty
    """
    box = validate_box(box)
    _radius(h0)
    orders = _check_orders(orders if orders is not None else DEFAULT_ORDERS)
    _axes, points = box_points(box, scan)

    def _evaluate(point):
        # Base orders only; these values just seed Newton.
        rule = ball_quadrature(point, _radius(h0), *orders)
        return float(rule.integrate(field.eval(rule.nodes))), rule.integrate(field.grad(rule.nodes))

    results = parallel_map(_evaluate, points, threads)
    values = np.array([value for value, _grad in results])
    gradients = np.array([grad for _value, grad in results])
    scale = float(np.max(np.abs(values)))
    if scale <= 1e-14:
        _LOGGER.warning("Melnikov landscape is flat on the whole box; no critical points reported")
        return MelnikovReport(box, float(h0), points, values, gradients, [], orders, flat=True)

    slopes = np.linalg.norm(gradients, axis=-1)
    starts = [points[index] for index in lattice_seeds(values, slopes, scan, floor=1e-6 * scale)]
    starts.extend(midpoint_seeds(starts))
    starts.extend(np.asarray(seed, dtype=float) for seed in (seeds or ()))
    _LOGGER.info("Refining %d Melnikov seeds", len(starts))

    def _refine(start):
        point = newton_critical(
            start,
            lambda q: gamma_gradient(q, field, h0, orders),
            lambda q: gamma_hessian(q, field, h0, orders),
            box,
            0.1 * Thresholds.CRITICAL_GRADIENT.value,
        )
        if point is None:
            _LOGGER.warning("Newton refinement from seed %s diverged; skipping", np.round(start, 6).tolist())
            return None
        hessian = gamma_hessian(point, field, h0, orders)
        value = gamma(point, field, h0, orders)
        if abs(value) < 1e-8 * scale and np.max(np.abs(hessian)) < 1e-8 * scale:
            _LOGGER.debug("Discarding flat-region point %s", np.round(point, 6).tolist())
            return None
        return CriticalPoint(
            location=point,
            value=value,
            gradient_norm=float(np.linalg.norm(gamma_gradient(point, field, h0, orders))),
            hessian_eigenvalues=np.linalg.eigvalsh(0.5 * (hessian + hessian.T)),
        )

    refined = [point for point in parallel_map(_refine, starts, threads) if point is not None]
    critical = deduplicate_points(refined, Thresholds.DEDUPLICATION.value, key=lambda point: point.location)
    _LOGGER.info("Found %d Melnikov critical points", len(critical))
    return MelnikovReport(box, float(h0), points, values, gradients, critical, orders, flat=False)


def check_h5(field, h0, p1, p2):
    # type: (CurvatureField, float, Sequence[float], Sequence[float]) -> Tuple[float, float, bool]
    """Hypothesis (H5): the Melnikov function is positive at ``p1`` and negative at ``p2``."""
    gamma1 = gamma(p1, field, h0)
    gamma2 = gamma(p2, field, h0)
    return gamma1, gamma2, bool(gamma1 > 0 and gamma2 < 0)
