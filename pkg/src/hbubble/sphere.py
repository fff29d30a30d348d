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
"""Discretization of the unit sphere and the surface operators built on it.

Scalar fields live either as real spherical-harmonic coefficients (:class:`SpectralField`)
or as samples on a Gauss-Legendre x uniform longitude grid (:class:`GridField`). Maps
S^2 -> R^3 (:class:`MapS2R3`) hold both representations and the intrinsic frame derivatives
``u_e1 = d_theta u`` and ``u_e2 = (1/sin theta) d_phi u``.

Coefficients are indexed by ``k = l * l + l + m`` for ``0 <= l <= L`` and ``-l <= m <= l``.
Leading array dimensions are treated as a batch, so a vector field is a ``(3, ...)`` array.
"""
import functools
import logging
import math
from threading import Lock

import attr
import numpy as np

from hbubble.exceptions import InvalidArgumentError
from hbubble.identifiers import LOGGER_NAME
from hbubble.internal.identifiers import DEFAULT_PADDING, MAX_DEGREE, MIN_DEGREE
from hbubble.internal.validators import array_shape_validator, frozen_array, vector3

try:  # Only needed for type comments
    from typing import Optional, Tuple, Union  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = (
    "QuadratureGrid",
    "SpectralField",
    "GridField",
    "FrameDerivatives",
    "MapS2R3",
    "build_grid",
    "analyze",
    "synthesize",
    "surface_gradient",
    "laplace_beltrami",
    "integrate",
    "riesz_represent",
    "evaluate",
    "omega_chart",
    "chart_dirichlet",
    "base_bubble",
    "sphere_bubble",
    "rotate_map",
)
_LOGGER = logging.getLogger(LOGGER_NAME)


def coefficient_count(degree):
    # type: (int) -> int
    """Number of real spherical-harmonic coefficients up to ``degree``."""
    return (degree + 1) ** 2


def _normalized_legendre(degree, cos_theta):
    """Orthonormal associated Legendre functions and their colatitude derivatives.

    Uses the standard three-term recurrences seeded from the sectoral terms, so it stays
    stable for high degree without factorials.

    :param int degree: Maximum degree L
    :param cos_theta: Nodes x = cos(theta) with |x| < 1
    :returns: ``(p, dp)`` arrays of shape ``(L + 1, L + 1, n)`` indexed ``[l, m, node]``
    """
    x = np.asarray(cos_theta, dtype=float)
    s = np.sqrt(1.0 - x * x)
    p = np.zeros((degree + 1, degree + 1) + x.shape)
    p[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(1, degree + 1):
        p[m, m] = math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * p[m - 1, m - 1]
    for m in range(degree):
        p[m + 1, m] = math.sqrt(2.0 * m + 3.0) * x * p[m, m]
    for m in range(degree + 1):
        for l in range(m + 2, degree + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            p[l, m] = a * (x * p[l - 1, m] - b * p[l - 2, m])

    # d/dtheta P_l^m = (l x P_l^m - sqrt((2l+1)/(2l-1) (l^2-m^2)) P_{l-1}^m) / sin(theta)
    dp = np.zeros_like(p)
    for l in range(1, degree + 1):
        for m in range(l + 1):
            lower = math.sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0) * (l * l - m * m)) * p[l - 1, m] if m < l else 0.0
            dp[l, m] = (l * x * p[l, m] - lower) / s
    return p, dp


def _trig_tables(degree, phi):
    """Azimuthal factors T_m(phi) and their derivatives, indexed ``[m + L, node]``."""
    phi = np.asarray(phi, dtype=float)
    table = np.zeros((2 * degree + 1,) + phi.shape)
    derivative = np.zeros_like(table)
    root2 = math.sqrt(2.0)
    table[degree] = 1.0
    for m in range(1, degree + 1):
        table[degree + m] = root2 * np.cos(m * phi)
        derivative[degree + m] = -root2 * m * np.sin(m * phi)
        table[degree - m] = root2 * np.sin(m * phi)
        derivative[degree - m] = root2 * m * np.cos(m * phi)
    return table, derivative


def _expand_legendre(degree, p):
    """Spread ``[l, |m|]`` Legendre tables over signed orders ``[l, m + L]``."""
    full = np.zeros((degree + 1, 2 * degree + 1) + p.shape[2:])
    for m in range(-degree, degree + 1):
        full[abs(m) :, m + degree] = p[abs(m) :, abs(m)]
    return full


@attr.s(init=False, eq=False, repr=False)
class QuadratureGrid(object):
    """Gauss-Legendre x trapezoid quadrature grid on the unit sphere.

    :param int degree: Spectral truncation L
    """

    degree = attr.ib(validator=attr.validators.instance_of(int))

    def __init__(self, degree):  # noqa=D107
        # type: (int) -> None
        self.degree = degree
        attr.validate(self)
        self.__attrs_post_init__()

    def __attrs_post_init__(self):
        # type: () -> None
        """Build nodes, weights and the frame vectors at every node."""
        degree = self.degree
        nodes, weights = np.polynomial.legendre.leggauss(degree + 1)
        # Order nodes by increasing colatitude.
        nodes = nodes[::-1]
        weights = weights[::-1]
        self.cos_theta = frozen_array(nodes)  # pylint: disable=attribute-defined-outside-init
        self.colat_nodes = frozen_array(np.arccos(nodes))  # pylint: disable=attribute-defined-outside-init
        self.colat_weights = frozen_array(weights)  # pylint: disable=attribute-defined-outside-init
        self.sin_theta = frozen_array(np.sqrt(1.0 - nodes * nodes))  # pylint: disable=attribute-defined-outside-init
        n_lon = 2 * degree + 2
        self.lon_nodes = frozen_array(2.0 * math.pi * np.arange(n_lon) / n_lon)  # pylint: disable=attribute-defined-outside-init
        self.lon_spacing = 2.0 * math.pi / n_lon  # pylint: disable=attribute-defined-outside-init

        theta, phi = np.meshgrid(self.colat_nodes, self.lon_nodes, indexing="ij")
        sin_t, cos_t = np.sin(theta), np.cos(theta)
        sin_p, cos_p = np.sin(phi), np.cos(phi)
        self.unit_points = frozen_array(  # pylint: disable=attribute-defined-outside-init
            np.stack([sin_t * cos_p, sin_t * sin_p, cos_t], axis=-1)
        )
        self.theta_hat = frozen_array(  # pylint: disable=attribute-defined-outside-init
            np.stack([cos_t * cos_p, cos_t * sin_p, -sin_t], axis=-1)
        )
        self.phi_hat = frozen_array(  # pylint: disable=attribute-defined-outside-init
            np.stack([-sin_p, cos_p, np.zeros_like(phi)], axis=-1)
        )
        self.area_weights = frozen_array(  # pylint: disable=attribute-defined-outside-init
            np.outer(self.colat_weights, np.full(n_lon, self.lon_spacing))
        )

        l_index = np.concatenate([np.full(2 * l + 1, l) for l in range(degree + 1)])
        m_index = np.concatenate([np.arange(-l, l + 1) for l in range(degree + 1)])
        self.l_index = l_index  # pylint: disable=attribute-defined-outside-init
        self.m_index = m_index  # pylint: disable=attribute-defined-outside-init
        self.l_index.setflags(write=False)
        self.m_index.setflags(write=False)
        self._tables = None  # pylint: disable=attribute-defined-outside-init
        self._tables_lock = Lock()  # pylint: disable=attribute-defined-outside-init

    def __repr__(self):
        return "QuadratureGrid(degree={})".format(self.degree)

    @property
    def shape(self):
        # type: () -> Tuple[int, int]
        """Number of colatitude and longitude nodes."""
        return (self.degree + 1, 2 * self.degree + 2)

    @property
    def coefficient_count(self):
        # type: () -> int
        """Number of spectral coefficients on this grid."""
        return coefficient_count(self.degree)

    @property
    def eigenvalues(self):
        """Laplace-Beltrami eigenvalues ``l(l+1)`` per coefficient."""
        return self.l_index * (self.l_index + 1.0)

    def padded(self, factor=DEFAULT_PADDING):
        # type: (float) -> QuadratureGrid
        """Grid of degree ``ceil(factor * L)`` used to evaluate nonlinear terms without aliasing."""
        return build_grid(int(math.ceil(factor * self.degree)), _check=False)

    def _legendre(self):
        """Lazily build the transform tables; they are shared by every transform on this grid."""
        with self._tables_lock:
            if self._tables is None:
                _LOGGER.debug("Building Legendre tables for degree %d", self.degree)
                p, dp = _normalized_legendre(self.degree, self.cos_theta)
                trig, dtrig = _trig_tables(self.degree, self.lon_nodes)
                self._tables = (  # pylint: disable=attribute-defined-outside-init
                    _expand_legendre(self.degree, p),
                    _expand_legendre(self.degree, dp),
                    trig,
                    dtrig,
                )
            return self._tables

    def _scatter(self, coeffs):
        """Place ``(..., K)`` coefficients with ``K <= (L+1)^2`` into a ``(..., l, m + L)`` array."""
        coeffs = np.asarray(coeffs, dtype=float)
        count = coeffs.shape[-1]
        if count > self.coefficient_count:
            raise InvalidArgumentError(
                "Coefficients of degree {} do not fit on a degree {} grid".format(
                    int(round(math.sqrt(count))) - 1, self.degree
                )
            )
        table = np.zeros(coeffs.shape[:-1] + (self.degree + 1, 2 * self.degree + 1))
        table[..., self.l_index[:count], self.m_index[:count] + self.degree] = coeffs
        return table

    def synthesize_array(self, coeffs):
        """Grid samples ``(..., n_theta, n_phi)`` of coefficients ``(..., K)``."""
        p, _dp, trig, _dtrig = self._legendre()
        partial = np.einsum("...lm,lmi->...mi", self._scatter(coeffs), p)
        return np.einsum("...mi,mj->...ij", partial, trig)

    def gradient_arrays(self, coeffs):
        """Frame derivatives ``(d_theta f, d_phi f / sin theta)`` of coefficients ``(..., K)``."""
        p, dp, trig, dtrig = self._legendre()
        table = self._scatter(coeffs)
        d1 = np.einsum("...mi,mj->...ij", np.einsum("...lm,lmi->...mi", table, dp), trig)
        d2 = np.einsum("...mi,mj->...ij", np.einsum("...lm,lmi->...mi", table, p), dtrig)
        return d1, d2 / self.sin_theta[:, None]

    def analyze_array(self, samples, degree=None):
        """Coefficients ``(..., (degree+1)^2)`` of grid samples ``(..., n_theta, n_phi)``.

        :param int degree: Truncation of the output (defaults to the grid degree)
        """
        p, _dp, trig, _dtrig = self._legendre()
        samples = np.asarray(samples, dtype=float)
        if samples.shape[-2:] != self.shape:
            raise InvalidArgumentError(
                "Samples of shape {} do not match a degree {} grid".format(samples.shape[-2:], self.degree)
            )
        partial = np.einsum("...ij,mj->...mi", samples, trig) * (self.lon_spacing * self.colat_weights)
        table = np.einsum("...mi,lmi->...lm", partial, p)
        count = self.coefficient_count if degree is None else coefficient_count(degree)
        return table[..., self.l_index[:count], self.m_index[:count] + self.degree]

    def integrate_array(self, samples):
        """Quadrature of ``(..., n_theta, n_phi)`` samples over the sphere."""
        return np.einsum("...ij,ij->...", np.asarray(samples, dtype=float), self.area_weights)


@functools.lru_cache(maxsize=None)
def _cached_grid(degree):
    return QuadratureGrid(degree)


def build_grid(degree, _check=True):
    # type: (int, bool) -> QuadratureGrid
    """Build (or reuse) the quadrature grid of spectral degree ``degree``.

    :param int degree: Spectral truncation L, 4 <= L <= 256
    :raises InvalidArgumentError: if the degree is out of range
    """
    if isinstance(degree, bool) or not isinstance(degree, int):
        raise TypeError("Grid degree must be an integer")
    if _check and not MIN_DEGREE <= degree <= MAX_DEGREE:
        raise InvalidArgumentError(
            "Grid degree must be between {} and {}, got {}".format(MIN_DEGREE, MAX_DEGREE, degree)
        )
    return _cached_grid(degree)


def _grid_validator(instance, attribute, value):
    # pylint: disable=unused-argument
    if not isinstance(value, QuadratureGrid):
        raise TypeError('"{}" must be a QuadratureGrid'.format(attribute.name))


@attr.s(frozen=True, eq=False)
class SpectralField(object):
    """Field on the sphere held as real spherical-harmonic coefficients.

    :param QuadratureGrid grid: Grid fixing the truncation degree
    :param coeffs: Array of shape ``(..., (L+1)^2)``
    """

    grid = attr.ib(validator=_grid_validator)
    coeffs = attr.ib(converter=frozen_array)

    @coeffs.validator
    def _check_coeffs(self, attribute, value):
        array_shape_validator(self.grid.coefficient_count)(self, attribute, value)

    @property
    def degree(self):
        # type: () -> int
        """Spectral truncation."""
        return self.grid.degree


@attr.s(frozen=True, eq=False)
class GridField(object):
    """Field on the sphere held as samples at the quadrature nodes.

    :param QuadratureGrid grid: Grid the samples live on
    :param samples: Array of shape ``(..., L + 1, 2L + 2)``
    """

    grid = attr.ib(validator=_grid_validator)
    samples = attr.ib(converter=frozen_array)

    @samples.validator
    def _check_samples(self, attribute, value):
        array_shape_validator(*self.grid.shape)(self, attribute, value)

    @property
    def degree(self):
        # type: () -> int
        """Spectral truncation of the underlying grid."""
        return self.grid.degree


@attr.s(frozen=True, eq=False)
class FrameDerivatives(object):
    """Intrinsic derivatives of a field along ``e1 = theta_hat`` and ``e2 = phi_hat / sin(theta)``.

    :param GridField d1: ``d_theta f``
    :param GridField d2: ``(1 / sin theta) d_phi f``
    """

    d1 = attr.ib(validator=attr.validators.instance_of(GridField))
    d2 = attr.ib(validator=attr.validators.instance_of(GridField))

    def gradient_squared(self):
        # type: () -> GridField
        """Pointwise ``|f_e1|^2 + |f_e2|^2``, summed over any leading components of vector fields."""
        total = self.d1.samples ** 2 + self.d2.samples ** 2
        while total.ndim > 2:
            total = total.sum(axis=0)
        return GridField(self.d1.grid, total)


def analyze(field):
    # type: (GridField) -> SpectralField
    """Spherical-harmonic coefficients of grid samples."""
    if not isinstance(field, GridField):
        raise TypeError("analyze expects a GridField")
    return SpectralField(field.grid, field.grid.analyze_array(field.samples))


def synthesize(field):
    # type: (SpectralField) -> GridField
    """Grid samples of a spectral field."""
    if not isinstance(field, SpectralField):
        raise TypeError("synthesize expects a SpectralField")
    return GridField(field.grid, field.grid.synthesize_array(field.coeffs))


def _as_spectral(field):
    if isinstance(field, SpectralField):
        return field
    if isinstance(field, GridField):
        return analyze(field)
    raise TypeError("Expected a SpectralField or GridField, got {}".format(type(field).__name__))


def surface_gradient(field):
    # type: (Union[GridField, SpectralField]) -> FrameDerivatives
    """Frame derivatives of a band-limited field at every node of its grid."""
    spectral = _as_spectral(field)
    d1, d2 = spectral.grid.gradient_arrays(spectral.coeffs)
    return FrameDerivatives(GridField(spectral.grid, d1), GridField(spectral.grid, d2))


def laplace_beltrami(field):
    # type: (SpectralField) -> SpectralField
    """Laplace-Beltrami operator: coefficient ``(l, m)`` is scaled by ``-l(l+1)``."""
    spectral = _as_spectral(field)
    return SpectralField(spectral.grid, -spectral.grid.eigenvalues * spectral.coeffs)


def integrate(field):
    """Quadrature value of a grid field (an array for vector fields)."""
    if not isinstance(field, GridField):
        raise TypeError("integrate expects a GridField")
    value = field.grid.integrate_array(field.samples)
    return float(value) if np.ndim(value) == 0 else value


def riesz_represent(field):
    # type: (Union[GridField, SpectralField]) -> SpectralField
    """Representative ``w`` of ``phi -> int f . phi`` in the ``W^{1,2}`` inner product.

    Solves ``(-Delta + 1) w = f`` by spectral division with ``l(l+1) + 1``.
    """
    spectral = _as_spectral(field)
    return SpectralField(spectral.grid, spectral.coeffs / (spectral.grid.eigenvalues + 1.0))


def evaluate(field, points, derivatives=False):
    """Evaluate a spectral field at arbitrary points of the sphere.

    :param SpectralField field: Field to evaluate
    :param points: Array ``(n, 3)`` of (not necessarily unit) directions
    :param bool derivatives: Also return the frame derivatives at the points
    :returns: values ``(..., n)``, or ``(values, d1, d2)`` if ``derivatives``
    """
    spectral = _as_spectral(field)
    degree = spectral.degree
    points = np.atleast_2d(np.asarray(points, dtype=float))
    radius = np.linalg.norm(points, axis=-1)
    cos_theta = np.clip(points[:, 2] / radius, -1.0, 1.0)
    phi = np.arctan2(points[:, 1], points[:, 0])
    p, dp = _normalized_legendre(degree, cos_theta)
    p, dp = _expand_legendre(degree, p), _expand_legendre(degree, dp)
    trig, dtrig = _trig_tables(degree, phi)
    table = spectral.grid._scatter(spectral.coeffs)  # pylint: disable=protected-access
    values = np.einsum("...lm,lmi,mi->...i", table, p, trig)
    if not derivatives:
        return values
    sin_theta = np.sqrt(1.0 - cos_theta * cos_theta)
    d1 = np.einsum("...lm,lmi,mi->...i", table, dp, trig)
    d2 = np.einsum("...lm,lmi,mi->...i", table, p, dtrig) / sin_theta
    return values, d1, d2


def omega_chart(x, y):
    """Conformal parametrization of the unit sphere from the plane.

    ``omega(x, y) = (mu x, mu y, 1 - mu)`` with ``mu = 2 / (1 + x^2 + y^2)``; the origin maps to
    the south pole and infinity to the north pole.

    :returns: tuple of points ``(..., 3)`` and conformal factors ``mu``
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mu = 2.0 / (1.0 + x * x + y * y)
    point = np.stack([mu * x, mu * y, 1.0 - mu], axis=-1)
    return point, mu


def chart_dirichlet(field, radius=200.0, n_radial=400, n_angular=64):
    # type: (SpectralField, float, int, int) -> float
    """Dirichlet integral of ``v o omega`` over the planar disk of the given radius.

    Uses ``|grad_{R^2}(v o omega)| = mu |grad_{S^2} v|``; the radial nodes are placed through
    ``r = tan(psi / 2)`` so they follow the image of the disk on the sphere.
    """
    spectral = _as_spectral(field)
    if spectral.coeffs.ndim != 1:
        raise InvalidArgumentError("chart_dirichlet expects a scalar field")
    psi_max = 2.0 * math.atan(radius)
    nodes, weights = np.polynomial.legendre.leggauss(n_radial)
    psi = 0.5 * psi_max * (nodes + 1.0)
    r = np.tan(0.5 * psi)
    dr = 0.5 * psi_max * weights * 0.5 / np.cos(0.5 * psi) ** 2
    angle = 2.0 * math.pi * np.arange(n_angular) / n_angular
    rr, aa = np.meshgrid(r, angle, indexing="ij")
    points, mu = omega_chart(rr * np.cos(aa), rr * np.sin(aa))
    _values, d1, d2 = evaluate(spectral, points.reshape(-1, 3), derivatives=True)
    chart_gradsq = (mu.reshape(-1) ** 2) * (d1 ** 2 + d2 ** 2)
    integrand = chart_gradsq.reshape(rr.shape) * rr
    return float(np.sum(integrand * dr[:, None]) * (2.0 * math.pi / n_angular))


@attr.s(frozen=True, eq=False, repr=False)
class MapS2R3(object):
    """Map from the sphere to R^3 in synchronized spectral and grid representation.

    Grid samples and frame derivatives are computed on demand for the map's own grid or for
    any finer grid (used to evaluate nonlinear terms) and cached.

    :param QuadratureGrid grid: Grid fixing the truncation degree
    :param coeffs: Array of shape ``(3, (L+1)^2)``
    """

    grid = attr.ib(validator=_grid_validator)
    coeffs = attr.ib(converter=frozen_array)
    _cache = attr.ib(init=False, factory=dict)
    _cache_lock = attr.ib(init=False, factory=Lock)

    @coeffs.validator
    def _check_coeffs(self, attribute, value):
        array_shape_validator(3, self.grid.coefficient_count)(self, attribute, value)
        if value.ndim != 2:
            raise InvalidArgumentError("Map coefficients must have shape (3, K)")

    def __repr__(self):
        return "MapS2R3(degree={}, mean={})".format(self.degree, np.round(self.mean(), 6).tolist())

    @classmethod
    def from_samples(cls, grid, samples):
        """Build a map from ``(3, n_theta, n_phi)`` samples on ``grid``."""
        return cls(grid, grid.analyze_array(samples))

    @property
    def degree(self):
        # type: () -> int
        """Spectral truncation."""
        return self.grid.degree

    @property
    def flat(self):
        """Component-major coefficient vector of length ``3 (L+1)^2``."""
        return self.coeffs.reshape(-1)

    def _target(self, grid):
        grid = self.grid if grid is None else grid
        if grid.degree < self.degree:
            raise InvalidArgumentError(
                "Cannot sample a degree {} map on a degree {} grid".format(self.degree, grid.degree)
            )
        return grid

    def values(self, grid=None):
        """Samples ``(3, n_theta, n_phi)`` on ``grid`` (default: the map's own grid)."""
        grid = self._target(grid)
        key = ("values", grid.degree)
        with self._cache_lock:
            if key not in self._cache:
                self._cache[key] = frozen_array(grid.synthesize_array(self.coeffs))
            return self._cache[key]

    def derivatives(self, grid=None):
        """Frame derivatives ``(u_e1, u_e2)``, each ``(3, n_theta, n_phi)``, on ``grid``."""
        grid = self._target(grid)
        key = ("derivatives", grid.degree)
        with self._cache_lock:
            if key not in self._cache:
                d1, d2 = grid.gradient_arrays(self.coeffs)
                self._cache[key] = (frozen_array(d1), frozen_array(d2))
            return self._cache[key]

    def frame_derivatives(self, grid=None):
        # type: (Optional[QuadratureGrid]) -> FrameDerivatives
        """Frame derivatives as a :class:`FrameDerivatives` of vector grid fields."""
        grid = self._target(grid)
        d1, d2 = self.derivatives(grid)
        return FrameDerivatives(GridField(grid, d1), GridField(grid, d2))

    def components(self):
        """The three coordinate functions as spectral fields."""
        return tuple(SpectralField(self.grid, row) for row in self.coeffs)

    def mean(self):
        """Average of the map over the sphere."""
        return self.coeffs[:, 0] / math.sqrt(4.0 * math.pi)

    def translated(self, p):
        # type: (np.ndarray) -> MapS2R3
        """The map ``u + p`` for a constant vector ``p``."""
        coeffs = np.array(self.coeffs)
        coeffs[:, 0] += math.sqrt(4.0 * math.pi) * vector3(p)
        return MapS2R3(self.grid, coeffs)

    def __add__(self, other):
        if isinstance(other, MapS2R3):
            if other.degree != self.degree:
                raise InvalidArgumentError("Cannot add maps of degree {} and {}".format(self.degree, other.degree))
            return MapS2R3(self.grid, self.coeffs + other.coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, MapS2R3):
            return self + other * -1.0
        return NotImplemented

    def __mul__(self, scale):
        return MapS2R3(self.grid, float(scale) * self.coeffs)

    __rmul__ = __mul__


def base_bubble(grid):
    # type: (QuadratureGrid) -> MapS2R3
    """The unperturbed bubble ``u0(sigma) = -sigma``, the intrinsic form of the conformal chart ``omega``."""
    return sphere_bubble(grid, 1.0)


def sphere_bubble(grid, radius, center=(0.0, 0.0, 0.0)):
    # type: (QuadratureGrid, float, Tuple[float, float, float]) -> MapS2R3
    """Round sphere ``u(sigma) = center - radius * sigma``, a solution for constant curvature ``1 / radius``."""
    samples = -float(radius) * np.moveaxis(np.asarray(grid.unit_points), -1, 0)
    return MapS2R3.from_samples(grid, samples).translated(center)


def rotate_map(u, rotation):
    # type: (MapS2R3, np.ndarray) -> MapS2R3
    """Reparametrize a map by a rotation of its domain: ``(u o R)(sigma) = u(R sigma)``.

    Rotations preserve every degree band, so the result is exact for band-limited maps.
    """
    rotation = np.asarray(rotation, dtype=float)
    if rotation.shape != (3, 3) or not np.allclose(rotation.T.dot(rotation), np.eye(3), atol=1e-12):
        raise InvalidArgumentError("rotation must be an orthogonal 3x3 matrix")
    points = np.asarray(u.grid.unit_points).reshape(-1, 3).dot(rotation.T)
    samples = evaluate(SpectralField(u.grid, u.coeffs), points).reshape((3,) + u.grid.shape)
    return MapS2R3.from_samples(u.grid, samples)
