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
"""Verification instruments for candidate bubbles."""
import logging

import attr
import numpy as np

from hbubble.exceptions import InvalidArgumentError
from hbubble.functionals import area_form, residual_norm
from hbubble.identifiers import LOGGER_NAME, MeshFormat
from hbubble.internal.formatting.serialize.report import serialize_node_table, serialize_obj
from hbubble.internal.utils import atomic_write
from hbubble.internal.validators import real_validator
from hbubble.sphere import GridField

try:  # Only needed for type comments
    from typing import Optional, Text, Tuple  # noqa pylint: disable=unused-import
    from hbubble.fields import CurvatureField  # noqa pylint: disable=unused-import
    from hbubble.sphere import MapS2R3  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = (
    "BubbleReport",
    "w1s_norm",
    "branch_point_scan",
    "conformality_defect",
    "mean_curvature_extract",
    "mesh_arrays",
    "mesh_volume",
    "export_mesh",
    "bubble_report",
)
_LOGGER = logging.getLogger(LOGGER_NAME)
#: Nodes whose area density falls below this are treated as branch points.
_BRANCH_THRESHOLD = 1e-10


def _gradient_squared(u):
    d1, d2 = u.derivatives()
    return np.sum(d1 * d1 + d2 * d2, axis=0)


def w1s_norm(u, s=3.0):
    # type: (MapS2R3, float) -> float
    """Intrinsic ``W^{1,s}`` norm ``(integral |grad u|^s)^(1/s) + (integral |u|^s)^(1/s)``.

    :raises InvalidArgumentError: unless ``1 < s < inf``
    """
    if not 1.0 < s < float("inf"):
        raise InvalidArgumentError("Sobolev exponent must lie in (1, inf), got {}".format(s))
    values = u.values()
    gradient_part = u.grid.integrate_array(_gradient_squared(u) ** (0.5 * s))
    value_part = u.grid.integrate_array(np.sum(values * values, axis=0) ** (0.5 * s))
    return float(max(gradient_part, 0.0) ** (1.0 / s) + max(value_part, 0.0) ** (1.0 / s))


def branch_point_scan(u):
    # type: (MapS2R3) -> Tuple[float, Tuple[int, int]]
    """Smallest ``|u_e1|^2 + |u_e2|^2`` over the nodes and the ``(theta, phi)`` index where it occurs."""
    density = _gradient_squared(u)
    index = np.unravel_index(int(np.argmin(density)), density.shape)
    return float(density[index]), (int(index[0]), int(index[1]))


def conformality_defect(u):
    # type: (MapS2R3) -> float
    """``max(|e - g|, 2 |f|) / (e + g)`` maximized over the nodes.

    ``e``, ``f`` and ``g`` are the coefficients of the first fundamental form in the frame.

    :raises InvalidArgumentError: if some node is a branch point
    """
    d1, d2 = u.derivatives()
    e = np.sum(d1 * d1, axis=0)
    g = np.sum(d2 * d2, axis=0)
    f = np.sum(d1 * d2, axis=0)
    if np.min(e + g) <= _BRANCH_THRESHOLD:
        raise InvalidArgumentError("Conformality is undefined at branch points")
    return float(np.max(np.maximum(np.abs(e - g), 2.0 * np.abs(f)) / (e + g)))


def mean_curvature_extract(u):
    # type: (MapS2R3) -> GridField
    """Mean curvature read off the H-system: ``H = (Delta u . J) / (2 |J|^2)`` at each node.

    Nodes where ``|J|^2`` vanishes are near branch points; they are reported as NaN.
    """
    grid = u.grid
    laplacian = grid.synthesize_array(-grid.eigenvalues * u.coeffs)
    normal = area_form(u).samples
    density = np.sum(normal * normal, axis=0)
    flagged = density <= _BRANCH_THRESHOLD
    if np.any(flagged):
        _LOGGER.warning("%d nodes near branch points excluded from curvature extraction", int(np.sum(flagged)))
    safe = np.where(flagged, 1.0, density)
    curvature = np.sum(laplacian * normal, axis=0) / (2.0 * safe)
    return GridField(grid, np.where(flagged, np.nan, curvature))


def mesh_arrays(u):
    """Closed triangle mesh of a map: grid nodes plus one cap vertex per pole.

    Cap vertices are the longitude averages of the first and last colatitude rows. Faces are
    oriented so their normals follow ``J``.

    :returns: vertices ``(n, 3)`` and zero-based faces ``(m, 3)``
    """
    n_theta, n_phi = u.grid.shape
    values = np.moveaxis(np.asarray(u.values()), 0, -1)
    north = values[0].mean(axis=0)
    south = values[-1].mean(axis=0)
    vertices = np.vstack([values.reshape(-1, 3), north, south])
    north_index, south_index = n_theta * n_phi, n_theta * n_phi + 1

    def node(i, j):
        return i * n_phi + j % n_phi

    faces = []
    for j in range(n_phi):
        faces.append((north_index, node(0, j), node(0, j + 1)))
    for i in range(n_theta - 1):
        for j in range(n_phi):
            faces.append((node(i, j), node(i + 1, j), node(i, j + 1)))
            faces.append((node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)))
    for j in range(n_phi):
        faces.append((south_index, node(n_theta - 1, j + 1), node(n_theta - 1, j)))
    return vertices, np.array(faces, dtype=int)


def mesh_volume(u):
    # type: (MapS2R3) -> float
    """Volume enclosed by the exported mesh, by the divergence theorem over its triangles.

    Faces follow ``J``, which points inward on bubbles, so the result approximates ``-V1(u)``.
    """
    vertices, faces = mesh_arrays(u)
    a, b, c = vertices[faces[:, 0]], vertices[faces[:, 1]], vertices[faces[:, 2]]
    return float(-np.sum(np.einsum("ij,ij->i", a, np.cross(b, c))) / 6.0)


def export_mesh(u, path, mesh_format=MeshFormat.OBJ):
    # type: (MapS2R3, Text, MeshFormat) -> Text
    """Write a map as an OBJ mesh or as a node table ``theta,phi,x,y,z,H``.

    :raises ExportError: if the file cannot be written
    """
    mesh_format = MeshFormat(mesh_format)
    if mesh_format is MeshFormat.OBJ:
        vertices, faces = mesh_arrays(u)
        text = serialize_obj(vertices, faces, comment="hbubble degree {}".format(u.degree))
    else:
        theta, phi = np.meshgrid(u.grid.colat_nodes, u.grid.lon_nodes, indexing="ij")
        text = serialize_node_table(
            theta.reshape(-1),
            phi.reshape(-1),
            np.moveaxis(np.asarray(u.values()), 0, -1).reshape(-1, 3),
            mean_curvature_extract(u).samples.reshape(-1),
        )
    _LOGGER.info("Exporting %s mesh to %s", mesh_format.value, path)
    return atomic_write(path, text)


def _nonnegative(instance, attribute, value):
    real_validator(instance, attribute, value)
    if value < 0:
        raise InvalidArgumentError('"{}" must be nonnegative'.format(attribute.name))


@attr.s(frozen=True)
class BubbleReport(object):
    """Quality figures of a candidate bubble.

    :param float residual_l2: L^2 norm of the H-system residual
    :param float w13_norm: ``W^{1,3}`` norm of the correction
    :param float min_gradsq: Smallest area density; positive means no branch points on the grid
    :param float conformal_defect: Largest nodal conformality defect
    :param float curvature_error: Largest nodal deviation of the extracted curvature from ``1 + eps H(u)``
    :param float eta_c1: Largest nodal ``|eta| + |eta_e1| + |eta_e2|``
    """

    residual_l2 = attr.ib(validator=_nonnegative)
    w13_norm = attr.ib(validator=_nonnegative)
    min_gradsq = attr.ib(validator=_nonnegative)
    conformal_defect = attr.ib(validator=_nonnegative)
    curvature_error = attr.ib(validator=_nonnegative)
    eta_c1 = attr.ib(validator=_nonnegative)

    @property
    def branch_free(self):
        # type: () -> bool
        """True when no node is a branch point."""
        return self.min_gradsq > _BRANCH_THRESHOLD

    def as_dict(self):
        return {
            "residual_l2": self.residual_l2,
            "w13_norm": self.w13_norm,
            "min_gradsq": self.min_gradsq,
            "conformal_defect": self.conformal_defect,
            "curvature_error": self.curvature_error,
            "eta_c1": self.eta_c1,
            "branch_free": self.branch_free,
        }


def bubble_report(u, eps=0.0, field=None, eta=None):
    # type: (MapS2R3, float, Optional[CurvatureField], Optional[MapS2R3]) -> BubbleReport
    """Assemble the :class:`BubbleReport` of ``u`` as a solution for curvature ``1 + eps H``.

    :param u: Candidate bubble
    :param float eps: Perturbation size
    :param field: Perturbation (may be omitted when ``eps == 0``)
    :param eta: Correction relative to the translated base bubble, if any
    """
    min_gradsq, _node = branch_point_scan(u)
    branch_free = min_gradsq > _BRANCH_THRESHOLD
    if branch_free:
        defect = conformality_defect(u)
        target = np.ones(u.grid.shape)
        if eps != 0 and field is not None:
            target = target + eps * field.eval(np.moveaxis(np.asarray(u.values()), 0, -1))
        curvature_error = float(np.nanmax(np.abs(mean_curvature_extract(u).samples - target)))
    else:
        _LOGGER.warning("Branch point detected (min density %.3e); conformality and curvature undefined", min_gradsq)
        defect = curvature_error = float("inf")
    if eta is None:
        w13 = eta_c1 = 0.0
    else:
        d1, d2 = eta.derivatives()
        values = eta.values()
        nodal = (
            np.sqrt(np.sum(values * values, axis=0))
            + np.sqrt(np.sum(d1 * d1, axis=0))
            + np.sqrt(np.sum(d2 * d2, axis=0))
        )
        w13 = w1s_norm(eta, 3.0)
        eta_c1 = float(np.max(nodal))
    return BubbleReport(
        residual_l2=residual_norm(u, eps, field),
        w13_norm=w13,
        min_gradsq=min_gradsq,
        conformal_defect=defect,
        curvature_error=curvature_error,
        eta_c1=eta_c1,
    )