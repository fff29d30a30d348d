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
"""Functional tests for ``hbubble.diagnostics``."""
import io
import math

import numpy as np
import pytest

from hbubble.diagnostics import (
    BubbleReport,
    branch_point_scan,
    bubble_report,
    conformality_defect,
    export_mesh,
    mean_curvature_extract,
    mesh_arrays,
    mesh_volume,
    w1s_norm,
)
from hbubble.exceptions import InvalidArgumentError
from hbubble.identifiers import MeshFormat
from hbubble.reduction import solve_eta
from hbubble.sphere import MapS2R3, sphere_bubble

from .functional_test_utils import context8, grid8, grid16, pair_field, u0_8, u0_16  # noqa pylint: disable=unused-import

pytestmark = [pytest.mark.functional, pytest.mark.local]


def _stretched(grid, a):
    """The map ``(a x, y, z)``, conformal only for ``a = 1``."""
    samples = np.moveaxis(np.asarray(grid.unit_points), -1, 0) * np.array([a, 1.0, 1.0])[:, None, None]
    return MapS2R3.from_samples(grid, samples)


def _folded(grid):
    """The map ``(z^2, 0, 0)``, singular along the equator."""
    samples = np.zeros((3,) + grid.shape)
    samples[0] = np.asarray(grid.unit_points)[..., 2] ** 2
    return MapS2R3.from_samples(grid, samples)


@pytest.mark.parametrize(
    "s, expected",
    (
        (3.0, (4.0 * math.pi * 2.0 ** 1.5) ** (1.0 / 3.0) + (4.0 * math.pi) ** (1.0 / 3.0)),
        (2.0, math.sqrt(8.0 * math.pi) + math.sqrt(4.0 * math.pi)),
    ),
)
def test_w1s_norm_of_base_bubble(u0_16, s, expected):
    assert w1s_norm(u0_16, s) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("s", (1.0, 0.5, float("inf")))
def test_w1s_norm_rejects_exponent(u0_8, s):
    with pytest.raises(InvalidArgumentError) as excinfo:
        w1s_norm(u0_8, s)

    excinfo.match("Sobolev exponent")


def test_branch_point_scan(u0_8):
    density, node = branch_point_scan(u0_8)

    assert density == pytest.approx(2.0, rel=1e-12)
    assert 0 <= node[0] < u0_8.grid.shape[0]


def test_folded_map_has_branch_points(grid8):
    u = _folded(grid8)

    density, node = branch_point_scan(u)

    assert density < 1e-20
    # Odd Gauss-Legendre order puts a node row on the equator
    assert node[0] == grid8.degree // 2
    with pytest.raises(InvalidArgumentError) as excinfo:
        conformality_defect(u)
    excinfo.match("branch points")


def test_folded_map_report(grid8):
    report = bubble_report(_folded(grid8))

    assert not report.branch_free
    assert report.conformal_defect == float("inf")
    assert report.curvature_error == float("inf")


def test_small_correction_keeps_immersion(context8, pair_field):
    state = solve_eta(0.01, (2.0, 0.0, 0.0), pair_field, context=context8)

    density, _node = branch_point_scan(state.bubble)

    assert density >= 1.5


def test_conformality_defect(u0_8, grid8):
    assert conformality_defect(u0_8) < 1e-12
    assert 0.05 < conformality_defect(_stretched(grid8, 1.1)) < 0.15


@pytest.mark.parametrize("radius", (1.0, 2.0, 0.5))
def test_mean_curvature_of_spheres(grid16, radius):
    curvature = mean_curvature_extract(sphere_bubble(grid16, radius, center=(1.0, -1.0, 0.5))).samples

    assert np.allclose(curvature, 1.0 / radius, rtol=1e-10)


def test_mean_curvature_flags_branch_points(grid8):
    curvature = mean_curvature_extract(_folded(grid8)).samples

    assert np.all(np.isnan(curvature[grid8.degree // 2]))


def test_mesh_counts(u0_16):
    vertices, faces = mesh_arrays(u0_16)

    assert vertices.shape == (17 * 34 + 2, 3)
    assert faces.shape == (1156, 3)
    assert faces.min() == 0
    assert faces.max() == 579


def test_mesh_volume(u0_16):
    assert mesh_volume(u0_16) == pytest.approx(4.0 * math.pi / 3.0, rel=0.02)


def test_export_obj(tmpdir, u0_16):
    path = str(tmpdir.join("bubble.obj"))

    assert export_mesh(u0_16, path) == path

    with io.open(path, encoding="utf-8") as stream:
        lines = stream.read().splitlines()
    assert lines[0] == "# hbubble degree 16"
    assert sum(line.startswith("v ") for line in lines) == 580
    assert sum(line.startswith("f ") for line in lines) == 1156


def test_export_node_table(tmpdir, u0_8):
    path = str(tmpdir.join("out", "bubble.csv"))

    export_mesh(u0_8, path, MeshFormat.CSV)

    with io.open(path, encoding="utf-8") as stream:
        lines = stream.read().splitlines()
    assert lines[0] == "theta,phi,x,y,z,H"
    assert len(lines) == 1 + 9 * 18
    curvature = np.array([float(line.split(",")[-1]) for line in lines[1:]])
    assert np.allclose(curvature, 1.0, rtol=1e-10)


def test_bubble_report_of_base_bubble(u0_16):
    report = bubble_report(u0_16)

    assert report.branch_free
    assert report.residual_l2 < 1e-12
    assert report.w13_norm == 0.0
    assert report.conformal_defect < 1e-12
    assert report.curvature_error < 1e-10
    assert set(report.as_dict()) == {
        "residual_l2",
        "w13_norm",
        "min_gradsq",
        "conformal_defect",
        "curvature_error",
        "eta_c1",
        "branch_free",
    }


def test_bubble_report_of_corrected_bubble(context8, pair_field):
    state = solve_eta(0.01, (2.0, 0.0, 0.0), pair_field, context=context8)

    report = bubble_report(state.bubble, 0.01, pair_field, eta=state.eta)

    assert report.branch_free
    assert report.w13_norm == pytest.approx(state.eta_w13)
    assert 0 < report.eta_c1 < 1.0


def test_bubble_report_rejects_negative():
    with pytest.raises(InvalidArgumentError) as excinfo:
        BubbleReport(
            residual_l2=0.0, w13_norm=0.0, min_gradsq=-1.0, conformal_defect=0.0, curvature_error=0.0, eta_c1=0.0
        )

    excinfo.match('"min_gradsq" must be nonnegative')
