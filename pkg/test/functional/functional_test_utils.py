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
"""Helper tools for functional tests."""
import numpy as np
import pytest

from hbubble.fields import gaussian_bump, linear_combination, radial_well
from hbubble.reduction import reduction_context
from hbubble.sphere import base_bubble, build_grid

#: Degree used by the reduction tests; dense operators stay small.
REDUCTION_DEGREE = 8


def bump_pair(offset=3.0, width=1.0):
    return linear_combination(
        [
            (1.0, gaussian_bump(1.0, (offset, 0.0, 0.0), width)),
            (-1.0, gaussian_bump(1.0, (-offset, 0.0, 0.0), width)),
        ]
    )


def rotation_about(axis, angle):
    """Rotation matrix by ``angle`` about a unit ``axis`` (Rodrigues)."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    cross = np.array([[0.0, -axis[2], axis[1]], [axis[2], 0.0, -axis[0]], [-axis[1], axis[0], 0.0]])
    return np.eye(3) + np.sin(angle) * cross + (1.0 - np.cos(angle)) * cross.dot(cross)


@pytest.fixture
def grid8():
    return build_grid(8)


@pytest.fixture
def grid16():
    return build_grid(16)


@pytest.fixture
def u0_8(grid8):
    return base_bubble(grid8)


@pytest.fixture
def u0_16(grid16):
    return base_bubble(grid16)


@pytest.fixture
def single_bump():
    return gaussian_bump(1.0, (0.0, 0.0, 0.0), 1.0)


@pytest.fixture
def pair_field():
    return bump_pair()


@pytest.fixture
def well():
    return radial_well()


@pytest.fixture
def context8():
    return reduction_context(REDUCTION_DEGREE)
