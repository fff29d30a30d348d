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
"""Numerical constants for internal use only.

.. warning::
    No guarantee is provided on the modules and APIs within this
    namespace staying consistent. Directly reference at your own risk.
"""
from enum import Enum

__all__ = (
    "TEXT_ENCODING",
    "MIN_DEGREE",
    "MAX_DEGREE",
    "MAX_DENSE_DEGREE",
    "DEFAULT_PADDING",
    "KERNEL_DIMENSION",
    "BallOrders",
    "Thresholds",
)

#: Encoding to use for all text artifacts.
TEXT_ENCODING = "utf-8"

MIN_DEGREE = 4
MAX_DEGREE = 256
#: Largest degree for which dense operators are assembled.
MAX_DENSE_DEGREE = 48
#: Nonlinear terms are evaluated on a grid of degree ceil(DEFAULT_PADDING * L).
DEFAULT_PADDING = 1.5
#: Dimension of the critical manifold of the unperturbed energy.
KERNEL_DIMENSION = 9


class BallOrders(Enum):
    """Default product-rule orders for quadrature over balls."""

    RADIAL = 24
    POLAR = 24
    AZIMUTHAL = 48


class Thresholds(Enum):
    """Acceptance thresholds shared between modules."""

    #: Hypothesis (H1): far-field maximum relative to near-field maximum.
    DECAY_RATIO = 1e-3
    #: Critical points with gradient norm above this are rejected.
    CRITICAL_GRADIENT = 1e-8
    #: Hessian eigenvalues below this fraction of the trace magnitude count as zero.
    DEGENERATE_EIGENVALUE = 1e-6
    #: Critical points closer than this are merged.
    DEDUPLICATION = 1e-4
    #: Singular values below this fraction of the largest span the numerical kernel.
    KERNEL_RELATIVE = 1e-8
    #: Condition estimate above which the bordered operator is rejected.
    MAX_CONDITION = 1e8
    #: Perturbation size beyond which results are not validated.
    EPS_CEILING = 0.2
