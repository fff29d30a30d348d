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
"""Unique identifiers used by hbubble."""
from enum import Enum

__all__ = ("LOGGER_NAME", "DecayHint", "CriticalType", "SolverMode", "MeshFormat", "Scenario")
__version__ = "0.3.1"

LOGGER_NAME = "hbubble"


class DecayHint(Enum):
    """Behavior of a curvature perturbation at infinity.

    Members are ordered from strongest to weakest decay; combinations take the weakest.
    """

    COMPACT_LIKE = 0
    DECAYING = 1
    NONDECAYING = 2

    def __lt__(self, other):
        # type: (DecayHint) -> bool
        """Order hints by decay strength."""
        return self.value < other.value


class CriticalType(Enum):
    """Classification of a critical point by the signs of its Hessian eigenvalues."""

    MIN = "min"
    MAX = "max"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"

    def flipped(self):
        # type: () -> CriticalType
        """Type of the same critical point of the negated function."""
        return {CriticalType.MIN: CriticalType.MAX, CriticalType.MAX: CriticalType.MIN}.get(self, self)


class SolverMode(Enum):
    """Iteration used to build the correction term of the reduction."""

    PICARD = "picard"
    NEWTON = "newton"


class MeshFormat(Enum):
    """Supported mesh export formats."""

    OBJ = "obj"
    CSV = "csv"


class Scenario(Enum):
    """Shipped multiplicity experiments."""

    THM1 = "thm1"
    THM2 = "thm2"
    THM3 = "thm3"
    REMARK2 = "remark2"
    REMARK3 = "remark3"
