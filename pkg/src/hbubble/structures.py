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
"""Common structures used by hbubble."""
import attr
import numpy as np

from hbubble.identifiers import CriticalType
from hbubble.internal.identifiers import Thresholds
from hbubble.internal.validators import frozen_array, real_validator, vector3

try:  # Only needed for type comments
    from typing import Dict  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = ("CriticalPoint", "classify_hessian")


def classify_hessian(eigenvalues):
    # type: (np.ndarray) -> CriticalType
    """Type of a critical point from its Hessian eigenvalues.

    Eigenvalues smaller than a fixed fraction of the summed magnitudes count as zero and make
    the point degenerate.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    scale = np.sum(np.abs(eigenvalues))
    if scale == 0 or np.min(np.abs(eigenvalues)) <= Thresholds.DEGENERATE_EIGENVALUE.value * scale:
        return CriticalType.DEGENERATE
    if np.all(eigenvalues > 0):
        return CriticalType.MIN
    if np.all(eigenvalues < 0):
        return CriticalType.MAX
    return CriticalType.SADDLE


@attr.s(frozen=True, eq=False)
class CriticalPoint(object):
    """A located critical point of a function of three variables.

    :param location: Point in R^3
    :param float value: Function value
    :param float gradient_norm: Gradient norm at the point
    :param hessian_eigenvalues: Sorted Hessian eigenvalues
    """

    location = attr.ib(converter=vector3)
    value = attr.ib(validator=real_validator)
    gradient_norm = attr.ib(validator=real_validator)
    hessian_eigenvalues = attr.ib(converter=lambda values: frozen_array(np.sort(values)))

    @property
    def type(self):
        # type: () -> CriticalType
        """Classification by Hessian signature."""
        return classify_hessian(self.hessian_eigenvalues)

    def as_dict(self):
        # type: () -> Dict
        """JSON-ready representation."""
        return {
            "location": self.location.tolist(),
            "value": self.value,
            "gradient_norm": self.gradient_norm,
            "hessian_eigs": self.hessian_eigenvalues.tolist(),
            "type": self.type.value,
        }
