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
"""Numerical laboratory for perturbed H-bubbles."""
from hbubble.diagnostics import bubble_report
from hbubble.fields import CurvatureField, check_hypotheses, gaussian_bump, normalize_h0, parse_field, radial_well
from hbubble.functionals import energy, gradient, residual
from hbubble.identifiers import __version__
from hbubble.melnikov import find_gamma_critical, gamma
from hbubble.reduction import find_phi_critical, phi, solve_eta
from hbubble.sphere import MapS2R3, base_bubble, build_grid

__all__ = (
    "CurvatureField",
    "MapS2R3",
    "base_bubble",
    "bubble_report",
    "build_grid",
    "check_hypotheses",
    "energy",
    "find_gamma_critical",
    "find_phi_critical",
    "gamma",
    "gaussian_bump",
    "gradient",
    "normalize_h0",
    "parse_field",
    "phi",
    "radial_well",
    "residual",
    "solve_eta",
    "__version__",
)
