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
"""Exception classes for use in hbubble."""


class HBubbleError(Exception):
    """Base class for all custom exceptions."""


class InvalidArgumentError(HBubbleError, ValueError):
    """Raised when a general invalid argument is provided."""


class QuadratureConvergenceError(HBubbleError):
    """Raised when an adaptive quadrature does not reach its tolerance."""


class FrameBreakdownError(HBubbleError):
    """Raised when the tangent directions of the critical manifold are numerically dependent."""


class FactorizationError(HBubbleError):
    """Raised when the bordered linear operator cannot be factorized."""


class ReductionError(HBubbleError):
    """Otherwise undifferentiated errors encountered while building the correction term.

    :param str message: Description of the failure
    :param list update_norms: Update norm recorded at each iteration before failing
    """

    def __init__(self, message, update_norms=()):
        super(ReductionError, self).__init__(message)
        self.update_norms = list(update_norms)


class NonConvergenceError(ReductionError):
    """Raised when the fixed-point iteration exhausts its iteration budget."""


class ContractionFailureError(ReductionError):
    """Raised when the fixed-point updates grow, signalling a perturbation outside the contraction range."""


class CriticalPointSearchError(HBubbleError):
    """Raised when every seed of a critical-point search fails."""


class HypothesisCheckError(HBubbleError):
    """Raised when a scenario's hypotheses do not hold.

    :param str message: Description of the failure
    :param report: Hypothesis report that failed
    """

    def __init__(self, message, report=None):
        super(HypothesisCheckError, self).__init__(message)
        self.report = report


class ConfigurationError(HBubbleError):
    """Raised when a run configuration cannot be parsed or validated.

    :param str message: Description of the failure
    :param int line_number: 1-based line of the offending entry, if known
    """

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = "line {}: {}".format(line_number, message)
        super(ConfigurationError, self).__init__(message)
        self.line_number = line_number


class FieldSyntaxError(ConfigurationError):
    """Raised when a curvature field description cannot be parsed."""


class ExportError(HBubbleError):
    """Otherwise undifferentiated error encountered while writing an artifact."""
