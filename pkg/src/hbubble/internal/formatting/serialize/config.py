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
"""Rendering of run configurations.

.. warning::
    No guarantee is provided on the modules and APIs within this
    namespace staying consistent. Directly reference at your own risk.
"""
from hbubble.fields import format_field

from . import encode_number, encode_row

try:  # Only needed for type comments
    from typing import Text  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = ("serialize_config",)


def serialize_config(config):
    # type: (hbubble.config.RunConfig) -> Text
    """Render a configuration as ``key = value`` lines followed by the field block.

    :raises InvalidArgumentError: if the field has no description-language form
    """
    lines = [
        "degree = {}".format(config.degree),
        "h0 = {}".format(encode_number(config.h0)),
        "eps = {}".format(encode_number(config.eps)),
        "eps_list = {}".format(encode_row(config.eps_list)),
        "p = {}".format(encode_row(config.p)),
        "box = {}".format(encode_row(config.box)),
        "scan = {}".format(config.scan),
        "gamma_scan = {}".format(config.gamma_scan),
        "solver_tol = {}".format(encode_number(config.solver_tol)),
        "quadrature_tol = {}".format(encode_number(config.quadrature_tol)),
        "max_iter = {}".format(config.max_iter),
        "mode = {}".format(config.mode.value),
        "threads = {}".format(config.threads),
        "seed = {}".format(config.seed),
        "padding = {}".format(encode_number(config.padding)),
        "out = {}".format(config.out),
        "scenario = {}".format("none" if config.scenario is None else config.scenario.value),
        "mesh_format = {}".format(config.mesh_format.value),
    ]
    if config.field is not None:
        lines.extend(["field:", format_field(config.field), "end"])
    return "\n".join(lines) + "\n"
