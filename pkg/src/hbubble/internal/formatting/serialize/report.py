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
"""Tools for rendering run artifacts: JSON reports, JSON-lines records, CSV tables and OBJ meshes.

.. warning::
    No guarantee is provided on the modules and APIs within this
    namespace staying consistent. Directly reference at your own risk.
"""
import json

import numpy as np

from hbubble.exceptions import InvalidArgumentError

from . import encode_number, encode_row, to_builtin

try:  # Only needed for type comments
    from typing import Dict, Iterable, Optional, Sequence, Text  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = (
    "serialize_json",
    "serialize_records",
    "serialize_table",
    "serialize_landscape",
    "serialize_expansion",
    "serialize_node_table",
    "serialize_obj",
)
LANDSCAPE_HEADER = ("px", "py", "pz", "gamma", "gx", "gy", "gz")
EXPANSION_HEADER = ("eps", "phi", "gamma", "remainder", "ratio")
NODE_HEADER = ("theta", "phi", "x", "y", "z", "H")


def serialize_json(data):
    # type: (Dict) -> Text
    """Render a report dictionary as indented JSON with sorted keys."""
    return json.dumps(to_builtin(data), indent=2, sort_keys=True) + "\n"


def serialize_records(records):
    # type: (Iterable[Dict]) -> Text
    """Render records as JSON lines, one compact object per line."""
    return "".join(json.dumps(to_builtin(record), sort_keys=True) + "\n" for record in records)


def serialize_table(header, rows):
    # type: (Sequence[Text], Iterable[Sequence]) -> Text
    """Render a comma-separated table with a header row.

    :raises InvalidArgumentError: if a row does not match the header width
    """
    lines = [",".join(header)]
    for row in rows:
        row = list(row)
        if len(row) != len(header):
            raise InvalidArgumentError("Row of width {} does not match header {}".format(len(row), header))
        lines.append(encode_row(row))
    return "\n".join(lines) + "\n"


def serialize_landscape(points, values, gradients):
    # type: (np.ndarray, np.ndarray, np.ndarray) -> Text
    """Melnikov landscape ``px,py,pz,gamma,gx,gy,gz``."""
    rows = np.column_stack([np.asarray(points), np.asarray(values)[:, None], np.asarray(gradients)])
    return serialize_table(LANDSCAPE_HEADER, rows)


def serialize_expansion(rows):
    """Expansion-check table ``eps,phi,gamma,remainder,ratio``."""
    return serialize_table(EXPANSION_HEADER, ([row.eps, row.phi, row.gamma, row.remainder, row.ratio] for row in rows))


def serialize_node_table(theta, phi, xyz, curvature):
    # type: (np.ndarray, np.ndarray, np.ndarray, np.ndarray) -> Text
    """Per-node table ``theta,phi,x,y,z,H``."""
    rows = np.column_stack([np.asarray(theta), np.asarray(phi), np.asarray(xyz), np.asarray(curvature)])
    return serialize_table(NODE_HEADER, rows)


def serialize_obj(vertices, faces, comment=None):
    # type: (np.ndarray, np.ndarray, Optional[Text]) -> Text
    """Wavefront OBJ text of a triangle mesh with zero-based ``faces``."""
    lines = [] if comment is None else ["# {}".format(comment)]
    lines.extend("v {}".format(" ".join(encode_number(c) for c in vertex)) for vertex in np.asarray(vertices))
    lines.extend("f {} {} {}".format(*(int(index) + 1 for index in face)) for face in np.asarray(faces))
    return "\n".join(lines) + "\n"
