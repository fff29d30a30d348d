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
"""Helper functions for serializing values.

.. warning::
    No guarantee is provided on the modules and APIs within this
    namespace staying consistent. Directly reference at your own risk.
"""
import numpy as np

try:  # Only needed for type comments
    from typing import Any, Iterable, Text  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = ("encode_number", "encode_row", "to_builtin")


def encode_number(value):
    # type: (float) -> Text
    """Encodes a real number so that parsing it back gives the same float.

    :param float value: Value to encode
    :returns: Shortest round-tripping representation
    :rtype: str
    """
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def encode_row(values):
    # type: (Iterable) -> Text
    """Encodes one comma-separated row of numbers."""
    return ",".join(encode_number(value) for value in values)


def to_builtin(value):
    # type: (Any) -> Any
    """Recursively converts numpy scalars, arrays and enums into JSON-ready builtins.

    Non-finite floats become strings ``"inf"``, ``"-inf"`` or ``"nan"``, which strict JSON lacks.
    """
    if isinstance(value, dict):
        return {str(key): to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else repr(value)
    if hasattr(value, "value") and hasattr(type(value), "__members__"):
        return value.value
    return value
