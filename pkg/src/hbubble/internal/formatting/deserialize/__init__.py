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
"""Helper functions for deserializing values.

.. warning::
    No guarantee is provided on the modules and APIs within this
    namespace staying consistent. Directly reference at your own risk.
"""
from hbubble.exceptions import ConfigurationError

try:  # Only needed for type comments
    from typing import Optional, Text, Tuple  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = ("decode_number", "decode_integer", "decode_numbers")


def decode_number(text, line_number=None):
    # type: (Text, Optional[int]) -> float
    """Decode a real number.

    :raises ConfigurationError: if ``text`` is not a number
    """
    try:
        return float(text)
    except ValueError:
        raise ConfigurationError('Invalid number "{}"'.format(text), line_number)


def decode_integer(text, line_number=None):
    # type: (Text, Optional[int]) -> int
    """Decode an integer, rejecting fractional values.

    :raises ConfigurationError: if ``text`` is not an integer
    """
    try:
        return int(text)
    except ValueError:
        raise ConfigurationError('Invalid integer "{}"'.format(text), line_number)


def decode_numbers(text, count=None, line_number=None):
    # type: (Text, Optional[int], Optional[int]) -> Tuple[float, ...]
    """Decode a comma-separated list of real numbers.

    :param int count: Required number of entries, if fixed
    :raises ConfigurationError: if an entry is not a number or the count is wrong
    """
    values = tuple(decode_number(part.strip(), line_number) for part in text.split(",") if part.strip())
    if count is not None and len(values) != count:
        raise ConfigurationError("Expected {} comma-separated numbers, got {}".format(count, len(values)), line_number)
    if not values:
        raise ConfigurationError("Expected at least one number", line_number)
    return values
