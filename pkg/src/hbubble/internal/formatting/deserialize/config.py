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
"""Tokenizer for run configuration files.

A configuration is a flat list of ``key = value`` lines. ``#`` starts a comment. A curvature
field is given as a block opened by a line ``field:`` and closed by a line ``end``; the block
is kept verbatim for the field parser.

.. warning::
    No guarantee is provided on the modules and APIs within this
    namespace staying consistent. Directly reference at your own risk.
"""
import collections
import logging

import attr

from hbubble.exceptions import ConfigurationError
from hbubble.identifiers import LOGGER_NAME

try:  # Only needed for type comments
    from typing import Dict, Optional, Text, Tuple  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = ("ConfigEntries", "tokenize_config")
_LOGGER = logging.getLogger(LOGGER_NAME)
_FIELD_OPEN = "field:"
_FIELD_CLOSE = "end"


@attr.s(frozen=True)
class ConfigEntries(object):
    """Raw configuration entries.

    :param values: Ordered mapping of key to ``(value text, line number)``
    :param field_text: Verbatim field block, if any
    :param int field_line: Line number of the first line inside the field block
    """

    values = attr.ib()
    field_text = attr.ib(default=None)
    field_line = attr.ib(default=None)


def tokenize_config(text):
    # type: (Text) -> ConfigEntries
    """Split configuration text into raw entries.

    :raises ConfigurationError: on malformed lines, duplicate keys or an unterminated field block
    """
    values = collections.OrderedDict()
    field_lines = None
    field_line = None
    block_start = None
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        if field_lines is not None and block_start is not None:
            if raw_line.strip().lower() == _FIELD_CLOSE:
                block_start = None
            else:
                field_lines.append(raw_line)
            continue
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower() == _FIELD_OPEN:
            if field_lines is not None:
                raise ConfigurationError("Duplicate field block", line_number)
            field_lines = []
            field_line = block_start = line_number + 1
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower()
        if not sep or not key:
            raise ConfigurationError('Expected "key = value" but got "{}"'.format(raw_line.strip()), line_number)
        if key in values:
            raise ConfigurationError('Duplicate key "{}"'.format(key), line_number)
        values[key] = (value.strip(), line_number)
    if block_start is not None:
        raise ConfigurationError('Field block is not closed by "{}"'.format(_FIELD_CLOSE), block_start - 1)
    _LOGGER.debug("Configuration holds %d entries%s", len(values), " and a field block" if field_lines else "")
    return ConfigEntries(
        values=values,
        field_text=None if field_lines is None else "\n".join(field_lines),
        field_line=field_line,
    )
