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
"""Custom validators and converters for ``attrs``.

.. warning::
    No guarantee is provided on the modules and APIs within this
    namespace staying consistent. Directly reference at your own risk.
"""
import numbers

import numpy as np

from hbubble.exceptions import InvalidArgumentError

__all__ = (
    "iterable_validator",
    "callable_validator",
    "real_validator",
    "positive_validator",
    "array_shape_validator",
    "frozen_array",
    "vector3",
)


def iterable_validator(iterable_type, member_type):
    """Validator for ``attrs`` that performs deep type checking of iterables."""

    def _validate_iterable(instance, attribute, value):
        # pylint: disable=unused-argument
        """Validate that an iterable is structured as expected.

        :raises TypeError: if ``value`` is not of ``iterable_type`` type
        :raises TypeError: if ``value`` members are not all of ``member_type`` type
        """
        if not isinstance(value, iterable_type):
            raise TypeError('"{name}" must be a {type}'.format(name=attribute.name, type=iterable_type))

        for member in value:
            if not isinstance(member, member_type):
                raise TypeError(
                    '"{name}" members must all be of type "{type}"'.format(name=attribute.name, type=member_type)
                )

    return _validate_iterable


def callable_validator(instance, attribute, value):
    # pylint: disable=unused-argument
    """Validate that an attribute value is callable.

    :raises TypeError: if ``value`` is not callable
    """
    if not callable(value):
        raise TypeError('"{name}" value "{value}" must be callable'.format(name=attribute.name, value=value))


def real_validator(instance, attribute, value):
    # pylint: disable=unused-argument
    """Validate that an attribute value is a finite real number.

    :raises TypeError: if ``value`` is not a real number
    :raises InvalidArgumentError: if ``value`` is not finite
    """
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError('"{name}" must be a real number'.format(name=attribute.name))
    if not np.isfinite(value):
        raise InvalidArgumentError('"{name}" must be finite'.format(name=attribute.name))


def positive_validator(instance, attribute, value):
    """Validate that an attribute value is a strictly positive real number.

    :raises InvalidArgumentError: if ``value`` is not positive
    """
    real_validator(instance, attribute, value)
    if value <= 0:
        raise InvalidArgumentError('"{name}" must be positive, got {value}'.format(name=attribute.name, value=value))


def array_shape_validator(*shape):
    """Validator for ``attrs`` that checks the trailing dimensions of a numpy array.

    ``None`` entries in ``shape`` match any length.
    """

    def _validate_array(instance, attribute, value):
        # pylint: disable=unused-argument
        """Validate the array shape.

        :raises TypeError: if ``value`` is not a numpy array
        :raises InvalidArgumentError: if the trailing dimensions do not match
        """
        if not isinstance(value, np.ndarray):
            raise TypeError('"{}" must be a numpy array'.format(attribute.name))
        trailing = value.shape[len(value.shape) - len(shape) :]
        if len(trailing) != len(shape) or any(
            expected is not None and actual != expected for expected, actual in zip(shape, trailing)
        ):
            raise InvalidArgumentError(
                '"{name}" has shape {actual}, expected trailing shape {expected}'.format(
                    name=attribute.name, actual=value.shape, expected=shape
                )
            )

    return _validate_array


def frozen_array(value):
    """Converter returning a read-only float64 copy of ``value``."""
    array = np.array(value, dtype=float)
    array.setflags(write=False)
    return array


def vector3(value):
    """Converter returning a read-only float64 vector of length 3.

    :raises InvalidArgumentError: if ``value`` does not hold three numbers
    """
    array = frozen_array(value)
    if array.shape != (3,):
        raise InvalidArgumentError("Expected a point in R^3, got shape {}".format(array.shape))
    return array
