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
"""Run configuration for the experiment drivers."""
import io
import logging

import attr
import numpy as np

from hbubble.exceptions import ConfigurationError, InvalidArgumentError
from hbubble.fields import DEFAULT_SEED, CurvatureField, parse_field
from hbubble.identifiers import LOGGER_NAME, MeshFormat, Scenario, SolverMode
from hbubble.internal.formatting.deserialize import decode_integer, decode_number, decode_numbers
from hbubble.internal.formatting.deserialize.config import tokenize_config
from hbubble.internal.formatting.serialize.config import serialize_config
from hbubble.internal.identifiers import DEFAULT_PADDING, MAX_DEGREE, MIN_DEGREE, TEXT_ENCODING
from hbubble.internal.utils import validate_box
from hbubble.internal.validators import positive_validator, real_validator

try:  # Only needed for type comments
    from typing import Dict, Optional, Text  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = ("RunConfig", "parse_config", "load_config")
_LOGGER = logging.getLogger(LOGGER_NAME)


def _integer_at_least(minimum):
    def _validate(instance, attribute, value):
        # pylint: disable=unused-argument
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise TypeError('"{}" must be an integer'.format(attribute.name))
        if value < minimum:
            raise InvalidArgumentError('"{}" must be at least {}, got {}'.format(attribute.name, minimum, value))

    return _validate


def _degree_validator(instance, attribute, value):
    _integer_at_least(MIN_DEGREE)(instance, attribute, value)
    if value > MAX_DEGREE:
        raise InvalidArgumentError('"{}" must be at most {}, got {}'.format(attribute.name, MAX_DEGREE, value))


def _nonzero_validator(instance, attribute, value):
    real_validator(instance, attribute, value)
    if value == 0:
        raise InvalidArgumentError('"{}" must be nonzero'.format(attribute.name))


def _eps_list_validator(instance, attribute, value):
    # pylint: disable=unused-argument
    if not value or any(eps == 0 or not np.isfinite(eps) for eps in value):
        raise InvalidArgumentError('"{}" must hold finite nonzero values'.format(attribute.name))


def _padding_validator(instance, attribute, value):
    real_validator(instance, attribute, value)
    if value < 1:
        raise InvalidArgumentError('"{}" must be at least 1, got {}'.format(attribute.name, value))


def _box_converter(value):
    return tuple(float(bound) for bound in validate_box(value).reshape(-1))


def _point_converter(value):
    point = tuple(float(coordinate) for coordinate in value)
    if len(point) != 3:
        raise InvalidArgumentError("Expected a point in R^3, got {} numbers".format(len(point)))
    return point


def _optional_scenario(value):
    return None if value is None else Scenario(value)


@attr.s(frozen=True)
class RunConfig(object):
    """Settings of one experiment run.

    :param int degree: Spectral truncation L
    :param float h0: Unperturbed curvature
    :param float eps: Perturbation size
    :param tuple eps_list: Perturbation sizes of expansion checks
    :param tuple p: Translation used by the ``reduce`` command
    :param tuple box: Search box ``(xmin, xmax, ymin, ymax, zmin, zmax)``
    :param int scan: Lattice nodes per axis in reduced-energy scans
    :param int gamma_scan: Lattice nodes per axis in Melnikov scans
    :param float solver_tol: Residual tolerance of the correction solver
    :param float quadrature_tol: Tolerance of ball and gauge quadratures
    :param int max_iter: Iteration budget of the correction solver
    :param SolverMode mode: Correction iteration
    :param int threads: Worker threads for scans
    :param int seed: Seed of the quasi-random hypothesis sampler
    :param float padding: De-aliasing factor
    :param str out: Output directory
    :param Scenario scenario: Shipped scenario, if any
    :param MeshFormat mesh_format: Mesh export format
    :param field: Curvature perturbation
    """

    degree = attr.ib(default=16, validator=_degree_validator)
    h0 = attr.ib(default=1.0, converter=float, validator=_nonzero_validator)
    eps = attr.ib(default=1e-2, converter=float, validator=real_validator)
    eps_list = attr.ib(
        default=(1e-2, 5e-3, 2.5e-3), converter=lambda values: tuple(float(v) for v in values), validator=_eps_list_validator
    )
    p = attr.ib(default=(0.0, 0.0, 0.0), converter=_point_converter)
    box = attr.ib(default=(-5.0, 5.0, -5.0, 5.0, -5.0, 5.0), converter=_box_converter)
    scan = attr.ib(default=9, validator=_integer_at_least(3))
    gamma_scan = attr.ib(default=17, validator=_integer_at_least(3))
    solver_tol = attr.ib(default=1e-10, converter=float, validator=positive_validator)
    quadrature_tol = attr.ib(default=1e-9, converter=float, validator=positive_validator)
    max_iter = attr.ib(default=60, validator=_integer_at_least(1))
    mode = attr.ib(default=SolverMode.PICARD, converter=SolverMode)
    threads = attr.ib(default=1, validator=_integer_at_least(1))
    seed = attr.ib(default=DEFAULT_SEED, validator=_integer_at_least(0))
    padding = attr.ib(default=DEFAULT_PADDING, converter=float, validator=_padding_validator)
    out = attr.ib(default="hbubble-out", validator=attr.validators.instance_of(str))
    scenario = attr.ib(default=None, converter=_optional_scenario)
    mesh_format = attr.ib(default=MeshFormat.OBJ, converter=MeshFormat)
    field = attr.ib(default=None, validator=attr.validators.optional(attr.validators.instance_of(CurvatureField)))

    def serialize(self):
        # type: () -> Text
        """Render the configuration in the file format read by :func:`parse_config`."""
        return serialize_config(self)

    def as_dict(self):
        # type: () -> Dict
        """JSON-ready representation; the field appears by description."""
        data = attr.asdict(self, recurse=False)
        data["mode"] = self.mode.value
        data["mesh_format"] = self.mesh_format.value
        data["scenario"] = None if self.scenario is None else self.scenario.value
        data["field"] = None if self.field is None else self.field.description
        return data


def _text(text, line_number):
    # pylint: disable=unused-argument
    return text


def _optional_enum(enum_type):
    def _decode(text, line_number):
        if text.lower() in ("", "none"):
            return None
        return _enum(enum_type)(text, line_number)

    return _decode


def _enum(enum_type):
    def _decode(text, line_number):
        try:
            return enum_type(text.lower())
        except ValueError:
            choices = ", ".join(member.value for member in enum_type)
            raise ConfigurationError('Invalid value "{}"; expected one of {}'.format(text, choices), line_number)

    return _decode


_DECODERS = {
    "degree": decode_integer,
    "h0": decode_number,
    "eps": decode_number,
    "eps_list": lambda text, line: decode_numbers(text, line_number=line),
    "p": lambda text, line: decode_numbers(text, 3, line),
    "box": lambda text, line: decode_numbers(text, 6, line),
    "scan": decode_integer,
    "gamma_scan": decode_integer,
    "solver_tol": decode_number,
    "quadrature_tol": decode_number,
    "max_iter": decode_integer,
    "mode": _enum(SolverMode),
    "threads": decode_integer,
    "seed": decode_integer,
    "padding": decode_number,
    "out": _text,
    "scenario": _optional_enum(Scenario),
    "mesh_format": _enum(MeshFormat),
}


def parse_config(text):
    # type: (Text) -> RunConfig
    """Parse configuration text, validating every entry.

    :raises ConfigurationError: with the offending line number on any malformed or invalid entry
    """
    entries = tokenize_config(text)
    config = RunConfig()
    for key, (value, line_number) in entries.values.items():
        if key not in _DECODERS:
            raise ConfigurationError('Unknown key "{}"'.format(key), line_number)
        decoded = _DECODERS[key](value, line_number)
        try:
            config = attr.evolve(config, **{key: decoded})
        except (InvalidArgumentError, TypeError, ValueError) as error:
            raise ConfigurationError(str(error), line_number)
    if entries.field_text is not None:
        config = attr.evolve(config, field=parse_field(entries.field_text, entries.field_line))
    return config


def load_config(path):
    # type: (Text) -> RunConfig
    """Read and parse a configuration file.

    :raises ConfigurationError: if the file cannot be read or parsed
    """
    try:
        with io.open(path, "r", encoding=TEXT_ENCODING) as stream:
            text = stream.read()
    except (OSError, IOError) as error:
        raise ConfigurationError("Unable to read configuration {}: {}".format(path, error))
    _LOGGER.info("Loaded configuration from %s", path)
    return parse_config(text)
