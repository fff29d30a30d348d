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
"""Prescribed curvature perturbations, the field description language and hypothesis checks.

Every evaluator is vectorized: points are arrays of shape ``(..., 3)``; ``eval`` returns
``(...)``, ``grad`` returns ``(..., 3)`` and ``hess`` returns ``(..., 3, 3)``.
"""
import logging
import math
import re

import attr
import numpy as np
from scipy.stats import qmc

from hbubble.exceptions import FieldSyntaxError, InvalidArgumentError
from hbubble.identifiers import LOGGER_NAME, DecayHint
from hbubble.internal.identifiers import Thresholds
from hbubble.internal.validators import callable_validator, iterable_validator, vector3

try:  # Only needed for type comments
    from typing import Callable, Dict, Iterable, List, Optional, Sequence, Text, Tuple  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = (
    "CurvatureField",
    "HypothesisReport",
    "gaussian_bump",
    "radial_well",
    "constant_field",
    "zero_field",
    "linear_combination",
    "normalize_h0",
    "check_hypotheses",
    "check_remark2",
    "check_remark3",
    "parse_field",
    "format_field",
)
_LOGGER = logging.getLogger(LOGGER_NAME)
_FD_STEP = 1e-5
DEFAULT_SEED = 20190601


def _points(points):
    return np.asarray(points, dtype=float)


@attr.s(frozen=True, eq=False)
class CurvatureField(object):
    """A C^2 function R^3 -> R with vectorized value, gradient and Hessian.

    :param callable value_fn: Point values
    :param callable grad_fn: Gradient
    :param callable hess_fn: Hessian
    :param DecayHint decay_hint: Behavior at infinity
    :param str description: Human readable description
    :param bool analytic: False when derivatives fall back to finite differences
    :param tuple terms: ``(weight, kind, params)`` terms for fields expressible in the description language
    """

    value_fn = attr.ib(validator=callable_validator, repr=False)
    grad_fn = attr.ib(validator=callable_validator, repr=False)
    hess_fn = attr.ib(validator=callable_validator, repr=False)
    decay_hint = attr.ib(validator=attr.validators.instance_of(DecayHint))
    description = attr.ib(validator=attr.validators.instance_of(str))
    analytic = attr.ib(default=True, validator=attr.validators.instance_of(bool))
    terms = attr.ib(default=(), validator=iterable_validator(tuple, tuple), repr=False)

    def eval(self, points):
        """Field values at ``points``."""
        return self.value_fn(_points(points))

    def grad(self, points):
        """Field gradients at ``points``."""
        return self.grad_fn(_points(points))

    def hess(self, points):
        """Field Hessians at ``points``."""
        return self.hess_fn(_points(points))

    __call__ = eval

    @classmethod
    def from_callable(cls, value_fn, grad_fn=None, hess_fn=None, decay_hint=DecayHint.DECAYING, description="user"):
        """Wrap a user function, falling back to central finite differences for missing derivatives.

        :param callable value_fn: Vectorized point values
        :param callable grad_fn: Optional vectorized gradient
        :param callable hess_fn: Optional vectorized Hessian
        """
        analytic = grad_fn is not None and hess_fn is not None
        if grad_fn is None:
            _LOGGER.warning("Field %r has no analytic gradient; using finite differences", description)
            grad_fn = _finite_difference(value_fn)
        if hess_fn is None:
            _LOGGER.warning("Field %r has no analytic Hessian; using finite differences", description)
            hess_fn = _finite_difference(grad_fn)
        return cls(
            value_fn=value_fn,
            grad_fn=grad_fn,
            hess_fn=hess_fn,
            decay_hint=decay_hint,
            description=description,
            analytic=analytic,
        )


def _finite_difference(fn, step=_FD_STEP):
    """Central differences of ``fn`` along each axis, stacked on a new last axis."""

    def _derivative(points):
        points = _points(points)
        columns = []
        for axis in range(3):
            shift = np.zeros(3)
            shift[axis] = step
            columns.append((np.asarray(fn(points + shift)) - np.asarray(fn(points - shift))) / (2.0 * step))
        return np.stack(columns, axis=-1)

    return _derivative


def gaussian_bump(a, c, s):
    # type: (float, Sequence[float], float) -> CurvatureField
    """The bump ``a exp(-|p - c|^2 / s^2)``.

    :raises InvalidArgumentError: if ``s <= 0``
    """
    if s <= 0:
        raise InvalidArgumentError("Gaussian width must be positive, got {}".format(s))
    a = float(a)
    s = float(s)
    center = vector3(c)
    inv = 1.0 / (s * s)

    def value(p):
        d = p - center
        return a * np.exp(-inv * np.einsum("...i,...i->...", d, d))

    def grad(p):
        d = p - center
        return (-2.0 * inv * value(p))[..., None] * d

    def hess(p):
        d = p - center
        outer = np.einsum("...i,...j->...ij", d, d)
        return value(p)[..., None, None] * (4.0 * inv * inv * outer - 2.0 * inv * np.eye(3))

    params = (("a", a), ("c", tuple(center)), ("s", s))
    return CurvatureField(
        value_fn=value,
        grad_fn=grad,
        hess_fn=hess,
        decay_hint=DecayHint.DECAYING,
        description="gaussian a={} c={} s={}".format(a, ",".join(repr(float(x)) for x in center), s),
        terms=((1.0, "gaussian", params),),
    )


def radial_well(a=1.0, b=4.0, s=3.0):
    # type: (float, float, float) -> CurvatureField
    """The radial well ``a exp(-|p|^2 / s^2) (1 + b |p|^2)``.

    With ``b > 1/s^2`` the origin is a strict local minimum; the defaults keep the Hessian
    positive definite and the values positive on the unit ball.

    :raises InvalidArgumentError: unless ``a > 0``, ``s > 0`` and ``b > 1/s^2``
    """
    if a <= 0 or s <= 0 or b <= 1.0 / (s * s):
        raise InvalidArgumentError("radial_well requires a > 0, s > 0 and b > 1/s^2 (a={}, b={}, s={})".format(a, b, s))
    a, b, s = float(a), float(b), float(s)
    inv = 1.0 / (s * s)

    def _parts(p):
        r2 = np.einsum("...i,...i->...", p, p)
        g = a * np.exp(-inv * r2)
        k = 2.0 * b - 2.0 * inv * (1.0 + b * r2)
        return r2, g, k

    def value(p):
        r2, g, _k = _parts(p)
        return g * (1.0 + b * r2)

    def grad(p):
        _r2, g, k = _parts(p)
        return (g * k)[..., None] * p

    def hess(p):
        _r2, g, k = _parts(p)
        outer = np.einsum("...i,...j->...ij", p, p)
        radial = -2.0 * inv * k - 4.0 * b * inv
        return g[..., None, None] * (k[..., None, None] * np.eye(3) + radial[..., None, None] * outer)

    return CurvatureField(
        value_fn=value,
        grad_fn=grad,
        hess_fn=hess,
        decay_hint=DecayHint.DECAYING,
        description="radialwell a={} b={} s={}".format(a, b, s),
        terms=((1.0, "radialwell", (("a", a), ("b", b), ("s", s))),),
    )


def constant_field(c):
    # type: (float) -> CurvatureField
    """The constant field ``c`` (nondecaying unless zero)."""
    c = float(c)

    def value(p):
        return np.full(p.shape[:-1], c)

    def grad(p):
        return np.zeros(p.shape)

    def hess(p):
        return np.zeros(p.shape + (3,))

    return CurvatureField(
        value_fn=value,
        grad_fn=grad,
        hess_fn=hess,
        decay_hint=DecayHint.COMPACT_LIKE if c == 0 else DecayHint.NONDECAYING,
        description="constant c={}".format(c),
        terms=((1.0, "constant", (("c", c),)),),
    )


def zero_field():
    # type: () -> CurvatureField
    """The identically vanishing field."""
    return constant_field(0.0)


def linear_combination(terms):
    # type: (Iterable[Tuple[float, CurvatureField]]) -> CurvatureField
    """Pointwise weighted sum of fields.

    :param terms: Nonempty sequence of ``(weight, field)`` pairs
    :raises InvalidArgumentError: if ``terms`` is empty
    """
    terms = [(float(weight), field) for weight, field in terms]
    if not terms:
        raise InvalidArgumentError("A linear combination needs at least one term")
    for _weight, field in terms:
        if not isinstance(field, CurvatureField):
            raise TypeError("Linear combinations take CurvatureField members")

    def _combine(method):
        def _evaluate(p):
            return sum(weight * getattr(field, method)(p) for weight, field in terms)

        return _evaluate

    dsl_terms = ()
    if all(field.terms for _weight, field in terms):
        dsl_terms = tuple(
            (weight * inner_weight, kind, params)
            for weight, field in terms
            for inner_weight, kind, params in field.terms
        )
    return CurvatureField(
        value_fn=_combine("eval"),
        grad_fn=_combine("grad"),
        hess_fn=_combine("hess"),
        decay_hint=max((field.decay_hint for _weight, field in terms), key=lambda hint: hint.value),
        description=" + ".join("{}*({})".format(weight, field.description) for weight, field in terms),
        analytic=all(field.analytic for _weight, field in terms),
        terms=dsl_terms,
    )


def normalize_h0(h0, field):
    # type: (float, CurvatureField) -> CurvatureField
    """Rescale a perturbation so the unperturbed curvature becomes 1.

    ``H0 + eps H1`` bubbles ``w`` correspond to ``1 + eps H1~`` bubbles ``H0 w`` with
    ``H1~(v) = H1(v / H0) / H0``.

    :raises InvalidArgumentError: if ``h0 == 0``
    """
    if h0 == 0:
        raise InvalidArgumentError("The unperturbed curvature H0 must be nonzero")
    h0 = float(h0)
    if h0 == 1.0:
        return field

    def value(v):
        return field.eval(v / h0) / h0

    def grad(v):
        return field.grad(v / h0) / (h0 * h0)

    def hess(v):
        return field.hess(v / h0) / (h0 ** 3)

    return CurvatureField(
        value_fn=value,
        grad_fn=grad,
        hess_fn=hess,
        decay_hint=field.decay_hint,
        description="normalized[h0={}]({})".format(h0, field.description),
        analytic=field.analytic,
    )


@attr.s(frozen=True)
class HypothesisReport(object):
    """Sampled evidence for the hypotheses on a perturbation.

    :param float h0: Unperturbed curvature
    :param dict h1_decay: Maximum of ``|H1|`` on spheres of radius ``R / |H0|`` keyed by ``R``
    :param float near_max: Maximum of ``|H1|`` on the sampled ball ``B(0, 1/|H0|)``
    :param float h2_grad_bound: Maximum of ``|grad H1|`` over the sampled box
    :param float h3_posdef: Minimum Hessian eigenvalue over the sampled ball
    :param float h4_min_value: Minimum of ``H1`` over the sampled ball
    :param int samples: Number of ball samples
    :param int seed: Seed of the quasi-random sampler
    :param bool analytic: Whether derivatives are analytic
    """

    h0 = attr.ib()
    h1_decay = attr.ib()
    near_max = attr.ib()
    h2_grad_bound = attr.ib()
    h3_posdef = attr.ib()
    h4_min_value = attr.ib()
    samples = attr.ib()
    seed = attr.ib()
    analytic = attr.ib()

    @property
    def h1_pass(self):
        # type: () -> bool
        """(H1): far-field values are negligible relative to the near field."""
        return self.h1_decay[max(self.h1_decay)] <= Thresholds.DECAY_RATIO.value * self.near_max

    @property
    def h2_pass(self):
        # type: () -> bool
        """(H2): the sampled gradient is bounded."""
        return bool(np.isfinite(self.h2_grad_bound))

    @property
    def h3_pass(self):
        # type: () -> bool
        """(H3): no sampled Hessian has a negative eigenvalue."""
        return self.h3_posdef >= 0.0

    @property
    def h4_pass(self):
        # type: () -> bool
        """(H4): the field is strictly positive on the sampled ball."""
        return self.h4_min_value > 0.0

    @property
    def h2_note(self):
        # type: () -> Text
        """How (H2) was established."""
        return "verified analytically" if self.analytic else "sampled (finite-difference derivatives)"

    def as_dict(self):
        # type: () -> Dict
        """JSON-ready representation."""
        return {
            "h0": self.h0,
            "h1_decay": {str(radius): value for radius, value in sorted(self.h1_decay.items())},
            "near_max": self.near_max,
            "h2_grad_bound": self.h2_grad_bound,
            "h2_note": self.h2_note,
            "h3_posdef": self.h3_posdef,
            "h4_min_value": self.h4_min_value,
            "samples": self.samples,
            "seed": self.seed,
            "pass": {"h1": self.h1_pass, "h2": self.h2_pass, "h3": self.h3_pass, "h4": self.h4_pass},
        }


def _ball_samples(radius, seed, count=2048):
    """Quasi-random points of the closed ball, the centre included."""
    cube = qmc.Sobol(d=3, scramble=True, seed=seed).random(count) * 2.0 - 1.0
    inside = cube[np.einsum("ij,ij->i", cube, cube) <= 1.0]
    return np.vstack([np.zeros((1, 3)), inside * radius])


def _sphere_samples(radius, seed, count=512):
    """Quasi-random, area-uniform points of a sphere."""
    unit = qmc.Sobol(d=2, scramble=True, seed=seed).random(count)
    z = 2.0 * unit[:, 0] - 1.0
    phi = 2.0 * math.pi * unit[:, 1]
    rho = np.sqrt(1.0 - z * z)
    return radius * np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)


def check_hypotheses(field, h0, seed=DEFAULT_SEED):
    # type: (CurvatureField, float, int) -> HypothesisReport
    """Sample the hypotheses (H1)-(H4) for ``field`` with unperturbed curvature ``h0``.

    :raises InvalidArgumentError: if ``h0 == 0``
    """
    if h0 == 0:
        raise InvalidArgumentError("The unperturbed curvature H0 must be nonzero")
    scale = 1.0 / abs(h0)
    ball = _ball_samples(scale, seed)
    decay = {
        radius: float(np.max(np.abs(field.eval(_sphere_samples(radius * scale, seed + radius)))))
        for radius in (5, 10, 20)
    }
    box = (qmc.Sobol(d=3, scramble=True, seed=seed + 1).random(2048) * 2.0 - 1.0) * 20.0 * scale
    grad_bound = float(np.max(np.linalg.norm(field.grad(box), axis=-1)))
    eigenvalues = np.linalg.eigvalsh(field.hess(ball))
    values = field.eval(ball)
    report = HypothesisReport(
        h0=float(h0),
        h1_decay=decay,
        near_max=float(np.max(np.abs(values))),
        h2_grad_bound=grad_bound,
        h3_posdef=float(np.min(eigenvalues)),
        h4_min_value=float(np.min(values)),
        samples=int(ball.shape[0]),
        seed=seed,
        analytic=field.analytic,
    )
    if not field.analytic:
        _LOGGER.warning("Hypotheses for %r checked with finite-difference derivatives", field.description)
    _LOGGER.debug("Hypothesis report: %s", report.as_dict())
    return report


def check_remark2(field):
    # type: (CurvatureField) -> bool
    """Pointwise replacement of (H3)-(H4): positive value and positive-definite Hessian at the origin."""
    origin = np.zeros(3)
    return bool(field.eval(origin) > 0 and np.min(np.linalg.eigvalsh(field.hess(origin))) > 0)


def check_remark3(field, p1, p2):
    # type: (CurvatureField, Sequence[float], Sequence[float]) -> bool
    """Pointwise replacement of (H5): the field takes both signs."""
    return bool(field.eval(vector3(p1)) > 0 > field.eval(vector3(p2)))


_TERM_PATTERN = re.compile(r"^(?P<weight>[+-]|[+-]?(\d+\.?\d*|\.\d+)([e][+-]?\d+)?)$")
_KINDS = {
    "gaussian": ("a", "c", "s"),
    "radialwell": ("a", "b", "s"),
    "constant": ("c",),
}


def _parse_number(text, line_number):
    try:
        return float(text)
    except ValueError:
        raise FieldSyntaxError('Invalid number "{}"'.format(text), line_number)


def _build_term(kind, params, line_number):
    try:
        if kind == "gaussian":
            return gaussian_bump(params["a"], params["c"], params["s"])
        if kind == "radialwell":
            return radial_well(params["a"], params["b"], params["s"])
        return constant_field(params["c"])
    except InvalidArgumentError as error:
        raise FieldSyntaxError(str(error), line_number)


def parse_field(text, first_line=1):
    # type: (Text, int) -> CurvatureField
    """Parse the field description language into a curvature field.

    One term per line: ``<sign|weight> gaussian a=<r> c=<x,y,z> s=<r>``,
    ``<weight> radialwell a=<r> b=<r> s=<r>`` or ``<weight> constant c=<r>``.
    Blank lines and ``#`` comments are ignored; keywords are case-insensitive.

    :param str text: Field block
    :param int first_line: Line number of the first line of ``text`` (for error messages)
    :raises FieldSyntaxError: if the block is malformed or empty
    """
    terms = []
    for offset, raw_line in enumerate(text.splitlines()):
        line_number = first_line + offset
        line = raw_line.split("#", 1)[0].strip().lower()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) < 2 or not _TERM_PATTERN.match(tokens[0]):
            raise FieldSyntaxError('Expected "<weight> <kind> key=value ..." but got "{}"'.format(raw_line.strip()), line_number)
        weight = {"+": 1.0, "-": -1.0}.get(tokens[0])
        if weight is None:
            weight = _parse_number(tokens[0], line_number)
        kind = tokens[1]
        if kind not in _KINDS:
            raise FieldSyntaxError('Unknown field kind "{}"'.format(kind), line_number)
        params = {}
        for token in tokens[2:]:
            key, sep, value = token.partition("=")
            if not sep or key not in _KINDS[kind]:
                raise FieldSyntaxError('Invalid parameter "{}" for {}'.format(token, kind), line_number)
            if key == "c" and kind == "gaussian":
                parts = value.split(",")
                if len(parts) != 3:
                    raise FieldSyntaxError('Centre must be "x,y,z", got "{}"'.format(value), line_number)
                params[key] = tuple(_parse_number(part, line_number) for part in parts)
            else:
                params[key] = _parse_number(value, line_number)
        missing = [key for key in _KINDS[kind] if key not in params]
        if missing:
            raise FieldSyntaxError("Missing parameters {} for {}".format(", ".join(missing), kind), line_number)
        terms.append((weight, _build_term(kind, params, line_number)))
    if not terms:
        raise FieldSyntaxError("Field block is empty", first_line)
    if len(terms) == 1 and terms[0][0] == 1.0:
        return terms[0][1]
    return linear_combination(terms)


def _format_value(value):
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    return repr(float(value))


def format_field(field):
    # type: (CurvatureField) -> Text
    """Render a field back into the description language.

    :raises InvalidArgumentError: if the field was not built from description-language terms
    """
    if not field.terms:
        raise InvalidArgumentError("Field {!r} has no description-language form".format(field.description))
    lines = []
    for weight, kind, params in field.terms:
        rendered = " ".join("{}={}".format(key, _format_value(value)) for key, value in params)
        lines.append("{} {} {}".format(repr(float(weight)), kind, rendered))
    return "\n".join(lines)
