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
"""Otherwise undifferentiated utility resources.

.. warning::
    No guarantee is provided on the modules and APIs within this
    namespace staying consistent. Directly reference at your own risk.
"""
import itertools
import logging
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from hbubble.exceptions import ExportError, InvalidArgumentError
from hbubble.identifiers import LOGGER_NAME
from hbubble.internal.identifiers import TEXT_ENCODING

try:  # Only needed for type comments
    from typing import Any, Callable, Iterable, List, Sequence, Text  # noqa pylint: disable=unused-import
except ImportError:  # pragma: no cover
    pass

__all__ = (
    "parallel_map",
    "box_points",
    "validate_box",
    "lattice_seeds",
    "midpoint_seeds",
    "newton_critical",
    "atomic_write",
    "deduplicate_points",
)
_LOGGER = logging.getLogger(LOGGER_NAME)


def parallel_map(function, items, threads=1):
    # type: (Callable, Sequence, int) -> List[Any]
    """Apply ``function`` to every item, returning results in input order.

    Ordering is independent of the thread schedule, which keeps downstream reports deterministic.
    """
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(function, items))


def validate_box(box):
    """Normalize a box given as six numbers ``(xmin, xmax, ymin, ymax, zmin, zmax)``.

    :returns: array of shape ``(3, 2)``
    :raises InvalidArgumentError: if the box is empty or malformed
    """
    box = np.asarray(box, dtype=float).reshape(-1)
    if box.shape != (6,):
        raise InvalidArgumentError("A box needs six numbers, got {}".format(box.size))
    box = box.reshape(3, 2)
    if np.any(box[:, 1] <= box[:, 0]):
        raise InvalidArgumentError("Box is empty: {}".format(box.tolist()))
    return box


_NEIGHBORS = [offset for offset in itertools.product((-1, 0, 1), repeat=3) if offset != (0, 0, 0)]


def lattice_seeds(values, slopes, count, floor=0.0):
    """Indices of interior lattice nodes worth refining.

    A node qualifies when its value is a strict extremum among its 26 neighbors, or when its
    slope is a strict local minimum and ``|value| >= floor``. NaN nodes never qualify.

    :param values: Values at the ``count^3`` lattice nodes (``x``-major)
    :param slopes: Gradient norms at the same nodes
    :returns: list of flat node indices
    """
    values = np.asarray(values, dtype=float).reshape((count,) * 3)
    slopes = np.asarray(slopes, dtype=float).reshape((count,) * 3)
    seeds = []
    for index in itertools.product(range(1, count - 1), repeat=3):
        centre, slope = values[index], slopes[index]
        if np.isnan(centre) or np.isnan(slope):
            continue
        around = [tuple(i + d for i, d in zip(index, offset)) for offset in _NEIGHBORS]
        neighbors = np.array([values[other] for other in around])
        neighbor_slopes = np.array([slopes[other] for other in around])
        extremum = np.all(centre > neighbors) or np.all(centre < neighbors)
        slope_minimum = np.all(slope < neighbor_slopes) and abs(centre) >= floor
        if extremum or slope_minimum:
            seeds.append(int(np.ravel_multi_index(index, values.shape)))
    return seeds


def midpoint_seeds(points):
    """Midpoints of every pair of seeds, a cheap stand-in for mountain-pass paths."""
    return [0.5 * (np.asarray(first) + np.asarray(second)) for first, second in itertools.combinations(points, 2)]


def newton_critical(start, gradient_fn, hessian_fn, box, tol, max_iter=50, step_tol=0.0):
    """Newton iteration for a zero of ``gradient_fn``, confined to the box enlarged by 10%.

    Steps are capped at a quarter of the box diagonal. A step shorter than ``step_tol`` also
    counts as convergence, for gradients that carry solver noise.

    :returns: the converged point, or None when the iteration leaves the box, hits a singular
        Hessian or runs out of iterations
    """
    box = validate_box(box)
    point = np.array(start, dtype=float)
    span = box[:, 1] - box[:, 0]
    low, high = box[:, 0] - 0.1 * span, box[:, 1] + 0.1 * span
    max_step = 0.25 * float(np.linalg.norm(span))
    for iteration in range(max_iter):
        grad = np.asarray(gradient_fn(point))
        if np.linalg.norm(grad) <= tol:
            _LOGGER.debug("Newton converged at %s after %d steps", np.round(point, 8).tolist(), iteration)
            return point
        try:
            step = np.linalg.solve(np.asarray(hessian_fn(point)), -grad)
        except np.linalg.LinAlgError:
            return None
        length = float(np.linalg.norm(step))
        if not np.isfinite(length):
            return None
        if length <= step_tol:
            return point + step
        if length > max_step:
            step *= max_step / length
        point = point + step
        if np.any(point < low) or np.any(point > high):
            return None
    return None


def box_points(box, count):
    """Regular ``count^3`` lattice over a box, in ``x``-major order.

    :returns: tuple of the three axes and the ``(count^3, 3)`` points
    """
    box = validate_box(box)
    axes = [np.linspace(low, high, count) for low, high in box]
    points = np.array(list(itertools.product(*axes)))
    return axes, points


def deduplicate_points(records, distance, key=lambda record: record[0]):
    """Drop records whose location lies within ``distance`` of an earlier one, then sort by location."""
    kept = []
    for record in records:
        location = np.asarray(key(record))
        if all(np.linalg.norm(location - np.asarray(key(other))) > distance for other in kept):
            kept.append(record)
    return sorted(kept, key=lambda record: tuple(np.round(np.asarray(key(record)), 8)))


def atomic_write(path, text):
    # type: (Text, Text) -> Text
    """Write ``text`` to ``path`` through a temporary file in the same directory.

    :raises ExportError: if the file cannot be written
    """
    directory = os.path.dirname(os.path.abspath(path))
    temporary = None
    try:
        if not os.path.isdir(directory):
            os.makedirs(directory)
        handle, temporary = tempfile.mkstemp(dir=directory, prefix=".tmp-")
        with os.fdopen(handle, "w", encoding=TEXT_ENCODING) as stream:
            stream.write(text)
        os.replace(temporary, path)
    except (OSError, IOError) as error:
        if temporary is not None and os.path.exists(temporary):
            os.unlink(temporary)
        _LOGGER.exception("Unable to write %s", path)
        raise ExportError("Unable to write {}: {}".format(path, error))
    _LOGGER.debug("Wrote %s", path)
    return path
