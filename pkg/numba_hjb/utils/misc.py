# Copyright 2026 The numba-hjb Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import hashlib
import json

import numpy as np


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, float) and not np.isfinite(obj):
        # "nan", "inf" or "-inf"
        return repr(obj)
    return obj


def canonical_json(obj, indent=None):
    """
    Serialize ``obj`` with sorted keys so equal inputs give equal bytes.
    Non-finite floats are written as the strings ``"nan"``, ``"inf"`` and
    ``"-inf"``, so the output is standard JSON.

    Args:
        obj: nested dicts, lists, scalars and numpy arrays.
        indent: passed through to ``json.dumps``.

    Returns:
        The JSON text.
    """
    return json.dumps(_jsonable(obj), sort_keys=True, indent=indent, allow_nan=False)


def digest(obj):
    """
    Hex sha256 of the canonical JSON of ``obj``.

    Used for config digests in run summaries and for the inputs digest of
    check reports.
    """
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def as_points(x, dim):
    """
    Coerce ``x`` to a ``(n, dim)`` float array.

    Args:
        x: a single point of length ``dim`` or a batch of points.
        dim: expected trailing dimension.

    Returns:
        A pair ``(points, single)`` where ``single`` tells whether the
        caller passed one point.

    Raises:
        ValueError: the trailing dimension does not match.
    """
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim <= 1
    arr = np.atleast_2d(arr.reshape(1, -1) if single else arr)
    if arr.shape[1] != dim:
        raise ValueError(
            "expected points of dimension %d but got %d" % (dim, arr.shape[1])
        )
    return arr, single


def check_finite(values, what):
    """
    Raise ``FloatingPointError`` when ``values`` holds NaN or infinity.
    """
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("non-finite values in %s" % what)


def write_table(path, header, columns):
    """
    Write equal-length ``columns`` as CSV with a one-line ``header``.

    Returns:
        ``path``.
    """
    np.savetxt(
        path,
        np.column_stack([np.asarray(c, dtype=np.float64) for c in columns]),
        fmt="%.12e",
        delimiter=",",
        header=",".join(header),
        comments="",
    )
    return path
