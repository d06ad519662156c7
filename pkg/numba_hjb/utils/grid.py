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

"""Functions tabulated on tensor grids over the projected coordinates.

Interpolation is multilinear and clamps points outside the box to the
nearest boundary node. The kernels are compiled with ``numba.njit``; the
loop over query points is a ``prange`` without reductions across points,
so results do not depend on the number of threads.
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numba
import numpy as np
from numba import prange

from numba_hjb import config
from numba_hjb.utils.misc import as_points, check_finite

__all__ = ["GridFunction", "interpolate"]


@numba.njit(cache=bool(config.CACHE))
def _locate(axes_flat, start, n, x):
    if x <= axes_flat[start]:
        return 0, 0.0
    if x >= axes_flat[start + n - 1]:
        return n - 2, 1.0
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if axes_flat[start + mid] <= x:
            lo = mid
        else:
            hi = mid
    x0 = axes_flat[start + lo]
    x1 = axes_flat[start + lo + 1]
    return lo, (x - x0) / (x1 - x0)


@numba.njit(parallel=bool(config.PARALLEL), cache=bool(config.CACHE))
def _interp_kernel(axes_flat, starts, lengths, strides, table, points):
    n = points.shape[0]
    d = points.shape[1]
    c = table.shape[1]
    out = np.zeros((n, c))
    for i in prange(n):
        idx = np.empty(d, dtype=np.int64)
        frac = np.empty(d)
        for k in range(d):
            j, f = _locate(axes_flat, starts[k], lengths[k], points[i, k])
            idx[k] = j
            frac[k] = f
        for corner in range(1 << d):
            w = 1.0
            off = 0
            for k in range(d):
                if (corner >> k) & 1:
                    w *= frac[k]
                    off += (idx[k] + 1) * strides[k]
                else:
                    w *= 1.0 - frac[k]
                    off += idx[k] * strides[k]
            if w != 0.0:
                for m in range(c):
                    out[i, m] += w * table[off, m]
    return out


def _layout(axes):
    lengths = np.array([a.size for a in axes], dtype=np.int64)
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1])).astype(np.int64)
    strides = np.ones(len(axes), dtype=np.int64)
    for k in range(len(axes) - 2, -1, -1):
        strides[k] = strides[k + 1] * lengths[k + 1]
    return np.concatenate(axes), starts, lengths, strides


def interpolate(axes, table, points):
    """Multilinear interpolation of the columns of ``table``.

    Args:
        axes: sequence of strictly increasing 1-D node arrays.
        table: ``(n_nodes, c)`` array in C order of the tensor grid.
        points: ``(n, len(axes))`` query points.

    Returns:
        ``(n, c)`` array.
    """
    axes_flat, starts, lengths, strides = _layout(axes)
    points = np.ascontiguousarray(points, dtype=np.float64)
    table = np.ascontiguousarray(table, dtype=np.float64)
    return _interp_kernel(axes_flat, starts, lengths, strides, table, points)


@dataclass(eq=False)
class GridFunction:
    """Values (and optionally B-gradients) on a tensor grid.

    ``values`` has the grid shape; ``gradient_values`` has the grid shape
    followed by the control dimension. ``bound`` is an optional declared sup
    norm. ``meta`` carries numbers produced alongside the values, such as the
    quadrature error budget of a resolvent.
    """

    axes: Tuple[np.ndarray, ...]
    values: np.ndarray
    gradient_values: Optional[np.ndarray] = None
    bound: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axes = tuple(np.asarray(a, dtype=np.float64) for a in self.axes)
        for k, axis in enumerate(self.axes):
            if axis.ndim != 1 or axis.size < 2:
                raise ValueError("axis %d needs at least two nodes" % k)
            if not np.all(np.diff(axis) > 0):
                raise ValueError("axis %d is not strictly increasing" % k)
        self.values = np.asarray(self.values, dtype=np.float64).reshape(self.shape)
        check_finite(self.values, "grid values")
        if self.gradient_values is not None:
            grad = np.asarray(self.gradient_values, dtype=np.float64)
            self.gradient_values = grad.reshape(self.shape + (-1,))
            check_finite(self.gradient_values, "grid gradient values")
        if self.bound is not None and np.abs(self.values).max() > self.bound:
            raise ValueError(
                "grid values exceed the declared bound %g" % self.bound
            )

    @classmethod
    def on_grid(cls, axes, f, gradient=None, bound=None):
        """Tabulate the callable ``f`` (and ``gradient``) on the grid nodes."""
        empty = cls(axes, np.zeros(tuple(len(a) for a in axes)))
        nodes = empty.nodes()
        values = np.asarray(f(nodes), dtype=np.float64)
        grad = None
        if gradient is not None:
            grad = np.asarray(gradient(nodes), dtype=np.float64)
        return cls(empty.axes, values, grad, bound)

    @property
    def dim(self):
        return len(self.axes)

    @property
    def shape(self):
        return tuple(a.size for a in self.axes)

    @property
    def n_nodes(self):
        return int(np.prod(self.shape))

    @property
    def control_dim(self):
        if self.gradient_values is None:
            return 0
        return self.gradient_values.shape[-1]

    def nodes(self):
        grids = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def flat_values(self):
        return self.values.reshape(-1)

    def flat_gradient(self):
        if self.gradient_values is None:
            raise ValueError("grid function carries no gradient grid")
        return self.gradient_values.reshape(self.n_nodes, -1)

    def __call__(self, points):
        pts, single = as_points(points, self.dim)
        out = interpolate(self.axes, self.flat_values()[:, None], pts)[:, 0]
        check_finite(out, "interpolated values")
        return out[0] if single else out

    def gradient(self, points):
        pts, single = as_points(points, self.dim)
        out = interpolate(self.axes, self.flat_gradient(), pts)
        return out[0] if single else out

    def sup_norm(self, mask=None):
        vals = self.flat_values()
        if mask is not None:
            vals = vals[mask]
        return float(np.abs(vals).max()) if vals.size else 0.0

    def gradient_sup_norm(self, mask=None):
        grad = self.flat_gradient()
        if mask is not None:
            grad = grad[mask]
        if not grad.size:
            return 0.0
        return float(np.linalg.norm(grad, axis=1).max())

    def interior_mask(self, margin):
        """Flat mask of nodes at distance ``>= margin`` from every face."""
        margin = np.broadcast_to(np.asarray(margin, dtype=np.float64), (self.dim,))
        nodes = self.nodes()
        lo = np.array([a[0] for a in self.axes]) + margin
        hi = np.array([a[-1] for a in self.axes]) - margin
        return np.all((nodes >= lo) & (nodes <= hi), axis=1)

    def window_mask(self, half_widths):
        """Flat mask of nodes inside the centered box ``|x_i| <= half_widths[i]``."""
        half_widths = np.broadcast_to(
            np.asarray(half_widths, dtype=np.float64), (self.dim,)
        )
        return np.all(np.abs(self.nodes()) <= half_widths, axis=1)

    def with_values(self, values, gradient_values=None, **meta):
        return replace(
            self,
            values=np.asarray(values, dtype=np.float64).reshape(self.shape),
            gradient_values=gradient_values,
            bound=None,
            meta=dict(meta),
        )

    def shifted(self, constant):
        return self.with_values(self.values + constant, self.gradient_values)
