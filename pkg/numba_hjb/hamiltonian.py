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

"""Minimized Hamiltonian, feedback map and the Nisio approximation family.

``H_min(p) = inf_{u in U} <p, u> + l1(u)`` is an infimum of affine maps, so
it is concave and Lipschitz with constant ``sup_U |u|``. The Nisio operator

    N_eps u(x) = min_{|a| <= M} eps g(a) + u(x + eps P B a),
    g(a) = sup_{|p| <= M} H_min(p) - <a, p>,

is the constant-control value of an auxiliary drift problem; it is
monotone, contractive in the sup norm, and ``(N_eps u - u) / eps`` tends to
``H_min(grad_B u)`` for smooth ``u``.
"""

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from numba_hjb.reports import make_report
from numba_hjb.utils.grid import GridFunction, interpolate
from numba_hjb.utils.quadrature import counter_stream

__all__ = [
    "HamiltonianSpec",
    "h_min",
    "feedback_control",
    "lipschitz_constant",
    "nisio_g",
    "nisio_step",
    "check_concavity",
    "check_lipschitz",
    "check_g_duality",
]

_CHUNK = 512
_REFINE = 10


@dataclass(frozen=True)
class HamiltonianSpec:
    """Control set ``U`` and control cost ``l1``.

    ``control_kind`` is ``"ball"`` (``radius``), ``"box"`` (``lower``,
    ``upper``) or ``"points"`` (``points``, one row per control).
    ``l1_kind`` is ``"zero"``, ``"quadratic"`` (``l1_coeff * |u|**2``),
    ``"abs"`` (``l1_coeff * |u|``) or ``"table"`` (``l1_table``, one value
    per point, finite ``U`` only).

    Points are stored in lexicographic order, ``l1_table`` permuted along,
    so the first minimizer over the points is the lexicographically smallest.
    """

    control_kind: str = "ball"
    control_dim: int = 1
    radius: float = 1.0
    lower: Optional[Tuple[float, ...]] = None
    upper: Optional[Tuple[float, ...]] = None
    points: Optional[Tuple[Tuple[float, ...], ...]] = None
    l1_kind: str = "quadratic"
    l1_coeff: float = 0.5
    l1_table: Optional[Tuple[float, ...]] = None
    nisio_M: Optional[float] = None
    search_resolution: int = 201

    def __post_init__(self):
        if self.control_kind not in ("ball", "box", "points"):
            raise ValueError("unknown control set kind %r" % (self.control_kind,))
        if self.l1_kind not in ("zero", "quadratic", "abs", "table"):
            raise ValueError("unknown control cost kind %r" % (self.l1_kind,))
        order = None
        if self.control_kind == "points":
            pts = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
            if pts.size == 0 or not np.all(np.isfinite(pts)):
                raise ValueError("finite control set needs finite points")
            order = np.lexsort(pts.T[::-1])
            pts = pts[order]
            object.__setattr__(self, "control_dim", pts.shape[1])
            object.__setattr__(self, "points", tuple(map(tuple, pts.tolist())))
        elif self.control_kind == "box":
            lo = np.atleast_1d(np.asarray(self.lower, dtype=np.float64))
            hi = np.atleast_1d(np.asarray(self.upper, dtype=np.float64))
            if lo.shape != hi.shape or not np.all(lo <= hi) or not np.all(np.isfinite(hi - lo)):
                raise ValueError("box control set needs finite lower <= upper")
            object.__setattr__(self, "control_dim", lo.size)
            object.__setattr__(self, "lower", tuple(lo.tolist()))
            object.__setattr__(self, "upper", tuple(hi.tolist()))
        elif not (0.0 <= self.radius < np.inf):
            raise ValueError("ball radius must be finite and nonnegative")
        if self.l1_kind == "table":
            if self.control_kind != "points":
                raise ValueError("tabulated control cost needs a finite control set")
            table = np.asarray(self.l1_table, dtype=np.float64).ravel()
            if table.size != len(self.points) or not np.all(np.isfinite(table)):
                raise ValueError("l1_table needs one finite value per control point")
            table = table[order]
            object.__setattr__(self, "l1_table", tuple(table.tolist()))
        elif self.l1_coeff < 0:
            raise ValueError("l1_coeff must be nonnegative (convex control cost)")
        if self.search_resolution < 3 or self.search_resolution % 2 == 0:
            raise ValueError("search_resolution must be odd and at least 3")

    @classmethod
    def ball(cls, radius=1.0, dim=1, l1_kind="quadratic", l1_coeff=0.5, **kw):
        return cls("ball", dim, radius, l1_kind=l1_kind, l1_coeff=l1_coeff, **kw)

    @classmethod
    def box(cls, lower, upper, l1_kind="quadratic", l1_coeff=0.5, **kw):
        return cls("box", lower=lower, upper=upper, l1_kind=l1_kind, l1_coeff=l1_coeff, **kw)

    @classmethod
    def finite(cls, points, l1_table=None, **kw):
        pts = np.asarray(points, dtype=np.float64).reshape(len(points), -1)
        if l1_table is None:
            return cls("points", points=pts, l1_kind="zero", **kw)
        return cls("points", points=pts, l1_kind="table", l1_table=l1_table, **kw)

    def with_nisio_bound(self, M):
        return replace(self, nisio_M=float(M))

    def nisio_bound(self, gradient_estimate=1.0):
        """``M`` of the Nisio family, ``2 max(sup_U |u|, gradient_estimate)``
        unless set explicitly.
        """
        if self.nisio_M is not None:
            return float(self.nisio_M)
        return 2.0 * max(lipschitz_constant(self), float(gradient_estimate))

    def point_array(self):
        return np.asarray(self.points, dtype=np.float64)

    def contains(self, u, atol=1e-12):
        u = np.atleast_2d(np.asarray(u, dtype=np.float64))
        if self.control_kind == "ball":
            return np.linalg.norm(u, axis=1) <= self.radius * (1.0 + atol) + atol
        if self.control_kind == "box":
            lo, hi = np.asarray(self.lower), np.asarray(self.upper)
            return np.all((u >= lo - atol) & (u <= hi + atol), axis=1)
        pts = self.point_array()
        return np.any(np.all(np.abs(u[:, None, :] - pts[None]) <= atol, axis=2), axis=1)

    def l1(self, u, index=None):
        """Control cost of ``(n, d_U)`` controls; ``index`` selects table rows."""
        u = np.atleast_2d(np.asarray(u, dtype=np.float64))
        if self.l1_kind == "zero":
            return np.zeros(u.shape[0])
        if self.l1_kind == "quadratic":
            return self.l1_coeff * np.sum(u * u, axis=1)
        if self.l1_kind == "abs":
            return self.l1_coeff * np.linalg.norm(u, axis=1)
        if index is None:
            pts = self.point_array()
            index = np.argmin(np.abs(u[:, None, :] - pts[None]).sum(axis=2), axis=1)
        return np.asarray(self.l1_table)[index]

    def l1_sup(self):
        """``sup_U |l1|``."""
        if self.l1_kind == "table":
            return float(np.abs(self.l1_table).max())
        if self.l1_kind == "zero":
            return 0.0
        r = lipschitz_constant(self)
        return float(self.l1_coeff * (r * r if self.l1_kind == "quadratic" else r))

    def to_dict(self):
        return {
            "control_kind": self.control_kind,
            "control_dim": self.control_dim,
            "radius": self.radius,
            "lower": self.lower,
            "upper": self.upper,
            "points": self.points,
            "l1_kind": self.l1_kind,
            "l1_coeff": self.l1_coeff,
            "l1_table": self.l1_table,
            "nisio_M": self.nisio_M,
            "search_resolution": self.search_resolution,
        }


def lipschitz_constant(spec):
    """``Lip(H_min) = sup_{u in U} |u|``."""
    if spec.control_kind == "ball":
        return float(spec.radius)
    if spec.control_kind == "box":
        corner = np.maximum(np.abs(spec.lower), np.abs(spec.upper))
        return float(np.linalg.norm(corner))
    return float(np.linalg.norm(spec.point_array(), axis=1).max())


def _as_batch(p, dim):
    arr = np.asarray(p, dtype=np.float64)
    single = arr.ndim <= 1
    arr = arr.reshape(1, -1) if single else arr
    if arr.shape[1] != dim:
        raise ValueError("expected vectors of dimension %d, got %d" % (dim, arr.shape[1]))
    return arr, single


def _bounding_box(spec):
    if spec.control_kind == "ball":
        r = np.full(spec.control_dim, spec.radius)
        return -r, r
    if spec.control_kind == "box":
        return np.asarray(spec.lower), np.asarray(spec.upper)
    pts = spec.point_array()
    return pts.min(axis=0), pts.max(axis=0)


def _tensor(lo, hi, res):
    axes = [np.linspace(a, b, res) for a, b in zip(lo, hi)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _search_step(spec):
    lo, hi = _bounding_box(spec)
    return (hi - lo) / (spec.search_resolution - 1)


def _argmin_rows(values):
    # first minimum in candidate order; candidates are generated in
    # lexicographic order so this is the lexicographic tie-break
    idx = np.argmin(values, axis=1)
    return idx, values[np.arange(values.shape[0]), idx]


def _closed_form(spec, P):
    c = spec.l1_coeff if spec.l1_kind == "quadratic" else 0.0
    if spec.control_kind == "ball":
        R = spec.radius
        norm = np.linalg.norm(P, axis=1)
        U = np.zeros_like(P)
        if c > 0:
            inside = norm <= 2.0 * c * R
            U[inside] = -P[inside] / (2.0 * c)
            out = ~inside
            U[out] = -R * P[out] / norm[out, None]
        else:
            nz = norm > 0
            U[nz] = -R * P[nz] / norm[nz, None]
            U[~nz, 0] = -R
        return U
    lo, hi = np.asarray(spec.lower), np.asarray(spec.upper)
    if c > 0:
        return np.clip(-P / (2.0 * c), lo, hi)
    return np.where(P < 0, hi, lo)


def _grid_search(spec, P):
    cand = _tensor(*_bounding_box(spec), spec.search_resolution)
    cand = cand[spec.contains(cand)]
    l1c = spec.l1(cand)
    step = _search_step(spec)
    local = _tensor(-step, step, 2 * _REFINE + 1)
    U = np.empty_like(P)
    for s in range(0, P.shape[0], _CHUNK):
        chunk = P[s : s + _CHUNK]
        idx, _ = _argmin_rows(chunk @ cand.T + l1c[None, :])
        best = cand[idx]
        trial = best[:, None, :] + local[None, :, :]
        flat = trial.reshape(-1, spec.control_dim)
        vals = np.einsum("nd,nkd->nk", chunk, trial) + spec.l1(flat).reshape(trial.shape[:2])
        vals[~spec.contains(flat).reshape(trial.shape[:2])] = np.inf
        jdx, _ = _argmin_rows(vals)
        U[s : s + _CHUNK] = trial[np.arange(chunk.shape[0]), jdx]
    return U


def _minimize(spec, p):
    P, single = _as_batch(p, spec.control_dim)
    if spec.control_kind == "points":
        pts = spec.point_array()
        l1p = spec.l1(pts, index=np.arange(len(pts)))
        idx, vals = _argmin_rows(P @ pts.T + l1p[None, :])
        return vals, pts[idx], single
    if spec.l1_kind in ("zero", "quadratic"):
        U = _closed_form(spec, P)
    else:
        U = _grid_search(spec, P)
    vals = np.sum(P * U, axis=1) + spec.l1(U)
    return vals, U, single


def h_min(spec, p):
    """``inf_U <p, u> + l1(u)`` for one vector or a batch ``(n, d_U)``."""
    vals, _, single = _minimize(spec, p)
    return float(vals[0]) if single else vals


def feedback_control(spec, p):
    """A minimizer of ``<p, u> + l1(u)`` over ``U``, lexicographically
    smallest among ties.
    """
    _, U, single = _minimize(spec, p)
    return U[0] if single else U


def _ball_grid(M, dim, res):
    cand = _tensor(np.full(dim, -M), np.full(dim, M), res)
    return cand[np.linalg.norm(cand, axis=1) <= M * (1.0 + 1e-12)]


def nisio_g(spec, alpha, M=None):
    """``g(alpha) = sup_{|p| <= M} H_min(p) - <alpha, p>`` by grid search
    with one refinement pass.
    """
    A, single = _as_batch(alpha, spec.control_dim)
    M = spec.nisio_bound() if M is None else float(M)
    res = spec.search_resolution
    if M == 0.0:
        vals = np.full(A.shape[0], h_min(spec, np.zeros(spec.control_dim)))
        return float(vals[0]) if single else vals
    cand = _ball_grid(M, spec.control_dim, res)
    hc = h_min(spec, cand)
    step = 2.0 * M / (res - 1)
    local = _tensor(np.full(spec.control_dim, -step), np.full(spec.control_dim, step), 2 * _REFINE + 1)
    out = np.empty(A.shape[0])
    for s in range(0, A.shape[0], _CHUNK):
        chunk = A[s : s + _CHUNK]
        idx = np.argmax(hc[None, :] - chunk @ cand.T, axis=1)
        trial = cand[idx][:, None, :] + local[None, :, :]
        flat = trial.reshape(-1, spec.control_dim)
        vals = h_min(spec, flat).reshape(trial.shape[:2]) - np.einsum("nd,nkd->nk", chunk, trial)
        vals[(np.linalg.norm(flat, axis=1) > M * (1.0 + 1e-12)).reshape(trial.shape[:2])] = -np.inf
        out[s : s + _CHUNK] = vals.max(axis=1)
    return float(out[0]) if single else out


def _nisio_controls(spec, M):
    res = spec.search_resolution if spec.control_dim == 1 else min(spec.search_resolution, 41)
    return _ball_grid(M, spec.control_dim, res)


def nisio_step(spec, u, eps, substeps=1, embedding=None, M=None):
    """Discrete Nisio operator ``N_eps`` applied to a grid function.

    Args:
        spec: the :class:`HamiltonianSpec`.
        u: :class:`GridFunction` over the projected coordinates.
        eps: step length, positive.
        substeps: ``N_eps`` is the ``substeps``-fold composition of
            ``N_{eps / substeps}``.
        embedding: ``(n_proj, d_U)`` matrix ``P B``; identity when the grid
            and control dimensions agree.
        M: radius of the auxiliary control ball; ``spec.nisio_bound()`` by
            default.
    """
    if not eps > 0:
        raise ValueError("Nisio step needs eps > 0, got %s" % eps)
    if substeps < 1:
        raise ValueError("substeps must be at least 1")
    if embedding is None:
        if u.dim != spec.control_dim:
            raise ValueError("an embedding is required when grid and control dimensions differ")
        embedding = np.eye(u.dim)
    embedding = np.asarray(embedding, dtype=np.float64).reshape(u.dim, spec.control_dim)
    M = spec.nisio_bound() if M is None else float(M)
    controls = _nisio_controls(spec, M)
    g = nisio_g(spec, controls, M)
    h = eps / substeps
    nodes = u.nodes()
    moves = controls @ embedding.T
    current = u
    for _ in range(substeps):
        table = current.flat_values()[:, None]
        best = np.empty(nodes.shape[0])
        for s in range(0, nodes.shape[0], _CHUNK):
            block = nodes[s : s + _CHUNK]
            pts = (block[:, None, :] + h * moves[None, :, :]).reshape(-1, u.dim)
            shifted = interpolate(u.axes, table, pts)[:, 0].reshape(block.shape[0], -1)
            best[s : s + _CHUNK] = np.min(h * g[None, :] + shifted, axis=1)
        current = GridFunction(u.axes, best.reshape(u.shape))
    return current


def _sample_ball(rng, n, dim, radius):
    x = rng.standard_normal((n, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x * (radius * rng.random(n) ** (1.0 / dim))[:, None]


def _search_tolerance(spec, p_norm):
    if spec.control_kind == "points" or spec.l1_kind in ("zero", "quadratic"):
        return 1e-9
    step = float(np.linalg.norm(_search_step(spec))) / _REFINE
    return 1e-9 + step * (p_norm + spec.l1_coeff)


def check_concavity(spec, n_samples=1000, seed=0, radius=None):
    """Midpoint concavity of ``H_min`` on random pairs."""
    rng = counter_stream(seed, 0)
    radius = 2.0 * spec.nisio_bound() if radius is None else radius
    p = _sample_ball(rng, n_samples, spec.control_dim, radius)
    q = _sample_ball(rng, n_samples, spec.control_dim, radius)
    gap = 0.5 * (h_min(spec, p) + h_min(spec, q)) - h_min(spec, 0.5 * (p + q))
    worst = float(max(gap.max(), 0.0))
    tol = _search_tolerance(spec, radius)
    return make_report(
        "hamiltonian_concavity",
        {"spec": spec.to_dict(), "n_samples": n_samples, "seed": seed, "radius": radius},
        worst,
        tol,
    )


def check_lipschitz(spec, n_samples=1000, seed=0, radius=None):
    """``|H_min(p) - H_min(q)| <= sup_U |u| |p - q|`` on random pairs."""
    rng = counter_stream(seed, 1)
    radius = 2.0 * spec.nisio_bound() if radius is None else radius
    p = _sample_ball(rng, n_samples, spec.control_dim, radius)
    q = _sample_ball(rng, n_samples, spec.control_dim, radius)
    lhs = np.abs(h_min(spec, p) - h_min(spec, q))
    excess = lhs - lipschitz_constant(spec) * np.linalg.norm(p - q, axis=1)
    tol = 2.0 * _search_tolerance(spec, radius)
    return make_report(
        "hamiltonian_lipschitz",
        {"spec": spec.to_dict(), "n_samples": n_samples, "seed": seed},
        float(max(excess.max(), 0.0)),
        tol,
    )


def check_g_duality(spec, n_samples=50, seed=0, tolerance=1e-3):
    """``H_min(p) = inf_{|a| <= M} <a, p> + g(a)`` for ``|p| <= M``."""
    rng = counter_stream(seed, 2)
    M = spec.nisio_bound()
    p = _sample_ball(rng, n_samples, spec.control_dim, M)
    controls = _nisio_controls(spec, M)
    g = nisio_g(spec, controls, M)
    rebuilt = np.min(p @ controls.T + g[None, :], axis=1)
    defect = float(np.abs(rebuilt - h_min(spec, p)).max())
    return make_report(
        "nisio_g_duality",
        {"spec": spec.to_dict(), "n_samples": n_samples, "seed": seed},
        defect,
        tolerance,
    )
