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

"""Finite spectral truncations of controlled Ornstein-Uhlenbeck dynamics.

A model keeps the drift ``A`` as a list of diagonal blocks: 1x1 decaying
blocks (heat modes, value ``-a``) and 2x2 rotation blocks
``[[0, w], [-w, 0]]`` (wave mode pairs in energy coordinates). Every matrix
exponential is then a sum of terms ``C exp(-alpha s) trig(beta s)`` and the
covariance ``Q_t = int_0^t exp(sA) G G* exp(sA*) ds`` has a closed form.

The covariance follows the defining integral. For a heat mode this gives
``g**2 (1 - exp(-2 a t)) / (2 a)``; the printed heat formula in the source
literature omits the factor 1/2.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from numba_hjb.errors import SmoothingHypothesisError
from numba_hjb.utils.linalg import symmetrize
from numba_hjb.utils.misc import as_points

__all__ = [
    "DriftBlock",
    "SpectralModel",
    "CostSpec",
    "build_heat_model",
    "build_wave_model",
    "dirichlet_coefficient",
    "flow",
    "flow_matrix",
    "covariance",
    "control_integral",
]

_J = np.array([[0.0, 1.0], [-1.0, 0.0]])
_ZERO_FREQ = 1e-14


def _damped_cos(alpha, beta, t):
    """int_0^t exp(-alpha s) cos(beta s) ds, ``t`` may be ``inf`` when alpha > 0."""
    denom = alpha * alpha + beta * beta
    if denom < _ZERO_FREQ:
        return t
    if np.isinf(t):
        return alpha / denom
    decay = np.exp(-alpha * t)
    return (alpha - decay * (alpha * np.cos(beta * t) - beta * np.sin(beta * t))) / denom


def _damped_sin(alpha, beta, t):
    """int_0^t exp(-alpha s) sin(beta s) ds."""
    denom = alpha * alpha + beta * beta
    if denom < _ZERO_FREQ:
        return 0.0
    if np.isinf(t):
        return beta / denom
    decay = np.exp(-alpha * t)
    return (beta - decay * (alpha * np.sin(beta * t) + beta * np.cos(beta * t))) / denom


def _product_integral(term_p, term_q, t):
    """int_0^t of the product of two scalar responses ``exp(-a s) trig(b s)``."""
    _, a1, b1, k1 = term_p
    _, a2, b2, k2 = term_q
    alpha = a1 + a2
    if k1 == "cos" and k2 == "cos":
        return 0.5 * (_damped_cos(alpha, b1 - b2, t) + _damped_cos(alpha, b1 + b2, t))
    if k1 == "sin" and k2 == "sin":
        return 0.5 * (_damped_cos(alpha, b1 - b2, t) - _damped_cos(alpha, b1 + b2, t))
    if k1 == "sin":
        return 0.5 * (_damped_sin(alpha, b1 + b2, t) + _damped_sin(alpha, b1 - b2, t))
    return 0.5 * (_damped_sin(alpha, b1 + b2, t) + _damped_sin(alpha, b2 - b1, t))


@dataclass(frozen=True)
class DriftBlock:
    """One diagonal block of the drift, starting at coordinate ``start``."""

    kind: str
    rate: float
    start: int

    @property
    def size(self):
        return 1 if self.kind == "decay" else 2

    @property
    def stop(self):
        return self.start + self.size

    def generator(self):
        if self.kind == "decay":
            return np.array([[-self.rate]])
        return self.rate * _J

    def terms(self):
        """Exponential as ``sum C exp(-alpha s) trig(beta s)``."""
        if self.kind == "decay":
            return [(np.eye(1), self.rate, 0.0, "cos")]
        return [(np.eye(2), 0.0, self.rate, "cos"), (_J, 0.0, self.rate, "sin")]

    def exp(self, t):
        if self.kind == "decay":
            return np.array([[np.exp(-self.rate * t)]])
        c, s = np.cos(self.rate * t), np.sin(self.rate * t)
        return np.array([[c, s], [-s, c]])

    def integral(self, t):
        """int_0^t exp(s A_block) ds."""
        out = np.zeros((self.size, self.size))
        for mat, alpha, beta, kind in self.terms():
            weight = _damped_cos(alpha, beta, t) if kind == "cos" else _damped_sin(alpha, beta, t)
            out += mat * weight
        return out


@dataclass(frozen=True)
class SpectralModel:
    """Finite spectral reduction of ``(A, B, G, P)``.

    Immutable after construction and safe to share between workers.
    """

    blocks: Tuple[DriftBlock, ...]
    noise_matrix: np.ndarray
    control_matrix: np.ndarray
    projection_indices: Tuple[int, ...]
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        pos = 0
        for block in self.blocks:
            if block.kind not in ("decay", "rotation"):
                raise ValueError("unknown drift block kind %r" % (block.kind,))
            if block.start != pos:
                raise ValueError("drift blocks must tile the coordinates in order")
            if not block.rate > 0:
                raise ValueError(
                    "drift block at %d needs a positive rate, got %s"
                    % (block.start, block.rate)
                )
            pos = block.stop
        n_total = pos
        G = np.atleast_2d(np.asarray(self.noise_matrix, dtype=np.float64))
        B = np.atleast_2d(np.asarray(self.control_matrix, dtype=np.float64))
        if G.shape[0] != n_total or B.shape[0] != n_total:
            raise ValueError(
                "noise and control matrices need %d rows, got %d and %d"
                % (n_total, G.shape[0], B.shape[0])
            )
        proj = tuple(int(i) for i in self.projection_indices)
        if not proj:
            raise ValueError("projection_indices must be nonempty")
        if min(proj) < 0 or max(proj) >= n_total or len(set(proj)) != len(proj):
            raise ValueError("projection_indices out of range or repeated: %s" % (proj,))
        G.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "noise_matrix", G)
        object.__setattr__(self, "control_matrix", B)
        object.__setattr__(self, "projection_indices", proj)

    @property
    def n_total(self):
        return self.blocks[-1].stop

    @property
    def n_proj(self):
        return len(self.projection_indices)

    @property
    def noise_dim(self):
        return self.noise_matrix.shape[1]

    @property
    def control_dim(self):
        return self.control_matrix.shape[1]

    @property
    def drift_blocks(self):
        return self.blocks

    @property
    def growth_bound(self):
        """``(M_sg, omega)`` with ``||exp(tA)|| <= M_sg exp(omega t)``."""
        omega = max(-b.rate if b.kind == "decay" else 0.0 for b in self.blocks)
        return 1.0, omega

    @property
    def is_decaying(self):
        return all(b.kind == "decay" for b in self.blocks)

    def projector(self):
        P = np.zeros((self.n_proj, self.n_total))
        P[np.arange(self.n_proj), self.projection_indices] = 1.0
        return P

    def projection_commutes(self):
        """True when the projection keeps whole drift blocks."""
        proj = set(self.projection_indices)
        for block in self.blocks:
            covered = [i in proj for i in range(block.start, block.stop)]
            if any(covered) and not all(covered):
                return False
        return True

    def project(self, x):
        x = np.asarray(x, dtype=np.float64)
        return x[..., list(self.projection_indices)]

    def generator_matrix(self):
        A = np.zeros((self.n_total, self.n_total))
        for b in self.blocks:
            A[b.start : b.stop, b.start : b.stop] = b.generator()
        return A

    def projected_control(self):
        """``P B``, the control embedding seen by projected coordinates."""
        return self.control_matrix[list(self.projection_indices), :]

    def to_dict(self):
        return {"kind": self.kind, "n_total": self.n_total, **self.params}


def dirichlet_coefficient(n, L=np.pi):
    """Coefficient of the harmonic extension ``1 - xi/L`` of a unit left
    boundary datum on the sine eigenfunction ``sqrt(2/L) sin(n pi xi / L)``.
    """
    if n < 1:
        raise ValueError("mode index must be >= 1, got %s" % n)
    if L <= 0:
        raise ValueError("domain length must be positive, got %s" % L)
    return np.sqrt(2.0 / L) * L / (n * np.pi)


def build_heat_model(n_modes, L=np.pi, beta=0.0, n_proj=1):
    """Heat equation on ``(0, L)`` with Dirichlet boundary control at 0.

    Mode ``n`` has eigenvalue ``(n pi / L)**2``, noise ``lambda_n**-beta``
    and control coefficient ``lambda_n * dirichlet_coefficient(n, L)``,
    which grows linearly in ``n``. The projection keeps the first
    ``n_proj`` modes.
    """
    if n_modes < 1 or n_proj < 1:
        raise ValueError("n_modes and n_proj must be positive")
    if n_proj > n_modes:
        raise ValueError("n_proj=%d exceeds n_modes=%d" % (n_proj, n_modes))
    if L <= 0:
        raise ValueError("domain length must be positive, got %s" % L)
    if beta < 0:
        raise ValueError("beta must be nonnegative, got %s" % beta)
    n = np.arange(1, n_modes + 1)
    eig = (n * np.pi / L) ** 2
    blocks = tuple(DriftBlock("decay", float(a), i) for i, a in enumerate(eig))
    G = np.diag(eig ** -beta)
    B = (eig * np.array([dirichlet_coefficient(k, L) for k in n]))[:, None]
    params = {"n_modes": n_modes, "length": float(L), "beta": float(beta), "n_proj": n_proj}
    return SpectralModel(blocks, G, B, tuple(range(n_proj)), "heat", params)


def build_wave_model(n_mode_pairs, c=1.0, sigma=1.0, n_proj_pairs=1, L=np.pi):
    """Damping-free wave equation in energy coordinates.

    Pair ``n`` occupies coordinates ``(2n, 2n + 1)`` (scaled position,
    velocity) with rotation rate ``c n pi / L``. Control ``k`` drives the
    velocity of pair ``k``. ``sigma`` is a scalar (independent unit noise on
    each projected velocity) or a matrix whose row ``n`` is the velocity
    noise of pair ``n``.

    Raises:
        SmoothingHypothesisError: the projected velocity noise covariance is
            rank deficient.
    """
    if n_mode_pairs < 1 or n_proj_pairs < 1:
        raise ValueError("n_mode_pairs and n_proj_pairs must be positive")
    if n_proj_pairs > n_mode_pairs:
        raise ValueError(
            "n_proj_pairs=%d exceeds n_mode_pairs=%d" % (n_proj_pairs, n_mode_pairs)
        )
    if c <= 0 or L <= 0:
        raise ValueError("wave speed and domain length must be positive")
    n_total = 2 * n_mode_pairs
    sig = np.asarray(sigma, dtype=np.float64)
    if sig.ndim == 0:
        sig = float(sig) * np.eye(n_proj_pairs)
    elif sig.ndim == 1:
        sig = np.diag(sig)
    if sig.shape[0] not in (n_proj_pairs, n_mode_pairs):
        raise ValueError(
            "sigma needs %d or %d rows, got %d"
            % (n_proj_pairs, n_mode_pairs, sig.shape[0])
        )
    projected = symmetrize(sig[:n_proj_pairs] @ sig[:n_proj_pairs].T)
    evals = np.linalg.eigvalsh(projected)
    if evals.max() <= 0.0 or evals.min() <= 1e-12 * evals.max():
        raise SmoothingHypothesisError(
            "smoothing hypothesis violated numerically: projected velocity "
            "noise covariance is rank deficient (eigenvalues %s)" % (evals,)
        )
    G = np.zeros((n_total, sig.shape[1]))
    G[2 * np.arange(sig.shape[0]) + 1, :] = sig
    B = np.zeros((n_total, n_mode_pairs))
    B[2 * np.arange(n_mode_pairs) + 1, np.arange(n_mode_pairs)] = 1.0
    blocks = tuple(
        DriftBlock("rotation", c * (k + 1) * np.pi / L, 2 * k) for k in range(n_mode_pairs)
    )
    proj = tuple(range(2 * n_proj_pairs))
    params = {
        "n_modes": n_mode_pairs,
        "c": float(c),
        "length": float(L),
        "n_proj": n_proj_pairs,
        "sigma": sig.tolist(),
    }
    return SpectralModel(blocks, G, B, proj, "wave", params)


def flow_matrix(model, t):
    """Dense ``exp(tA)``."""
    if t < 0:
        raise ValueError("flow time must be nonnegative, got %s" % t)
    E = np.zeros((model.n_total, model.n_total))
    for b in model.blocks:
        E[b.start : b.stop, b.start : b.stop] = b.exp(t)
    return E


def flow(model, t, x):
    """Apply ``exp(tA)`` to a state or a batch of states (last axis)."""
    E = flow_matrix(model, t)
    return np.asarray(x, dtype=np.float64) @ E.T


def control_integral(model, dt):
    """``int_0^dt exp(sA) ds B`` from closed-form block primitives."""
    if dt < 0:
        raise ValueError("step must be nonnegative, got %s" % dt)
    K = np.zeros((model.n_total, model.n_total))
    for b in model.blocks:
        K[b.start : b.stop, b.start : b.stop] = b.integral(dt)
    return K @ model.control_matrix


def covariance(model, t, projected_only=False):
    """``Q_t = int_0^t exp(sA) G G* exp(sA*) ds``.

    ``t = inf`` gives the stationary covariance of a decaying model.
    """
    if not t > 0:
        raise ValueError("covariance needs t > 0, got %s" % t)
    if np.isinf(t) and not model.is_decaying:
        raise ValueError("stationary covariance needs a strictly decaying drift")
    M = model.noise_matrix @ model.noise_matrix.T
    blocks = model.blocks
    if projected_only:
        keep = set(model.projection_indices)
        blocks = [b for b in blocks if any(i in keep for i in range(b.start, b.stop))]
    Q = np.zeros((model.n_total, model.n_total))
    for bi in blocks:
        for bj in blocks:
            Mij = M[bi.start : bi.stop, bj.start : bj.stop]
            if not np.any(Mij):
                continue
            acc = np.zeros((bi.size, bj.size))
            for term_p in bi.terms():
                for term_q in bj.terms():
                    weight = _product_integral(term_p, term_q, t)
                    if weight != 0.0:
                        acc += weight * (term_p[0] @ Mij @ term_q[0].T)
            Q[bi.start : bi.stop, bj.start : bj.stop] = acc
    Q = symmetrize(Q)
    if projected_only:
        idx = list(model.projection_indices)
        return Q[np.ix_(idx, idx)]
    return Q


@dataclass(frozen=True)
class CostSpec:
    """State cost ``l0`` acting on projected coordinates.

    ``kind`` is ``"constant"`` (value ``amplitude``), ``"cosine"``
    (``amplitude * cos(<weights, x> + phase)``) or ``"logistic"``
    (``amplitude / (1 + exp(-(x' S x - offset)))`` with ``S = diag(weights)``).
    """

    kind: str = "cosine"
    amplitude: float = 1.0
    weights: Tuple[float, ...] = (1.0,)
    phase: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "cosine", "logistic"):
            raise ValueError("unknown cost kind %r" % (self.kind,))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    @property
    def bound(self):
        return abs(float(self.amplitude))

    def sup_norm(self):
        return self.bound

    def __call__(self, points):
        if self.kind == "constant":
            arr = np.asarray(points, dtype=np.float64)
            if arr.ndim <= 1:
                return float(self.amplitude)
            return np.full(arr.shape[0], float(self.amplitude))
        pts, single = as_points(points, len(self.weights))
        if self.kind == "cosine":
            out = self.amplitude * np.cos(pts @ np.asarray(self.weights) + self.phase)
        else:
            quad = (pts * pts) @ np.asarray(self.weights)
            out = self.amplitude / (1.0 + np.exp(-(quad - self.offset)))
        return out[0] if single else out

    def evaluate_state(self, model, x):
        """Evaluate on full states by projecting first."""
        return self(model.project(x))

    def to_dict(self):
        return {
            "kind": self.kind,
            "amplitude": float(self.amplitude),
            "weights": list(self.weights),
            "phase": float(self.phase),
            "offset": float(self.offset),
        }
