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

"""Quadrature rules in space (Gaussian expectations) and time (Laplace
transforms and the weighted trajectory space).

"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import hermite_e, legendre

from numba_hjb import config
from numba_hjb.utils.constants import numerics

__all__ = [
    "QuadratureRule",
    "TimeMesh",
    "counter_stream",
    "resolvent_time_mesh",
    "graded_nodes",
    "tail_bound",
]


def counter_stream(seed, task):
    """Generator keyed by ``(seed, task)``.

    Philox is counter based; the task index occupies the third counter word
    so streams of different tasks never overlap and do not depend on the
    order in which tasks run.
    """
    bitgen = np.random.Philox(key=int(seed), counter=[0, 0, int(task), 0])
    return np.random.Generator(bitgen)


@lru_cache(maxsize=None)
def _hermite_tensor(n_nodes, dim):
    x, w = hermite_e.hermegauss(n_nodes)
    w = w / w.sum()
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    z = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    z.setflags(write=False)
    weights.setflags(write=False)
    return z, weights


@dataclass(frozen=True)
class QuadratureRule:
    """Rule for expectations under the standard normal law.

    ``kind`` is ``"gauss_hermite_tensor"`` (``nodes`` per axis, weights
    normalized to one) or ``"monte_carlo"`` (``n_samples`` draws from the
    stream keyed by ``seed`` and the task index).
    """

    kind: str = "gauss_hermite_tensor"
    nodes: int = numerics.GH_NODES
    n_samples: int = numerics.MC_SAMPLES
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("gauss_hermite_tensor", "monte_carlo"):
            raise ValueError("unknown quadrature kind %r" % (self.kind,))
        if self.nodes < 1 or self.n_samples < 2:
            raise ValueError("quadrature rule needs at least one node")

    @classmethod
    def default_for(cls, dim, seed=0):
        if dim <= numerics.GH_MAX_DIM:
            return cls("gauss_hermite_tensor", seed=seed)
        return cls("monte_carlo", seed=seed)

    def standard_normal(self, dim, task=0):
        """Nodes ``z`` of shape ``(n_q, dim)`` and weights ``w`` summing to 1."""
        if self.kind == "gauss_hermite_tensor":
            return _hermite_tensor(self.nodes, dim)
        rng = counter_stream(self.seed, task)
        z = rng.standard_normal((self.n_samples, dim))
        return z, np.full(self.n_samples, 1.0 / self.n_samples)


@dataclass(frozen=True)
class TimeMesh:
    """Nodes and weights of a quadrature for ``integral_0^t_max f(t) dt``."""

    nodes: np.ndarray
    weights: np.ndarray
    t_max: float

    def __len__(self):
        return self.nodes.size

    def laplace_mass(self, lam):
        return float(np.sum(self.weights * np.exp(-lam * self.nodes)))


def _gauss_legendre(a, b, n):
    x, w = legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def resolvent_time_mesh(lam, gamma, tol, source_norm, n_inner=24, n_panel=8):
    """Time mesh for ``integral_0^inf exp(-lam t) f(t) dt``.

    On ``[0, 1]`` the substitution ``t = s**(1 / (1 - gamma))`` removes a
    ``t**-gamma`` singularity of the integrand; ``[1, t_max]`` is covered by
    doubling panels. ``t_max`` is the smallest horizon whose tail
    ``exp(-lam t_max) * source_norm / lam`` is within the tail share of
    ``tol``.
    """
    if lam <= 0:
        raise ValueError("discount must be positive, got %s" % lam)
    if not 0.0 <= gamma < 1.0:
        raise ValueError("smoothing exponent must lie in [0, 1), got %s" % gamma)
    tail_target = numerics.TAIL_FRACTION * tol
    t_max = 1.0
    if source_norm > 0.0:
        t_max = max(1.0, np.log(source_norm / (lam * tail_target)) / lam)

    power = 1.0 / (1.0 - gamma)
    s, ws = _gauss_legendre(0.0, 1.0, n_inner)
    nodes = [s ** power]
    weights = [ws * power * s ** (power - 1.0)]
    left = 1.0
    while left < t_max:
        right = min(2.0 * left, t_max)
        t, w = _gauss_legendre(left, right, n_panel)
        nodes.append(t)
        weights.append(w)
        left = right

    mesh = TimeMesh(np.concatenate(nodes), np.concatenate(weights), float(t_max))
    if config.DEBUG:
        print(
            "[time mesh] lambda=%g gamma=%g t_max=%g nodes=%d"
            % (lam, gamma, t_max, len(mesh))
        )
    return mesh


def tail_bound(lam, t_max, source_norm):
    return float(np.exp(-lam * t_max) * source_norm / lam)


def graded_nodes(t_max, m_nodes, power=2.0):
    """Nodes ``t_i = t_max (i/m)**power`` for ``i = 1..m`` with trapezoid
    weights in the uniform variable, so ``sum w_i f(t_i)`` approximates
    ``integral_0^t_max f(t) dt``.
    """
    if m_nodes < 4:
        raise ValueError("at least 4 lifting nodes are required, got %d" % m_nodes)
    u = np.arange(1, m_nodes + 1) / m_nodes
    nodes = t_max * u ** power
    weights = (t_max * power / m_nodes) * u ** (power - 1.0)
    weights[-1] *= 0.5
    return TimeMesh(nodes, weights, float(t_max))
