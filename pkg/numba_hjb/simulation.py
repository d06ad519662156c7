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

"""Controlled trajectories and Monte-Carlo estimates of the discounted cost.

Paths are stepped with the exact Gaussian transition of the
Ornstein-Uhlenbeck dynamics under a control held constant over each step:

    x_{k+1} = exp(dt A) x_k + int_0^dt exp(sA) ds B u_k + N(0, Q_dt).

Path ``p`` draws its noise from the counter-based stream ``(seed, p)``, so a
path does not depend on how paths are grouped into chunks.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from numba_hjb import config
from numba_hjb.hamiltonian import HamiltonianSpec, feedback_control
from numba_hjb.spectral_model import control_integral, covariance, flow_matrix
from numba_hjb.utils.grid import GridFunction
from numba_hjb.utils.linalg import psd_sqrt
from numba_hjb.utils.quadrature import counter_stream

__all__ = [
    "Policy",
    "CostEstimate",
    "PathEnsemble",
    "simulate_paths",
    "evaluate_policy_cost",
    "default_horizon",
]

# noise values held per chunk of paths
_NOISE_BLOCK = 1 << 22


@dataclass(frozen=True, eq=False)
class Policy:
    """Control law evaluated at the start of every step.

    ``kind`` is ``"zero"``, ``"constant"`` (``u0``) or ``"feedback"``, which
    applies ``feedback_control(spec, grad_B v(P x))`` for the solved value
    function ``value``.
    """

    kind: str = "zero"
    u0: Optional[Tuple[float, ...]] = None
    value: Optional[GridFunction] = None
    spec: Optional[HamiltonianSpec] = None

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "feedback"):
            raise ValueError("unknown policy kind %r" % (self.kind,))
        if self.kind == "constant" and self.u0 is None:
            raise ValueError("constant policy needs u0")
        if self.kind == "feedback":
            if self.value is None or self.spec is None:
                raise ValueError("feedback policy needs a value function and a spec")
            if self.value.gradient_values is None:
                raise ValueError("feedback policy needs the gradient grid of v")
        if self.u0 is not None:
            object.__setattr__(
                self, "u0", tuple(np.atleast_1d(np.asarray(self.u0, dtype=np.float64)))
            )

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def constant(cls, u0):
        return cls("constant", u0=u0)

    @classmethod
    def feedback(cls, value, spec):
        return cls("feedback", value=value, spec=spec)

    def controls(self, states_proj, control_dim):
        n = states_proj.shape[0]
        if self.kind == "zero":
            return np.zeros((n, control_dim))
        if self.kind == "constant":
            return np.tile(np.asarray(self.u0), (n, 1))
        return feedback_control(self.spec, self.value.gradient(states_proj)).reshape(n, -1)

    def to_dict(self):
        return {"kind": self.kind, "u0": self.u0}


@dataclass(frozen=True)
class CostEstimate:
    """Monte-Carlo estimate of the discounted cost from one initial state.

    ``tail_bound`` is ``(|l0| + sup|l1|) exp(-lam horizon) / lam``, the cost
    beyond the simulated horizon; it is part of ``half_width``.
    """

    mean: float
    stderr: float
    n_paths: int
    horizon: float
    tail_bound: float

    @property
    def half_width(self):
        return 1.96 * self.stderr + self.tail_bound

    def interval(self):
        return self.mean - self.half_width, self.mean + self.half_width

    def to_dict(self):
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "n_paths": self.n_paths,
            "horizon": self.horizon,
            "tail_bound": self.tail_bound,
            "half_width": self.half_width,
        }


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """Projected states ``(n_paths, n_steps + 1, n_proj)``, controls
    ``(n_paths, n_steps, d_U)`` and full final states ``(n_paths, n_total)``.
    """

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    final_states: np.ndarray

    @property
    def n_paths(self):
        return self.states.shape[0]


def _initial_state(model, x0):
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    if x0.size == model.n_total:
        return x0
    if x0.size == model.n_proj:
        full = np.zeros(model.n_total)
        full[list(model.projection_indices)] = x0
        return full
    raise ValueError(
        "initial state needs %d (full) or %d (projected) entries, got %d"
        % (model.n_total, model.n_proj, x0.size)
    )


def _n_steps(dt, horizon):
    if not dt > 0:
        raise ValueError("time step must be positive, got %s" % dt)
    if not horizon >= dt:
        raise ValueError("horizon %s is shorter than the step %s" % (horizon, dt))
    return int(np.ceil(horizon / dt - 1e-9))


def _steps(model, x0, policy, dt, n_steps, paths, seed, spec):
    """Step the paths with indices ``paths`` together; yields
    ``(k, states, controls)`` for ``k = 0..n_steps``, the final yield
    carrying ``None`` controls.

    Every path draws from its own stream in step order, a block of steps
    at a time, so a path does not depend on the chunk it is stepped in.
    """
    E = flow_matrix(model, dt)
    K = control_integral(model, dt)
    L = psd_sqrt(covariance(model, dt))
    streams = [counter_stream(seed, p) for p in paths]
    block = max(1, _NOISE_BLOCK // (len(paths) * model.n_total))
    x = np.repeat(x0[None, :], len(paths), axis=0)
    for k in range(n_steps):
        if k % block == 0:
            width = min(block, n_steps - k)
            noise = np.stack(
                [g.standard_normal((width, model.n_total)) for g in streams]
            ) @ L.T
        u = policy.controls(model.project(x), model.control_dim)
        if spec is not None and not np.all(spec.contains(u)):
            raise ValueError("policy %s emitted a control outside U" % policy.kind)
        yield k, x, u
        x = x @ E.T + u @ K.T + noise[:, k % block]
    yield n_steps, x, None


def _chunks(n_paths):
    size = max(1, int(config.MC_CHUNK))
    for start in range(0, n_paths, size):
        yield range(start, min(start + size, n_paths))


def simulate_paths(model, x0, policy, dt, T_h, n_paths, seed=0, spec=None):
    """Simulate ``n_paths`` controlled trajectories on ``[0, T_h]``.

    Args:
        model: :class:`SpectralModel`.
        x0: full state, or projected state padded with zeros.
        policy: :class:`Policy`.
        dt: positive step.
        T_h: horizon, at least ``dt``; rounded up to a multiple of ``dt``.
        n_paths: number of paths.
        seed: key of the per-path noise streams.
        spec: when given, every control is checked to lie in ``U``.

    Returns:
        :class:`PathEnsemble`.
    """
    n_steps = _n_steps(dt, T_h)
    x0 = _initial_state(model, x0)
    spec = spec if spec is not None else policy.spec
    states = np.empty((n_paths, n_steps + 1, model.n_proj))
    controls = np.empty((n_paths, n_steps, model.control_dim))
    final = np.empty((n_paths, model.n_total))
    for paths in _chunks(n_paths):
        rows = slice(paths.start, paths.stop)
        for k, x, u in _steps(model, x0, policy, dt, n_steps, paths, seed, spec):
            states[rows, k] = model.project(x)
            if u is None:
                final[rows] = x
            else:
                controls[rows, k] = u
    times = dt * np.arange(n_steps + 1)
    return PathEnsemble(times, states, controls, final)


def default_horizon(lam, bound, target_ci, dt):
    """Smallest multiple of ``dt`` whose tail ``bound exp(-lam T) / lam`` is
    at most a tenth of ``target_ci``.
    """
    if bound <= 0:
        return dt
    T = np.log(bound / (lam * 0.1 * target_ci)) / lam
    return float(dt * max(1, int(np.ceil(T / dt - 1e-9))))


def evaluate_policy_cost(model, spec, l0, x0, policy, lam, sim=None, **overrides):
    """Estimate ``E int_0^inf exp(-lam t) (l0(X_t) + l1(u_t)) dt``.

    The running cost is held at its step-start value and integrated with
    the exact weights ``int_{t_k}^{t_k + dt} exp(-lam s) ds``.

    Args:
        model, spec, l0: problem data.
        x0: initial state.
        policy: :class:`Policy`.
        lam: positive discount.
        sim: :class:`SimulateConfig` (``dt``, ``horizon``, ``n_paths``,
            ``seed``, ``target_ci``); keyword overrides take precedence.

    Returns:
        :class:`CostEstimate`.
    """
    if not lam > 0:
        raise ValueError("discount must be positive, got %s" % lam)
    opts = {"dt": 0.01, "horizon": None, "n_paths": 10000, "seed": 0, "target_ci": 0.01}
    if sim is not None:
        opts.update({k: getattr(sim, k) for k in opts})
    opts.update(overrides)
    dt = opts["dt"]
    bound = float(l0.sup_norm()) + spec.l1_sup()
    horizon = opts["horizon"] or default_horizon(lam, bound, opts["target_ci"], dt)
    n_steps = _n_steps(dt, horizon)
    n_paths = int(opts["n_paths"])
    if n_paths < 2:
        raise ValueError("at least two paths are needed for a standard error")
    x0 = _initial_state(model, x0)
    weights = np.exp(-lam * dt * np.arange(n_steps)) * (-np.expm1(-lam * dt)) / lam

    totals = np.empty(n_paths)
    for paths in _chunks(n_paths):
        acc = np.zeros(len(paths))
        for k, x, u in _steps(model, x0, policy, dt, n_steps, paths, opts["seed"], spec):
            if u is None:
                break
            running = np.asarray(l0(model.project(x)), dtype=np.float64)
            acc += weights[k] * (running + spec.l1(u))
        totals[paths.start : paths.stop] = acc

    horizon = n_steps * dt
    return CostEstimate(
        mean=float(np.mean(totals)),
        stderr=float(np.std(totals, ddof=1) / np.sqrt(n_paths)),
        n_paths=n_paths,
        horizon=float(horizon),
        tail_bound=float(bound * np.exp(-lam * horizon) / lam),
    )
