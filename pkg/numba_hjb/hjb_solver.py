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

"""Resolvent of the Ornstein-Uhlenbeck semigroup and the mild stationary HJB
equation

    v = T_lam [l0 + H_min(grad_B v)],   T_lam psi = int_0^inf exp(-lam t) P_t psi dt.

For ``lam`` above the contraction threshold ``lambda_0`` the fixed point is
found by Picard iteration. Below it the solver iterates the resolvent
identity ``R(mu) = R(nu) o (I + (nu - mu) R(mu))`` from an anchor
``nu >= lambda_0``; every outer step is a Picard solve at ``nu`` with the
source ``l0 + (nu - mu) u``.
"""

import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from scipy import integrate

from numba_hjb import config
from numba_hjb.diagnostics import SolverDiagnostics
from numba_hjb.errors import (
    InvalidConfigError,
    NonConvergenceError,
    QuadratureBudgetError,
    SmoothingHypothesisError,
)
from numba_hjb.gaussian_semigroup import transition_plan
from numba_hjb.hamiltonian import HamiltonianSpec, h_min, lipschitz_constant
from numba_hjb.lifting import smoothing_constant, smoothing_fit
from numba_hjb.spectral_model import covariance, flow_matrix
from numba_hjb.utils.constants import numerics
from numba_hjb.utils.grid import GridFunction
from numba_hjb.utils.quadrature import (
    QuadratureRule,
    resolvent_time_mesh,
    tail_bound,
)

__all__ = [
    "SolverConfig",
    "ConvergenceTrace",
    "SourceSum",
    "ResolventOperator",
    "spatial_axes",
    "reference_std",
    "source_norm",
    "resolvent_apply",
    "estimate_lambda0",
    "picard_solve",
    "continuation_solve",
    "residual",
    "solve",
    "LAMBDA_GRID",
    "DEFAULT_GAMMA",
    "GAMMA_RANGE",
]

# bisection range for lambda_0
LAMBDA_GRID = (1e-3, 1e6)

_DEFAULT_NODES = {1: 201, 2: 41, 3: 15}

DEFAULT_GAMMA = 0.5
# fitted exponents are clamped to this range before grading the mesh
GAMMA_RANGE = (0.0, 0.9)


@dataclass(frozen=True)
class SolverConfig:
    """Numerical parameters of the resolvent and of both fixed-point loops.

    ``grid_nodes`` is one count per projected axis, or a single count
    broadcast to every axis; ``None`` picks 201, 41 or 15 nodes per axis in
    dimension 1, 2 or 3. ``extent`` fixes the half widths of the box; when
    ``None`` the box covers ``k_sigma`` standard deviations plus the largest
    controlled mean excursion (see :meth:`for_model`).

    ``gamma`` grades the resolvent time mesh. ``None`` takes the fitted
    smoothing exponent once a fit is known (:meth:`with_fit`) and
    ``DEFAULT_GAMMA`` before that.
    """

    lam: float = 1.0
    tol: float = 1e-5
    max_iter: int = 200
    damping: float = 1.0
    nu: Optional[float] = None
    outer_tol: float = 1e-5
    outer_max_iter: int = 500
    grid_nodes: Optional[Tuple[int, ...]] = None
    k_sigma: float = 6.0
    extent: Optional[Tuple[float, ...]] = None
    gamma: Optional[float] = None
    n_time_inner: int = 24
    n_time_panel: int = 8
    quad: Optional[QuadratureRule] = None
    check_sigma: float = 4.0
    contraction_target: float = numerics.CONTRACTION_TARGET

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidConfigError("discount must be positive, got %s" % self.lam)
        if not (self.tol > 0 and self.outer_tol > 0):
            raise InvalidConfigError("tolerances must be positive")
        if self.max_iter < 1 or self.outer_max_iter < 1:
            raise InvalidConfigError("iteration limits must be at least 1")
        if not 0.0 < self.damping <= 1.0:
            raise InvalidConfigError("damping must lie in (0, 1], got %s" % self.damping)
        if self.nu is not None and not self.nu > 0:
            raise InvalidConfigError("continuation anchor must be positive, got %s" % self.nu)
        if self.k_sigma < 4.0:
            raise InvalidConfigError("k_sigma must be at least 4, got %s" % self.k_sigma)
        if self.gamma is not None and not 0.0 <= self.gamma < 1.0:
            raise InvalidConfigError("gamma must lie in [0, 1), got %s" % self.gamma)
        if self.n_time_inner < 2 or self.n_time_panel < 2:
            raise InvalidConfigError("time quadrature needs at least 2 nodes per panel")
        if not 0.0 < self.contraction_target < 1.0:
            raise InvalidConfigError("contraction target must lie in (0, 1)")
        if self.grid_nodes is not None:
            nodes = tuple(int(n) for n in np.atleast_1d(self.grid_nodes))
            if min(nodes) < 3:
                raise InvalidConfigError("grid axes need at least 3 nodes")
            object.__setattr__(self, "grid_nodes", nodes)
        if self.extent is not None:
            extent = tuple(float(e) for e in np.atleast_1d(self.extent))
            if min(extent) <= 0:
                raise InvalidConfigError("grid extent must be positive")
            object.__setattr__(self, "extent", extent)

    @classmethod
    def for_model(cls, model, lam, spec, **overrides):
        """Config at discount ``lam`` with the box derived from ``model``."""
        cfg = cls(lam=lam, **overrides)
        return replace(cfg, extent=tuple(_half_widths(model, spec, cfg, lam)))

    @property
    def mesh_gamma(self):
        return DEFAULT_GAMMA if self.gamma is None else self.gamma

    def with_fit(self, fit):
        """Grade the time mesh with the fitted exponent of ``fit`` unless
        ``gamma`` was set explicitly.
        """
        if self.gamma is not None or fit is None:
            return self
        return replace(self, gamma=float(np.clip(fit.gamma, *GAMMA_RANGE)))

    def nodes_per_axis(self, dim):
        nodes = self.grid_nodes or (_DEFAULT_NODES.get(dim, 11),)
        if len(nodes) == 1:
            nodes = nodes * dim
        if len(nodes) != dim:
            raise InvalidConfigError(
                "grid_nodes has %d entries for %d projected axes" % (len(nodes), dim)
            )
        return nodes

    def rule(self, dim):
        return self.quad if self.quad is not None else QuadratureRule.default_for(dim)

    def to_dict(self):
        out = {
            k: getattr(self, k)
            for k in self.__dataclass_fields__
            if k != "quad"
        }
        out["quad"] = None if self.quad is None else vars(self.quad)
        return out


@dataclass
class ConvergenceTrace:
    """Per-iteration record of a Picard or continuation run.

    ``ratios`` start at the second iteration. For Picard they are ratios of
    successive gradient deltas, the quantity bounded by the contraction
    constant; for continuation they are ratios of successive value deltas.
    ``residuals`` holds the fixed-point residual of the iterate entering each
    step. ``wall_clock`` is in seconds and is left out of :meth:`to_dict`
    unless asked for.
    """

    kind: str
    lam: float
    deltas: list = field(default_factory=list)
    gradient_deltas: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    wall_clock: list = field(default_factory=list)
    converged: bool = False
    final_residual: Optional[float] = None
    residual_bound: Optional[float] = None
    error_budget: float = 0.0
    gradient_constant: float = 0.0
    lambda0: Optional[float] = None
    nu: Optional[float] = None
    inner: list = field(default_factory=list)

    @property
    def iterations(self):
        return len(self.deltas)

    def record(self, delta, gradient_delta, residual, seconds):
        if delta < 0 or gradient_delta < 0:
            raise ValueError("iteration deltas must be nonnegative")
        basis = self.gradient_deltas if self.kind == "picard" else self.deltas
        previous = basis[-1] if basis else None
        self.deltas.append(float(delta))
        self.gradient_deltas.append(float(gradient_delta))
        self.residuals.append(float(residual))
        self.wall_clock.append(float(seconds))
        current = basis[-1]
        if previous is not None:
            self.ratios.append(current / previous if previous > 0 else 0.0)

    def to_dict(self, include_timing=False):
        out = {
            "kind": self.kind,
            "lambda": self.lam,
            "iterations": self.iterations,
            "deltas": list(self.deltas),
            "gradient_deltas": list(self.gradient_deltas),
            "ratios": list(self.ratios),
            "residuals": list(self.residuals),
            "converged": self.converged,
            "final_residual": self.final_residual,
            "residual_bound": self.residual_bound,
            "error_budget": self.error_budget,
            "gradient_constant": self.gradient_constant,
            "lambda0": self.lambda0,
            "nu": self.nu,
            "inner_iterations": [t.iterations for t in self.inner],
        }
        if include_timing:
            out["wall_clock"] = list(self.wall_clock)
        return out


def source_norm(psi):
    """Sup norm of a source term.

    Sources carry their own bound: :class:`CostSpec`, :class:`GridFunction`
    and :class:`SourceSum` all implement ``sup_norm()``.
    """
    if np.isscalar(psi):
        return abs(float(psi))
    if hasattr(psi, "sup_norm"):
        return float(psi.sup_norm())
    raise TypeError(
        "source %r has no sup_norm(); wrap it in an object that declares its bound"
        % (psi,)
    )


class SourceSum:
    """Pointwise sum of bounded source terms."""

    def __init__(self, *terms):
        self.terms = tuple(terms)

    def __call__(self, points):
        out = 0.0
        for term in self.terms:
            out = out + (term if np.isscalar(term) else term(points))
        return out

    def sup_norm(self):
        return sum(source_norm(term) for term in self.terms)


def _reference_time(model, lam):
    return np.inf if model.is_decaying else 5.0 / lam


def reference_std(model, lam):
    """Standard deviations of the projected coordinates under the stationary
    law, or at time ``5 / lam`` when the drift does not decay.
    """
    cov = covariance(model, _reference_time(model, lam), projected_only=True)
    return np.sqrt(np.diag(cov))


def _half_widths(model, spec, cfg, lam):
    t_ref = _reference_time(model, lam)
    excursion = lipschitz_constant(spec) * _mean_excursion(model, t_ref)
    return cfg.k_sigma * reference_std(model, lam) + excursion


def _mean_excursion(model, t_ref):
    # int_0^t_ref |row_i(P exp(sA) B)| ds for each projected coordinate
    if np.isinf(t_ref):
        t_ref = 40.0 / min(b.rate for b in model.blocks)
    s = np.linspace(0.0, t_ref, 2000)
    PB = model.projector()
    rows = np.stack(
        [np.linalg.norm(PB @ flow_matrix(model, t) @ model.control_matrix, axis=1) for t in s]
    )
    return integrate.trapezoid(rows, s, axis=0)


def spatial_axes(model, spec, cfg, lam=None):
    """Tensor grid axes over the projected coordinates."""
    lam = cfg.lam if lam is None else lam
    if cfg.extent is not None:
        half = np.broadcast_to(np.asarray(cfg.extent), (model.n_proj,))
    else:
        half = _half_widths(model, spec, cfg, lam)
    nodes = cfg.nodes_per_axis(model.n_proj)
    return tuple(np.linspace(-h, h, n) for h, n in zip(half, nodes))


def _zero_grid(axes, control_dim):
    shape = tuple(len(a) for a in axes)
    return GridFunction(axes, np.zeros(shape), np.zeros(shape + (control_dim,)))


class ResolventOperator:
    """``T_lam`` on a fixed grid.

    The time mesh depends on the sup norm of the source through the
    truncation horizon. Meshes are rebuilt only when a source exceeds the
    norm the current mesh was designed for; transition plans are cached by
    time node and shared between meshes.
    """

    def __init__(self, model, lam, cfg, axes):
        if not lam > 0:
            raise ValueError("discount must be positive, got %s" % lam)
        self.model = model
        self.lam = float(lam)
        self.cfg = cfg
        self.axes = tuple(axes)
        self.quad = cfg.rule(model.n_proj)
        self._nodes = _zero_grid(self.axes, model.control_dim).nodes()
        self._plans = {}
        self._mesh = None
        self._design_norm = -1.0
        self._constant = 0.0

    def _plan(self, t):
        plan = self._plans.get(t)
        if plan is None:
            plan = transition_plan(self.model, t, self.quad, task=len(self._plans))
            self._plans[t] = plan
        return plan

    def mesh_for(self, norm):
        if self._mesh is None or norm > self._design_norm:
            design = 2.0 * norm if norm > 0 else 1.0
            cfg = self.cfg
            self._mesh = resolvent_time_mesh(
                self.lam, cfg.mesh_gamma, cfg.tol, design, cfg.n_time_inner, cfg.n_time_panel
            )
            self._design_norm = design
            weights = self._mesh.weights * np.exp(-self.lam * self._mesh.nodes)
            self._constant = float(
                sum(w * self._plan(t).lambda_norm for t, w in zip(self._mesh.nodes, weights))
            )
        return self._mesh

    @property
    def gradient_constant(self):
        """``C = sum_i w_i exp(-lam t_i) |Lambda(t_i)|`` on the current mesh."""
        return self._constant

    def apply(self, psi):
        norm = source_norm(psi)
        mesh = self.mesh_for(norm)
        lam = self.lam
        values = np.zeros(self._nodes.shape[0])
        grads = np.zeros((self._nodes.shape[0], self.model.control_dim))
        for t, w in zip(mesh.nodes, mesh.weights):
            weight = w * np.exp(-lam * t)
            v, g = self._plan(t).moments(psi, self._nodes)
            values += weight * v
            grads += weight * g

        exact_mass = -np.expm1(-lam * mesh.t_max) / lam
        budget = tail_bound(lam, mesh.t_max, norm) + abs(
            mesh.laplace_mass(lam) - exact_mass
        ) * norm
        if budget > self.cfg.tol:
            raise QuadratureBudgetError(
                "resolvent quadrature error budget %g exceeds tolerance %g "
                "(lambda=%g, t_max=%g, %d time nodes)"
                % (budget, self.cfg.tol, lam, mesh.t_max, len(mesh))
            )
        vmax = float(np.abs(values).max()) if values.size else 0.0
        assert vmax <= norm / lam * (1.0 + 1e-12) + budget, (
            "resolvent bound violated: %g > %g / %g" % (vmax, norm, lam)
        )
        slack = 1e-6 if self.quad.kind == "gauss_hermite_tensor" else 0.1
        gmax = float(np.linalg.norm(grads, axis=1).max()) if grads.size else 0.0
        assert gmax <= self._constant * norm * (1.0 + slack), (
            "gradient bound violated: %g > %g * %g" % (gmax, self._constant, norm)
        )
        shape = tuple(len(a) for a in self.axes)
        return GridFunction(
            self.axes,
            values.reshape(shape),
            grads.reshape(shape + (-1,)),
            meta={
                "error_budget": float(budget),
                "gradient_constant": self._constant,
                "t_max": mesh.t_max,
                "mesh_gamma": self.cfg.mesh_gamma,
            },
        )


def resolvent_apply(model, psi, lam, cfg=None, axes=None, spec=None):
    """``T_lam psi`` and ``grad_B T_lam psi`` on the grid.

    Args:
        model: :class:`SpectralModel` with a commuting projection.
        psi: bounded source, a :class:`GridFunction`, :class:`CostSpec`,
            :class:`SourceSum` or a scalar.
        lam: positive discount.
        cfg: :class:`SolverConfig`.
        axes: grid axes; derived from ``cfg`` (and ``spec`` for the mean
            excursion, zero control when omitted) when not given.

    Returns:
        A :class:`GridFunction` with ``gradient_values`` and the meta entries
        ``error_budget`` and ``gradient_constant``.

    Raises:
        QuadratureBudgetError: the time quadrature cannot meet ``cfg.tol``.
    """
    cfg = cfg or SolverConfig(lam=lam)
    if axes is None:
        if isinstance(psi, GridFunction):
            axes = psi.axes
        else:
            spec = spec or HamiltonianSpec.ball(0.0, model.control_dim, "zero")
            axes = spatial_axes(model, spec, cfg, lam)
    return ResolventOperator(model, lam, cfg, axes).apply(psi)


def _hamiltonian_term(spec, v):
    return GridFunction(v.axes, h_min(spec, v.flat_gradient()).reshape(v.shape))


def _check_discount(lam):
    if not lam > 0:
        raise ValueError("discount must be positive, got %s" % lam)


def estimate_lambda0(model, spec, cfg=None, fit=None):
    """Smallest discount on ``LAMBDA_GRID`` for which the Picard map is a
    contraction with constant ``cfg.contraction_target``.

    The contraction constant is bounded by
    ``L_H kappa0 int_0^inf exp(-lam t) max(1, t**-gamma) dt`` with the
    fitted smoothing constants; the integral is evaluated in closed form and
    the threshold located by bisection on ``log(lam)``.

    Raises:
        SmoothingHypothesisError: the fitted exponent is not integrable.
        FitRejectedError: the smoothing fit failed.
    """
    cfg = cfg or SolverConfig()
    lo, hi = LAMBDA_GRID
    L_H = lipschitz_constant(spec)
    if L_H == 0.0:
        return lo
    if fit is None:
        fit, _ = smoothing_fit(model)
    if not fit.gamma < 1.0:
        raise SmoothingHypothesisError(
            "fitted smoothing exponent %g is not integrable at 0" % fit.gamma
        )
    gamma = max(fit.gamma, 0.0)
    target = cfg.contraction_target

    def excess(lam):
        return L_H * smoothing_constant(lam, fit.kappa0, gamma) - target

    if excess(lo) <= 0.0:
        return lo
    if excess(hi) > 0.0:
        raise ValueError("no discount below %g makes the Picard map contract" % hi)
    a, b = np.log(lo), np.log(hi)
    for _ in range(60):
        mid = 0.5 * (a + b)
        if excess(np.exp(mid)) <= 0.0:
            b = mid
        else:
            a = mid
    return float(np.exp(b))


def _finish(trace):
    if config.SOLVER_DIAGNOSTICS:
        SolverDiagnostics(trace).dump(config.SOLVER_DIAGNOSTICS)


def _blend(old, new, theta):
    if theta == 1.0:
        return new
    return new.with_values(
        (1.0 - theta) * old.values + theta * new.values,
        (1.0 - theta) * old.gradient_values + theta * new.gradient_values,
        **new.meta
    )


def picard_solve(model, l0, spec, lam, cfg=None, initial=None, axes=None, lambda0=None):
    """Fixed point of ``v = T_lam[l0 + H_min(grad_B v)]`` by Picard iteration.

    Args:
        model: :class:`SpectralModel`.
        l0: bounded source (state cost), see :func:`resolvent_apply`.
        spec: :class:`HamiltonianSpec`.
        lam: positive discount.
        cfg: :class:`SolverConfig`.
        initial: warm start with gradient grid; zero by default.
        axes: grid axes; derived from ``cfg`` when omitted.
        lambda0: contraction threshold; a warning is issued when ``lam`` is
            below it.

    Returns:
        ``(v, trace)``.

    Raises:
        NonConvergenceError: ``cfg.max_iter`` reached, or the solution bound
            ``|v| <= (|l0| + sup|l1|) / lam`` violated.
    """
    cfg = cfg or SolverConfig(lam=lam)
    _check_discount(lam)
    if spec.control_dim != model.control_dim:
        raise ValueError(
            "control set has dimension %d but the model has %d controls"
            % (spec.control_dim, model.control_dim)
        )
    if lambda0 is not None and lam < lambda0:
        warnings.warn(
            "discount %g is below the lambda_0 estimate %g; the Picard map "
            "may not contract" % (lam, lambda0),
            RuntimeWarning,
        )
    if initial is not None:
        axes = initial.axes
        if initial.gradient_values is None:
            raise ValueError("a warm start needs a gradient grid")
    elif axes is None:
        axes = spatial_axes(model, spec, cfg, lam)
    op = ResolventOperator(model, lam, cfg, axes)
    L_H = lipschitz_constant(spec)
    trace = ConvergenceTrace("picard", float(lam), lambda0=lambda0)
    v = initial if initial is not None else _zero_grid(op.axes, model.control_dim)

    for k in range(cfg.max_iter):
        start = time.perf_counter()
        new = _blend(v, op.apply(SourceSum(l0, _hamiltonian_term(spec, v))), cfg.damping)
        dv = float(np.abs(new.values - v.values).max())
        dg = float(np.linalg.norm(new.flat_gradient() - v.flat_gradient(), axis=1).max())
        trace.record(max(dv, dg), dg, dv / cfg.damping, time.perf_counter() - start)
        v = new
        if config.DEBUG:
            print(
                "[picard] lambda=%g iteration %d: delta=%.3e ratio=%s"
                % (lam, k + 1, trace.deltas[-1], trace.ratios[-1] if trace.ratios else "-")
            )
        if trace.deltas[-1] <= cfg.tol or L_H == 0.0:
            trace.converged = True
            break

    trace.error_budget = v.meta.get("error_budget", 0.0)
    trace.gradient_constant = op.gradient_constant
    if not trace.converged:
        _finish(trace)
        raise NonConvergenceError(
            "Picard iteration at lambda=%g did not reach %g in %d iterations "
            "(last delta %g)" % (lam, cfg.tol, cfg.max_iter, trace.deltas[-1]),
            trace,
        )

    trace.final_residual = residual(model, v, l0, spec, lam, cfg, operator=op)
    ratio = max(trace.ratios) if trace.ratios else 0.0
    contraction = op.gradient_constant * L_H
    trace.residual_bound = (
        cfg.tol * (1.0 + contraction) / (1.0 - ratio) if ratio < 1.0 else np.inf
    )
    bound = (source_norm(l0) + spec.l1_sup()) / lam * (1.0 + 1e-3) + trace.error_budget
    if v.sup_norm() > bound:
        _finish(trace)
        raise NonConvergenceError(
            "Picard solution violates the bound |v| <= %g (got %g)" % (bound, v.sup_norm()),
            trace,
        )
    _finish(trace)
    return v, trace


def continuation_solve(model, l0, spec, mu, cfg=None, lambda0=None, axes=None, initial=None):
    """Solve at a discount ``mu`` below ``lambda_0`` by iterating the
    resolvent identity from the anchor ``nu``.

    ``nu`` is ``cfg.nu`` when set and ``max(1.5 lambda_0, mu)`` otherwise.

    Raises:
        InvalidConfigError: ``nu < mu``.
        NonConvergenceError: an inner Picard solve failed, the outer loop
            stagnated (three successive ratios above one) or ran out of
            iterations.
    """
    cfg = cfg or SolverConfig(lam=mu)
    _check_discount(mu)
    if lambda0 is None:
        lambda0 = estimate_lambda0(model, spec, cfg)
    nu = float(cfg.nu) if cfg.nu is not None else max(1.5 * lambda0, mu)
    if nu < mu:
        raise InvalidConfigError(
            "continuation anchor nu=%g is below the target discount mu=%g" % (nu, mu)
        )
    if nu < lambda0:
        warnings.warn(
            "continuation anchor nu=%g is below the lambda_0 estimate %g" % (nu, lambda0),
            RuntimeWarning,
        )
    if initial is not None:
        axes = initial.axes
    elif axes is None:
        axes = spatial_axes(model, spec, cfg, mu)
    trace = ConvergenceTrace("continuation", float(mu), lambda0=lambda0, nu=nu)
    u = initial if initial is not None else _zero_grid(axes, model.control_dim)

    for j in range(cfg.outer_max_iter):
        start = time.perf_counter()
        if nu == mu:
            source = l0
        else:
            source = SourceSum(l0, u.with_values((nu - mu) * u.values))
        new, inner = picard_solve(
            model, source, spec, nu, cfg, initial=u, axes=axes, lambda0=lambda0
        )
        trace.inner.append(inner)
        du = float(np.abs(new.values - u.values).max())
        dg = float(np.linalg.norm(new.flat_gradient() - u.flat_gradient(), axis=1).max())
        trace.record(du, dg, du, time.perf_counter() - start)
        u = new
        if config.DEBUG:
            print(
                "[continuation] mu=%g nu=%g outer %d: delta=%.3e ratio=%s"
                % (mu, nu, j + 1, du, trace.ratios[-1] if trace.ratios else "-")
            )
        if nu == mu or du <= cfg.outer_tol:
            trace.converged = True
            break
        if len(trace.ratios) >= 3 and min(trace.ratios[-3:]) > 1.0:
            _finish(trace)
            raise NonConvergenceError(
                "continuation stagnated at mu=%g: outer ratios %s" % (mu, trace.ratios[-3:]),
                trace,
            )

    trace.error_budget = max(t.error_budget for t in trace.inner)
    trace.gradient_constant = trace.inner[-1].gradient_constant
    if not trace.converged:
        _finish(trace)
        raise NonConvergenceError(
            "continuation at mu=%g did not reach %g in %d outer iterations"
            % (mu, cfg.outer_tol, cfg.outer_max_iter),
            trace,
        )
    trace.final_residual = residual(model, u, l0, spec, mu, cfg)
    _finish(trace)
    return u, trace


def residual(model, v, l0, spec, lam, cfg=None, operator=None):
    """``max |v - T_lam[l0 + H_min(grad_B v)]|`` over the grid nodes of ``v``."""
    cfg = cfg or SolverConfig(lam=lam)
    op = operator or ResolventOperator(model, lam, cfg, v.axes)
    image = op.apply(SourceSum(l0, _hamiltonian_term(spec, v)))
    return float(np.abs(v.flat_values() - image.flat_values()).max())


def solve(model, l0, spec, lam=None, cfg=None, lambda0=None, axes=None):
    """Picard iteration when ``lam >= lambda_0``, continuation otherwise.

    When ``lambda0`` is not given it is estimated from a smoothing fit, and
    the fitted exponent grades the time mesh unless ``cfg.gamma`` is set.
    """
    cfg = cfg or SolverConfig()
    lam = cfg.lam if lam is None else lam
    if lambda0 is None:
        fit = None
        if lipschitz_constant(spec) > 0.0:
            fit, _ = smoothing_fit(model)
            cfg = cfg.with_fit(fit)
        lambda0 = estimate_lambda0(model, spec, cfg, fit)
    if lam >= lambda0:
        return picard_solve(model, l0, spec, lam, cfg, axes=axes, lambda0=lambda0)
    return continuation_solve(model, l0, spec, lam, cfg, lambda0=lambda0, axes=axes)
