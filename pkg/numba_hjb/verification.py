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

"""Numerical checks of the resolvent identities, the Lipschitz bound of the
solution map, the Nisio family and the smoothing fit.

Every check returns a :class:`CheckReport` whose tolerance is an explicit
argument. Grid-based defects are measured on the window of
``cfg.check_sigma`` reference standard deviations around the origin so the
clamped box boundary stays out of the measurement.
"""

from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from numba_hjb.errors import InvalidConfigError
from numba_hjb.hamiltonian import (
    HamiltonianSpec,
    check_concavity,
    check_g_duality,
    check_lipschitz,
    h_min,
    nisio_step,
)
from numba_hjb.hjb_solver import (
    ResolventOperator,
    SourceSum,
    continuation_solve,
    estimate_lambda0,
    picard_solve,
    reference_std,
    source_norm,
    spatial_axes,
)
from numba_hjb.lifting import (
    DEFAULT_FIT_WINDOW,
    fit_smoothing_exponent,
    lifted_gap,
    smoothing_fit,
    smoothing_scan,
)
from numba_hjb.reports import CheckReport, make_report
from numba_hjb.utils.grid import GridFunction
from numba_hjb.utils.misc import write_table
from numba_hjb.utils.quadrature import counter_stream

__all__ = [
    "CheckReport",
    "CosineMixture",
    "random_cosine_mixture",
    "interpolation_error",
    "check_linear_resolvent_identity",
    "check_nonlinear_resolvent_identity",
    "check_lipschitz_bound",
    "check_nisio",
    "check_injectivity",
    "check_uniqueness",
    "check_smoothing_fit",
    "run_all",
    "CHECK_NAMES",
    "SCAN_COLUMNS",
]


@dataclass(frozen=True)
class CosineMixture:
    """``sum_j a_j cos(<w_j, x> + phi_j)``, bounded and uniformly continuous."""

    amplitudes: Tuple[float, ...]
    frequencies: Tuple[Tuple[float, ...], ...]
    phases: Tuple[float, ...]

    def __call__(self, points):
        x = np.atleast_2d(np.asarray(points, dtype=np.float64))
        arg = x @ np.asarray(self.frequencies).T + np.asarray(self.phases)
        return np.cos(arg) @ np.asarray(self.amplitudes)

    def gradient(self, points):
        x = np.atleast_2d(np.asarray(points, dtype=np.float64))
        W = np.asarray(self.frequencies)
        arg = x @ W.T + np.asarray(self.phases)
        return -(np.sin(arg) * np.asarray(self.amplitudes)) @ W

    def sup_norm(self):
        return float(np.abs(self.amplitudes).sum())

    def to_dict(self):
        return {
            "amplitudes": list(self.amplitudes),
            "frequencies": [list(w) for w in self.frequencies],
            "phases": list(self.phases),
        }


def random_cosine_mixture(rng, dim, n_terms=3, max_frequency=2.0, amplitude=1.0):
    """Draw a :class:`CosineMixture` with ``sup_norm() <= amplitude``."""
    amps = rng.uniform(-1.0, 1.0, n_terms)
    amps *= amplitude / max(np.abs(amps).sum(), 1.0)
    freqs = rng.uniform(-max_frequency, max_frequency, (n_terms, dim))
    phases = rng.uniform(0.0, 2.0 * np.pi, n_terms)
    return CosineMixture(
        tuple(amps.tolist()), tuple(map(tuple, freqs.tolist())), tuple(phases.tolist())
    )


def _describe(obj):
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, SourceSum):
        return [_describe(t) for t in obj.terms]
    if np.isscalar(obj):
        return float(obj)
    return repr(obj)


def _zero_spec(model):
    return HamiltonianSpec.ball(0.0, model.control_dim, "zero")


def _window(model, cfg, lam, axes):
    empty = GridFunction(axes, np.zeros(tuple(len(a) for a in axes)))
    return empty.window_mask(cfg.check_sigma * reference_std(model, lam))


def _scaled(u, factor):
    return u.with_values(factor * u.values)


def interpolation_error(v):
    """Second-difference estimate of the multilinear interpolation error of
    the grid function ``v``, summed over the axes.
    """
    total = 0.0
    for k in range(v.dim):
        d2 = np.diff(v.values, n=2, axis=k)
        if d2.size:
            total += float(np.abs(d2).max()) / 8.0
    return total


def _solve_at(model, source, spec, lam, cfg, axes, lambda0, initial=None):
    if lam >= lambda0:
        return picard_solve(model, source, spec, lam, cfg, initial, axes, lambda0)
    return continuation_solve(model, source, spec, lam, cfg, lambda0, axes, initial)


def check_linear_resolvent_identity(model, psi, mu, nu, cfg, tolerance=1e-5, axes=None):
    """Defect of ``T_mu psi = T_nu[psi + (nu - mu) T_mu psi]``."""
    if not (mu > 0 and nu > 0):
        raise ValueError("discounts must be positive")
    if mu == nu:
        raise ValueError("the linear identity needs mu != nu")
    axes = axes or spatial_axes(model, _zero_spec(model), cfg, min(mu, nu))
    lhs = ResolventOperator(model, mu, cfg, axes).apply(psi)
    rhs = ResolventOperator(model, nu, cfg, axes).apply(
        SourceSum(psi, _scaled(lhs, nu - mu))
    )
    mask = _window(model, cfg, min(mu, nu), axes)
    defect = float(np.abs(lhs.flat_values() - rhs.flat_values())[mask].max())
    return make_report(
        "linear_resolvent_identity",
        {"model": model.to_dict(), "psi": _describe(psi), "mu": mu, "nu": nu,
         "solver": cfg.to_dict()},
        defect,
        tolerance,
        error_budget=lhs.meta["error_budget"] + rhs.meta["error_budget"],
        interpolation_error=abs(nu - mu) / nu * interpolation_error(lhs),
    )


def check_nonlinear_resolvent_identity(
    model, psi, spec, mu, nu, cfg, tolerance=None, axes=None, lambda0=None
):
    """Defect of ``R(mu) psi = R(nu)(psi + (nu - mu) R(mu) psi)`` with both
    sides from the HJB solver.

    ``tolerance`` defaults to ``5 (cfg.tol + error budget)``; the budget adds
    the interpolation error of ``R(mu) psi`` carried into the source of the
    right hand side, scaled by ``|nu - mu| / nu``.
    """
    if lambda0 is None:
        lambda0 = estimate_lambda0(model, spec, cfg)
    axes = axes or spatial_axes(model, spec, cfg, min(mu, nu))
    lhs, t_mu = _solve_at(model, psi, spec, mu, cfg, axes, lambda0)
    if mu == nu:
        rhs, t_nu = lhs, t_mu
    else:
        source = SourceSum(psi, _scaled(lhs, nu - mu))
        rhs, t_nu = _solve_at(model, source, spec, nu, cfg, axes, lambda0)
    budget = max(t_mu.error_budget, t_nu.error_budget)
    interp = abs(nu - mu) / nu * interpolation_error(lhs)
    budget += interp
    if tolerance is None:
        tolerance = 5.0 * (cfg.tol + budget)
    mask = _window(model, cfg, min(mu, nu), axes)
    defect = float(np.abs(lhs.flat_values() - rhs.flat_values())[mask].max())
    return make_report(
        "nonlinear_resolvent_identity",
        {"model": model.to_dict(), "psi": _describe(psi), "spec": spec.to_dict(),
         "mu": mu, "nu": nu, "solver": cfg.to_dict()},
        defect,
        tolerance,
        error_budget=budget,
        interpolation_error=interp,
        lambda0=lambda0,
    )


def check_lipschitz_bound(
    model, spec, mu, n_pairs, cfg, seed=0, slack=None, axes=None, lambda0=None,
    artifact_prefix=None,
):
    """``max mu |R(mu) phi - R(mu) psi| / |phi - psi|`` over random cosine
    mixtures; passes when at most ``1 + slack``.

    ``slack`` defaults to 0.02 in the direct Picard regime and 0.05 when
    ``mu`` is reached by continuation. With ``artifact_prefix`` the ratio of
    every pair is written to ``<prefix>_lipschitz_ratios.csv``.
    """
    if lambda0 is None:
        lambda0 = estimate_lambda0(model, spec, cfg)
    if slack is None:
        slack = 0.02 if mu >= lambda0 else 0.05
    axes = axes or spatial_axes(model, spec, cfg, mu)
    rng = counter_stream(seed, 3)
    mask = _window(model, cfg, mu, axes)
    nodes = GridFunction(axes, np.zeros(tuple(len(a) for a in axes))).nodes()
    # the sup of a source runs over all of R^n, not only the grid box
    far = 10.0 * np.abs(nodes).max(axis=0)
    points = np.vstack([nodes, rng.uniform(-far, far, (20000, model.n_proj))])
    ratios = []
    for _ in range(n_pairs):
        phi = random_cosine_mixture(rng, model.n_proj)
        psi = random_cosine_mixture(rng, model.n_proj)
        gap = float(np.abs(phi(points) - psi(points)).max())
        if gap == 0.0:
            continue
        r_phi, _ = _solve_at(model, phi, spec, mu, cfg, axes, lambda0)
        r_psi, _ = _solve_at(model, psi, spec, mu, cfg, axes, lambda0)
        diff = np.abs(r_phi.flat_values() - r_psi.flat_values())[mask].max()
        ratios.append(mu * float(diff) / gap)
    artifacts = []
    if artifact_prefix is not None:
        artifacts.append(
            write_table(
                artifact_prefix + "_lipschitz_ratios.csv",
                ("pair", "ratio"),
                [np.arange(len(ratios)), ratios],
            )
        )
    return make_report(
        "lipschitz_bound",
        {"model": model.to_dict(), "spec": spec.to_dict(), "mu": mu,
         "n_pairs": n_pairs, "seed": seed, "solver": cfg.to_dict()},
        max(ratios) if ratios else 0.0,
        1.0 + slack,
        artifacts,
        ratios=ratios,
        lambda0=lambda0,
    )


def check_nisio(
    spec, u_samples, t_list, eps_list, embedding=None, tolerance=1e-8, M=None
):
    """Contraction and generator limit of the discrete Nisio family.

    (a) ``|N_t u - N_t v| <= |u - v|`` for consecutive pairs of
    ``u_samples`` and every ``t`` in ``t_list``; the defect is the largest
    relative excess.

    (b) For each sample with a gradient grid the residual
    ``|(N_eps u - u) / eps - H_min(grad_B u)|`` on interior nodes is
    nonincreasing along ``eps_list`` and drops by at least a factor 2 from
    the first to the last entry; violations add to the defect.
    """
    M = spec.nisio_bound() if M is None else float(M)
    contraction = 0.0
    for u, v in zip(u_samples[:-1], u_samples[1:]):
        gap = float(np.abs(u.values - v.values).max())
        if gap == 0.0:
            continue
        for t in t_list:
            step_u = nisio_step(spec, u, t, embedding=embedding, M=M)
            step_v = nisio_step(spec, v, t, embedding=embedding, M=M)
            excess = float(np.abs(step_u.values - step_v.values).max()) / gap - 1.0
            contraction = max(contraction, excess)

    eps_list = sorted(eps_list, reverse=True)
    generator = []
    monotone = 0.0
    if embedding is None:
        reach = M * max(eps_list)
    else:
        reach = M * max(eps_list) * np.abs(np.asarray(embedding)).sum(axis=1)
    for u in u_samples:
        if u.gradient_values is None:
            continue
        mask = u.interior_mask(reach)
        target = h_min(spec, u.flat_gradient())
        residuals = []
        for eps in eps_list:
            step = nisio_step(spec, u, eps, embedding=embedding, M=M)
            quotient = (step.flat_values() - u.flat_values()) / eps
            residuals.append(float(np.abs(quotient - target)[mask].max()))
        generator.append(residuals)
        for a, b in zip(residuals[:-1], residuals[1:]):
            monotone = max(monotone, b - a)
        if len(residuals) > 1:
            monotone = max(monotone, residuals[-1] - 0.5 * residuals[0])
    defect = max(contraction, 0.0) + max(monotone, 0.0)
    return make_report(
        "nisio",
        {"spec": spec.to_dict(), "t_list": list(t_list), "eps_list": eps_list,
         "M": M, "n_samples": len(u_samples)},
        defect,
        tolerance,
        contraction_excess=contraction,
        generator_residuals=generator,
    )


def check_injectivity(
    model, spec, mu, cfg, psi=None, detect_tol=None, axes=None, lambda0=None
):
    """Sources differing by ``0.1 cos(<1, x>)`` have solutions differing by
    at least ``detect_tol`` (default ``10 cfg.tol``)."""
    if lambda0 is None:
        lambda0 = estimate_lambda0(model, spec, cfg)
    if detect_tol is None:
        detect_tol = 10.0 * cfg.tol
    if psi is None:
        psi = CosineMixture((1.0,), ((1.0,) * model.n_proj,), (0.0,))
    bump = CosineMixture((0.1,), ((1.0,) * model.n_proj,), (0.0,))
    axes = axes or spatial_axes(model, spec, cfg, mu)
    r_a, _ = _solve_at(model, psi, spec, mu, cfg, axes, lambda0)
    r_b, _ = _solve_at(model, SourceSum(psi, bump), spec, mu, cfg, axes, lambda0)
    mask = _window(model, cfg, mu, axes)
    separation = float(np.abs(r_a.flat_values() - r_b.flat_values())[mask].max())
    return make_report(
        "injectivity",
        {"model": model.to_dict(), "spec": spec.to_dict(), "mu": mu,
         "psi": _describe(psi), "solver": cfg.to_dict()},
        max(detect_tol - separation, 0.0),
        0.0,
        separation=separation,
        detect_tol=detect_tol,
    )


def check_uniqueness(model, l0, spec, lam, cfg, tolerance=None, axes=None, lambda0=None):
    """Start the solver from ``v0 = 0`` and from ``v0 = |l0| / lam``; the
    two solutions agree within ``tolerance`` (default twice the solver
    tolerance of the regime). Both runs use a tenth of the solver
    tolerances.
    """
    if lambda0 is None:
        lambda0 = estimate_lambda0(model, spec, cfg)
    direct = lam >= lambda0
    if tolerance is None:
        tolerance = 2.0 * (cfg.tol if direct else cfg.outer_tol)
    fine = replace(cfg, tol=0.1 * cfg.tol, outer_tol=0.1 * cfg.outer_tol)
    axes = axes or spatial_axes(model, spec, fine, lam)
    shape = tuple(len(a) for a in axes)
    high = GridFunction(
        axes,
        np.full(shape, source_norm(l0) / lam),
        np.zeros(shape + (model.control_dim,)),
    )
    v_a, _ = _solve_at(model, l0, spec, lam, fine, axes, lambda0)
    v_b, _ = _solve_at(model, l0, spec, lam, fine, axes, lambda0, initial=high)
    mask = _window(model, cfg, lam, axes)
    defect = float(np.abs(v_a.flat_values() - v_b.flat_values())[mask].max())
    return make_report(
        "uniqueness",
        {"model": model.to_dict(), "l0": _describe(l0), "spec": spec.to_dict(),
         "lambda": lam, "solver": cfg.to_dict()},
        defect,
        tolerance,
        lambda0=lambda0,
    )


SCAN_COLUMNS = ("t", "norm_lambda_finite", "norm_lambda_lifted")


def check_smoothing_fit(
    model, times=None, lifted=None, window=DEFAULT_FIT_WINDOW, n_times=12,
    gamma_range=(0.0, 1.0), lifted_tol=0.1, artifact_prefix=None,
):
    """Fit the blow-up exponent of ``|Lambda(t)|`` on the finite reduction;
    the defect is the distance of the fitted exponent from ``gamma_range``.

    With ``lifted`` the lifted norms are scanned too, and their relative
    deviation from the finite ones in excess of ``lifted_tol`` adds to the
    defect. With ``artifact_prefix`` the scan is written to
    ``<prefix>_smoothing_scan.csv``.
    """
    if times is None:
        fit, scan = smoothing_fit(model, lifted, window, n_times)
    else:
        scan = smoothing_scan(model, times, lifted)
        fit = fit_smoothing_exponent(times, scan["norm_lambda_finite"], window)
        if lifted is not None:
            fit = replace(fit, lifted_gap=lifted_gap(scan))
    lo, hi = gamma_range
    defect = max(lo - fit.gamma, fit.gamma - hi, 0.0)
    if fit.lifted_gap is not None:
        defect += max(fit.lifted_gap - lifted_tol, 0.0)
    artifacts = []
    if artifact_prefix is not None:
        artifacts.append(
            write_table(
                artifact_prefix + "_smoothing_scan.csv",
                SCAN_COLUMNS,
                [scan[k] for k in SCAN_COLUMNS],
            )
        )
    return make_report(
        "smoothing_fit",
        {"model": model.to_dict(), "window": list(window), "n_times": n_times,
         "lifted": lifted is not None, "gamma_range": list(gamma_range),
         "lifted_tol": lifted_tol},
        defect,
        0.0,
        artifacts,
        **fit.to_dict()
    )


def _nisio_samples(model, spec, cfg, verify, lam):
    rng = counter_stream(verify.seed, 4)
    if model.n_proj == 1:
        nodes = verify.nisio_nodes or 1601
    else:
        nodes = verify.nisio_nodes or 81
    axes = spatial_axes(model, spec, replace(cfg, grid_nodes=(nodes,)), lam)
    PB = model.projected_control()
    samples = []
    for _ in range(3):
        mix = random_cosine_mixture(rng, model.n_proj, n_terms=2, max_frequency=1.0)
        samples.append(GridFunction.on_grid(axes, mix, lambda x, m=mix: m.gradient(x) @ PB))
    return samples, PB


CHECK_NAMES = (
    "hamiltonian_concavity",
    "hamiltonian_lipschitz",
    "injectivity",
    "linear_resolvent_identity",
    "lipschitz_bound",
    "nisio",
    "nisio_g_duality",
    "nonlinear_resolvent_identity",
    "smoothing_fit",
    "uniqueness",
)


def run_all(run_config, checks=None, artifact_prefix=None):
    """Run the configured checks and return their reports sorted by name.

    Args:
        run_config: :class:`RunConfig`.
        checks: names from ``CHECK_NAMES``; all checks when ``None``.
        artifact_prefix: when given, checks with tabular output write
            ``<prefix>_*.csv`` and list the files in their reports.

    Raises:
        InvalidConfigError: an unknown check name, or a continuation anchor
            below the target discount.
    """
    selected = CHECK_NAMES if checks is None else tuple(checks)
    unknown = sorted(set(selected) - set(CHECK_NAMES))
    if unknown:
        raise InvalidConfigError("unknown check(s) %s" % unknown)

    model = run_config.build_model()
    spec = run_config.build_spec(model)
    l0 = run_config.build_cost(model)
    cfg = run_config.solver_config(model)
    verify = run_config.verify
    if cfg.nu is not None and cfg.nu < cfg.lam:
        raise InvalidConfigError(
            "continuation anchor nu=%g is below the target discount %g" % (cfg.nu, cfg.lam)
        )

    smoothing = run_config.smoothing
    lifted = smoothing.build_lifted(model)
    fit, _ = smoothing_fit(model, lifted, smoothing.window, smoothing.n_times)
    cfg = cfg.with_fit(fit)
    lambda0 = estimate_lambda0(model, spec, cfg, fit)
    mu = verify.mu or cfg.lam
    nu = verify.nu or 2.0 * max(mu, lambda0)
    direct_mu = max(mu, lambda0)

    jobs = {
        "hamiltonian_concavity": lambda: check_concavity(spec, seed=verify.seed),
        "hamiltonian_lipschitz": lambda: check_lipschitz(spec, seed=verify.seed),
        "nisio_g_duality": lambda: check_g_duality(spec, seed=verify.seed),
        "smoothing_fit": lambda: check_smoothing_fit(
            model, lifted=lifted, window=smoothing.window, n_times=smoothing.n_times,
            artifact_prefix=artifact_prefix,
        ),
        "linear_resolvent_identity": lambda: check_linear_resolvent_identity(
            model, l0, mu, nu, cfg, verify.linear_tol
        ),
        "nonlinear_resolvent_identity": lambda: check_nonlinear_resolvent_identity(
            model, l0, spec, direct_mu, 2.0 * direct_mu, cfg, verify.nonlinear_tol,
            lambda0=lambda0,
        ),
        "lipschitz_bound": lambda: check_lipschitz_bound(
            model, spec, mu, verify.n_pairs, cfg, verify.seed, verify.lipschitz_slack,
            lambda0=lambda0, artifact_prefix=artifact_prefix,
        ),
        "injectivity": lambda: check_injectivity(
            model, spec, mu, cfg, detect_tol=verify.detect_tol, lambda0=lambda0
        ),
        "uniqueness": lambda: check_uniqueness(model, l0, spec, mu, cfg, lambda0=lambda0),
        "nisio": lambda: _run_nisio(model, spec, cfg, verify, mu),
    }
    reports = [jobs[name]() for name in selected]
    return sorted(reports, key=lambda r: r.name)


def _run_nisio(model, spec, cfg, verify, lam):
    samples, PB = _nisio_samples(model, spec, cfg, verify, lam)
    return check_nisio(
        spec, samples, (0.1, 0.5, 1.0), (0.1, 0.05, 0.025), embedding=PB,
        tolerance=verify.nisio_contraction_tol,
    )
