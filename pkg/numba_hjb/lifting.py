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

"""Lifting of states to projected trajectories and the smoothing diagnostics
built on it.

A state ``x`` is represented by its free projected trajectory
``s -> P exp(sA) x`` in the weighted space ``L2_rho(0, inf)``, discretized on
graded nodes. Row block ``i`` of the lifting matrix is
``sqrt(w_i exp(-rho t_i)) P exp(t_i A)``, so Euclidean inner products of
lifted vectors are ``L2_rho`` inner products.
"""

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import linalg, special

from numba_hjb.errors import FitRejectedError
from numba_hjb.gaussian_semigroup import lambda_finite
from numba_hjb.spectral_model import covariance, flow_matrix
from numba_hjb.utils.constants import numerics
from numba_hjb.utils.linalg import psd_inv_sqrt, symmetrize
from numba_hjb.utils.quadrature import TimeMesh, graded_nodes

__all__ = [
    "LiftedOps",
    "SmoothingFit",
    "build_lifted",
    "lifted_lambda",
    "fit_smoothing_exponent",
    "smoothing_constant",
    "smoothing_scan",
    "smoothing_fit",
    "lifted_gap",
    "DEFAULT_FIT_WINDOW",
]

DEFAULT_FIT_WINDOW = (1e-3, 1e-1)


@dataclass(frozen=True, eq=False)
class LiftedOps:
    rho: float
    mesh: TimeMesh
    row_blocks: np.ndarray
    upsilon: np.ndarray
    eps_reg: float = numerics.EPS_REG
    _svd: tuple = field(default=None, repr=False)

    @property
    def scales(self):
        return np.sqrt(self.mesh.weights * np.exp(-self.rho * self.mesh.nodes))

    @property
    def n_proj(self):
        return self.row_blocks.shape[1]

    def lift(self, x):
        """``Upsilon x`` for a state or a batch of states (last axis)."""
        return np.asarray(x, dtype=np.float64) @ self.upsilon.T

    def lifted_norm(self, x):
        return float(np.linalg.norm(self.lift(x)))

    def adjoint(self, z_samples):
        """``int exp(-rho s) exp(sA*) P* z(s) ds`` on the node samples
        ``z_samples`` of shape ``(m, n_proj)``.
        """
        z = np.asarray(z_samples, dtype=np.float64)
        factor = self.mesh.weights * np.exp(-self.rho * self.mesh.nodes)
        return np.einsum("i,ijk,ij->k", factor, self.row_blocks, z)

    def scale_samples(self, z_samples):
        """Node samples to lifted coordinates, the domain of ``upsilon.T``."""
        return (self.scales[:, None] * np.asarray(z_samples)).reshape(-1)

    def sigma(self, model, t):
        """``Sigma_t = Upsilon Q_t Upsilon*``."""
        return symmetrize(self.upsilon @ covariance(model, t) @ self.upsilon.T)

    def node_shift(self, model, t):
        """Shift ``S_t`` on lifted trajectories, ``Upsilon exp(tA) Upsilon^+``."""
        return self.upsilon @ flow_matrix(model, t) @ linalg.pinv(self.upsilon)

    def thin_factor(self):
        """Thin SVD ``Upsilon = U diag(s) Vt`` restricted to the numerical rank."""
        if self._svd is None:
            U, s, Vt = linalg.svd(self.upsilon, full_matrices=False)
            keep = s > self.eps_reg * s.max()
            object.__setattr__(self, "_svd", (U[:, keep], s[keep], Vt[keep]))
        return self._svd


def build_lifted(model, rho=1.0, m_nodes=200, T_max=None, power=2.0):
    """Assemble the lifting on ``t_i = T_max (i/m)**power``.

    ``T_max`` defaults to ``20 / rho`` so the weight ``exp(-rho T_max)`` is
    below ``3e-9``.
    """
    if not rho > 0:
        raise ValueError("rho must be positive, got %s" % rho)
    if T_max is None:
        T_max = 20.0 / rho
    mesh = graded_nodes(T_max, m_nodes, power)
    P = model.projector()
    row_blocks = np.stack([P @ flow_matrix(model, t) for t in mesh.nodes])
    scales = np.sqrt(mesh.weights * np.exp(-rho * mesh.nodes))
    upsilon = (scales[:, None, None] * row_blocks).reshape(-1, model.n_total)
    return LiftedOps(float(rho), mesh, row_blocks, upsilon)


def lifted_lambda(lifted, model, t):
    """``Sigma_t**(-1/2) Upsilon exp(tA) B`` in lifted coordinates.

    ``Sigma_t`` has rank at most ``n_total``, so the root is taken on the
    thin factor: with ``Upsilon = U S Vt`` and ``K = S Vt Q_t V S``,
    ``Sigma_t**(-1/2) Upsilon = U K**(-1/2) S Vt``.
    """
    if not t > 0:
        raise ValueError("Lambda(t) needs t > 0, got %s" % t)
    U, s, Vt = lifted.thin_factor()
    SVt = s[:, None] * Vt
    K = symmetrize(SVt @ covariance(model, t) @ SVt.T)
    inv_sqrt, _ = psd_inv_sqrt(K, lifted.eps_reg)
    return U @ (inv_sqrt @ (SVt @ flow_matrix(model, t) @ model.control_matrix))


@dataclass(frozen=True)
class SmoothingFit:
    """Least-squares fit ``log ||Lambda(t)|| = log kappa0 - gamma log t``."""

    kappa0: float
    gamma: float
    residual: float
    window: tuple
    status: str = "ok"
    lifted_gap: Optional[float] = None

    def bound(self, t):
        t = np.asarray(t, dtype=np.float64)
        return self.kappa0 * np.maximum(1.0, t ** -self.gamma)

    def to_dict(self):
        return {
            "kappa0": self.kappa0,
            "gamma": self.gamma,
            "residual": self.residual,
            "window": list(self.window),
            "status": self.status,
            "lifted_gap": self.lifted_gap,
        }


def fit_smoothing_exponent(times, norms, window=None, residual_threshold=0.05):
    """Fit the small-time blow-up exponent of ``||Lambda(t)||``.

    Args:
        times: sample times.
        norms: operator norms at ``times``.
        window: ``(t_lo, t_hi)``; defaults to the sample range.
        residual_threshold: RMS log residual above which the fit is returned
            with status ``"warning"``.

    Raises:
        ValueError: fewer than 8 samples in the window or less than two
            decades covered.
        FitRejectedError: a norm in the window is zero.
    """
    times = np.asarray(times, dtype=np.float64)
    norms = np.asarray(norms, dtype=np.float64)
    if window is None:
        window = (float(times.min()), float(times.max()))
    sel = (times >= window[0]) & (times <= window[1])
    t, n = times[sel], norms[sel]
    if t.size < 8:
        raise ValueError("smoothing fit needs at least 8 times, got %d" % t.size)
    if np.log10(t.max() / t.min()) < 2.0 - 1e-9:
        raise ValueError("smoothing fit times must span two decades")
    if np.any(t <= 0):
        raise ValueError("smoothing fit times must be positive")
    if not np.all(n > 0):
        raise FitRejectedError(
            "smoothing exponent fit rejected: %d of %d norms are zero"
            % (np.sum(n <= 0), n.size)
        )
    design = np.column_stack([np.ones_like(t), -np.log(t)])
    coef, _, _, _ = np.linalg.lstsq(design, np.log(n), rcond=None)
    resid = float(np.sqrt(np.mean((design @ coef - np.log(n)) ** 2)))
    status = "ok"
    if resid > residual_threshold:
        status = "warning"
        warnings.warn(
            "smoothing fit residual %g exceeds %g" % (resid, residual_threshold),
            RuntimeWarning,
        )
    return SmoothingFit(
        float(np.exp(coef[0])), float(coef[1]), resid, tuple(window), status
    )


def smoothing_constant(lam, kappa0, gamma):
    """``int_0^inf exp(-lam t) kappa0 max(1, t**-gamma) dt`` in closed form."""
    if lam <= 0:
        raise ValueError("discount must be positive, got %s" % lam)
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1), got %s" % gamma)
    a = 1.0 - gamma
    head = lam ** (-a) * special.gamma(a) * special.gammainc(a, lam)
    return float(kappa0 * (head + np.exp(-lam) / lam))


def smoothing_scan(model, times, lifted=None):
    """Operator norms of ``Lambda(t)`` (and of the lifted version when
    ``lifted`` is given) on ``times``.
    """
    times = np.asarray(times, dtype=np.float64)
    finite = np.array([np.linalg.norm(lambda_finite(model, t), 2) for t in times])
    if lifted is None:
        lifted_norms = np.full_like(finite, np.nan)
    else:
        lifted_norms = np.array(
            [np.linalg.norm(lifted_lambda(lifted, model, t), 2) for t in times]
        )
    return {
        "t": times,
        "norm_lambda_finite": finite,
        "norm_lambda_lifted": lifted_norms,
    }


def lifted_gap(scan):
    """Largest relative deviation of the lifted norms from the finite ones,
    ``None`` when the scan has no lifted column.
    """
    finite = np.asarray(scan["norm_lambda_finite"])
    lifted = np.asarray(scan["norm_lambda_lifted"])
    if np.all(np.isnan(lifted)):
        return None
    if not np.all(np.isfinite(lifted)):
        return float("inf")
    diff = np.abs(lifted - finite)
    rel = np.divide(diff, finite, out=np.where(diff > 0, np.inf, 0.0), where=finite > 0)
    return float(rel.max())


def smoothing_fit(model, lifted=None, window=DEFAULT_FIT_WINDOW, n_times=12):
    """Scan ``n_times`` log-spaced times over ``window`` and fit the exponent.

    The fit always runs on the finite reduction, which is what the solver
    integrates. With ``lifted`` the scan also carries the lifted norms and
    ``SmoothingFit.lifted_gap`` their largest relative deviation.
    """
    times = np.logspace(np.log10(window[0]), np.log10(window[1]), n_times)
    scan = smoothing_scan(model, times, lifted)
    fit = fit_smoothing_exponent(times, scan["norm_lambda_finite"], window)
    if lifted is not None:
        fit = replace(fit, lifted_gap=lifted_gap(scan))
    return fit, scan
