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

"""Transition semigroup of the uncontrolled Ornstein-Uhlenbeck process on the
projected coordinates and its derivative along the control directions.

For a projection that keeps whole drift blocks the projected state at time
``t`` started from ``x`` is Gaussian with mean ``P exp(tA) x`` and covariance
``Q_N = P Q_t P*``. Derivatives along ``B k`` follow the integration by parts

    d/dk E[phi(X_t)] = E[phi(X_t) <Lambda(t) k, Q_N**(-1/2) Y>],
    Lambda(t) = Q_N**(-1/2) P exp(tA) B,

so no derivative of ``phi`` is ever taken.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from numba_hjb.errors import DegenerateLawError, SmoothingHypothesisError
from numba_hjb.spectral_model import covariance, flow_matrix
from numba_hjb.utils.constants import numerics
from numba_hjb.utils.linalg import psd_inv_sqrt, psd_sqrt, symmetrize
from numba_hjb.utils.misc import as_points
from numba_hjb.utils.quadrature import QuadratureRule

__all__ = [
    "GaussianLaw",
    "gaussian_law",
    "projected_flow",
    "TransitionPlan",
    "transition_plan",
    "semigroup_moments",
    "apply_Pt",
    "grad_B_Pt",
    "lambda_finite",
]


@dataclass(frozen=True)
class GaussianLaw:
    """Law of the projected state: ``mean`` (one point or a batch) and a
    shared covariance ``cov``.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        cov = symmetrize(self.cov)
        evals = np.linalg.eigvalsh(cov) if cov.size else np.zeros(0)
        if evals.size and evals.min() < -1e-12:
            raise ValueError(
                "covariance is not positive semi-definite (min eigenvalue %g)"
                % evals.min()
            )
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64))
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self):
        return self.cov.shape[0]

    def factor(self):
        return psd_sqrt(self.cov)


def _require_commuting(model):
    if not model.projection_commutes():
        raise ValueError(
            "the projection does not commute with the drift; the projected "
            "law depends on unprojected coordinates"
        )


def projected_flow(model, t):
    """``P exp(tA) P*`` for a commuting projection."""
    idx = list(model.projection_indices)
    return flow_matrix(model, t)[np.ix_(idx, idx)]


def gaussian_law(model, t, x_proj):
    """Law of ``P X_t`` for the uncontrolled process started at ``x_proj``."""
    _require_commuting(model)
    pts, single = as_points(x_proj, model.n_proj)
    mean = pts @ projected_flow(model, t).T
    return GaussianLaw(mean[0] if single else mean, covariance(model, t, True))


def _check_law(cov):
    evals = linalg.eigvalsh(cov)
    top = evals.max() if evals.size else 0.0
    if top <= numerics.RIDGE or evals.min() + numerics.RIDGE <= numerics.EPS_REG * top:
        raise DegenerateLawError(
            "degenerate law: projected covariance eigenvalues %s" % (evals,)
        )


def lambda_finite(model, t):
    """``Lambda(t) = (P Q_t P*)**(-1/2) P exp(tA) B``, shape ``(n_proj, d_U)``.

    Raises:
        SmoothingHypothesisError: ``P exp(tA) B`` leaves the retained
            eigenspace of the projected covariance.
    """
    if not t > 0:
        raise ValueError("Lambda(t) needs t > 0, got %s" % t)
    _require_commuting(model)
    idx = list(model.projection_indices)
    Q = covariance(model, t, projected_only=True)
    F = flow_matrix(model, t)[idx, :] @ model.control_matrix
    inv_sqrt, basis = psd_inv_sqrt(Q)
    resid = F - basis @ (basis.T @ F)
    if np.linalg.norm(resid) > numerics.RANGE_RESIDUAL * max(1.0, np.linalg.norm(F)):
        raise SmoothingHypothesisError(
            "smoothing hypothesis violated numerically: P exp(tA) B leaves the "
            "range of the projected covariance at t=%g (residual %g)"
            % (t, np.linalg.norm(resid))
        )
    return inv_sqrt @ F


@dataclass(frozen=True, eq=False)
class TransitionPlan:
    """Everything ``P_t`` needs at one time ``t``, independent of ``phi``.

    ``weights`` has one row per quadrature node: the probability weight
    followed by the weight times the score ``<Lambda(t) k, z>`` for each
    control direction ``k``.
    """

    t: float
    mean_map: np.ndarray
    offsets: np.ndarray
    weights: np.ndarray
    lambda_norm: float

    def moments(self, phi, x_proj):
        pts = np.asarray(x_proj, dtype=np.float64)
        d = pts.shape[1]
        means = pts @ self.mean_map.T
        samples = (means[:, None, :] + self.offsets[None, :, :]).reshape(-1, d)
        vals = np.broadcast_to(
            np.asarray(phi(samples), dtype=np.float64), (samples.shape[0],)
        )
        if np.isnan(vals).any():
            raise FloatingPointError("NaN in integrand of the transition semigroup")
        out = vals.reshape(pts.shape[0], -1) @ self.weights
        return out[:, 0], out[:, 1:]


def transition_plan(model, t, quad=None, task=0):
    """Precompute the Gaussian quadrature of ``P_t`` at time ``t``.

    Raises:
        DegenerateLawError: the projected covariance is singular.
    """
    if not t > 0:
        raise ValueError("semigroup needs t > 0, got %s" % t)
    _require_commuting(model)
    if quad is None:
        quad = QuadratureRule.default_for(model.n_proj)
    cov = covariance(model, t, projected_only=True)
    _check_law(cov)
    lam = lambda_finite(model, t)
    z, w = quad.standard_normal(model.n_proj, task)
    weights = np.column_stack([w, w[:, None] * (z @ lam)])
    return TransitionPlan(
        float(t),
        projected_flow(model, t),
        z @ psd_sqrt(cov).T,
        weights,
        float(np.linalg.norm(lam, 2)),
    )


def semigroup_moments(model, phi, t, x_proj, quad=None, task=0):
    """``P_t phi`` and ``grad_B P_t phi`` at a batch of projected points.

    Args:
        model: a :class:`SpectralModel` with a commuting projection.
        phi: callable taking ``(n, n_proj)`` points to ``(n,)`` values, for
            instance a :class:`GridFunction` or a :class:`CostSpec`.
        t: positive time.
        x_proj: ``(n, n_proj)`` starting points.
        quad: :class:`QuadratureRule`; defaults by projected dimension.
        task: stream index for Monte-Carlo rules.

    Returns:
        ``(values, gradients)`` of shapes ``(n,)`` and ``(n, d_U)``.
    """
    pts, _ = as_points(x_proj, model.n_proj)
    return transition_plan(model, t, quad, task).moments(phi, pts)


def apply_Pt(model, phi, t, x_proj, quad=None):
    """``E[phi(P exp(tA) x + Y)]`` with ``Y ~ N(0, P Q_t P*)``."""
    _, single = as_points(x_proj, model.n_proj)
    values, _ = semigroup_moments(model, phi, t, x_proj, quad)
    return float(values[0]) if single else values


def grad_B_Pt(model, phi, t, x_proj, quad=None):
    """Derivative of ``P_t phi`` along each column of ``B``."""
    _, single = as_points(x_proj, model.n_proj)
    _, grads = semigroup_moments(model, phi, t, x_proj, quad)
    return grads[0] if single else grads
