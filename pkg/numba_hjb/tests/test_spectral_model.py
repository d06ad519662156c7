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

import unittest

import numpy as np
import pytest
from scipy import integrate, linalg

from numba_hjb.errors import SmoothingHypothesisError
from numba_hjb.spectral_model import (
    CostSpec,
    DriftBlock,
    SpectralModel,
    build_heat_model,
    build_wave_model,
    control_integral,
    covariance,
    dirichlet_coefficient,
    flow,
    flow_matrix,
)

from . import _helper


def _quad_covariance(model, t):
    A = model.generator_matrix()
    M = model.noise_matrix @ model.noise_matrix.T

    def integrand(s):
        E = linalg.expm(s * A)
        return E @ M @ E.T

    return integrate.quad_vec(integrand, 0.0, t, epsabs=1e-13, epsrel=1e-12)[0]


class TestHeatModel(unittest.TestCase):
    def test_scalar_coefficients(self):
        model = _helper.scalar_heat()
        self.assertEqual(model.n_total, 1)
        self.assertEqual(model.control_dim, 1)
        self.assertTrue(model.is_decaying)
        np.testing.assert_allclose(model.control_matrix[0, 0], np.sqrt(2.0 / np.pi))
        np.testing.assert_allclose(model.noise_matrix, [[1.0]])

    def test_control_grows_with_mode(self):
        model = build_heat_model(5)
        b = model.control_matrix[:, 0]
        np.testing.assert_allclose(b / np.arange(1, 6), b[0], rtol=1e-12)

    def test_noise_decay(self):
        model = build_heat_model(4, beta=0.5)
        np.testing.assert_allclose(np.diag(model.noise_matrix), 1.0 / np.arange(1, 5))

    def test_projection_bounds(self):
        with self.assertRaises(ValueError):
            build_heat_model(2, n_proj=3)
        with self.assertRaises(ValueError):
            build_heat_model(2, beta=-1.0)

    def test_projection_commutes(self):
        model = build_heat_model(6, n_proj=2)
        self.assertTrue(model.projection_commutes())
        np.testing.assert_equal(model.projector(), np.eye(6)[:2])


class TestWaveModel(unittest.TestCase):
    def test_rotation_flow(self):
        model = build_wave_model(1)
        t = 0.3
        E = flow_matrix(model, t)
        np.testing.assert_allclose(E, linalg.expm(t * model.generator_matrix()), atol=1e-14)
        self.assertFalse(model.is_decaying)

    def test_rank_deficient_noise(self):
        with self.assertRaisesRegex(SmoothingHypothesisError, "smoothing hypothesis"):
            build_wave_model(2, sigma=[1.0, 0.0], n_proj_pairs=2)

    def test_no_stationary_covariance(self):
        with self.assertRaises(ValueError):
            covariance(build_wave_model(1), np.inf)

    def test_split_projection_does_not_commute(self):
        model = build_wave_model(1)
        half = SpectralModel(model.blocks, model.noise_matrix, model.control_matrix, (1,))
        self.assertFalse(half.projection_commutes())


def test_flow_scalar():
    model = _helper.scalar_heat()
    x = np.array([[1.0], [-2.0]])
    np.testing.assert_allclose(flow(model, 0.5, x), x * np.exp(-0.5))


@pytest.mark.parametrize("t", [1e-3, 0.2, 1.0, 5.0])
def test_covariance_scalar(t):
    got = covariance(_helper.scalar_heat(), t)
    np.testing.assert_allclose(got, [[-np.expm1(-2.0 * t) / 2.0]], rtol=1e-12)


def test_stationary_covariance():
    model = build_heat_model(3, beta=0.5)
    eig = np.arange(1, 4) ** 2.0
    expected = np.diag(eig ** -1.0 / (2.0 * eig))
    np.testing.assert_allclose(covariance(model, np.inf), expected, rtol=1e-12)


@pytest.mark.parametrize(
    "model",
    [
        build_heat_model(3, beta=0.25, n_proj=2),
        build_wave_model(2, c=1.3, sigma=[[1.0, 0.5], [0.2, 1.0]], n_proj_pairs=2),
    ],
    ids=["heat", "wave"],
)
def test_covariance_matches_quadrature(model):
    for t in (0.05, 0.7, 2.0):
        np.testing.assert_allclose(
            covariance(model, t), _quad_covariance(model, t), atol=1e-10
        )


@pytest.mark.parametrize(
    "model",
    [
        _helper.scalar_heat(),
        build_heat_model(5, beta=0.25, n_proj=2),
        build_wave_model(2, c=1.3, sigma=[[1.0, 0.5], [0.2, 1.0]], n_proj_pairs=2),
    ],
    ids=["scalar", "heat", "wave"],
)
def test_covariance_flow_identity(model):
    for t, s in ((0.1, 0.4), (1.0, 0.25), (2.0, 3.0)):
        E = flow_matrix(model, s)
        np.testing.assert_allclose(
            covariance(model, t + s),
            E @ covariance(model, t) @ E.T + covariance(model, s),
            rtol=1e-11,
            atol=1e-12,
        )


def test_projected_covariance_is_block():
    model = build_wave_model(3, n_proj_pairs=2)
    full = covariance(model, 0.4)
    np.testing.assert_allclose(covariance(model, 0.4, projected_only=True), full[:4, :4])


def test_control_integral_matches_quadrature():
    model = build_wave_model(2, c=0.7, n_proj_pairs=1)
    A = model.generator_matrix()
    dt = 0.37
    expected = integrate.quad_vec(lambda s: linalg.expm(s * A), 0.0, dt, epsabs=1e-14)[0]
    np.testing.assert_allclose(
        control_integral(model, dt), expected @ model.control_matrix, atol=1e-12
    )


@pytest.mark.parametrize("n, L", [(1, np.pi), (3, np.pi), (2, 1.5)])
def test_dirichlet_coefficient(n, L):
    expected = integrate.quad(
        lambda xi: (1.0 - xi / L) * np.sqrt(2.0 / L) * np.sin(n * np.pi * xi / L), 0.0, L
    )[0]
    assert dirichlet_coefficient(n, L) == pytest.approx(expected, rel=1e-10)


def test_dirichlet_coefficient_invalid():
    with pytest.raises(ValueError):
        dirichlet_coefficient(0)
    with pytest.raises(ValueError):
        dirichlet_coefficient(1, L=0.0)


def test_drift_block_tiling():
    with pytest.raises(ValueError):
        SpectralModel((DriftBlock("decay", 1.0, 1),), [[1.0]], [[1.0]], (0,))
    with pytest.raises(ValueError):
        SpectralModel((DriftBlock("decay", 0.0, 0),), [[1.0]], [[1.0]], (0,))


class TestCostSpec(unittest.TestCase):
    def test_constant(self):
        l0 = CostSpec("constant", amplitude=2.5)
        np.testing.assert_equal(l0(np.zeros((4, 3))), np.full(4, 2.5))
        self.assertEqual(l0.sup_norm(), 2.5)

    def test_cosine(self):
        l0 = CostSpec("cosine", amplitude=0.5, weights=(1.0, 2.0), phase=0.1)
        pts = np.array([[0.3, -0.2], [1.0, 1.0]])
        np.testing.assert_allclose(l0(pts), 0.5 * np.cos(pts @ [1.0, 2.0] + 0.1))
        self.assertEqual(l0.sup_norm(), 0.5)

    def test_logistic_bounded(self):
        l0 = CostSpec("logistic", amplitude=1.0, weights=(1.0,), offset=1.0)
        vals = l0(np.linspace(-50, 50, 101)[:, None])
        self.assertTrue(np.all((vals > 0) & (vals <= l0.sup_norm())))

    def test_unknown_kind(self):
        with self.assertRaises(ValueError):
            CostSpec("quadratic")


if __name__ == "__main__":
    unittest.main()
