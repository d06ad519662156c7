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
from scipy.special import gamma as gamma_fn

from numba_hjb.utils.quadrature import (
    QuadratureRule,
    counter_stream,
    graded_nodes,
    resolvent_time_mesh,
    tail_bound,
)


class TestResolventTimeMesh(unittest.TestCase):
    def test_singular_laplace_transform(self):
        for lam, g in [(1.0, 0.5), (2.5, 0.3), (0.7, 0.0)]:
            mesh = resolvent_time_mesh(lam, g, 1e-8, 1.0)
            got = np.sum(mesh.weights * np.exp(-lam * mesh.nodes) * mesh.nodes ** -g)
            expected = gamma_fn(1.0 - g) * lam ** (g - 1.0)
            self.assertAlmostEqual(got / expected, 1.0, delta=1e-7)

    def test_tail_within_budget(self):
        tol = 1e-6
        mesh = resolvent_time_mesh(0.5, 0.5, tol, 3.0)
        self.assertLessEqual(tail_bound(0.5, mesh.t_max, 3.0), 0.1 * tol * (1 + 1e-9))
        np.testing.assert_allclose(
            mesh.laplace_mass(0.5), (1.0 - np.exp(-0.5 * mesh.t_max)) / 0.5, rtol=1e-10
        )

    def test_zero_source(self):
        mesh = resolvent_time_mesh(1.0, 0.5, 1e-6, 0.0)
        self.assertEqual(mesh.t_max, 1.0)
        self.assertTrue(np.all(mesh.nodes <= 1.0))

    def test_invalid(self):
        with self.assertRaises(ValueError):
            resolvent_time_mesh(0.0, 0.5, 1e-6, 1.0)
        with self.assertRaises(ValueError):
            resolvent_time_mesh(1.0, 1.0, 1e-6, 1.0)


def test_graded_nodes_integrate_constants():
    mesh = graded_nodes(2.0, 400)
    assert len(mesh) == 400
    np.testing.assert_allclose(mesh.weights.sum(), 2.0, rtol=1e-12)
    assert mesh.nodes[-1] == 2.0
    np.testing.assert_allclose(np.sum(mesh.weights * mesh.nodes), 2.0, rtol=1e-4)
    with pytest.raises(ValueError):
        graded_nodes(1.0, 3)


class TestQuadratureRule(unittest.TestCase):
    def test_gauss_hermite_moments(self):
        z, w = QuadratureRule().standard_normal(2)
        self.assertEqual(z.shape, (400, 2))
        np.testing.assert_allclose(w.sum(), 1.0)
        np.testing.assert_allclose(w @ z, 0.0, atol=1e-14)
        np.testing.assert_allclose(w @ z ** 2, 1.0)
        np.testing.assert_allclose(w @ (z[:, 0] ** 2 * z[:, 1] ** 2), 1.0)
        np.testing.assert_allclose(w @ z[:, 0] ** 4, 3.0)

    def test_default_kind(self):
        self.assertEqual(QuadratureRule.default_for(3).kind, "gauss_hermite_tensor")
        self.assertEqual(QuadratureRule.default_for(4).kind, "monte_carlo")

    def test_monte_carlo_streams(self):
        rule = QuadratureRule("monte_carlo", n_samples=1000, seed=3)
        z0, w = rule.standard_normal(4, task=0)
        z0_again, _ = rule.standard_normal(4, task=0)
        z1, _ = rule.standard_normal(4, task=1)
        np.testing.assert_equal(z0, z0_again)
        self.assertFalse(np.array_equal(z0, z1))
        np.testing.assert_allclose(w.sum(), 1.0)

    def test_invalid_kind(self):
        with self.assertRaises(ValueError):
            QuadratureRule("sobol")


def test_counter_stream_keys():
    a = counter_stream(11, 2).standard_normal(8)
    b = counter_stream(11, 2).standard_normal(8)
    c = counter_stream(12, 2).standard_normal(8)
    np.testing.assert_equal(a, b)
    assert not np.array_equal(a, c)


if __name__ == "__main__":
    unittest.main()
