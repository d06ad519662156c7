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

from numba_hjb.hamiltonian import (
    HamiltonianSpec,
    check_concavity,
    check_g_duality,
    check_lipschitz,
    feedback_control,
    h_min,
    lipschitz_constant,
    nisio_g,
    nisio_step,
)
from numba_hjb.utils.grid import GridFunction


def _ball_quadratic(p, R=1.0, c=0.5):
    norm = np.abs(p)
    return np.where(norm <= 2 * c * R, -norm ** 2 / (4 * c), -R * norm + c * R * R)


class TestMinimizedHamiltonian(unittest.TestCase):
    def test_ball_quadratic_closed_form(self):
        spec = HamiltonianSpec.ball(1.0)
        p = np.linspace(-3, 3, 61)[:, None]
        np.testing.assert_allclose(h_min(spec, p), _ball_quadratic(p[:, 0]), atol=1e-14)

    def test_box_matches_ball_in_one_dimension(self):
        p = np.linspace(-3, 3, 61)[:, None]
        np.testing.assert_allclose(
            h_min(HamiltonianSpec.box([-1.0], [1.0]), p),
            h_min(HamiltonianSpec.ball(1.0), p),
            atol=1e-14,
        )

    def test_zero_control(self):
        spec = HamiltonianSpec.ball(0.0)
        np.testing.assert_equal(h_min(spec, np.ones((3, 1))), np.zeros(3))
        self.assertEqual(lipschitz_constant(spec), 0.0)

    def test_finite_set(self):
        spec = HamiltonianSpec.finite([[-1.0], [0.0], [1.0]], l1_table=[0.2, 0.0, 0.1])
        self.assertAlmostEqual(h_min(spec, [1.0]), -0.8)
        self.assertAlmostEqual(h_min(spec, [-1.0]), -0.9)
        self.assertAlmostEqual(h_min(spec, [0.05]), 0.0)
        np.testing.assert_equal(feedback_control(spec, [1.0]), [-1.0])

    def test_finite_set_tie_break(self):
        spec = HamiltonianSpec.finite([[1.0], [-1.0]])
        np.testing.assert_equal(feedback_control(spec, [0.0]), [-1.0])
        self.assertEqual(spec.points, ((-1.0,), (1.0,)))

        spec = HamiltonianSpec.finite(
            [[1.0, 0.0], [0.0, 2.0], [0.0, -1.0]], l1_table=[0.0, 0.5, 0.0]
        )
        self.assertEqual(spec.points, ((0.0, -1.0), (0.0, 2.0), (1.0, 0.0)))
        self.assertEqual(spec.l1_table, (0.0, 0.5, 0.0))
        # (0, -1) and (1, 0) both cost 0 at p = 0
        np.testing.assert_equal(feedback_control(spec, [0.0, 0.0]), [0.0, -1.0])

    def test_abs_cost_grid_search(self):
        spec = HamiltonianSpec.ball(1.0, l1_kind="abs", l1_coeff=0.3)
        # inf over |u| <= 1 of p u + 0.3 |u| is min(0, 0.3 - |p|)
        p = np.array([[-2.0], [-0.2], [0.1], [1.0]])
        np.testing.assert_allclose(h_min(spec, p), np.minimum(0.0, 0.3 - np.abs(p[:, 0])), atol=1e-6)

    def test_two_dimensional_ball(self):
        spec = HamiltonianSpec.ball(2.0, dim=2, l1_kind="zero")
        p = np.array([[3.0, 4.0], [0.0, 0.0]])
        np.testing.assert_allclose(h_min(spec, p), [-10.0, 0.0])
        np.testing.assert_allclose(feedback_control(spec, p[0]), [-1.2, -1.6])
        self.assertEqual(lipschitz_constant(spec), 2.0)

    def test_box_lipschitz_constant(self):
        spec = HamiltonianSpec.box([-1.0, -2.0], [3.0, 1.0])
        self.assertAlmostEqual(lipschitz_constant(spec), np.hypot(3.0, 2.0))

    def test_invalid_specs(self):
        with self.assertRaises(ValueError):
            HamiltonianSpec("simplex")
        with self.assertRaises(ValueError):
            HamiltonianSpec.box([1.0], [0.0])
        with self.assertRaises(ValueError):
            HamiltonianSpec.ball(1.0, l1_kind="table", l1_table=[0.0])
        with self.assertRaises(ValueError):
            HamiltonianSpec.ball(-1.0)


def test_feedback_is_admissible(control_set):
    rng = np.random.default_rng(5)
    p = rng.uniform(-4, 4, (200, control_set.control_dim))
    u = feedback_control(control_set, p)
    assert np.all(control_set.contains(u))
    np.testing.assert_allclose(
        np.sum(p * u, axis=1) + control_set.l1(u), h_min(control_set, p), atol=1e-12
    )


def test_concavity_and_lipschitz_checks(control_set):
    assert check_concavity(control_set, n_samples=300).passed
    assert check_lipschitz(control_set, n_samples=300).passed


def test_g_duality():
    report = check_g_duality(HamiltonianSpec.ball(1.0), n_samples=30)
    assert report.passed, report.defect
    assert report.name == "nisio_g_duality"


def test_nisio_g_at_zero():
    # g(0) = sup_p H_min(p) = H_min(0) = 0 for a cost vanishing at u = 0
    spec = HamiltonianSpec.ball(1.0)
    assert abs(nisio_g(spec, [0.0])) < 1e-12


class TestNisioStep(unittest.TestCase):
    def setUp(self):
        self.spec = HamiltonianSpec.ball(1.0)
        self.axes = (np.linspace(-4.0, 4.0, 801),)

    def test_constant_shift(self):
        u = GridFunction(self.axes, np.full(801, 0.3))
        v = GridFunction(self.axes, np.full(801, 1.3))
        du = nisio_step(self.spec, u, 0.1).values
        dv = nisio_step(self.spec, v, 0.1).values
        np.testing.assert_allclose(dv - du, 1.0, atol=1e-12)

    def test_contraction(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            a = GridFunction(self.axes, np.cos(rng.uniform(0.5, 2) * self.axes[0]))
            b = GridFunction(self.axes, np.sin(rng.uniform(0.5, 2) * self.axes[0]))
            gap = np.abs(a.values - b.values).max()
            for t in (0.05, 0.5):
                na, nb = nisio_step(self.spec, a, t), nisio_step(self.spec, b, t)
                assert np.abs(na.values - nb.values).max() <= gap * (1 + 1e-12)

    def test_substeps(self):
        u = GridFunction(self.axes, np.cos(self.axes[0]))
        one = nisio_step(self.spec, u, 0.1, substeps=1)
        two = nisio_step(self.spec, u, 0.1, substeps=2)
        self.assertEqual(two.shape, one.shape)

    def test_embedding_required(self):
        axes = (np.linspace(-1, 1, 5), np.linspace(-1, 1, 5))
        u = GridFunction(axes, np.zeros((5, 5)))
        with self.assertRaises(ValueError):
            nisio_step(self.spec, u, 0.1)
        nisio_step(self.spec, u, 0.1, embedding=[[1.0], [0.0]])

    def test_eps_positive(self):
        u = GridFunction(self.axes, np.zeros(801))
        with self.assertRaises(ValueError):
            nisio_step(self.spec, u, 0.0)


if __name__ == "__main__":
    unittest.main()
