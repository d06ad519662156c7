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

import json
import unittest

import numpy as np
import pytest

from numba_hjb.utils.grid import GridFunction, interpolate
from numba_hjb.utils.linalg import psd_inv_sqrt, psd_sqrt
from numba_hjb.utils.misc import as_points, canonical_json, digest

from ._helper import override_config


class TestInterpolate(unittest.TestCase):
    def test_linear_functions_are_exact(self):
        axes = (np.linspace(-1, 1, 7), np.linspace(0, 3, 5), np.linspace(-2, 0, 4))
        g = GridFunction.on_grid(axes, lambda x: 1.0 + x @ [2.0, -1.0, 0.5])
        rng = np.random.default_rng(0)
        pts = rng.uniform([-1, 0, -2], [1, 3, 0], (50, 3))
        np.testing.assert_allclose(g(pts), 1.0 + pts @ [2.0, -1.0, 0.5], atol=1e-13)

    def test_clamps_outside(self):
        axes = (np.linspace(0, 1, 11),)
        g = GridFunction.on_grid(axes, lambda x: x[:, 0] ** 2)
        np.testing.assert_allclose(g(np.array([[-5.0], [7.0]])), [0.0, 1.0])

    def test_multiple_columns(self):
        axes = (np.linspace(0, 1, 3),)
        table = np.array([[0.0, 1.0], [1.0, 3.0], [2.0, 5.0]])
        out = interpolate(axes, table, np.array([[0.25], [0.75]]))
        np.testing.assert_allclose(out, [[0.5, 2.0], [1.5, 4.0]])

    def test_point_order_independent(self):
        axes = (np.linspace(-1, 1, 33), np.linspace(-1, 1, 17))
        g = GridFunction.on_grid(axes, lambda x: np.sin(x[:, 0]) * np.cos(3 * x[:, 1]))
        pts = np.random.default_rng(1).uniform(-1.2, 1.2, (500, 2))
        np.testing.assert_equal(g(pts), g(pts[::-1])[::-1])


class TestGridFunction(unittest.TestCase):
    def setUp(self):
        self.axes = (np.linspace(-2, 2, 5), np.linspace(-1, 1, 3))

    def test_nodes_order(self):
        g = GridFunction(self.axes, np.arange(15.0).reshape(5, 3))
        nodes = g.nodes()
        self.assertEqual(nodes.shape, (15, 2))
        np.testing.assert_equal(nodes[1], [-2.0, 0.0])
        np.testing.assert_equal(g(nodes), np.arange(15.0))

    def test_masks(self):
        g = GridFunction(self.axes, np.zeros((5, 3)))
        self.assertEqual(g.interior_mask(1.0).sum(), 3)
        self.assertEqual(g.window_mask([1.0, 0.0]).sum(), 3)

    def test_sup_norms(self):
        grad = np.zeros((5, 3, 2))
        grad[0, 0] = [3.0, 4.0]
        g = GridFunction(self.axes, -np.ones((5, 3)), grad)
        self.assertEqual(g.sup_norm(), 1.0)
        self.assertEqual(g.gradient_sup_norm(), 5.0)
        self.assertEqual(g.control_dim, 2)

    def test_declared_bound(self):
        with self.assertRaises(ValueError):
            GridFunction(self.axes, np.full((5, 3), 2.0), bound=1.0)

    def test_non_finite_rejected(self):
        values = np.zeros((5, 3))
        values[2, 1] = np.nan
        with self.assertRaises(FloatingPointError):
            GridFunction(self.axes, values)

    def test_axes_must_increase(self):
        with self.assertRaises(ValueError):
            GridFunction((np.array([0.0, 0.0, 1.0]),), np.zeros(3))

    def test_with_values(self):
        g = GridFunction(self.axes, np.zeros((5, 3)), meta={"error_budget": 1.0})
        h = g.with_values(np.ones(15), note=2)
        self.assertEqual(h.meta, {"note": 2})
        self.assertEqual(g.shifted(2.5).sup_norm(), 2.5)


def test_psd_roots():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((4, 2))
    Q = X @ X.T
    root = psd_sqrt(Q)
    np.testing.assert_allclose(root @ root, Q, atol=1e-12)
    inv, basis = psd_inv_sqrt(Q)
    assert basis.shape == (4, 2)
    P = basis @ basis.T
    np.testing.assert_allclose(inv @ Q @ inv, P, atol=1e-10)


def test_as_points():
    pts, single = as_points([1.0, 2.0], 2)
    assert single and pts.shape == (1, 2)
    pts, single = as_points(np.zeros((3, 2)), 2)
    assert not single
    with pytest.raises(ValueError):
        as_points(np.zeros((3, 2)), 3)


def test_canonical_json_is_order_free():
    a = {"b": np.float64(1.5), "a": [np.arange(2)], "c": float("inf")}
    b = {"c": float("inf"), "a": [[0, 1]], "b": 1.5}
    assert canonical_json(a) == canonical_json(b)
    assert digest(a) == digest(b)


def test_canonical_json_non_finite():
    text = canonical_json({"d": np.float64("nan"), "e": np.array([np.inf, -np.inf, 1.0])})
    assert "NaN" not in text and "Infinity" not in text
    assert json.loads(text) == {"d": "nan", "e": ["inf", "-inf", 1.0]}


def test_override_config():
    from numba_hjb import config

    old = config.MC_CHUNK
    with override_config("MC_CHUNK", old + 7):
        assert config.MC_CHUNK == old + 7
    assert config.MC_CHUNK == old


if __name__ == "__main__":
    unittest.main()
