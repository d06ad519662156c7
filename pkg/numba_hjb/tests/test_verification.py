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

from numba_hjb.errors import InvalidConfigError
from numba_hjb.hamiltonian import HamiltonianSpec
from numba_hjb.hjb_solver import SolverConfig
from numba_hjb.lifting import build_lifted
from numba_hjb.reports import CheckReport, make_report
from numba_hjb.run_config import load_run_config, parse_run_config
from numba_hjb.spectral_model import CostSpec
from numba_hjb.utils.grid import GridFunction
from numba_hjb.utils.quadrature import counter_stream
from numba_hjb.verification import (
    CHECK_NAMES,
    CosineMixture,
    check_injectivity,
    check_linear_resolvent_identity,
    check_lipschitz_bound,
    check_nisio,
    check_nonlinear_resolvent_identity,
    check_smoothing_fit,
    check_uniqueness,
    interpolation_error,
    random_cosine_mixture,
    run_all,
)

from . import _helper


class TestCosineMixture(unittest.TestCase):
    def test_gradient(self):
        mix = random_cosine_mixture(counter_stream(0, 0), 2)
        x = np.array([[0.3, -0.7], [1.5, 2.0]])
        h = 1e-6
        fd = np.stack(
            [(mix(x + h * e) - mix(x - h * e)) / (2 * h) for e in np.eye(2)], axis=1
        )
        np.testing.assert_allclose(mix.gradient(x), fd, atol=1e-8)

    def test_bound(self):
        rng = counter_stream(5, 0)
        for _ in range(20):
            mix = random_cosine_mixture(rng, 3, amplitude=0.5)
            self.assertLessEqual(mix.sup_norm(), 0.5 + 1e-15)
            pts = rng.uniform(-10, 10, (200, 3))
            self.assertLessEqual(np.abs(mix(pts)).max(), mix.sup_norm() + 1e-15)

    def test_to_dict(self):
        mix = CosineMixture((0.5,), ((1.0, 2.0),), (0.0,))
        self.assertEqual(mix.to_dict()["frequencies"], [[1.0, 2.0]])


def test_interpolation_error_estimate():
    axes = (np.linspace(-1, 1, 21), np.linspace(0, 2, 11))
    linear = GridFunction.on_grid(axes, lambda x: 3.0 * x[:, 0] - x[:, 1])
    assert interpolation_error(linear) < 1e-14
    quad = GridFunction.on_grid(axes, lambda x: x[:, 0] ** 2)
    # h = 0.1 along the first axis
    np.testing.assert_allclose(interpolation_error(quad), 0.01 * 2.0 / 8.0)
    pts = np.column_stack([np.linspace(-1, 1, 1000), np.ones(1000)])
    assert np.abs(quad(pts) - pts[:, 0] ** 2).max() <= interpolation_error(quad) * (1 + 1e-9)


class TestCheckReport(unittest.TestCase):
    def test_pass_flag(self):
        report = make_report("x", {"a": 1}, 0.5, 1.0)
        self.assertTrue(report.passed)
        self.assertEqual(report.inputs_digest, make_report("x", {"a": 1}, 0.1, 1.0).inputs_digest)
        with self.assertRaises(ValueError):
            CheckReport("x", "", 2.0, 1.0, True)

    def test_nan_defect_fails(self):
        report = make_report("x", {}, float("nan"), 1.0)
        self.assertFalse(report.passed)
        self.assertEqual(report.defect, np.inf)

    def test_artifacts_by_file_name(self):
        report = make_report("x", {}, 0.0, 1.0, ["/tmp/run/a_scan.csv", "b.csv"])
        self.assertEqual(report.artifacts, ("a_scan.csv", "b.csv"))
        self.assertEqual(report.to_dict()["artifacts"], ["a_scan.csv", "b.csv"])


def test_linear_resolvent_identity(scalar_heat):
    cfg = SolverConfig(lam=0.5, tol=1e-7, grid_nodes=(4001,), k_sigma=8.0)
    report = check_linear_resolvent_identity(scalar_heat, CostSpec("cosine"), 0.5, 2.0, cfg)
    assert report.passed, report
    assert report.tolerance == 1e-5
    assert report.details["error_budget"] <= 2e-7


def test_linear_resolvent_identity_rejects_equal_discounts(scalar_heat):
    with pytest.raises(ValueError):
        check_linear_resolvent_identity(scalar_heat, CostSpec("cosine"), 1.0, 1.0, SolverConfig())


def test_nonlinear_resolvent_identity(benchmark, ball_lambda0):
    model, spec, l0 = benchmark
    mu = 1.2 * ball_lambda0
    cfg = SolverConfig(lam=mu, tol=1e-7, grid_nodes=(1001,))
    report = check_nonlinear_resolvent_identity(
        model, l0, spec, mu, 2.0 * mu, cfg, lambda0=ball_lambda0
    )
    assert report.passed, report
    budget = report.details["error_budget"]
    assert report.tolerance == pytest.approx(5.0 * (1e-7 + budget))
    assert report.details["interpolation_error"] <= budget


def test_lipschitz_bound_direct(benchmark, ball_lambda0):
    model, spec, _ = benchmark
    mu = 1.2 * ball_lambda0
    cfg = SolverConfig(lam=mu, tol=1e-7, grid_nodes=(401,))
    report = check_lipschitz_bound(model, spec, mu, 5, cfg, seed=7, lambda0=ball_lambda0)
    assert report.passed, report
    assert report.tolerance == pytest.approx(1.02)
    assert len(report.details["ratios"]) == 5


def test_lipschitz_bound_continuation(benchmark, ball_lambda0):
    model, spec, _ = benchmark
    mu = 0.5 * ball_lambda0
    cfg = SolverConfig(lam=mu, tol=1e-7, outer_tol=1e-5, grid_nodes=(201,))
    report = check_lipschitz_bound(model, spec, mu, 3, cfg, seed=1, lambda0=ball_lambda0)
    assert report.passed, report
    assert report.tolerance == pytest.approx(1.05)


def _mixture_samples(n_samples=3, nodes=1601, half_width=6.0, seed=2):
    rng = counter_stream(seed, 0)
    axes = (np.linspace(-half_width, half_width, nodes),)
    out = []
    for _ in range(n_samples):
        mix = random_cosine_mixture(rng, 1, n_terms=2, max_frequency=1.0)
        out.append(GridFunction.on_grid(axes, mix, mix.gradient))
    return out


class TestNisio(unittest.TestCase):
    def test_ball(self):
        report = check_nisio(
            HamiltonianSpec.ball(1.0), _mixture_samples(), (0.1, 0.5, 1.0), (0.1, 0.05, 0.025)
        )
        self.assertTrue(report.passed, report)
        self.assertLessEqual(report.details["contraction_excess"], 1e-8)
        for residuals in report.details["generator_residuals"]:
            self.assertLessEqual(residuals[-1], 0.5 * residuals[0])

    def test_finite_set(self):
        spec = HamiltonianSpec.finite([[-1.0], [0.0], [1.0]], l1_table=[0.2, 0.0, 0.1])
        report = check_nisio(spec, _mixture_samples(seed=3), (0.5,), (0.1, 0.05, 0.025))
        self.assertTrue(report.passed, report)

    def test_embedded_control(self):
        model = _helper.scalar_heat()
        PB = model.projected_control()
        axes = (np.linspace(-6.0, 6.0, 1601),)
        rng = counter_stream(4, 0)
        samples = []
        for _ in range(3):
            mix = random_cosine_mixture(rng, 1, n_terms=2, max_frequency=1.0)
            samples.append(GridFunction.on_grid(axes, mix, lambda x, m=mix: m.gradient(x) @ PB))
        report = check_nisio(
            HamiltonianSpec.box([-1.0], [1.0]), samples, (0.1, 1.0), (0.1, 0.05, 0.025),
            embedding=PB,
        )
        self.assertTrue(report.passed, report)


class TestInjectivity(unittest.TestCase):
    def test_detects_bump(self):
        model, spec, _ = _helper.benchmark_problem()
        cfg = SolverConfig(lam=6.0, tol=1e-7, grid_nodes=(201,))
        report = check_injectivity(model, spec, 6.0, cfg, lambda0=3.0)
        self.assertTrue(report.passed, report)
        self.assertGreater(report.details["separation"], 1e-6)
        self.assertAlmostEqual(report.details["detect_tol"], 1e-6)

    def test_unreachable_threshold(self):
        model, spec, _ = _helper.benchmark_problem()
        cfg = SolverConfig(lam=6.0, tol=1e-7, grid_nodes=(201,))
        report = check_injectivity(model, spec, 6.0, cfg, detect_tol=10.0, lambda0=3.0)
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.defect, 10.0 - report.details["separation"])


def test_uniqueness_direct(benchmark, ball_lambda0):
    model, spec, l0 = benchmark
    lam = 2.0 * ball_lambda0
    cfg = SolverConfig(lam=lam, tol=1e-7, grid_nodes=(201,))
    report = check_uniqueness(model, l0, spec, lam, cfg, lambda0=ball_lambda0)
    assert report.passed, report
    assert report.tolerance == pytest.approx(2e-7)


def test_uniqueness_continuation(benchmark, ball_lambda0):
    model, spec, l0 = benchmark
    lam = 0.25 * ball_lambda0
    cfg = SolverConfig(lam=lam, nu=1.5 * ball_lambda0, tol=1e-7, outer_tol=1e-4, grid_nodes=(201,))
    report = check_uniqueness(model, l0, spec, lam, cfg, lambda0=ball_lambda0)
    assert report.passed, report
    assert report.tolerance == pytest.approx(2e-4)


class TestSmoothingFitCheck(unittest.TestCase):
    def test_heat_mode(self):
        report = check_smoothing_fit(_helper.scalar_heat())
        self.assertTrue(report.passed, report)
        self.assertGreater(report.details["gamma"], 0.45)
        self.assertLess(report.details["gamma"], 0.55)

    def test_range_violation(self):
        report = check_smoothing_fit(_helper.scalar_heat(), gamma_range=(0.7, 1.0))
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.defect, 0.7 - report.details["gamma"])

    def test_explicit_times(self):
        times = np.logspace(-3, -1, 10)
        report = check_smoothing_fit(_helper.scalar_heat(), times=times, window=(5e-4, 0.2))
        self.assertTrue(report.passed, report)


def test_smoothing_fit_lifted_cross_check(tmp_path):
    model = _helper.scalar_heat()
    lifted = build_lifted(model)
    prefix = str(tmp_path / "heat")
    report = check_smoothing_fit(model, lifted=lifted, artifact_prefix=prefix)
    assert report.passed, report
    assert report.details["lifted_gap"] <= 0.1
    assert report.artifacts == ("heat_smoothing_scan.csv",)
    table = np.loadtxt(prefix + "_smoothing_scan.csv", delimiter=",", skiprows=1)
    assert table.shape == (12, 3)
    np.testing.assert_allclose(table[:, 2], table[:, 1], rtol=0.1)

    # the excess over a negative tolerance is the gap plus its magnitude
    strict = check_smoothing_fit(model, lifted=lifted, lifted_tol=-1.0)
    assert not strict.passed
    assert strict.defect == pytest.approx(1.0 + strict.details["lifted_gap"])


def test_lipschitz_ratios_artifact(benchmark, ball_lambda0, tmp_path):
    model, spec, _ = benchmark
    mu = 1.2 * ball_lambda0
    cfg = SolverConfig(lam=mu, tol=1e-7, grid_nodes=(201,))
    prefix = str(tmp_path / "lip")
    report = check_lipschitz_bound(
        model, spec, mu, 2, cfg, seed=7, slack=1.0, lambda0=ball_lambda0,
        artifact_prefix=prefix,
    )
    assert report.artifacts == ("lip_lipschitz_ratios.csv",)
    table = np.loadtxt(prefix + "_lipschitz_ratios.csv", delimiter=",", skiprows=1, ndmin=2)
    np.testing.assert_array_equal(table[:, 0], [0, 1])
    np.testing.assert_allclose(table[:, 1], report.details["ratios"], rtol=1e-11)


_FAST_CONFIG = """
[model]
kind = heat
n_modes = 1

[cost]
kind = cosine

[hamiltonian]
control_kind = ball
radius = 1.0

[solver]
lambda = 6.0
tol = 1e-6
grid_nodes = 101

[verify]
n_pairs = 2
seed = 3
"""


class TestRunAll(unittest.TestCase):
    def test_unknown_check(self):
        with self.assertRaises(InvalidConfigError):
            run_all(parse_run_config(_FAST_CONFIG), ["no_such_check"])

    def test_anchor_below_target(self):
        text = _FAST_CONFIG.replace("grid_nodes = 101", "grid_nodes = 101\nnu = 1.0")
        with self.assertRaises(InvalidConfigError):
            run_all(parse_run_config(text), ["uniqueness"])

    def test_sorted_subset(self):
        checks = ["smoothing_fit", "hamiltonian_lipschitz", "hamiltonian_concavity"]
        reports = run_all(parse_run_config(_FAST_CONFIG), checks)
        self.assertEqual([r.name for r in reports], sorted(checks))
        self.assertTrue(all(r.passed for r in reports))

    def test_solver_checks(self):
        checks = ["uniqueness", "nonlinear_resolvent_identity", "injectivity"]
        reports = run_all(parse_run_config(_FAST_CONFIG), checks)
        self.assertEqual(len(reports), 3)
        self.assertTrue(all(r.passed for r in reports), reports)

    def test_nisio_on_bundled_config(self):
        run_config = load_run_config(_helper.example_config_path())
        (report,) = run_all(run_config, ["nisio"])
        self.assertTrue(report.passed, report)


def test_check_names_sorted():
    assert list(CHECK_NAMES) == sorted(CHECK_NAMES)


if __name__ == "__main__":
    unittest.main()
