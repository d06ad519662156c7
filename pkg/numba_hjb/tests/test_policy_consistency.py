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

"""The scalar benchmark solved three ways: the mild-solution solver, a finite
difference policy iteration and Monte-Carlo evaluation of policies.
"""

import numpy as np
import pytest

from numba_hjb.hjb_solver import SolverConfig, solve
from numba_hjb.simulation import Policy, evaluate_policy_cost

from ._helper import policy_iteration_oracle

LAM = 1.0


@pytest.fixture(scope="module")
def solved(benchmark):
    model, spec, l0 = benchmark
    cfg = SolverConfig(lam=LAM, tol=1e-6, outer_tol=1e-5, grid_nodes=(801,), extent=(8.0,))
    v, trace = solve(model, l0, spec, LAM, cfg)
    return v, trace


def test_solver_regime(solved):
    _, trace = solved
    assert trace.kind == "continuation"
    assert trace.converged


def test_matches_finite_differences(solved):
    v, _ = solved
    x, oracle = policy_iteration_oracle(LAM)
    sel = np.abs(x) <= 4.0
    np.testing.assert_allclose(v(x[sel][:, None]), oracle[sel], atol=2e-2)


@pytest.mark.parametrize("x0", [-1.0, 0.0, 1.0])
def test_feedback_policy_cost(benchmark, solved, x0):
    model, spec, l0 = benchmark
    v, _ = solved
    value = float(v([x0]))
    est = evaluate_policy_cost(
        model, spec, l0, [x0], Policy.feedback(v, spec), LAM, n_paths=10000, seed=7
    )
    assert est.n_paths == 10000
    lo, hi = est.interval()
    # v is the infimum over policies
    assert hi >= value - 0.01
    assert lo <= value + 0.05 * abs(value)


@pytest.mark.parametrize("x0", [-1.0, 0.0, 1.0])
@pytest.mark.parametrize("u0", [-1.0, 0.0, 1.0])
def test_constant_policy_dominates(benchmark, solved, u0, x0):
    model, spec, l0 = benchmark
    v, _ = solved
    est = evaluate_policy_cost(
        model, spec, l0, [x0], Policy.constant(u0), LAM, n_paths=2000, seed=7
    )
    assert est.mean + est.half_width >= float(v([x0])) - 0.01
