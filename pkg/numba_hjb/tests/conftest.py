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

import pytest

from numba_hjb.hamiltonian import HamiltonianSpec
from numba_hjb.hjb_solver import SolverConfig, estimate_lambda0

from . import _helper


@pytest.fixture(scope="module")
def scalar_heat():
    return _helper.scalar_heat()


@pytest.fixture(scope="module")
def benchmark():
    return _helper.benchmark_problem()


@pytest.fixture(scope="module")
def ball_lambda0(scalar_heat):
    """Contraction threshold of the scalar heat mode with the unit ball."""
    return estimate_lambda0(scalar_heat, HamiltonianSpec.ball(1.0), SolverConfig())


list_of_control_sets = [
    HamiltonianSpec.ball(1.0),
    HamiltonianSpec.box([-1.0], [2.0]),
    HamiltonianSpec.ball(0.5, l1_kind="abs", l1_coeff=0.3, search_resolution=101),
    HamiltonianSpec.finite([[-1.0], [0.0], [1.0]], l1_table=[0.2, 0.0, 0.1]),
]


@pytest.fixture(params=list_of_control_sets, ids=lambda s: s.control_kind + "-" + s.l1_kind)
def control_set(request):
    return request.param
