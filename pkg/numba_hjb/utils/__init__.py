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

"""
Grid functions, quadrature rules and small numerical helpers shared by the
solver modules.

"""
from numba_hjb.utils.constants import exit_code, numerics
from numba_hjb.utils.grid import GridFunction, interpolate
from numba_hjb.utils.linalg import psd_inv_sqrt, psd_sqrt, symmetrize
from numba_hjb.utils.misc import as_points, canonical_json, check_finite, digest
from numba_hjb.utils.quadrature import (
    QuadratureRule,
    TimeMesh,
    counter_stream,
    graded_nodes,
    resolvent_time_mesh,
    tail_bound,
)

__all__ = [
    "exit_code",
    "numerics",
    "GridFunction",
    "interpolate",
    "psd_inv_sqrt",
    "psd_sqrt",
    "symmetrize",
    "as_points",
    "canonical_json",
    "check_finite",
    "digest",
    "QuadratureRule",
    "TimeMesh",
    "counter_stream",
    "graded_nodes",
    "resolvent_time_mesh",
    "tail_bound",
]
