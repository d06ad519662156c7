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

import os
import warnings

import numba
from packaging import version
from numba.core import config


class NumbaMinimumVersionRequiredError(Exception):
    """
    A ``NumbaMinimumVersionRequiredError`` indicates that the installed numba
    is older than the oldest release the grid kernels were tested with.

    """

    pass


_NUMBA_MINIMUM = "0.53.0"

try:
    if version.parse(numba.__version__) < version.parse(_NUMBA_MINIMUM):
        raise NumbaMinimumVersionRequiredError
except NumbaMinimumVersionRequiredError:
    msg = "numba_hjb is not tested with numba " + numba.__version__ + "."
    msg += " Install numba " + _NUMBA_MINIMUM + " or higher."
    warnings.warn(msg, UserWarning)


def _readenv(name, ctor, default):
    """Read a process knob from the environment.

    Same contract as numba's own ``_readenv``: a value that cannot be parsed
    falls back to ``default`` with a ``RuntimeWarning``.
    """
    value = os.environ.get(name)
    if value is None:
        return default() if callable(default) else default
    try:
        return ctor(value)
    except Exception:
        warnings.warn(
            "environ %s defined but failed to parse '%s'" % (name, value),
            RuntimeWarning,
        )
        return default


def __getattr__(name):
    """Fallback to Numba config"""
    return getattr(config, name)


# Print one line per Picard / continuation iteration
DEBUG = _readenv("NUMBA_HJB_DEBUG", int, config.DEBUG)

# Dump the convergence trace report after each solve, level 2 adds the
# per-iteration table
SOLVER_DIAGNOSTICS = _readenv("NUMBA_HJB_SOLVER_DIAGNOSTICS", int, 0)

# Compile grid kernels with parallel=True
PARALLEL = _readenv("NUMBA_HJB_PARALLEL", int, 1)

# Cache compiled grid kernels on disk
CACHE = _readenv("NUMBA_HJB_CACHE", int, 0)

# Paths stepped together by the simulator
MC_CHUNK = _readenv("NUMBA_HJB_MC_CHUNK", int, 1000)
