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

"""Exceptions raised by numba_hjb.

The command line maps :class:`NonConvergenceError` to exit code 2 and
:class:`InvalidConfigError` to exit code 3.
"""

__all__ = [
    "InvalidConfigError",
    "DegenerateLawError",
    "SmoothingHypothesisError",
    "FitRejectedError",
    "QuadratureBudgetError",
    "NonConvergenceError",
]


class InvalidConfigError(ValueError):
    """
    An ``InvalidConfigError`` indicates a run configuration that cannot be
    executed: a missing section or key, a value out of range, or an
    inconsistent combination such as a continuation anchor below the target
    discount.

    """

    pass


class DegenerateLawError(ValueError):
    """
    A ``DegenerateLawError`` indicates that the projected covariance of the
    Ornstein-Uhlenbeck state is singular even after the ridge is applied, so
    the Gaussian law has no density on the projected space.

    """

    pass


class SmoothingHypothesisError(ValueError):
    """
    A ``SmoothingHypothesisError`` indicates that the control directions are
    not reachable by the projected noise: either the projected noise
    covariance is rank deficient or ``P exp(tA) B`` has a component outside
    the retained eigenspace of the projected covariance.

    """

    pass


class FitRejectedError(ValueError):
    """
    A ``FitRejectedError`` indicates that a smoothing exponent cannot be
    fitted, typically because every sampled norm is zero.

    """

    pass


class QuadratureBudgetError(RuntimeError):
    """
    A ``QuadratureBudgetError`` indicates that the time quadrature of a
    resolvent carries an error budget larger than the requested tolerance.

    """

    pass


class NonConvergenceError(RuntimeError):
    """
    A ``NonConvergenceError`` indicates that a fixed-point iteration stopped
    without meeting its tolerance. The partial :class:`ConvergenceTrace` is
    available as ``trace``.

    """

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace
