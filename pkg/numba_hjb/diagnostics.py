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

from numba.parfors.parfor import _termwidth, print_wrapped

__all__ = ["SolverDiagnostics"]

_TITLES = {
    "picard": " Picard iteration ",
    "continuation": " Continuation ",
}


class SolverDiagnostics:
    """Prints a :class:`ConvergenceTrace` in the layout of numba's parfor
    diagnostics. Enabled with ``NUMBA_HJB_SOLVER_DIAGNOSTICS``.
    """

    def __init__(self, trace):
        self.trace = trace

    def dump(self, level=1):
        if level == 0:
            level = 1
        trace = self.trace
        print(_TITLES.get(trace.kind, " Solver ").center(_termwidth, "-"))
        print_wrapped(
            "discount %g: %s after %d iteration(s)"
            % (
                trace.lam,
                "converged" if trace.converged else "not converged",
                trace.iterations,
            )
        )
        if trace.ratios:
            print_wrapped(
                "last contraction ratio %.4g (max %.4g)"
                % (trace.ratios[-1], max(trace.ratios))
            )
        if trace.final_residual is not None:
            print_wrapped("final residual %.4e" % trace.final_residual)
        print_wrapped(
            "quadrature error budget %.4e, gradient constant %.4g"
            % (trace.error_budget, trace.gradient_constant)
        )
        if level >= 2 and trace.deltas:
            self.print_iterations()
        print(_termwidth * "-")

    def print_iterations(self):
        trace = self.trace
        print_wrapped("%5s %14s %14s %10s" % ("iter", "delta", "grad delta", "ratio"))
        for k, delta in enumerate(trace.deltas):
            # ratios start at the second iteration
            ratio = trace.ratios[k - 1] if 1 <= k <= len(trace.ratios) else None
            grad = trace.gradient_deltas[k] if k < len(trace.gradient_deltas) else 0.0
            print_wrapped(
                "%5d %14.6e %14.6e %10s"
                % (k + 1, delta, grad, "-" if ratio is None else "%.4f" % ratio)
            )
