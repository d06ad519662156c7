#! /usr/bin/env python
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

"""Solve below the contraction threshold by stepping down the discount
along the resolvent identity.
"""

import argparse

import numba_hjb as hjb


def main():
    parser = argparse.ArgumentParser(description="Continuation below lambda_0")
    parser.add_argument("--fraction", type=float, default=0.25, help="mu / lambda_0")
    parser.add_argument("--radius", type=float, default=1.0, help="control ball radius")
    args = parser.parse_args()

    model = hjb.build_heat_model(1)
    spec = hjb.HamiltonianSpec.ball(args.radius)
    l0 = hjb.CostSpec("cosine")
    cfg = hjb.SolverConfig()
    lambda0 = hjb.estimate_lambda0(model, spec, cfg)
    mu = args.fraction * lambda0
    nu = 1.5 * lambda0
    print("lambda_0 = %.4f, mu = %.4f, nu = %.4f" % (lambda0, mu, nu))
    print("predicted outer ratio (nu - mu) / nu = %.4f" % ((nu - mu) / nu))

    cfg = hjb.SolverConfig(lam=mu, nu=nu)
    v, trace = hjb.continuation_solve(model, l0, spec, mu, cfg, lambda0)
    for k, (delta, inner) in enumerate(zip(trace.deltas, trace.inner)):
        ratio = trace.ratios[k - 1] if k else float("nan")
        print("outer %3d  delta %.3e  ratio %.4f  inner %d" % (k + 1, delta, ratio, inner.iterations))
    print("residual at mu: %.3e" % trace.final_residual)
    print("Done...")


if __name__ == "__main__":
    main()
