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

import argparse

import numpy as np

import numba_hjb as hjb


def driver(model, spec, l0, lam, n_paths):
    cfg = hjb.SolverConfig(lam=lam, tol=1e-6, grid_nodes=(401,))
    lambda0 = hjb.estimate_lambda0(model, spec, cfg)
    print("lambda_0 estimate:", lambda0)

    v, trace = hjb.solve(model, l0, spec, lam, cfg, lambda0)
    print("%s: %d iterations, residual %.3e" % (trace.kind, trace.iterations, trace.final_residual))

    policy = hjb.Policy.feedback(v, spec)
    for x0 in (-1.0, 0.0, 1.0):
        est = hjb.evaluate_policy_cost(
            model, spec, l0, [x0], policy, lam, n_paths=n_paths, seed=7
        )
        lo, hi = est.interval()
        print("x0 = %+.1f  v = %.5f  cost = %.5f  [%.5f, %.5f]" % (x0, v(x0), est.mean, lo, hi))


def main():
    parser = argparse.ArgumentParser(description="Scalar heat benchmark")
    parser.add_argument("--lam", type=float, default=1.0, help="discount factor")
    parser.add_argument("--n-paths", type=int, default=2000, help="Monte-Carlo paths")
    args = parser.parse_args()

    model = hjb.build_heat_model(1)
    spec = hjb.HamiltonianSpec.box([-1.0], [1.0])
    l0 = hjb.CostSpec("cosine")
    driver(model, spec, l0, args.lam, args.n_paths)
    print("Done...")


if __name__ == "__main__":
    main()
