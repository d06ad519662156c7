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

import numba_hjb as hjb


def report(name, model, lifted=None):
    fit, _ = hjb.smoothing_fit(model, lifted)
    gap = "" if fit.lifted_gap is None else "  lifted gap = %.2e" % fit.lifted_gap
    print(
        "%-24s gamma = %.4f  kappa0 = %.4f  residual = %.3e  (%s)%s"
        % (name, fit.gamma, fit.kappa0, fit.residual, fit.status, gap)
    )


def main():
    parser = argparse.ArgumentParser(description="Fitted blow-up exponents of Lambda(t)")
    parser.add_argument("--heat-modes", type=int, default=200, help="heat truncation")
    parser.add_argument("--beta", type=float, default=0.25, help="heat noise exponent")
    args = parser.parse_args()

    report("wave, one pair", hjb.build_wave_model(1))
    heat = hjb.build_heat_model(args.heat_modes, beta=args.beta)
    report("heat, projected", heat)
    report("heat, lifted", heat, hjb.build_lifted(heat))
    print("Done...")


if __name__ == "__main__":
    main()
