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

"""Command line interface.

    numba-hjb solve     --config run.cfg [--lambda L] [--out-prefix P]
    numba-hjb continue  --config run.cfg
    numba-hjb verify    --config run.cfg [--checks a,b]
    numba-hjb simulate  --config run.cfg
    numba-hjb smoothing --config run.cfg

Every subcommand also takes ``--tol``, ``--max-iter`` and ``--seed``. Outputs
are written as ``<prefix>_*.csv`` and ``<prefix>_*.json``; the prefix
defaults to the config file name without extension in the working directory.
Identical config and seed give byte-identical outputs.
"""

import argparse
import os
import sys

import numba
import numpy as np
import scipy

from numba_hjb.errors import (
    DegenerateLawError,
    FitRejectedError,
    InvalidConfigError,
    NonConvergenceError,
    QuadratureBudgetError,
    SmoothingHypothesisError,
)
from numba_hjb.hjb_solver import continuation_solve, estimate_lambda0, solve
from numba_hjb.run_config import load_run_config
from numba_hjb.simulation import Policy, evaluate_policy_cost
from numba_hjb.utils.constants import exit_code
from numba_hjb.utils.misc import canonical_json, write_table
from numba_hjb.verification import CHECK_NAMES, SCAN_COLUMNS, run_all

__all__ = ["run_cli", "main", "write_value_csv", "write_json"]

COMMANDS = ("solve", "continue", "verify", "simulate", "smoothing")


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with status 2, which is reserved for non-convergence
    def error(self, message):
        raise InvalidConfigError("%s: %s" % (self.prog, message))


def _build_parser():
    parser = _ArgumentParser(
        prog="numba-hjb",
        description="Mild-solution solver and checks for the stationary HJB "
        "equation of boundary-controlled Ornstein-Uhlenbeck dynamics.",
    )
    sub = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--lambda", dest="lam", type=float, help="discount factor")
        p.add_argument("--out-prefix", help="prefix of the output files")
        p.add_argument("--tol", type=float, help="solver tolerance")
        p.add_argument("--max-iter", type=int, help="Picard iteration limit")
        p.add_argument("--seed", type=int, help="seed of every random stream")
        if name == "verify":
            p.add_argument(
                "--checks",
                help="comma separated subset of: %s" % ", ".join(CHECK_NAMES),
            )
    return parser


def versions():
    from numba_hjb import __version__

    return {
        "numba": numba.__version__,
        "numba_hjb": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(canonical_json(payload, indent=2))
        f.write("\n")
    return path


def write_value_csv(path, v):
    """Write ``x_1..x_n, v, g_1..g_dU`` for every grid node."""
    columns = [v.nodes(), v.flat_values()[:, None]]
    header = ["x_%d" % (i + 1) for i in range(v.dim)] + ["v"]
    if v.gradient_values is not None:
        columns.append(v.flat_gradient())
        header += ["g_%d" % (k + 1) for k in range(v.control_dim)]
    np.savetxt(
        path,
        np.hstack(columns),
        fmt="%.12e",
        delimiter=",",
        header=",".join(header),
        comments="",
    )
    return path


def _summary(command, run_config, **payload):
    return dict(
        payload,
        command=command,
        config=run_config.to_dict(),
        config_digest=run_config.digest(),
        versions=versions(),
    )


def _problem(run_config):
    model = run_config.build_model()
    return (
        model,
        run_config.build_cost(model),
        run_config.build_spec(model),
        run_config.solver_config(model),
    )


def _fitted(run_config, model, spec, cfg):
    """Smoothing fit with its lifted cross-check, the solver config graded
    with the fitted exponent and the resulting ``lambda_0``.
    """
    fit, scan = run_config.smoothing.fit(model)
    cfg = cfg.with_fit(fit)
    return fit, scan, cfg, estimate_lambda0(model, spec, cfg, fit)


def _cmd_solve(run_config, prefix, force_continuation=False):
    model, l0, spec, cfg = _problem(run_config)
    fit, _, cfg, lambda0 = _fitted(run_config, model, spec, cfg)
    if force_continuation:
        v, trace = continuation_solve(model, l0, spec, cfg.lam, cfg, lambda0)
        command = "continue"
    else:
        v, trace = solve(model, l0, spec, cfg.lam, cfg, lambda0)
        command = "solve"
    artifacts = [write_value_csv(prefix + "_value.csv", v)]
    summary = _summary(
        command,
        run_config,
        fit=fit.to_dict(),
        lambda0=lambda0,
        trace=trace.to_dict(),
        value_sup_norm=v.sup_norm(),
        artifacts=[os.path.basename(a) for a in artifacts],
    )
    write_json(prefix + "_summary.json", summary)
    return exit_code.OK


def _cmd_verify(run_config, prefix, checks=None):
    reports = run_all(run_config, checks, artifact_prefix=prefix)
    payload = _summary(
        "verify",
        run_config,
        reports=[r.to_dict() for r in reports],
        passed=all(r.passed for r in reports),
    )
    write_json(prefix + "_checks.json", payload)
    for r in reports:
        if not r.passed:
            print(
                "check %s failed: defect %.6e > tolerance %.6e"
                % (r.name, r.defect, r.tolerance),
                file=sys.stderr,
            )
    return exit_code.OK if payload["passed"] else exit_code.CHECK_FAILED


def _cmd_simulate(run_config, prefix):
    model, l0, spec, cfg = _problem(run_config)
    sim = run_config.simulate
    x0 = np.zeros(model.n_proj) if sim.x0 is None else np.asarray(sim.x0)
    value_at_x0 = None
    if sim.policy == "feedback":
        _, _, cfg, lambda0 = _fitted(run_config, model, spec, cfg)
        v, _ = solve(model, l0, spec, cfg.lam, cfg, lambda0)
        policy = Policy.feedback(v, spec)
        value_at_x0 = float(v(model.project(x0) if x0.size == model.n_total else x0))
    elif sim.policy == "constant":
        if sim.u0 is None:
            raise InvalidConfigError("[simulate] constant policy needs u0")
        policy = Policy.constant(sim.u0)
        if not np.all(spec.contains(np.asarray(policy.u0))):
            raise InvalidConfigError("[simulate] u0 lies outside the control set")
    else:
        policy = Policy.zero()
    estimate = evaluate_policy_cost(model, spec, l0, x0, policy, cfg.lam, sim)
    payload = _summary(
        "simulate",
        run_config,
        estimate=estimate.to_dict(),
        interval=list(estimate.interval()),
        policy=policy.to_dict(),
        value_at_x0=value_at_x0,
        x0=x0,
    )
    write_json(prefix + "_cost.json", payload)
    return exit_code.OK


def _cmd_smoothing(run_config, prefix):
    model = run_config.build_model()
    fit, scan = run_config.smoothing.fit(model)
    csv = write_table(prefix + "_smoothing.csv", SCAN_COLUMNS, [scan[k] for k in SCAN_COLUMNS])
    payload = _summary(
        "smoothing", run_config, fit=fit.to_dict(), artifacts=[os.path.basename(csv)]
    )
    write_json(prefix + "_fit.json", payload)
    return exit_code.OK


def _dispatch(args):
    run_config = load_run_config(args.config).with_overrides(
        lam=args.lam, tol=args.tol, max_iter=args.max_iter, seed=args.seed
    )
    prefix = args.out_prefix or os.path.splitext(os.path.basename(args.config))[0]
    if args.command == "solve":
        return _cmd_solve(run_config, prefix)
    if args.command == "continue":
        return _cmd_solve(run_config, prefix, force_continuation=True)
    if args.command == "verify":
        checks = None
        if args.checks:
            checks = [c.strip() for c in args.checks.split(",") if c.strip()]
        return _cmd_verify(run_config, prefix, checks)
    if args.command == "simulate":
        return _cmd_simulate(run_config, prefix)
    return _cmd_smoothing(run_config, prefix)


def run_cli(argv=None):
    """Run one subcommand and return its exit code.

    0 on success, 1 when a verification check fails, 2 on non-convergence
    and 3 on an invalid configuration.
    """
    try:
        args = _build_parser().parse_args(argv)
        if args.command is None:
            raise InvalidConfigError("a subcommand is required: %s" % ", ".join(COMMANDS))
        return _dispatch(args)
    except (
        InvalidConfigError,
        SmoothingHypothesisError,
        DegenerateLawError,
        FitRejectedError,
    ) as e:
        print("numba-hjb: invalid configuration: %s" % e, file=sys.stderr)
        return exit_code.INVALID_CONFIG
    except (NonConvergenceError, QuadratureBudgetError) as e:
        print("numba-hjb: %s" % e, file=sys.stderr)
        return exit_code.NON_CONVERGENCE


def main():
    sys.exit(run_cli())
