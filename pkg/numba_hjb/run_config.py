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

"""Run configuration files.

A run is described by an INI file with the sections ``[model]``, ``[cost]``,
``[hamiltonian]``, ``[solver]``, ``[smoothing]``, ``[simulate]`` and
``[verify]``; only ``[model]`` is required. Every section maps onto a frozen
dataclass and unknown sections, unknown keys and malformed values raise
:class:`InvalidConfigError`.
"""

import configparser
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional, Tuple

import numpy as np

from numba_hjb.errors import InvalidConfigError, SmoothingHypothesisError
from numba_hjb.hamiltonian import HamiltonianSpec
from numba_hjb.hjb_solver import SolverConfig
from numba_hjb.lifting import DEFAULT_FIT_WINDOW, build_lifted, smoothing_fit
from numba_hjb.spectral_model import CostSpec, build_heat_model, build_wave_model
from numba_hjb.utils.misc import digest
from numba_hjb.utils.quadrature import QuadratureRule

__all__ = [
    "ModelConfig",
    "CostConfig",
    "HamiltonianConfig",
    "SolverSection",
    "SmoothingConfig",
    "SimulateConfig",
    "VerifyConfig",
    "RunConfig",
    "load_run_config",
    "parse_run_config",
]


def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _points(text):
    return tuple(_floats(row) for row in text.split(";") if row.strip())


def _optional(ctor):
    def parse(text):
        if text.strip().lower() in ("", "none"):
            return None
        return ctor(text)

    return parse


def _ints(text):
    return tuple(int(v) for v in _floats(text))


@dataclass(frozen=True)
class ModelConfig:
    kind: str = "heat"
    n_modes: int = 1
    n_proj: int = 1
    beta: float = 0.0
    length: float = float(np.pi)
    c: float = 1.0
    sigma: Tuple[float, ...] = (1.0,)

    _parsers = {
        "kind": str,
        "n_modes": int,
        "n_proj": int,
        "beta": float,
        "length": float,
        "c": float,
        "sigma": _floats,
    }

    def build(self):
        try:
            if self.kind == "heat":
                return build_heat_model(self.n_modes, self.length, self.beta, self.n_proj)
            sigma = self.sigma[0] if len(self.sigma) == 1 else np.asarray(self.sigma)
            return build_wave_model(self.n_modes, self.c, sigma, self.n_proj, self.length)
        except SmoothingHypothesisError:
            raise
        except ValueError as e:
            raise InvalidConfigError("[model] %s" % e)

    def validate(self):
        if self.kind not in ("heat", "wave"):
            raise InvalidConfigError("[model] kind must be heat or wave, got %r" % self.kind)
        if self.n_modes < 1 or not 1 <= self.n_proj <= self.n_modes:
            raise InvalidConfigError(
                "[model] needs 1 <= n_proj <= n_modes, got %d and %d"
                % (self.n_proj, self.n_modes)
            )


@dataclass(frozen=True)
class CostConfig:
    kind: str = "cosine"
    amplitude: float = 1.0
    weights: Optional[Tuple[float, ...]] = None
    phase: float = 0.0
    offset: float = 0.0

    _parsers = {
        "kind": str,
        "amplitude": float,
        "weights": _floats,
        "phase": float,
        "offset": float,
    }

    def build(self, n_proj):
        weights = self.weights if self.weights is not None else (1.0,) * n_proj
        if self.kind != "constant" and len(weights) != n_proj:
            raise InvalidConfigError(
                "[cost] weights need %d entries, got %d" % (n_proj, len(weights))
            )
        try:
            return CostSpec(self.kind, self.amplitude, weights, self.phase, self.offset)
        except ValueError as e:
            raise InvalidConfigError("[cost] %s" % e)


@dataclass(frozen=True)
class HamiltonianConfig:
    control_kind: str = "ball"
    radius: float = 1.0
    lower: Optional[Tuple[float, ...]] = None
    upper: Optional[Tuple[float, ...]] = None
    points: Optional[Tuple[Tuple[float, ...], ...]] = None
    l1_kind: str = "quadratic"
    l1_coeff: float = 0.5
    l1_table: Optional[Tuple[float, ...]] = None
    nisio_M: Optional[float] = None
    search_resolution: int = 201

    _parsers = {
        "control_kind": str,
        "radius": float,
        "lower": _floats,
        "upper": _floats,
        "points": _points,
        "l1_kind": str,
        "l1_coeff": float,
        "l1_table": _floats,
        "nisio_M": _optional(float),
        "search_resolution": int,
    }

    def build(self, control_dim):
        kwargs = dict(asdict(self), control_dim=control_dim)
        try:
            spec = HamiltonianSpec(**kwargs)
        except (TypeError, ValueError) as e:
            raise InvalidConfigError("[hamiltonian] %s" % e)
        if spec.control_dim != control_dim:
            raise InvalidConfigError(
                "[hamiltonian] control set has dimension %d, the model has %d controls"
                % (spec.control_dim, control_dim)
            )
        return spec


@dataclass(frozen=True)
class SolverSection:
    lam: float = 1.0
    tol: float = 1e-5
    max_iter: int = 200
    damping: float = 1.0
    nu: Optional[float] = None
    outer_tol: float = 1e-5
    outer_max_iter: int = 500
    grid_nodes: Optional[Tuple[int, ...]] = None
    k_sigma: float = 6.0
    gamma: Optional[float] = None
    quad_nodes: int = 20
    n_time_inner: int = 24
    n_time_panel: int = 8

    _parsers = {
        "lambda": float,
        "tol": float,
        "max_iter": int,
        "damping": float,
        "nu": _optional(float),
        "outer_tol": float,
        "outer_max_iter": int,
        "grid_nodes": _ints,
        "k_sigma": float,
        "gamma": _optional(float),
        "quad_nodes": int,
        "n_time_inner": int,
        "n_time_panel": int,
    }
    _renames = {"lambda": "lam"}

    def build(self, n_proj, seed=0):
        quad = QuadratureRule.default_for(n_proj, seed)
        if quad.kind == "gauss_hermite_tensor":
            quad = replace(quad, nodes=self.quad_nodes)
        kwargs = {k: v for k, v in asdict(self).items() if k != "quad_nodes"}
        return SolverConfig(quad=quad, **kwargs)


@dataclass(frozen=True)
class SmoothingConfig:
    """Lifting used to cross-check ``||Lambda(t)||`` and the fit window."""

    rho: float = 1.0
    m_nodes: int = 200
    T_max: Optional[float] = None
    power: float = 2.0
    window: Tuple[float, ...] = DEFAULT_FIT_WINDOW
    n_times: int = 12

    _parsers = {
        "rho": float,
        "m_nodes": int,
        "T_max": _optional(float),
        "power": float,
        "window": _floats,
        "n_times": int,
    }

    def validate(self):
        if len(self.window) != 2 or not 0.0 < self.window[0] < self.window[1]:
            raise InvalidConfigError(
                "[smoothing] window needs two increasing positive times, got %s"
                % (self.window,)
            )
        if self.n_times < 8:
            raise InvalidConfigError("[smoothing] n_times must be at least 8")
        if self.m_nodes < 4:
            raise InvalidConfigError("[smoothing] m_nodes must be at least 4")
        if not self.rho > 0:
            raise InvalidConfigError("[smoothing] rho must be positive, got %s" % self.rho)

    def build_lifted(self, model):
        try:
            return build_lifted(model, self.rho, self.m_nodes, self.T_max, self.power)
        except ValueError as e:
            raise InvalidConfigError("[smoothing] %s" % e)

    def fit(self, model):
        """Fit on the finite norms with the lifted cross-check column."""
        return smoothing_fit(model, self.build_lifted(model), self.window, self.n_times)


@dataclass(frozen=True)
class SimulateConfig:
    x0: Optional[Tuple[float, ...]] = None
    dt: float = 0.01
    horizon: Optional[float] = None
    n_paths: int = 10000
    seed: int = 0
    policy: str = "feedback"
    u0: Optional[Tuple[float, ...]] = None
    target_ci: float = 0.01

    _parsers = {
        "x0": _floats,
        "dt": float,
        "horizon": _optional(float),
        "n_paths": int,
        "seed": int,
        "policy": str,
        "u0": _floats,
        "target_ci": float,
    }

    def validate(self):
        if self.policy not in ("zero", "constant", "feedback"):
            raise InvalidConfigError("[simulate] unknown policy %r" % self.policy)
        if not self.dt > 0:
            raise InvalidConfigError("[simulate] dt must be positive, got %s" % self.dt)
        if self.horizon is not None and self.horizon < self.dt:
            raise InvalidConfigError("[simulate] horizon must be at least dt")
        if self.n_paths < 2:
            raise InvalidConfigError("[simulate] n_paths must be at least 2")


@dataclass(frozen=True)
class VerifyConfig:
    """Tolerances of the verification checks. ``None`` entries are derived
    from the solver tolerances when the checks run.
    """

    linear_tol: float = 1e-5
    nonlinear_tol: Optional[float] = None
    lipschitz_slack: Optional[float] = None
    nisio_contraction_tol: float = 1e-8
    detect_tol: Optional[float] = None
    n_pairs: int = 20
    seed: int = 0
    mu: Optional[float] = None
    nu: Optional[float] = None
    nisio_nodes: Optional[int] = None

    _parsers = {
        "linear_tol": float,
        "nonlinear_tol": _optional(float),
        "lipschitz_slack": _optional(float),
        "nisio_contraction_tol": float,
        "detect_tol": _optional(float),
        "n_pairs": int,
        "seed": int,
        "mu": _optional(float),
        "nu": _optional(float),
        "nisio_nodes": _optional(int),
    }


_SECTIONS = {
    "model": ModelConfig,
    "cost": CostConfig,
    "hamiltonian": HamiltonianConfig,
    "solver": SolverSection,
    "smoothing": SmoothingConfig,
    "simulate": SimulateConfig,
    "verify": VerifyConfig,
}


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    cost: CostConfig = field(default_factory=CostConfig)
    hamiltonian: HamiltonianConfig = field(default_factory=HamiltonianConfig)
    solver: SolverSection = field(default_factory=SolverSection)
    smoothing: SmoothingConfig = field(default_factory=SmoothingConfig)
    simulate: SimulateConfig = field(default_factory=SimulateConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)

    def __post_init__(self):
        self.model.validate()
        self.smoothing.validate()
        self.simulate.validate()

    def build_model(self):
        return self.model.build()

    def build_cost(self, model=None):
        model = model or self.build_model()
        return self.cost.build(model.n_proj)

    def build_spec(self, model=None):
        model = model or self.build_model()
        return self.hamiltonian.build(model.control_dim)

    def solver_config(self, model=None):
        model = model or self.build_model()
        try:
            return self.solver.build(model.n_proj, self.simulate.seed)
        except ValueError as e:
            raise InvalidConfigError("[solver] %s" % e)

    def with_overrides(self, lam=None, tol=None, max_iter=None, seed=None):
        """Apply the command-line flags ``--lambda``, ``--tol``,
        ``--max-iter`` and ``--seed``.
        """
        solver, simulate, verify = self.solver, self.simulate, self.verify
        if lam is not None:
            solver = replace(solver, lam=float(lam))
        if tol is not None:
            solver = replace(solver, tol=float(tol), outer_tol=float(tol))
        if max_iter is not None:
            solver = replace(solver, max_iter=int(max_iter))
        if seed is not None:
            simulate = replace(simulate, seed=int(seed))
            verify = replace(verify, seed=int(seed))
        return replace(self, solver=solver, simulate=simulate, verify=verify)

    def to_dict(self):
        return {name: asdict(getattr(self, name)) for name in _SECTIONS}

    def digest(self):
        return digest(self.to_dict())


def _section(cls, name, items):
    renames = getattr(cls, "_renames", {})
    parsers = cls._parsers
    known = {f.name for f in fields(cls)}
    values = {}
    for key, text in items:
        if key not in parsers:
            raise InvalidConfigError("unknown key %r in section [%s]" % (key, name))
        try:
            values[renames.get(key, key)] = parsers[key](text)
        except ValueError:
            raise InvalidConfigError(
                "cannot parse %s = %r in section [%s]" % (key, text, name)
            )
    assert set(values) <= known
    return cls(**values)


def parse_run_config(text):
    """Parse the INI ``text`` of a run configuration."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise InvalidConfigError("malformed config: %s" % e)
    unknown = set(parser.sections()) - set(_SECTIONS)
    if unknown:
        raise InvalidConfigError("unknown config section(s) %s" % sorted(unknown))
    if not parser.has_section("model"):
        raise InvalidConfigError("config needs a [model] section")
    if not parser.has_option("model", "kind"):
        raise InvalidConfigError("[model] needs a kind")
    sections = {}
    for name, cls in _SECTIONS.items():
        items = parser.items(name) if parser.has_section(name) else []
        sections[name] = _section(cls, name, items)
    return RunConfig(**sections)


def load_run_config(path):
    """Read a run configuration file.

    Raises:
        InvalidConfigError: the file is missing or invalid.
    """
    if not os.path.isfile(path):
        raise InvalidConfigError("config file %s not found" % path)
    with open(path, encoding="utf-8") as f:
        return parse_run_config(f.read())
