"""Experiment configuration: a versioned JSON document with every numerical knob.

Unknown keys are rejected so that a config file always describes the whole
experiment.  ``ExperimentConfig.to_dict()`` round-trips through ``from_dict``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigurationError
from .solver import FluxSpec, burgers_flux, power_flux

__all__ = [
    "SCHEMA_VERSION",
    "GridSpec",
    "InitialSpec",
    "SolverSpec",
    "ProfileSpec",
    "DeltaGridSpec",
    "Tolerances",
    "CheckSpec",
    "ExperimentConfig",
    "flux_from_name",
    "load_config",
]

SCHEMA_VERSION = 1
INITIAL_KINDS = ("layer", "step", "step_plus_perturbation")


def flux_from_name(name: str) -> FluxSpec:
    if name == "burgers":
        return burgers_flux()
    if name.startswith("power"):
        try:
            return power_flux(int(name[5:]))
        except ValueError:
            pass
    raise ConfigurationError(f"unknown flux {name!r} (use 'burgers' or 'power<p>')")


def _build(cls, data):
    if isinstance(data, cls):
        return data
    if not isinstance(data, dict):
        raise ConfigurationError(f"{cls.__name__} section must be a mapping")
    known = {f.name for f in fields(cls)}
    extra = set(data) - known
    if extra:
        raise ConfigurationError(f"unknown keys in {cls.__name__}: {sorted(extra)}")
    return cls(**data)


@dataclass(frozen=True)
class GridSpec:
    L: float = 50.0
    N: int = 4096


@dataclass(frozen=True)
class InitialSpec:
    """Initial datum: the scaled layer, the inviscid step, or the step plus Gaussian bumps.

    Bumps have width ``width``, centres drawn uniformly from ``region`` on both
    sides of the shock, random signs, and are scaled so the perturbation has
    L2 norm ``amplitude``.
    """

    kind: str = "step_plus_perturbation"
    amplitude: float = 1.0
    seed: int = 0
    n_bumps: int = 4
    width: float = 1.0
    region: tuple = (1.0, 4.0)

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ConfigurationError(f"unknown initial datum kind {self.kind!r}")
        object.__setattr__(self, "region", tuple(float(r) for r in self.region))
        if self.amplitude < 0 or self.width <= 0 or self.n_bumps < 1:
            raise ConfigurationError("perturbation needs amplitude >= 0, width > 0, n_bumps >= 1")
        if not 0 <= self.region[0] < self.region[1]:
            raise ConfigurationError("perturbation region must satisfy 0 <= lo < hi")


@dataclass(frozen=True)
class SolverSpec:
    cfl: float = 0.25
    reconstruction: str = "minmod_second_order"
    scheme: str = "ssp_rk2"
    cg_rtol: float = 1e-12
    max_steps: int = 10_000_000


@dataclass(frozen=True)
class ProfileSpec:
    xi_max: float = 512.0
    n_cells: int = 4096
    tol: float = 1e-8
    cfl: float = 0.4
    max_iter: int = 400_000


@dataclass(frozen=True)
class DeltaGridSpec:
    """Log grid for the delta infimum in psi; the upper end is also capped by the profile length."""

    lo: float = 4.0
    hi: float = 1e6
    n: int = 200


@dataclass(frozen=True)
class Tolerances:
    max_principle: float = 1e-8
    slope_monitor: float = 1e-6
    profile_monotone: float = 1e-6
    profile_residual_factor: float = 10.0
    genpa: float = 1e-10
    square_term: float = 1e-10
    ledger_rel: float = 0.05
    ledger_abs: float = 1e-10
    theorem_C_max: float = 1e3
    mass_per_step: float = 1e-10
    lambda_du_floor: float = -1e-8
    lambda_dv_floor: float = 1e-8


@dataclass(frozen=True)
class CheckSpec:
    """Sizes for the self-check run; epsilon is chosen so the layer width eps^beta equals ``layer_width``."""

    layer_width: float = 0.05
    L: float = 10.0
    N: int = 2048
    T: float = 0.5
    delta: float = 16.0
    n_random: int = 200
    genpa_N: int = 128
    lambda_M: float = 1.5
    lambda_n: int = 64


@dataclass(frozen=True)
class ExperimentConfig:
    alpha: float = 1.5
    u_minus: float = 1.0
    u_plus: float = -1.0
    flux: str = "burgers"
    epsilons: tuple = (0.2, 0.1, 0.05, 0.025)
    delta: float = 16.0
    cutoff: str = "piecewise_quadratic"
    T: float = 1.0
    grid: GridSpec = field(default_factory=GridSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    solver: SolverSpec = field(default_factory=SolverSpec)
    profile: ProfileSpec = field(default_factory=ProfileSpec)
    delta_grid: DeltaGridSpec = field(default_factory=DeltaGridSpec)
    tolerances: Tolerances = field(default_factory=Tolerances)
    check: CheckSpec = field(default_factory=CheckSpec)
    output: str = "runs"
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        for name, cls in (("grid", GridSpec), ("initial", InitialSpec), ("solver", SolverSpec),
                          ("profile", ProfileSpec), ("delta_grid", DeltaGridSpec),
                          ("tolerances", Tolerances), ("check", CheckSpec)):
            object.__setattr__(self, name, _build(cls, getattr(self, name)))
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigurationError(f"unsupported schema version {self.schema_version}")
        if not (1 < self.alpha < 2):
            raise ConfigurationError("alpha must lie in (1, 2)")
        if not self.u_minus > self.u_plus:
            raise ConfigurationError("shock requires u_minus > u_plus")
        if any(e <= 0 for e in self.epsilons):
            raise ConfigurationError("epsilons must be positive")
        if self.T < 0:
            raise ConfigurationError("horizon T must be non-negative")
        flux_from_name(self.flux)

    @property
    def beta(self) -> float:
        return 1.0 / (self.alpha - 1.0)

    @property
    def flux_spec(self) -> FluxSpec:
        return flux_from_name(self.flux)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["epsilons"] = list(self.epsilons)
        d["initial"]["region"] = list(self.initial.region)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return _build(cls, dict(data))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)

    def run_id(self, epsilon: float | None = None) -> str:
        """Content hash of the config (and the epsilon of a single run)."""
        payload = self.to_json() + ("" if epsilon is None else f"|eps={float(epsilon)!r}")
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def profile_key(self) -> str:
        d = {"alpha": self.alpha, "u_minus": self.u_minus, "u_plus": self.u_plus, "flux": self.flux,
             **asdict(self.profile)}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return ExperimentConfig.from_dict(data)
