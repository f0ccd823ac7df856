"""
Run configuration - one JSON document (schema version 1) per experiment.

RunConfig mirrors every input of a replica run: the stable motion, the system
dynamics, the initial law and placement, the test functions, observation times,
replica count, master seed and output directory. ConfigValidator checks a raw
document and names each problem by its dotted field path.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from particles import (
    MAX_PARTICLE_STEPS,
    LinearCombination,
    PhiLike,
    PlacementRule,
    SystemConfig,
    TestFunction,
    ThetaLaw,
)
from stable import DEFAULT_GRID, StableParams, UniformGrid
from utils import MAX_SEED

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
# fields that do not change the law of replica i
FINGERPRINT_EXCLUDE = {"output_dir", "replicas"}


class ConfigError(ValueError):
    """Run configuration could not be loaded or failed validation."""

    def __init__(self, message: str, errors: Optional[List[str]] = None):
        super().__init__(message)
        self.errors = errors or []


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class StableSpec(_Section):
    alpha: float = Field(gt=0.0, le=2.0)


class SystemSpec(_Section):
    branching: bool = False
    V: float = Field(0.0, ge=0.0)
    horizon_T: float = Field(200.0, gt=0.0)
    tau: float = Field(1.0, gt=0.0)
    step_delta: Optional[float] = Field(None, gt=0.0)
    max_particle_steps: int = Field(MAX_PARTICLE_STEPS, gt=0)


class ThetaSpec(_Section):
    kind: Literal["deterministic", "poisson", "categorical"]
    k: Optional[int] = Field(None, ge=0)
    mean: Optional[float] = Field(None, gt=0.0)
    probs: Optional[List[float]] = None


class PlacementSpec(_Section):
    kind: Literal["left_endpoint", "fixed_offsets", "iid_uniform"] = "left_endpoint"
    offsets: Optional[Dict[str, List[float]]] = None


class PhiSpec(_Section):
    kind: Literal["gaussian_bump", "unit_gaussian", "inverse_power", "linear_combination"]
    center: float = 0.0
    width: float = Field(1.0, gt=0.0)
    amplitude: float = 1.0
    m: float = Field(2.0, ge=2.0)
    terms: Optional[List[Tuple[float, "PhiSpec"]]] = None


PhiSpec.model_rebuild()


class GridSpec(_Section):
    half_width: float = Field(DEFAULT_GRID.half_width, gt=0.0)
    n_nodes: int = Field(DEFAULT_GRID.n_nodes, ge=4)


class OracleSpec(_Section):
    x: float = 0.0
    pairs: List[Tuple[float, float]] = Field(default_factory=lambda: [(1.0, 1.0), (1.0, 2.0)])
    replicas: int = Field(100_000, ge=2)


class RunConfig(_Section):
    schema_version: Literal[1] = SCHEMA_VERSION
    stable: StableSpec
    system: SystemSpec = Field(default_factory=SystemSpec)
    theta: ThetaSpec
    placement: PlacementSpec = Field(default_factory=PlacementSpec)
    test_functions: List[PhiSpec] = Field(min_length=1)
    obs_times: List[float] = Field(min_length=1)
    window: Optional[Tuple[int, int]] = None
    grid: GridSpec = Field(default_factory=GridSpec)
    oracle: Optional[OracleSpec] = None
    replicas: int = Field(1000, ge=1)
    master_seed: int = Field(0, ge=0, le=MAX_SEED)
    output_dir: str = "runs/default"

    def fingerprint(self) -> str:
        """SHA-256 of the canonical JSON of every field that determines the replicas."""
        payload = self.model_dump(mode="json", exclude=FINGERPRINT_EXCLUDE)
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    # -- domain objects ---------------------------------------------------

    def stable_params(self) -> StableParams:
        return StableParams(self.stable.alpha)

    def system_config(self) -> SystemConfig:
        s = self.system
        return SystemConfig(self.stable_params(), s.branching, s.V if s.branching else 0.0,
                            s.horizon_T, s.tau, s.step_delta, s.max_particle_steps)

    def theta_law(self) -> ThetaLaw:
        t = self.theta
        if t.kind == "deterministic":
            return ThetaLaw.deterministic(t.k)
        if t.kind == "poisson":
            return ThetaLaw.poisson(t.mean)
        return ThetaLaw.categorical(t.probs)

    def placement_rule(self) -> PlacementRule:
        if self.placement.kind == "fixed_offsets":
            offsets = {int(k): v for k, v in (self.placement.offsets or {}).items()}
            return PlacementRule.fixed_offsets(offsets)
        return PlacementRule(self.placement.kind)

    def phis(self) -> Tuple[PhiLike, ...]:
        return tuple(build_phi(spec) for spec in self.test_functions)

    def theory_grid(self) -> UniformGrid:
        return UniformGrid(self.grid.half_width, self.grid.n_nodes)

    def with_overrides(self, replicas: Optional[int] = None, master_seed: Optional[int] = None,
                       output_dir: Optional[str] = None) -> "RunConfig":
        update: Dict[str, Any] = {}
        if replicas is not None:
            update["replicas"] = replicas
        if master_seed is not None:
            update["master_seed"] = master_seed
        if output_dir is not None:
            update["output_dir"] = str(output_dir)
        return RunConfig.model_validate({**self.model_dump(), **update})


def build_phi(spec: PhiSpec) -> PhiLike:
    if spec.kind == "unit_gaussian":
        return TestFunction.unit_gaussian(spec.width, spec.center)
    if spec.kind == "gaussian_bump":
        return TestFunction.gaussian_bump(spec.center, spec.width, spec.amplitude)
    if spec.kind == "inverse_power":
        return TestFunction.inverse_power(spec.m)
    if not spec.terms:
        raise ValueError("linear_combination needs at least one term")
    terms = []
    for coefficient, term in spec.terms:
        phi = build_phi(term)
        if not isinstance(phi, TestFunction):
            raise ValueError("linear_combination terms must be single test functions")
        terms.append((float(coefficient), phi))
    return LinearCombination(tuple(terms))


def _dotted(loc: Tuple[Union[str, int], ...]) -> str:
    return ".".join(str(part) for part in loc)


class ConfigValidator:
    """Validates a raw run-configuration document before anything is simulated."""

    def __init__(self, data: Dict[str, Any]):
        """Initialize validator for a parsed JSON document."""
        if not isinstance(data, dict):
            raise ConfigError(f"Configuration must be a JSON object, got {type(data).__name__}")
        self.data = data
        self.config: Optional[RunConfig] = None
        self.validation_errors: List[str] = []

    def validate_schema(self) -> bool:
        """Types, ranges and required fields."""
        try:
            self.config = RunConfig.model_validate(self.data)
        except ValidationError as e:
            for error in e.errors():
                path = _dotted(error["loc"]) or "<root>"
                self.validation_errors.append(f"{path}: {error['msg']}")
            return False
        return True

    def validate_theta(self) -> bool:
        theta = self.config.theta
        required = {"deterministic": "k", "poisson": "mean", "categorical": "probs"}[theta.kind]
        if getattr(theta, required) is None:
            self.validation_errors.append(f"theta.{required}: required for kind '{theta.kind}'")
            return False
        try:
            self.config.theta_law()
        except ValueError as e:
            self.validation_errors.append(f"theta: {e}")
            return False
        return True

    def validate_placement(self) -> bool:
        placement = self.config.placement
        if placement.kind == "fixed_offsets" and not placement.offsets:
            self.validation_errors.append("placement.offsets: required for kind 'fixed_offsets'")
            return False
        if placement.offsets and placement.kind != "fixed_offsets":
            self.validation_errors.append(
                f"placement.offsets: only allowed for kind 'fixed_offsets', not '{placement.kind}'")
            return False
        for key in placement.offsets or {}:
            if not key.isdigit():
                self.validation_errors.append(
                    f"placement.offsets.{key}: keys must be non-negative atom counts")
                return False
        try:
            rule = self.config.placement_rule()
            if self._theta_builds():
                rule.expected_offsets(self.config.theta_law())
        except ValueError as e:
            self.validation_errors.append(f"placement: {e}")
            return False
        return True

    def _theta_builds(self) -> bool:
        try:
            self.config.theta_law()
        except (ValueError, TypeError):
            return False
        return True

    def validate_test_functions(self) -> bool:
        ok = True
        for i, spec in enumerate(self.config.test_functions):
            try:
                build_phi(spec)
            except ValueError as e:
                self.validation_errors.append(f"test_functions.{i}: {e}")
                ok = False
        return ok

    def validate_system(self) -> bool:
        system = self.config.system
        if system.branching and system.V <= 0:
            self.validation_errors.append("system.V: branching systems need a positive rate")
            return False
        try:
            self.config.system_config()
        except ValueError as e:
            self.validation_errors.append(f"system: {e}")
            return False
        return True

    def validate_obs_times(self) -> bool:
        times = self.config.obs_times
        tau = self.config.system.tau
        ok = True
        if any(t < 0 or t > tau for t in times):
            self.validation_errors.append(f"obs_times: must lie in [0, tau={tau}]: {times}")
            ok = False
        if any(b <= a for a, b in zip(times, times[1:])):
            self.validation_errors.append(f"obs_times: must be strictly increasing: {times}")
            ok = False
        return ok

    def validate_window(self) -> bool:
        window = self.config.window
        if window is not None and window[0] >= window[1]:
            self.validation_errors.append(f"window: lower end must be below upper end: {window}")
            return False
        return True

    def validate_grid(self) -> bool:
        try:
            self.config.theory_grid()
        except ValueError as e:
            self.validation_errors.append(f"grid: {e}")
            return False
        return True

    def validate_all(self) -> bool:
        """Run all validation checks."""
        self.validation_errors.clear()
        if not self.validate_schema():
            return False
        validations = [
            self.validate_theta(),
            self.validate_placement(),
            self.validate_test_functions(),
            self.validate_system(),
            self.validate_obs_times(),
            self.validate_window(),
            self.validate_grid(),
        ]
        return all(validations)

    def print_validation_errors(self) -> None:
        """Log all validation errors in a user-friendly format."""
        if not self.validation_errors:
            return
        logger.error("❌ Configuration validation failed:")
        for error in self.validation_errors:
            logger.error(f"   {error}")


def validate_config(data: Dict[str, Any]) -> RunConfig:
    """Validated RunConfig, or ConfigError listing every problem."""
    validator = ConfigValidator(data)
    if not validator.validate_all():
        validator.print_validation_errors()
        raise ConfigError("; ".join(validator.validation_errors), validator.validation_errors)
    return validator.config


def load_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Configuration file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"Configuration {path} is not valid JSON: {e}") from e
    config = validate_config(data)
    logger.debug(f"Loaded configuration {path} (fingerprint {config.fingerprint()[:12]})")
    return config


def save_config(config: RunConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(config.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path
