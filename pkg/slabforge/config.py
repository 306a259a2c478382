"""
Configuration: environment settings, logging and run configuration files.

Run configuration files are flat ``key = value`` lines grouped under
``[section]`` headers, with ``#`` comments. Parsing is strict: unknown
sections or keys and ill-typed values are rejected with their line number.
"""

import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from dotenv import load_dotenv

from .errors import ConfigError
from .forces import FluidParams
from .motion import Box
from .providers import PROVIDER_OPTIONS
from .rigid_body import DofParams

BASE_DIR = Path(__file__).resolve().parent.parent

LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

logger = logging.getLogger(__name__)


class Settings:
    """Environment settings, read after loading an optional ``.env`` file."""

    def __init__(self, env_file: Optional[Path] = None):
        load_dotenv(env_file)
        self.log_level = os.getenv("SLABFORGE_LOG", "warn").strip().lower()
        self.output_dir = Path(os.getenv("SLABFORGE_OUTPUT_DIR", str(BASE_DIR / "results")))
        cache = os.getenv("SLABFORGE_BLOCK_CACHE")
        self.block_cache = Path(cache) if cache else None


def configure_logging(level: Optional[str] = None) -> int:
    """
    Install one stream handler on the ``slabforge`` logger.

    Args:
        level: One of error, warn, info, debug; ``SLABFORGE_LOG`` when omitted.

    Returns:
        The numeric level in effect.
    """
    name = (level or os.getenv("SLABFORGE_LOG", "warn")).strip().lower()
    unknown = name not in LOG_LEVELS
    numeric = LOG_LEVELS.get(name, logging.WARNING)
    root = logging.getLogger("slabforge")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(numeric)
    if unknown:
        root.warning("unknown log level %r, using warn", name)
    return numeric


@dataclass
class TimeConfig:
    t_start: float = 0.0
    t_end: float = 1.0
    dt: float = 0.1

    def grid(self) -> np.ndarray:
        if not self.dt > 0.0:
            raise ConfigError(f"time step must be positive, got {self.dt}")
        if not self.t_end > self.t_start:
            raise ConfigError(f"t_end={self.t_end} must exceed t_start={self.t_start}")
        n = int(round((self.t_end - self.t_start) / self.dt))
        return self.t_start + self.dt * np.arange(max(n, 1) + 1)


@dataclass
class RigidBodyConfig:
    mass: float = 1.0
    damping_y: float = 0.0
    stiffness_y: float = 0.0
    inertia_theta: float = 1.0
    damping_theta: float = 0.0
    stiffness_theta: float = 0.0
    d0: float = 0.0
    ddot0: float = 0.0
    theta0: float = 0.0
    thetadot0: float = 0.0
    tolerance: float = 1e-5
    max_outer: int = 50

    def translation(self) -> DofParams:
        return DofParams(self.mass, self.damping_y, self.stiffness_y)

    def rotation(self) -> DofParams:
        return DofParams(self.inertia_theta, self.damping_theta, self.stiffness_theta)


@dataclass
class FluidConfig:
    density: float = 1.0
    viscosity: float = 1e-3

    def params(self) -> FluidParams:
        return FluidParams(self.density, self.viscosity)


@dataclass
class MeshConfig:
    kind: str = "annulus"
    center_x: float = 0.0
    center_y: float = 0.0
    r_body: float = 0.5
    r_rotating: float = 1.0
    r_mid: Optional[float] = None
    r_outer: float = 1.5
    r_far: float = 3.0
    n_quads: int = 32
    n_rotating_layers: int = 2
    n_static_layers: int = 2
    start_angle: float = 0.0
    x_range: Tuple[float, ...] = (-4.0, 4.0)
    y_range: Tuple[float, ...] = (-4.0, 4.0)
    nx: int = 16
    ny: int = 16
    body_box: Tuple[float, ...] = (-1.0, 1.0, -0.5, 0.5)


@dataclass
class MotionConfig:
    rotate: bool = True
    translate: bool = False
    inner_box: Optional[Tuple[float, ...]] = None
    outer_box: Optional[Tuple[float, ...]] = None

    def boxes(self) -> Tuple[Optional[Box], Optional[Box]]:
        if self.inner_box is None or self.outer_box is None:
            return None, None
        return Box(*self.inner_box), Box(*self.outer_box)


@dataclass
class ProviderConfig:
    name: str = "zero"
    options: Dict[str, Any] = field(default_factory=dict)


@dataclass
class OutputConfig:
    directory: Optional[str] = None
    vtk: bool = False
    vtk_every: int = 1
    plot: bool = False


@dataclass
class CouplingConfig:
    time: TimeConfig = field(default_factory=TimeConfig)
    rigid_body: RigidBodyConfig = field(default_factory=RigidBodyConfig)
    fluid: FluidConfig = field(default_factory=FluidConfig)
    mesh: MeshConfig = field(default_factory=MeshConfig)
    motion: MotionConfig = field(default_factory=MotionConfig)
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _to_bool(raw: str) -> bool:
    value = raw.strip().lower()
    if value in ("true", "yes", "on", "1"):
        return True
    if value in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _to_floats(raw: str) -> Tuple[float, ...]:
    return tuple(float(v) for v in raw.split(","))


def _to_box(raw: str) -> Tuple[float, ...]:
    values = _to_floats(raw)
    if len(values) != 4:
        raise ValueError(f"a box needs xmin, xmax, ymin, ymax, got {len(values)} values")
    return values


def _to_optional_float(raw: str) -> Optional[float]:
    return None if raw.strip().lower() in ("none", "auto") else float(raw)


def _to_kind(choices: Tuple[str, ...]) -> Callable[[str], str]:
    def convert(raw: str) -> str:
        if raw not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}, got {raw!r}")
        return raw

    return convert


_TIME_FUNCTIONS = _to_kind(("none", "sin", "cos", "constant", "step"))

SCHEMA: Dict[str, Dict[str, Callable[[str], Any]]] = {
    "time": {"t_start": float, "t_end": float, "dt": float},
    "rigid_body": {
        "mass": float, "damping_y": float, "stiffness_y": float,
        "inertia_theta": float, "damping_theta": float, "stiffness_theta": float,
        "d0": float, "ddot0": float, "theta0": float, "thetadot0": float,
        "tolerance": float, "max_outer": int,
    },
    "fluid": {"density": float, "viscosity": float},
    "mesh": {
        "kind": _to_kind(("annulus", "box")),
        "center_x": float, "center_y": float, "r_body": float, "r_rotating": float,
        "r_mid": _to_optional_float, "r_outer": float, "r_far": float, "n_quads": int,
        "n_rotating_layers": int, "n_static_layers": int, "start_angle": float,
        "x_range": _to_floats, "y_range": _to_floats, "nx": int, "ny": int, "body_box": _to_box,
    },
    "motion": {"rotate": _to_bool, "translate": _to_bool, "inner_box": _to_box, "outer_box": _to_box},
    "provider": {
        "name": _to_kind(tuple(PROVIDER_OPTIONS)),
        "force_kind": _TIME_FUNCTIONS, "force_amplitude": float, "force_frequency": float,
        "force_phase": float, "force_onset": float,
        "moment_kind": _TIME_FUNCTIONS, "moment_amplitude": float, "moment_frequency": float,
        "moment_phase": float, "moment_onset": float,
        "k_ext": float, "c_ext": float, "k_theta_ext": float, "c_theta_ext": float,
        "angles": _to_floats, "lift": _to_floats, "moment": _to_floats,
        "speed": float, "length": float, "pressure": _to_floats, "order": int,
    },
    "output": {"directory": str, "vtk": _to_bool, "vtk_every": int, "plot": _to_bool},
}


def parse_config(text: str) -> CouplingConfig:
    """Parse run configuration text; every default is materialised in the result."""
    values: Dict[str, Dict[str, Any]] = {name: {} for name in SCHEMA}
    lines: Dict[str, int] = {}
    section: Optional[str] = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", lineno)
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if section is None:
            raise ConfigError("key outside of any section", lineno)
        key, raw = (part.strip() for part in line.split("=", 1))
        convert = SCHEMA[section].get(key)
        if convert is None:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno)
        if key in values[section]:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", lineno)
        try:
            values[section][key] = convert(raw)
            lines[f"{section}.{key}"] = lineno
        except ValueError as exc:
            raise ConfigError(f"bad value for {section}.{key}: {exc}", lineno)

    provider = dict(values["provider"])
    name = provider.pop("name", "zero")
    config = CouplingConfig(
        time=TimeConfig(**values["time"]),
        rigid_body=RigidBodyConfig(**values["rigid_body"]),
        fluid=FluidConfig(**values["fluid"]),
        mesh=MeshConfig(**values["mesh"]),
        motion=MotionConfig(**values["motion"]),
        provider=ProviderConfig(name, provider),
        output=OutputConfig(**values["output"]),
    )
    _check(config, lines)
    return config


def _check(config: CouplingConfig, lines: Dict[str, int]) -> None:
    """Cross-field checks; errors carry the line of the first offending key found in the text."""

    def fail(message: str, *keys: str) -> None:
        raise ConfigError(message, next((lines[k] for k in keys if k in lines), None))

    time = config.time
    if not time.dt > 0.0:
        fail(f"time.dt must be positive, got {time.dt}", "time.dt")
    if not time.t_end > time.t_start:
        fail(f"time.t_end={time.t_end} must exceed t_start={time.t_start}", "time.t_end", "time.t_start")
    rb = config.rigid_body
    for dof, params, keys in (
        ("translation", rb.translation, ("mass", "damping_y", "stiffness_y")),
        ("rotation", rb.rotation, ("inertia_theta", "damping_theta", "stiffness_theta")),
    ):
        try:
            params()
        except ValueError as exc:
            fail(f"rigid_body {dof}: {exc}", *(f"rigid_body.{k}" for k in keys))
    try:
        config.fluid.params()
    except ValueError as exc:
        fail(f"fluid: {exc}", "fluid.density", "fluid.viscosity")
    if rb.tolerance <= 0.0:
        fail("rigid_body.tolerance must be positive", "rigid_body.tolerance")
    if rb.max_outer < 1:
        fail("rigid_body.max_outer must be at least 1", "rigid_body.max_outer")
    inner, outer = config.motion.boxes()
    if config.motion.translate and inner is None:
        fail("motion.translate needs inner_box and outer_box", "motion.translate")
    if inner is not None and not outer.strictly_contains(inner):
        fail("motion.inner_box must lie strictly inside motion.outer_box", "motion.inner_box", "motion.outer_box")
    name = config.provider.name
    allowed = PROVIDER_OPTIONS[name]
    for key in config.provider.options:
        if key not in allowed:
            fail(f"option {key!r} does not apply to provider {name!r}", f"provider.{key}")


def load_config(path) -> CouplingConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc.strerror}")
    config = parse_config(text)
    logger.info("loaded configuration %s", path)
    return config
