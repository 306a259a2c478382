"""
Force providers: what the body feels in place of a flow solve.

A provider maps (time, rigid-body state, mesh) to a force and moment. The
staggered loop evaluates it once per outer iteration, at the current
rigid-body iterate and on the mesh moved to that iterate.
"""

import logging
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError
from .forces import FluidParams, ForceMoment, compute_force_moment, polygon_segments, sample_stress
from .mesh_core import SpatialMesh, body_boundary
from .rigid_body import RigidBodyState

logger = logging.getLogger(__name__)


class ForceProvider:
    """Base class; subclasses implement ``evaluate``."""

    name = "base"

    def evaluate(self, time: float, state: RigidBodyState, mesh: SpatialMesh) -> ForceMoment:
        raise NotImplementedError

    def __call__(self, time: float, state: RigidBodyState, mesh: SpatialMesh) -> ForceMoment:
        return self.evaluate(time, state, mesh)


class ZeroProvider(ForceProvider):
    name = "zero"

    def evaluate(self, time, state, mesh):
        return ForceMoment.zero()


class TimeFunction:
    """
    Scalar function of time.

    Kinds: ``sin`` and ``cos`` (amplitude * f(frequency * t + phase)),
    ``constant`` (amplitude) and ``step`` (amplitude once t >= onset).
    ``frequency`` is angular, in rad per unit time.
    """

    KINDS = ("sin", "cos", "constant", "step", "none")

    def __init__(self, kind: str = "none", amplitude: float = 0.0, frequency: float = 1.0,
                 phase: float = 0.0, onset: float = 0.0):
        if kind not in self.KINDS:
            raise ValueError(f"unknown time function {kind!r}; expected one of {', '.join(self.KINDS)}")
        self.kind = kind
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)
        self.phase = float(phase)
        self.onset = float(onset)

    def __call__(self, t: float) -> float:
        if self.kind == "sin":
            return self.amplitude * float(np.sin(self.frequency * t + self.phase))
        if self.kind == "cos":
            return self.amplitude * float(np.cos(self.frequency * t + self.phase))
        if self.kind == "constant":
            return self.amplitude
        if self.kind == "step":
            return self.amplitude if t >= self.onset else 0.0
        return 0.0


class PrescribedProvider(ForceProvider):
    """Vertical force and moment as functions of time only."""

    name = "prescribed"

    def __init__(self, force: Optional[Callable[[float], float]] = None,
                 moment: Optional[Callable[[float], float]] = None):
        self.force = force or TimeFunction()
        self.moment = moment or TimeFunction()

    def evaluate(self, time, state, mesh):
        return ForceMoment(np.array([0.0, self.force(time)]), self.moment(time))


class LinearProvider(ForceProvider):
    """Spring-damper surrogate: F_y = -k d - c d', M = -k_theta theta - c_theta theta'."""

    name = "linear"

    def __init__(self, k_ext: float = 0.0, c_ext: float = 0.0,
                 k_theta_ext: float = 0.0, c_theta_ext: float = 0.0):
        self.k_ext = float(k_ext)
        self.c_ext = float(c_ext)
        self.k_theta_ext = float(k_theta_ext)
        self.c_theta_ext = float(c_theta_ext)

    def evaluate(self, time, state, mesh):
        fy = -self.k_ext * state.d - self.c_ext * state.ddot
        m = -self.k_theta_ext * state.theta - self.c_theta_ext * state.thetadot
        return ForceMoment(np.array([0.0, fy]), m)


class QuasiSteadyProvider(ForceProvider):
    """
    Lift and moment from tabulated coefficients against angle of attack.

    The effective angle of attack is theta - atan(d' / U). Coefficients are
    interpolated linearly in the table (angles in degrees, increasing) and
    scaled by the dynamic pressure 0.5 rho U^2 and the reference length.
    """

    name = "quasi_steady"

    def __init__(self, angles: Sequence[float], lift: Sequence[float], moment: Sequence[float],
                 speed: float, length: float = 1.0, density: float = 1.0):
        self.angles = np.asarray(angles, dtype=float)
        self.lift = np.asarray(lift, dtype=float)
        self.moment = np.asarray(moment, dtype=float)
        if not (len(self.angles) == len(self.lift) == len(self.moment)) or len(self.angles) < 2:
            raise ValueError("coefficient table needs at least two rows of equal length")
        if np.any(np.diff(self.angles) <= 0.0):
            raise ValueError("coefficient table angles must increase strictly")
        if not speed > 0.0:
            raise ValueError(f"free-stream speed must be positive, got {speed}")
        self.speed = float(speed)
        self.length = float(length)
        self.density = float(density)

    def angle_of_attack(self, state: RigidBodyState) -> float:
        return float(np.degrees(state.theta - np.arctan2(state.ddot, self.speed)))

    def evaluate(self, time, state, mesh):
        alpha = self.angle_of_attack(state)
        q = 0.5 * self.density * self.speed**2
        cl = float(np.interp(alpha, self.angles, self.lift))
        cm = float(np.interp(alpha, self.angles, self.moment))
        return ForceMoment(np.array([0.0, q * self.length * cl]), q * self.length**2 * cm)


class StressFieldProvider(ForceProvider):
    """
    Pressure and strain fields sampled on the moved body boundary.

    Fields are callables of (time, positions (m, 2)); the moment is taken
    about the displaced rotation centre.
    """

    name = "stress_field"

    def __init__(self, pressure: Callable[[float, np.ndarray], np.ndarray],
                 strain: Optional[Callable[[float, np.ndarray], np.ndarray]] = None,
                 fluid: Optional[FluidParams] = None, order: int = 2):
        self.pressure = pressure
        self.strain = strain
        self.fluid = fluid or FluidParams()
        self.order = order

    def evaluate(self, time, state, mesh):
        loop = body_boundary(mesh)
        segments = polygon_segments(mesh.points[loop])
        strain = None if self.strain is None else (lambda x: self.strain(time, x))
        samples = sample_stress(segments, lambda x: self.pressure(time, x), strain, self.order)
        center = np.asarray(mesh.center, dtype=float) + np.array([0.0, state.d])
        return compute_force_moment(samples, self.fluid, center)


def _polynomial_field(coefficients: Sequence[float]) -> Callable[[float, np.ndarray], np.ndarray]:
    """p(x, y) = c0 + c1 x + c2 y + c3 x^2 + c4 x y + c5 y^2 (missing terms are zero)."""
    c = np.zeros(6)
    c[: len(coefficients)] = coefficients

    def field(t: float, x: np.ndarray) -> np.ndarray:
        px, py = x[:, 0], x[:, 1]
        return c[0] + c[1] * px + c[2] * py + c[3] * px**2 + c[4] * px * py + c[5] * py**2

    return field


def _time_function(options: Dict[str, Any], prefix: str) -> TimeFunction:
    return TimeFunction(
        kind=options.get(f"{prefix}_kind", "none"),
        amplitude=options.get(f"{prefix}_amplitude", 0.0),
        frequency=options.get(f"{prefix}_frequency", 1.0),
        phase=options.get(f"{prefix}_phase", 0.0),
        onset=options.get(f"{prefix}_onset", 0.0),
    )


def build_provider(name: str, options: Dict[str, Any], fluid: Optional[FluidParams] = None) -> ForceProvider:
    """Construct a provider from its configuration name and options."""
    foreign = sorted(set(options) - set(PROVIDER_OPTIONS.get(name, options)))
    if foreign:
        raise ConfigError(f"provider {name!r} does not take option(s) {', '.join(foreign)}")
    provider = _build(name, options, fluid)
    logger.debug("force provider %s with options %s", provider.name, sorted(options))
    return provider


def _build(name: str, options: Dict[str, Any], fluid: Optional[FluidParams]) -> ForceProvider:
    try:
        if name == "zero":
            return ZeroProvider()
        if name == "prescribed":
            return PrescribedProvider(_time_function(options, "force"), _time_function(options, "moment"))
        if name == "linear":
            return LinearProvider(
                options.get("k_ext", 0.0), options.get("c_ext", 0.0),
                options.get("k_theta_ext", 0.0), options.get("c_theta_ext", 0.0),
            )
        if name == "quasi_steady":
            return QuasiSteadyProvider(
                options["angles"], options["lift"], options["moment"], options["speed"],
                options.get("length", 1.0), fluid.density if fluid else 1.0,
            )
        if name == "stress_field":
            return StressFieldProvider(
                _polynomial_field(options.get("pressure", [0.0])), None, fluid,
                int(options.get("order", 2)),
            )
    except KeyError as exc:
        raise ConfigError(f"provider {name!r} needs option {exc.args[0]!r}")
    except ValueError as exc:
        raise ConfigError(f"provider {name!r}: {exc}")
    raise ConfigError(f"unknown provider {name!r}; expected one of {', '.join(PROVIDERS)}")


_TIME_FUNCTION_FIELDS = ("kind", "amplitude", "frequency", "phase", "onset")

PROVIDER_OPTIONS: Dict[str, Tuple[str, ...]] = {
    "zero": (),
    "prescribed": tuple(f"{prefix}_{f}" for prefix in ("force", "moment") for f in _TIME_FUNCTION_FIELDS),
    "linear": ("k_ext", "c_ext", "k_theta_ext", "c_theta_ext"),
    "quasi_steady": ("angles", "lift", "moment", "speed", "length"),
    "stress_field": ("pressure", "order"),
}

PROVIDERS = tuple(PROVIDER_OPTIONS)
