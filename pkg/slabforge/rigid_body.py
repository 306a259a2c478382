"""
Spring-damper rigid body with one translational and one rotational degree of freedom.

Each degree of freedom obeys

    inertia * q'' + damping * q' + stiffness * q = load

written as the first-order system q' = r, inertia * r' = load - damping * r - stiffness * q.
The step from t^n to t^{n+1} starts with an explicit Euler predictor and is
then corrected by fixed-point iteration on the BDF2 discretization.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy import linalg

from .errors import DivergenceError

logger = logging.getLogger(__name__)

Load = Union[float, Callable[[float, float], float]]

DEFAULT_MAX_ITERS = 100


@dataclass(frozen=True)
class DofParams:
    inertia: float
    damping: float = 0.0
    stiffness: float = 0.0

    def __post_init__(self):
        if not self.inertia > 0.0:
            raise ValueError(f"inertia must be positive, got {self.inertia}")
        if self.damping < 0.0 or self.stiffness < 0.0:
            raise ValueError(
                f"damping and stiffness must be non-negative, got {self.damping}, {self.stiffness}"
            )

    def acceleration(self, value: float, rate: float, load: float) -> float:
        return (-self.stiffness * value - self.damping * rate + load) / self.inertia

    @property
    def natural_frequency(self) -> float:
        """Undamped natural frequency in Hz."""
        return float(np.sqrt(self.stiffness / self.inertia) / (2.0 * np.pi))


@dataclass(frozen=True)
class DofState:
    """Value and rate at t^n, with the pair at t^{n-1} once a step has been taken."""

    value: float = 0.0
    rate: float = 0.0
    prev_value: Optional[float] = None
    prev_rate: Optional[float] = None

    @property
    def has_history(self) -> bool:
        return self.prev_value is not None

    def backfilled(self, dt: float, acceleration: float = 0.0) -> "DofState":
        """
        Taylor history for the first step from the starting acceleration a_0:
        q_{-1} = q_0 - dt r_0 + dt^2 a_0 / 2 and r_{-1} = r_0 - dt a_0.
        """
        if self.has_history:
            return self
        return replace(
            self,
            prev_value=self.value - dt * self.rate + 0.5 * dt**2 * acceleration,
            prev_rate=self.rate - dt * acceleration,
        )

    def advanced(self, value: float, rate: float) -> "DofState":
        return DofState(value=float(value), rate=float(rate), prev_value=self.value, prev_rate=self.rate)

    def scaled(self, factor: float) -> "DofState":
        def s(x):
            return None if x is None else factor * x

        return DofState(s(self.value), s(self.rate), s(self.prev_value), s(self.prev_rate))


@dataclass(frozen=True)
class RigidBodyState:
    time: float = 0.0
    translation: DofState = DofState()
    rotation: DofState = DofState()

    @property
    def d(self) -> float:
        return self.translation.value

    @property
    def ddot(self) -> float:
        return self.translation.rate

    @property
    def theta(self) -> float:
        return self.rotation.value

    @property
    def thetadot(self) -> float:
        return self.rotation.rate


@dataclass(frozen=True)
class DofResult:
    value: float
    rate: float
    iterations: int
    residual: float


class StateHistory:
    """Accepted states in time order."""

    def __init__(self):
        self.times: List[float] = []
        self.states: List[RigidBodyState] = []

    def append(self, state: RigidBodyState) -> None:
        if self.times and not state.time > self.times[-1]:
            raise ValueError(f"history time {state.time} does not follow {self.times[-1]}")
        self.times.append(state.time)
        self.states.append(state)

    def __len__(self) -> int:
        return len(self.states)


def predictor(params: DofParams, state: DofState, load: float, dt: float) -> Tuple[float, float]:
    """Explicit Euler guess for t^{n+1}."""
    if dt < 0.0:
        raise ValueError(f"time step must be non-negative, got {dt}")
    value = dt * state.rate + state.value
    rate = dt * params.acceleration(state.value, state.rate, load) + state.rate
    return value, rate


def corrector(
    params: DofParams,
    state: DofState,
    iterate: Tuple[float, float],
    load: float,
    dt: float,
) -> Tuple[float, float]:
    """
    One BDF2 fixed-point update from the previous iterate.

    Both components use the previous iterate on the right-hand side, so the
    update is explicit in (value, rate) of iteration l - 1.
    """
    state = state.backfilled(dt)
    value_prev, rate_prev = iterate
    h = 2.0 / 3.0 * dt
    value = h * rate_prev + 4.0 / 3.0 * state.value - 1.0 / 3.0 * state.prev_value
    rate = (
        h * params.acceleration(value_prev, rate_prev, load)
        + 4.0 / 3.0 * state.rate
        - 1.0 / 3.0 * state.prev_rate
    )
    return value, rate


def _load_at(load: Load, value: float, rate: float) -> float:
    return float(load(value, rate)) if callable(load) else float(load)


def integrate_dof(
    params: DofParams,
    state: DofState,
    load: Load,
    dt: float,
    tol: float,
    max_iters: int = DEFAULT_MAX_ITERS,
    load_now: Optional[float] = None,
) -> DofResult:
    """
    Advance one degree of freedom to t^{n+1}.

    Args:
        params: Inertia, damping and stiffness.
        state: Value and rate at t^n with history.
        load: Load at t^{n+1}, a number or a callable of the current (value, rate) iterate.
        dt: Time step.
        tol: Stop when the change of (value, rate) between iterates is below this.
        max_iters: Corrector iteration cap.
        load_now: Load at t^n for the predictor; the load at the current state when omitted.

    Raises:
        DivergenceError: the corrector did not meet ``tol`` within ``max_iters``.
    """
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if load_now is None:
        load_now = _load_at(load, state.value, state.rate)
    state = state.backfilled(dt, params.acceleration(state.value, state.rate, load_now))
    iterate = predictor(params, state, load_now, dt)
    residual = float("inf")
    for it in range(1, max_iters + 1):
        new = corrector(params, state, iterate, _load_at(load, *iterate), dt)
        residual = float(np.hypot(new[0] - iterate[0], new[1] - iterate[1]))
        iterate = new
        if residual < tol:
            return DofResult(iterate[0], iterate[1], it, residual)
    raise DivergenceError("rigid-body corrector", max_iters, residual)


def implicit_bdf2_step(params: DofParams, state: DofState, load: float, dt: float) -> Tuple[float, float]:
    """Direct solve of the BDF2 equations for (value, rate) at t^{n+1}."""
    state = state.backfilled(dt)
    h = 2.0 / 3.0 * dt
    m = params.inertia
    a = np.array(
        [
            [1.0, -h],
            [h * params.stiffness / m, 1.0 + h * params.damping / m],
        ]
    )
    rhs = np.array(
        [
            4.0 / 3.0 * state.value - 1.0 / 3.0 * state.prev_value,
            h * load / m + 4.0 / 3.0 * state.rate - 1.0 / 3.0 * state.prev_rate,
        ]
    )
    value, rate = linalg.solve(a, rhs)
    return float(value), float(rate)


def bdf2_residual(
    params: DofParams, state: DofState, value: float, rate: float, load: float, dt: float
) -> float:
    """Euclidean residual of the BDF2 equations at a candidate (value, rate)."""
    exact = implicit_bdf2_step(params, state, load, dt)
    h = 2.0 / 3.0 * dt
    m = params.inertia
    r1 = (value - exact[0]) - h * (rate - exact[1])
    r2 = h * params.stiffness / m * (value - exact[0]) + (1.0 + h * params.damping / m) * (rate - exact[1])
    return float(np.hypot(r1, r2))


def body_surface_velocity(ddot: float, thetadot: float, dx) -> np.ndarray:
    """
    Velocity of body surface points from the rigid-body rates.

    Args:
        ddot: Vertical translation rate.
        thetadot: Angular rate.
        dx: Offset(s) from the centre of gravity, shape (2,) or (n, 2).
    """
    dx = np.asarray(dx, dtype=float)
    u = np.empty_like(dx)
    u[..., 0] = -thetadot * dx[..., 1]
    u[..., 1] = ddot + thetadot * dx[..., 0]
    return u


def analytic_damped_oscillator(
    params: DofParams, d0: float, b0: float, t, load: float = 0.0
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Exact (value, rate) under a constant load, via the matrix exponential.

    Covers under-, critically and over-damped motion as well as k = 0.
    """
    m = params.inertia
    system = np.array(
        [
            [0.0, 1.0, 0.0],
            [-params.stiffness / m, -params.damping / m, load / m],
            [0.0, 0.0, 0.0],
        ]
    )
    x0 = np.array([d0, b0, 1.0])
    times = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.array([linalg.expm(system * ti) @ x0 for ti in times])
    if np.ndim(t) == 0:
        return out[0, 0], out[0, 1]
    return out[:, 0], out[:, 1]
