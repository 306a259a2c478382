"""
Force and moment on the body from boundary stress.

The traction rho * (p I - 2 nu eps(u)) n is integrated over the body boundary
with Gauss-Legendre quadrature per segment, n being the outward normal of the
body. The result enters the rigid-body equations as the load, with the sign
exactly as integrated.
"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import MeshError

PressureField = Callable[[np.ndarray], np.ndarray]
StrainField = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FluidParams:
    density: float = 1.0
    viscosity: float = 1e-3

    def __post_init__(self):
        if not (self.density > 0.0 and self.viscosity > 0.0):
            raise ValueError(
                f"density and viscosity must be positive, got {self.density}, {self.viscosity}"
            )


@dataclass(frozen=True)
class ForceMoment:
    force: np.ndarray
    moment: float

    def __post_init__(self):
        force = np.asarray(self.force, dtype=float).reshape(2)
        if not (np.all(np.isfinite(force)) and np.isfinite(self.moment)):
            raise ValueError(f"force/moment must be finite, got {force}, {self.moment}")
        object.__setattr__(self, "force", force)
        object.__setattr__(self, "moment", float(self.moment))

    @property
    def fy(self) -> float:
        return float(self.force[1])

    @classmethod
    def zero(cls) -> "ForceMoment":
        return cls(np.zeros(2), 0.0)


@dataclass(frozen=True)
class BoundaryStressSample:
    position: np.ndarray
    pressure: float
    strain: np.ndarray
    normal: np.ndarray
    weight: float

    def __post_init__(self):
        strain = np.asarray(self.strain, dtype=float).reshape(2, 2)
        if not np.allclose(strain, strain.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(strain).max())):
            raise ValueError("strain tensor must be symmetric")
        if abs(float(np.linalg.norm(self.normal)) - 1.0) > 1e-12:
            raise ValueError("boundary normal must have unit length")
        object.__setattr__(self, "strain", strain)


def polygon_segments(polygon: np.ndarray) -> np.ndarray:
    """Closed chain of (start, end) segments of an (n, 2) polygon."""
    polygon = np.asarray(polygon, dtype=float)
    return np.stack([polygon, np.roll(polygon, -1, axis=0)], axis=1)


def _check_closed(segments: np.ndarray, tol: float) -> None:
    if not len(segments):
        raise MeshError("body boundary has no segments")
    gaps = np.linalg.norm(segments[:, 1] - np.roll(segments[:, 0], -1, axis=0), axis=1)
    if np.any(gaps > tol):
        raise MeshError(f"body boundary is not closed (largest gap {gaps.max():.3e})")


def boundary_quadrature(segments: np.ndarray, order: int = 2):
    """
    Gauss points on a closed chain of segments.

    Args:
        segments: (n, 2, 2) array of (start, end) points, traversed anticlockwise
            around the body.
        order: Points per segment, at least 2.

    Returns:
        (positions (m, 2), outward body normals (m, 2), weights (m,))
    """
    if order < 2:
        raise ValueError(f"quadrature order must be at least 2, got {order}")
    segments = np.asarray(segments, dtype=float)
    scale = float(np.ptp(segments.reshape(-1, 2), axis=0).max()) if len(segments) else 1.0
    _check_closed(segments, 1e-12 * max(scale, 1.0))
    nodes, weights = leggauss(order)
    a, b = segments[:, 0], segments[:, 1]
    edge = b - a
    length = np.linalg.norm(edge, axis=1)
    if np.any(length == 0.0):
        raise MeshError("body boundary has a zero-length segment")
    normals = np.column_stack([edge[:, 1], -edge[:, 0]]) / length[:, None]
    s = 0.5 * (nodes + 1.0)
    positions = a[:, None, :] + s[None, :, None] * edge[:, None, :]
    w = 0.5 * length[:, None] * weights[None, :]
    return (
        positions.reshape(-1, 2),
        np.repeat(normals, order, axis=0),
        w.reshape(-1),
    )


def sample_stress(
    segments: np.ndarray,
    pressure: PressureField,
    strain: Optional[StrainField] = None,
    order: int = 2,
) -> List[BoundaryStressSample]:
    """Evaluate pressure (and strain, zero if omitted) at the Gauss points."""
    positions, normals, weights = boundary_quadrature(segments, order)
    p = np.broadcast_to(np.asarray(pressure(positions), dtype=float), (len(positions),))
    if strain is None:
        eps = np.zeros((len(positions), 2, 2))
    else:
        eps = np.asarray(strain(positions), dtype=float).reshape(len(positions), 2, 2)
    return [
        BoundaryStressSample(positions[i], float(p[i]), eps[i], normals[i], float(weights[i]))
        for i in range(len(positions))
    ]


def compute_force_moment(
    samples: Sequence[BoundaryStressSample], fluid: FluidParams, center: Sequence[float]
) -> ForceMoment:
    """
    Integrate rho * (p I - 2 nu eps) n and its moment about ``center``.

    Exact for integrands of degree up to 2q - 1 per segment with q points.

    Raises:
        MeshError: no samples, so the body has no boundary to integrate over.
    """
    if not samples:
        raise MeshError("no boundary stress samples; the body boundary is empty")
    x = np.array([s.position for s in samples])
    n = np.array([s.normal for s in samples])
    p = np.array([s.pressure for s in samples])
    eps = np.array([s.strain for s in samples])
    w = np.array([s.weight for s in samples])
    traction = fluid.density * (p[:, None] * n - 2.0 * fluid.viscosity * np.einsum("kij,kj->ki", eps, n))
    dx = x - np.asarray(center, dtype=float)
    force = (w[:, None] * traction).sum(axis=0)
    moment = float(np.sum(w * (dx[:, 0] * traction[:, 1] - dx[:, 1] * traction[:, 0])))
    return ForceMoment(force, moment)
