"""
Domain motion: rigid rotation of the inner region and box-blended translation.

A motion map is an increment over one slab: rotation by ``angle`` about the
current body centre, then vertical translation by ``displacement`` weighted by
the blend between the current motion boxes. It is applied to the current
coordinates of a mesh, so the identity map leaves a moved mesh where it is.
The accumulated pose of the body is kept by the caller.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import MotionRejected
from .geometry import rotation_matrix, signed_areas
from .mesh_core import SpatialMesh, triangulate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle [xmin, xmax] x [ymin, ymax]."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    @classmethod
    def centered(cls, cx: float, cy: float, hx: float, hy: float) -> "Box":
        return cls(cx - hx, cx + hx, cy - hy, cy + hy)

    def shifted(self, dy: float) -> "Box":
        return Box(self.xmin, self.xmax, self.ymin + dy, self.ymax + dy)

    def strictly_contains(self, other: "Box") -> bool:
        return (
            self.xmin < other.xmin
            and other.xmax < self.xmax
            and self.ymin < other.ymin
            and other.ymax < self.ymax
        )


@dataclass(frozen=True)
class MotionMap:
    """Motion over one slab; ``angle`` and ``displacement`` are increments."""

    center: Sequence[float]
    angle: float = 0.0
    displacement: float = 0.0
    inner_box: Optional[Box] = None
    outer_box: Optional[Box] = None
    rotate: bool = True
    translate: bool = True

    def __post_init__(self):
        if self.translate and self.inner_box is not None:
            if self.outer_box is None or not self.outer_box.strictly_contains(self.inner_box):
                raise ValueError("inner motion box must lie strictly inside the outer box")


def rotate_point(center: Sequence[float], angle: float, p: Sequence[float]) -> np.ndarray:
    c = np.asarray(center, dtype=float)
    return c + rotation_matrix(angle) @ (np.asarray(p, dtype=float) - c)


def blend_weight(inner: Box, outer: Box, p) -> np.ndarray:
    """
    Translation weight: 1 inside ``inner``, 0 outside ``outer``, linear between.

    The boxes between the two are interpolated linearly edge by edge; the
    weight of a point is one minus the interpolation parameter of the smallest
    such box containing it. For concentric squares this is
    (s_out - s) / (s_out - s_in) with s the L-infinity distance to the centre.
    """
    if not outer.strictly_contains(inner):
        raise ValueError("blend boxes are not strictly nested")
    p = np.atleast_2d(np.asarray(p, dtype=float))
    x, y = p[:, 0], p[:, 1]
    lam = np.zeros(len(p))
    for lo_in, lo_out, hi_in, hi_out, v in (
        (inner.xmin, outer.xmin, inner.xmax, outer.xmax, x),
        (inner.ymin, outer.ymin, inner.ymax, outer.ymax, y),
    ):
        below = np.where(v < lo_in, (lo_in - v) / (lo_in - lo_out), 0.0)
        above = np.where(v > hi_in, (v - hi_in) / (hi_out - hi_in), 0.0)
        lam = np.maximum(lam, np.maximum(below, above))
    w = 1.0 - np.minimum(lam, 1.0)
    return w if w.size > 1 else w.reshape(())


def moved_points(mesh: SpatialMesh, motion: MotionMap) -> np.ndarray:
    """Current coordinates of the mesh vertices moved by the map (rotation first)."""
    old = mesh.points
    new = np.array(old, dtype=float, copy=True)
    if motion.rotate and motion.angle != 0.0:
        mask = mesh.rotating_mask()
        c = np.asarray(motion.center, dtype=float)
        new[mask] = c + (old[mask] - c) @ rotation_matrix(motion.angle).T
    if motion.translate and motion.displacement != 0.0:
        if motion.inner_box is None:
            raise ValueError("translation needs inner and outer motion boxes")
        w = np.atleast_1d(blend_weight(motion.inner_box, motion.outer_box, new))
        moving = w > 0.0
        new[moving, 1] = new[moving, 1] + w[moving] * motion.displacement
    return new


def advance_vertices(mesh: SpatialMesh, motion: MotionMap) -> SpatialMesh:
    """
    Move the mesh to the next time level.

    Connectivity is copied, identifiers move up by N_v (one level) and every
    triangle of the resulting triangulation must keep a positive area.

    Raises:
        MotionRejected: a triangle lost its positive orientation.
    """
    new = moved_points(mesh, motion)
    advanced = mesh.with_points(new, level=mesh.level + 1)
    tris, _ = triangulate(advanced)
    if len(tris):
        areas = signed_areas(new, tris)
        bad = np.flatnonzero(areas <= 0.0)
        if len(bad):
            i = int(bad[0])
            raise MotionRejected(
                f"motion inverts {len(bad)} triangle(s), first {tuple(int(v) for v in tris[i])} "
                f"area {areas[i]:.3e}; reduce the time step or rotation",
                element=i,
                area=float(areas[i]),
            )
    logger.debug("advanced mesh to level %d (angle %.6g, d %.6g)", advanced.level, motion.angle, motion.displacement)
    return advanced
