"""
Geometric kernels shared by the mesh, extrusion and coupling modules.

Space-time points are stored as (t, x, y). A tetrahedron (v0, v1, v2, v3) is
positively oriented when det(v1 - v0, v2 - v0, v3 - v0) > 0 in that frame.
"""

from typing import Tuple

import numpy as np


def signed_areas(points: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Signed areas of spatial triangles; positive for counterclockwise."""
    p0 = points[triangles[:, 0]]
    e1 = points[triangles[:, 1]] - p0
    e2 = points[triangles[:, 2]] - p0
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def polygon_area(polygon: np.ndarray) -> float:
    """Shoelace area of a closed polygon given as an (n, 2) array."""
    x, y = polygon[:, 0], polygon[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def triangle_quality(corners: np.ndarray) -> np.ndarray:
    """
    Inradius over circumradius, scaled so an equilateral triangle scores 1.

    Args:
        corners: Array of shape (n, 3, 2) with triangle corner coordinates.

    Returns:
        Array of n qualities in [0, 1]; degenerate triangles score 0.
    """
    a = np.linalg.norm(corners[:, 1] - corners[:, 2], axis=1)
    b = np.linalg.norm(corners[:, 2] - corners[:, 0], axis=1)
    c = np.linalg.norm(corners[:, 0] - corners[:, 1], axis=1)
    e1 = corners[:, 1] - corners[:, 0]
    e2 = corners[:, 2] - corners[:, 0]
    area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    s = 0.5 * (a + b + c)
    denom = s * a * b * c
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0.0, 4.0 * area**2 / denom, 0.0)
    return 2.0 * ratio


def tet_signed_volumes(coords: np.ndarray, tets: np.ndarray) -> np.ndarray:
    """Signed volumes of tetrahedra indexing into (t, x, y) coordinates."""
    v0 = coords[tets[:, 0]]
    m = np.stack(
        [coords[tets[:, 1]] - v0, coords[tets[:, 2]] - v0, coords[tets[:, 3]] - v0],
        axis=1,
    )
    return np.linalg.det(m) / 6.0


def tet_signed_volume(v0, v1, v2, v3) -> float:
    return float(np.linalg.det(np.array([v1 - v0, v2 - v0, v3 - v0]))) / 6.0


def simpson(f0: float, fmid: float, f1: float, dt: float) -> float:
    """Simpson's rule on one interval; exact for quadratics."""
    return dt * (f0 + 4.0 * fmid + f1) / 6.0


def swept_area_integral(
    bottom: np.ndarray, top: np.ndarray, triangles: np.ndarray, dt: float
) -> np.ndarray:
    """
    Time integral of each triangle's area under linear vertex motion.

    Area is quadratic in time under linear motion, so Simpson's rule is exact.
    """
    mid = 0.5 * (bottom + top)
    return simpson(
        signed_areas(bottom, triangles),
        signed_areas(mid, triangles),
        signed_areas(top, triangles),
        dt,
    )


def twist_correction(p0, q0, p1, q1, diagonal_from_p: bool) -> float:
    """
    Volume of the ruled lateral surface minus its two flat triangles.

    The face is swept by the spatial edge p -> q between two time levels,
    with p0, q0 at the lower level and p1, q1 at the upper one, all given as
    (t, x, y). The edge must be traversed with the column interior on its
    left so that the surface normal points outward. ``diagonal_from_p``
    selects the cut p0-q1; otherwise the cut is q0-p1.
    """
    d = float(np.linalg.det(np.array([q0 - p0, p1 - p0, q1 - p0])))
    return -d / 12.0 if diagonal_from_p else d / 12.0


def face_normal(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> Tuple[np.ndarray, float]:
    """Unit normal of triangle (a, b, c) by the right-hand rule, and its area."""
    n = np.cross(b - a, c - a)
    norm = float(np.linalg.norm(n))
    if norm == 0.0:
        return n, 0.0
    return n / norm, 0.5 * norm


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])
