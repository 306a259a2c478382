#!/usr/bin/env python3
"""
Spatial mesh data model and annulus construction.

A spatial mesh stores vertex coordinates indexed by vertex number. The global
identifier of vertex i at time level n is ``n * N_v + i``, so identifiers at
consecutive levels differ by N_v. Triangles outside the annulus are stored
explicitly; the annulus is stored as quadrilaterals and triangulated on demand:
buffer quads always along n2-n4, sliding quads according to the sliding
offset (see ``slabforge.sliding``).

Quad vertex convention: n1 and n2 lie on the inner circle of the layer and are
ordered clockwise, n3 and n4 lie on the outer circle and the sequence
n1, n2, n3, n4 runs anticlockwise around the quad centroid.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import MeshError
from .geometry import polygon_area, signed_areas, triangle_quality

logger = logging.getLogger(__name__)


class Region(IntEnum):
    ROTATING = 0
    BUFFER = 1
    SLIDING = 2
    STATIC = 3


class AnnulusQuad(NamedTuple):
    n1: int
    n2: int
    n3: int
    n4: int
    layer: Region


@dataclass(frozen=True)
class RingOrdering:
    """Cyclic vertex sequence around one annulus boundary circle."""

    ring: str
    sequence: Tuple[int, ...]

    def violations(self) -> List[Tuple[int, int, int]]:
        return chainsaw_violations(self.sequence)

    def is_chainsaw(self) -> bool:
        return not self.violations()


@dataclass(frozen=True, eq=False)
class AnnulusTopology:
    """
    Vertex numbers of the three annulus circles, in anticlockwise angular order.

    ``inner`` is shared with the rotating mesh, ``mid`` separates the buffer
    layer from the sliding layer and ``outer`` is shared with the static mesh.
    Position k of every circle sits at the same reference angle.
    """

    inner: np.ndarray
    mid: np.ndarray
    outer: np.ndarray

    @property
    def n_quads(self) -> int:
        return len(self.mid)

    @property
    def pitch(self) -> float:
        return 2.0 * np.pi / self.n_quads

    def rings(self) -> Tuple[RingOrdering, RingOrdering]:
        return (
            RingOrdering("inner_circle", tuple(int(i) for i in self.inner)),
            RingOrdering("outer_circle", tuple(int(i) for i in self.outer)),
        )


@dataclass(frozen=True, eq=False)
class SpatialMesh:
    points: np.ndarray
    triangles: np.ndarray
    triangle_regions: np.ndarray
    quads: np.ndarray
    quad_layers: np.ndarray
    center: np.ndarray
    annulus: Optional[AnnulusTopology] = None
    sliding_offset: int = 0
    level: int = 0
    reference_points: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        for name in ("points", "triangles", "triangle_regions", "quads", "quad_layers", "center"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.reference_points is None:
            object.__setattr__(self, "reference_points", self.points)

    @property
    def n_vertices(self) -> int:
        return len(self.points)

    @property
    def vertex_ids(self) -> np.ndarray:
        return self.level * self.n_vertices + np.arange(self.n_vertices)

    def annulus_quads(self) -> List[AnnulusQuad]:
        return [
            AnnulusQuad(*(int(v) for v in q), Region(int(layer)))
            for q, layer in zip(self.quads, self.quad_layers)
        ]

    def rotating_mask(self) -> np.ndarray:
        """Vertices that follow the body rotation."""
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.triangles[self.triangle_regions == Region.ROTATING].ravel()] = True
        mask[self.quads[self.quad_layers == Region.BUFFER].ravel()] = True
        if self.annulus is not None:
            mask[self.annulus.inner] = True
            mask[self.annulus.mid] = True
            mask[self.annulus.outer] = False
        return mask

    def with_points(self, points: np.ndarray, level: Optional[int] = None) -> "SpatialMesh":
        return replace(
            self,
            points=points,
            level=self.level if level is None else level,
            reference_points=self.reference_points,
        )

    def with_sliding_offset(self, offset: int) -> "SpatialMesh":
        return replace(self, sliding_offset=int(offset), reference_points=self.reference_points)


@dataclass
class Violation:
    kind: str
    detail: str


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    def add(self, kind: str, detail: str) -> None:
        self.violations.append(Violation(kind, detail))

    def kinds(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for v in self.violations:
            counts[v.kind] = counts.get(v.kind, 0) + 1
        return counts

    def summary(self) -> str:
        if not self.violations:
            return "no violations"
        return ", ".join(f"{k} x{n}" for k, n in sorted(self.kinds().items()))

    def __bool__(self) -> bool:
        return bool(self.violations)

    def __len__(self) -> int:
        return len(self.violations)


def chainsaw_violations(sequence: Sequence[int]) -> List[Tuple[int, int, int]]:
    """Cyclic windows (a, b, c) that are monotone increasing or decreasing."""
    n = len(sequence)
    bad = []
    for i in range(n):
        a, b, c = sequence[i], sequence[(i + 1) % n], sequence[(i + 2) % n]
        if (a < b < c) or (a > b > c):
            bad.append((a, b, c))
    return bad


def is_chainsaw(sequence: Sequence[int]) -> bool:
    return not chainsaw_violations(sequence)


def assign_chainsaw_ids(ring_size: int, id_pool: Sequence[int]) -> Tuple[int, ...]:
    """
    Number a ring so that no three neighbours are monotone.

    The sorted pool is split into a lower and an upper half which are then
    interleaved: low, high, low, high, ...

    Args:
        ring_size: Number of ring vertices, must be even.
        id_pool: Identifiers to distribute, exactly ``ring_size`` of them.

    Returns:
        Cyclic identifier sequence in ring order.
    """
    if ring_size % 2 != 0:
        raise MeshError(f"chainsaw numbering needs an even ring size, got {ring_size}")
    if len(id_pool) != ring_size:
        raise MeshError(f"id pool holds {len(id_pool)} ids for a ring of {ring_size}")
    pool = sorted(int(i) for i in id_pool)
    half = ring_size // 2
    out: List[int] = []
    for low, high in zip(pool[:half], pool[half:]):
        out.extend((low, high))
    return tuple(out)


def _ring_points(center, radius: float, n: int, start_angle: float) -> np.ndarray:
    angles = start_angle + 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)])


def _annulus_quads(annulus: AnnulusTopology) -> Tuple[np.ndarray, np.ndarray]:
    n = annulus.n_quads
    k = np.arange(n)
    kp = (k + 1) % n
    c, a, b = annulus.inner, annulus.mid, annulus.outer
    buffer = np.column_stack([c[kp], c[k], a[k], a[kp]])
    sliding = np.column_stack([a[kp], a[k], b[k], b[kp]])
    quads = np.vstack([buffer, sliding])
    layers = np.concatenate([np.full(n, Region.BUFFER), np.full(n, Region.SLIDING)])
    return quads, layers


def build_annulus_mesh(
    center: Sequence[float],
    r_rotating: float,
    r_mid: Optional[float],
    r_outer: float,
    n_quads: int,
    start_angle: float = 0.0,
) -> Tuple[SpatialMesh, RingOrdering, RingOrdering]:
    """
    Build the buffer and sliding layers of a sliding-mesh annulus.

    Args:
        center: Rotation centre.
        r_rotating: Radius of the circle shared with the rotating mesh.
        r_mid: Radius separating buffer and sliding layer; None picks the midline.
        r_outer: Radius of the circle shared with the static mesh.
        n_quads: Quads per layer, even and at least 6.

    Returns:
        (mesh fragment holding only quads, inner ring ordering, outer ring ordering)
    """
    if r_mid is None:
        r_mid = 0.5 * (r_rotating + r_outer)
    if not (0.0 < r_rotating < r_mid < r_outer):
        raise MeshError(
            f"annulus radii must increase strictly: {r_rotating}, {r_mid}, {r_outer}"
        )
    if n_quads % 2 != 0 or n_quads < 6:
        raise MeshError(f"annulus needs an even number of at least 6 quads, got {n_quads}")

    center = np.asarray(center, dtype=float)
    n = n_quads
    inner_ids = np.array(assign_chainsaw_ids(n, range(0, n)))
    mid_ids = np.arange(n, 2 * n)
    outer_ids = np.array(assign_chainsaw_ids(n, range(2 * n, 3 * n)))

    points = np.empty((3 * n, 2))
    points[inner_ids] = _ring_points(center, r_rotating, n, start_angle)
    points[mid_ids] = _ring_points(center, r_mid, n, start_angle)
    points[outer_ids] = _ring_points(center, r_outer, n, start_angle)

    annulus = AnnulusTopology(inner_ids, mid_ids, outer_ids)
    quads, layers = _annulus_quads(annulus)
    mesh = SpatialMesh(
        points=points,
        triangles=np.empty((0, 3), dtype=int),
        triangle_regions=np.empty(0, dtype=int),
        quads=quads,
        quad_layers=layers,
        center=center,
        annulus=annulus,
    )
    inner_ring, outer_ring = annulus.rings()
    return mesh, inner_ring, outer_ring


def _strip_triangles(lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    n = len(lower)
    k = np.arange(n)
    kp = (k + 1) % n
    return np.vstack(
        [
            np.column_stack([lower[kp], lower[k], upper[kp]]),
            np.column_stack([lower[k], upper[k], upper[kp]]),
        ]
    )


def build_mixed_mesh(
    center: Sequence[float],
    r_body: float,
    r_rotating: float,
    r_mid: Optional[float],
    r_outer: float,
    r_far: float,
    n_quads: int,
    n_rotating_layers: int = 2,
    n_static_layers: int = 2,
    start_angle: float = 0.0,
) -> SpatialMesh:
    """
    Structured mixed mesh: body hole, rotating rings, annulus, static rings.

    Identifiers are layered so that rotating interior < inner circle < mid
    circle < outer circle < static interior.
    """
    if not (0.0 < r_body < r_rotating) or not (r_outer < r_far):
        raise MeshError("radii must satisfy 0 < r_body < r_rotating and r_outer < r_far")
    if n_rotating_layers < 1 or n_static_layers < 1:
        raise MeshError("need at least one rotating and one static layer")
    fragment, _, _ = build_annulus_mesh(center, r_rotating, r_mid, r_outer, n_quads, start_angle)
    center = fragment.center
    n = n_quads

    rot_radii = np.linspace(r_body, r_rotating, n_rotating_layers + 1)[:-1]
    static_radii = np.linspace(r_outer, r_far, n_static_layers + 1)[1:]
    n_rot = len(rot_radii) * n
    n_ann = 3 * n
    n_total = n_rot + n_ann + len(static_radii) * n

    points = np.empty((n_total, 2))
    rot_rings = []
    for j, r in enumerate(rot_radii):
        ids = np.arange(j * n, (j + 1) * n)
        points[ids] = _ring_points(center, r, n, start_angle)
        rot_rings.append(ids)
    points[n_rot:n_rot + n_ann] = fragment.points
    annulus = AnnulusTopology(
        fragment.annulus.inner + n_rot, fragment.annulus.mid + n_rot, fragment.annulus.outer + n_rot
    )
    static_rings = []
    for j, r in enumerate(static_radii):
        ids = np.arange(n_rot + n_ann + j * n, n_rot + n_ann + (j + 1) * n)
        points[ids] = _ring_points(center, r, n, start_angle)
        static_rings.append(ids)

    rotating = [_strip_triangles(lo, hi) for lo, hi in zip(rot_rings, rot_rings[1:] + [annulus.inner])]
    static = [
        _strip_triangles(lo, hi) for lo, hi in zip([annulus.outer] + static_rings[:-1], static_rings)
    ]
    rot_tris = np.vstack(rotating)
    static_tris = np.vstack(static)
    quads, layers = _annulus_quads(annulus)
    mesh = SpatialMesh(
        points=points,
        triangles=np.vstack([rot_tris, static_tris]),
        triangle_regions=np.concatenate(
            [np.full(len(rot_tris), Region.ROTATING), np.full(len(static_tris), Region.STATIC)]
        ),
        quads=quads,
        quad_layers=layers,
        center=center,
        annulus=annulus,
    )
    logger.info(
        "built mixed mesh: %d vertices, %d triangles, %d annulus quads",
        mesh.n_vertices, len(mesh.triangles), len(quads),
    )
    return mesh


def build_box_mesh(
    x_range: Tuple[float, float],
    y_range: Tuple[float, float],
    nx: int,
    ny: int,
    body_box: Tuple[float, float, float, float],
) -> SpatialMesh:
    """
    Structured rectangle with a rectangular body hole and no annulus.

    Args:
        x_range, y_range: Domain extent.
        nx, ny: Grid cells per direction.
        body_box: (xmin, xmax, ymin, ymax) of the hole; edges must lie on grid lines.
    """
    xs = np.linspace(x_range[0], x_range[1], nx + 1)
    ys = np.linspace(y_range[0], y_range[1], ny + 1)
    tol = 1e-9 * max(x_range[1] - x_range[0], y_range[1] - y_range[0])
    bx0, bx1, by0, by1 = body_box
    for value, grid in ((bx0, xs), (bx1, xs), (by0, ys), (by1, ys)):
        if np.min(np.abs(grid - value)) > tol:
            raise MeshError(f"body box edge {value} is not on a grid line")

    index = -np.ones((nx + 1, ny + 1), dtype=int)
    cells = []
    for i in range(nx):
        for j in range(ny):
            cx, cy = 0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])
            if bx0 < cx < bx1 and by0 < cy < by1:
                continue
            cells.append((i, j))
    for i, j in cells:
        for di in (0, 1):
            for dj in (0, 1):
                if index[i + di, j + dj] < 0:
                    index[i + di, j + dj] = 0
    used = np.argwhere(index >= 0)
    for n_id, (i, j) in enumerate(used):
        index[i, j] = n_id
    points = np.column_stack([xs[used[:, 0]], ys[used[:, 1]]])

    tris = []
    for i, j in cells:
        p00, p10 = index[i, j], index[i + 1, j]
        p11, p01 = index[i + 1, j + 1], index[i, j + 1]
        tris.append((p00, p10, p11))
        tris.append((p00, p11, p01))
    tris = np.array(tris, dtype=int)
    return SpatialMesh(
        points=points,
        triangles=tris,
        triangle_regions=np.full(len(tris), Region.STATIC),
        quads=np.empty((0, 4), dtype=int),
        quad_layers=np.empty(0, dtype=int),
        center=np.array([0.5 * (bx0 + bx1), 0.5 * (by0 + by1)]),
    )


def sliding_triangles(annulus: AnnulusTopology, offset: int) -> np.ndarray:
    """
    Sliding-layer triangles for offset s: mid vertex k joins outer k+s and k+s+1.

    Offset 0 is the n2-n4 cut of the constructed quads.
    """
    n = annulus.n_quads
    k = np.arange(n)
    a, b = annulus.mid, annulus.outer
    a_k, a_kp = a[k], a[(k + 1) % n]
    b_s, b_s1 = b[(k + offset) % n], b[(k + offset + 1) % n]
    return np.vstack([np.column_stack([a_k, b_s, b_s1]), np.column_stack([a_kp, a_k, b_s1])])


def triangulate(mesh: SpatialMesh) -> Tuple[np.ndarray, np.ndarray]:
    """All spatial triangles of the mesh with their region tags."""
    parts = [mesh.triangles]
    regions = [mesh.triangle_regions]
    buffer = mesh.quads[mesh.quad_layers == Region.BUFFER]
    if len(buffer):
        parts.append(buffer[:, [0, 1, 3]])
        parts.append(buffer[:, [1, 2, 3]])
        regions.append(np.full(2 * len(buffer), Region.BUFFER))
    if mesh.annulus is not None:
        slide = sliding_triangles(mesh.annulus, mesh.sliding_offset)
        parts.append(slide)
        regions.append(np.full(len(slide), Region.SLIDING))
    return np.vstack(parts).astype(int), np.concatenate(regions).astype(int)


def boundary_loops(mesh: SpatialMesh) -> List[np.ndarray]:
    """Closed boundary loops, each traversed with the mesh on its left."""
    tris, _ = triangulate(mesh)
    directed = set()
    for t in tris:
        for i in range(3):
            directed.add((int(t[i]), int(t[(i + 1) % 3])))
    nxt: Dict[int, int] = {}
    for u, v in directed:
        if (v, u) not in directed:
            if u in nxt:
                raise MeshError(f"non-manifold boundary at vertex {u}")
            nxt[u] = v
    loops = []
    while nxt:
        start = min(nxt)
        loop = [start]
        v = nxt.pop(start)
        while v != start:
            loop.append(v)
            if v not in nxt:
                raise MeshError(f"open boundary chain at vertex {v}")
            v = nxt.pop(v)
        loops.append(np.array(loop))
    return loops


def body_boundary(mesh: SpatialMesh) -> np.ndarray:
    """Body polygon as an anticlockwise loop of vertex numbers."""
    for loop in boundary_loops(mesh):
        poly = mesh.points[loop]
        # hole loops run clockwise when the mesh is on their left
        if polygon_area(poly) < 0.0 and _contains(poly, mesh.center):
            return loop[::-1].copy()
    raise MeshError("no boundary loop encloses the body centre")


def _contains(poly: np.ndarray, p: np.ndarray) -> bool:
    inside = False
    n = len(poly)
    for i in range(n):
        (x1, y1), (x2, y2) = poly[i], poly[(i + 1) % n]
        if (y1 > p[1]) != (y2 > p[1]):
            x = x1 + (p[1] - y1) * (x2 - x1) / (y2 - y1)
            if x > p[0]:
                inside = not inside
    return inside


def sliding_quality(mesh: SpatialMesh) -> float:
    """Minimum triangle quality over the sliding layer."""
    if mesh.annulus is None:
        raise MeshError("mesh has no annulus")
    tris = sliding_triangles(mesh.annulus, mesh.sliding_offset)
    return float(np.min(triangle_quality(mesh.points[tris])))


def validate_spatial_mesh(mesh: SpatialMesh) -> ValidationReport:
    """
    Check the spatial mesh invariants.

    Triangle areas are checked on the current coordinates; the quad vertex
    convention is checked on the reference coordinates, because sliding quads
    stop being elements once the inner ring has moved.
    """
    report = ValidationReport()
    nv = mesh.n_vertices
    elements = [mesh.triangles.ravel(), mesh.quads.ravel()]
    if mesh.annulus is not None:
        elements += [mesh.annulus.inner, mesh.annulus.mid, mesh.annulus.outer]
    refs = np.concatenate([np.asarray(e, dtype=int) for e in elements]) if elements else np.empty(0)
    dangling = refs[(refs < 0) | (refs >= nv)]
    for v in np.unique(dangling):
        report.add("dangling_vertex", f"element references missing vertex {int(v)}")
    if len(dangling):
        return report

    if nv:
        diag = float(np.linalg.norm(np.ptp(mesh.points, axis=0)))
        pairs = cKDTree(mesh.points).query_pairs(r=max(1e-12 * diag, 0.0))
        for i, j in sorted(pairs):
            report.add("duplicate_vertex", f"vertices {i} and {j} coincide")

    tris, _ = triangulate(mesh)
    areas = signed_areas(mesh.points, tris) if len(tris) else np.empty(0)
    for idx in np.flatnonzero(areas <= 0.0):
        report.add("non_positive_area", f"triangle {tuple(int(v) for v in tris[idx])} area {areas[idx]:.3e}")

    n_buffer = int(np.sum(mesh.quad_layers == Region.BUFFER))
    n_sliding = int(np.sum(mesh.quad_layers == Region.SLIDING))
    if n_buffer % 2 != 0 or n_buffer != n_sliding:
        report.add("layer_count", f"{n_buffer} buffer quads vs {n_sliding} sliding quads")

    ref = mesh.reference_points
    c = mesh.center
    for q in mesh.annulus_quads():
        r = np.linalg.norm(ref[[q.n1, q.n2, q.n3, q.n4]] - c, axis=1)
        if max(r[0], r[1]) >= min(r[2], r[3]):
            report.add("quad_radius_order", f"quad {q[:4]} inner vertices not closer to centre")
        d1, d2 = ref[q.n1] - c, ref[q.n2] - c
        if d1[0] * d2[1] - d1[1] * d2[0] >= 0.0:
            report.add("quad_orientation", f"quad {q[:4]}: n1, n2 not clockwise")
        if polygon_area(ref[[q.n1, q.n2, q.n3, q.n4]]) <= 0.0:
            report.add("quad_orientation", f"quad {q[:4]}: not anticlockwise about its centroid")

    if mesh.annulus is not None:
        for ring in mesh.annulus.rings():
            for window in ring.violations():
                report.add("chainsaw", f"{ring.ring} window {window} is monotone")
        ann = mesh.annulus
        if not (ann.inner.max() < ann.mid.min() and ann.mid.max() < ann.outer.min()):
            report.add("ring_layering", "annulus ids must satisfy inner < mid < outer")
    return report
