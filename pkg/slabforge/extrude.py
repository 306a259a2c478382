"""
Space-time slabs: extrusion of a spatial mesh between two time levels.

Slab vertices are numbered locally: spatial vertex i is i at the lower level
and i + N_v at the upper level, which is the global numbering shifted by the
lower level. Coordinates are (t, x, y).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .block_cuts import (
    BOUNDARY_LOOP,
    BlockSetCache,
    block_vertex_map,
    configuration_for_offsets,
    default_block_sets,
)
from .errors import ConformityError, MeshError
from .geometry import simpson, tet_signed_volumes
from .mesh_core import SpatialMesh, ValidationReport, boundary_loops, triangulate
from .prism import cut_prism, cuts_census, is_valid_cut
from .sliding import SwapDecision

logger = logging.getLogger(__name__)

FacetKey = Tuple[int, int, int]

# local vertices of the face opposite vertex f
_OPPOSITE_FACES = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])

__all__ = [
    "FacetKind",
    "FacetGeometry",
    "SpaceTimeSlab",
    "ConformityReport",
    "cut_prism",
    "is_valid_cut",
    "cuts_census",
    "extrude_slab",
    "facet_geometry",
    "validate_slab",
]


class FacetKind(str, Enum):
    BOTTOM = "bottom"
    TOP = "top"
    LATERAL = "lateral"
    INTERIOR = "interior"


@dataclass(frozen=True)
class FacetGeometry:
    n_t: float
    n: np.ndarray
    area: float
    centroid: np.ndarray


class ConformityReport(ValidationReport):
    """Violations found by ``validate_slab``; empty when the slab conforms."""


@dataclass(eq=False)
class SpaceTimeSlab:
    coords: np.ndarray
    tets: np.ndarray
    regions: np.ndarray
    t0: float
    t1: float
    n_vertices: int
    bottom_triangles: np.ndarray
    top_triangles: np.ndarray
    boundary_edges: FrozenSet[FrozenSet[int]] = frozenset()
    columns: Tuple[Tuple[int, ...], ...] = ()
    column_of: Optional[np.ndarray] = None
    level: int = 0
    configuration: Optional[int] = None

    @property
    def n_tets(self) -> int:
        return len(self.tets)

    @property
    def swapped(self) -> bool:
        return self.configuration is not None

    def global_ids(self) -> np.ndarray:
        return self.level * self.n_vertices + np.arange(2 * self.n_vertices)

    def volumes(self) -> np.ndarray:
        return tet_signed_volumes(self.coords, self.tets)

    @cached_property
    def facets(self) -> Dict[FacetKey, List[Tuple[int, int]]]:
        """Sorted vertex triple -> list of (tet, local face index)."""
        table: Dict[FacetKey, List[Tuple[int, int]]] = {}
        faces = np.sort(self.tets[:, _OPPOSITE_FACES], axis=2).reshape(-1, 3)
        for k, key in enumerate(map(tuple, faces.tolist())):
            table.setdefault(key, []).append(divmod(k, 4))
        return table

    def facet_kind(self, key: Sequence[int]) -> FacetKind:
        nv = self.n_vertices
        if all(v < nv for v in key):
            return FacetKind.BOTTOM
        if all(v >= nv for v in key):
            return FacetKind.TOP
        spatial = frozenset(v % nv for v in key)
        if len(spatial) == 2 and spatial in self.boundary_edges:
            return FacetKind.LATERAL
        return FacetKind.INTERIOR

    def facet_geometry(self, tet: int, face: int) -> FacetGeometry:
        return facet_geometry(self.coords[self.tets[tet]], face)


def facet_geometry(tet_coords: np.ndarray, face_index: int) -> FacetGeometry:
    """
    Outward unit space-time normal of the face opposite vertex ``face_index``.

    Args:
        tet_coords: (4, 3) array of (t, x, y) corners.
        face_index: Vertex the face does not contain.

    Raises:
        MeshError: the face has zero area.
    """
    tet_coords = np.asarray(tet_coords, dtype=float)
    face = [tet_coords[i] for i in range(4) if i != face_index]
    a, b, c = face
    normal = np.cross(b - a, c - a)
    norm = float(np.linalg.norm(normal))
    if norm == 0.0:
        raise MeshError(f"facet {face_index} of the tetrahedron has zero area")
    if np.dot(normal, tet_coords[face_index] - a) > 0.0:
        normal = -normal
    normal = normal / norm
    return FacetGeometry(
        n_t=float(normal[0]), n=normal[1:].copy(), area=0.5 * norm, centroid=(a + b + c) / 3.0
    )


def _check_compatible(bottom: SpatialMesh, top: SpatialMesh) -> None:
    if bottom.n_vertices != top.n_vertices:
        raise MeshError(f"meshes differ in vertex count: {bottom.n_vertices} vs {top.n_vertices}")
    if not (
        np.array_equal(bottom.triangles, top.triangles) and np.array_equal(bottom.quads, top.quads)
    ):
        raise MeshError("meshes at the two time levels do not share connectivity")
    if (bottom.annulus is None) != (top.annulus is None):
        raise MeshError("only one of the two meshes carries an annulus")


def _boundary_edges(mesh: SpatialMesh) -> FrozenSet[FrozenSet[int]]:
    edges = set()
    for loop in boundary_loops(mesh):
        for i in range(len(loop)):
            edges.add(frozenset((int(loop[i]), int(loop[(i + 1) % len(loop)]))))
    return frozenset(edges)


def extrude_slab(
    bottom: SpatialMesh,
    top: SpatialMesh,
    t0: float,
    t1: float,
    swap: Optional[SwapDecision] = None,
    block_sets: Optional[BlockSetCache] = None,
    validate: bool = False,
) -> SpaceTimeSlab:
    """
    Build the tetrahedral slab between two spatial meshes.

    Triangles are extruded to prisms and cut by the smallest-identifier rule.
    When the sliding offset changed between the levels the annulus is filled
    block by block with the cached connectivity set of the matching
    configuration instead.

    Args:
        bottom: Mesh at t0.
        top: Mesh at t1, same connectivity apart from the sliding offset.
        swap: Decision that produced ``top``; checked against the offsets.
        block_sets: Connectivity sets; the process-wide default when omitted.
        validate: Raise ConformityError if the result fails validate_slab.
    """
    if not t1 > t0:
        raise ValueError(f"slab end time t1={t1} must exceed t0={t0}")
    _check_compatible(bottom, top)
    nv = bottom.n_vertices
    coords = np.vstack(
        [
            np.column_stack([np.full(nv, float(t0)), bottom.points]),
            np.column_stack([np.full(nv, float(t1)), top.points]),
        ]
    )
    s0, s1 = bottom.sliding_offset, top.sliding_offset
    swapped = s0 != s1
    if swap is not None and swap.swap != swapped:
        raise MeshError(f"swap decision {swap.swap} does not match sliding offsets {s0} -> {s1}")

    tets: List[Sequence[int]] = []
    regions: List[int] = []
    column_of: List[int] = []
    loops: List[Tuple[int, ...]] = []

    def add_prism(tri, region) -> None:
        tri = tuple(int(v) for v in tri)
        for tet in cut_prism(tri, tuple(v + nv for v in tri)):
            tets.append(tet)
            regions.append(int(region))
            column_of.append(len(loops))
        loops.append(tri)

    configuration = None
    if not swapped:
        tris, tri_regions = triangulate(bottom)
        for tri, region in zip(tris, tri_regions):
            add_prism(tri, region)
    else:
        for tri, region in zip(bottom.triangles, bottom.triangle_regions):
            add_prism(tri, region)
        configuration = configuration_for_offsets(s0, s1)
        connectivity = (block_sets or default_block_sets()).get(configuration)
        sigma = s0 if s1 == s0 - 1 else s0 + 1
        annulus = bottom.annulus
        for k in range(0, annulus.n_quads, 2):
            spatial = block_vertex_map(annulus, k, sigma)
            labels = np.concatenate([spatial, spatial + nv])
            tets.extend(labels[connectivity.tets])
            regions.extend(int(r) for r in connectivity.regions)
            column_of.extend([len(loops)] * len(connectivity.tets))
            loops.append(tuple(int(v) for v in spatial[list(BOUNDARY_LOOP)]))

    bottom_tris, _ = triangulate(bottom)
    top_tris, _ = triangulate(top)
    slab = SpaceTimeSlab(
        coords=coords,
        tets=np.array(tets, dtype=int).reshape(-1, 4),
        regions=np.array(regions, dtype=int),
        t0=float(t0),
        t1=float(t1),
        n_vertices=nv,
        bottom_triangles=bottom_tris,
        top_triangles=top_tris,
        boundary_edges=_boundary_edges(bottom),
        columns=tuple(loops),
        column_of=np.array(column_of, dtype=int),
        level=bottom.level,
        configuration=configuration,
    )
    if configuration is not None:
        logger.debug("slab %d: swap %d -> %d, block configuration %d", bottom.level, s0, s1, configuration)
    if validate:
        report = validate_slab(slab)
        if report:
            raise ConformityError(report)
    return slab


def _lateral_from_p(slab: SpaceTimeSlab, p: int, q: int) -> Optional[bool]:
    nv = slab.n_vertices
    if tuple(sorted((p, q, q + nv))) in slab.facets and tuple(sorted((p, q + nv, p + nv))) in slab.facets:
        return True
    if tuple(sorted((p, q, p + nv))) in slab.facets and tuple(sorted((q, q + nv, p + nv))) in slab.facets:
        return False
    return None


def column_volumes(slab: SpaceTimeSlab) -> np.ndarray:
    """
    Volume enclosed by each column's boundary facets.

    The area of every loop is integrated in time with Simpson's rule and the
    twist of every lateral side is subtracted. NaN for a column with a side
    that has no complete pair of facets.
    """
    n_columns = len(slab.columns)
    if not n_columns:
        return np.empty(0)
    nv = slab.n_vertices
    loops = [np.asarray(loop, dtype=int) for loop in slab.columns]
    lengths = np.array([len(loop) for loop in loops])
    p = np.concatenate(loops)
    q = np.concatenate([np.roll(loop, -1) for loop in loops])
    owner = np.repeat(np.arange(n_columns), lengths)
    c = slab.coords
    bottom, top = c[:nv, 1:], c[nv:, 1:]
    # loop coordinates relative to the first bottom vertex of each column
    origin = bottom[np.array([loop[0] for loop in loops])][owner]

    def shoelace(xy: np.ndarray) -> np.ndarray:
        a, b = xy[p] - origin, xy[q] - origin
        cross = a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1]
        return 0.5 * np.bincount(owner, weights=cross, minlength=n_columns)

    volumes = simpson(shoelace(bottom), shoelace(0.5 * (bottom + top)), shoelace(top), slab.t1 - slab.t0)

    from_p = [_lateral_from_p(slab, a, b) for a, b in zip(p.tolist(), q.tolist())]
    complete = np.array([f is not None for f in from_p], dtype=bool)
    sign = np.where([bool(f) for f in from_p], -1.0, 1.0)
    twist = np.linalg.det(np.stack([c[q] - c[p], c[p + nv] - c[p], c[q + nv] - c[p]], axis=1))
    volumes -= np.bincount(owner, weights=np.where(complete, sign * twist / 12.0, 0.0), minlength=n_columns)
    volumes[np.bincount(owner, weights=(~complete).astype(float), minlength=n_columns) > 0] = np.nan
    return volumes


def validate_slab(slab: SpaceTimeSlab, rel_tol: float = 1e-12) -> ConformityReport:
    """
    Check conformity of a slab.

    Reported kinds: steiner_vertex, off_level_vertex, non_positive_volume,
    facet_multiplicity, bottom_mismatch, top_mismatch, missing_boundary_facet
    and volume_identity.
    """
    report = ConformityReport()
    nv = slab.n_vertices
    bad = np.unique(slab.tets[(slab.tets < 0) | (slab.tets >= 2 * nv)])
    for v in bad:
        report.add("steiner_vertex", f"tetrahedron vertex {int(v)} is not a mesh vertex")
    if len(bad):
        return report
    if not (np.all(slab.coords[:nv, 0] == slab.t0) and np.all(slab.coords[nv:, 0] == slab.t1)):
        report.add("off_level_vertex", "vertex time differs from the slab levels")

    volumes = slab.volumes()
    for t in np.flatnonzero(volumes <= 0.0):
        report.add("non_positive_volume", f"tet {int(t)} {tuple(int(v) for v in slab.tets[t])} volume {volumes[t]:.3e}")

    found = {FacetKind.BOTTOM: set(), FacetKind.TOP: set()}
    for key, owners in slab.facets.items():
        kind = slab.facet_kind(key)
        expected = 2 if kind is FacetKind.INTERIOR else 1
        if len(owners) != expected:
            report.add("facet_multiplicity", f"{kind.value} facet {key} owned by {len(owners)} tets")
        if kind in found:
            found[kind].add(key)
    for kind, triangles, shift in (
        (FacetKind.BOTTOM, slab.bottom_triangles, 0),
        (FacetKind.TOP, slab.top_triangles, nv),
    ):
        expected = {tuple(sorted(int(v) + shift for v in tri)) for tri in triangles}
        for key in sorted(expected ^ found[kind]):
            what = "missing" if key in expected else "extra"
            report.add(f"{kind.value}_mismatch", f"{what} facet {key}")

    for edge in sorted(tuple(sorted(e)) for e in slab.boundary_edges):
        if _lateral_from_p(slab, *edge) is None:
            report.add("missing_boundary_facet", f"lateral side of edge {edge}")

    if slab.column_of is not None and len(slab.column_of) == len(slab.tets):
        totals = np.bincount(slab.column_of, weights=volumes, minlength=len(slab.columns))
        scales = np.bincount(slab.column_of, weights=np.abs(volumes), minlength=len(slab.columns))
        expected = column_volumes(slab)
        for c in np.flatnonzero(~np.isnan(expected)):
            expected_volume = expected[c]
            if abs(totals[c] - expected_volume) > rel_tol * max(scales[c], abs(expected_volume)):
                report.add(
                    "volume_identity",
                    f"column {c}: tets {totals[c]:.12g} vs boundary {expected_volume:.12g}",
                )
    if report:
        logger.debug("slab %d failed validation: %s", slab.level, report.summary())
    return report


def total_volume_identity(slab: SpaceTimeSlab) -> Tuple[float, float]:
    """(sum of tet volumes, sum of column volumes) over the whole slab."""
    columns = column_volumes(slab)
    if np.any(np.isnan(columns)):
        raise MeshError("slab has incomplete lateral facets")
    return float(np.sum(slab.volumes())), float(np.sum(columns))
