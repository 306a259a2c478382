"""
Sliding-layer edge swapping.

The sliding layer is triangulated as a strip between the mid circle (a_k, which
rotates) and the outer circle (b_k, fixed). A triangulation is identified by an
integer offset s: mid vertex a_k is joined to outer vertices b_{k+s} and
b_{k+s+1}. Offset 0 is the n2-n4 cut of the constructed quads. Even offsets are
called the primary mesh and odd offsets the secondary mesh.

Two quad meshes carry the current triangulation: quads bounded by the edges
a_k-b_{k+s} (cut by the other family) and quads bounded by a_k-b_{k+s+1}.
Swapping the first family moves the offset to s-1, swapping the second to s+1.
Only the neighbour toward which the mid circle has turned is a candidate.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterator, Optional

import numpy as np

from .errors import MeshError, RotationBoundError
from .geometry import signed_areas
from .mesh_core import SpatialMesh, sliding_triangles

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-12


class MeshFamily(str, Enum):
    PRIMARY = "primary"
    SECONDARY = "secondary"


class SwapDirection(str, Enum):
    PRIMARY_TO_SECONDARY = "primary_to_secondary"
    SECONDARY_TO_PRIMARY = "secondary_to_primary"
    NONE = "none"


def family_of(offset: int) -> MeshFamily:
    return MeshFamily.PRIMARY if offset % 2 == 0 else MeshFamily.SECONDARY


@dataclass(frozen=True)
class AnnulusState:
    n_quads: int
    offset: int = 0
    accumulated_rotation: float = 0.0

    @property
    def angular_pitch(self) -> float:
        return 2.0 * np.pi / self.n_quads

    @property
    def current_mesh(self) -> MeshFamily:
        return family_of(self.offset)

    def diagonal_tags(self) -> np.ndarray:
        """Per sliding quad, the offset of the triangulation it belongs to."""
        return np.full(self.n_quads, self.offset)

    def rotated(self, delta_theta: float) -> "AnnulusState":
        return replace(self, accumulated_rotation=self.accumulated_rotation + delta_theta)


@dataclass(frozen=True)
class SwapDecision:
    swap: bool
    direction: SwapDirection
    length_primary: float
    length_secondary: float
    target_offset: int


@dataclass(frozen=True)
class RepresentativeDiagonals:
    primary: float
    secondary: float
    candidate_offset: int

    def __iter__(self) -> Iterator[float]:
        yield self.primary
        yield self.secondary


def quad_diagonals(points: np.ndarray, quad) -> tuple:
    """Lengths of the n2-n4 and n1-n3 diagonals of a quad (n1, n2, n3, n4, ...)."""
    n1, n2, n3, n4 = (int(v) for v in quad[:4])
    return (
        float(np.linalg.norm(points[n2] - points[n4])),
        float(np.linalg.norm(points[n1] - points[n3])),
    )


def _edge_length(mesh: SpatialMesh, k: int, m: int) -> float:
    ann = mesh.annulus
    n = ann.n_quads
    return float(np.linalg.norm(mesh.points[ann.mid[k % n]] - mesh.points[ann.outer[(k + m) % n]]))


def representative_diagonals(mesh: SpatialMesh, state: AnnulusState) -> RepresentativeDiagonals:
    """
    Diagonal lengths of the current mesh and its candidate neighbour, taken on quad 0.

    Each length is the edge that distinguishes the mesh from the other one.
    The candidate is s-1 when a_0 is closer to b_s than to b_{s+1}, else s+1.
    """
    if mesh.annulus is None:
        raise MeshError("mesh has no annulus")
    s = state.offset
    if _edge_length(mesh, 0, s) < _edge_length(mesh, 0, s + 1):
        candidate = s - 1
        current_len, candidate_len = _edge_length(mesh, 0, s + 1), _edge_length(mesh, 0, s - 1)
    else:
        candidate = s + 1
        current_len, candidate_len = _edge_length(mesh, 0, s), _edge_length(mesh, 0, s + 2)
    if current_len <= 0.0 or candidate_len <= 0.0:
        raise MeshError("degenerate sliding-layer diagonal")
    if logger.isEnabledFor(logging.DEBUG) and not diagonals_are_uniform(mesh, state):
        logger.debug("sliding quads are not congruent; quad 0 may not be representative")
    if state.current_mesh is MeshFamily.PRIMARY:
        return RepresentativeDiagonals(current_len, candidate_len, candidate)
    return RepresentativeDiagonals(candidate_len, current_len, candidate)


def diagonals_are_uniform(mesh: SpatialMesh, state: AnnulusState, tol: float = 1e-9) -> bool:
    s = state.offset
    lengths = np.array(
        [[_edge_length(mesh, k, m) for m in (s - 1, s, s + 1, s + 2)] for k in range(mesh.annulus.n_quads)]
    )
    scale = float(lengths.max())
    return bool(np.all(np.abs(lengths - lengths[0]) <= tol * scale))


def decide_swap(
    state: AnnulusState,
    length_primary: float,
    length_secondary: float,
    candidate_offset: Optional[int] = None,
) -> SwapDecision:
    """
    Pick the mesh with the strictly shorter diagonal; ties keep the current mesh.

    ``candidate_offset`` is the neighbour offset reported by
    ``representative_diagonals``; it defaults to s-1.
    """
    if length_primary <= 0.0 or length_secondary <= 0.0:
        raise ValueError("diagonal lengths must be positive")
    target = state.offset - 1 if candidate_offset is None else candidate_offset
    scale = max(length_primary, length_secondary)
    tie = abs(length_primary - length_secondary) <= TIE_TOLERANCE * scale
    if state.current_mesh is MeshFamily.PRIMARY:
        swap = not tie and length_secondary < length_primary
        direction = SwapDirection.PRIMARY_TO_SECONDARY
    else:
        swap = not tie and length_primary < length_secondary
        direction = SwapDirection.SECONDARY_TO_PRIMARY
    if not swap:
        return SwapDecision(False, SwapDirection.NONE, length_primary, length_secondary, state.offset)
    return SwapDecision(True, direction, length_primary, length_secondary, target)


def apply_swap(
    state: AnnulusState, decision: SwapDecision, mesh: Optional[SpatialMesh] = None
) -> AnnulusState:
    """
    Flip every sliding quad of the swapped family; the buffer layer is untouched.

    When ``mesh`` is given the new sliding triangles are checked for positive area.
    """
    if not decision.swap:
        return state
    new_state = replace(state, offset=decision.target_offset)
    if mesh is not None:
        tris = sliding_triangles(mesh.annulus, new_state.offset)
        areas = signed_areas(mesh.points, tris)
        if np.any(areas <= 0.0):
            raise MeshError(
                "swap produced a non-positive sliding triangle; the slab rotation bound was violated"
            )
    logger.debug("sliding layer swapped %s: offset %d -> %d", decision.direction.value, state.offset, new_state.offset)
    return new_state


def check_rotation_bound(delta_theta: float, pitch: float) -> None:
    if abs(delta_theta) >= 0.5 * pitch:
        raise RotationBoundError(delta_theta, pitch)


def update_sliding_layer(mesh: SpatialMesh, state: AnnulusState):
    """Decide and apply the swap for a mesh at the new level; returns (mesh, state, decision)."""
    diagonals = representative_diagonals(mesh, state)
    decision = decide_swap(state, diagonals.primary, diagonals.secondary, diagonals.candidate_offset)
    new_state = apply_swap(state, decision, mesh)
    return mesh.with_sliding_offset(new_state.offset), new_state, decision
