"""
Tetrahedralization of annulus blocks in slabs where the sliding layer swapped.

When the sliding-layer diagonals change between two time levels the sliding
quads no longer extrude to prisms. The annulus is then processed in blocks of
2 x 2 quads: two buffer quads over two sliding quads, anchored at an even
ring position. A block has nine spatial vertices, labelled

    c0 c1 c2   inner circle (moves with the body)
    a0 a1 a2   mid circle (moves with the body)
    b0 b1 b2   outer circle (static)

and eighteen space-time vertices: label L at the lower level, L + 9 at the
upper level. The cut of every block side that is shared with a neighbour is
fixed by the smallest-identifier rule, which only depends on the chainsaw
parity of the inner and outer circle. The four sides inside the block are
free and chosen by the search together with one decomposition per
hexahedron.

There are four boundary patterns, one per configuration:

    1  lower-family flip from an even offset (outer circle b0 low)
    2  lower-family flip from an odd offset  (outer circle b0 high)
    3  upper-family flip from an even offset (outer circle b0 high)
    4  upper-family flip from an odd offset  (outer circle b0 low)

Their connectivity is derived once, on a reference block, and reused for
every block of every swap slab.
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BlockDerivationError, MeshError
from .geometry import polygon_area, simpson, tet_signed_volumes, twist_correction
from .mesh_core import AnnulusTopology, Region
from .prism import Tet, cut_prism
from .sliding import MeshFamily, SwapDirection, family_of

logger = logging.getLogger(__name__)

N_LABELS = 9
C = (0, 1, 2)
A = (3, 4, 5)
B = (6, 7, 8)
LABEL_NAMES = ("c0", "c1", "c2", "a0", "a1", "a2", "b0", "b1", "b2")
BOUNDARY_LOOP = (2, 1, 0, 3, 6, 7, 8, 5)

FIXED_SIDES = ((0, 1), (1, 2), (6, 7), (7, 8), (0, 3), (2, 5), (3, 6), (5, 8))
FREE_SIDES = ((3, 4), (4, 5), (1, 4), (4, 7))

Edge = FrozenSet[int]


class FlipFamily(str, Enum):
    LOWER = "lower"
    UPPER = "upper"
    NONE = "none"


class Agreement(str, Enum):
    AGREE = "agree"
    OPPOSITE = "opposite"


CONFIGURATIONS: Dict[int, Tuple[SwapDirection, Agreement]] = {
    1: (SwapDirection.PRIMARY_TO_SECONDARY, Agreement.AGREE),
    2: (SwapDirection.SECONDARY_TO_PRIMARY, Agreement.AGREE),
    3: (SwapDirection.PRIMARY_TO_SECONDARY, Agreement.OPPOSITE),
    4: (SwapDirection.SECONDARY_TO_PRIMARY, Agreement.OPPOSITE),
}

# configuration -> (flip family, outer circle b0 is the low id of its pair)
CONFIGURATION_PATTERNS: Dict[int, Tuple[FlipFamily, bool]] = {
    1: (FlipFamily.LOWER, True),
    2: (FlipFamily.LOWER, False),
    3: (FlipFamily.UPPER, False),
    4: (FlipFamily.UPPER, True),
}

# mid-circle shift (in pitches) at the two levels of the reference block
_REFERENCE_SHIFT = {
    FlipFamily.LOWER: (0.1, -0.35),
    FlipFamily.UPPER: (-0.1, 0.35),
    FlipFamily.NONE: (0.1, 0.3),
}


@dataclass(frozen=True)
class Hexahedron:
    """A quad extruded over the slab; ``loop`` runs anticlockwise."""

    loop: Tuple[int, int, int, int]
    bottom_diagonal: Tuple[int, int]
    top_diagonal: Tuple[int, int]
    region: Region


@dataclass(frozen=True, eq=False)
class Block:
    coords: np.ndarray
    ranks: Tuple[int, ...]
    hexes: Tuple[Hexahedron, ...]
    flip: FlipFamily

    def rank_orientation(self, u: int, v: int) -> Tuple[int, int]:
        return (u, v) if self.ranks[u] < self.ranks[v] else (v, u)

    def fixed_orientation(self) -> Dict[Edge, Tuple[int, int]]:
        return {frozenset(e): self.rank_orientation(*e) for e in FIXED_SIDES}

    def rank_ids(self) -> np.ndarray:
        """Space-time identifiers implied by the ranks, for comparisons with cut_prism."""
        ranks = np.asarray(self.ranks)
        return np.concatenate([ranks, ranks + N_LABELS])


@dataclass(frozen=True, eq=False)
class BlockConnectivity:
    configuration: int
    tets: np.ndarray
    regions: np.ndarray
    orientation: Dict[Edge, Tuple[int, int]]
    cuts: Tuple[str, ...]

    def free_sides(self) -> List[Tuple[int, int]]:
        return [self.orientation[frozenset(e)] for e in FREE_SIDES]


def select_configuration(direction: SwapDirection, agreement: Agreement) -> int:
    """Index of the cached connectivity set for a swap slab."""
    if direction is SwapDirection.NONE:
        raise ValueError("no swap occurred; extrude the annulus with plain prism cuts")
    for index, key in CONFIGURATIONS.items():
        if key == (SwapDirection(direction), Agreement(agreement)):
            return index
    raise ValueError(f"unknown swap key {direction!r}, {agreement!r}")


def configuration_for_offsets(before: int, after: int) -> int:
    if after == before - 1:
        agreement = Agreement.AGREE
    elif after == before + 1:
        agreement = Agreement.OPPOSITE
    else:
        raise MeshError(f"sliding offset may change by one per slab, got {before} -> {after}")
    direction = (
        SwapDirection.PRIMARY_TO_SECONDARY
        if family_of(before) is MeshFamily.PRIMARY
        else SwapDirection.SECONDARY_TO_PRIMARY
    )
    return select_configuration(direction, agreement)


def _sliding_diagonals(flip: FlipFamily, j: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    low, high = (A[j], B[j + 1]), (A[j + 1], B[j])
    if flip is FlipFamily.LOWER:
        return low, high
    if flip is FlipFamily.UPPER:
        return high, low
    return low, low


def reference_block(flip: FlipFamily, b_low_first: bool) -> Block:
    """
    Straightened block used for the derivation.

    The circles become rows (inner at y = 2, outer at y = 0) with unit pitch in
    x, which keeps the anticlockwise sense of the annulus. The inner and mid
    rows shift by u(t), linear between the two levels; the outer row is fixed.
    """
    u0, u1 = _REFERENCE_SHIFT[FlipFamily(flip)]
    coords = np.empty((2 * N_LABELS, 3))
    for level, (t, u) in enumerate(((0.0, u0), (1.0, u1))):
        for j in range(3):
            coords[level * N_LABELS + C[j]] = (t, j + u, 2.0)
            coords[level * N_LABELS + A[j]] = (t, j + u, 1.0)
            coords[level * N_LABELS + B[j]] = (t, float(j), 0.0)
    b_ranks = (6, 8, 7) if b_low_first else (7, 6, 8)
    ranks = (0, 2, 1, 3, 4, 5) + b_ranks
    hexes = [
        Hexahedron((C[1], C[0], A[0], A[1]), (C[0], A[1]), (C[0], A[1]), Region.BUFFER),
        Hexahedron((C[2], C[1], A[1], A[2]), (C[1], A[2]), (C[1], A[2]), Region.BUFFER),
    ]
    for j in range(2):
        bottom, top = _sliding_diagonals(FlipFamily(flip), j)
        hexes.append(Hexahedron((A[j + 1], A[j], B[j], B[j + 1]), bottom, top, Region.SLIDING))
    return Block(coords=coords, ranks=ranks, hexes=tuple(hexes), flip=FlipFamily(flip))


def _split_quad(loop: Sequence[int], diagonal: Tuple[int, int]) -> List[Tuple[int, int, int]]:
    i = loop.index(diagonal[0])
    if loop[(i + 2) % 4] != diagonal[1]:
        raise MeshError(f"{diagonal} is not a diagonal of quad {tuple(loop)}")
    p = [loop[(i + k) % 4] for k in range(4)]
    return [(p[0], p[1], p[2]), (p[2], p[3], p[0])]


def hex_faces(hexa: Hexahedron, orientation: Dict[Edge, Tuple[int, int]]) -> List[Tuple[set, list]]:
    """
    Boundary faces of a hexahedron as (corner labels, outward triangles).

    Outward triangles run anticlockwise seen from outside, so a tetrahedron
    (w, p, q, r) over an outward triangle (p, q, r) is positive for an
    interior apex w.
    """
    n = N_LABELS
    loop = hexa.loop
    faces = []
    bottom = _split_quad(loop, hexa.bottom_diagonal)
    faces.append(({v for v in loop}, [(p, r, q) for p, q, r in bottom]))
    top = _split_quad(loop, hexa.top_diagonal)
    faces.append(({v + n for v in loop}, [(p + n, q + n, r + n) for p, q, r in top]))
    for i in range(4):
        p, q = loop[i], loop[(i + 1) % 4]
        src, _ = orientation[frozenset((p, q))]
        if src == p:
            tris = [(p, q, q + n), (p, q + n, p + n)]
        else:
            tris = [(p, q, p + n), (q, q + n, p + n)]
        faces.append(({p, q, p + n, q + n}, tris))
    return faces


def _cone(hexa: Hexahedron, orientation, apex: int) -> Optional[List[Tet]]:
    tets = []
    for corners, tris in hex_faces(hexa, orientation):
        if apex in corners:
            if any(apex not in tri for tri in tris):
                return None
            continue
        tets.extend((apex,) + tri for tri in tris)
    return tets


def _prism_splits(hexa: Hexahedron, orientation, ranks) -> Iterator[Tuple[str, List[Tet]]]:
    if set(hexa.bottom_diagonal) != set(hexa.top_diagonal):
        return
    d = hexa.bottom_diagonal
    first = d if ranks[d[0]] < ranks[d[1]] else (d[1], d[0])
    for src, dst in (first, (first[1], first[0])):
        sides = dict(orientation)
        sides[frozenset(d)] = (src, dst)

        def from_u(u: int, v: int) -> bool:
            return sides[frozenset((u, v))][0] == u

        tets: List[Tet] = []
        try:
            for tri in _split_quad(hexa.loop, d):
                tets.extend(cut_prism(tri, tuple(v + N_LABELS for v in tri), from_u))
        except MeshError:
            continue
        yield f"prisms {LABEL_NAMES[src]}>{LABEL_NAMES[dst]}", tets


def _candidates(hexa: Hexahedron, orientation, ranks) -> Iterator[Tuple[str, List[Tet]]]:
    yield from _prism_splits(hexa, orientation, ranks)
    for level, suffix in ((0, "n"), (1, "n+1")):
        for v in sorted(hexa.loop):
            tets = _cone(hexa, orientation, v + level * N_LABELS)
            if tets is not None:
                yield f"cone {LABEL_NAMES[v]}^{suffix}", tets


def _all_positive(coords: np.ndarray, tets: List[Tet], tol: float = 1e-9) -> bool:
    return bool(np.all(tet_signed_volumes(coords, np.array(tets, dtype=int)) > tol))


def derive_block_connectivity(block: Block, configuration: int = 0) -> BlockConnectivity:
    """
    Exhaustive search for a conforming tetrahedralization of one block.

    The free sides are tried with the smallest-identifier orientation first;
    per hexahedron a split into two prisms is tried before cones. The first
    assignment for which every hexahedron has a positive decomposition wins.

    Raises:
        BlockDerivationError: no assignment admits a decomposition.
    """
    fixed = block.fixed_orientation()
    for choice in itertools.product((False, True), repeat=len(FREE_SIDES)):
        orientation = dict(fixed)
        for side, flip in zip(FREE_SIDES, choice):
            u, v = block.rank_orientation(*side)
            orientation[frozenset(side)] = (v, u) if flip else (u, v)
        picked = []
        for hexa in block.hexes:
            found = next(
                (
                    (name, tets)
                    for name, tets in _candidates(hexa, orientation, block.ranks)
                    if _all_positive(block.coords, tets)
                ),
                None,
            )
            if found is None:
                break
            picked.append((hexa, found))
        else:
            tets = [t for _, (_, ts) in picked for t in ts]
            regions = [int(h.region) for h, (_, ts) in picked for _ in ts]
            cuts = tuple(name for _, (name, _) in picked)
            logger.debug("block configuration %d: %s", configuration, ", ".join(cuts))
            return BlockConnectivity(
                configuration=configuration,
                tets=np.array(tets, dtype=int),
                regions=np.array(regions, dtype=int),
                orientation=orientation,
                cuts=cuts,
            )
    raise BlockDerivationError(
        f"no admissible tetrahedralization for block pattern {block.flip.value}, ranks {block.ranks}"
    )


def block_volume(block: Block, orientation: Dict[Edge, Tuple[int, int]]) -> float:
    """Volume enclosed by the block boundary: time-integrated area less the side twists."""
    n = N_LABELS
    loop = list(BOUNDARY_LOOP)
    bottom = block.coords[:n, 1:]
    top = block.coords[n:, 1:]
    mid = 0.5 * (bottom + top)
    dt = float(block.coords[n, 0] - block.coords[0, 0])
    volume = simpson(
        polygon_area(bottom[loop]), polygon_area(mid[loop]), polygon_area(top[loop]), dt
    )
    for i in range(len(loop)):
        p, q = loop[i], loop[(i + 1) % len(loop)]
        src, _ = orientation[frozenset((p, q))]
        c = block.coords
        volume -= twist_correction(c[p], c[q], c[p + n], c[q + n], diagonal_from_p=(src == p))
    return volume


def block_vertex_map(annulus: AnnulusTopology, k: int, sigma: int) -> np.ndarray:
    """Spatial vertex numbers of the block at ring position k with outer shift sigma."""
    n = annulus.n_quads
    idx = np.arange(3)
    return np.concatenate(
        [annulus.inner[(k + idx) % n], annulus.mid[(k + idx) % n], annulus.outer[(k + sigma + idx) % n]]
    )


class BlockSetCache:
    """The four block connectivity sets, derived on first use."""

    def __init__(self, sets: Optional[Dict[int, BlockConnectivity]] = None):
        self._sets: Dict[int, BlockConnectivity] = dict(sets or {})

    def get(self, configuration: int) -> BlockConnectivity:
        if configuration not in CONFIGURATION_PATTERNS:
            raise ValueError(f"configuration must be one of 1..4, got {configuration}")
        if configuration not in self._sets:
            flip, b_low = CONFIGURATION_PATTERNS[configuration]
            self._sets[configuration] = derive_block_connectivity(
                reference_block(flip, b_low), configuration
            )
        return self._sets[configuration]

    def derive_all(self) -> "BlockSetCache":
        for configuration in CONFIGURATION_PATTERNS:
            self.get(configuration)
        return self

    def items(self):
        return sorted(self._sets.items())

    def __contains__(self, configuration: int) -> bool:
        return configuration in self._sets


@lru_cache(maxsize=1)
def default_block_sets() -> BlockSetCache:
    return BlockSetCache().derive_all()
