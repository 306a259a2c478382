"""
Cutting space-time prisms into tetrahedra.

A spatial triangle extruded between two time levels is a prism with three
quadrilateral sides. Each side is cut by one of its two diagonals; a side
between spatial vertices u and v is described by an orientation u -> v, which
means the cut runs from u at the lower level to v at the upper level.
"""

import itertools
from collections import Counter
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .errors import MeshError

Tet = Tuple[int, int, int, int]
Orientation = Callable[[int, int], bool]


def smallest_id_rule(u: int, v: int) -> bool:
    """True when the side u-v is cut from u at the lower level."""
    return u < v


def side_diagonal(bottom_u: int, bottom_v: int, top_u: int, top_v: int) -> Tuple[int, int]:
    """Diagonal of one prism side that starts at the side's smallest identifier."""
    corners = {bottom_u: top_v, bottom_v: top_u, top_u: bottom_v, top_v: bottom_u}
    start = min(corners)
    return start, corners[start]


def staircase(bottom: Sequence[int], top: Sequence[int], order: Sequence[int]) -> List[Tet]:
    """
    Three tetrahedra of a prism whose sides are oriented along ``order``.

    ``order`` lists the positions (0, 1, 2) of the triangle as source, middle
    and sink, so every side is cut from its earlier vertex. All three tets
    share the orientation of the triangle taken in that order.
    """
    s, m, k = order
    return [
        (bottom[s], bottom[m], bottom[k], top[k]),
        (bottom[s], bottom[m], top[k], top[m]),
        (bottom[s], top[s], top[m], top[k]),
    ]


def topological_order(edges: Dict[Tuple[int, int], bool]) -> Tuple[int, int, int]:
    """
    Order positions 0..2 from the side orientations; raises on a cycle.

    ``edges[(i, j)]`` is True when the side between positions i < j is cut from i.
    """
    out_degree = [0, 0, 0]
    for (i, j), from_i in edges.items():
        out_degree[i if from_i else j] += 1
    if sorted(out_degree) != [0, 1, 2]:
        raise MeshError("cyclic side orientation; no valid prism cut exists")
    return tuple(sorted(range(3), key=lambda p: -out_degree[p]))


def cut_prism(
    bottom: Sequence[int], top: Sequence[int], orientation: Optional[Orientation] = None
) -> List[Tet]:
    """
    Cut a prism into three tetrahedra.

    Args:
        bottom: Identifiers (a, b, c) at the lower level.
        top: Identifiers of the same vertices at the upper level.
        orientation: Side orientation on the bottom identifiers; by default
            each side is cut by the diagonal starting at its smallest identifier.

    Returns:
        Three vertex quadruples, positively oriented when (a, b, c) runs
        anticlockwise at both levels.
    """
    if len(set(bottom) | set(top)) != 6:
        raise MeshError(f"prism identifiers must be distinct: {tuple(bottom)} / {tuple(top)}")
    edges = {}
    for i, j in ((0, 1), (0, 2), (1, 2)):
        if orientation is None:
            start, _ = side_diagonal(bottom[i], bottom[j], top[i], top[j])
            edges[(i, j)] = start in (bottom[i], top[j])
        else:
            edges[(i, j)] = bool(orientation(bottom[i], bottom[j]))
    order = topological_order(edges)
    tets = staircase(bottom, top, order)
    if order not in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        tets = [(a, b, d, c) for a, b, c, d in tets]
    return tets


def prism_diagonals(bottom: Sequence[int], top: Sequence[int], tets: List[Tet]) -> List[Tuple[int, int]]:
    """Side diagonals used by a cut, one per side, as (lower, upper) pairs."""
    present = set()
    for tet in tets:
        for a, b in itertools.combinations(tet, 2):
            present.add(frozenset((a, b)))
    out = []
    for i, j in ((0, 1), (1, 2), (0, 2)):
        if frozenset((bottom[i], top[j])) in present:
            out.append((bottom[i], top[j]))
        else:
            out.append((bottom[j], top[i]))
    return out


def is_valid_cut(diagonals: Sequence[Tuple[int, int]]) -> bool:
    """A choice of three side diagonals is realisable iff two of them share a vertex."""
    counts = Counter(v for d in diagonals for v in d)
    return any(n >= 2 for n in counts.values())


def cuts_census(bottom: Sequence[int], top: Sequence[int]) -> List[Tuple[Tuple[Tuple[int, int], ...], bool]]:
    """All eight diagonal assignments of a prism with their validity."""
    sides = ((0, 1), (1, 2), (0, 2))
    out = []
    for choice in itertools.product((False, True), repeat=3):
        diagonals = tuple(
            (bottom[j], top[i]) if flip else (bottom[i], top[j]) for (i, j), flip in zip(sides, choice)
        )
        out.append((diagonals, is_valid_cut(diagonals)))
    return out

