"""
Tests for cutting space-time prisms into three tetrahedra.
"""

import itertools

import numpy as np
import pytest

from slabforge.errors import MeshError
from slabforge.geometry import rotation_matrix, swept_area_integral, tet_signed_volumes, twist_correction
from slabforge.prism import (
    cut_prism,
    cuts_census,
    is_valid_cut,
    prism_diagonals,
    side_diagonal,
    smallest_id_rule,
)


def tet_set(tets):
    return {tuple(sorted(t)) for t in tets}


def right_prism_coords(dt=0.1):
    base = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
    bottom = np.column_stack([np.zeros(3), base])
    top = np.column_stack([np.full(3, dt), base])
    return np.vstack([bottom, top])


def test_default_cut_matches_smallest_id_rule():
    tets = cut_prism((0, 1, 2), (3, 4, 5))
    assert tet_set(tets) == tet_set([(0, 1, 2, 5), (0, 1, 5, 4), (0, 4, 5, 3)])
    assert set(prism_diagonals((0, 1, 2), (3, 4, 5), tets)) == {(0, 4), (1, 5), (0, 5)}


def test_side_diagonal_starts_at_smallest_id():
    assert side_diagonal(0, 1, 3, 4) == (0, 4)
    assert side_diagonal(4, 2, 10, 1) == (1, 4)
    assert smallest_id_rule(2, 7) and not smallest_id_rule(7, 2)


def test_relabelled_bottom_gives_same_decomposition():
    original = cut_prism((0, 1, 2), (3, 4, 5))
    relabelled = cut_prism((2, 0, 1), (5, 3, 4))
    assert tet_set(original) == tet_set(relabelled)


def test_right_prism_volume():
    coords = right_prism_coords(0.1)
    volumes = tet_signed_volumes(coords, np.array(cut_prism((0, 1, 2), (3, 4, 5))))
    assert np.all(volumes > 0.0)
    assert volumes.sum() == pytest.approx(0.1, rel=1e-12)


@pytest.mark.parametrize("ranks", list(itertools.permutations(range(3))))
def test_every_acyclic_orientation_gives_positive_tets(ranks):
    coords = right_prism_coords(0.25)
    tets = cut_prism((0, 1, 2), (3, 4, 5), orientation=lambda u, v: ranks[u] < ranks[v])
    volumes = tet_signed_volumes(coords, np.array(tets))
    assert np.all(volumes > 0.0)
    assert volumes.sum() == pytest.approx(0.25, rel=1e-12)
    assert is_valid_cut(prism_diagonals((0, 1, 2), (3, 4, 5), tets))


def test_cyclic_orientation_is_rejected():
    with pytest.raises(MeshError):
        cut_prism((0, 1, 2), (3, 4, 5), orientation=lambda u, v: (u, v) != (0, 2))


def test_repeated_ids_are_rejected():
    with pytest.raises(MeshError):
        cut_prism((0, 1, 2), (2, 3, 4))


def test_cut_validity():
    assert is_valid_cut([(0, 4), (1, 5), (0, 5)])
    assert not is_valid_cut([(0, 4), (1, 5), (2, 3)])


def test_census_finds_six_valid_cuts():
    census = cuts_census((0, 1, 2), (3, 4, 5))
    assert len(census) == 8
    assert sum(valid for _, valid in census) == 6
    invalid = {frozenset(d) for d, valid in census if not valid}
    assert frozenset([(0, 4), (1, 5), (2, 3)]) in invalid


def test_random_moving_prisms_match_swept_volume():
    rng = np.random.default_rng(2024)
    nv, dt = 50, 0.1
    base = np.array([[0.0, 0.0], [1.0, 0.0], [0.3, 0.9]])
    coords = np.zeros((2 * nv, 3))
    coords[nv:, 0] = dt
    for _ in range(1000):
        bottom = tuple(int(v) for v in rng.choice(nv, 3, replace=False))
        top = tuple(v + nv for v in bottom)
        lower = base + rng.uniform(-0.1, 0.1, (3, 2))
        upper = lower @ rotation_matrix(rng.uniform(-0.1, 0.1)).T
        upper += rng.uniform(-0.2, 0.2, 2) + rng.uniform(-0.03, 0.03, (3, 2))
        coords[list(bottom), 1:] = lower
        coords[list(top), 1:] = upper

        tets = cut_prism(bottom, top)
        volumes = tet_signed_volumes(coords, np.array(tets))
        assert len(tets) == 3
        assert np.all(volumes > 0.0)

        diagonals = set(prism_diagonals(bottom, top, tets))
        expected = swept_area_integral(lower, upper, np.array([[0, 1, 2]]), dt)[0]
        for i, j in ((0, 1), (1, 2), (2, 0)):
            p, q = bottom[i], bottom[j]
            expected -= twist_correction(
                coords[p], coords[q], coords[p + nv], coords[q + nv], diagonal_from_p=(p, q + nv) in diagonals
            )
        assert volumes.sum() == pytest.approx(expected, rel=1e-12)
