"""
Tests for slab extrusion, facet geometry and slab conformity.
"""

from dataclasses import replace

import numpy as np
import pytest

from slabforge.errors import ConformityError, MeshError
from slabforge import extrude
from slabforge.extrude import (
    FacetKind,
    column_volumes,
    extrude_slab,
    facet_geometry,
    total_volume_identity,
    validate_slab,
)
from slabforge.geometry import twist_correction
from slabforge.mesh_core import build_annulus_mesh, build_box_mesh, build_mixed_mesh, sliding_quality, triangulate
from slabforge.motion import MotionMap, advance_vertices, moved_points
from slabforge.sliding import AnnulusState, check_rotation_bound, update_sliding_layer


@pytest.fixture
def mesh():
    return build_mixed_mesh((0.0, 0.0), 0.5, 1.0, None, 1.5, 3.0, 16)


def swap_pair(mesh, start, stop):
    """Meshes at rotation angles start and stop (in pitches) with the swap applied on top."""
    pitch = mesh.annulus.pitch
    bottom = mesh.with_points(moved_points(mesh, MotionMap(mesh.center, angle=start * pitch)))
    top = advance_vertices(bottom, MotionMap(mesh.center, angle=(stop - start) * pitch))
    top, _, decision = update_sliding_layer(top, AnnulusState(mesh.annulus.n_quads))
    return bottom, top, decision


def triangle_set(triangles):
    return {tuple(sorted(int(v) for v in t)) for t in triangles}


def test_static_slab_has_three_tets_per_triangle(mesh):
    top = advance_vertices(mesh, MotionMap(mesh.center))
    slab = extrude_slab(mesh, top, 0.0, 0.1)
    n_triangles = len(triangulate(mesh)[0])
    assert slab.n_tets == 3 * n_triangles
    assert not slab.swapped
    assert not validate_slab(slab)
    tets, columns = total_volume_identity(slab)
    assert tets == pytest.approx(columns, rel=1e-10)


def test_rotating_slab_conforms(mesh):
    top = advance_vertices(mesh, MotionMap(mesh.center, angle=0.3 * mesh.annulus.pitch))
    slab = extrude_slab(mesh, top, 0.0, 0.05, validate=True)
    assert np.all(slab.volumes() > 0.0)
    assert slab.global_ids()[0] == 0
    assert slab.global_ids()[-1] == 2 * mesh.n_vertices - 1


def test_clockwise_swap_slab_conforms(mesh):
    bottom, top, decision = swap_pair(mesh, 0.0, -0.4)
    assert decision.swap and top.sliding_offset == -1
    slab = extrude_slab(bottom, top, 0.0, 0.1, swap=decision, validate=True)
    assert slab.configuration == 1
    tets, columns = total_volume_identity(slab)
    assert tets == pytest.approx(columns, rel=1e-10)


def test_anticlockwise_swap_slab_conforms(mesh):
    bottom, top, decision = swap_pair(mesh, 0.9, 1.3)
    assert decision.swap and top.sliding_offset == 1
    slab = extrude_slab(bottom, top, 1.0, 1.2, swap=decision)
    assert slab.configuration == 3
    assert not validate_slab(slab), validate_slab(slab).summary()


def test_annulus_only_swap_slab():
    fragment, _, _ = build_annulus_mesh((0.0, 0.0), 4.4, 4.7, 5.0, 100)
    bottom, top, decision = swap_pair(fragment, 0.0, -0.45)
    slab = extrude_slab(bottom, top, 0.0, 0.01, swap=decision)
    assert slab.configuration == 1
    assert np.all(slab.volumes() > 0.0)
    tets, columns = total_volume_identity(slab)
    assert tets == pytest.approx(columns, rel=1e-10)


def test_consecutive_slabs_share_their_interface(mesh):
    _, top, decision = swap_pair(mesh, 0.0, -0.4)
    first = extrude_slab(mesh, top, 0.0, 0.1, swap=decision)
    following = advance_vertices(top, MotionMap(mesh.center, angle=-0.2 * mesh.annulus.pitch))
    second = extrude_slab(top, following, 0.1, 0.2)
    assert second.level == first.level + 1
    assert triangle_set(first.top_triangles) == triangle_set(second.bottom_triangles)


def test_decision_must_match_offsets(mesh):
    bottom, top, decision = swap_pair(mesh, 0.0, -0.4)
    with pytest.raises(MeshError):
        extrude_slab(bottom, top.with_sliding_offset(0), 0.0, 0.1, swap=decision)


def test_incompatible_meshes_rejected(mesh):
    other = build_mixed_mesh((0.0, 0.0), 0.5, 1.0, None, 1.5, 3.0, 18)
    with pytest.raises(MeshError):
        extrude_slab(mesh, other, 0.0, 0.1)
    with pytest.raises(ValueError):
        extrude_slab(mesh, mesh, 0.1, 0.1)


def test_deleted_tet_breaks_conformity(mesh):
    slab = extrude_slab(mesh, advance_vertices(mesh, MotionMap(mesh.center)), 0.0, 0.1)
    keep = np.ones(slab.n_tets, dtype=bool)
    keep[len(keep) // 2] = False
    broken = replace(slab, tets=slab.tets[keep], regions=slab.regions[keep], column_of=slab.column_of[keep])
    report = validate_slab(broken)
    assert report.kinds().get("facet_multiplicity", 0) >= 2
    assert "facet_multiplicity" in str(ConformityError(report))


def test_flipped_tet_reported(mesh):
    slab = extrude_slab(mesh, advance_vertices(mesh, MotionMap(mesh.center)), 0.0, 0.1)
    tets = slab.tets.copy()
    tets[0] = tets[0][[1, 0, 2, 3]]
    kinds = validate_slab(replace(slab, tets=tets)).kinds()
    assert kinds.get("non_positive_volume") == 1


def test_box_mesh_slab_lateral_facets_are_time_parallel():
    mesh = build_box_mesh((-2.0, 2.0), (-2.0, 2.0), 4, 4, (-1.0, 1.0, -1.0, 1.0))
    slab = extrude_slab(mesh, mesh.with_points(mesh.points, level=1), 0.0, 0.5, validate=True)
    lateral = [owners[0] for key, owners in slab.facets.items() if slab.facet_kind(key) is FacetKind.LATERAL]
    assert len(lateral) == 2 * (8 + 16)
    for tet, face in lateral:
        assert slab.facet_geometry(tet, face).n_t == pytest.approx(0.0, abs=1e-15)


def test_bottom_and_top_facet_normals():
    coords = np.array(
        [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.1, 0.0, 1.0]]
    )
    bottom = facet_geometry(coords, 3)
    assert bottom.n_t == pytest.approx(-1.0)
    assert bottom.n == pytest.approx([0.0, 0.0], abs=1e-15)
    assert bottom.area == pytest.approx(0.5)
    top_coords = np.array([[0.0, 0.0, 0.0], [0.1, 0.0, 0.0], [0.1, 1.0, 0.0], [0.1, 0.0, 1.0]])
    assert facet_geometry(top_coords, 0).n_t == pytest.approx(1.0)


def test_tet_normals_close(mesh):
    _, top, decision = swap_pair(mesh, 0.0, -0.4)
    slab = extrude_slab(mesh, top, 0.0, 0.1, swap=decision)
    rng = np.random.default_rng(7)
    for t in rng.choice(slab.n_tets, size=25, replace=False):
        total = np.zeros(3)
        for face in range(4):
            g = slab.facet_geometry(int(t), face)
            total += g.area * np.concatenate([[g.n_t], g.n])
        assert np.allclose(total, 0.0, atol=1e-12)


def test_degenerate_facet_raises():
    flat = np.array([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 2.0, 0.0], [0.1, 0.0, 1.0]])
    with pytest.raises(MeshError):
        facet_geometry(flat, 3)


def test_twist_correction_vanishes_on_planar_faces():
    p0, q0 = np.array([0.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    shift = np.array([1.0, 0.3, -0.2])
    assert twist_correction(p0, q0, p0 + [1.0, 0.0, 0.0], q0 + [1.0, 0.0, 0.0], True) == 0.0
    assert twist_correction(p0, q0, p0 + shift, q0 + shift, False) == pytest.approx(0.0, abs=1e-15)


def test_twist_correction_changes_sign_with_the_diagonal():
    p0, q0 = np.array([0.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    p1, q1 = np.array([1.0, 0.0, 0.0]), np.array([1.0, 1.0, 0.5])
    from_p = twist_correction(p0, q0, p1, q1, True)
    assert from_p == pytest.approx(0.5 / 12.0)
    assert twist_correction(p0, q0, p1, q1, False) == pytest.approx(-from_p)


@pytest.mark.parametrize("direction, expected", [(-1.0, {1, 2}), (1.0, {3, 4})])
def test_full_revolution_of_the_annulus(direction, expected):
    mesh, _, _ = build_annulus_mesh((0.0, 0.0), 4.4, 4.7, 5.0, 100)
    annulus = AnnulusState(100)
    n_slabs = 450
    dt = 1.0 / n_slabs
    step = direction * 2.0 * np.pi / n_slabs
    q0 = sliding_quality(mesh)
    configurations = {}
    for n in range(n_slabs):
        check_rotation_bound(step, annulus.angular_pitch)
        moved = advance_vertices(mesh, MotionMap(mesh.center, angle=step))
        top, new_annulus, decision = update_sliding_layer(moved, annulus)
        slab = extrude_slab(mesh, top, n * dt, (n + 1) * dt, swap=decision)
        report = validate_slab(slab, rel_tol=1e-12)
        assert not report, f"slab {n}: {report.summary()}"
        assert sliding_quality(top) >= 0.5 * q0
        if slab.configuration is not None:
            configurations[slab.configuration] = configurations.get(slab.configuration, 0) + 1
        mesh, annulus = top, new_annulus.rotated(step)
    assert set(configurations) == expected
    assert sum(configurations.values()) >= 99
    assert annulus.accumulated_rotation == pytest.approx(direction * 2.0 * np.pi)


def test_default_tolerance_rejects_small_volume_drift(mesh, monkeypatch):
    top = advance_vertices(mesh, MotionMap(mesh.center, angle=0.3 * mesh.annulus.pitch))
    slab = extrude_slab(mesh, top, 0.0, 0.05)
    assert not validate_slab(slab)
    exact = column_volumes
    monkeypatch.setattr(extrude, "column_volumes", lambda s: exact(s) * (1.0 + 1e-10))
    assert validate_slab(slab).kinds().get("volume_identity", 0) > 0
    assert not validate_slab(slab, rel_tol=1e-9)


def test_column_volumes_flag_open_columns(mesh):
    slab = extrude_slab(mesh, advance_vertices(mesh, MotionMap(mesh.center)), 0.0, 0.1)
    volumes = column_volumes(slab)
    assert np.all(volumes > 0.0)
    loop = slab.columns[0]
    opened = column_volumes(replace(slab, columns=(loop, (loop[0], loop[0], loop[1]))))
    assert opened[0] == pytest.approx(volumes[0], rel=1e-14)
    assert np.isnan(opened[1])
