"""
Tests for the native file formats, VTK export, time series and the command line.
"""

import json

import numpy as np
import pytest

from main import main
from slabforge.block_cuts import BlockSetCache
from slabforge.errors import FormatError, MeshError, UnsupportedVersionError
from slabforge.extrude import extrude_slab, validate_slab
from slabforge.mesh_core import build_mixed_mesh
from slabforge.mesh_io import (
    TIME_SERIES_COLUMNS,
    format_block_sets,
    format_mesh,
    format_slab,
    parse_block_sets,
    parse_mesh,
    parse_slab,
    read_time_series,
    read_vtk_tets,
    write_mesh,
    write_slab,
    write_slab_vtk,
    write_time_series,
    write_vtk_tets,
)
from slabforge.motion import MotionMap, advance_vertices, moved_points
from slabforge.prism import cut_prism
from slabforge.sliding import AnnulusState, update_sliding_layer

CONFIG = """
[time]
t_end = 0.2
dt = 0.1

[mesh]
n_quads = 16
"""


@pytest.fixture
def mesh():
    return build_mixed_mesh((0.0, 0.0), 0.5, 1.0, None, 1.5, 3.0, 16)


@pytest.fixture
def swap_slab(mesh):
    pitch = mesh.annulus.pitch
    bottom = mesh.with_points(moved_points(mesh, MotionMap(mesh.center, angle=0.0)))
    top = advance_vertices(bottom, MotionMap(mesh.center, angle=-0.4 * pitch))
    top, _, decision = update_sliding_layer(top, AnnulusState(mesh.annulus.n_quads))
    return extrude_slab(bottom, top, 0.0, 0.1, swap=decision)


def test_mesh_round_trip_is_exact(mesh):
    moved = mesh.with_points(moved_points(mesh, MotionMap(mesh.center, angle=0.123)))
    text = format_mesh(moved)
    parsed = parse_mesh(text)
    assert format_mesh(parsed) == text
    assert np.array_equal(parsed.points, moved.points)
    assert np.array_equal(parsed.reference_points, moved.reference_points)
    assert np.array_equal(parsed.annulus.mid, moved.annulus.mid)


def test_slab_round_trip_keeps_blocks(swap_slab):
    text = format_slab(swap_slab)
    parsed = parse_slab(text)
    assert format_slab(parsed) == text
    assert parsed.configuration == swap_slab.configuration
    assert np.array_equal(parsed.column_of, swap_slab.column_of)
    assert not validate_slab(parsed)


def test_block_sets_round_trip():
    cache = BlockSetCache().derive_all()
    parsed = parse_block_sets(format_block_sets(cache))
    for configuration, conn in cache.items():
        assert np.array_equal(parsed.get(configuration).tets, conn.tets)
        assert parsed.get(configuration).cuts == conn.cuts


def test_truncated_file_reports_offset(mesh):
    text = format_mesh(mesh)
    cut = text[: len(text) // 2].rsplit("\n", 1)[0] + "\n"
    with pytest.raises(FormatError) as info:
        parse_mesh(cut)
    assert info.value.offset is not None
    assert 0 < info.value.offset <= len(cut.encode())


def test_malformed_number_reports_line_offset(mesh):
    text = format_mesh(mesh).replace("LEVEL 0", "LEVEL zero")
    with pytest.raises(FormatError) as info:
        parse_mesh(text)
    assert info.value.offset == text.index("LEVEL zero")


def test_unknown_version_rejected(mesh):
    with pytest.raises(UnsupportedVersionError):
        parse_mesh(format_mesh(mesh).replace("STMESH 1", "STMESH 2", 1))


def test_wrong_kind_rejected(swap_slab):
    with pytest.raises(FormatError):
        parse_mesh(format_slab(swap_slab))


def test_vtk_export(tmp_path):
    points = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [0, 1, 1]], dtype=float)
    tets = np.array(cut_prism((0, 1, 2), (3, 4, 5)))
    path = write_vtk_tets(points, tets, np.array([0, 1, 2]), tmp_path / "prism.vtk")
    title, read_points, read_tets, regions = read_vtk_tets(path)
    assert title == "slabforge"
    assert read_points.shape == (6, 3)
    assert np.array_equal(read_tets, tets)
    assert list(regions) == [0, 1, 2]
    assert "CELL_TYPES 3" in path.read_text()


def test_writers_are_byte_identical(tmp_path, mesh, swap_slab):
    for writer, item, name in (
        (write_mesh, mesh, "mesh.stm"), (write_slab, swap_slab, "slab.stm"), (write_slab_vtk, swap_slab, "slab.vtk"),
    ):
        first = writer(item, tmp_path / "first" / name)
        second = writer(item, tmp_path / "second" / name)
        assert first.read_bytes() == second.read_bytes()


def test_vtk_round_trip_is_exact(tmp_path, swap_slab):
    path = write_slab_vtk(swap_slab, tmp_path / "slab.vtk")
    title, points, tets, regions = read_vtk_tets(path)
    again = write_vtk_tets(points, tets, regions, tmp_path / "again.vtk", title)
    assert again.read_bytes() == path.read_bytes()
    assert np.array_equal(points, swap_slab.coords[:, [1, 2, 0]])


def test_vtk_refuses_empty_mesh(tmp_path):
    with pytest.raises(MeshError):
        write_vtk_tets(np.zeros((0, 3)), np.zeros((0, 4), dtype=int), np.zeros(0), tmp_path / "empty.vtk")


def test_time_series_header(tmp_path):
    rows = [dict(zip(TIME_SERIES_COLUMNS, [0.1, 0.5, 0.0, 0.0, 0.0, 1.0, 0.0, 3, 0]))]
    path = write_time_series(rows, tmp_path / "timeseries.csv")
    assert path.read_text().splitlines()[0] == ",".join(TIME_SERIES_COLUMNS)
    frame = read_time_series(path)
    assert frame["outer_iters"].tolist() == [3]
    assert frame["d"].tolist() == [0.5]


def test_time_series_without_rows(tmp_path):
    path = write_time_series([], tmp_path / "timeseries.csv")
    assert len(read_time_series(path)) == 0


def test_cli_generate_and_extrude(tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text(CONFIG)
    assert main(["generate", "--config", str(config), "-o", str(tmp_path / "mesh.stm")]) == 0
    assert main([
        "extrude", "--mesh", str(tmp_path / "mesh.stm"), "--mesh-next", str(tmp_path / "mesh.stm"),
        "-o", str(tmp_path / "slab.stm"),
    ]) == 0
    assert main(["validate", str(tmp_path / "slab.stm")]) == 0
    assert "conforming" in capsys.readouterr().out


def test_cli_validate_rejects_broken_slab(tmp_path, swap_slab):
    broken = swap_slab
    broken.tets = broken.tets[1:]
    broken.regions = broken.regions[1:]
    broken.column_of = broken.column_of[1:]
    path = write_slab(broken, tmp_path / "broken.stm")
    assert main(["validate", str(path)]) == 1


def test_cli_simulate(tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text(CONFIG)
    assert main(["simulate", "--config", str(config), "--out-dir", str(tmp_path / "out"), "--quiet"]) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["status"] == "ok"
    assert summary["steps"] == 2


def test_cli_usage_errors(tmp_path, mesh):
    assert main(["generate", "--config", str(tmp_path / "missing.cfg"), "-o", str(tmp_path / "m.stm")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("[time]\nstep = 0.1\n")
    assert main(["simulate", "--config", str(bad), "--out-dir", str(tmp_path)]) == 2
    write_mesh(mesh, tmp_path / "mesh.stm")
    assert main(["validate", str(tmp_path / "mesh.stm")]) == 1
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_cli_cuts_census(tmp_path, capsys):
    assert main(["cuts-census", "--blocks", str(tmp_path / "blocks.stm")]) == 0
    out = capsys.readouterr().out
    assert "6 of 8" in out
    assert (tmp_path / "blocks.stm").read_text().startswith("STMESH 1\nKIND blocks")
