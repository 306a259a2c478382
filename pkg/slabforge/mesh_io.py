"""
File formats: native text meshes and slabs, VTK legacy export, CSV time series.

Native files start with ``STMESH 1`` and a ``KIND`` line (mesh, slab or
blocks). Floats are written with ``repr`` so a round trip is exact. The full
layout is documented in docs/file_formats.md.
"""

import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .block_cuts import BlockConnectivity, BlockSetCache
from .errors import FormatError, MeshError, UnsupportedVersionError
from .extrude import SpaceTimeSlab
from .mesh_core import AnnulusTopology, SpatialMesh

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
TIME_SERIES_COLUMNS = ["t", "d", "ddot", "theta", "thetadot", "Fy", "M", "outer_iters", "swapped"]
VTK_TETRA = 10

PathLike = Union[str, Path]


def _f(x: float) -> str:
    return repr(float(x))


def _ints(values: Iterable[int]) -> str:
    return " ".join(str(int(v)) for v in values)


def _header(kind: str) -> List[str]:
    return [f"STMESH {FORMAT_VERSION}", f"KIND {kind}"]


def _mesh_lines(mesh: SpatialMesh) -> List[str]:
    lines = [
        f"LEVEL {mesh.level}",
        f"OFFSET {mesh.sliding_offset}",
        f"CENTER {_f(mesh.center[0])} {_f(mesh.center[1])}",
        f"VERTICES {mesh.n_vertices}",
    ]
    lines += [f"{i} {_f(x)} {_f(y)}" for i, (x, y) in enumerate(mesh.points)]
    if mesh.reference_points is not mesh.points and not np.array_equal(mesh.reference_points, mesh.points):
        lines.append(f"REFERENCE {mesh.n_vertices}")
        lines += [f"{i} {_f(x)} {_f(y)}" for i, (x, y) in enumerate(mesh.reference_points)]
    lines.append(f"TRIANGLES {len(mesh.triangles)}")
    lines += [f"{_ints(t)} {int(r)}" for t, r in zip(mesh.triangles, mesh.triangle_regions)]
    lines.append(f"QUADS {len(mesh.quads)}")
    lines += [f"{_ints(q)} {int(r)}" for q, r in zip(mesh.quads, mesh.quad_layers)]
    if mesh.annulus is not None:
        lines.append(f"RINGS {mesh.annulus.n_quads}")
        lines.append(_ints(mesh.annulus.inner))
        lines.append(_ints(mesh.annulus.mid))
        lines.append(_ints(mesh.annulus.outer))
    return lines


def format_mesh(mesh: SpatialMesh) -> str:
    return "\n".join(_header("mesh") + _mesh_lines(mesh) + ["END"]) + "\n"


def format_slab(slab: SpaceTimeSlab) -> str:
    lines = _header("slab") + [
        f"LEVEL {slab.level}",
        f"INTERVAL {_f(slab.t0)} {_f(slab.t1)}",
        f"SPATIAL {slab.n_vertices}",
        f"VERTICES {len(slab.coords)}",
    ]
    lines += [f"{i} {_f(t)} {_f(x)} {_f(y)}" for i, (t, x, y) in enumerate(slab.coords)]
    column_of = slab.column_of if slab.column_of is not None else -np.ones(len(slab.tets), dtype=int)
    lines.append(f"TETS {len(slab.tets)}")
    lines += [f"{_ints(t)} {int(r)} {int(c)}" for t, r, c in zip(slab.tets, slab.regions, column_of)]
    lines.append(f"COLUMNS {len(slab.columns)}")
    lines += [_ints(loop) for loop in slab.columns]
    for name, tris in (("BOTTOM", slab.bottom_triangles), ("TOP", slab.top_triangles)):
        lines.append(f"{name} {len(tris)}")
        lines += [_ints(t) for t in tris]
    edges = sorted(tuple(sorted(e)) for e in slab.boundary_edges)
    lines.append(f"BOUNDARY {len(edges)}")
    lines += [_ints(e) for e in edges]
    lines.append(f"CONFIGURATION {slab.configuration if slab.configuration is not None else 0}")
    return "\n".join(lines + ["END"]) + "\n"


def format_block_sets(cache: BlockSetCache) -> str:
    items = cache.items()
    lines = _header("blocks") + [f"BLOCKS {len(items)}"]
    for configuration, conn in items:
        lines.append(f"SET {configuration} {len(conn.tets)}")
        lines += [f"{_ints(t)} {int(r)}" for t, r in zip(conn.tets, conn.regions)]
        sides = sorted(conn.orientation.values())
        lines.append(f"SIDES {len(sides)}")
        lines += [_ints(s) for s in sides]
        lines.append("CUTS " + ";".join(conn.cuts))
    return "\n".join(lines + ["END"]) + "\n"


class _Reader:
    """Line reader that knows the byte offset of every line."""

    def __init__(self, text: str):
        self.lines: List[Tuple[int, str]] = []
        offset = 0
        for line in text.splitlines(keepends=True):
            if line.strip():
                self.lines.append((offset, line.strip()))
            offset += len(line.encode())
        self.end = offset
        self.pos = 0

    def offset(self) -> int:
        return self.lines[self.pos][0] if self.pos < len(self.lines) else self.end

    def error(self, message: str) -> FormatError:
        return FormatError(message, self.offset())

    def next(self) -> List[str]:
        if self.pos >= len(self.lines):
            raise FormatError("unexpected end of file", self.end)
        tokens = self.lines[self.pos][1].split()
        self.pos += 1
        return tokens

    def peek_keyword(self) -> Optional[str]:
        if self.pos >= len(self.lines):
            return None
        return self.lines[self.pos][1].split()[0]

    def keyword(self, name: str, n_args: int) -> List[str]:
        offset = self.offset()
        tokens = self.next()
        if tokens[0] != name or len(tokens) != n_args + 1:
            raise FormatError(f"expected {name} with {n_args} value(s), got {' '.join(tokens)!r}", offset)
        return tokens[1:]

    def count(self, name: str) -> int:
        return self.convert(int, self.keyword(name, 1))[0]

    def convert(self, kind, tokens: Sequence[str]) -> list:
        try:
            return [kind(t) for t in tokens]
        except ValueError:
            raise FormatError(f"malformed number in {' '.join(tokens)!r}", self.lines[self.pos - 1][0])

    def rows(self, n: int, width: int, kind) -> np.ndarray:
        out = []
        for _ in range(n):
            offset = self.offset()
            tokens = self.next()
            if len(tokens) != width:
                raise FormatError(f"expected {width} values, got {len(tokens)}", offset)
            out.append(self.convert(kind, tokens))
        return np.array(out, dtype=kind).reshape(n, width)


def _read_header(reader: _Reader, expected_kind: str) -> None:
    offset = reader.offset()
    tokens = reader.next()
    if len(tokens) != 2 or tokens[0] != "STMESH":
        raise FormatError("missing STMESH header", offset)
    if tokens[1] != str(FORMAT_VERSION):
        raise UnsupportedVersionError(f"unsupported format version {tokens[1]!r}", offset)
    kind = reader.keyword("KIND", 1)[0]
    if kind != expected_kind:
        raise FormatError(f"expected a {expected_kind} file, found {kind}", reader.lines[reader.pos - 1][0])


def _read_end(reader: _Reader) -> None:
    reader.keyword("END", 0)
    if reader.pos != len(reader.lines):
        raise reader.error("content after END")


def _vertex_rows(reader: _Reader, name: str, dim: int = 2) -> np.ndarray:
    n = reader.count(name)
    offset = reader.offset()
    rows = reader.rows(n, dim + 1, float)
    if not np.array_equal(rows[:, 0], np.arange(n)):
        raise FormatError(f"{name} rows must be numbered 0..{n - 1} in order", offset)
    return rows[:, 1:]


def parse_mesh(text: str) -> SpatialMesh:
    reader = _Reader(text)
    _read_header(reader, "mesh")
    level = reader.count("LEVEL")
    offset = reader.convert(int, reader.keyword("OFFSET", 1))[0]
    center = reader.convert(float, reader.keyword("CENTER", 2))
    points = _vertex_rows(reader, "VERTICES")
    reference = None
    if reader.peek_keyword() == "REFERENCE":
        reference = _vertex_rows(reader, "REFERENCE")
    tri = reader.rows(reader.count("TRIANGLES"), 4, int)
    quads = reader.rows(reader.count("QUADS"), 5, int)
    annulus = None
    if reader.peek_keyword() == "RINGS":
        n = reader.count("RINGS")
        rings = reader.rows(3, n, int)
        annulus = AnnulusTopology(rings[0], rings[1], rings[2])
    _read_end(reader)
    try:
        return SpatialMesh(
            points=points,
            triangles=tri[:, :3],
            triangle_regions=tri[:, 3],
            quads=quads[:, :4],
            quad_layers=quads[:, 4],
            center=np.array(center),
            annulus=annulus,
            sliding_offset=offset,
            level=level,
            reference_points=reference,
        )
    except ValueError as exc:
        raise FormatError(f"inconsistent mesh data: {exc}")


def parse_slab(text: str) -> SpaceTimeSlab:
    reader = _Reader(text)
    _read_header(reader, "slab")
    level = reader.count("LEVEL")
    t0, t1 = reader.convert(float, reader.keyword("INTERVAL", 2))
    nv = reader.count("SPATIAL")
    coords = _vertex_rows(reader, "VERTICES", 3)
    if len(coords) != 2 * nv:
        raise reader.error(f"slab needs {2 * nv} vertices, found {len(coords)}")
    tets = reader.rows(reader.count("TETS"), 6, int)
    n_columns = reader.count("COLUMNS")
    columns = []
    for _ in range(n_columns):
        columns.append(tuple(reader.convert(int, reader.next())))
    bottom = reader.rows(reader.count("BOTTOM"), 3, int)
    top = reader.rows(reader.count("TOP"), 3, int)
    edges = reader.rows(reader.count("BOUNDARY"), 2, int)
    configuration = reader.count("CONFIGURATION")
    _read_end(reader)
    return SpaceTimeSlab(
        coords=coords,
        tets=tets[:, :4],
        regions=tets[:, 4],
        t0=t0,
        t1=t1,
        n_vertices=nv,
        bottom_triangles=bottom,
        top_triangles=top,
        boundary_edges=frozenset(frozenset(int(v) for v in e) for e in edges),
        columns=tuple(columns),
        column_of=tets[:, 5] if len(tets) and np.all(tets[:, 5] >= 0) else None,
        level=level,
        configuration=configuration or None,
    )


def parse_block_sets(text: str) -> BlockSetCache:
    reader = _Reader(text)
    _read_header(reader, "blocks")
    sets: Dict[int, BlockConnectivity] = {}
    for _ in range(reader.count("BLOCKS")):
        configuration, n_tets = reader.convert(int, reader.keyword("SET", 2))
        tets = reader.rows(n_tets, 5, int)
        sides = reader.rows(reader.count("SIDES"), 2, int)
        offset = reader.offset()
        tokens = reader.next()
        if tokens[0] != "CUTS":
            raise FormatError("expected CUTS", offset)
        cuts = tuple(" ".join(tokens[1:]).split(";")) if len(tokens) > 1 else ()
        sets[configuration] = BlockConnectivity(
            configuration=configuration,
            tets=tets[:, :4],
            regions=tets[:, 4],
            orientation={frozenset(int(v) for v in s): (int(s[0]), int(s[1])) for s in sides},
            cuts=cuts,
        )
    _read_end(reader)
    return BlockSetCache(sets)


def _write(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def _read(path: PathLike) -> str:
    with open(path, "r", newline="") as fh:
        return fh.read()


def write_mesh(mesh: SpatialMesh, path: PathLike) -> Path:
    return _write(path, format_mesh(mesh))


def read_mesh(path: PathLike) -> SpatialMesh:
    return parse_mesh(_read(path))


def write_slab(slab: SpaceTimeSlab, path: PathLike) -> Path:
    return _write(path, format_slab(slab))


def read_slab(path: PathLike) -> SpaceTimeSlab:
    return parse_slab(_read(path))


def write_block_sets(cache: BlockSetCache, path: PathLike) -> Path:
    return _write(path, format_block_sets(cache))


def read_block_sets(path: PathLike) -> BlockSetCache:
    cache = parse_block_sets(_read(path))
    logger.info("loaded %d block connectivity sets from %s", len(cache.items()), path)
    return cache


def write_vtk_tets(points: np.ndarray, tets: np.ndarray, regions: np.ndarray, path: PathLike,
                   title: str = "slabforge") -> Path:
    """
    VTK legacy ASCII unstructured grid of tetrahedra.

    Args:
        points: (n, 3) coordinates as written (x, y, t for slabs).
        tets: (m, 4) connectivity.
        regions: (m,) region tags, written with a cell-id scalar.
    """
    if not len(tets):
        raise MeshError("refusing to write an empty tetrahedral mesh")
    m = len(tets)
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {len(points)} double")
    lines += [" ".join(_f(v) for v in p) for p in points]
    lines.append(f"CELLS {m} {5 * m}")
    lines += [f"4 {_ints(t)}" for t in tets]
    lines.append(f"CELL_TYPES {m}")
    lines += [str(VTK_TETRA)] * m
    lines += [f"CELL_DATA {m}", "SCALARS region int 1", "LOOKUP_TABLE default"]
    lines += [str(int(r)) for r in regions]
    lines += ["SCALARS cell_id int 1", "LOOKUP_TABLE default"]
    lines += [str(i) for i in range(m)]
    return _write(path, "\n".join(lines) + "\n")


def write_slab_vtk(slab: SpaceTimeSlab, path: PathLike) -> Path:
    points = slab.coords[:, [1, 2, 0]]
    title = f"slabforge slab level {slab.level} t {_f(slab.t0)} {_f(slab.t1)}"
    return write_vtk_tets(points, slab.tets, slab.regions, path, title)


def read_vtk_tets(path: PathLike) -> Tuple[str, np.ndarray, np.ndarray, np.ndarray]:
    """Read back what ``write_vtk_tets`` wrote: (title, points, tets, regions)."""
    reader = _Reader(_read(path))
    lines = [text for _, text in reader.lines]
    try:
        title = lines[1]
        i = lines.index(next(s for s in lines if s.startswith("POINTS")))
        n = int(lines[i].split()[1])
        points = np.array([[float(v) for v in s.split()] for s in lines[i + 1:i + 1 + n]])
        j = i + 1 + n
        m = int(lines[j].split()[1])
        tets = np.array([[int(v) for v in s.split()[1:]] for s in lines[j + 1:j + 1 + m]])
        k = lines.index("SCALARS region int 1")
        regions = np.array([int(s) for s in lines[k + 2:k + 2 + m]])
    except (IndexError, StopIteration, ValueError) as exc:
        raise FormatError(f"malformed VTK file {path}: {exc}")
    return title, points, tets, regions


def write_time_series(rows: Union[pd.DataFrame, Sequence[dict]], path: PathLike) -> Path:
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows), columns=TIME_SERIES_COLUMNS)
    frame = frame[TIME_SERIES_COLUMNS].astype({"outer_iters": int, "swapped": int})
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def read_time_series(path: PathLike) -> pd.DataFrame:
    frame = pd.read_csv(path)
    missing = [c for c in TIME_SERIES_COLUMNS if c not in frame.columns]
    if missing:
        raise FormatError(f"time series {path} lacks columns {', '.join(missing)}")
    return frame
