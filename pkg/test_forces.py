"""
Tests for the boundary quadrature of body force and moment.
"""

import numpy as np
import pytest
from scipy import integrate

from slabforge.errors import MeshError
from slabforge.forces import (
    BoundaryStressSample,
    FluidParams,
    ForceMoment,
    boundary_quadrature,
    compute_force_moment,
    polygon_segments,
    sample_stress,
)
from slabforge.mesh_core import body_boundary, build_box_mesh

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def quadratic_pressure(x):
    return 1.0 + 0.5 * x[:, 0] - 0.3 * x[:, 1] + 0.2 * x[:, 0] ** 2 - 0.7 * x[:, 0] * x[:, 1]


def quadratic_strain(x):
    xy = 0.4 * x[:, 0] * x[:, 1] - 0.1 * x[:, 1]
    eps = np.empty((len(x), 2, 2))
    eps[:, 0, 0] = x[:, 0] ** 2
    eps[:, 1, 1] = -x[:, 1] + 0.3
    eps[:, 0, 1] = xy
    eps[:, 1, 0] = xy
    return eps


def test_constant_pressure_gives_no_load():
    pentagon = np.array([[0.0, 0.0], [2.0, 0.0], [2.5, 1.0], [1.0, 2.0], [-0.5, 1.0]])
    samples = sample_stress(polygon_segments(pentagon), lambda x: np.full(len(x), 3.0))
    load = compute_force_moment(samples, FluidParams(1.5, 0.01), (0.7, 0.4))
    assert load.force == pytest.approx([0.0, 0.0], abs=1e-12)
    assert load.moment == pytest.approx(0.0, abs=1e-12)


def test_linear_pressure_on_unit_square():
    samples = sample_stress(polygon_segments(UNIT_SQUARE), lambda x: x[:, 0])
    load = compute_force_moment(samples, FluidParams(density=2.0), (0.5, 0.5))
    assert load.force == pytest.approx([2.0, 0.0], rel=1e-12, abs=1e-14)
    assert load.fy == pytest.approx(0.0, abs=1e-14)


def test_two_point_rule_is_exact_for_quadratic_stress():
    segments = polygon_segments(np.array([[0.0, 0.0], [1.5, -0.2], [1.8, 1.1], [0.3, 1.4]]))
    fluid = FluidParams(1.2, 0.05)
    coarse = compute_force_moment(sample_stress(segments, quadratic_pressure, quadratic_strain, 2), fluid, (0.9, 0.6))
    fine = compute_force_moment(sample_stress(segments, quadratic_pressure, quadratic_strain, 12), fluid, (0.9, 0.6))
    assert coarse.force == pytest.approx(fine.force, rel=1e-12, abs=1e-13)
    assert coarse.moment == pytest.approx(fine.moment, rel=1e-12, abs=1e-13)


def test_quadrature_normals_point_out_of_the_body():
    positions, normals, weights = boundary_quadrature(polygon_segments(UNIT_SQUARE), order=3)
    assert len(positions) == 12
    assert weights.sum() == pytest.approx(4.0)
    outward = np.einsum("ij,ij->i", normals, positions - 0.5)
    assert np.all(outward > 0.0)


def test_box_mesh_body_boundary_load():
    mesh = build_box_mesh((-3.0, 3.0), (-3.0, 3.0), 6, 6, (-1.0, 1.0, -1.0, 1.0))
    loop = mesh.points[body_boundary(mesh)]
    samples = sample_stress(polygon_segments(loop), lambda x: x[:, 0])
    load = compute_force_moment(samples, FluidParams(), mesh.center)
    assert load.force == pytest.approx([4.0, 0.0], abs=1e-12)


def test_open_boundary_rejected():
    segments = polygon_segments(UNIT_SQUARE)[:3]
    with pytest.raises(MeshError):
        boundary_quadrature(segments)


def test_low_order_rejected():
    with pytest.raises(ValueError):
        boundary_quadrature(polygon_segments(UNIT_SQUARE), order=1)


def test_sample_validation():
    with pytest.raises(ValueError):
        BoundaryStressSample(np.zeros(2), 0.0, [[0.0, 1.0], [0.0, 0.0]], np.array([1.0, 0.0]), 1.0)
    with pytest.raises(ValueError):
        BoundaryStressSample(np.zeros(2), 0.0, np.zeros((2, 2)), np.array([1.0, 1.0]), 1.0)


def test_force_moment_values():
    with pytest.raises(MeshError):
        compute_force_moment([], FluidParams(), (0.0, 0.0))
    with pytest.raises(ValueError):
        ForceMoment([np.nan, 0.0], 0.0)
    with pytest.raises(ValueError):
        FluidParams(density=0.0)


def test_matches_adaptive_quadrature():
    polygon = np.array([[0.0, 0.0], [2.0, 0.0], [2.5, 1.0], [1.0, 2.0], [-0.5, 1.0]])
    center = np.array([0.8, 0.7])
    fluid = FluidParams(1.3, 0.0)

    def pressure(x):
        return np.exp(0.3 * x[:, 0]) * np.cos(x[:, 1])

    expected = np.zeros(3)
    for a, b in zip(polygon, np.roll(polygon, -1, axis=0)):
        edge = b - a
        length = np.linalg.norm(edge)
        normal = np.array([edge[1], -edge[0]]) / length

        def traction(s, component):
            x = a + s * edge
            t = fluid.density * pressure(x[None, :])[0] * normal
            if component < 2:
                return t[component] * length
            dx = x - center
            return (dx[0] * t[1] - dx[1] * t[0]) * length

        expected += [integrate.quad(traction, 0.0, 1.0, args=(k,))[0] for k in range(3)]

    load = compute_force_moment(sample_stress(polygon_segments(polygon), pressure, order=8), fluid, center)
    assert load.force == pytest.approx(expected[:2], rel=1e-10, abs=1e-12)
    assert load.moment == pytest.approx(expected[2], rel=1e-10, abs=1e-12)
