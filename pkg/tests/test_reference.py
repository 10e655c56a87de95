import logging

import numpy as np
import pytest

from frats.constants import SIDES
from frats.exceptions import ConfigurationError
from frats.fractures import FractureNetwork, intersect
from frats.mesh import BoundarySegment, build_uniform, classify_boundary
from frats.pressure import MaterialField, assemble, solve
from frats.reference import (
    build_reference_mesh,
    calc_transmissibility,
    reference_qoi,
    solve_pressure_tpfa,
    solve_reference,
    solve_transport_reference,
    to_reference_solution,
)
from frats.transport import TransportConfig

UNIT = (0.0, 1.0, 0.0, 1.0)


def dirichlet_layout(value):
    return [BoundarySegment(side, "dirichlet", value) for side in SIDES]


def column_layout():
    return [
        BoundarySegment("left", "dirichlet", 1.0),
        BoundarySegment("right", "dirichlet", 0.0),
        BoundarySegment("bottom", "neumann", 0.0),
        BoundarySegment("top", "neumann", 0.0),
    ]


def test_harmonic_transmissibility():
    mesh = build_uniform(2, 1, UNIT)
    transmissibility = calc_transmissibility(mesh, np.array([1.0, 3.0]))
    face = mesh.face_lookup[(0, 1)]
    assert transmissibility[face] == pytest.approx(1.5 * 1.0 / 0.5)
    left = np.flatnonzero(mesh.face_boundary_side == 0)
    assert transmissibility[left] == pytest.approx([1.0 / 0.25])


def test_affine_pressure_is_exact():
    mesh = build_uniform(5, 4, UNIT)
    face_sets = classify_boundary(mesh, dirichlet_layout(lambda x, y: 2.0 - x + 0.5 * y))
    result = solve_pressure_tpfa(mesh, 2.0, face_sets)
    x, y = mesh.centers.T
    assert np.allclose(result.pressure, 2.0 - x + 0.5 * y, atol=1e-10)
    assert result.flux.conservative


def test_quadratic_pressure_converges():
    errors = []
    for n in (8, 16):
        mesh = build_uniform(n, n, UNIT)
        face_sets = classify_boundary(mesh, dirichlet_layout(lambda x, y: x**2))
        result = solve_pressure_tpfa(mesh, 1.0, face_sets, source=-2.0)
        errors.append(np.abs(result.pressure - mesh.centers[:, 0] ** 2).max())
    assert errors[0] / errors[1] > 3.0


def test_agrees_with_finite_elements_without_fractures():
    mesh = build_uniform(6, 6, UNIT)
    face_sets = classify_boundary(mesh, column_layout())
    intersection = intersect(mesh, FractureNetwork.empty(mesh.domain))
    pressure = solve(assemble(mesh, intersection, MaterialField.uniform(mesh), face_sets))
    result = solve_pressure_tpfa(mesh, 1.0, face_sets)
    assert np.allclose(result.pressure, pressure.element_values(), atol=1e-10)


def test_pure_neumann_rejected():
    mesh = build_uniform(2, 2, UNIT)
    layout = [BoundarySegment(side, "neumann", 0.0) for side in SIDES]
    with pytest.raises(ConfigurationError):
        solve_pressure_tpfa(mesh, 1.0, classify_boundary(mesh, layout))


def test_fluxes_are_conservative_with_sources():
    mesh = build_uniform(6, 5, UNIT)
    face_sets = classify_boundary(mesh, column_layout())
    permeability = np.linspace(1.0, 10.0, mesh.n_elements)
    result = solve_pressure_tpfa(mesh, permeability, face_sets, source=0.3)
    balance = mesh.divergence @ result.flux.values - 0.3 * mesh.areas
    assert np.abs(balance).max() <= 1e-10 * result.flux.max_flux


def test_reference_mesh_without_fractures():
    base = build_uniform(4, 4, UNIT)
    reference = build_reference_mesh(base, FractureNetwork.empty(base.domain))
    assert reference.mesh is base
    assert not reference.strip.any()


def test_reference_mesh_resolves_strip():
    base = build_uniform(10, 10, UNIT)
    network = FractureNetwork.from_segments(
        [(0.5, 0.0, 0.5, 1.0)], UNIT, aperture=0.1, permeability=50.0
    )
    reference = build_reference_mesh(base, network, max_level=6)
    mesh = reference.mesh
    row = (mesh.bounds[:, 2] <= 0.5) & (mesh.bounds[:, 3] > 0.5)
    assert int((reference.strip & row).sum()) >= 10
    assert reference.width == pytest.approx(0.1)
    assert np.allclose(reference.permeability[reference.strip], 50.0)
    assert np.allclose(reference.permeability[~reference.strip], 1.0)


def test_reference_mesh_widens_strip(caplog):
    base = build_uniform(4, 4, UNIT)
    network = FractureNetwork.from_segments(
        [(0.5, 0.0, 0.5, 1.0)], UNIT, aperture=1e-4, permeability=1e4
    )
    with caplog.at_level(logging.WARNING):
        reference = build_reference_mesh(base, network, cells_across=2, max_level=2)
    assert "увеличена" in caplog.text
    assert reference.width == pytest.approx(0.125)
    strip_permeability = reference.permeability[reference.strip]
    assert np.allclose(strip_permeability * reference.width, 1e-4 * 1e4)
    assert reference.cells_across == pytest.approx(2.0)


def test_reference_mesh_rejects_mixed_apertures():
    base = build_uniform(4, 4, UNIT)
    network = FractureNetwork.from_segments(
        [(0.1, 0.2, 0.9, 0.2), (0.1, 0.7, 0.9, 0.7)], UNIT, aperture=[1e-3, 2e-3]
    )
    with pytest.raises(ConfigurationError):
        build_reference_mesh(base, network)


def test_column_transport_matches_recursion():
    domain = (0.0, 4.0, 0.0, 1.0)
    mesh = build_uniform(4, 1, domain)
    result = solve_pressure_tpfa(mesh, 4.0, classify_boundary(mesh, column_layout()))
    assert np.allclose(result.flux.values[mesh.interior_faces], 1.0)
    transport = solve_transport_reference(result, TransportConfig(dt=0.5, end_time=0.5))
    assert np.allclose(transport.final.values, [(1.0 / 3.0) ** (k + 1) for k in range(4)])


def test_zero_velocity_keeps_field():
    mesh = build_uniform(4, 4, UNIT)
    result = solve_pressure_tpfa(mesh, 1.0, classify_boundary(mesh, dirichlet_layout(1.0)))
    assert np.allclose(result.flux.values, 0.0, atol=1e-12)
    transport = solve_transport_reference(
        result, TransportConfig(dt=0.1, end_time=0.5, c0=0.3)
    )
    assert np.allclose(transport.final.values, 0.3)


def test_reference_qoi_counts_strip_outflow():
    domain = (0.0, 4.0, 0.0, 1.0)
    mesh = build_uniform(4, 4, domain)
    result = solve_pressure_tpfa(mesh, 4.0, classify_boundary(mesh, column_layout()))
    transport = solve_transport_reference(result, TransportConfig(dt=1.0, end_time=1.0))
    field = transport.final
    right = np.flatnonzero(mesh.face_boundary_side == 1)
    owners = mesh.face_neighbors[right, 0]
    top = owners[np.argmax(mesh.centers[owners, 1])]
    qoi = reference_qoi(field, result.flux, np.array([[4.0, 0.875], [4.0, 0.5]]), 0.25)
    rate = result.flux.values[right[0]]
    assert qoi[0] == pytest.approx(rate * field.values[top])
    assert qoi[1] == pytest.approx(rate * field.values[top])
    with pytest.raises(ConfigurationError):
        reference_qoi(field, result.flux, np.array([[2.0, 0.5]]), 0.25)


def test_solve_reference_and_solution():
    base = build_uniform(4, 4, UNIT)
    network = FractureNetwork.from_segments(
        [(0.0, 0.5, 1.0, 0.5)], UNIT, aperture=0.05, permeability=100.0
    )
    reference = build_reference_mesh(base, network, cells_across=2, max_level=4)
    result = solve_reference(reference, column_layout())
    solution = to_reference_solution(reference, result.pressure)
    assert solution.n_cells == reference.mesh.n_elements
    assert solution.domain_area == pytest.approx(1.0)
    assert np.array_equal(solution.on_fracture, reference.strip)
    assert solution.on_fracture.any()
    assert 0.0 < solution.values.min() < solution.values.max() < 1.0
