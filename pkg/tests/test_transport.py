import numpy as np
import pytest

from frats.constants import FACE_FRACTURE, SIDES, TRANSPORT_STATS_DESC
from frats.exceptions import ConfigurationError
from frats.flux import FaceFluxField, average_flux, postprocess
from frats.fractures import FractureNetwork, intersect
from frats.mesh import BoundarySegment, build_uniform, classify_boundary
from frats.pressure import MaterialField, assemble, solve
from frats.transport import (
    PiecewiseVelocity,
    TransportConfig,
    TransportOperator,
    explicit_velocity_mode,
    init,
    mass_balance,
    run,
    step,
)

UNIT = (0.0, 1.0, 0.0, 1.0)
REGULAR_SEGMENTS = [
    (0.0, 0.5, 1.0, 0.5),
    (0.5, 0.0, 0.5, 1.0),
    (0.5, 0.75, 1.0, 0.75),
    (0.75, 0.5, 0.75, 1.0),
    (0.5, 0.625, 0.75, 0.625),
    (0.625, 0.5, 0.625, 0.75),
]


def no_flow_layout():
    return [BoundarySegment(side, "neumann", 0.0) for side in SIDES]


def cell_flux(mesh, values, **materials):
    return FaceFluxField(
        mesh=mesh,
        values=np.asarray(values, dtype=float),
        face_sets=classify_boundary(mesh, no_flow_layout()),
        intersection=intersect(mesh, FractureNetwork.empty(mesh.domain)),
        materials=MaterialField.uniform(mesh, **materials),
    )


def pure_transport_flux(n, velocity):
    mesh = build_uniform(n, n, UNIT)
    network = FractureNetwork.from_segments([(0.0, 0.5, 1.0, 0.5)], UNIT, aperture=1.0)
    return explicit_velocity_mode(mesh, intersect(mesh, network), velocity)


def steady_fracture_profile(n, velocity):
    flux = pure_transport_flux(n, velocity)
    config = TransportConfig(dt=0.001, end_time=5.0, stop_at_steady=True)
    result = run(flux, config)
    assert result.steady_time is not None
    fractured = result.final.fractured
    centers = flux.mesh.centers[fractured, 0]
    order = np.argsort(centers)
    return centers[order], result.final.fracture_values[order]


@pytest.fixture(scope="module")
def benchmark_flux():
    mesh = build_uniform(19, 19, UNIT)
    network = FractureNetwork.from_segments(
        REGULAR_SEGMENTS, UNIT, aperture=1e-4, permeability=1e4
    )
    layout = [
        BoundarySegment("left", "neumann", -1.0),
        BoundarySegment("right", "dirichlet", 1.0),
        BoundarySegment("bottom", "neumann", 0.0),
        BoundarySegment("top", "neumann", 0.0),
    ]
    face_sets = classify_boundary(mesh, layout)
    intersection = intersect(mesh, network)
    system = assemble(mesh, intersection, MaterialField.uniform(mesh), face_sets)
    return postprocess(average_flux(solve(system), face_sets))


def test_init_zero():
    mesh = build_uniform(3, 3, UNIT)
    field = init(mesh, intersect(mesh, FractureNetwork.empty(mesh.domain)))
    assert np.all(field.values == 0.0)
    assert field.time == 0.0


def test_init_cell_means():
    mesh = build_uniform(2, 1, UNIT)
    field = init(mesh, intersect(mesh, FractureNetwork.empty(mesh.domain)), lambda x, y: x)
    assert np.allclose(field.values, [0.25, 0.75])


def test_init_fracture_values():
    mesh = build_uniform(3, 3, UNIT)
    network = FractureNetwork.from_segments([(0.0, 0.5, 1.0, 0.5)], UNIT)
    field = init(mesh, intersect(mesh, network), 0.0, 1.0)
    assert np.allclose(field.fracture_values, 1.0)
    assert np.allclose(field.matrix_values, 0.0)


def test_init_fracture_arc_length_mean():
    mesh = build_uniform(2, 2, UNIT)
    network = FractureNetwork.from_segments([(0.0, 0.3, 1.0, 0.3)], UNIT)
    field = init(mesh, intersect(mesh, network), 0.0, lambda x, y: x)
    assert np.allclose(field.fracture_values, [0.25, 0.75])


@pytest.mark.parametrize("dt", [1e-3, 1.0, 1e3])
def test_zero_flux_keeps_field(dt):
    mesh = build_uniform(3, 3, UNIT)
    flux = cell_flux(mesh, np.zeros(mesh.n_faces))
    field = init(mesh, flux.intersection, lambda x, y: x * y)
    new = step(field, TransportOperator(flux, dt))
    assert np.allclose(new.values, field.values)
    assert new.time == pytest.approx(dt)


def test_single_cell_update():
    mesh = build_uniform(1, 1, UNIT)
    values = np.zeros(mesh.n_faces)
    values[mesh.face_boundary_side == 0] = -2.0
    values[mesh.face_boundary_side == 1] = 2.0
    flux = cell_flux(mesh, values)
    operator = TransportOperator(flux, 0.1, c_boundary=1.0)
    new = operator.step(np.array([0.5]))
    assert new[0] == pytest.approx((0.5 + 0.1 * 2.0) / (1.0 + 0.1 * 2.0))


def test_matrix_source_and_sink():
    mesh = build_uniform(1, 1, UNIT)
    injector = TransportOperator(cell_flux(mesh, np.zeros(4), source=1.0), 0.1, c_source=1.0)
    assert injector.step(np.array([0.0]))[0] == pytest.approx(0.1)
    producer = TransportOperator(cell_flux(mesh, np.zeros(4), source=-1.0), 0.1)
    assert producer.step(np.array([0.5]))[0] == pytest.approx(0.5 / 1.1)


def test_invalid_time_step():
    with pytest.raises(ConfigurationError):
        TransportConfig(dt=0.0, end_time=1.0)
    mesh = build_uniform(1, 1, UNIT)
    with pytest.raises(ConfigurationError):
        TransportOperator(cell_flux(mesh, np.zeros(4)), -1.0)


def test_explicit_velocity_inflow_4x4():
    flux = pure_transport_flux(4, PiecewiseVelocity.inflow())
    mesh = flux.mesh
    horizontal = np.flatnonzero(mesh.face_normals[:, 1] != 0)
    upward = flux.values[horizontal] * mesh.face_normals[horizontal, 1]
    below = mesh.face_centers[horizontal, 1] < 0.5
    assert np.allclose(upward[below], 0.25)
    assert np.allclose(upward[~below], -0.25)
    fracture = flux.intersection.face_kind == FACE_FRACTURE
    assert fracture.sum() == 3
    assert np.allclose(flux.values[fracture], 10.0)
    crossed = flux.intersection.crossing_face
    boundary = crossed[mesh.face_neighbors[crossed, 1] < 0]
    assert np.allclose(flux.values[boundary], 10.0 * mesh.face_normals[boundary, 0])


def test_explicit_zero_velocity():
    velocity = PiecewiseVelocity((0.0, 0.0), (0.0, 0.0), (0.0, 0.0))
    flux = pure_transport_flux(4, velocity)
    assert np.all(flux.values == 0.0)


def test_end_time_zero_returns_initial():
    flux = pure_transport_flux(4, PiecewiseVelocity.inflow())
    result = run(flux, TransportConfig(dt=0.01, end_time=0.0))
    assert result.n_steps == 0
    assert len(result.fields) == 1
    assert np.all(result.final.values == 0.0)


def test_truncated_last_step_and_outputs():
    flux = pure_transport_flux(4, PiecewiseVelocity.inflow())
    config = TransportConfig(dt=0.1, end_time=0.25, output_times=[0.1, 0.2])
    result = run(flux, config, qoi=lambda field: [field.max])
    assert result.n_steps == 3
    assert np.allclose(result.times, [0.0, 0.1, 0.2, 0.25])
    assert result.qoi.shape == (4, 2)
    assert np.allclose(result.qoi[:, 0], [0.0, 0.1, 0.2, 0.25])


def test_inflow_steady_profile():
    n = 16
    centers, values = steady_fracture_profile(n, PiecewiseVelocity.inflow())
    h = 1.0 / n
    assert np.allclose(values, 1.0 + 0.2 * (centers + 0.5 * h), atol=1e-7)
    error = np.abs(values - (1.0 + 0.2 * centers)).max()
    assert error == pytest.approx(0.1 * h, abs=1e-7)


@pytest.mark.slow
@pytest.mark.parametrize("n", [32, 64])
def test_inflow_steady_profile_fine(n):
    centers, values = steady_fracture_profile(n, PiecewiseVelocity.inflow())
    assert np.abs(values - (1.0 + 0.2 * centers)).max() <= 0.15 / n
    assert values[-1] == pytest.approx(1.2, abs=1e-7)


@pytest.mark.slow
def test_outflow_first_order():
    errors = []
    for n in (32, 64):
        centers, values = steady_fracture_profile(n, PiecewiseVelocity.outflow())
        errors.append(np.abs(values - np.exp(-0.2 * centers)).max())
    assert errors[0] / errors[1] == pytest.approx(2.0, abs=0.4)


def test_outflow_profile_decreases():
    centers, values = steady_fracture_profile(8, PiecewiseVelocity.outflow())
    assert np.all(np.diff(values) < 0)
    assert values[-1] == pytest.approx(np.exp(-0.2), abs=0.05)


def test_max_principle_and_balance(benchmark_flux):
    config = TransportConfig(dt=5e-4, end_time=0.02)
    operator = TransportOperator.from_config(benchmark_flux, config)
    field = init(benchmark_flux.mesh, benchmark_flux.intersection)
    for _ in range(40):
        new = step(field, operator)
        assert new.min >= -1e-9
        assert new.max <= 1.0 + 1e-9
        change, net = mass_balance(operator, field.values, new.values)
        assert change == pytest.approx(net, rel=1e-8, abs=1e-14)
        field = new


def test_run_reports_balance(benchmark_flux):
    result = run(benchmark_flux, TransportConfig(dt=5e-4, end_time=0.01))
    assert result.n_steps == 20
    assert result.balance_error <= 1e-8
    assert -1e-9 <= result.final.min <= result.final.max <= 1.0 + 1e-9


def test_print_stats(capsys, benchmark_flux):
    run(benchmark_flux, TransportConfig(dt=1e-3, end_time=0.002)).print_stats()
    captured = capsys.readouterr()
    assert all(desc in captured.out for desc in TRANSPORT_STATS_DESC.values())
