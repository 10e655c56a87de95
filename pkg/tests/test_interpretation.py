import numpy as np
import pytest

from frats.constants import PARTITION_STATS_DESC
from frats.exceptions import InterpretationError
from frats.fractures import FractureNetwork, intersect
from frats.interpretation import interpret, partition, partition_all
from frats.mesh import build_uniform
from frats.transport import ConcentrationField

UNIT = (0.0, 1.0, 0.0, 1.0)
REGULAR_SEGMENTS = [
    (0.0, 0.5, 1.0, 0.5),
    (0.5, 0.0, 0.5, 1.0),
    (0.5, 0.75, 1.0, 0.75),
    (0.75, 0.5, 0.75, 1.0),
    (0.5, 0.625, 0.75, 0.625),
    (0.625, 0.5, 0.625, 0.75),
]


def intersection_of(mesh, segments, domain=UNIT):
    return intersect(mesh, FractureNetwork.from_segments(segments, domain))


def element_at(mesh, x, y):
    return int(mesh.locate(np.array([[x, y]]))[0])


def field_of(intersection, values):
    return ConcentrationField(
        intersection.mesh, np.asarray(values, dtype=float), intersection.fractured
    )


@pytest.fixture(scope="module")
def benchmark_partitioning():
    mesh = build_uniform(19, 19, UNIT)
    intersection = intersection_of(mesh, REGULAR_SEGMENTS)
    return partition_all(mesh, intersection)


def test_partition_horizontal_fracture():
    mesh = build_uniform(3, 3, UNIT)
    intersection = intersection_of(mesh, [(0.0, 0.5, 1.0, 0.5)])
    element = element_at(mesh, 0.5, 0.5)
    item = partition(element, intersection)
    assert item.n_subelements == 2
    assert np.allclose(sorted(item.areas), [1.0 / 18.0, 1.0 / 18.0])
    lower, upper = item.centroids
    assert lower[1] < 0.5 < upper[1]
    assert item.traces.shape == (1, 2, 2)


def test_partition_crossing_fractures():
    mesh = build_uniform(3, 3, UNIT)
    intersection = intersection_of(mesh, [(0.0, 0.5, 1.0, 0.5), (0.5, 0.0, 0.5, 1.0)])
    item = partition(element_at(mesh, 0.5, 0.5), intersection)
    assert item.n_subelements == 4
    assert np.allclose(item.areas, 1.0 / 36.0)


def test_partition_terminating_fracture():
    mesh = build_uniform(3, 3, UNIT)
    intersection = intersection_of(mesh, [(0.0, 0.5, 0.5, 0.5)])
    tip = partition(element_at(mesh, 0.5, 0.5), intersection)
    assert tip.n_subelements == 1
    assert tip.areas[0] == pytest.approx(1.0 / 9.0)
    through = partition(element_at(mesh, 0.1, 0.5), intersection)
    assert through.n_subelements == 2


def test_partition_oblique_fracture():
    mesh = build_uniform(2, 2, UNIT)
    intersection = intersection_of(mesh, [(0.0, 0.1, 1.0, 0.7)])
    item = partition(element_at(mesh, 0.25, 0.25), intersection)
    assert item.n_subelements == 2
    assert item.areas.sum() == pytest.approx(0.25, rel=1e-12)
    assert min(item.areas) == pytest.approx(0.5 * (0.1 + 0.4) * 0.5)


def test_subelement_areas_sum(benchmark_partitioning):
    mesh = benchmark_partitioning.mesh
    for element, item in benchmark_partitioning.partitions.items():
        assert item.areas.sum() == pytest.approx(mesh.areas[element], rel=1e-10)
        assert np.all(item.labels >= 0)


def test_interpret_single_fracture():
    mesh = build_uniform(3, 3, UNIT)
    intersection = intersection_of(mesh, [(0.0, 0.5, 1.0, 0.5)])
    values = np.where(mesh.centers[:, 1] < 0.4, 0.2, 0.8)
    values[intersection.fractured] = 0.5
    result = interpret(field_of(intersection, values), partition_all(mesh, intersection))
    for element in np.flatnonzero(intersection.fractured):
        assert np.allclose(result.subelement_values(int(element)), [0.2, 0.8])
    assert np.allclose(result.trace_values, 0.5)
    assert np.allclose(result.evaluate(np.array([[0.5, 0.4], [0.5, 0.6]])), [0.2, 0.8])


def test_interpret_crossing_fractures():
    mesh = build_uniform(3, 3, UNIT)
    intersection = intersection_of(mesh, [(0.0, 0.5, 1.0, 0.5), (0.5, 0.0, 0.5, 1.0)])
    partitioning = partition_all(mesh, intersection)
    assert len(np.unique(intersection.subdomain[~intersection.fractured])) == 4
    values = np.zeros(mesh.n_elements)
    corners = {(0.1, 0.1): 1.0, (0.9, 0.1): 2.0, (0.1, 0.9): 3.0, (0.9, 0.9): 4.0}
    for (x, y), value in corners.items():
        values[element_at(mesh, x, y)] = value
    result = interpret(field_of(intersection, values), partitioning)
    points = np.array([[0.45, 0.45], [0.55, 0.45], [0.45, 0.55], [0.55, 0.55]])
    assert np.allclose(result.evaluate(points), [1.0, 2.0, 3.0, 4.0])


def test_interpret_sweeps_through_fractured_elements():
    domain = (0.0, 3.0, 0.0, 1.0)
    mesh = build_uniform(3, 1, domain)
    intersection = intersection_of(mesh, [(1.5, 0.5, 2.5, 0.5)], domain)
    assert list(intersection.fractured) == [False, True, True]
    result = interpret(field_of(intersection, [0.1, 0.7, 0.9]), partition_all(mesh, intersection))
    assert np.allclose(result.subelement_values(1), [0.1])
    assert np.allclose(result.subelement_values(2), [0.1])
    assert np.allclose(result.trace_values, [0.7, 0.9])


def test_interpret_without_fractures():
    mesh = build_uniform(4, 4, UNIT)
    intersection = intersect(mesh, FractureNetwork.empty(mesh.domain))
    values = np.linspace(0.0, 1.0, mesh.n_elements)
    result = interpret(field_of(intersection, values), partition_all(mesh, intersection))
    assert np.array_equal(result.piece_values, values)
    assert np.array_equal(result.matrix_values, values)


def test_interpret_requires_matrix_elements():
    mesh = build_uniform(2, 1, UNIT)
    intersection = intersection_of(mesh, [(0.0, 0.5, 1.0, 0.5)])
    partitioning = partition_all(mesh, intersection)
    assert np.all(partitioning.piece_label == -1)
    with pytest.raises(InterpretationError) as error:
        interpret(field_of(intersection, [0.3, 0.6]), partitioning)
    assert len(error.value.subelements) == 4


def test_interpret_locality_and_determinism(benchmark_partitioning):
    intersection = benchmark_partitioning.intersection
    values = np.random.default_rng(7).random(intersection.mesh.n_elements)
    field = field_of(intersection, values)
    first = interpret(field, benchmark_partitioning)
    second = interpret(field, benchmark_partitioning)
    assert np.array_equal(first.piece_values, second.piece_values)

    labels = benchmark_partitioning.piece_label
    matrix = benchmark_partitioning.matrix_pieces
    for piece in benchmark_partitioning.subelement_pieces:
        donors = matrix[labels[matrix] == labels[piece]]
        assert first.piece_values[piece] in values[donors]
    assert np.array_equal(first.matrix_values, values[~intersection.fractured])
    assert np.array_equal(first.trace_values, values[intersection.fractured])


def test_print_stats(capsys, benchmark_partitioning):
    benchmark_partitioning.print_stats()
    captured = capsys.readouterr()
    assert all(desc in captured.out for desc in PARTITION_STATS_DESC.values())
    assert benchmark_partitioning.get_stats()["n_subdomains"] == 10
