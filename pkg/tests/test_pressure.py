import inspect

import numpy as np
import pytest
from scipy import sparse
from scipy.sparse import linalg as splinalg

from frats.constants import SIDES, SYSTEM_STATS_DESC
from frats.exceptions import ConfigurationError, MaterialError, NumericalError
from frats.fractures import FractureNetwork, intersect
from frats.mesh import BoundarySegment, build_uniform, classify_boundary, refine
from frats.pressure import MaterialField, assemble, estimate_condition, solve

UNIT = (0.0, 1.0, 0.0, 1.0)
REGULAR_SEGMENTS = [
    (0.0, 0.5, 1.0, 0.5),
    (0.5, 0.0, 0.5, 1.0),
    (0.5, 0.75, 1.0, 0.75),
    (0.75, 0.5, 0.75, 1.0),
    (0.5, 0.625, 0.75, 0.625),
    (0.625, 0.5, 0.625, 0.75),
]


def benchmark_layout():
    return [
        BoundarySegment("left", "neumann", -1.0),
        BoundarySegment("right", "dirichlet", 1.0),
        BoundarySegment("bottom", "neumann", 0.0),
        BoundarySegment("top", "neumann", 0.0),
    ]


def linear_dirichlet_layout():
    return [BoundarySegment(side, "dirichlet", lambda x, y: 2.0 - x) for side in SIDES]


def build_system(mesh, segments=(), layout=None, permeability=1e4, aperture=1e-4, **materials):
    network = FractureNetwork.from_segments(
        segments, UNIT, aperture=aperture, permeability=permeability
    )
    intersection = intersect(mesh, network)
    face_sets = classify_boundary(mesh, layout or benchmark_layout())
    return assemble(mesh, intersection, MaterialField.uniform(mesh, **materials), face_sets)


@pytest.fixture(scope="module")
def umr37_system():
    return build_system(build_uniform(37, 37, UNIT), REGULAR_SEGMENTS)


def test_affine_solution_unfractured():
    mesh = build_uniform(4, 4, UNIT)
    field = solve(build_system(mesh))
    assert np.allclose(field.values, 2.0 - mesh.vertices[:, 0], atol=1e-10)


def test_affine_solution_with_orthogonal_fracture():
    mesh = build_uniform(3, 3, UNIT)
    field = solve(build_system(mesh, [(0.5, 0.0, 0.5, 1.0)]))
    assert np.allclose(field.values, 2.0 - mesh.vertices[:, 0], atol=1e-10)


def test_affine_solution_with_hanging_nodes():
    mesh = refine(refine(build_uniform(3, 3, UNIT), {4}), {0, 5})
    assert mesh.n_hanging > 0
    field = solve(build_system(mesh, [(0.45, 0.1, 0.45, 0.9)], linear_dirichlet_layout()))
    assert np.allclose(field.values, 2.0 - mesh.vertices[:, 0], atol=1e-10)


def test_affine_solution_along_fracture():
    mesh = build_uniform(3, 3, UNIT)
    field = solve(build_system(mesh, [(0.0, 0.5, 1.0, 0.5)], linear_dirichlet_layout()))
    assert np.allclose(field.values, 2.0 - mesh.vertices[:, 0], atol=1e-10)
    points = np.array([[0.2, 0.5], [0.6, 0.5]])
    assert np.allclose(field.fracture_rate(points, [0, 0]), 1.0)


def test_field_evaluation():
    mesh = build_uniform(4, 4, UNIT)
    field = solve(build_system(mesh))
    points = np.array([[0.1, 0.3], [0.55, 0.95], [0.9, 0.2]])
    assert np.allclose(field.evaluate(points), 2.0 - points[:, 0])
    assert np.allclose(field.gradient(points), [[-1.0, 0.0]] * 3)
    assert np.allclose(field.velocity(points), [[1.0, 0.0]] * 3)
    assert field.min == pytest.approx(1.0)
    assert field.max == pytest.approx(2.0)


def test_laplace_rows_sum_to_zero():
    system = build_system(build_uniform(5, 5, UNIT))
    assert np.allclose(np.asarray(system.matrix.sum(axis=1)).ravel(), 0.0, atol=1e-12)


def test_fracture_terms_keep_constants_in_kernel():
    system = build_system(build_uniform(5, 5, UNIT), REGULAR_SEGMENTS)
    assert np.allclose(np.asarray(system.matrix.sum(axis=1)).ravel(), 0.0, atol=1e-9)
    assert abs(system.matrix - system.matrix.T).max() < 1e-12


def test_weak_fracture_limit():
    mesh = build_uniform(5, 5, UNIT)
    plain = build_system(mesh)
    weak = build_system(mesh, [(0.1, 0.3, 0.9, 0.7)], permeability=1e-12, aperture=1.0)
    assert abs(weak.matrix - plain.matrix).max() < 1e-10


def test_neumann_load_balance():
    system = build_system(build_uniform(4, 4, UNIT), [(0.0, 0.5, 1.0, 0.5)])
    assert system.rhs.sum() == pytest.approx(1.0 + 1e-4)


def test_matrix_source_load():
    system = build_system(build_uniform(4, 4, UNIT), source=2.0)
    assert system.rhs.sum() == pytest.approx(1.0 + 2.0)


def test_cg_matches_direct():
    mesh = build_uniform(6, 6, UNIT)
    system = build_system(mesh, REGULAR_SEGMENTS)
    direct = solve(system)
    iterative = solve(system, method="cg")
    assert np.allclose(direct.values, iterative.values, atol=1e-6)
    assert iterative.residual <= 1e-10


def test_cg_accepts_relative_tolerance():
    assert "rtol" in inspect.signature(splinalg.cg).parameters


def test_cg_iteration_budget():
    system = build_system(build_uniform(8, 8, UNIT), REGULAR_SEGMENTS)
    with pytest.raises(NumericalError) as error:
        solve(system, method="cg", max_iterations=1)
    assert error.value.residual > 0


def test_unknown_method():
    with pytest.raises(ConfigurationError):
        solve(build_system(build_uniform(2, 2, UNIT)), method="gmres")


def test_pure_neumann_rejected():
    layout = [BoundarySegment(side, "neumann", 0.0) for side in SIDES]
    with pytest.raises(ConfigurationError):
        build_system(build_uniform(2, 2, UNIT), layout=layout)


def test_nonpositive_fracture_permeability():
    with pytest.raises(MaterialError):
        build_system(build_uniform(2, 2, UNIT), [(0.1, 0.3, 0.9, 0.7)], permeability=-1.0)


@pytest.mark.parametrize(
    "permeability",
    [np.array([[1.0, 0.5], [0.0, 1.0]]), np.array([[1.0, 0.0], [0.0, -1.0]]), 0.0],
)
def test_invalid_permeability_tensor(permeability):
    with pytest.raises(MaterialError):
        MaterialField.uniform(build_uniform(2, 2, UNIT), permeability=permeability)


def test_invalid_porosity():
    with pytest.raises(MaterialError):
        MaterialField.uniform(build_uniform(2, 2, UNIT), porosity=0.0)


def test_anisotropic_permeability():
    mesh = build_uniform(4, 4, UNIT)
    tensor = np.array([[2.0, 0.0], [0.0, 0.5]])
    system = build_system(mesh, layout=linear_dirichlet_layout(), permeability=1.0)
    anisotropic = assemble(
        mesh,
        system.intersection,
        MaterialField.uniform(mesh, permeability=tensor),
        system.face_sets,
    )
    field = solve(anisotropic)
    assert np.allclose(field.velocity(mesh.centers), [[2.0, 0.0]] * mesh.n_elements)


@pytest.mark.parametrize(
    "matrix, expected",
    [(np.eye(3), 1.0), (np.diag([1.0, 10.0]), 10.0)],
)
def test_estimate_condition_small(matrix, expected):
    assert estimate_condition(matrix) == pytest.approx(expected)


def test_estimate_condition_sparse():
    matrix = sparse.diags(np.linspace(1.0, 500.0, 500)).tocsr()
    assert estimate_condition(matrix) == pytest.approx(500.0, rel=1e-6)


def test_umr37_structure(umr37_system):
    stats = umr37_system.get_stats()
    assert stats["n_dofs"] == 1444
    assert stats["density"] == pytest.approx(5.9e-3, rel=0.1)


@pytest.mark.slow
def test_umr37_condition(umr37_system):
    condition = estimate_condition(umr37_system)
    assert 1e4 <= condition <= 1e5


def test_print_stats(capsys):
    build_system(build_uniform(3, 3, UNIT)).print_stats()
    captured = capsys.readouterr()
    assert all(desc in captured.out for desc in SYSTEM_STATS_DESC.values())
