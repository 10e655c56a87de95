from typing import Dict, Optional, Tuple, Union

import logging
import time
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .constants import (
    DEFAULT_PERMEABILITY,
    DEFAULT_POROSITY,
    DENSE_CONDITION_LIMIT,
    MAX_CG_ITERATIONS,
    MAX_REFINEMENT_STEPS,
    PRESSURE_TOLERANCE,
    SOLVER_METHODS,
    SYSTEM_STATS_DESC,
)
from .exceptions import ConfigurationError, MaterialError, NumericalError
from .fractures import IntersectionData
from .mesh import FaceSets, Mesh
from .utils import gauss_rule

logger = logging.getLogger(__name__)

Permeability = Union[float, np.ndarray]


def local_coordinates(mesh: Mesh, elements: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Координаты точек на эталонном квадрате [0, 1]² своих элементов"""
    bounds = mesh.bounds[elements]
    return (np.atleast_2d(points) - bounds[:, [0, 2]]) / mesh.sizes[elements]


def shape_functions(local: np.ndarray) -> np.ndarray:
    """Билинейные базисные функции в порядке вершин элемента (н-л, н-п, в-п, в-л)"""
    xi, eta = np.atleast_2d(local).T
    return np.column_stack([(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta])


def shape_gradients(local: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Градиенты билинейных базисных функций, массив (n, 4, 2)"""
    xi, eta = np.atleast_2d(local).T
    d_xi = np.column_stack([-(1 - eta), 1 - eta, eta, -eta]) / sizes[:, :1]
    d_eta = np.column_stack([-(1 - xi), -xi, xi, 1 - xi]) / sizes[:, 1:]
    return np.stack([d_xi, d_eta], axis=2)


def _as_tensors(permeability: Permeability, n_elements: int) -> np.ndarray:
    value = np.asarray(permeability, dtype=float)
    if value.ndim == 0:
        return np.broadcast_to(value * np.eye(2), (n_elements, 2, 2)).copy()
    if value.shape == (2, 2):
        return np.broadcast_to(value, (n_elements, 2, 2)).copy()
    if value.shape == (n_elements,):
        return value[:, None, None] * np.eye(2)
    if value.shape == (n_elements, 2, 2):
        return value.copy()
    raise MaterialError(f"Некорректная форма тензора проницаемости: {value.shape}")


@dataclass(frozen=True)
class MaterialField:
    """
    Свойства матрицы и источники

    Аргументы:
        permeability (np.ndarray): Тензоры проницаемости κ элементов (n_elements, 2, 2)
        porosity (np.ndarray): Пористость φ элементов
        source (np.ndarray): Плотность источника q в элементах
        fracture_source (np.ndarray): Плотность источника q_Γ на ребрах сети

    Исключения:
        MaterialError: Если тензор не симметричен или не положительно определен,
            либо пористость вне (0, 1]
    """

    permeability: np.ndarray
    porosity: np.ndarray
    source: np.ndarray
    fracture_source: np.ndarray

    def __post_init__(self):
        tensors = self.permeability
        if not np.allclose(tensors, np.transpose(tensors, (0, 2, 1))):
            raise MaterialError("Тензор проницаемости должен быть симметричным")
        if len(tensors) and np.linalg.eigvalsh(tensors).min() <= 0.0:
            raise MaterialError("Тензор проницаемости должен быть положительно определенным")
        if np.any((self.porosity <= 0.0) | (self.porosity > 1.0)):
            raise MaterialError("Пористость матрицы должна лежать в (0, 1]")

    @classmethod
    def uniform(
        cls,
        mesh: Mesh,
        permeability: Permeability = DEFAULT_PERMEABILITY,
        porosity: Union[float, np.ndarray] = DEFAULT_POROSITY,
        source: Union[float, np.ndarray] = 0.0,
        fracture_source: Union[float, np.ndarray] = 0.0,
    ) -> "MaterialField":
        """
        Построение поля свойств по скалярам или массивам

        Аргументы:
            mesh (Mesh): Сетка
            permeability (float|np.ndarray): Скаляр, тензор 2x2 или значения по элементам
            porosity (float|np.ndarray): Пористость матрицы
            source (float|np.ndarray): Плотность источника в матрице
            fracture_source (float|np.ndarray): Плотность источника на трещинах

        Вывод:
            MaterialField: Поле свойств
        """
        n = mesh.n_elements
        return cls(
            permeability=_as_tensors(permeability, n),
            porosity=np.broadcast_to(np.asarray(porosity, dtype=float), (n,)).copy(),
            source=np.broadcast_to(np.asarray(source, dtype=float), (n,)).copy(),
            fracture_source=np.atleast_1d(np.asarray(fracture_source, dtype=float)),
        )

    def edge_source(self, n_edges: int) -> np.ndarray:
        """Плотность источника q_Γ по ребрам сети"""
        if len(self.fracture_source) not in (1, n_edges):
            raise MaterialError("Число источников на трещинах не совпадает с числом ребер")
        return np.broadcast_to(self.fracture_source, (n_edges,)).copy()

    def normal_permeability(self, elements: np.ndarray, normals: np.ndarray) -> np.ndarray:
        """Нормальная компонента n·κ·n в элементах"""
        return np.einsum("ei,eij,ej->e", normals, self.permeability[elements], normals)


@dataclass(frozen=True)
class PressureSystem:
    """
    Собранная система уравнений для давления

    Описание:
        Матрица записана в степенях свободы (вершины без висячих узлов), условия Дирихле
        исключаются симметрично при решении

    Аргументы:
        mesh (Mesh): Сетка
        intersection (IntersectionData): Пересечение сети трещин с сеткой
        materials (MaterialField): Свойства материалов
        face_sets (FaceSets): Классификация граней
        matrix (csr_matrix): Матрица жесткости в степенях свободы
        rhs (np.ndarray): Правая часть в степенях свободы
        constraint (csr_matrix): Матрица связей висячих узлов
        dirichlet (np.ndarray): Степени свободы с условием Дирихле
        dirichlet_values (np.ndarray): Значения давления в них
    """

    mesh: Mesh
    intersection: IntersectionData
    materials: MaterialField
    face_sets: FaceSets
    matrix: sparse.csr_matrix
    rhs: np.ndarray
    constraint: sparse.csr_matrix
    dirichlet: np.ndarray
    dirichlet_values: np.ndarray

    @property
    def n_dofs(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def free(self) -> np.ndarray:
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.dirichlet] = False
        return np.flatnonzero(mask)

    @property
    def n_unknowns(self) -> int:
        return len(self.free)

    @cached_property
    def reduced(self) -> Tuple[sparse.csr_matrix, np.ndarray]:
        """Система в свободных степенях свободы после исключения условий Дирихле"""
        free = self.free
        matrix = self.matrix[free][:, free].tocsr()
        coupling = self.matrix[free][:, self.dirichlet]
        rhs = self.rhs[free] - coupling @ self.dirichlet_values
        return matrix, rhs

    def get_stats(self, condition: bool = False) -> Dict[str, Union[int, float]]:
        """
        Получение статистик системы

        Аргументы:
            condition (bool): Вычислять ли число обусловленности

        Вывод:
            dict[str, int|float]: Справочник статистик
        """
        stats: Dict[str, Union[int, float]] = {
            "n_dofs": self.n_dofs,
            "n_unknowns": self.n_unknowns,
            "nnz": int(self.matrix.nnz),
            "density": self.matrix.nnz / self.n_dofs**2,
        }
        if condition:
            stats["condition"] = estimate_condition(self)
        return stats

    def print_stats(self):
        """Отображение статистик системы с описанием на экран"""
        print(f"{'Статистика':^20}|{'Значение':^12}")
        print("-" * 32)
        stats = self.get_stats()
        for stat, value in SYSTEM_STATS_DESC.items():
            print(f"{value:20}|{stats.get(stat):^12.6g}")


def _bulk_terms(mesh: Mesh, materials: MaterialField):
    points, weights = gauss_rule(2)
    n = mesh.n_elements
    stiffness = np.zeros((n, 4, 4))
    load = np.zeros((n, 4))
    for px, wx in zip(points, weights):
        for py, wy in zip(points, weights):
            local = np.tile([px, py], (n, 1))
            grads = shape_gradients(local, mesh.sizes)
            scale = wx * wy * mesh.areas
            stiffness += scale[:, None, None] * np.einsum(
                "eai,eij,ebj->eab", grads, materials.permeability, grads
            )
            load += (scale * materials.source)[:, None] * shape_functions(local)
    return stiffness, load


def _fracture_terms(mesh: Mesh, intersection: IntersectionData, fracture_source: np.ndarray):
    points, weights = gauss_rule(2)
    elements = intersection.segment_element
    edges = intersection.segment_edge
    lengths = intersection.segment_length
    tangents = intersection.segment_tangent
    k_gamma = intersection.network.effective_permeability[edges]
    starts, ends = intersection.segment_start, intersection.segment_end
    stiffness = np.zeros((len(elements), 4, 4))
    load = np.zeros((len(elements), 4))
    for tau, weight in zip(points, weights):
        x = starts + tau * (ends - starts)
        local = local_coordinates(mesh, elements, x)
        grads = shape_gradients(local, mesh.sizes[elements])
        derivative = np.einsum("eai,ei->ea", grads, tangents)
        scale = weight * lengths
        outer = np.einsum("ea,eb->eab", derivative, derivative)
        stiffness += (scale * k_gamma)[:, None, None] * outer
        load += (scale * fracture_source[edges])[:, None] * shape_functions(local)
    return elements, stiffness, load


def _neumann_load(mesh: Mesh, face_sets: FaceSets) -> np.ndarray:
    load = np.zeros(mesh.n_vertices)
    faces = np.flatnonzero(face_sets.neumann)
    if not len(faces):
        return load
    points, weights = gauss_rule(2)
    ends = mesh.vertices[mesh.face_vertices[faces]]
    for tau, weight in zip(points, weights):
        x = ends[:, 0] + tau * (ends[:, 1] - ends[:, 0])
        flux = weight * mesh.face_lengths[faces] * face_sets.boundary_values(faces, x)
        np.add.at(load, mesh.face_vertices[faces, 0], -(1 - tau) * flux)
        np.add.at(load, mesh.face_vertices[faces, 1], -tau * flux)
    return load


def _point_load(mesh: Mesh, intersection: IntersectionData, face_sets: FaceSets) -> np.ndarray:
    load = np.zeros(mesh.n_vertices)
    network = intersection.network
    incident = network.node_edges
    for node, segment in network.neumann_nodes(face_sets, mesh.domain):
        point = network.nodes[node][None]
        element = mesh.locate(point)
        aperture = float(network.aperture[incident[node]].mean())
        datum = float(face_sets.layout[segment].evaluate(point)[0])
        basis = shape_functions(local_coordinates(mesh, element, point))[0]
        load[mesh.elements[element[0]]] -= aperture * datum * basis
    return load


def _dirichlet_data(
    mesh: Mesh, face_sets: FaceSets, dof_of_vertex: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    faces = np.flatnonzero(face_sets.dirichlet)
    vertices = mesh.face_vertices[faces].ravel()
    values = face_sets.boundary_values(np.repeat(faces, 2), mesh.vertices[vertices])
    dofs = dof_of_vertex[vertices]
    unique, inverse = np.unique(dofs, return_inverse=True)
    mean = np.bincount(inverse, weights=values) / np.bincount(inverse)
    return unique, mean


def assemble(
    mesh: Mesh, intersection: IntersectionData, materials: MaterialField, face_sets: FaceSets
) -> PressureSystem:
    """
    Сборка системы встроенного метода конечных элементов для давления

    Описание:
        Объемный член (κ∇p, ∇v) интегрируется квадратурой Гаусса 2x2, член трещин
        (k_Γ∇_Γp, ∇_Γv) - двухточечной квадратурой на каждом отсеченном отрезке.
        Правая часть содержит источники в матрице и трещинах, граничный член -(u·n, v)
        на гранях Неймана и точечные члены -w·(u·n)(x_i)·v(x_i) в узлах сети на границе
        Неймана. Висячие узлы исключаются через матрицу связей.

    Аргументы:
        mesh (Mesh): Сетка
        intersection (IntersectionData): Пересечение сети трещин с сеткой
        materials (MaterialField): Свойства материалов
        face_sets (FaceSets): Классификация граней

    Вывод:
        PressureSystem: Собранная система

    Исключения:
        MaterialError: Если проницаемость трещины неположительна
        ConfigurationError: Если нет участков Дирихле или свойства заданы не для всех элементов
    """
    network = intersection.network
    if np.any(network.permeability <= 0.0):
        raise MaterialError("Проницаемость трещин должна быть положительной")
    if not face_sets.dirichlet.any():
        raise ConfigurationError("Для задачи давления нужен хотя бы один участок Дирихле")
    if len(materials.permeability) != mesh.n_elements:
        raise ConfigurationError("Свойства материалов заданы не для всех элементов сетки")
    start = time.perf_counter()
    stiffness, load = _bulk_terms(mesh, materials)
    fractured, fracture_stiffness, fracture_load = _fracture_terms(
        mesh, intersection, materials.edge_source(network.n_edges)
    )
    connectivity = np.concatenate([mesh.elements, mesh.elements[fractured]])
    blocks = np.concatenate([stiffness, fracture_stiffness])
    rows = np.repeat(connectivity, 4, axis=1).ravel()
    cols = np.tile(connectivity, (1, 4)).ravel()
    vertex_matrix = sparse.coo_matrix(
        (blocks.ravel(), (rows, cols)), shape=(mesh.n_vertices, mesh.n_vertices)
    ).tocsr()
    vertex_load = np.bincount(
        connectivity.ravel(),
        weights=np.concatenate([load, fracture_load]).ravel(),
        minlength=mesh.n_vertices,
    )
    vertex_load += _neumann_load(mesh, face_sets) + _point_load(mesh, intersection, face_sets)

    constraint, dof_of_vertex = mesh.constraint_matrix()
    matrix = (constraint.T @ vertex_matrix @ constraint).tocsr()
    matrix.sum_duplicates()
    rhs = constraint.T @ vertex_load
    dirichlet, values = _dirichlet_data(mesh, face_sets, dof_of_vertex)
    system = PressureSystem(
        mesh=mesh,
        intersection=intersection,
        materials=materials,
        face_sets=face_sets,
        matrix=matrix,
        rhs=np.asarray(rhs, dtype=float),
        constraint=constraint,
        dirichlet=dirichlet,
        dirichlet_values=values,
    )
    logger.info(
        "Система для давления: %d степеней свободы, %d ненулевых, сборка %.2f с",
        system.n_dofs,
        matrix.nnz,
        time.perf_counter() - start,
    )
    return system


def _relative_residual(matrix, x: np.ndarray, rhs: np.ndarray) -> float:
    scale = np.linalg.norm(rhs)
    residual = np.linalg.norm(rhs - matrix @ x)
    return float(residual / scale) if scale > 0 else float(residual)


def solve_spd(
    matrix: sparse.spmatrix,
    rhs: np.ndarray,
    method: str = "direct",
    tol: float = PRESSURE_TOLERANCE,
    max_iterations: int = MAX_CG_ITERATIONS,
) -> Tuple[np.ndarray, float]:
    """
    Решение симметричной положительно определенной системы

    Аргументы:
        matrix (spmatrix): Матрица системы
        rhs (np.ndarray): Правая часть
        method (str): Метод решения (direct - LU-разложение, cg - метод сопряженных
            градиентов с предобуславливателем Якоби)
        tol (float): Допустимая относительная невязка
        max_iterations (int): Максимальное число итераций метода сопряженных градиентов

    Вывод:
        tuple[np.ndarray, float]: Решение и достигнутая относительная невязка

    Исключения:
        ConfigurationError: Если указан неизвестный метод
        NumericalError: Если требуемая невязка не достигнута
    """
    if method not in SOLVER_METHODS:
        raise ConfigurationError(f"Неизвестный метод решения: {method}")
    if not len(rhs):
        return np.zeros(0), 0.0
    matrix = sparse.csc_matrix(matrix)
    if method == "direct":
        factor = splinalg.splu(matrix)
        x = factor.solve(rhs)
        for _ in range(MAX_REFINEMENT_STEPS):
            if _relative_residual(matrix, x, rhs) <= tol:
                break
            x += factor.solve(rhs - matrix @ x)
    else:
        diagonal = matrix.diagonal()
        preconditioner = sparse.diags(1.0 / np.where(diagonal > 0, diagonal, 1.0))
        x, info = splinalg.cg(
            matrix, rhs, rtol=0.5 * tol, maxiter=max_iterations, M=preconditioner
        )
        if info > 0:
            raise NumericalError(
                f"Метод сопряженных градиентов не сошелся за {info} итераций",
                _relative_residual(matrix, x, rhs),
            )
    residual = _relative_residual(matrix, x, rhs)
    if not np.isfinite(residual) or residual > tol:
        raise NumericalError("Линейная система решена с недостаточной точностью", residual)
    return x, residual


@dataclass(frozen=True)
class PressureField:
    """
    Непрерывное кусочно-билинейное поле давления

    Аргументы:
        mesh (Mesh): Сетка
        values (np.ndarray): Значения давления во всех вершинах (включая висячие)
        materials (MaterialField): Свойства материалов
        intersection (IntersectionData): Пересечение сети трещин с сеткой
        residual (float): Относительная невязка решения
    """

    mesh: Mesh
    values: np.ndarray
    materials: MaterialField
    intersection: Optional[IntersectionData] = None
    residual: float = 0.0

    def _elements(self, points: np.ndarray, elements: Optional[np.ndarray]) -> np.ndarray:
        if elements is None:
            return self.mesh.locate(points)
        return np.broadcast_to(np.asarray(elements, dtype=np.int64), (len(points),))

    def evaluate(self, points: np.ndarray, elements: Optional[np.ndarray] = None) -> np.ndarray:
        """Значения давления в точках"""
        points = np.atleast_2d(points)
        elements = self._elements(points, elements)
        basis = shape_functions(local_coordinates(self.mesh, elements, points))
        return np.einsum("ea,ea->e", basis, self.values[self.mesh.elements[elements]])

    def gradient(self, points: np.ndarray, elements: Optional[np.ndarray] = None) -> np.ndarray:
        """Градиент давления в точках внутри указанных элементов"""
        points = np.atleast_2d(points)
        elements = self._elements(points, elements)
        local = local_coordinates(self.mesh, elements, points)
        grads = shape_gradients(local, self.mesh.sizes[elements])
        return np.einsum("eai,ea->ei", grads, self.values[self.mesh.elements[elements]])

    def velocity(self, points: np.ndarray, elements: Optional[np.ndarray] = None) -> np.ndarray:
        """Скорость Дарси -κ∇p в матрице"""
        points = np.atleast_2d(points)
        elements = self._elements(points, elements)
        gradient = self.gradient(points, elements)
        return -np.einsum("eij,ej->ei", self.materials.permeability[elements], gradient)

    def fracture_rate(
        self, points: np.ndarray, edges: np.ndarray, elements: Optional[np.ndarray] = None
    ) -> np.ndarray:
        """
        Расход вдоль трещины -k_Γ∇_Γp·t

        Аргументы:
            points (np.ndarray): Точки на ребрах сети
            edges (np.ndarray): Номера ребер для каждой точки
            elements (np.ndarray): Элементы, в которых вычисляется градиент

        Вывод:
            np.ndarray: Расход на единицу ширины трещины в направлении касательной ребра
        """
        if self.intersection is None:
            raise ValueError("Поле давления построено без сети трещин")
        network = self.intersection.network
        points = np.atleast_2d(points)
        edges = np.broadcast_to(np.asarray(edges, dtype=np.int64), (len(points),))
        gradient = self.gradient(points, elements)
        tangential = np.einsum("ei,ei->e", gradient, network.tangents[edges])
        return -network.effective_permeability[edges] * tangential

    def element_values(self) -> np.ndarray:
        """Значения давления в центрах элементов"""
        return self.values[self.mesh.elements].mean(axis=1)

    @property
    def min(self) -> float:
        return float(self.values.min())

    @property
    def max(self) -> float:
        return float(self.values.max())


def solve(
    system: PressureSystem,
    method: str = "direct",
    tol: float = PRESSURE_TOLERANCE,
    max_iterations: int = MAX_CG_ITERATIONS,
) -> PressureField:
    """
    Решение системы для давления

    Аргументы:
        system (PressureSystem): Собранная система
        method (str): Метод решения (direct, cg)
        tol (float): Допустимая относительная невязка
        max_iterations (int): Максимальное число итераций

    Вывод:
        PressureField: Поле давления со значениями во всех вершинах

    Исключения:
        NumericalError: Если требуемая невязка не достигнута
    """
    start = time.perf_counter()
    matrix, rhs = system.reduced
    x, residual = solve_spd(matrix, rhs, method, tol, max_iterations)
    dofs = np.zeros(system.n_dofs)
    dofs[system.free] = x
    dofs[system.dirichlet] = system.dirichlet_values
    values = np.asarray(system.constraint @ dofs, dtype=float)
    logger.info(
        "Давление найдено (%s): невязка %.2e, %.2f с",
        method,
        residual,
        time.perf_counter() - start,
    )
    return PressureField(
        mesh=system.mesh,
        values=values,
        materials=system.materials,
        intersection=system.intersection,
        residual=residual,
    )


def estimate_condition(system: Union[PressureSystem, sparse.spmatrix, np.ndarray]) -> float:
    """
    Оценка числа обусловленности в норме 2

    Описание:
        Для малых систем вычисляются все собственные значения, для больших - крайние
        собственные значения методом Ланцоша (наименьшее - со сдвигом в ноль)

    Аргументы:
        system (PressureSystem|spmatrix|np.ndarray): Система или симметричная матрица

    Вывод:
        float: Отношение наибольшего собственного значения к наименьшему
    """
    matrix = system.reduced[0] if isinstance(system, PressureSystem) else system
    n = matrix.shape[0]
    if n == 0:
        return 1.0
    if n <= DENSE_CONDITION_LIMIT:
        dense = matrix.toarray() if sparse.issparse(matrix) else np.asarray(matrix, dtype=float)
        eigenvalues = np.linalg.eigvalsh(dense)
        return float(np.abs(eigenvalues).max() / np.abs(eigenvalues).min())
    matrix = sparse.csc_matrix(matrix)
    largest = splinalg.eigsh(matrix, k=1, which="LA", return_eigenvectors=False)[0]
    smallest = splinalg.eigsh(matrix, k=1, sigma=0.0, which="LM", return_eigenvectors=False)[0]
    return float(abs(largest) / abs(smallest))
