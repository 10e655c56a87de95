from typing import Sequence, Union

import logging
import time
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .constants import (
    DEFAULT_PERMEABILITY,
    DEFAULT_POROSITY,
    PRESSURE_TOLERANCE,
    REFERENCE_CELL_CAP,
    REFERENCE_CELLS_ACROSS,
    REFERENCE_MAX_LEVEL,
)
from .exceptions import ConfigurationError
from .flux import FaceFluxField
from .fractures import FractureNetwork, intersect
from .mesh import BoundarySegment, FaceSets, Mesh, classify_boundary, refine
from .pressure import MaterialField, solve_spd
from .reference_data import ReferenceSolution
from .transport import ConcentrationField, TransportConfig, TransportResult, run
from .utils import point_segment_distance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReferenceMesh:
    """
    Мелкая сетка с трещинами в виде полос ячеек

    Аргументы:
        mesh (Mesh): Сетка
        network (FractureNetwork): Сеть трещин
        strip (np.ndarray): Признак ячеек полос трещин
        edge (np.ndarray): Ближайшее ребро сети для каждой ячейки (-1 без трещин)
        width (float): Ширина полосы (раскрытие или увеличенная ширина)
        permeability (np.ndarray): Скалярная проницаемость ячеек
        porosity (np.ndarray): Пористость ячеек
        cells_across (float): Достигнутое число ячеек поперек полосы
    """

    mesh: Mesh
    network: FractureNetwork
    strip: np.ndarray
    edge: np.ndarray
    width: float
    permeability: np.ndarray
    porosity: np.ndarray
    cells_across: float

    @property
    def materials(self) -> MaterialField:
        return MaterialField.uniform(
            self.mesh, permeability=self.permeability, porosity=self.porosity
        )


def _distance_to_network(mesh: Mesh, network: FractureNetwork) -> np.ndarray:
    """Расстояния от центров ячеек до ребер сети в виде массива (n_edges, n_elements)"""
    distance = np.empty((network.n_edges, mesh.n_elements))
    for g in range(network.n_edges):
        distance[g] = point_segment_distance(mesh.centers, network.starts[g], network.ends[g])
    return distance


def build_reference_mesh(
    base: Mesh,
    network: FractureNetwork,
    cells_across: int = REFERENCE_CELLS_ACROSS,
    max_level: int = REFERENCE_MAX_LEVEL,
    cell_cap: int = REFERENCE_CELL_CAP,
    permeability: float = DEFAULT_PERMEABILITY,
    porosity: float = DEFAULT_POROSITY,
) -> ReferenceMesh:
    """
    Построение эталонной сетки с разрешенными полосами трещин

    Описание:
        Ячейки, близкие к трещинам, измельчаются до размера w / cells_across. Если такой
        размер недостижим на максимальном уровне, ширина полосы увеличивается до
        cells_across ячеек минимального размера, а проницаемость полосы уменьшается так,
        чтобы произведение ширины на проницаемость сохранилось. Ячейки, центры которых
        лежат в полосе, получают свойства трещины

    Аргументы:
        base (Mesh): Базовая сетка
        network (FractureNetwork): Сеть трещин с одинаковым раскрытием
        cells_across (int): Требуемое число ячеек поперек полосы
        max_level (int): Максимальный уровень измельчения
        cell_cap (int): Максимальное число ячеек
        permeability (float): Проницаемость матрицы
        porosity (float): Пористость матрицы

    Вывод:
        ReferenceMesh: Сетка с разметкой полос

    Исключения:
        ConfigurationError: Если раскрытие трещин различается
    """
    start_time = time.perf_counter()
    mesh = base
    n_cells = base.n_elements
    if not network.n_edges:
        return ReferenceMesh(
            mesh=mesh,
            network=network,
            strip=np.zeros(n_cells, dtype=bool),
            edge=np.full(n_cells, -1, dtype=np.int64),
            width=0.0,
            permeability=np.full(n_cells, float(permeability)),
            porosity=np.full(n_cells, float(porosity)),
            cells_across=0.0,
        )
    aperture = float(network.aperture.max())
    if float(np.ptp(network.aperture)) > 1e-12 * aperture:
        raise ConfigurationError("Эталонная сетка строится только для одинакового раскрытия")

    width = aperture
    h_target = aperture / cells_across
    h_min = float(base.sizes.max()) / 2**max_level
    if h_target < h_min:
        width = cells_across * h_min
        h_target = h_min
        logger.warning(
            "Раскрытие %.3g не разрешается на уровне %d, ширина полосы увеличена до %.3g",
            aperture,
            max_level,
            width,
        )

    while True:
        distance = _distance_to_network(mesh, network).min(axis=0)
        reach = 0.5 * width + 0.5 * np.hypot(*mesh.sizes.T)
        flags = np.flatnonzero(
            (distance <= reach)
            & (mesh.sizes.max(axis=1) > h_target * (1.0 + 1e-12))
            & (mesh.levels < max_level)
        )
        if not len(flags):
            break
        if mesh.n_elements + 3 * len(flags) > cell_cap:
            logger.warning("Достигнут предел числа ячеек эталонной сетки (%d)", cell_cap)
            break
        mesh = refine(mesh, flags)

    distances = _distance_to_network(mesh, network)
    edge = distances.argmin(axis=0)
    strip = distances.min(axis=0) <= 0.5 * width
    achieved = width / float(mesh.sizes[strip].max()) if strip.any() else 0.0
    if achieved < cells_across:
        logger.warning(
            "Полоса трещин разрешена %.1f ячейками вместо %d", achieved, cells_across
        )

    values = np.full(mesh.n_elements, float(permeability))
    values[strip] = network.permeability[edge[strip]] * aperture / width
    porosities = np.full(mesh.n_elements, float(porosity))
    porosities[strip] = network.porosity[edge[strip]]
    logger.info(
        "Эталонная сетка: %d ячеек, %d в полосах трещин, %.1f ячеек поперек, %.2f с",
        mesh.n_elements,
        int(strip.sum()),
        achieved,
        time.perf_counter() - start_time,
    )
    return ReferenceMesh(
        mesh=mesh,
        network=network,
        strip=strip,
        edge=np.where(strip, edge, -1),
        width=width,
        permeability=values,
        porosity=porosities,
        cells_across=achieved,
    )


def calc_transmissibility(mesh: Mesh, permeability: np.ndarray) -> np.ndarray:
    """
    Двухточечные проводимости граней с гармоническим осреднением

    Аргументы:
        mesh (Mesh): Сетка из прямоугольников
        permeability (np.ndarray): Скалярная проницаемость ячеек

    Вывод:
        np.ndarray: |F| / (d_-/κ_- + d_+/κ_+) для внутренних граней и |F|·κ_-/d_- для граничных
    """
    permeability = np.broadcast_to(np.asarray(permeability, dtype=float), (mesh.n_elements,))
    minus, plus = mesh.face_neighbors.T
    axis = np.where(mesh.face_normals[:, 0] != 0.0, 0, 1)
    resistance = 0.5 * mesh.sizes[minus, axis] / permeability[minus]
    interior = plus >= 0
    resistance[interior] += (
        0.5 * mesh.sizes[plus[interior], axis[interior]] / permeability[plus[interior]]
    )
    return mesh.face_lengths / resistance


@dataclass(frozen=True)
class TPFAResult:
    """
    Решение задачи давления методом двухточечной аппроксимации потока

    Аргументы:
        mesh (Mesh): Сетка
        pressure (np.ndarray): Давление в ячейках
        flux (FaceFluxField): Потоки через грани
        residual (float): Относительная невязка линейной системы
    """

    mesh: Mesh
    pressure: np.ndarray
    flux: FaceFluxField
    residual: float = 0.0


def solve_pressure_tpfa(
    mesh: Mesh,
    permeability: Union[float, np.ndarray],
    face_sets: FaceSets,
    porosity: Union[float, np.ndarray] = DEFAULT_POROSITY,
    source: Union[float, np.ndarray] = 0.0,
    method: str = "direct",
    tol: float = PRESSURE_TOLERANCE,
) -> TPFAResult:
    """
    Решение задачи Дарси методом конечных объемов с двухточечными потоками

    Описание:
        Неизвестные - давления в центрах ячеек. Граничные условия Дирихле и потоки
        Неймана u·n вычисляются в центрах граней. Потоки через грани сохраняют баланс
        в каждой ячейке по построению

    Аргументы:
        mesh (Mesh): Сетка из прямоугольников
        permeability (float|np.ndarray): Скалярная проницаемость ячеек
        face_sets (FaceSets): Классификация граничных граней
        porosity (float|np.ndarray): Пористость ячеек (для последующего переноса)
        source (float|np.ndarray): Плотность источника в ячейках
        method (str): Метод решения линейной системы
        tol (float): Допустимая относительная невязка

    Вывод:
        TPFAResult: Давление и потоки

    Исключения:
        ConfigurationError: Если нет граней Дирихле
        NumericalError: Если требуемая невязка не достигнута
    """
    if not face_sets.dirichlet.any():
        raise ConfigurationError("Задача с условиями Неймана на всей границе не поддерживается")
    start_time = time.perf_counter()
    n = mesh.n_elements
    materials = MaterialField.uniform(
        mesh, permeability=permeability, porosity=porosity, source=source
    )
    transmissibility = calc_transmissibility(mesh, materials.permeability[:, 0, 0])
    owner = mesh.face_neighbors[:, 0]

    interior = np.flatnonzero(face_sets.interior)
    minus, plus = mesh.face_neighbors[interior].T
    t = transmissibility[interior]
    dirichlet = np.flatnonzero(face_sets.dirichlet)
    neumann = np.flatnonzero(face_sets.neumann)
    rows = np.concatenate([minus, plus, minus, plus, owner[dirichlet]])
    cols = np.concatenate([minus, plus, plus, minus, owner[dirichlet]])
    data = np.concatenate([t, t, -t, -t, transmissibility[dirichlet]])
    matrix = sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()

    p_dirichlet = face_sets.boundary_values(dirichlet, mesh.face_centers[dirichlet])
    g_neumann = face_sets.boundary_values(neumann, mesh.face_centers[neumann])
    g_neumann = g_neumann * mesh.face_lengths[neumann]
    rhs = materials.source * mesh.areas
    rhs += np.bincount(
        owner[dirichlet], weights=transmissibility[dirichlet] * p_dirichlet, minlength=n
    )
    rhs -= np.bincount(owner[neumann], weights=g_neumann, minlength=n)
    pressure, residual = solve_spd(matrix, rhs, method=method, tol=tol)

    values = np.zeros(mesh.n_faces)
    values[interior] = t * (pressure[minus] - pressure[plus])
    values[dirichlet] = transmissibility[dirichlet] * (pressure[owner[dirichlet]] - p_dirichlet)
    values[neumann] = g_neumann
    flux = FaceFluxField(
        mesh=mesh,
        values=values,
        face_sets=face_sets,
        intersection=intersect(mesh, FractureNetwork.empty(mesh.domain)),
        materials=materials,
    )
    logger.info(
        "Давление TPFA: %d ячеек, невязка %.2e, %.2f с",
        n,
        residual,
        time.perf_counter() - start_time,
    )
    return TPFAResult(mesh=mesh, pressure=pressure, flux=flux, residual=residual)


def solve_reference(
    reference: ReferenceMesh,
    layout: Sequence[BoundarySegment],
    method: str = "direct",
    tol: float = PRESSURE_TOLERANCE,
) -> TPFAResult:
    """Решение задачи давления на эталонной сетке"""
    return solve_pressure_tpfa(
        reference.mesh,
        reference.permeability,
        classify_boundary(reference.mesh, layout),
        porosity=reference.porosity,
        method=method,
        tol=tol,
    )


def solve_transport_reference(result: TPFAResult, config: TransportConfig) -> TransportResult:
    """
    Перенос примеси на эталонной сетке

    Описание:
        Стандартная схема конечных объемов с неявной схемой Эйлера, в которой все ячейки
        (в том числе ячейки полос трещин) считаются матричными

    Аргументы:
        result (TPFAResult): Решение задачи давления
        config (TransportConfig): Параметры переноса

    Вывод:
        TransportResult: Поля концентрации
    """
    return run(result.flux, config)


def reference_qoi(
    field: ConcentrationField,
    flux: FaceFluxField,
    points: np.ndarray,
    aperture: float,
) -> np.ndarray:
    """
    Поток примеси через выходы трещин на границе

    Описание:
        Для каждой точки суммируется Q_F·c по граничным граням, перекрывающимся с участком
        границы шириной aperture вокруг точки (с учетом доли перекрытия)

    Аргументы:
        field (ConcentrationField): Концентрация на эталонной сетке
        flux (FaceFluxField): Потоки через грани
        points (np.ndarray): Точки выхода трещин на границу (n, 2)
        aperture (float): Ширина участка границы

    Вывод:
        np.ndarray: Поток примеси для каждой точки

    Исключения:
        ConfigurationError: Если точка не лежит на границе области
    """
    mesh = flux.mesh
    domain = mesh.domain
    result = []
    for point in np.atleast_2d(points):
        side = domain.boundary_side(point, domain.tolerance)
        if side < 0:
            raise ConfigurationError(f"Точка {tuple(point)} не лежит на границе области")
        axis = 1 if side < 2 else 0
        faces = np.flatnonzero(mesh.face_boundary_side == side)
        ends = np.sort(mesh.vertices[mesh.face_vertices[faces], axis], axis=1)
        low, high = point[axis] - 0.5 * aperture, point[axis] + 0.5 * aperture
        overlap = np.clip(np.minimum(ends[:, 1], high) - np.maximum(ends[:, 0], low), 0.0, None)
        share = overlap / mesh.face_lengths[faces]
        outflow = np.maximum(flux.values[faces], 0.0)
        owners = mesh.face_neighbors[faces, 0]
        result.append(float(np.sum(share * outflow * field.values[owners])))
    return np.array(result)


def to_reference_solution(reference: ReferenceMesh, values: np.ndarray) -> ReferenceSolution:
    """
    Перевод решения на эталонной сетке в таблицу центров ячеек

    Аргументы:
        reference (ReferenceMesh): Эталонная сетка
        values (np.ndarray): Значения в ячейках

    Вывод:
        ReferenceSolution: Эталонное решение с признаком ячеек трещин
    """
    mesh = reference.mesh
    return ReferenceSolution(
        centroids=mesh.centers.copy(),
        areas=mesh.areas.copy(),
        values=np.asarray(values, dtype=float),
        on_fracture=reference.strip.copy(),
    )
