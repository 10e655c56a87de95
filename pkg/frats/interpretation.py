from typing import Dict, List, Set, Tuple, Union

import logging
import math
import time
from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .constants import PARTITION_STATS_DESC, SNAP_TOLERANCE
from .exceptions import InterpretationError
from .fractures import IntersectionData
from .mesh import Mesh
from .transport import ConcentrationField
from .utils import point_in_polygon, polygon_area

logger = logging.getLogger(__name__)

# Смещение пробной точки от грани внутрь элемента (в долях длины грани)
PROBE_OFFSET = 1e-8


@dataclass(frozen=True)
class SubElementPartition:
    """
    Разбиение трещиноватого элемента трещинами на подэлементы

    Аргументы:
        element (int): Номер элемента
        polygons (list[np.ndarray]): Подэлементы K_j в виде многоугольников (обход против
            часовой стрелки)
        labels (np.ndarray): Метка подобласти Ω_i каждого подэлемента (-1 до разметки)
        traces (np.ndarray): Следы трещин K∩Γ в виде массива (m, 2, 2)
    """

    element: int
    polygons: List[np.ndarray]
    labels: np.ndarray
    traces: np.ndarray

    @property
    def n_subelements(self) -> int:
        return len(self.polygons)

    @property
    def areas(self) -> np.ndarray:
        return np.array([polygon_area(polygon) for polygon in self.polygons])

    @property
    def centroids(self) -> np.ndarray:
        return np.array([polygon.mean(axis=0) for polygon in self.polygons])

    def locate(self, point: np.ndarray) -> int:
        """Номер подэлемента, содержащего точку (ближайший по центру при промахе)"""
        for j, polygon in enumerate(self.polygons):
            if point_in_polygon(point, polygon):
                return j
        return int(np.argmin(np.hypot(*(self.centroids - point).T)))


class _VertexPool:
    """Вершины разбиения с объединением близких точек"""

    def __init__(self, tol: float):
        self.tol = tol
        self.points: List[np.ndarray] = []

    def add(self, point: np.ndarray) -> int:
        for k, other in enumerate(self.points):
            if abs(other[0] - point[0]) <= self.tol and abs(other[1] - point[1]) <= self.tol:
                return k
        self.points.append(np.asarray(point, dtype=float))
        return len(self.points) - 1


def _prune_dangling(inner: Set[Tuple[int, int]], ring: List[int]) -> Set[Tuple[int, int]]:
    """Удаление ребер с висячими концами (обрывающиеся трещины не делят элемент)"""
    inner = set(inner)
    while True:
        degree: Dict[int, int] = {v: 2 for v in ring}
        for a, b in inner:
            degree[a] = degree.get(a, 0) + 1
            degree[b] = degree.get(b, 0) + 1
        dangling = {edge for edge in inner if degree[edge[0]] == 1 or degree[edge[1]] == 1}
        if not dangling:
            return inner
        inner -= dangling


def _trace_faces(points: np.ndarray, edges: Set[Tuple[int, int]]) -> List[List[int]]:
    """Обход граней плоского графа: слева от каждого полуребра лежит одна грань"""
    neighbors: Dict[int, List[int]] = {}
    for a, b in edges:
        neighbors.setdefault(a, []).append(b)
        neighbors.setdefault(b, []).append(a)
    for v, around in neighbors.items():
        around.sort(key=lambda w: math.atan2(*(points[w] - points[v])[::-1]))

    visited: Set[Tuple[int, int]] = set()
    cycles = []
    for a, b in sorted((a, b) for edge in edges for a, b in (edge, edge[::-1])):
        if (a, b) in visited:
            continue
        cycle = []
        half = (a, b)
        while half not in visited:
            visited.add(half)
            cycle.append(half[0])
            u, v = half
            around = neighbors[v]
            half = (v, around[around.index(u) - 1])
        cycles.append(cycle)
    return cycles


def partition(element: int, intersection: IntersectionData) -> SubElementPartition:
    """
    Разбиение элемента следами трещин на подэлементы

    Описание:
        Контур элемента дополняется точками выхода трещин на его грани, следы трещин
        добавляются как внутренние ребра. Ребра, не связанные с контуром с обеих сторон,
        удаляются, а подэлементами считаются ограниченные грани получившегося графа.
        Одна сквозная трещина дает два подэлемента, обрывающаяся в элементе - один

    Аргументы:
        element (int): Номер трещиноватого элемента
        intersection (IntersectionData): Пересечение сети трещин с сеткой

    Вывод:
        SubElementPartition: Разбиение (метки подобластей не заполнены)
    """
    mesh = intersection.mesh
    x_min, x_max, y_min, y_max = mesh.bounds[element]
    width, height = x_max - x_min, y_max - y_min
    tol = SNAP_TOLERANCE * max(width, height)
    pool = _VertexPool(tol)
    for corner in ((x_min, y_min), (x_max, y_min), (x_max, y_max), (x_min, y_max)):
        pool.add(np.array(corner))

    segments = intersection.segments_of(element)
    starts = intersection.segment_start[segments]
    ends = intersection.segment_end[segments]
    inner: Set[Tuple[int, int]] = set()
    for start, end in zip(starts, ends):
        a, b = pool.add(start), pool.add(end)
        if a != b:
            inner.add((min(a, b), max(a, b)))

    def perimeter(point: np.ndarray) -> float:
        # Параметр точки контура при обходе против часовой стрелки от (x_min, y_min)
        x, y = point
        side = int(np.argmin(np.abs((y - y_min, x_max - x, y_max - y, x - x_min))))
        position = (
            x - x_min,
            width + (y - y_min),
            width + height + (x_max - x),
            2 * width + height + (y_max - y),
        )[side]
        return position % (2 * (width + height))

    points = np.array(pool.points)
    on_ring = [
        k
        for k, (x, y) in enumerate(points)
        if min(abs(x - x_min), abs(x - x_max), abs(y - y_min), abs(y - y_max)) <= tol
    ]
    ring = sorted(on_ring, key=lambda k: perimeter(points[k]))
    edges = {(min(a, b), max(a, b)) for a, b in zip(ring, ring[1:] + ring[:1])}
    inner = _prune_dangling(inner - edges, ring)

    polygons = []
    for cycle in _trace_faces(points, edges | inner):
        polygon = points[cycle]
        if polygon_area(polygon) > tol * tol:
            polygons.append(polygon)
    polygons.sort(key=lambda polygon: tuple(polygon.mean(axis=0)[::-1]))
    return SubElementPartition(
        element=int(element),
        polygons=polygons,
        labels=np.full(len(polygons), -1, dtype=np.int64),
        traces=np.stack([starts, ends], axis=1).reshape(-1, 2, 2),
    )


@dataclass(frozen=True)
class Partitioning:
    """
    Разбиения всех трещиноватых элементов и граф смежности частей

    Описание:
        Частями считаются матричные элементы (номер части совпадает с номером элемента)
        и подэлементы трещиноватых элементов (номера начиная с mesh.n_elements).
        Две части смежны, если имеют общий участок грани, не разделенный трещиной

    Аргументы:
        mesh (Mesh): Сетка
        intersection (IntersectionData): Пересечение сети трещин с сеткой
        partitions (dict[int, SubElementPartition]): Разбиения по номерам элементов
        offsets (dict[int, int]): Номер первой части каждого трещиноватого элемента
        piece_element (np.ndarray): Элемент каждой части
        piece_local (np.ndarray): Номер подэлемента (-1 для матричных элементов)
        piece_label (np.ndarray): Подобласть каждой части (-1 если не определена)
        adjacency (sparse.csr_matrix): Смежность частей

    Методы:
        get_stats(): Получение статистик разбиения
        print_stats(): Отображение статистик разбиения
    """

    mesh: Mesh
    intersection: IntersectionData
    partitions: Dict[int, SubElementPartition]
    offsets: Dict[int, int]
    piece_element: np.ndarray
    piece_local: np.ndarray
    piece_label: np.ndarray
    adjacency: sparse.csr_matrix

    @property
    def n_pieces(self) -> int:
        return len(self.piece_element)

    @property
    def matrix_pieces(self) -> np.ndarray:
        return np.flatnonzero(~self.intersection.fractured)

    @property
    def subelement_pieces(self) -> np.ndarray:
        return np.flatnonzero(self.piece_local >= 0)

    def piece_at(self, element: int, point: np.ndarray) -> int:
        return _piece_at(self.partitions, self.offsets, element, point)

    def get_stats(self) -> Dict[str, Union[int, float]]:
        counts = [p.n_subelements for p in self.partitions.values()]
        labels = self.piece_label[self.piece_label >= 0]
        return {
            "n_fractured": len(self.partitions),
            "n_subelements": int(sum(counts)),
            "n_subdomains": len(np.unique(labels)),
            "max_subelements": max(counts, default=0),
        }

    def print_stats(self):
        stats = self.get_stats()
        print(f"{'Статистика':^20}|{'Значение':^12}")
        print("-" * 33)
        for stat, value in PARTITION_STATS_DESC.items():
            print(f"{value:20}|{stats.get(stat):^12.6g}")


def _piece_at(
    partitions: Dict[int, SubElementPartition],
    offsets: Dict[int, int],
    element: int,
    point: np.ndarray,
) -> int:
    if element not in partitions:
        return int(element)
    return offsets[element] + partitions[element].locate(point)


def _piece_links(
    mesh: Mesh,
    intersection: IntersectionData,
    partitions: Dict[int, SubElementPartition],
    offsets: Dict[int, int],
) -> np.ndarray:
    """Пары смежных частей по участкам граней между точками пересечения с трещинами"""
    crossings: Dict[int, List[np.ndarray]] = {}
    for face, point in zip(intersection.crossing_face, intersection.crossing_point):
        crossings.setdefault(int(face), []).append(point)

    links = []
    for face in mesh.interior_faces:
        minus, plus = mesh.face_neighbors[face]
        start, end = mesh.vertices[mesh.face_vertices[face]]
        offset = PROBE_OFFSET * mesh.face_lengths[face] * mesh.face_normals[face]
        direction = end - start
        params = [
            float((point - start) @ direction / (direction @ direction))
            for point in crossings.get(int(face), [])
        ]
        breaks = np.unique(np.clip([0.0, *params, 1.0], 0.0, 1.0))
        for t in 0.5 * (breaks[:-1] + breaks[1:]):
            point = start + t * direction
            links.append(
                (
                    _piece_at(partitions, offsets, minus, point - offset),
                    _piece_at(partitions, offsets, plus, point + offset),
                )
            )
    return np.array(links, dtype=np.int64).reshape(-1, 2)


def partition_all(mesh: Mesh, intersection: IntersectionData) -> Partitioning:
    """
    Разбиение всех трещиноватых элементов и разметка подэлементов по подобластям

    Описание:
        Метка подобласти подэлемента наследуется от матричных элементов, достижимых
        через смежные части без пересечения трещин. Если в компоненте смежности
        встречается несколько меток матричных подобластей, берется наименьшая

    Аргументы:
        mesh (Mesh): Сетка
        intersection (IntersectionData): Пересечение сети трещин с сеткой

    Вывод:
        Partitioning: Разбиения, граф смежности и метки частей
    """
    start_time = time.perf_counter()
    fractured = np.flatnonzero(intersection.fractured)
    partitions = {int(e): partition(int(e), intersection) for e in fractured}

    piece_element = list(range(mesh.n_elements))
    piece_local = [-1] * mesh.n_elements
    offsets = {}
    for element, item in partitions.items():
        offsets[element] = len(piece_element)
        piece_element.extend([element] * item.n_subelements)
        piece_local.extend(range(item.n_subelements))

    n_pieces = len(piece_element)
    links = _piece_links(mesh, intersection, partitions, offsets)
    adjacency = sparse.coo_matrix(
        (np.ones(len(links)), (links[:, 0], links[:, 1])), shape=(n_pieces, n_pieces)
    ).tocsr()
    adjacency = ((adjacency + adjacency.T) > 0).astype(np.int8).tocsr()
    adjacency.sort_indices()

    n_components, components = connected_components(adjacency, directed=False)
    matrix = np.flatnonzero(~intersection.fractured)
    unlabeled = np.iinfo(np.int64).max
    component_label = np.full(n_components, unlabeled, dtype=np.int64)
    np.minimum.at(component_label, components[matrix], intersection.subdomain[matrix])
    component_label[component_label == unlabeled] = -1
    piece_label = component_label[components]
    piece_label[fractured] = -1

    partitions = {
        element: replace(
            item,
            labels=piece_label[offsets[element] : offsets[element] + item.n_subelements],
        )
        for element, item in partitions.items()
    }
    result = Partitioning(
        mesh=mesh,
        intersection=intersection,
        partitions=partitions,
        offsets=offsets,
        piece_element=np.array(piece_element, dtype=np.int64),
        piece_local=np.array(piece_local, dtype=np.int64),
        piece_label=piece_label,
        adjacency=adjacency,
    )
    logger.info(
        "Разбиты %d трещиноватых элементов на %d подэлементов за %.2f с",
        len(partitions),
        len(result.subelement_pieces),
        time.perf_counter() - start_time,
    )
    return result


@dataclass(frozen=True)
class InterpretedField:
    """
    Интерпретированная концентрация для визуализации

    Описание:
        На матричных элементах и следах трещин совпадает с исходным решением,
        подэлементы трещиноватых элементов получают значения соседних матричных элементов

    Аргументы:
        field (ConcentrationField): Исходное решение
        partitioning (Partitioning): Разбиения трещиноватых элементов
        piece_values (np.ndarray): Значение на каждой части (для трещиноватых элементов
            на позиции элемента хранится значение на следе трещины)
    """

    field: ConcentrationField
    partitioning: Partitioning
    piece_values: np.ndarray

    @property
    def matrix_values(self) -> np.ndarray:
        return self.field.values[~self.field.fractured]

    @property
    def trace_values(self) -> np.ndarray:
        return self.field.values[self.field.fractured]

    @property
    def time(self) -> float:
        return self.field.time

    def subelement_values(self, element: int) -> np.ndarray:
        start = self.partitioning.offsets[element]
        n_sub = self.partitioning.partitions[element].n_subelements
        return self.piece_values[start : start + n_sub]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Значение интерпретированной концентрации матрицы в точках"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        elements = self.partitioning.mesh.locate(points)
        pieces = [self.partitioning.piece_at(int(e), p) for e, p in zip(elements, points)]
        return self.piece_values[pieces]


def interpret(c_h: ConcentrationField, partitioning: Partitioning) -> InterpretedField:
    """
    Назначение значений подэлементам трещиноватых элементов

    Описание:
        Для каждой подобласти по возрастанию метки матричные элементы передают свое
        значение смежным неназначенным подэлементам той же подобласти. Получившие
        значение подэлементы становятся донорами на следующем цикле. Доноры
        перебираются по возрастанию номеров частей, поэтому результат детерминирован

    Аргументы:
        c_h (ConcentrationField): Решение задачи переноса
        partitioning (Partitioning): Разбиения трещиноватых элементов

    Вывод:
        InterpretedField: Интерпретированное решение

    Исключения:
        InterpretationError: Если часть подэлементов не получила значения (подобласть
            без матричных элементов)
    """
    n_elements = partitioning.mesh.n_elements
    values = np.full(partitioning.n_pieces, np.nan)
    values[:n_elements] = c_h.values
    assigned = np.zeros(partitioning.n_pieces, dtype=bool)
    assigned[:n_elements] = True

    indptr, indices = partitioning.adjacency.indptr, partitioning.adjacency.indices
    labels = partitioning.piece_label
    matrix = partitioning.matrix_pieces
    for label in np.unique(labels[matrix]):
        donors = matrix[labels[matrix] == label]
        while len(donors):
            received = []
            for donor in donors:
                for piece in indices[indptr[donor] : indptr[donor + 1]]:
                    if not assigned[piece]:
                        values[piece] = values[donor]
                        assigned[piece] = True
                        received.append(piece)
            donors = np.array(sorted(received), dtype=np.int64)

    missing = np.flatnonzero(~assigned)
    if len(missing):
        raise InterpretationError(
            "Нет матричных элементов в подобласти подэлементов",
            [
                (int(partitioning.piece_element[p]), int(partitioning.piece_local[p]))
                for p in missing
            ],
        )
    return InterpretedField(field=c_h, partitioning=partitioning, piece_values=values)
