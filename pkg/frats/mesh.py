from typing import Callable, Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from .constants import (
    BOUNDARY_KINDS,
    DIRICHLET,
    MAX_LEVEL,
    MESH_STATS_DESC,
    NEUMANN,
    SIDE_DIRECTIONS,
    SIDE_NORMALS,
    SIDES,
    SNAP_TOLERANCE,
)
from .exceptions import ConfigurationError

logger = logging.getLogger(__name__)

Key = Tuple[int, int, int]
BoundaryValue = Union[float, Callable[[np.ndarray, np.ndarray], np.ndarray]]

# Локальные номера вершин стороны элемента: left, right, bottom, top
SIDE_CORNERS = ((0, 3), (1, 2), (0, 1), (3, 2))


@dataclass(frozen=True)
class Domain:
    """
    Прямоугольная расчетная область

    Аргументы:
        x_min (float): Левая граница
        x_max (float): Правая граница
        y_min (float): Нижняя граница
        y_max (float): Верхняя граница

    Исключения:
        ValueError: Если прямоугольник вырожден
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        values = (self.x_min, self.x_max, self.y_min, self.y_max)
        if not np.all(np.isfinite(values)) or self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError("Вырожденная прямоугольная область")

    @classmethod
    def from_bounds(cls, bounds: Union["Domain", Sequence[float]]) -> "Domain":
        if isinstance(bounds, Domain):
            return bounds
        if len(bounds) != 4:
            raise ValueError("Область задается четырьмя числами: x_min, x_max, y_min, y_max")
        return cls(*map(float, bounds))

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.width, self.height))

    @property
    def tolerance(self) -> float:
        return SNAP_TOLERANCE * self.diameter

    def contains(self, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        points = np.atleast_2d(points)
        return (
            (points[:, 0] >= self.x_min - tol)
            & (points[:, 0] <= self.x_max + tol)
            & (points[:, 1] >= self.y_min - tol)
            & (points[:, 1] <= self.y_max + tol)
        )

    def boundary_side(self, point: np.ndarray, tol: float) -> int:
        """Номер стороны области, на которой лежит точка (-1, если точка внутри)"""
        x, y = point
        for side, distance in enumerate(
            (x - self.x_min, self.x_max - x, y - self.y_min, self.y_max - y)
        ):
            if abs(distance) <= tol:
                return side
        return -1


class Mesh:
    """
    Четырехугольная сетка прямоугольной области с висячими узлами

    Описание:
        Элементы сетки - прямоугольники, полученные рекурсивным делением базовой сетки
        nx x ny на четыре части. Каждый элемент идентифицируется ключом (level, i, j).
        Грани хранятся на самом мелком уровне: сторона крупного элемента, содержащая
        висячий узел, представлена двумя подгранями. Нормаль внутренней грани направлена
        от элемента с меньшим номером к элементу с большим, граничной - наружу.

    Пример использования:
        >>> from frats.mesh import build_uniform, refine
        >>> mesh = refine(build_uniform(2, 2, (0, 1, 0, 1)), {0})
        >>> mesh.get_stats()
        {'n_elements': 7, 'n_vertices': 14, 'n_hanging': 2, 'n_faces': 20, ...}

    Аргументы:
        domain (Domain): Расчетная область
        nx (int): Количество элементов базовой сетки по x
        ny (int): Количество элементов базовой сетки по y
        keys (list[tuple[int, int, int]]): Ключи элементов (level, i, j)
        parents (np.ndarray): Номера элементов предыдущей сетки, из которых получены элементы

    Атрибуты:
        vertices (np.ndarray): Координаты вершин (n_vertices, 2)
        elements (np.ndarray): Вершины элементов против часовой стрелки (n_elements, 4)
        levels (np.ndarray): Уровни измельчения элементов
        bounds (np.ndarray): Границы элементов (x_min, x_max, y_min, y_max)
        face_vertices (np.ndarray): Вершины граней (n_faces, 2)
        face_neighbors (np.ndarray): Соседи граней (minus, plus), plus = -1 на границе
        face_normals (np.ndarray): Нормали граней
        hanging (dict[int, tuple[int, int]]): Висячие узлы и их родительские вершины

    Методы:
        locate: Поиск элементов, содержащих точки
        constraint_matrix: Матрица связей висячих узлов
        get_stats: Получение статистик сетки
        print_stats: Отображение статистик сетки с описанием на экран
    """

    def __init__(
        self,
        domain: Domain,
        nx: int,
        ny: int,
        keys: Sequence[Key],
        parents: Optional[Sequence[int]] = None,
    ):
        self.domain = domain
        self.nx = nx
        self.ny = ny
        self.keys: List[Key] = [(int(k[0]), int(k[1]), int(k[2])) for k in keys]
        self.index: Dict[Key, int] = {key: e for e, key in enumerate(self.keys)}
        n_elements = len(self.keys)
        self.parents = (
            np.arange(n_elements) if parents is None else np.asarray(parents, dtype=np.int64)
        )
        self.hx0 = domain.width / nx
        self.hy0 = domain.height / ny
        self._build_geometry()
        self._build_faces()

    def __repr__(self):
        return f"Сетка({self.n_elements} элементов, {self.n_vertices} вершин)"

    def _build_geometry(self):
        keys = np.array(self.keys, dtype=np.int64).reshape(-1, 3)
        self.levels = keys[:, 0]
        scale = np.left_shift(1, MAX_LEVEL - self.levels)
        i0 = keys[:, 1] * scale
        j0 = keys[:, 2] * scale
        corners = np.stack(
            [
                np.column_stack([i0, j0]),
                np.column_stack([i0 + scale, j0]),
                np.column_stack([i0 + scale, j0 + scale]),
                np.column_stack([i0, j0 + scale]),
            ],
            axis=1,
        ).reshape(-1, 2)
        stride = (self.nx << MAX_LEVEL) + 1
        flat = corners[:, 1] * stride + corners[:, 0]
        codes, inverse = np.unique(flat, return_inverse=True)
        self.elements = inverse.reshape(-1, 4)
        unit = 2.0**-MAX_LEVEL
        self.vertices = np.column_stack(
            [
                self.domain.x_min + (codes % stride) * unit * self.hx0,
                self.domain.y_min + (codes // stride) * unit * self.hy0,
            ]
        )
        self.bounds = np.column_stack(
            [
                self.domain.x_min + i0 * unit * self.hx0,
                self.domain.x_min + (i0 + scale) * unit * self.hx0,
                self.domain.y_min + j0 * unit * self.hy0,
                self.domain.y_min + (j0 + scale) * unit * self.hy0,
            ]
        )
        self.sizes = np.column_stack(
            [self.bounds[:, 1] - self.bounds[:, 0], self.bounds[:, 3] - self.bounds[:, 2]]
        )
        self.areas = self.sizes[:, 0] * self.sizes[:, 1]
        self.centers = np.column_stack(
            [self.bounds[:, :2].mean(axis=1), self.bounds[:, 2:].mean(axis=1)]
        )

    def _build_faces(self):
        face_vertices: List[Tuple[int, int]] = []
        face_neighbors: List[Tuple[int, int]] = []
        face_normals: List[Tuple[float, float]] = []
        face_sides: List[int] = []
        side_faces: List[List[List[int]]] = [[[], [], [], []] for _ in range(self.n_elements)]
        hanging: Dict[int, Tuple[int, int]] = {}

        def add_face(verts, minus, plus, normal, side, owner, owner_side, other_side):
            face = len(face_vertices)
            face_vertices.append((int(verts[0]), int(verts[1])))
            face_neighbors.append((minus, plus))
            face_normals.append(normal)
            face_sides.append(side)
            side_faces[owner][owner_side].append(face)
            if plus >= 0:
                other = plus if owner == minus else minus
                side_faces[other][other_side].append(face)

        for e, (level, i, j) in enumerate(self.keys):
            n_cells_x = self.nx << level
            n_cells_y = self.ny << level
            for side, (di, dj) in enumerate(SIDE_DIRECTIONS):
                ni, nj = i + di, j + dj
                verts = self.elements[e, SIDE_CORNERS[side]]
                normal = SIDE_NORMALS[side]
                if not (0 <= ni < n_cells_x and 0 <= nj < n_cells_y):
                    add_face(verts, e, -1, normal, side, e, side, -1)
                    continue
                other = self.index.get((level, ni, nj))
                if other is not None:
                    if e < other:
                        add_face(verts, e, other, normal, -1, e, side, side ^ 1)
                    continue
                if level == 0:
                    continue
                coarse = self.index.get((level - 1, ni >> 1, nj >> 1))
                if coarse is None:
                    continue
                minus, plus = min(e, coarse), max(e, coarse)
                oriented = normal if minus == e else (-normal[0], -normal[1])
                add_face(verts, minus, plus, oriented, -1, e, side, side ^ 1)
                parents = self.elements[coarse, SIDE_CORNERS[side ^ 1]]
                for v in verts:
                    if v not in parents:
                        hanging[int(v)] = (int(parents[0]), int(parents[1]))

        self.face_vertices = np.array(face_vertices, dtype=np.int64).reshape(-1, 2)
        self.face_neighbors = np.array(face_neighbors, dtype=np.int64).reshape(-1, 2)
        self.face_normals = np.array(face_normals, dtype=float).reshape(-1, 2)
        self.face_boundary_side = np.array(face_sides, dtype=np.int64)
        ends = self.vertices[self.face_vertices]
        self.face_centers = ends.mean(axis=1)
        self.face_lengths = np.hypot(*(ends[:, 1] - ends[:, 0]).T)
        for e in range(self.n_elements):
            for side in range(4):
                axis = 1 if side < 2 else 0
                side_faces[e][side].sort(key=lambda f: self.face_centers[f, axis])
        self.side_faces = side_faces
        self.hanging = hanging

    @property
    def n_elements(self) -> int:
        return len(self.keys)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.face_vertices)

    @property
    def n_hanging(self) -> int:
        return len(self.hanging)

    @property
    def n_dofs(self) -> int:
        return self.n_vertices - self.n_hanging

    @property
    def h(self) -> float:
        return float(np.hypot(*self.sizes.T).max())

    @property
    def boundary_faces(self) -> np.ndarray:
        return np.flatnonzero(self.face_neighbors[:, 1] < 0)

    @property
    def interior_faces(self) -> np.ndarray:
        return np.flatnonzero(self.face_neighbors[:, 1] >= 0)

    @cached_property
    def divergence(self) -> sparse.csr_matrix:
        """Матрица инцидентности элементов и граней со значениями n_K·n_F"""
        interior = self.interior_faces
        faces = np.arange(self.n_faces)
        rows = np.concatenate([self.face_neighbors[:, 0], self.face_neighbors[interior, 1]])
        cols = np.concatenate([faces, interior])
        vals = np.concatenate([np.ones(self.n_faces), -np.ones(len(interior))])
        return sparse.csr_matrix((vals, (rows, cols)), shape=(self.n_elements, self.n_faces))

    @cached_property
    def face_lookup(self) -> Dict[Tuple[int, int], int]:
        """Грань по паре соседних элементов"""
        interior = self.interior_faces
        return {
            (int(self.face_neighbors[f, 0]), int(self.face_neighbors[f, 1])): int(f)
            for f in interior
        }

    def locate(self, points: np.ndarray) -> np.ndarray:
        """
        Поиск элементов, содержащих точки

        Аргументы:
            points (np.ndarray): Точки в виде массива (n, 2)

        Вывод:
            np.ndarray: Номера элементов (точка на общей грани относится к элементу
                с большими координатами, точки вне области прижимаются к границе)
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        u = (points[:, 0] - self.domain.x_min) / self.hx0
        v = (points[:, 1] - self.domain.y_min) / self.hy0
        ids = np.full(len(points), -1, dtype=np.int64)
        keys = np.array(self.keys, dtype=np.int64).reshape(-1, 3)
        for level in np.unique(self.levels):
            pending = np.flatnonzero(ids < 0)
            if not len(pending):
                break
            n_cells_x = self.nx << int(level)
            n_cells_y = self.ny << int(level)
            at_level = np.flatnonzero(self.levels == level)
            codes = keys[at_level, 1] * n_cells_y + keys[at_level, 2]
            order = np.argsort(codes)
            codes = codes[order]
            scale = 1 << int(level)
            pi = np.clip(np.floor(u[pending] * scale), 0, n_cells_x - 1).astype(np.int64)
            pj = np.clip(np.floor(v[pending] * scale), 0, n_cells_y - 1).astype(np.int64)
            wanted = pi * n_cells_y + pj
            pos = np.clip(np.searchsorted(codes, wanted), 0, len(codes) - 1)
            hit = codes[pos] == wanted
            ids[pending[hit]] = at_level[order[pos[hit]]]
        return ids

    def constraint_matrix(self) -> Tuple[sparse.csr_matrix, np.ndarray]:
        """
        Матрица связей висячих узлов

        Вывод:
            tuple[csr_matrix, np.ndarray]: Матрица C (n_vertices x n_dofs), переводящая
                степени свободы в значения во всех вершинах, и номер степени свободы
                каждой вершины (-1 для висячих)
        """
        dof_of_vertex = np.full(self.n_vertices, -1, dtype=np.int64)
        free = np.array([v not in self.hanging for v in range(self.n_vertices)], dtype=bool)
        dof_of_vertex[free] = np.arange(int(free.sum()))
        memo: Dict[int, Dict[int, float]] = {}

        def expand(v: int) -> Dict[int, float]:
            if v not in self.hanging:
                return {int(dof_of_vertex[v]): 1.0}
            if v not in memo:
                combined: Dict[int, float] = {}
                for parent in self.hanging[v]:
                    for dof, weight in expand(parent).items():
                        combined[dof] = combined.get(dof, 0.0) + 0.5 * weight
                memo[v] = combined
            return memo[v]

        rows: List[int] = []
        cols: List[int] = []
        vals: List[float] = []
        for v in range(self.n_vertices):
            for dof, weight in expand(v).items():
                rows.append(v)
                cols.append(dof)
                vals.append(weight)
        matrix = sparse.csr_matrix(
            (vals, (rows, cols)), shape=(self.n_vertices, int(free.sum()))
        )
        return matrix, dof_of_vertex

    def get_stats(self) -> Dict[str, Union[int, float]]:
        """
        Получение статистик сетки

        Вывод:
            dict[str, int|float]: Справочник статистик сетки
        """
        return {
            "n_elements": self.n_elements,
            "n_vertices": self.n_vertices,
            "n_hanging": self.n_hanging,
            "n_faces": self.n_faces,
            "max_level": int(self.levels.max()),
            "h_min": float(self.sizes.min()),
            "h_max": float(self.sizes.max()),
        }

    def print_stats(self):
        """Отображение статистик сетки с описанием на экран"""
        print(f"{'Статистика':^20}|{'Значение':^12}")
        print("-" * 32)
        stats = self.get_stats()
        for stat, value in MESH_STATS_DESC.items():
            print(f"{value:20}|{stats.get(stat):^12.6g}")


@dataclass(frozen=True)
class BoundarySegment:
    """
    Участок границы с граничным условием

    Аргументы:
        side (str): Сторона области (left, right, bottom, top)
        kind (str): Тип условия (dirichlet - давление, neumann - нормальная скорость u·n)
        value (float|callable): Значение или функция координат (x, y)
        start (float): Начало участка вдоль стороны (по умолчанию начало стороны)
        end (float): Конец участка вдоль стороны (по умолчанию конец стороны)
    """

    side: str
    kind: str
    value: BoundaryValue = 0.0
    start: Optional[float] = None
    end: Optional[float] = None

    def __post_init__(self):
        if self.side not in SIDES:
            raise ConfigurationError(f"Неизвестная сторона области: {self.side}")
        if self.kind not in BOUNDARY_KINDS:
            raise ConfigurationError(f"Неизвестный тип граничного условия: {self.kind}")

    @property
    def side_index(self) -> int:
        return SIDES.index(self.side)

    def span(self, domain: Domain) -> Tuple[float, float]:
        low, high = (
            (domain.y_min, domain.y_max) if self.side_index < 2 else (domain.x_min, domain.x_max)
        )
        start = low if self.start is None else float(self.start)
        end = high if self.end is None else float(self.end)
        return min(start, end), max(start, end)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if callable(self.value):
            values = self.value(points[:, 0], points[:, 1])
            return np.broadcast_to(np.asarray(values, dtype=float), (len(points),)).copy()
        return np.full(len(points), float(self.value))


@dataclass(frozen=True)
class FaceSets:
    """
    Классификация граней сетки

    Описание:
        Граничные грани делятся на грани Дирихле и Неймана, внутренние - на грани между
        двумя трещиноватыми элементами, пересеченные трещиной (fracture), между двумя
        матричными элементами (matrix), смешанные (mixed) и грани между двумя
        трещиноватыми элементами без пересечения (parallel). Грани притока и оттока
        определяются по знаку потока.

    Аргументы:
        interior (np.ndarray): Маска внутренних граней
        dirichlet (np.ndarray): Маска граней Дирихле
        neumann (np.ndarray): Маска граней Неймана
        segment (np.ndarray): Номер участка границы для граничных граней (-1 для внутренних)
        layout (tuple[BoundarySegment]): Участки границы
    """

    interior: np.ndarray
    dirichlet: np.ndarray
    neumann: np.ndarray
    segment: np.ndarray
    layout: Tuple[BoundarySegment, ...]
    fracture: Optional[np.ndarray] = None
    matrix: Optional[np.ndarray] = None
    mixed: Optional[np.ndarray] = None
    parallel: Optional[np.ndarray] = None
    inflow: Optional[np.ndarray] = None
    outflow: Optional[np.ndarray] = None

    @property
    def boundary(self) -> np.ndarray:
        return ~self.interior

    def boundary_values(self, faces: np.ndarray, points: np.ndarray) -> np.ndarray:
        """
        Значения граничных данных в точках граничных граней

        Аргументы:
            faces (np.ndarray): Номера граней, по одной на точку
            points (np.ndarray): Точки (n, 2)

        Вывод:
            np.ndarray: Значения граничных условий
        """
        values = np.zeros(len(faces))
        segments = self.segment[faces]
        for k in np.unique(segments):
            if k < 0:
                continue
            mask = segments == k
            values[mask] = self.layout[int(k)].evaluate(points[mask])
        return values


def build_uniform(nx: int, ny: int, domain: Union[Domain, Sequence[float]]) -> Mesh:
    """
    Построение равномерной сетки

    Аргументы:
        nx (int): Количество элементов по x
        ny (int): Количество элементов по y
        domain (Domain|list[float]): Расчетная область

    Вывод:
        Mesh: Сетка из nx·ny одинаковых прямоугольников

    Исключения:
        ValueError: Если количество элементов не положительно или область вырождена
    """
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ValueError("Количество элементов должно быть положительным целым числом")
    domain = Domain.from_bounds(domain)
    keys = [(0, i, j) for j in range(int(ny)) for i in range(int(nx))]
    return Mesh(domain, int(nx), int(ny), keys)


def _children(key: Key) -> List[Key]:
    level, i, j = key
    return [
        (level + 1, 2 * i, 2 * j),
        (level + 1, 2 * i + 1, 2 * j),
        (level + 1, 2 * i, 2 * j + 1),
        (level + 1, 2 * i + 1, 2 * j + 1),
    ]


def _coarser_neighbors(mesh: Mesh, key: Key, leaves: Set[Key]) -> List[Key]:
    level, i, j = key
    coarser = []
    for di, dj in SIDE_DIRECTIONS:
        ni, nj = i + di, j + dj
        if not (0 <= ni < mesh.nx << level and 0 <= nj < mesh.ny << level):
            continue
        for lvl in range(level - 1, -1, -1):
            shift = level - lvl
            ancestor = (lvl, ni >> shift, nj >> shift)
            if ancestor in leaves:
                coarser.append(ancestor)
                break
    return coarser


def _leaf_descendants(key: Key, leaves: Set[Key]) -> Iterator[Key]:
    if key in leaves:
        yield key
        return
    for child in _children(key):
        yield from _leaf_descendants(child, leaves)


def refine(mesh: Mesh, flags: Union[Set[int], Sequence[int], np.ndarray]) -> Mesh:
    """
    Измельчение отмеченных элементов делением на четыре

    Описание:
        Соседи по грани, более крупные, чем отмеченный элемент, измельчаются каскадно,
        чтобы уровни соседних элементов отличались не более чем на единицу

    Аргументы:
        mesh (Mesh): Исходная сетка
        flags (set[int]): Номера измельчаемых элементов

    Вывод:
        Mesh: Новая сетка с сохранением связи элементов с исходными (атрибут parents)

    Исключения:
        ValueError: Если номер элемента отсутствует в сетке или превышен максимальный уровень
    """
    flags = {int(e) for e in np.atleast_1d(np.asarray(list(flags), dtype=np.int64))}
    unknown = [e for e in flags if not 0 <= e < mesh.n_elements]
    if unknown:
        raise ValueError(f"Элементы отсутствуют в сетке: {sorted(unknown)[:10]}")
    if not flags:
        return mesh
    leaves = set(mesh.keys)
    stack = [mesh.keys[e] for e in sorted(flags, reverse=True)]
    while stack:
        key = stack[-1]
        if key not in leaves:
            stack.pop()
            continue
        if key[0] + 1 > MAX_LEVEL:
            raise ValueError(f"Превышен максимальный уровень измельчения {MAX_LEVEL}")
        coarser = _coarser_neighbors(mesh, key, leaves)
        if coarser:
            stack.extend(coarser)
            continue
        stack.pop()
        leaves.discard(key)
        leaves.update(_children(key))
    keys: List[Key] = []
    parents: List[int] = []
    for e, key in enumerate(mesh.keys):
        for leaf in _leaf_descendants(key, leaves):
            keys.append(leaf)
            parents.append(e)
    logger.debug("Измельчение: %d -> %d элементов", mesh.n_elements, len(keys))
    return Mesh(mesh.domain, mesh.nx, mesh.ny, keys, parents)


def refine_globally(mesh: Mesh, rounds: int = 1) -> Mesh:
    """Глобальное измельчение всех элементов заданное количество раз"""
    for _ in range(rounds):
        mesh = refine(mesh, range(mesh.n_elements))
    return mesh


def classify_boundary(mesh: Mesh, layout: Sequence[BoundarySegment]) -> FaceSets:
    """
    Разбиение граничных граней на грани Дирихле и Неймана

    Аргументы:
        mesh (Mesh): Сетка
        layout (list[BoundarySegment]): Участки границы, покрывающие всю границу

    Вывод:
        FaceSets: Классификация граней (граничная часть)

    Исключения:
        ConfigurationError: Если участки перекрываются, граница покрыта не полностью
            или грань пересекает точку смены граничных условий
    """
    layout = tuple(layout)
    if not layout:
        raise ConfigurationError("Не заданы граничные условия")
    tol = mesh.domain.tolerance
    spans = [segment.span(mesh.domain) for segment in layout]
    for side in SIDES:
        on_side = sorted(spans[k] for k, s in enumerate(layout) if s.side == side)
        for (_, end), (start, _) in zip(on_side[:-1], on_side[1:]):
            if end - start > tol:
                raise ConfigurationError(f"Участки границы на стороне {side} перекрываются")
    segment = np.full(mesh.n_faces, -1, dtype=np.int64)
    for f in mesh.boundary_faces:
        side = int(mesh.face_boundary_side[f])
        axis = 1 if side < 2 else 0
        ends = np.sort(mesh.vertices[mesh.face_vertices[f], axis])
        matches = [
            k
            for k, (start, end) in enumerate(spans)
            if layout[k].side_index == side and min(ends[1], end) - max(ends[0], start) > tol
        ]
        if not matches:
            raise ConfigurationError(f"Грань {f} на стороне {SIDES[side]} не покрыта условиями")
        start, end = spans[matches[0]]
        if len(matches) > 1 or ends[0] < start - tol or ends[1] > end + tol:
            raise ConfigurationError(
                f"Грань {f} на стороне {SIDES[side]} пересекает точку смены граничных условий"
            )
        segment[f] = matches[0]
    interior = mesh.face_neighbors[:, 1] >= 0
    kinds = np.array([layout[k].kind if k >= 0 else "" for k in segment])
    return FaceSets(
        interior=interior,
        dirichlet=kinds == DIRICHLET,
        neumann=kinds == NEUMANN,
        segment=segment,
        layout=layout,
    )
