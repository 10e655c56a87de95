from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .constants import (
    COINCIDENCE_SHIFT,
    COINCIDENCE_TOLERANCE,
    DEFAULT_APERTURE,
    DEFAULT_FRACTURE_PERMEABILITY,
    DEFAULT_FRACTURE_POROSITY,
    FACE_BOUNDARY,
    FACE_FRACTURE,
    FACE_MATRIX,
    FACE_MIXED,
    FACE_PARALLEL,
    FRACTURE_COLUMNS,
    FRACTURE_PROPERTY_COLUMNS,
    MAX_LEVEL,
    MAX_SHIFT_ATTEMPTS,
    NETWORK_STATS_DESC,
    NEUMANN,
)
from .exceptions import FractureDataError, ResolutionError
from .mesh import Domain, FaceSets, Mesh, refine
from .utils import clip_segment, intersect_segments, to_path

logger = logging.getLogger(__name__)


class FractureNetwork:
    """
    Сеть трещин в виде графа прямолинейных ребер

    Описание:
        Ребро ориентировано от узла с меньшим номером к узлу с большим. Касательная t
        направлена вдоль ребра, нормаль n_Γ - слева направо при движении вдоль t.
        Эффективная проницаемость ребра k_Γ = w·κ_Γ.

    Пример использования:
        >>> from frats.fractures import FractureNetwork
        >>> segments = [(0, 0.5, 1, 0.5), (0.5, 0, 0.5, 1)]
        >>> network = FractureNetwork.from_segments(segments, (0, 1, 0, 1))
        >>> network.get_stats()
        {'n_nodes': 5, 'n_edges': 4, 'length': 2.0, 'n_boundary_nodes': 4}

    Аргументы:
        nodes (np.ndarray): Координаты узлов (n_nodes, 2)
        edges (np.ndarray): Пары узлов ребер (n_edges, 2)
        aperture (np.ndarray): Раскрытие w ребер
        permeability (np.ndarray): Проницаемость κ_Γ ребер
        porosity (np.ndarray): Пористость φ_Γ ребер
        domain (Domain): Расчетная область

    Исключения:
        FractureDataError: Если ребро вырождено, узел вне области или свойства некорректны
    """

    def __init__(
        self,
        nodes: np.ndarray,
        edges: np.ndarray,
        aperture: np.ndarray,
        permeability: np.ndarray,
        porosity: np.ndarray,
        domain: Optional[Domain] = None,
    ):
        self.nodes = np.asarray(nodes, dtype=float).reshape(-1, 2)
        self.edges = np.sort(np.asarray(edges, dtype=np.int64).reshape(-1, 2), axis=1)
        n_edges = len(self.edges)
        self.aperture = np.broadcast_to(np.asarray(aperture, dtype=float), (n_edges,)).copy()
        self.permeability = np.broadcast_to(
            np.asarray(permeability, dtype=float), (n_edges,)
        ).copy()
        self.porosity = np.broadcast_to(np.asarray(porosity, dtype=float), (n_edges,)).copy()
        self.domain = domain
        if n_edges and np.any(self.lengths <= 0.0):
            raise FractureDataError("Ребро сети трещин имеет нулевую длину")
        if np.any(self.aperture <= 0.0):
            raise FractureDataError("Раскрытие трещин должно быть положительным")
        if np.any((self.porosity <= 0.0) | (self.porosity > 1.0)):
            raise FractureDataError("Пористость трещин должна лежать в (0, 1]")
        if domain is not None and not domain.contains(self.nodes, domain.tolerance).all():
            raise FractureDataError("Узлы сети трещин лежат вне расчетной области")

    def __repr__(self):
        return f"Сеть трещин({self.n_nodes} узлов, {self.n_edges} ребер)"

    @classmethod
    def empty(cls, domain: Optional[Domain] = None) -> "FractureNetwork":
        return cls(np.zeros((0, 2)), np.zeros((0, 2)), 1.0, 1.0, 1.0, domain=domain)

    @classmethod
    def from_segments(
        cls,
        segments: Sequence[Sequence[float]],
        domain: Union[Domain, Sequence[float]],
        aperture: Union[float, Sequence[float]] = DEFAULT_APERTURE,
        permeability: Union[float, Sequence[float]] = DEFAULT_FRACTURE_PERMEABILITY,
        porosity: Union[float, Sequence[float]] = DEFAULT_FRACTURE_POROSITY,
    ) -> "FractureNetwork":
        """
        Построение сети из набора отрезков с разбиением в точках пересечения

        Аргументы:
            segments (list): Отрезки (x0, y0, x1, y1)
            domain (Domain|list[float]): Расчетная область
            aperture (float|list[float]): Раскрытие трещин
            permeability (float|list[float]): Проницаемость трещин
            porosity (float|list[float]): Пористость трещин

        Вывод:
            FractureNetwork: Сеть трещин
        """
        domain = Domain.from_bounds(domain)
        segments = np.asarray(segments, dtype=float).reshape(-1, 4)
        n = len(segments)
        properties = np.column_stack(
            [
                np.broadcast_to(np.asarray(value, dtype=float), (n,))
                for value in (aperture, permeability, porosity)
            ]
        )
        return _build_graph(segments, properties, domain)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def starts(self) -> np.ndarray:
        return self.nodes[self.edges[:, 0]]

    @property
    def ends(self) -> np.ndarray:
        return self.nodes[self.edges[:, 1]]

    @property
    def lengths(self) -> np.ndarray:
        return np.hypot(*(self.ends - self.starts).T)

    @property
    def length(self) -> float:
        return float(self.lengths.sum())

    @property
    def tangents(self) -> np.ndarray:
        return (self.ends - self.starts) / self.lengths[:, None]

    @property
    def normals(self) -> np.ndarray:
        tangents = self.tangents
        return np.column_stack([tangents[:, 1], -tangents[:, 0]])

    @property
    def effective_permeability(self) -> np.ndarray:
        return self.aperture * self.permeability

    @property
    def node_edges(self) -> List[List[int]]:
        """Ребра, сходящиеся в каждом узле"""
        incident: List[List[int]] = [[] for _ in range(self.n_nodes)]
        for g, (a, b) in enumerate(self.edges):
            incident[a].append(g)
            incident[b].append(g)
        return incident

    def boundary_nodes(self, domain: Optional[Domain] = None) -> np.ndarray:
        """Узлы сети, лежащие на границе области"""
        domain = domain or self.domain
        if domain is None:
            return np.zeros(0, dtype=np.int64)
        tol = domain.tolerance
        return np.array(
            [i for i, node in enumerate(self.nodes) if domain.boundary_side(node, tol) >= 0],
            dtype=np.int64,
        )

    def neumann_nodes(self, face_sets: FaceSets, domain: Domain) -> List[Tuple[int, int]]:
        """
        Узлы сети на участках границы с условием Неймана

        Аргументы:
            face_sets (FaceSets): Классификация граней
            domain (Domain): Расчетная область

        Вывод:
            list[tuple[int, int]]: Пары (узел, номер участка границы)
        """
        tol = domain.tolerance
        found = []
        for i in self.boundary_nodes(domain):
            node = self.nodes[i]
            side = domain.boundary_side(node, tol)
            coordinate = node[1] if side < 2 else node[0]
            for k, segment in enumerate(face_sets.layout):
                if segment.side_index != side or segment.kind != NEUMANN:
                    continue
                start, end = segment.span(domain)
                if start - tol <= coordinate <= end + tol:
                    found.append((int(i), k))
                    break
        return found

    def get_stats(self) -> Dict[str, Union[int, float]]:
        """
        Получение статистик сети трещин

        Вывод:
            dict[str, int|float]: Справочник статистик
        """
        return {
            "n_nodes": self.n_nodes,
            "n_edges": self.n_edges,
            "length": self.length,
            "n_boundary_nodes": len(self.boundary_nodes()),
        }

    def print_stats(self):
        """Отображение статистик сети трещин с описанием на экран"""
        print(f"{'Статистика':^20}|{'Значение':^12}")
        print("-" * 32)
        stats = self.get_stats()
        for stat, value in NETWORK_STATS_DESC.items():
            print(f"{value:20}|{stats.get(stat):^12.6g}")


def _split_parameters(segments: np.ndarray, tol: float) -> List[List[float]]:
    starts, ends = segments[:, :2], segments[:, 2:]
    low = np.minimum(starts, ends) - tol
    high = np.maximum(starts, ends) + tol
    params: List[List[float]] = [[0.0, 1.0] for _ in range(len(segments))]
    for a in range(len(segments)):
        overlap = np.flatnonzero(
            np.all(low[a + 1 :] <= high[a], axis=1) & np.all(high[a + 1 :] >= low[a], axis=1)
        )
        for b in overlap + a + 1:
            hit = intersect_segments(starts[a], ends[a], starts[b], ends[b], tol)
            if hit is not None:
                params[a].append(hit[0])
                params[b].append(hit[1])
    return params


def _build_graph(segments: np.ndarray, properties: np.ndarray, domain: Domain) -> FractureNetwork:
    tol = domain.tolerance
    if not len(segments):
        return FractureNetwork.empty(domain)
    points = np.vstack([segments[:, :2], segments[:, 2:]])
    if not domain.contains(points, tol).all():
        raise FractureDataError("Концы трещин лежат вне расчетной области")
    lengths = np.hypot(segments[:, 2] - segments[:, 0], segments[:, 3] - segments[:, 1])
    if np.any(lengths <= tol):
        rows = np.flatnonzero(lengths <= tol).tolist()
        raise FractureDataError(f"Трещины нулевой длины: {rows}")

    pieces: List[Tuple[int, np.ndarray]] = []
    for s, params in enumerate(_split_parameters(segments, tol)):
        start, end = segments[s, :2], segments[s, 2:]
        ordered = np.unique(np.round(np.array(params) * lengths[s] / tol).astype(np.int64))
        ts = ordered * tol / lengths[s]
        ts[0], ts[-1] = 0.0, 1.0
        pieces.append((s, start + ts[:, None] * (end - start)))

    all_points = np.vstack([p for _, p in pieces])
    tree = cKDTree(all_points)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    n_points = len(all_points)
    graph = coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n_points, n_points)
    )
    _, labels = connected_components(graph, directed=False)
    first_of_label: Dict[int, int] = {}
    node_of_point = np.empty(n_points, dtype=np.int64)
    nodes: List[np.ndarray] = []
    for k, label in enumerate(labels):
        if label not in first_of_label:
            first_of_label[label] = len(nodes)
            nodes.append(all_points[k])
        node_of_point[k] = first_of_label[label]

    edges: List[Tuple[int, int]] = []
    edge_properties: List[np.ndarray] = []
    seen: Set[Tuple[int, int]] = set()
    offset = 0
    for s, chain in pieces:
        ids = node_of_point[offset : offset + len(chain)]
        offset += len(chain)
        for a, b in zip(ids[:-1], ids[1:]):
            if a == b:
                continue
            pair = (int(min(a, b)), int(max(a, b)))
            if pair in seen:
                logger.warning("Трещина %d дублирует ребро %s и пропущена", s, pair)
                continue
            seen.add(pair)
            edges.append(pair)
            edge_properties.append(properties[s])
    table = np.array(edge_properties).reshape(-1, 3)
    return FractureNetwork(
        np.array(nodes),
        np.array(edges),
        table[:, 0],
        table[:, 1],
        table[:, 2],
        domain=domain,
    )


def load_network(
    source: Union[str, Path, pd.DataFrame],
    domain: Union[Domain, Sequence[float]],
    aperture: float = DEFAULT_APERTURE,
    permeability: float = DEFAULT_FRACTURE_PERMEABILITY,
    porosity: float = DEFAULT_FRACTURE_POROSITY,
) -> FractureNetwork:
    """
    Загрузка сети трещин из таблицы

    Описание:
        Таблица содержит столбцы START_X, START_Y, END_X, END_Y и необязательные столбцы
        APERTURE, PERMEABILITY, POROSITY. Отсутствующие свойства берутся из аргументов.
        Совпадающие (в пределах допуска) концы объединяются, отрезки разбиваются в точках
        пересечения.

    Аргументы:
        source (str|Path|DataFrame): Путь к файлу с разделителями или таблица pandas
        domain (Domain|list[float]): Расчетная область
        aperture (float): Раскрытие по умолчанию
        permeability (float): Проницаемость по умолчанию
        porosity (float): Пористость по умолчанию

    Вывод:
        FractureNetwork: Сеть трещин

    Исключения:
        FractureDataError: Если отсутствуют столбцы, значения некорректны или концы вне области
    """
    if isinstance(source, pd.DataFrame):
        table = source.copy()
    else:
        path = to_path(source)
        if not path.is_file():
            raise FractureDataError(f"Файл с трещинами не найден: {path}")
        table = pd.read_csv(path, sep=None, engine="python")
    table.columns = [str(column).strip().upper() for column in table.columns]
    missing = [column for column in FRACTURE_COLUMNS if column not in table.columns]
    if missing:
        raise FractureDataError(f"В таблице трещин отсутствуют столбцы: {missing}")
    defaults = {"aperture": aperture, "permeability": permeability, "porosity": porosity}
    for column, name in FRACTURE_PROPERTY_COLUMNS.items():
        if column not in table.columns:
            table[column] = defaults[name]
    columns = FRACTURE_COLUMNS + list(FRACTURE_PROPERTY_COLUMNS)
    values = table[columns].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(values).all(axis=1))
    if len(bad):
        raise FractureDataError(f"Некорректные значения в строках таблицы трещин: {bad.tolist()}")
    domain = Domain.from_bounds(domain)
    network = _build_graph(values[:, :4], values[:, 4:], domain)
    logger.info("Загружена сеть трещин: %d ребер, %d узлов", network.n_edges, network.n_nodes)
    return network


@dataclass(frozen=True)
class IntersectionData:
    """
    Пересечение сети трещин с сеткой

    Аргументы:
        mesh (Mesh): Сетка
        network (FractureNetwork): Сеть трещин
        segment_element (np.ndarray): Элемент каждого отсеченного отрезка
        segment_edge (np.ndarray): Ребро сети каждого отсеченного отрезка
        segment_start (np.ndarray): Начала отсеченных отрезков
        segment_end (np.ndarray): Концы отсеченных отрезков
        crossing_face (np.ndarray): Грань каждой точки пересечения трещины с гранью
        crossing_edge (np.ndarray): Ребро сети каждой точки пересечения
        crossing_point (np.ndarray): Координаты точек пересечения
        crossing_tangent (np.ndarray): Касательные t_Γ,F, сонаправленные с n_F
        face_kind (np.ndarray): Класс каждой грани (constants.FACE_*)
        subdomain (np.ndarray): Метка подобласти матричных элементов (-1 для трещиноватых)
        edge_shift (np.ndarray): Сдвиг ребер при совпадении с гранями сетки
    """

    mesh: Mesh
    network: FractureNetwork
    segment_element: np.ndarray
    segment_edge: np.ndarray
    segment_start: np.ndarray
    segment_end: np.ndarray
    crossing_face: np.ndarray
    crossing_edge: np.ndarray
    crossing_point: np.ndarray
    crossing_tangent: np.ndarray
    face_kind: np.ndarray
    subdomain: np.ndarray
    edge_shift: np.ndarray

    @property
    def segment_length(self) -> np.ndarray:
        return np.hypot(*(self.segment_end - self.segment_start).T)

    @property
    def segment_tangent(self) -> np.ndarray:
        return self.network.tangents[self.segment_edge]

    @property
    def fracture_length(self) -> np.ndarray:
        """Длина |K∩Γ| в каждом элементе"""
        return np.bincount(
            self.segment_element, weights=self.segment_length, minlength=self.mesh.n_elements
        )

    @property
    def fractured(self) -> np.ndarray:
        mask = np.zeros(self.mesh.n_elements, dtype=bool)
        mask[self.segment_element] = True
        return mask

    @property
    def n_subdomains(self) -> int:
        return int(self.subdomain.max()) + 1 if len(self.subdomain) else 0

    @property
    def crossed_faces(self) -> np.ndarray:
        mask = np.zeros(self.mesh.n_faces, dtype=bool)
        mask[self.crossing_face] = True
        return mask

    def segments_of(self, element: int) -> np.ndarray:
        return np.flatnonzero(self.segment_element == element)

    def element_permeability(self) -> np.ndarray:
        """Средневзвешенная по длине проницаемость κ_Γ трещин в элементах"""
        weighted = np.bincount(
            self.segment_element,
            weights=self.segment_length * self.network.permeability[self.segment_edge],
            minlength=self.mesh.n_elements,
        )
        length = self.fracture_length
        return np.divide(weighted, length, out=np.zeros_like(weighted), where=length > 0)

    def element_storage(self) -> np.ndarray:
        """Коэффициент Σ w·φ_Γ·|K∩Γ| в каждом элементе"""
        edges = self.segment_edge
        return np.bincount(
            self.segment_element,
            weights=self.segment_length
            * self.network.aperture[edges]
            * self.network.porosity[edges],
            minlength=self.mesh.n_elements,
        )


def _degenerate(
    mesh: Mesh, elements: np.ndarray, starts: np.ndarray, ends: np.ndarray, t_in, t_out
) -> bool:
    """Отрезок проходит вдоль грани или через вершину сетки"""
    bounds = mesh.bounds[elements]
    tol = COINCIDENCE_TOLERANCE * mesh.sizes[elements].min(axis=1)
    mid = 0.5 * (starts + ends)
    to_boundary = np.min(
        np.column_stack(
            [
                mid[:, 0] - bounds[:, 0],
                bounds[:, 1] - mid[:, 0],
                mid[:, 1] - bounds[:, 2],
                bounds[:, 3] - mid[:, 1],
            ]
        ),
        axis=1,
    )
    if np.any(to_boundary <= tol):
        return True
    for points, params in ((starts, t_in), (ends, t_out)):
        interior = (params > 1e-12) & (params < 1.0 - 1e-12)
        dx = np.minimum(np.abs(points[:, 0] - bounds[:, 0]), np.abs(points[:, 0] - bounds[:, 1]))
        dy = np.minimum(np.abs(points[:, 1] - bounds[:, 2]), np.abs(points[:, 1] - bounds[:, 3]))
        if np.any(interior & (dx <= tol) & (dy <= tol)):
            return True
    return False


def _face_at(mesh: Mesh, element: int, point: np.ndarray, tol: float) -> int:
    """Грань элемента, содержащая точку (-1, если точка не на границе элемента)"""
    x_min, x_max, y_min, y_max = mesh.bounds[element]
    distances = (point[0] - x_min, x_max - point[0], point[1] - y_min, y_max - point[1])
    side = int(np.argmin(np.abs(distances)))
    if abs(distances[side]) > tol:
        return -1
    axis = 1 if side < 2 else 0
    for f in mesh.side_faces[element][side]:
        ends = np.sort(mesh.vertices[mesh.face_vertices[f], axis])
        if ends[0] - tol <= point[axis] <= ends[1] + tol:
            return f
    return -1


def _clip_edge(mesh: Mesh, start: np.ndarray, end: np.ndarray, expand: float = 0.0):
    low = np.minimum(start, end)
    high = np.maximum(start, end)
    bounds = mesh.bounds
    candidates = np.flatnonzero(
        (bounds[:, 0] <= high[0] + expand)
        & (bounds[:, 1] >= low[0] - expand)
        & (bounds[:, 2] <= high[1] + expand)
        & (bounds[:, 3] >= low[1] - expand)
    )
    boxes = bounds[candidates] + np.array([-expand, expand, -expand, expand])
    t_in, t_out, valid = clip_segment(start, end, boxes)
    return candidates[valid], t_in[valid], t_out[valid]


def intersect(mesh: Mesh, network: FractureNetwork) -> IntersectionData:
    """
    Вычисление пересечения сети трещин с сеткой

    Описание:
        Каждое ребро разбивается на отрезки внутри элементов, для граней записываются точки
        пересечения и касательные. Ребро, проходящее вдоль грани или через вершину сетки,
        сдвигается на 1e-6·h вдоль n_Γ. Матричные элементы размечаются по подобластям
        обходом соседей через грани.

    Аргументы:
        mesh (Mesh): Сетка
        network (FractureNetwork): Сеть трещин

    Вывод:
        IntersectionData: Данные о пересечении
    """
    seg_element: List[int] = []
    seg_edge: List[int] = []
    seg_start: List[np.ndarray] = []
    seg_end: List[np.ndarray] = []
    cross_face: List[int] = []
    cross_edge: List[int] = []
    cross_point: List[np.ndarray] = []
    edge_shift = np.zeros((network.n_edges, 2))
    domain_tol = mesh.domain.tolerance
    normals = network.normals

    for g in range(network.n_edges):
        a, b = network.starts[g], network.ends[g]
        for attempt in range(MAX_SHIFT_ATTEMPTS + 1):
            start, end = a + edge_shift[g], b + edge_shift[g]
            elements, t_in, t_out = _clip_edge(mesh, start, end)
            keep = (t_out - t_in) * network.lengths[g] > COINCIDENCE_TOLERANCE * mesh.sizes[
                elements
            ].min(axis=1)
            elements, t_in, t_out = elements[keep], t_in[keep], t_out[keep]
            d = end - start
            p_in = start + t_in[:, None] * d
            p_out = start + t_out[:, None] * d
            if attempt == MAX_SHIFT_ATTEMPTS or not _degenerate(
                mesh, elements, p_in, p_out, t_in, t_out
            ):
                break
            h_local = float(mesh.sizes[elements].min()) if len(elements) else mesh.h
            edge_shift[g] = (attempt + 1) * COINCIDENCE_SHIFT * h_local * normals[g]
            logger.warning(
                "Трещина %d совпадает с гранью или вершиной сетки, сдвиг на %.3e вдоль n_Γ",
                g,
                (attempt + 1) * COINCIDENCE_SHIFT * h_local,
            )
        order = np.argsort(t_in)
        elements, t_in, t_out = elements[order], t_in[order], t_out[order]
        p_in, p_out = p_in[order], p_out[order]
        for k, element in enumerate(elements):
            seg_element.append(int(element))
            seg_edge.append(g)
            seg_start.append(p_in[k])
            seg_end.append(p_out[k])
        for k in range(len(elements) - 1):
            key = (int(min(elements[k], elements[k + 1])), int(max(elements[k], elements[k + 1])))
            face = mesh.face_lookup.get(key)
            if face is None:
                logger.warning("Трещина %d переходит между несоседними элементами %s", g, key)
                continue
            cross_face.append(face)
            cross_edge.append(g)
            cross_point.append(0.5 * (p_out[k] + p_in[k + 1]))
        ends = [(0, p_in[0]), (-1, p_out[-1])] if len(elements) else []
        for k, point in ends:
            element = int(elements[k])
            tol = COINCIDENCE_TOLERANCE * float(mesh.sizes[element].min())
            face = _face_at(mesh, element, point, max(tol, domain_tol))
            if face < 0:
                continue
            if mesh.face_neighbors[face, 1] < 0:
                cross_face.append(face)
                cross_edge.append(g)
                cross_point.append(point)
            elif mesh.face_neighbors[face, 0] == element:
                logger.warning("Узел трещины %d лежит на грани %d сетки", g, face)
                cross_face.append(face)
                cross_edge.append(g)
                cross_point.append(point)

    segment_element = np.array(seg_element, dtype=np.int64)
    fractured = np.zeros(mesh.n_elements, dtype=bool)
    fractured[segment_element] = True
    crossing_face = np.array(cross_face, dtype=np.int64)
    crossing_edge = np.array(cross_edge, dtype=np.int64)
    tangents = network.tangents[crossing_edge] if len(crossing_edge) else np.zeros((0, 2))
    signs = np.sign(np.einsum("ij,ij->i", tangents, mesh.face_normals[crossing_face]))
    signs[signs == 0] = 1.0
    face_kind = _classify_faces(mesh, fractured, crossing_face)
    return IntersectionData(
        mesh=mesh,
        network=network,
        segment_element=segment_element,
        segment_edge=np.array(seg_edge, dtype=np.int64),
        segment_start=np.array(seg_start, dtype=float).reshape(-1, 2),
        segment_end=np.array(seg_end, dtype=float).reshape(-1, 2),
        crossing_face=crossing_face,
        crossing_edge=crossing_edge,
        crossing_point=np.array(cross_point, dtype=float).reshape(-1, 2),
        crossing_tangent=tangents * signs[:, None],
        face_kind=face_kind,
        subdomain=_label_subdomains(mesh, fractured),
        edge_shift=edge_shift,
    )


def _classify_faces(mesh: Mesh, fractured: np.ndarray, crossing_face: np.ndarray) -> np.ndarray:
    kind = np.full(mesh.n_faces, FACE_BOUNDARY, dtype=np.int64)
    interior = mesh.interior_faces
    minus, plus = mesh.face_neighbors[interior].T
    n_fractured = fractured[minus].astype(int) + fractured[plus].astype(int)
    crossed = np.zeros(mesh.n_faces, dtype=bool)
    crossed[crossing_face] = True
    kind[interior] = np.select(
        [n_fractured == 0, n_fractured == 1, crossed[interior]],
        [FACE_MATRIX, FACE_MIXED, FACE_FRACTURE],
        default=FACE_PARALLEL,
    )
    return kind


def _label_subdomains(mesh: Mesh, fractured: np.ndarray) -> np.ndarray:
    """Разметка связных компонент матричных элементов в каноническом порядке"""
    labels = np.full(mesh.n_elements, -1, dtype=np.int64)
    matrix = np.flatnonzero(~fractured)
    if not len(matrix):
        return labels
    interior = mesh.interior_faces
    minus, plus = mesh.face_neighbors[interior].T
    both = ~fractured[minus] & ~fractured[plus]
    graph = coo_matrix(
        (np.ones(int(both.sum())), (minus[both], plus[both])),
        shape=(mesh.n_elements, mesh.n_elements),
    )
    _, components = connected_components(graph, directed=False)
    components = components[matrix]
    corners = mesh.bounds[matrix][:, [2, 0]]
    anchors = {}
    for component, (y, x) in zip(components, corners):
        if component not in anchors or (y, x) < anchors[component]:
            anchors[component] = (y, x)
    ordered = sorted(anchors, key=lambda c: anchors[c])
    rank = {component: k for k, component in enumerate(ordered)}
    labels[matrix] = [rank[c] for c in components]
    return labels


def classify_faces(face_sets: FaceSets, intersection: IntersectionData) -> FaceSets:
    """Дополнение классификации граней разбиением внутренних граней по трещинам"""
    kind = intersection.face_kind
    return replace(
        face_sets,
        fracture=kind == FACE_FRACTURE,
        matrix=kind == FACE_MATRIX,
        mixed=kind == FACE_MIXED,
        parallel=kind == FACE_PARALLEL,
    )


def touched_elements(mesh: Mesh, network: FractureNetwork) -> List[Set[int]]:
    """
    Ребра сети, пересекающие замыкание каждого элемента

    Вывод:
        list[set[int]]: Для каждого элемента множество номеров ребер
    """
    touched: List[Set[int]] = [set() for _ in range(mesh.n_elements)]
    expand = COINCIDENCE_TOLERANCE * float(mesh.sizes.min())
    for g in range(network.n_edges):
        elements, _, _ = _clip_edge(mesh, network.starts[g], network.ends[g], expand)
        for element in elements:
            touched[int(element)].add(g)
    return touched


def refine_around_fractures(mesh: Mesh, network: FractureNetwork, rounds: int) -> Mesh:
    """
    Локальное измельчение вокруг трещин

    Аргументы:
        mesh (Mesh): Сетка
        network (FractureNetwork): Сеть трещин
        rounds (int): Количество циклов измельчения

    Вывод:
        Mesh: Сетка, в которой каждый цикл делит все элементы, касающиеся трещин

    Исключения:
        ValueError: Если количество циклов отрицательно
    """
    if rounds < 0:
        raise ValueError("Количество циклов измельчения должно быть неотрицательным")
    for _ in range(rounds):
        flags = {e for e, edges in enumerate(touched_elements(mesh, network)) if edges}
        mesh = refine(mesh, flags)
    return mesh


def refine_to_fracture_resolution(
    mesh: Mesh, network: FractureNetwork, h_target: float, max_level: int = MAX_LEVEL
) -> Mesh:
    """
    Измельчение вокруг трещин до заданного размера элементов

    Аргументы:
        mesh (Mesh): Сетка
        network (FractureNetwork): Сеть трещин
        h_target (float): Требуемый размер элементов, касающихся трещин
        max_level (int): Максимальный уровень измельчения

    Вывод:
        Mesh: Измельченная сетка
    """
    if h_target <= 0.0:
        raise ValueError("Размер элементов должен быть положительным")
    while True:
        flags = {
            e
            for e, edges in enumerate(touched_elements(mesh, network))
            if edges and mesh.sizes[e].max() > h_target and mesh.levels[e] < max_level
        }
        if not flags:
            return mesh
        mesh = refine(mesh, flags)


def _edge_components(network: FractureNetwork, edges: Set[int]) -> int:
    """Число связных компонент подмножества ребер (граф инцидентности ребро-узел)"""
    patch = np.array(sorted(edges), dtype=np.int64)
    nodes, local = np.unique(network.edges[patch], return_inverse=True)
    n_edges = len(patch)
    rows = np.repeat(np.arange(n_edges), 2)
    cols = n_edges + local.reshape(-1)
    size = n_edges + len(nodes)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size))
    _, labels = connected_components(graph, directed=False)
    return len(np.unique(labels[:n_edges]))


def _unresolved(mesh: Mesh, network: FractureNetwork) -> Dict[int, Set[int]]:
    touched = touched_elements(mesh, network)
    vertex_edges: List[Set[int]] = [set() for _ in range(mesh.n_vertices)]
    for e, edges in enumerate(touched):
        if edges:
            for v in mesh.elements[e]:
                vertex_edges[v] |= edges
    unresolved = {}
    for e in range(mesh.n_elements):
        patch: Set[int] = set()
        for v in mesh.elements[e]:
            patch |= vertex_edges[v]
        if len(patch) > 1 and _edge_components(network, patch) > 1:
            unresolved[e] = patch
    return unresolved


def resolve_close_fractures(
    mesh: Mesh, network: FractureNetwork, max_level: int = 12
) -> Mesh:
    """
    Разделение близких несвязанных трещин измельчением

    Описание:
        Элемент измельчается, пока окрестность его вершин (все элементы, имеющие общую
        вершину с ним) пересекает ребра сети, не связанные между собой

    Аргументы:
        mesh (Mesh): Сетка
        network (FractureNetwork): Сеть трещин
        max_level (int): Максимальный уровень измельчения

    Вывод:
        Mesh: Сетка, в которой каждая окрестность вершин видит одну связную трещину

    Исключения:
        ResolutionError: Если на максимальном уровне остаются неразделенные трещины
    """
    while True:
        unresolved = _unresolved(mesh, network)
        if not unresolved:
            return mesh
        flags = {e for e in unresolved if mesh.levels[e] < max_level}
        if not flags:
            pairs = [
                (a, b)
                for edges in unresolved.values()
                for a in edges
                for b in edges
                if a < b and _edge_components(network, {a, b}) > 1
            ]
            raise ResolutionError("Не удалось разделить близкие трещины", pairs)
        logger.info("Разделение близких трещин: измельчение %d элементов", len(flags))
        mesh = refine(mesh, flags)
