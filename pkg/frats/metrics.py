from typing import Callable, Dict, List, Sequence, Union

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .constants import ERROR_STATS_DESC, LINE_COLUMNS, SIDE_NORMALS
from .exceptions import ConfigurationError
from .interpretation import InterpretedField
from .pressure import PressureField
from .reference_data import ReferenceSolution
from .transport import ConcentrationField
from .utils import safe_divide

logger = logging.getLogger(__name__)

Field = Union[PressureField, ConcentrationField, InterpretedField]


def evaluate(field: Field, points: np.ndarray) -> np.ndarray:
    """
    Значения поля в точках

    Описание:
        Непрерывное давление и интерпретированная концентрация вычисляются в точке,
        для кусочно-постоянной концентрации берется значение содержащего элемента

    Аргументы:
        field (PressureField|ConcentrationField|InterpretedField): Поле
        points (np.ndarray): Точки (n, 2)

    Вывод:
        np.ndarray: Значения
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if isinstance(field, (PressureField, InterpretedField)):
        return field.evaluate(points)
    if isinstance(field, ConcentrationField):
        return field.values[field.mesh.locate(points)]
    raise TypeError("Некорректный тип поля")


def _weighted_error(
    values: np.ndarray, reference: np.ndarray, weights: np.ndarray, scale: float
) -> float:
    if not len(values):
        raise ValueError("Нет ячеек эталонного решения для вычисления ошибки")
    return math.sqrt(safe_divide(float(np.sum(weights * (values - reference) ** 2)), scale))


def calc_matrix_error(pressure: PressureField, reference: ReferenceSolution) -> float:
    """
    Относительная ошибка давления в матрице

    Описание:
        err_M² = Σ |K_ref|·(p_h(x_K) - p_ref)² / (|Ω|·Δp_ref²) по ячейкам матрицы
        эталонного решения (формула средней точки по целым эталонным ячейкам)

    Аргументы:
        pressure (PressureField): Давление
        reference (ReferenceSolution): Эталонное давление

    Вывод:
        float: Ошибка err_M

    Исключения:
        ValueError: Если эталонное решение не содержит ячеек матрицы
    """
    matrix = reference.matrix
    values = evaluate(pressure, reference.centroids[matrix])
    scale = reference.domain_area * reference.value_range**2
    return _weighted_error(values, reference.values[matrix], reference.areas[matrix], scale)


def calc_fracture_error(pressure: PressureField, reference: ReferenceSolution) -> float:
    """
    Относительная ошибка давления на трещинах

    Описание:
        Ячейки эталонного решения на трещинах взвешиваются по площади, что при одинаковом
        раскрытии соответствует весу по длине трещины, нормировка - суммарная площадь
        этих ячеек (аналог |Γ|)

    Аргументы:
        pressure (PressureField): Давление
        reference (ReferenceSolution): Эталонное давление с признаком ячеек трещин

    Вывод:
        float: Ошибка err_F

    Исключения:
        ValueError: Если эталонное решение не содержит ячеек трещин
    """
    on_fracture = reference.on_fracture
    areas = reference.areas[on_fracture]
    values = evaluate(pressure, reference.centroids[on_fracture])
    scale = float(areas.sum()) * reference.value_range**2
    return _weighted_error(values, reference.values[on_fracture], areas, scale)


@dataclass(frozen=True)
class ErrorReport:
    """
    Ошибки давления относительно эталонного решения

    Аргументы:
        err_matrix (float): Ошибка в матрице
        err_fracture (float): Ошибка в трещинах (NaN без ячеек трещин)
        delta_p (float): Перепад эталонного давления

    Методы:
        get_stats: Получение статистик
        print_stats: Отображение статистик
    """

    err_matrix: float
    err_fracture: float
    delta_p: float

    def get_stats(self) -> Dict[str, float]:
        return {
            "err_matrix": self.err_matrix,
            "err_fracture": self.err_fracture,
            "delta_p": self.delta_p,
        }

    def print_stats(self):
        stats = self.get_stats()
        print(f"{'Статистика':^20}|{'Значение':^12}")
        print("-" * 33)
        for stat, value in ERROR_STATS_DESC.items():
            print(f"{value:20}|{stats.get(stat):^12.6g}")


def calc_errors(pressure: PressureField, reference: ReferenceSolution) -> ErrorReport:
    """Вычисление err_M и err_F"""
    err_fracture = (
        calc_fracture_error(pressure, reference) if reference.on_fracture.any() else math.nan
    )
    report = ErrorReport(
        err_matrix=calc_matrix_error(pressure, reference),
        err_fracture=err_fracture,
        delta_p=reference.value_range,
    )
    logger.info("Ошибки давления: err_M=%.3e, err_F=%.3e", report.err_matrix, err_fracture)
    return report


def fracture_concentration_error(c_h: ConcentrationField, reference: ReferenceSolution) -> float:
    """
    Относительная ошибка концентрации на трещинах ‖c_ref - c_h‖/‖c_ref‖

    Аргументы:
        c_h (ConcentrationField): Концентрация
        reference (ReferenceSolution): Эталонная концентрация с признаком ячеек трещин

    Вывод:
        float: Относительная ошибка (абсолютная при нулевой эталонной концентрации)
    """
    on_fracture = reference.on_fracture
    if not on_fracture.any():
        raise ValueError("Эталонное решение не содержит ячеек трещин")
    areas = reference.areas[on_fracture]
    expected = reference.values[on_fracture]
    values = evaluate(c_h, reference.centroids[on_fracture])
    difference = float(np.sum(areas * (values - expected) ** 2))
    norm = float(np.sum(areas * expected**2))
    return math.sqrt(safe_divide(difference, norm, default=difference))


def sample_line(
    field: Field, start: Sequence[float], end: Sequence[float], n_samples: int = 101
) -> pd.DataFrame:
    """
    Значения поля вдоль отрезка

    Пример использования:
        >>> from frats.metrics import sample_line
        >>> table = sample_line(pressure, (0.0, 0.7), (1.0, 0.7), n_samples=11)
        >>> table.columns.tolist()
        ['S', 'X', 'Y', 'VALUE']

    Аргументы:
        field (PressureField|ConcentrationField|InterpretedField): Поле
        start (list[float]): Начало отрезка
        end (list[float]): Конец отрезка
        n_samples (int): Количество равномерно расположенных точек

    Вывод:
        pd.DataFrame: Таблица со столбцами S (длина дуги), X, Y, VALUE

    Исключения:
        ValueError: Если точек меньше двух или отрезок выходит из области
    """
    if n_samples < 2:
        raise ValueError("Количество точек должно быть не меньше двух")
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    domain = field.field.mesh.domain if isinstance(field, InterpretedField) else field.mesh.domain
    if not domain.contains(np.array([start, end]), domain.tolerance).all():
        raise ValueError("Отрезок выходит за пределы расчетной области")
    t = np.linspace(0.0, 1.0, n_samples)
    points = start + t[:, None] * (end - start)
    values = evaluate(field, points)
    return pd.DataFrame(
        np.column_stack([t * float(np.hypot(*(end - start))), points, values]),
        columns=LINE_COLUMNS,
    )


def _outlet(pressure: PressureField, point: np.ndarray):
    """Ребро сети, элемент и знак внешнего направления для выхода трещины на границу"""
    intersection = pressure.intersection
    if intersection is None:
        raise ConfigurationError("Поле давления построено без сети трещин")
    mesh = pressure.mesh
    domain = mesh.domain
    side = domain.boundary_side(point, domain.tolerance)
    if side < 0:
        raise ConfigurationError(f"Точка {tuple(point)} не лежит на границе области")
    network = intersection.network
    distances = np.hypot(*(network.nodes - point).T)
    node = int(np.argmin(distances)) if network.n_nodes else -1
    if node < 0 or distances[node] > domain.tolerance:
        raise ConfigurationError(f"В точке {tuple(point)} нет узла сети трещин")
    edge = network.node_edges[node][0]
    segments = np.flatnonzero(intersection.segment_edge == edge)
    ends = np.minimum(
        np.hypot(*(intersection.segment_start[segments] - point).T),
        np.hypot(*(intersection.segment_end[segments] - point).T),
    )
    element = int(intersection.segment_element[segments[np.argmin(ends)]])
    sign = float(np.sign(network.tangents[edge] @ np.asarray(SIDE_NORMALS[side])))
    return edge, element, sign


def calc_qoi(
    c_h: ConcentrationField, pressure: PressureField, points: Sequence[Sequence[float]]
) -> np.ndarray:
    """
    Поток примеси из трещин через точки их выхода на границу

    Описание:
        QOI = max(-k_Γ∇_Γp·t_out, 0)·c_h, где градиент вычисляется в трещиноватом элементе,
        содержащем конец трещины, t_out - касательная, направленная из области, а c_h -
        концентрация в трещине этого элемента

    Аргументы:
        c_h (ConcentrationField): Концентрация
        pressure (PressureField): Давление с сетью трещин
        points (list): Точки выхода трещин на границу

    Вывод:
        np.ndarray: Значения QOI для каждой точки

    Исключения:
        ConfigurationError: Если точка не лежит на границе или в ней нет узла сети
    """
    result = []
    for point in np.atleast_2d(np.asarray(points, dtype=float)):
        edge, element, sign = _outlet(pressure, point)
        rate = sign * float(pressure.fracture_rate(point, edge, element)[0])
        result.append(max(rate, 0.0) * float(c_h.values[element]))
    return np.array(result)


def qoi_function(
    pressure: PressureField, points: Sequence[Sequence[float]]
) -> Callable[[ConcentrationField], List[float]]:
    """Функция целевых величин для расчета переноса"""
    return lambda field: calc_qoi(field, pressure, points).tolist()


def fracture_velocity_profile(
    pressure: PressureField, edge: int, n_samples: int = 51
) -> pd.DataFrame:
    """
    Расход -k_Γ∇_Γp·t вдоль ребра сети трещин

    Аргументы:
        pressure (PressureField): Давление с сетью трещин
        edge (int): Номер ребра
        n_samples (int): Количество точек (середины равных частей ребра)

    Вывод:
        pd.DataFrame: Таблица со столбцами S, X, Y, VALUE
    """
    if pressure.intersection is None:
        raise ConfigurationError("Поле давления построено без сети трещин")
    network = pressure.intersection.network
    start, end = network.starts[edge], network.ends[edge]
    t = (np.arange(n_samples) + 0.5) / n_samples
    points = start + t[:, None] * (end - start)
    values = pressure.fracture_rate(points, edge)
    return pd.DataFrame(
        np.column_stack([t * network.lengths[edge], points, values]), columns=LINE_COLUMNS
    )


def l2_difference(first: ConcentrationField, second: ConcentrationField) -> float:
    """Норма L² разности кусочно-постоянных полей на одной сетке"""
    if first.mesh.n_elements != second.mesh.n_elements:
        raise ValueError("Поля заданы на разных сетках")
    difference = first.values - second.values
    return math.sqrt(float(np.sum(first.mesh.areas * difference**2)))


def convergence_slope(sizes: Sequence[float], errors: Sequence[float]) -> float:
    """
    Наклон прямой наименьших квадратов в логарифмических координатах

    Аргументы:
        sizes (list[float]): Число степеней свободы или шаги по времени
        errors (list[float]): Ошибки

    Вывод:
        float: Наклон log(error) по log(size)

    Исключения:
        ValueError: Если точек меньше двух или значения неположительны
    """
    sizes = np.asarray(sizes, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(sizes) < 2 or len(sizes) != len(errors):
        raise ValueError("Для оценки наклона нужно не меньше двух пар значений")
    if np.any(sizes <= 0.0) or np.any(errors <= 0.0):
        raise ValueError("Значения для оценки наклона должны быть положительными")
    slope, _ = np.polyfit(np.log(sizes), np.log(errors), 1)
    return float(slope)
