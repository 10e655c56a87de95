from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .constants import (
    FACE_FRACTURE,
    MAX_REFINEMENT_STEPS,
    NEUMANN,
    SIDE_NORMALS,
    SIDES,
    STEADY_STATE_TOLERANCE,
    TRANSPORT_STATS_DESC,
    TRANSPORT_TOLERANCE,
)
from .exceptions import ConfigurationError, NumericalError
from .flux import FaceFluxField, calc_sources, classify_flow
from .fractures import IntersectionData
from .mesh import BoundarySegment, BoundaryValue, Mesh, classify_boundary
from .pressure import MaterialField
from .utils import gauss_rule, safe_divide

logger = logging.getLogger(__name__)

Vector = Tuple[float, float]
QoiFunction = Callable[["ConcentrationField"], Sequence[float]]


def _evaluate(value: BoundaryValue, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(points)
    if callable(value):
        result = value(points[:, 0], points[:, 1])
        return np.broadcast_to(np.asarray(result, dtype=float), (len(points),)).copy()
    return np.full(len(points), float(value))


@dataclass(frozen=True)
class ConcentrationField:
    """
    Кусочно-постоянная концентрация

    Описание:
        На трещиноватых элементах значение относится к концентрации в трещинах c_Γ,
        на матричных - к концентрации в матрице c

    Аргументы:
        mesh (Mesh): Сетка
        values (np.ndarray): Значения по элементам
        fractured (np.ndarray): Маска трещиноватых элементов
        time (float): Момент времени
    """

    mesh: Mesh
    values: np.ndarray
    fractured: np.ndarray
    time: float = 0.0

    @property
    def matrix_values(self) -> np.ndarray:
        return self.values[~self.fractured]

    @property
    def fracture_values(self) -> np.ndarray:
        return self.values[self.fractured]

    @property
    def min(self) -> float:
        return float(self.values.min())

    @property
    def max(self) -> float:
        return float(self.values.max())

    def with_values(self, values: np.ndarray, time: float) -> "ConcentrationField":
        return replace(self, values=values, time=time)


@dataclass
class TransportConfig:
    """
    Параметры расчета переноса

    Аргументы:
        dt (float): Шаг по времени
        end_time (float): Время окончания расчета
        c0 (float|callable): Начальная концентрация в матрице
        c_gamma0 (float|callable): Начальная концентрация в трещинах (по умолчанию c0)
        c_boundary (float|callable): Концентрация на границе притока
        c_gamma_boundary (float|callable): Концентрация на гранях притока, пересеченных
            трещиной (по умолчанию c_boundary)
        c_source (float): Концентрация закачиваемой жидкости c_w
        output_times (list[float]): Моменты сохранения полей
        stop_at_steady (bool): Останавливать ли расчет при выходе на стационар
        steady_tol (float): Порог ‖c^{n+1} - c^n‖_∞ для стационара
        tol (float): Допустимая относительная невязка линейной системы

    Исключения:
        ConfigurationError: Если шаг по времени неположителен или время окончания
            отрицательно
    """

    dt: float
    end_time: float
    c0: BoundaryValue = 0.0
    c_gamma0: Optional[BoundaryValue] = None
    c_boundary: BoundaryValue = 1.0
    c_gamma_boundary: Optional[BoundaryValue] = None
    c_source: float = 1.0
    output_times: Sequence[float] = field(default_factory=tuple)
    stop_at_steady: bool = False
    steady_tol: float = STEADY_STATE_TOLERANCE
    tol: float = TRANSPORT_TOLERANCE

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ConfigurationError("Шаг по времени должен быть положительным")
        if self.end_time < 0.0:
            raise ConfigurationError("Время окончания расчета должно быть неотрицательным")

    @property
    def fracture_initial(self) -> BoundaryValue:
        return self.c0 if self.c_gamma0 is None else self.c_gamma0


def init(
    mesh: Mesh,
    intersection: IntersectionData,
    c0: BoundaryValue = 0.0,
    c_gamma0: Optional[BoundaryValue] = None,
) -> ConcentrationField:
    """
    Проекция начальных данных на кусочно-постоянные функции

    Аргументы:
        mesh (Mesh): Сетка
        intersection (IntersectionData): Пересечение сети трещин с сеткой
        c0 (float|callable): Начальная концентрация в матрице
        c_gamma0 (float|callable): Начальная концентрация в трещинах (по умолчанию c0)

    Вывод:
        ConcentrationField: Средние по элементам (по длине K∩Γ для трещиноватых)
    """
    c_gamma0 = c0 if c_gamma0 is None else c_gamma0
    points, weights = gauss_rule(2)
    values = np.zeros(mesh.n_elements)
    origin = mesh.bounds[:, [0, 2]]
    for px, wx in zip(points, weights):
        for py, wy in zip(points, weights):
            values += wx * wy * _evaluate(c0, origin + np.array([px, py]) * mesh.sizes)
    fractured = intersection.fractured
    if fractured.any():
        starts, ends = intersection.segment_start, intersection.segment_end
        lengths = intersection.segment_length
        integral = np.zeros(len(lengths))
        for tau, weight in zip(points, weights):
            integral += weight * lengths * _evaluate(c_gamma0, starts + tau * (ends - starts))
        total = np.bincount(
            intersection.segment_element, weights=integral, minlength=mesh.n_elements
        )
        values[fractured] = total[fractured] / intersection.fracture_length[fractured]
    return ConcentrationField(mesh=mesh, values=values, fractured=fractured)


class TransportOperator:
    """
    Система неявной схемы Эйлера для переноса с противопоточной аппроксимацией

    Описание:
        Поток не зависит от времени, поэтому матрица собирается и раскладывается один раз.
        Для матричного элемента коэффициент при производной по времени равен φ|K|, для
        трещиноватого - Σ w·φ_Γ·|K∩Γ|. Значение на грани берется из элемента, из которого
        вытекает поток; на гранях притока - граничная концентрация (c_Γ,B на гранях,
        пересеченных трещиной). Стоки учитываются неявно, источники - с концентрацией c_w.

    Аргументы:
        flux (FaceFluxField): Поток по граням
        dt (float): Шаг по времени
        c_boundary (float|callable): Концентрация на границе притока
        c_gamma_boundary (float|callable): Концентрация на гранях притока трещин
        c_source (float): Концентрация закачиваемой жидкости
        tol (float): Допустимая относительная невязка

    Исключения:
        ConfigurationError: Если шаг по времени или коэффициент емкости неположителен
    """

    def __init__(
        self,
        flux: FaceFluxField,
        dt: float,
        c_boundary: BoundaryValue = 1.0,
        c_gamma_boundary: Optional[BoundaryValue] = None,
        c_source: float = 1.0,
        tol: float = TRANSPORT_TOLERANCE,
    ):
        if not dt > 0.0:
            raise ConfigurationError("Шаг по времени должен быть положительным")
        self.flux = flux
        self.dt = float(dt)
        self.tol = tol
        mesh = flux.mesh
        intersection = flux.intersection
        n = mesh.n_elements
        self.storage = np.where(
            intersection.fractured,
            intersection.element_storage(),
            flux.materials.porosity * mesh.areas,
        )
        if np.any(self.storage <= 0.0):
            raise ConfigurationError("Коэффициент емкости элементов должен быть положительным")

        values = flux.values
        interior = mesh.interior_faces
        minus, plus = mesh.face_neighbors[interior].T
        forward = values[interior] >= 0
        donor = np.where(forward, minus, plus)
        receiver = np.where(forward, plus, minus)
        magnitude = np.abs(values[interior])

        face_sets = classify_flow(flux.face_sets, flux)
        self.outflow_faces = np.flatnonzero(face_sets.outflow)
        self.outflow_owner = mesh.face_neighbors[self.outflow_faces, 0]
        incoming = np.flatnonzero(face_sets.inflow)
        centers = mesh.face_centers[incoming]
        crossed = intersection.crossed_faces[incoming]
        concentration = _evaluate(c_boundary, centers)
        if crossed.any():
            fracture_value = c_boundary if c_gamma_boundary is None else c_gamma_boundary
            concentration[crossed] = _evaluate(fracture_value, centers[crossed])
        inflow_load = np.bincount(
            mesh.face_neighbors[incoming, 0],
            weights=-values[incoming] * concentration,
            minlength=n,
        )

        sources = calc_sources(intersection, flux.materials)
        self.sink = np.minimum(sources, 0.0)
        self.load = inflow_load + np.maximum(sources, 0.0) * c_source

        diagonal = np.arange(n)
        rows = np.concatenate([donor, receiver, self.outflow_owner, diagonal])
        cols = np.concatenate([donor, donor, self.outflow_owner, diagonal])
        vals = np.concatenate(
            [magnitude, -magnitude, values[self.outflow_faces], self.storage / dt - self.sink]
        )
        self.matrix = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsc()
        self._factor = splinalg.splu(self.matrix)
        logger.debug("Система переноса: %d элементов, dt = %g", n, dt)

    @classmethod
    def from_config(
        cls, flux: FaceFluxField, config: TransportConfig, dt: Optional[float] = None
    ) -> "TransportOperator":
        return cls(
            flux,
            config.dt if dt is None else dt,
            c_boundary=config.c_boundary,
            c_gamma_boundary=config.c_gamma_boundary,
            c_source=config.c_source,
            tol=config.tol,
        )

    def step(self, values: np.ndarray) -> np.ndarray:
        """
        Один шаг неявной схемы Эйлера

        Аргументы:
            values (np.ndarray): Концентрация на предыдущем шаге

        Вывод:
            np.ndarray: Концентрация на новом шаге

        Исключения:
            NumericalError: Если система решена с недостаточной точностью
        """
        rhs = self.storage / self.dt * values + self.load
        new = self._factor.solve(rhs)
        scale = np.linalg.norm(rhs)
        for _ in range(MAX_REFINEMENT_STEPS):
            error = float(np.linalg.norm(rhs - self.matrix @ new))
            if error <= self.tol * scale:
                break
            new += self._factor.solve(rhs - self.matrix @ new)
        error = safe_divide(float(np.linalg.norm(rhs - self.matrix @ new)), scale)
        if not np.isfinite(error) or error > self.tol:
            raise NumericalError("Система для концентрации решена неточно", error)
        return new


def step(c_old: ConcentrationField, operator: TransportOperator) -> ConcentrationField:
    """Шаг по времени для поля концентрации"""
    return c_old.with_values(operator.step(c_old.values), c_old.time + operator.dt)


def mass_balance(
    operator: TransportOperator, c_old: np.ndarray, c_new: np.ndarray
) -> Tuple[float, float]:
    """
    Баланс массы индикатора за один шаг

    Аргументы:
        operator (TransportOperator): Система переноса
        c_old (np.ndarray): Концентрация до шага
        c_new (np.ndarray): Концентрация после шага

    Вывод:
        tuple[float, float]: Изменение запаса и чистый приток (приток - отток + источники)
            за шаг
    """
    change = float(np.dot(operator.storage, c_new - c_old))
    outflow = np.dot(operator.flux.values[operator.outflow_faces], c_new[operator.outflow_owner])
    net = operator.dt * (operator.load.sum() - outflow + np.dot(operator.sink, c_new))
    return change, float(net)


@dataclass(frozen=True)
class TransportResult:
    """
    Результат расчета переноса

    Аргументы:
        fields (list[ConcentrationField]): Поля в моменты сохранения (начальное и конечное
            включены)
        qoi (np.ndarray): Строки (время, значения целевых величин) на каждом шаге
        n_steps (int): Количество выполненных шагов
        steady_time (float): Время выхода на стационар (None, если не достигнут)
        balance_error (float): Наибольшая относительная ошибка баланса массы за шаг
    """

    fields: List[ConcentrationField]
    qoi: np.ndarray
    n_steps: int
    steady_time: Optional[float] = None
    balance_error: float = 0.0

    @property
    def final(self) -> ConcentrationField:
        return self.fields[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([f.time for f in self.fields])

    def get_stats(self) -> Dict[str, Union[int, float]]:
        """
        Получение статистик расчета переноса

        Вывод:
            dict[str, int|float]: Справочник статистик
        """
        return {
            "n_steps": self.n_steps,
            "end_time": self.final.time,
            "steady_time": math.nan if self.steady_time is None else self.steady_time,
            "c_min": self.final.min,
            "c_max": self.final.max,
        }

    def print_stats(self):
        """Отображение статистик расчета переноса с описанием на экран"""
        print(f"{'Статистика':^20}|{'Значение':^12}")
        print("-" * 32)
        stats = self.get_stats()
        for stat, value in TRANSPORT_STATS_DESC.items():
            print(f"{value:20}|{stats.get(stat):^12.6g}")


def run(
    flux: FaceFluxField,
    config: TransportConfig,
    initial: Optional[ConcentrationField] = None,
    qoi: Optional[QoiFunction] = None,
) -> TransportResult:
    """
    Расчет переноса неявной схемой Эйлера с постоянным шагом

    Описание:
        Если время окончания не кратно шагу, последний шаг укорачивается. Целевые величины
        вычисляются на каждом шаге, поля сохраняются в моменты output_times.

    Аргументы:
        flux (FaceFluxField): Поток по граням (консервативный для принципа максимума)
        config (TransportConfig): Параметры расчета
        initial (ConcentrationField): Начальное поле (по умолчанию проекция c0)
        qoi (callable): Функция поля, возвращающая целевые величины

    Вывод:
        TransportResult: Сохраненные поля, ряды целевых величин и время стационара
    """
    mesh = flux.mesh
    if initial is None:
        initial = init(mesh, flux.intersection, config.c0, config.fracture_initial)
    if not flux.conservative:
        logger.warning("Перенос рассчитывается с неконсервативным потоком")
    start = time.perf_counter()
    n_full = int(math.floor(config.end_time / config.dt + 1e-9))
    remainder = config.end_time - n_full * config.dt
    operators = [(TransportOperator.from_config(flux, config), n_full)]
    if remainder > 1e-9 * config.dt:
        operators.append((TransportOperator.from_config(flux, config, remainder), 1))
    pending = sorted(t for t in config.output_times if 0.0 < t < config.end_time)

    fields = [initial]
    rows = [[initial.time, *(qoi(initial) if qoi else [])]]
    current = initial
    steady_time: Optional[float] = None
    balance_error = 0.0
    n_steps = 0
    stopped = False
    for operator, count in operators:
        for _ in range(count):
            new = step(current, operator)
            n_steps += 1
            change, net = mass_balance(operator, current.values, new.values)
            balance_error = max(
                balance_error, safe_divide(abs(change - net), max(abs(change), abs(net)))
            )
            rows.append([new.time, *(qoi(new) if qoi else [])])
            while pending and pending[0] <= new.time + 1e-9 * operator.dt:
                fields.append(new)
                logger.info("Перенос: t = %g, c ∈ [%.4f, %.4f]", new.time, new.min, new.max)
                pending.pop(0)
            difference = float(np.abs(new.values - current.values).max(initial=0.0))
            current = new
            if steady_time is None and difference <= config.steady_tol:
                steady_time = current.time
                if config.stop_at_steady:
                    stopped = True
                    break
        if stopped:
            break
    if config.stop_at_steady and steady_time is None:
        logger.warning("Стационар не достигнут к моменту t = %g", current.time)
    if fields[-1] is not current:
        fields.append(current)
    logger.info(
        "Перенос завершен: %d шагов, t = %g, %.2f с",
        n_steps,
        current.time,
        time.perf_counter() - start,
    )
    return TransportResult(
        fields=fields,
        qoi=np.array(rows, dtype=float),
        n_steps=n_steps,
        steady_time=steady_time,
        balance_error=balance_error,
    )


@dataclass(frozen=True)
class PiecewiseVelocity:
    """
    Заданная скорость, постоянная по обе стороны горизонтальной трещины

    Аргументы:
        below (tuple[float, float]): Скорость в матрице при y < level
        above (tuple[float, float]): Скорость в матрице при y >= level
        fracture (tuple[float, float]): Скорость в трещине u_Γ
        level (float): Положение трещины по y
    """

    below: Vector
    above: Vector
    fracture: Vector = (10.0, 0.0)
    level: float = 0.5

    @classmethod
    def inflow(cls, rate: float = 10.0, level: float = 0.5) -> "PiecewiseVelocity":
        """Поток из матрицы к трещине с обеих сторон"""
        return cls(below=(0.0, 1.0), above=(0.0, -1.0), fracture=(rate, 0.0), level=level)

    @classmethod
    def outflow(cls, rate: float = 10.0, level: float = 0.5) -> "PiecewiseVelocity":
        """Поток из трещины в матрицу с обеих сторон"""
        return cls(below=(0.0, -1.0), above=(0.0, 1.0), fracture=(rate, 0.0), level=level)

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        below = y < self.level
        return np.where(below[:, None], np.array(self.below), np.array(self.above))

    def normal_component(self, side: str) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
        """Нормальная компонента u·n на стороне области"""
        normal = np.array(SIDE_NORMALS[SIDES.index(side)])
        return lambda x, y: self(x, y) @ normal


def explicit_velocity_mode(
    mesh: Mesh,
    intersection: IntersectionData,
    velocity: PiecewiseVelocity,
    materials: Optional[MaterialField] = None,
) -> FaceFluxField:
    """
    Поток по граням для заданного поля скорости

    Описание:
        Q_F = ∫_F u·n_F (двухточечная квадратура Гаусса). На гранях между трещиноватыми
        элементами, пересеченных трещиной, и на граничных гранях в точке выхода трещины
        добавляется расход w·u_Γ·t_Γ,F. Вся граница считается границей Неймана с данными u·n.

    Аргументы:
        mesh (Mesh): Сетка
        intersection (IntersectionData): Пересечение сети трещин с сеткой
        velocity (PiecewiseVelocity): Скорость в матрице и трещине
        materials (MaterialField): Свойства материалов (по умолчанию однородные без
            источников)

    Вывод:
        FaceFluxField: Поток по граням
    """
    materials = materials or MaterialField.uniform(mesh)
    layout = [BoundarySegment(side, NEUMANN, velocity.normal_component(side)) for side in SIDES]
    face_sets = classify_boundary(mesh, layout)
    kind = intersection.face_kind
    values = np.zeros(mesh.n_faces)
    faces = np.flatnonzero(kind != FACE_FRACTURE)
    ends = mesh.vertices[mesh.face_vertices[faces]]
    normals = mesh.face_normals[faces]
    points, weights = gauss_rule(2)
    for tau, weight in zip(points, weights):
        x = ends[:, 0] + tau * (ends[:, 1] - ends[:, 0])
        u = velocity(x[:, 0], x[:, 1])
        values[faces] += weight * mesh.face_lengths[faces] * np.einsum("fi,fi->f", u, normals)

    crossing = intersection.crossing_face
    carried = (kind[crossing] == FACE_FRACTURE) | (mesh.face_neighbors[crossing, 1] < 0)
    aperture = intersection.network.aperture[intersection.crossing_edge]
    rates = aperture * (intersection.crossing_tangent @ np.array(velocity.fracture))
    np.add.at(values, crossing[carried], rates[carried])
    return FaceFluxField(
        mesh=mesh,
        values=values,
        face_sets=face_sets,
        intersection=intersection,
        materials=materials,
    )
