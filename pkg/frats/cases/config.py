from typing import Any, Dict, List, Optional, Type, TypeVar, Union

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from ..constants import (
    DEFAULT_APERTURE,
    DEFAULT_FRACTURE_PERMEABILITY,
    DEFAULT_FRACTURE_POROSITY,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_PERMEABILITY,
    DEFAULT_POROSITY,
    FLUX_TOLERANCE,
    MAX_CG_ITERATIONS,
    MAX_LEVEL,
    PRESSURE_TOLERANCE,
    REFERENCE_CELL_CAP,
    REFERENCE_CELLS_ACROSS,
    REFERENCE_MAX_LEVEL,
    SOLVER_METHODS,
    STEADY_STATE_TOLERANCE,
    TRACE_WIDTH,
    TRANSPORT_TOLERANCE,
)
from ..exceptions import ConfigurationError
from ..mesh import BoundarySegment
from ..transport import PiecewiseVelocity, TransportConfig
from ..utils import to_path

Section = TypeVar("Section")
VELOCITY_KINDS = ("inflow", "outflow")


@dataclass
class MeshConfig:
    """
    Параметры сетки

    Аргументы:
        nx (int): Количество элементов базовой сетки по x
        ny (int): Количество элементов базовой сетки по y
        global_rounds (int): Количество глобальных измельчений
        fracture_rounds (int): Количество измельчений вокруг трещин
        resolve_close (bool): Разделять ли близкие несвязанные трещины
        fracture_resolution (float): Требуемый размер элементов у трещин (семейство LR)
        max_level (int): Максимальный уровень измельчения
    """

    nx: int = 19
    ny: int = 19
    global_rounds: int = 0
    fracture_rounds: int = 0
    resolve_close: bool = False
    fracture_resolution: Optional[float] = None
    max_level: int = MAX_LEVEL

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ConfigurationError("Размеры базовой сетки должны быть положительными")
        if self.global_rounds < 0 or self.fracture_rounds < 0:
            raise ConfigurationError("Количество измельчений должно быть неотрицательным")
        if self.fracture_resolution is not None and self.fracture_resolution <= 0.0:
            raise ConfigurationError("Размер элементов у трещин должен быть положительным")


@dataclass
class FractureConfig:
    """
    Сеть трещин: таблица path или отрезки segments (x0, y0, x1, y1)

    Свойства из таблицы имеют приоритет над значениями по умолчанию
    """

    path: Optional[str] = None
    segments: List[List[float]] = field(default_factory=list)
    aperture: float = DEFAULT_APERTURE
    permeability: float = DEFAULT_FRACTURE_PERMEABILITY
    porosity: float = DEFAULT_FRACTURE_POROSITY
    source: float = 0.0

    def __post_init__(self):
        if self.path is not None and self.segments:
            raise ConfigurationError("Сеть трещин задается либо файлом, либо отрезками")
        if any(len(segment) != 4 for segment in self.segments):
            raise ConfigurationError("Отрезок трещины задается четырьмя координатами")


@dataclass
class MaterialConfig:
    permeability: float = DEFAULT_PERMEABILITY
    porosity: float = DEFAULT_POROSITY
    source: float = 0.0


@dataclass
class BoundaryConfig:
    """Участок границы (см. BoundarySegment)"""

    side: str
    kind: str
    value: float = 0.0
    start: Optional[float] = None
    end: Optional[float] = None

    def __post_init__(self):
        self.to_segment()

    def to_segment(self) -> BoundarySegment:
        return BoundarySegment(self.side, self.kind, self.value, self.start, self.end)


@dataclass
class VelocityConfig:
    """
    Заданная скорость для расчета переноса без задачи давления

    Аргументы:
        kind (str): Вариант (inflow - из матрицы в трещину, outflow - из трещины в матрицу)
        rate (float): Скорость в трещине u_Γ
        level (float): Положение горизонтальной трещины
    """

    kind: str = "inflow"
    rate: float = 10.0
    level: float = 0.5

    def __post_init__(self):
        if self.kind not in VELOCITY_KINDS:
            raise ConfigurationError(f"Неизвестный вариант скорости: {self.kind}")

    def to_velocity(self) -> PiecewiseVelocity:
        if self.kind == "inflow":
            return PiecewiseVelocity.inflow(self.rate, self.level)
        return PiecewiseVelocity.outflow(self.rate, self.level)

    def exact_profile(self, x: np.ndarray, aperture: float) -> np.ndarray:
        """Стационарная концентрация в трещине при c_B = 1 и единичной скорости в матрице"""
        x = np.asarray(x, dtype=float)
        if self.kind == "inflow":
            return 1.0 + 2.0 * aperture * x / self.rate
        return np.exp(-2.0 * aperture * x / self.rate)


@dataclass
class TransportSettings:
    dt: float
    end_time: float
    c0: float = 0.0
    c_gamma0: Optional[float] = None
    c_boundary: float = 1.0
    c_gamma_boundary: Optional[float] = None
    c_source: float = 1.0
    output_times: List[float] = field(default_factory=list)
    stop_at_steady: bool = False
    steady_tol: float = STEADY_STATE_TOLERANCE

    def __post_init__(self):
        self.to_config()

    def to_config(self, tol: float = TRANSPORT_TOLERANCE) -> TransportConfig:
        """Параметры расчета переноса с допуском линейного решателя"""
        return TransportConfig(
            dt=self.dt,
            end_time=self.end_time,
            c0=self.c0,
            c_gamma0=self.c_gamma0,
            c_boundary=self.c_boundary,
            c_gamma_boundary=self.c_gamma_boundary,
            c_source=self.c_source,
            output_times=tuple(self.output_times),
            stop_at_steady=self.stop_at_steady,
            steady_tol=self.steady_tol,
            tol=tol,
        )


@dataclass
class SolverConfig:
    pressure_tol: float = PRESSURE_TOLERANCE
    flux_tol: float = FLUX_TOLERANCE
    transport_tol: float = TRANSPORT_TOLERANCE
    method: str = "direct"
    max_iterations: int = MAX_CG_ITERATIONS

    def __post_init__(self):
        if self.method not in SOLVER_METHODS:
            raise ConfigurationError(f"Неизвестный метод решения: {self.method}")
        if min(self.pressure_tol, self.flux_tol, self.transport_tol) <= 0.0:
            raise ConfigurationError("Допуски решателей должны быть положительными")


@dataclass
class ReferenceConfig:
    """
    Эталонное решение

    Аргументы:
        path (str): Таблица центров ячеек эталонного давления
        tpfa (bool): Строить ли эталонное решение на мелкой сетке с полосами трещин
        cells_across (int): Число ячеек поперек полосы трещины
        max_level (int): Максимальный уровень измельчения эталонной сетки
        cell_cap (int): Максимальное число ячеек эталонной сетки
    """

    path: Optional[str] = None
    tpfa: bool = False
    cells_across: int = REFERENCE_CELLS_ACROSS
    max_level: int = REFERENCE_MAX_LEVEL
    cell_cap: int = REFERENCE_CELL_CAP

    def __post_init__(self):
        if (self.path is None) == (not self.tpfa):
            raise ConfigurationError("Эталонное решение задается либо файлом, либо tpfa")


@dataclass
class OutputConfig:
    """
    Параметры вывода

    Аргументы:
        directory (str): Директория результатов
        lines (list): Отрезки (x0, y0, x1, y1) для выборки значений
        qoi_points (list): Точки выхода трещин для QOI
        trace_width (float): Ширина следов трещин в файлах VTK
        vtk (bool): Сохранять ли файлы VTK
        n_samples (int): Количество точек на отрезке
        interpret (bool): Сохранять ли интерпретированную концентрацию
    """

    directory: str = str(DEFAULT_OUTPUT_DIR)
    lines: List[List[float]] = field(default_factory=list)
    qoi_points: List[List[float]] = field(default_factory=list)
    trace_width: float = TRACE_WIDTH
    vtk: bool = True
    n_samples: int = 101
    interpret: bool = True


SECTIONS: Dict[str, Type[Any]] = {
    "mesh": MeshConfig,
    "fractures": FractureConfig,
    "materials": MaterialConfig,
    "velocity": VelocityConfig,
    "transport": TransportSettings,
    "solver": SolverConfig,
    "reference": ReferenceConfig,
    "output": OutputConfig,
}


def _build(section: Type[Section], data: Any, key: str) -> Section:
    if not isinstance(data, dict):
        raise ConfigurationError(f"Раздел {key} должен быть словарем")
    unknown = set(data) - {f.name for f in fields(section)}  # type: ignore[arg-type]
    if unknown:
        raise ConfigurationError(f"Неизвестные ключи в разделе {key}: {sorted(unknown)}")
    try:
        return section(**data)
    except TypeError as error:
        raise ConfigurationError(f"Некорректный раздел {key}: {error}") from error


@dataclass
class CaseConfig:
    """
    Конфигурация расчета

    Описание:
        Дерево разделов, загружаемое из JSON. Отсутствующие ключи берутся из constants.
        Для расчета переноса без давления задается раздел velocity вместо boundary

    Пример использования:
        >>> from frats.cases import CaseConfig
        >>> config = CaseConfig.from_json("umr37.json")
        >>> len(config.config_hash)
        64

    Аргументы:
        name (str): Наименование расчета
        domain (list[float]): Границы области (x_min, x_max, y_min, y_max)
        mesh (MeshConfig): Параметры сетки
        fractures (FractureConfig): Сеть трещин
        materials (MaterialConfig): Свойства матрицы
        boundary (list[BoundaryConfig]): Граничные условия для давления
        velocity (VelocityConfig): Заданная скорость
        transport (TransportSettings): Параметры переноса
        solver (SolverConfig): Параметры решателей
        reference (ReferenceConfig): Эталонное решение
        output (OutputConfig): Параметры вывода

    Методы:
        from_dict: Построение из словаря
        from_json: Загрузка из файла JSON
        to_dict: Перевод в словарь
        save: Сохранение в файл JSON
        with_overrides: Копия с измененными параметрами вывода и решателей
        missing_files: Отсутствующие файлы, на которые ссылается конфигурация
    """

    name: str
    domain: List[float] = field(default_factory=lambda: [0.0, 1.0, 0.0, 1.0])
    mesh: MeshConfig = field(default_factory=MeshConfig)
    fractures: FractureConfig = field(default_factory=FractureConfig)
    materials: MaterialConfig = field(default_factory=MaterialConfig)
    boundary: List[BoundaryConfig] = field(default_factory=list)
    velocity: Optional[VelocityConfig] = None
    transport: Optional[TransportSettings] = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    reference: Optional[ReferenceConfig] = None
    output: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self):
        if len(self.domain) != 4:
            raise ConfigurationError("Область задается четырьмя числами")
        if self.velocity is None and not self.boundary:
            raise ConfigurationError("Не заданы граничные условия для давления")
        if self.velocity is not None and self.transport is None:
            raise ConfigurationError("Для заданной скорости нужен раздел transport")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CaseConfig":
        """
        Построение конфигурации из словаря

        Исключения:
            ConfigurationError: Если есть неизвестные ключи или значения некорректны
        """
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigurationError(f"Неизвестные ключи конфигурации: {sorted(unknown)}")
        if "name" not in data:
            raise ConfigurationError("Не задано наименование расчета")
        kwargs = dict(data)
        for key, section in SECTIONS.items():
            if data.get(key) is not None:
                kwargs[key] = _build(section, data[key], key)
        boundary = data.get("boundary") or []
        kwargs["boundary"] = [_build(BoundaryConfig, item, "boundary") for item in boundary]
        kwargs["domain"] = [float(value) for value in data.get("domain", [0.0, 1.0, 0.0, 1.0])]
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "CaseConfig":
        """
        Загрузка конфигурации из файла JSON

        Исключения:
            ConfigurationError: Если файл не найден или не является корректным JSON
        """
        path = to_path(path).resolve()
        if not path.is_file():
            raise ConfigurationError(f"Файл конфигурации не найден: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as error:
            raise ConfigurationError(f"Некорректный JSON в {path}: {error}") from error
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True)

    def save(self, path: Union[str, Path]) -> Path:
        path = to_path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(), encoding="utf-8")
        return path

    @property
    def config_hash(self) -> str:
        """SHA-256 канонического представления JSON"""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @property
    def layout(self) -> List[BoundarySegment]:
        return [item.to_segment() for item in self.boundary]

    def with_overrides(
        self,
        output: Optional[Union[str, Path]] = None,
        pressure_tol: Optional[float] = None,
        flux_tol: Optional[float] = None,
        transport_tol: Optional[float] = None,
        **sections: Any,
    ) -> "CaseConfig":
        """
        Копия конфигурации с измененными параметрами

        Аргументы:
            output (str|Path): Директория результатов
            pressure_tol (float): Допуск решателя давления
            flux_tol (float): Допуск постобработки потока
            transport_tol (float): Допуск решателя переноса
            sections: Разделы, заменяемые целиком (например, transport или mesh)

        Вывод:
            CaseConfig: Новая конфигурация
        """
        solver_changes = {
            key: value
            for key, value in (
                ("pressure_tol", pressure_tol),
                ("flux_tol", flux_tol),
                ("transport_tol", transport_tol),
            )
            if value is not None
        }
        changes: Dict[str, Any] = dict(sections)
        if solver_changes:
            changes["solver"] = replace(self.solver, **solver_changes)
        if output is not None:
            changes["output"] = replace(self.output, directory=str(output))
        return replace(self, **changes)

    def missing_files(self) -> List[Path]:
        """Файлы, на которые ссылается конфигурация и которых нет на диске"""
        paths = [self.fractures.path]
        if self.reference is not None:
            paths.append(self.reference.path)
        return [Path(path) for path in paths if path is not None and not Path(path).is_file()]
