from typing import Optional, Tuple

import re

from ..constants import DEFAULT_OUTPUT_DIR
from ..exceptions import ConfigurationError
from .case import Case
from .config import (
    BoundaryConfig,
    CaseConfig,
    FractureConfig,
    MeshConfig,
    OutputConfig,
    TransportSettings,
)

NAME = "regular"
META = {
    "description": "Регулярная сеть из шести трещин в единичном квадрате",
    "domain": "(0, 1) x (0, 1)",
    "units": "безразмерные",
}
SEGMENTS = [
    [0.0, 0.5, 1.0, 0.5],
    [0.5, 0.0, 0.5, 1.0],
    [0.5, 0.75, 1.0, 0.75],
    [0.75, 0.5, 0.75, 1.0],
    [0.5, 0.625, 0.75, 0.625],
    [0.625, 0.5, 0.625, 0.75],
]
LINES = [[0.0, 0.7, 1.0, 0.7], [0.5, 0.0, 0.5, 1.0]]
QOI_POINTS = [[1.0, 0.5], [1.0, 0.75]]
END_TIME = 0.5
TIME_STEPS = {
    "UMR19": 1e-3,
    "UMR37": 5e-4,
    "UMR73": 2.5e-4,
    "UMR139": 1.25e-4,
    "LR1": 5e-4,
    "LR2": 2.5e-4,
    "LR3": 1.25e-4,
}
MESH_PATTERN = re.compile(r"^(UMR|LR)(\d+)$")


def parse_mesh(label: str) -> Tuple[str, int]:
    """
    Разбор обозначения сетки

    Аргументы:
        label (str): UMR N (равномерная сетка N x N) или LR i (измельчение у трещин)

    Вывод:
        tuple[str, int]: Семейство и параметр

    Исключения:
        ConfigurationError: Если обозначение некорректно
    """
    match = MESH_PATTERN.match(label.upper())
    if not match or int(match.group(2)) < 1:
        raise ConfigurationError(f"Некорректное обозначение сетки: {label}")
    return match.group(1), int(match.group(2))


class RegularCase(Case):
    """
    Задача с регулярной сетью трещин

    Описание:
        Шесть пересекающихся трещин с κ_Γ = 1e4 и w = 1e-4 в однородной матрице с κ = I.
        На левой стороне задан приток u·n = -1, на правой - давление 1, верх и низ
        непроницаемы. Для переноса c_0 = 0, c_B = 1, T = 0.5.

        Сетки UMR N - равномерные N x N. Сетки LR i строятся из равномерной сетки
        (2^(i+2) + 1) x (2^(i+2) + 1) с шагом h измельчением у трещин до размера h²
        (нечетное число элементов исключает трещины вдоль граней).

    Пример использования:
        >>> from frats.cases import RegularCase
        >>> case = RegularCase("UMR37")
        >>> case.get_config().mesh.nx
        37

    Аргументы:
        mesh (str): Обозначение сетки

    Методы:
        mesh_config: Параметры сетки
        get_config: Получение конфигурации расчета
        check_data: Проверка наличия файлов (задача не требует файлов)
    """

    def __init__(self, mesh: str = "UMR37"):
        super().__init__(NAME, meta=META)
        self.family, self.level = parse_mesh(mesh)
        self.label = f"{self.family}{self.level}"

    def __repr__(self):
        return f"Задача('{self.name}', '{self.label}')"

    @property
    def default_dt(self) -> float:
        if self.label in TIME_STEPS:
            return TIME_STEPS[self.label]
        if self.family == "UMR":
            return 1e-3 * 19 / self.level
        return 5e-4 * 2.0 ** (1 - self.level)

    def mesh_config(self) -> MeshConfig:
        if self.family == "UMR":
            return MeshConfig(nx=self.level, ny=self.level)
        base = 2 ** (self.level + 2) + 1
        return MeshConfig(nx=base, ny=base, fracture_resolution=1.0 / base**2)

    def get_config(
        self,
        transport: bool = True,
        dt: Optional[float] = None,
        end_time: float = END_TIME,
        output_dir: Optional[str] = None,
    ) -> CaseConfig:
        """
        Получение конфигурации расчета

        Аргументы:
            transport (bool): Рассчитывать ли перенос
            dt (float): Шаг по времени (по умолчанию зависит от сетки)
            end_time (float): Время окончания
            output_dir (str): Директория результатов

        Вывод:
            CaseConfig: Конфигурация
        """
        directory = output_dir or str(DEFAULT_OUTPUT_DIR / f"{NAME}_{self.label.lower()}")
        settings = (
            TransportSettings(dt=dt or self.default_dt, end_time=end_time) if transport else None
        )
        return CaseConfig(
            name=f"{NAME}_{self.label.lower()}",
            domain=[0.0, 1.0, 0.0, 1.0],
            mesh=self.mesh_config(),
            fractures=FractureConfig(segments=[list(s) for s in SEGMENTS]),
            boundary=[
                BoundaryConfig("left", "neumann", -1.0),
                BoundaryConfig("right", "dirichlet", 1.0),
                BoundaryConfig("bottom", "neumann", 0.0),
                BoundaryConfig("top", "neumann", 0.0),
            ],
            transport=settings,
            output=OutputConfig(
                directory=directory,
                lines=[list(line) for line in LINES],
                qoi_points=[list(point) for point in QOI_POINTS],
            ),
        )

    def check_data(self) -> bool:
        return True
