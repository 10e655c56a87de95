from typing import Optional, Union

import os
from pathlib import Path

from ..constants import DAYS_PER_YEAR, DEFAULT_OUTPUT_DIR, SECONDS_PER_DAY
from ..utils import to_path
from .case import Case
from .config import (
    BoundaryConfig,
    CaseConfig,
    FractureConfig,
    MaterialConfig,
    MeshConfig,
    OutputConfig,
    TransportSettings,
)

NAME = "realistic"
META = {
    "description": "Сеть из 64 трещин по интерпретации обнажения",
    "domain": "(0, 700) x (0, 600) м",
    "units": "СИ",
}
DATA_ENV = "FRATS_REALISTIC_CSV"
DOMAIN = [0.0, 700.0, 0.0, 600.0]
BASE_SIZE = (7, 6)
MATRIX_PERMEABILITY = 1e-14
FRACTURE_PERMEABILITY = 1e-8
APERTURE = 1e-2
LEFT_PRESSURE = 1013250.0
LINES = [[0.0, 500.0, 700.0, 500.0], [625.0, 0.0, 625.0, 600.0]]
END_YEARS = 100
RESOLVE_MAX_LEVEL = 12


class RealisticCase(Case):
    """
    Задача с реалистичной сетью трещин

    Описание:
        κ = 1e-14 I м², κ_Γ = 1e-8 м², w = 1e-2 м, давление 1013250 Па слева и 0 Па справа,
        верх и низ непроницаемы. Сетка M_i^j получается из базовой сетки 7 x 6 (h = 100)
        i глобальными измельчениями и j измельчениями у трещин, M_i^{j,r} - дополнительным
        разделением близких несвязанных трещин. Таблица трещин не входит в пакет: путь
        передается явно или через переменную окружения FRATS_REALISTIC_CSV.

    Пример использования:
        >>> from frats.cases import RealisticCase
        >>> case = RealisticCase(2, 2, resolve=True, path="fractures.csv")
        >>> case.label
        'M_2^{2,r}'

    Аргументы:
        global_rounds (int): Количество глобальных измельчений i
        fracture_rounds (int): Количество измельчений у трещин j
        resolve (bool): Разделять ли близкие трещины
        path (str): Путь к таблице трещин

    Методы:
        get_config: Получение конфигурации расчета
        check_data: Проверка наличия таблицы трещин
    """

    def __init__(
        self,
        global_rounds: int = 2,
        fracture_rounds: int = 2,
        resolve: bool = False,
        path: Optional[Union[str, Path]] = None,
    ):
        super().__init__(NAME, meta=META)
        self.global_rounds = global_rounds
        self.fracture_rounds = fracture_rounds
        self.resolve = resolve
        path = path or os.environ.get(DATA_ENV)
        self.path = to_path(path).resolve() if path else None

    def __repr__(self):
        return f"Задача('{self.name}', '{self.label}')"

    @property
    def label(self) -> str:
        suffix = ",r" if self.resolve else ""
        return f"M_{self.global_rounds}^{{{self.fracture_rounds}{suffix}}}"

    @property
    def slug(self) -> str:
        suffix = "r" if self.resolve else ""
        return f"m{self.global_rounds}_{self.fracture_rounds}{suffix}"

    def get_config(
        self,
        transport: bool = True,
        dt_days: float = DAYS_PER_YEAR,
        years: float = END_YEARS,
        output_dir: Optional[str] = None,
    ) -> CaseConfig:
        """
        Получение конфигурации расчета

        Аргументы:
            transport (bool): Рассчитывать ли перенос
            dt_days (float): Шаг по времени в сутках
            years (float): Время окончания в годах (год - 365 суток)
            output_dir (str): Директория результатов

        Вывод:
            CaseConfig: Конфигурация (время в секундах)
        """
        self.check_data()
        settings = None
        if transport:
            settings = TransportSettings(
                dt=dt_days * SECONDS_PER_DAY,
                end_time=years * DAYS_PER_YEAR * SECONDS_PER_DAY,
            )
        return CaseConfig(
            name=f"{NAME}_{self.slug}",
            domain=list(DOMAIN),
            mesh=MeshConfig(
                nx=BASE_SIZE[0],
                ny=BASE_SIZE[1],
                global_rounds=self.global_rounds,
                fracture_rounds=self.fracture_rounds,
                resolve_close=self.resolve,
                max_level=max(RESOLVE_MAX_LEVEL, self.global_rounds + self.fracture_rounds),
            ),
            fractures=FractureConfig(
                path=str(self.path),
                aperture=APERTURE,
                permeability=FRACTURE_PERMEABILITY,
            ),
            materials=MaterialConfig(permeability=MATRIX_PERMEABILITY),
            boundary=[
                BoundaryConfig("left", "dirichlet", LEFT_PRESSURE),
                BoundaryConfig("right", "dirichlet", 0.0),
                BoundaryConfig("bottom", "neumann", 0.0),
                BoundaryConfig("top", "neumann", 0.0),
            ],
            transport=settings,
            output=OutputConfig(
                directory=output_dir or str(DEFAULT_OUTPUT_DIR / f"{NAME}_{self.slug}"),
                lines=[list(line) for line in LINES],
            ),
        )

    def check_data(self) -> bool:
        """
        Проверка наличия таблицы трещин

        Вывод:
            bool: Результат проверки

        Исключения:
            OSError: Если таблица трещин не обнаружена
        """
        if self.path is None or not self.path.is_file():
            msg = (
                f"Таблица трещин задачи {NAME} не обнаружена\n"
                "Передайте путь к ней или задайте переменную окружения:\n"
                f"$ export {DATA_ENV}=/path/to/fractures.csv"
            )
            raise OSError(msg)
        return True
