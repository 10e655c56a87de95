from typing import Optional

import numpy as np

from ..constants import DEFAULT_OUTPUT_DIR
from ..exceptions import ConfigurationError
from .case import Case
from .config import (
    CaseConfig,
    FractureConfig,
    MeshConfig,
    OutputConfig,
    TransportSettings,
    VelocityConfig,
)

NAME = "pure_transport"
META = {
    "description": "Перенос в заданном поле скорости с горизонтальной трещиной y = 0.5",
    "domain": "(0, 1) x (0, 1)",
    "units": "безразмерные",
}
FRACTURE_RATE = 10.0
APERTURE = 1.0
END_TIME = 1.5
DT = 1e-3


class PureTransportCase(Case):
    """
    Задача переноса без задачи давления

    Описание:
        Скорость в матрице равна (0, ±1) по обе стороны трещины, в трещине u_Γ = 10, w = 1,
        c_0 = 0, c_B = 1. В варианте inflow жидкость втекает из матрицы в трещину, и
        стационарный профиль в трещине равен 1 + 2wx/u_Γ. В варианте outflow жидкость
        уходит из трещины в матрицу, и профиль равен exp(-2x/u_Γ).

    Аргументы:
        kind (str): Вариант (inflow, outflow)
        n (int): Размер равномерной сетки n x n

    Методы:
        get_config: Получение конфигурации расчета
        exact_profile: Точный стационарный профиль концентрации в трещине
        check_data: Проверка наличия файлов (задача не требует файлов)
    """

    def __init__(self, kind: str = "inflow", n: int = 32):
        super().__init__(NAME, meta=META)
        if kind not in ("inflow", "outflow"):
            raise ConfigurationError(f"Неизвестный вариант задачи переноса: {kind}")
        self.kind = kind
        self.n = n

    def __repr__(self):
        return f"Задача('{self.name}', '{self.kind}', {self.n})"

    @property
    def velocity(self) -> VelocityConfig:
        return VelocityConfig(kind=self.kind, rate=FRACTURE_RATE)

    def exact_profile(self, x: np.ndarray) -> np.ndarray:
        return self.velocity.exact_profile(x, APERTURE)

    def get_config(
        self,
        dt: float = DT,
        end_time: float = END_TIME,
        stop_at_steady: bool = True,
        output_dir: Optional[str] = None,
    ) -> CaseConfig:
        """
        Получение конфигурации расчета

        Аргументы:
            dt (float): Шаг по времени
            end_time (float): Время окончания
            stop_at_steady (bool): Останавливать ли расчет при выходе на стационар
            output_dir (str): Директория результатов

        Вывод:
            CaseConfig: Конфигурация
        """
        name = f"{NAME}_{self.kind}_{self.n}"
        return CaseConfig(
            name=name,
            domain=[0.0, 1.0, 0.0, 1.0],
            mesh=MeshConfig(nx=self.n, ny=self.n),
            fractures=FractureConfig(segments=[[0.0, 0.5, 1.0, 0.5]], aperture=APERTURE),
            velocity=self.velocity,
            transport=TransportSettings(dt=dt, end_time=end_time, stop_at_steady=stop_at_steady),
            output=OutputConfig(
                directory=output_dir or str(DEFAULT_OUTPUT_DIR / name),
                lines=[[0.0, 0.5, 1.0, 0.5]],
            ),
        )

    def check_data(self) -> bool:
        return True
