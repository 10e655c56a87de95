from typing import Any, Dict, Type

from .case import Case
from .config import (
    BoundaryConfig,
    CaseConfig,
    FractureConfig,
    MaterialConfig,
    MeshConfig,
    OutputConfig,
    ReferenceConfig,
    SolverConfig,
    TransportSettings,
    VelocityConfig,
)
from .pure_transport import PureTransportCase
from .realistic import RealisticCase
from .regular import RegularCase

CASES: Dict[str, Type[Case]] = {
    "regular": RegularCase,
    "realistic": RealisticCase,
    "pure-transport": PureTransportCase,
}


def get_case(name: str, *args: Any, **kwargs: Any) -> Case:
    """
    Получение задачи по наименованию

    Аргументы:
        name (str): Наименование (regular, realistic, pure-transport)

    Вывод:
        Case: Задача

    Исключения:
        ValueError: Если задача неизвестна
    """
    if name not in CASES:
        raise ValueError(f"Неизвестная задача: {name}. Доступны: {', '.join(CASES)}")
    return CASES[name](*args, **kwargs)


__all__ = [
    "BoundaryConfig",
    "Case",
    "CaseConfig",
    "FractureConfig",
    "MaterialConfig",
    "MeshConfig",
    "OutputConfig",
    "PureTransportCase",
    "RealisticCase",
    "ReferenceConfig",
    "RegularCase",
    "SolverConfig",
    "TransportSettings",
    "VelocityConfig",
    "get_case",
    "CASES",
]
