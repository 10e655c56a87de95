from typing import Any, Dict, Optional

from abc import ABCMeta, abstractmethod

from .config import CaseConfig


class Case(metaclass=ABCMeta):
    """
    Абстрактный класс тестовой задачи

    Аргументы:
        name (str): Наименование задачи
        meta (dict): Справочная информация о задаче

    Методы:
        get_config: Получение конфигурации расчета
        check_data: Проверка наличия файлов, необходимых для расчета
    """

    __test__ = False

    @abstractmethod
    def __init__(self, name: str, meta: Optional[Dict[str, Any]] = None):
        self.name = name
        self.meta = meta or {}

    def __repr__(self):
        return f"Задача('{self.name}')"

    @property
    def info(self) -> Dict[str, Any]:
        info: Dict[str, Any] = {"Наименование": self.name}
        info.update(self.meta)
        return info

    @abstractmethod
    def get_config(self, *args: Any, **kwargs: Any) -> CaseConfig:
        raise NotImplementedError

    @abstractmethod
    def check_data(self) -> bool:
        raise NotImplementedError
