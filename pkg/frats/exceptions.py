from typing import Any, List, Optional, Sequence, Tuple


class ConfigurationError(ValueError):
    """Некорректная конфигурация расчета (граничные условия, параметры переноса, файлы)"""


class FractureDataError(ValueError):
    """Некорректные данные о трещинах"""


class MaterialError(ValueError):
    """Некорректные свойства материалов"""


class IngestionError(ValueError):
    """
    Ошибка чтения эталонного решения

    Аргументы:
        message (str): Сообщение об ошибке
        rows (list[int]): Номера строк файла с некорректными данными
    """

    def __init__(self, message: str, rows: Optional[Sequence[int]] = None):
        self.rows: List[int] = list(rows or [])
        if self.rows:
            message = f"{message}: строки {', '.join(map(str, self.rows[:20]))}"
        super().__init__(message)


class CompatibilityError(ValueError):
    """
    Несовместная задача Неймана при постобработке потока

    Аргументы:
        message (str): Сообщение об ошибке
        defect (float): Величина нарушения баланса
    """

    def __init__(self, message: str, defect: float):
        self.defect = defect
        super().__init__(f"{message} (дисбаланс {defect:.3e})")


class NumericalError(RuntimeError):
    """
    Линейный решатель не достиг требуемой точности

    Аргументы:
        message (str): Сообщение об ошибке
        residual (float): Достигнутая относительная невязка
    """

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (невязка {residual:.3e})")


class ResolutionError(RuntimeError):
    """
    Не удалось разделить близкие несвязанные трещины до максимального уровня

    Аргументы:
        message (str): Сообщение об ошибке
        pairs (list[tuple[int, int]]): Пары ребер, оставшиеся в общих окрестностях вершин
    """

    def __init__(self, message: str, pairs: Sequence[Tuple[int, int]]):
        self.pairs = sorted(set(pairs))
        super().__init__(f"{message}: {self.pairs[:10]}")


class InterpretationError(RuntimeError):
    """
    Часть подэлементов не получила значения при интерпретации

    Аргументы:
        message (str): Сообщение об ошибке
        subelements (list): Подэлементы без значения (элемент, номер подэлемента)
    """

    def __init__(self, message: str, subelements: Sequence[Any]):
        self.subelements = list(subelements)
        super().__init__(f"{message}: {self.subelements[:10]}")
