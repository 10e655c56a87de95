from typing import Optional, Tuple, Union

from pathlib import Path

import numpy as np


def to_path(path: Union[str, Path]) -> Path:
    """
    Перевод строкового представления пути в объект Path

    Аргументы:
        path (str): Cтроковое представление пути

    Вывод:
        Path: Объект Path

    Исключения:
        TypeError: Если передаваемое значение не является строкой или объектом Path
    """
    if isinstance(path, str):
        return Path(path)
    elif isinstance(path, Path):
        return path
    else:
        raise TypeError("Некорректно указан путь")


def safe_divide(
    num: Union[float, int], den: Union[float, int], default: Union[float, int] = 0
) -> float:
    """
    Безопасное деление двух чисел

    Аргументы:
        num (float|int): Число в числителе
        den (float|int): Число в знаменателе
        default (float|int): Значение по умолчанию при возникновении ошибки

    Вывод:
        float: Результат безопасного деления
    """
    if not den:
        return default
    else:
        return num / den


def gauss_rule(n_points: int = 2) -> Tuple[np.ndarray, np.ndarray]:
    """
    Квадратура Гаусса-Лежандра на отрезке [0, 1]

    Аргументы:
        n_points (int): Количество узлов

    Вывод:
        tuple[np.ndarray, np.ndarray]: Узлы и веса (сумма весов равна 1)
    """
    nodes, weights = np.polynomial.legendre.leggauss(n_points)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def clip_segment(
    start: np.ndarray, end: np.ndarray, boxes: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Отсечение отрезка набором прямоугольников (алгоритм Лианга-Барски)

    Аргументы:
        start (np.ndarray): Начало отрезка
        end (np.ndarray): Конец отрезка
        boxes (np.ndarray): Прямоугольники в виде строк (x_min, x_max, y_min, y_max)

    Вывод:
        tuple[np.ndarray, np.ndarray, np.ndarray]: Параметры входа и выхода вдоль отрезка,
            маска прямоугольников с отсечением положительной длины
    """
    boxes = np.atleast_2d(boxes)
    d = end - start
    t_in = np.zeros(len(boxes))
    t_out = np.ones(len(boxes))
    valid = np.ones(len(boxes), dtype=bool)
    p_values = (-d[0], d[0], -d[1], d[1])
    q_values = (
        start[0] - boxes[:, 0],
        boxes[:, 1] - start[0],
        start[1] - boxes[:, 2],
        boxes[:, 3] - start[1],
    )
    for p, q in zip(p_values, q_values):
        if p == 0.0:
            valid &= q >= 0.0
            continue
        r = q / p
        if p < 0.0:
            t_in = np.maximum(t_in, r)
        else:
            t_out = np.minimum(t_out, r)
    valid &= t_out > t_in
    return t_in, t_out, valid


def intersect_segments(
    a_start: np.ndarray,
    a_end: np.ndarray,
    b_start: np.ndarray,
    b_end: np.ndarray,
    tol: float = 0.0,
) -> Optional[Tuple[float, float]]:
    """
    Пересечение двух отрезков

    Аргументы:
        a_start (np.ndarray): Начало первого отрезка
        a_end (np.ndarray): Конец первого отрезка
        b_start (np.ndarray): Начало второго отрезка
        b_end (np.ndarray): Конец второго отрезка
        tol (float): Допуск по длине

    Вывод:
        tuple[float, float]|None: Параметры точки пересечения вдоль обоих отрезков
            или None, если отрезки не пересекаются или параллельны
    """
    da = a_end - a_start
    db = b_end - b_start
    denom = da[0] * db[1] - da[1] * db[0]
    len_a = np.hypot(*da)
    len_b = np.hypot(*db)
    if abs(denom) <= 1e-14 * len_a * len_b:
        return None
    diff = b_start - a_start
    s = (diff[0] * db[1] - diff[1] * db[0]) / denom
    t = (diff[0] * da[1] - diff[1] * da[0]) / denom
    eps_a = tol / len_a
    eps_b = tol / len_b
    if -eps_a <= s <= 1.0 + eps_a and -eps_b <= t <= 1.0 + eps_b:
        return float(np.clip(s, 0.0, 1.0)), float(np.clip(t, 0.0, 1.0))
    return None


def point_segment_distance(points: np.ndarray, start: np.ndarray, end: np.ndarray) -> np.ndarray:
    """
    Расстояние от точек до отрезка

    Аргументы:
        points (np.ndarray): Точки в виде массива (n, 2)
        start (np.ndarray): Начало отрезка
        end (np.ndarray): Конец отрезка

    Вывод:
        np.ndarray: Расстояния
    """
    points = np.atleast_2d(points)
    d = end - start
    t = np.clip(((points - start) @ d) / float(d @ d), 0.0, 1.0)
    nearest = start + t[:, None] * d
    return np.hypot(*(points - nearest).T)


def polygon_area(polygon: np.ndarray) -> float:
    """Площадь многоугольника по формуле шнурования (положительна при обходе против часовой)"""
    x, y = polygon[:, 0], polygon[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def point_in_polygon(point: np.ndarray, polygon: np.ndarray) -> bool:
    """Принадлежность точки внутренности многоугольника (метод лучей)"""
    x, y = point
    inside = False
    n = len(polygon)
    for k in range(n):
        x1, y1 = polygon[k]
        x2, y2 = polygon[(k + 1) % n]
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_cross:
                inside = not inside
    return inside
