from pathlib import Path

DEFAULT_OUTPUT_DIR = Path.cwd() / "frats_output"

# Геометрия и сетки
MAX_LEVEL = 20
SIDES = ("left", "right", "bottom", "top")
SIDE_DIRECTIONS = ((-1, 0), (1, 0), (0, -1), (0, 1))
SIDE_NORMALS = ((-1.0, 0.0), (1.0, 0.0), (0.0, -1.0), (0.0, 1.0))
SNAP_TOLERANCE = 1e-9
COINCIDENCE_TOLERANCE = 1e-9
COINCIDENCE_SHIFT = 1e-6
MAX_SHIFT_ATTEMPTS = 8

# Граничные условия
DIRICHLET = "dirichlet"
NEUMANN = "neumann"
BOUNDARY_KINDS = (DIRICHLET, NEUMANN)

# Классы граней
FACE_BOUNDARY = -1
FACE_MATRIX = 0
FACE_MIXED = 1
FACE_FRACTURE = 2
FACE_PARALLEL = 3

# Решатели
PRESSURE_TOLERANCE = 1e-10
FLUX_TOLERANCE = 1e-12
COMPATIBILITY_TOLERANCE = 1e-10
CONSERVATION_TOLERANCE = 1e-8
TRANSPORT_TOLERANCE = 1e-10
STEADY_STATE_TOLERANCE = 1e-10
MAX_CG_ITERATIONS = 20000
MAX_REFINEMENT_STEPS = 3
DENSE_CONDITION_LIMIT = 400
SOLVER_METHODS = ("direct", "cg")

# Свойства по умолчанию
DEFAULT_PERMEABILITY = 1.0
DEFAULT_POROSITY = 1.0
DEFAULT_APERTURE = 1e-4
DEFAULT_FRACTURE_PERMEABILITY = 1e4
DEFAULT_FRACTURE_POROSITY = 1.0

# Эталонное решение
REFERENCE_CELL_CAP = 2_000_000
REFERENCE_CELLS_ACROSS = 10
REFERENCE_MAX_LEVEL = 10

# Время
SECONDS_PER_DAY = 86400.0
DAYS_PER_YEAR = 365

# Форматы файлов
FRACTURE_COLUMNS = ["START_X", "START_Y", "END_X", "END_Y"]
FRACTURE_PROPERTY_COLUMNS = {
    "APERTURE": "aperture",
    "PERMEABILITY": "permeability",
    "POROSITY": "porosity",
}
REFERENCE_COLUMNS = ["X", "Y", "AREA", "VALUE"]
REFERENCE_FLAG_COLUMN = "ON_FRACTURE"
FIELD_COLUMNS = ["CELL_ID", "XC", "YC", "LEVEL", "IS_FRACTURED", "VALUE"]
LINE_COLUMNS = ["S", "X", "Y", "VALUE"]
TRACE_WIDTH = 0.01
MANIFEST_FILENAME = "manifest.json"

MESH_STATS_DESC = {
    "n_elements": "Элементы",
    "n_vertices": "Вершины",
    "n_hanging": "Висячие узлы",
    "n_faces": "Грани",
    "max_level": "Уровень",
    "h_min": "Мин. размер",
    "h_max": "Макс. размер",
}
NETWORK_STATS_DESC = {
    "n_nodes": "Узлы",
    "n_edges": "Ребра",
    "length": "Длина",
    "n_boundary_nodes": "Граничные узлы",
}
SYSTEM_STATS_DESC = {
    "n_dofs": "Степени свободы",
    "n_unknowns": "Неизвестные",
    "nnz": "Ненулевые",
    "density": "Заполненность",
}
ERROR_STATS_DESC = {
    "err_matrix": "Ошибка в матрице",
    "err_fracture": "Ошибка в трещинах",
    "delta_p": "Перепад давления",
}
TRANSPORT_STATS_DESC = {
    "n_steps": "Шаги",
    "end_time": "Время",
    "steady_time": "Стационар",
    "c_min": "Мин. конц.",
    "c_max": "Макс. конц.",
}
FLUX_STATS_DESC = {
    "n_faces": "Грани",
    "max_flux": "Макс. поток",
    "inflow": "Приток",
    "outflow": "Отток",
    "defect": "Дисбаланс",
}
PARTITION_STATS_DESC = {
    "n_fractured": "Трещ. элементы",
    "n_subelements": "Подэлементы",
    "n_subdomains": "Подобласти",
    "max_subelements": "Макс. n_K",
}
REFERENCE_STATS_DESC = {
    "n_cells": "Ячейки",
    "n_fracture_cells": "Ячейки трещин",
    "area": "Площадь",
    "value_min": "Мин. значение",
    "value_max": "Макс. значение",
}
