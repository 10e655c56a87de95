from typing import Dict, Optional, Tuple, Union

import logging
import time
from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse

from .constants import (
    COMPATIBILITY_TOLERANCE,
    CONSERVATION_TOLERANCE,
    FACE_FRACTURE,
    FLUX_STATS_DESC,
    FLUX_TOLERANCE,
)
from .exceptions import CompatibilityError
from .fractures import IntersectionData
from .mesh import FaceSets, Mesh
from .pressure import MaterialField, PressureField, solve_spd
from .utils import gauss_rule

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CorrectionField:
    """
    Веса усреднения и поправки потока

    Аргументы:
        theta (np.ndarray): Вес ϑ_F стороны minus при усреднении по грани
        omega (np.ndarray): Вес ω_F нормы поправки (обратная эффективная проницаемость)
        potential (np.ndarray): Кусочно-постоянный потенциал поправки y по элементам
    """

    theta: np.ndarray
    omega: np.ndarray
    potential: np.ndarray

    @property
    def transmissibility(self) -> np.ndarray:
        return 1.0 / self.omega


@dataclass(frozen=True)
class FaceFluxField:
    """
    Интегральные потоки через грани сетки

    Описание:
        Значение Q_F - расход через грань F в направлении ее нормали n_F. На гранях,
        пересеченных трещиной, расход включает поток вдоль трещины. На гранях Неймана
        расход равен заданному ∫u·n (плюс w·u·n в точке выхода трещины).

    Пример использования:
        >>> from frats.flux import average_flux, postprocess
        >>> flux = postprocess(average_flux(pressure, face_sets))
        >>> flux.get_stats()
        {'n_faces': 5404, 'max_flux': 0.52, 'inflow': 1.0001, 'outflow': 1.0001, 'defect': 1e-15}

    Аргументы:
        mesh (Mesh): Сетка
        values (np.ndarray): Расходы Q_F по граням
        face_sets (FaceSets): Классификация граней
        intersection (IntersectionData): Пересечение сети трещин с сеткой
        materials (MaterialField): Свойства материалов и источники
        correction (CorrectionField): Поправка, если поток прошел постобработку
            (потоки метода конечных объемов и заданные скорости ее не имеют)

    Методы:
        get_stats: Получение статистик потока
        print_stats: Отображение статистик потока с описанием на экран
    """

    mesh: Mesh
    values: np.ndarray
    face_sets: FaceSets
    intersection: IntersectionData
    materials: MaterialField
    correction: Optional[CorrectionField] = None

    @property
    def conservative(self) -> bool:
        """Локальный баланс выполнен с точностью CONSERVATION_TOLERANCE·max|Q_F|"""
        return conservation_defect(self) <= CONSERVATION_TOLERANCE * self.max_flux

    @property
    def neumann(self) -> np.ndarray:
        return self.face_sets.neumann

    @property
    def max_flux(self) -> float:
        return float(np.abs(self.values).max(initial=0.0))

    @property
    def inflow(self) -> float:
        boundary = self.values[self.mesh.boundary_faces]
        return float(-boundary[boundary < 0].sum())

    @property
    def outflow(self) -> float:
        boundary = self.values[self.mesh.boundary_faces]
        return float(boundary[boundary > 0].sum())

    def get_stats(self) -> Dict[str, Union[int, float]]:
        """
        Получение статистик потока

        Вывод:
            dict[str, int|float]: Справочник статистик
        """
        return {
            "n_faces": self.mesh.n_faces,
            "max_flux": self.max_flux,
            "inflow": self.inflow,
            "outflow": self.outflow,
            "defect": conservation_defect(self),
        }

    def print_stats(self):
        """Отображение статистик потока с описанием на экран"""
        print(f"{'Статистика':^20}|{'Значение':^12}")
        print("-" * 32)
        stats = self.get_stats()
        for stat, value in FLUX_STATS_DESC.items():
            print(f"{value:20}|{stats.get(stat):^12.6g}")


def calc_sources(intersection: IntersectionData, materials: MaterialField) -> np.ndarray:
    """
    Интегральные источники по элементам

    Аргументы:
        intersection (IntersectionData): Пересечение сети трещин с сеткой
        materials (MaterialField): Свойства материалов и источники

    Вывод:
        np.ndarray: ∫_K q для матричных элементов и ∫_{K∩Γ} q_Γ для трещиноватых
    """
    mesh = intersection.mesh
    edge_source = materials.edge_source(intersection.network.n_edges)
    fracture = np.bincount(
        intersection.segment_element,
        weights=edge_source[intersection.segment_edge] * intersection.segment_length,
        minlength=mesh.n_elements,
    )
    return np.where(intersection.fractured, fracture, materials.source * mesh.areas)


def normal_permeability(
    intersection: IntersectionData, materials: MaterialField
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Нормальные проницаемости δ = n_F·κn_F соседей граней

    Описание:
        Для трещиноватого элемента используется κ_Γ·I. На граничных гранях значение
        стороны plus совпадает со стороной minus.

    Вывод:
        tuple[np.ndarray, np.ndarray]: Значения δ⁻ и δ⁺ по граням
    """
    mesh = intersection.mesh
    fractured = intersection.fractured
    kappa_gamma = intersection.element_permeability()
    minus, plus = mesh.face_neighbors.T
    plus = np.where(plus >= 0, plus, minus)
    sides = []
    for elements in (minus, plus):
        delta = materials.normal_permeability(elements, mesh.face_normals)
        sides.append(np.where(fractured[elements], kappa_gamma[elements], delta))
    return sides[0], sides[1]


def calc_weights(intersection: IntersectionData, materials: MaterialField) -> CorrectionField:
    """
    Веса усреднения ϑ_F = δ⁺/(δ⁺ + δ⁻) и веса нормы ω_F = (δ⁺ + δ⁻)/(2δ⁺δ⁻)

    Вывод:
        CorrectionField: Веса с нулевым потенциалом (на границе ϑ_F = 1, ω_F = 1/δ⁻)
    """
    mesh = intersection.mesh
    delta_minus, delta_plus = normal_permeability(intersection, materials)
    theta = np.where(
        mesh.face_neighbors[:, 1] >= 0, delta_plus / (delta_plus + delta_minus), 1.0
    )
    omega = (delta_plus + delta_minus) / (2.0 * delta_plus * delta_minus)
    return CorrectionField(theta=theta, omega=omega, potential=np.zeros(mesh.n_elements))


def _fracture_rates(pressure: PressureField, intersection: IntersectionData) -> np.ndarray:
    """Расход -k_Γ∇_Γp·t_Γ,F в точках пересечения (среднее по соседям грани)"""
    mesh = intersection.mesh
    faces = intersection.crossing_face
    if not len(faces):
        return np.zeros(0)
    points = intersection.crossing_point
    tangents = intersection.crossing_tangent
    minus, plus = mesh.face_neighbors[faces].T
    gradient = pressure.gradient(points, minus)
    interior = plus >= 0
    gradient[interior] = 0.5 * (
        gradient[interior] + pressure.gradient(points[interior], plus[interior])
    )
    k_gamma = intersection.network.effective_permeability[intersection.crossing_edge]
    return -k_gamma * np.einsum("ci,ci->c", gradient, tangents)


def average_flux(
    pressure: PressureField,
    face_sets: FaceSets,
    intersection: Optional[IntersectionData] = None,
    materials: Optional[MaterialField] = None,
) -> FaceFluxField:
    """
    Усредненный поток по граням

    Описание:
        На гранях вне трещин и вне границы Неймана Q_F = -∫_F⟨κ∇p_h·n_F⟩_ϑ (двухточечная
        квадратура Гаусса, градиент берется в каждом из соседей). На гранях между двумя
        трещиноватыми элементами, пересеченных трещиной, учитывается только расход вдоль
        трещин в точках пересечения с равными весами. На гранях Дирихле используется одностороннее
        значение, к которому добавляется расход трещины, если она выходит на грань.
        На гранях Неймана поток равен граничным данным.

    Аргументы:
        pressure (PressureField): Поле давления
        face_sets (FaceSets): Классификация граней
        intersection (IntersectionData): Пересечение сети трещин с сеткой (по умолчанию
            из поля давления)
        materials (MaterialField): Свойства материалов (по умолчанию из поля давления)

    Вывод:
        FaceFluxField: Усредненный (в общем случае не консервативный) поток
    """
    intersection = intersection or pressure.intersection
    materials = materials or pressure.materials
    if intersection is None:
        raise ValueError("Для вычисления потока нужны данные о пересечении с трещинами")
    mesh = pressure.mesh
    start = time.perf_counter()
    weights = calc_weights(intersection, materials)
    kind = intersection.face_kind
    along_fractures = kind == FACE_FRACTURE
    neumann = face_sets.neumann
    values = np.zeros(mesh.n_faces)
    points, gauss_weights = gauss_rule(2)

    faces = np.flatnonzero(~neumann & ~along_fractures)
    minus, plus = mesh.face_neighbors[faces].T
    interior = plus >= 0
    ends = mesh.vertices[mesh.face_vertices[faces]]
    normals = mesh.face_normals[faces]
    theta = weights.theta[faces]
    for tau, weight in zip(points, gauss_weights):
        x = ends[:, 0] + tau * (ends[:, 1] - ends[:, 0])
        flux_minus = np.einsum("fi,fi->f", pressure.velocity(x, minus), normals)
        flux_plus = np.zeros(len(faces))
        flux_plus[interior] = np.einsum(
            "fi,fi->f", pressure.velocity(x[interior], plus[interior]), normals[interior]
        )
        values[faces] += (
            weight * mesh.face_lengths[faces] * (theta * flux_minus + (1 - theta) * flux_plus)
        )

    faces = np.flatnonzero(neumann)
    ends = mesh.vertices[mesh.face_vertices[faces]]
    for tau, weight in zip(points, gauss_weights):
        x = ends[:, 0] + tau * (ends[:, 1] - ends[:, 0])
        values[faces] += weight * mesh.face_lengths[faces] * face_sets.boundary_values(faces, x)

    crossing = intersection.crossing_face
    rates = _fracture_rates(pressure, intersection)
    carried = (kind[crossing] == FACE_FRACTURE) | face_sets.dirichlet[crossing]
    np.add.at(values, crossing[carried], rates[carried])
    on_neumann = neumann[crossing]
    if on_neumann.any():
        aperture = intersection.network.aperture[intersection.crossing_edge[on_neumann]]
        data = face_sets.boundary_values(
            crossing[on_neumann], intersection.crossing_point[on_neumann]
        )
        np.add.at(values, crossing[on_neumann], aperture * data)

    flux = FaceFluxField(
        mesh=mesh,
        values=values,
        face_sets=face_sets,
        intersection=intersection,
        materials=materials,
    )
    logger.info(
        "Усредненный поток: %d граней, макс. |Q| %.3e, %.2f с",
        mesh.n_faces,
        flux.max_flux,
        time.perf_counter() - start,
    )
    return flux


def residual(
    flux: FaceFluxField,
    materials: Optional[MaterialField] = None,
    intersection: Optional[IntersectionData] = None,
) -> np.ndarray:
    """
    Невязка локального баланса R(U)|_K = (source_K - Σ Q_F n_K·n_F)/|K|

    Аргументы:
        flux (FaceFluxField): Поток по граням
        materials (MaterialField): Источники (по умолчанию из потока)
        intersection (IntersectionData): Пересечение с трещинами (по умолчанию из потока)

    Вывод:
        np.ndarray: Невязка по элементам
    """
    materials = materials or flux.materials
    intersection = intersection or flux.intersection
    sources = calc_sources(intersection, materials)
    return (sources - flux.mesh.divergence @ flux.values) / flux.mesh.areas


def conservation_defect(flux: FaceFluxField) -> float:
    """Максимальный по элементам дисбаланс |R|·|K|"""
    defect = np.abs(residual(flux)) * flux.mesh.areas
    return float(defect.max(initial=0.0))


def postprocess(
    flux: FaceFluxField,
    materials: Optional[MaterialField] = None,
    tol: float = FLUX_TOLERANCE,
    method: str = "direct",
) -> FaceFluxField:
    """
    Постобработка потока до локально консервативного

    Описание:
        Ищется кусочно-постоянный потенциал y, для которого
        (ω⁻¹[y], [v]) по граням вне границы Неймана равно (R(U), v) для всех
        кусочно-постоянных v. Скачок [y] = y⁻ - y⁺, на граничных гранях [y] = y⁻.
        К потоку добавляется ω⁻¹[y]·|F|, поток на гранях Неймана не меняется.

    Аргументы:
        flux (FaceFluxField): Исходный поток
        materials (MaterialField): Свойства материалов (по умолчанию из потока)
        tol (float): Допустимая относительная невязка системы для потенциала
        method (str): Метод решения (direct, cg)

    Вывод:
        FaceFluxField: Консервативный поток с сохраненной поправкой

    Исключения:
        CompatibilityError: Если на всей границе задано условие Неймана, а источники
            не уравновешивают граничный поток
        NumericalError: Если система для потенциала решена с недостаточной точностью
    """
    materials = materials or flux.materials
    mesh = flux.mesh
    start = time.perf_counter()
    weights = calc_weights(flux.intersection, materials)
    active = np.flatnonzero(~flux.face_sets.neumann)
    transmissibility = mesh.face_lengths[active] / weights.omega[active]
    divergence = mesh.divergence[:, active]
    matrix = (divergence @ sparse.diags(transmissibility) @ divergence.T).tocsr()
    rhs = residual(flux, materials) * mesh.areas
    potential = np.zeros(mesh.n_elements)
    if not np.any(mesh.face_neighbors[active, 1] < 0):
        defect = abs(float(rhs.sum()))
        scale = max(float(np.abs(rhs).sum()), flux.max_flux)
        if defect > COMPATIBILITY_TOLERANCE * scale:
            raise CompatibilityError("Несовместные данные задачи Неймана", defect)
        # потенциал определен с точностью до константы: y_0 = 0
        keep = np.arange(1, mesh.n_elements)
        potential[keep], _ = solve_spd(
            matrix[keep][:, keep], (rhs - rhs.mean())[keep], method, tol
        )
    else:
        potential, _ = solve_spd(matrix, rhs, method, tol)
    values = flux.values.copy()
    correction = transmissibility * (divergence.T @ potential)
    values[active] += correction
    result = replace(
        flux,
        values=values,
        materials=materials,
        correction=replace(weights, potential=potential),
    )
    logger.info(
        "Постобработка потока: поправка %.3e, дисбаланс %.3e -> %.3e, %.2f с",
        float(np.abs(correction).max(initial=0.0)),
        float(np.abs(rhs).max(initial=0.0)),
        conservation_defect(result),
        time.perf_counter() - start,
    )
    return result


def classify_flow(face_sets: FaceSets, flux: FaceFluxField) -> FaceSets:
    """
    Разбиение граничных граней на грани притока (Q_F < 0) и оттока (Q_F >= 0)

    Аргументы:
        face_sets (FaceSets): Классификация граней
        flux (FaceFluxField): Поток по граням

    Вывод:
        FaceSets: Классификация с заполненными масками inflow и outflow
    """
    boundary = face_sets.boundary
    return replace(
        face_sets,
        inflow=boundary & (flux.values < 0),
        outflow=boundary & (flux.values >= 0),
    )
