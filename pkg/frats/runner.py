from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, TypeVar

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import pandas as pd

from .cases.config import CaseConfig
from .constants import MANIFEST_FILENAME
from .exceptions import ConfigurationError, InterpretationError
from .exporters import (
    flux_table,
    qoi_table,
    save_field,
    save_table,
    write_concentration,
    write_interpreted,
    write_pressure,
    write_traces,
)
from .flux import FaceFluxField, average_flux, conservation_defect, postprocess
from .fractures import (
    FractureNetwork,
    IntersectionData,
    intersect,
    load_network,
    refine_around_fractures,
    refine_to_fracture_resolution,
    resolve_close_fractures,
)
from .interpretation import interpret, partition_all
from .mesh import Domain, FaceSets, Mesh, build_uniform, classify_boundary, refine_globally
from .metrics import (
    ErrorReport,
    calc_errors,
    convergence_slope,
    fracture_velocity_profile,
    l2_difference,
    qoi_function,
    sample_line,
)
from .pressure import MaterialField, PressureField, assemble, solve
from .reference import build_reference_mesh, solve_reference, to_reference_solution
from .reference_data import ReferenceSolution, ingest_reference
from .transport import ConcentrationField, TransportResult, explicit_velocity_mode, run

logger = logging.getLogger(__name__)

Item = TypeVar("Item")
Output = TypeVar("Output")


@dataclass
class CaseSetup:
    """
    Подготовленная задача: сетка, сеть трещин, свойства и граничные условия

    Аргументы:
        config (CaseConfig): Конфигурация
        mesh (Mesh): Сетка
        network (FractureNetwork): Сеть трещин
        intersection (IntersectionData): Пересечение сети трещин с сеткой
        materials (MaterialField): Свойства материалов
        face_sets (FaceSets): Классификация граней (None при заданной скорости)
    """

    config: CaseConfig
    mesh: Mesh
    network: FractureNetwork
    intersection: IntersectionData
    materials: MaterialField
    face_sets: Optional[FaceSets] = None

    def print_stats(self):
        """Отображение статистик сетки и сети трещин на экран"""
        print(f"Задача: {self.config.name}")
        self.mesh.print_stats()
        self.network.print_stats()


def build_network(config: CaseConfig) -> FractureNetwork:
    """Сеть трещин по разделу fractures"""
    fractures = config.fractures
    if fractures.path is not None:
        return load_network(
            fractures.path,
            config.domain,
            aperture=fractures.aperture,
            permeability=fractures.permeability,
            porosity=fractures.porosity,
        )
    if not fractures.segments:
        return FractureNetwork.empty(Domain.from_bounds(config.domain))
    return FractureNetwork.from_segments(
        fractures.segments,
        config.domain,
        aperture=fractures.aperture,
        permeability=fractures.permeability,
        porosity=fractures.porosity,
    )


def build_mesh(config: CaseConfig, network: FractureNetwork) -> Mesh:
    """
    Сетка по разделу mesh

    Описание:
        Базовая сетка измельчается глобально, затем у трещин заданное число раз или до
        заданного размера, затем до разделения близких несвязанных трещин
    """
    settings = config.mesh
    mesh = build_uniform(settings.nx, settings.ny, config.domain)
    mesh = refine_globally(mesh, settings.global_rounds)
    mesh = refine_around_fractures(mesh, network, settings.fracture_rounds)
    if settings.fracture_resolution is not None:
        mesh = refine_to_fracture_resolution(
            mesh, network, settings.fracture_resolution, settings.max_level
        )
    if settings.resolve_close:
        mesh = resolve_close_fractures(mesh, network, settings.max_level)
    return mesh


def prepare(config: CaseConfig) -> CaseSetup:
    """
    Подготовка задачи без решения

    Исключения:
        ConfigurationError: Если отсутствуют файлы, на которые ссылается конфигурация
    """
    missing = config.missing_files()
    if missing:
        raise ConfigurationError(f"Файлы не найдены: {', '.join(map(str, missing))}")
    start = time.perf_counter()
    network = build_network(config)
    mesh = build_mesh(config, network)
    intersection = intersect(mesh, network)
    materials = MaterialField.uniform(
        mesh,
        permeability=config.materials.permeability,
        porosity=config.materials.porosity,
        source=config.materials.source,
        fracture_source=config.fractures.source,
    )
    face_sets = classify_boundary(mesh, config.layout) if config.velocity is None else None
    logger.info(
        "Задача %s подготовлена: %d элементов, %d ребер сети, %.2f с",
        config.name,
        mesh.n_elements,
        network.n_edges,
        time.perf_counter() - start,
    )
    return CaseSetup(config, mesh, network, intersection, materials, face_sets)


def load_reference(setup: CaseSetup) -> Optional[ReferenceSolution]:
    """Эталонное давление из файла или расчета на мелкой сетке"""
    reference = setup.config.reference
    if reference is None:
        return None
    if reference.path is not None:
        return ingest_reference(reference.path)
    settings = setup.config.mesh
    fine = build_reference_mesh(
        build_uniform(settings.nx, settings.ny, setup.config.domain),
        setup.network,
        cells_across=reference.cells_across,
        max_level=reference.max_level,
        cell_cap=reference.cell_cap,
        permeability=setup.config.materials.permeability,
        porosity=setup.config.materials.porosity,
    )
    result = solve_reference(
        fine, setup.config.layout, setup.config.solver.method, setup.config.solver.pressure_tol
    )
    return to_reference_solution(fine, result.pressure)


@dataclass
class CaseResult:
    """
    Результаты расчета

    Аргументы:
        setup (CaseSetup): Подготовленная задача
        directory (Path): Директория результатов
        manifest (dict): Сводка расчета
        pressure (PressureField): Давление (None при заданной скорости)
        flux (FaceFluxField): Поток, использованный в расчете переноса
        transport (TransportResult): Результат расчета переноса
        errors (ErrorReport): Ошибки давления относительно эталона
        files (list[Path]): Сохраненные файлы
    """

    setup: CaseSetup
    directory: Path
    manifest: Dict[str, Any]
    pressure: Optional[PressureField] = None
    flux: Optional[FaceFluxField] = None
    transport: Optional[TransportResult] = None
    errors: Optional[ErrorReport] = None
    files: List[Path] = field(default_factory=list)


def _finite(value: Any) -> Any:
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(item) for item in value]
    if isinstance(value, (np.integer, np.bool_)):
        return value.item()
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


def _profile_error(config: CaseConfig, concentration: ConcentrationField) -> float:
    """Максимальное отклонение профиля в трещине от точного стационарного"""
    assert config.velocity is not None
    fractured = concentration.fractured
    x = concentration.mesh.centers[fractured, 0]
    exact = config.velocity.exact_profile(x, config.fractures.aperture)
    return float(np.abs(concentration.values[fractured] - exact).max(initial=0.0))


def run_case(config: CaseConfig) -> CaseResult:
    """
    Расчет задачи с сохранением результатов

    Описание:
        Давление решается встроенным методом конечных элементов, поток усредняется и
        проходит постобработку, затем рассчитывается перенос. При заданной скорости
        задача давления пропускается. В директорию результатов сохраняются поля в виде
        таблиц и файлов VTK, расходы через грани, выборки вдоль отрезков, ряды QOI и
        манифест с хэшем конфигурации, статистиками системы и временем этапов

    Пример использования:
        >>> from frats.cases import RegularCase
        >>> from frats.runner import run_case
        >>> result = run_case(RegularCase("UMR37").get_config(transport=False))
        >>> result.manifest["system"]["n_dofs"]
        1444

    Аргументы:
        config (CaseConfig): Конфигурация

    Вывод:
        CaseResult: Результаты расчета
    """
    timings: Dict[str, float] = {}
    start = time.perf_counter()
    setup = prepare(config)
    timings["prepare"] = time.perf_counter() - start
    directory = Path(config.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = [config.save(directory / "config.json")]
    manifest: Dict[str, Any] = {
        "name": config.name,
        "config_hash": config.config_hash,
        "mesh": setup.mesh.get_stats(),
        "network": setup.network.get_stats(),
    }
    result = CaseResult(setup=setup, directory=directory, manifest=manifest, files=files)
    solver = config.solver

    if config.velocity is not None:
        result.flux = explicit_velocity_mode(
            setup.mesh, setup.intersection, config.velocity.to_velocity(), setup.materials
        )
    else:
        assert setup.face_sets is not None
        stage = time.perf_counter()
        system = assemble(setup.mesh, setup.intersection, setup.materials, setup.face_sets)
        timings["assemble"] = time.perf_counter() - stage
        stage = time.perf_counter()
        pressure = solve(system, solver.method, solver.pressure_tol, solver.max_iterations)
        timings["pressure"] = time.perf_counter() - stage
        manifest["system"] = system.get_stats(condition=True)
        manifest["system"]["residual"] = pressure.residual
        stage = time.perf_counter()
        averaged = average_flux(pressure, setup.face_sets)
        flux = postprocess(averaged, tol=solver.flux_tol, method=solver.method)
        timings["flux"] = time.perf_counter() - stage
        manifest["flux"] = flux.get_stats()
        manifest["flux"]["defect_before"] = conservation_defect(averaged)
        result.pressure = pressure
        result.flux = flux
        files += _save_pressure(result)
        stage = time.perf_counter()
        reference = load_reference(setup)
        if reference is not None:
            result.errors = calc_errors(pressure, reference)
            manifest["errors"] = result.errors.get_stats()
            timings["reference"] = time.perf_counter() - stage

    assert result.flux is not None
    files.append(save_table(flux_table(result.flux), directory / "flux.csv"))
    if config.transport is not None:
        stage = time.perf_counter()
        qoi = None
        if result.pressure is not None and config.output.qoi_points:
            qoi = qoi_function(result.pressure, config.output.qoi_points)
        result.transport = run(
            result.flux, config.transport.to_config(solver.transport_tol), qoi=qoi
        )
        timings["transport"] = time.perf_counter() - stage
        manifest["transport"] = result.transport.get_stats()
        manifest["transport"]["balance_error"] = result.transport.balance_error
        if config.velocity is not None:
            manifest["transport"]["profile_error"] = _profile_error(
                config, result.transport.final
            )
        files += _save_transport(result, with_qoi=qoi is not None)

    timings["total"] = time.perf_counter() - start
    manifest["timings"] = timings
    manifest["files"] = sorted(path.name for path in files)
    path = directory / MANIFEST_FILENAME
    path.write_text(
        json.dumps(_finite(manifest), ensure_ascii=False, indent=2, sort_keys=True),
        encoding="utf-8",
    )
    result.files = files + [path]
    logger.info("Манифест сохранен: %s", path)
    return result


def _save_pressure(result: CaseResult) -> List[Path]:
    pressure = result.pressure
    assert pressure is not None
    config = result.setup.config
    directory = result.directory
    files = [save_field(pressure, directory / "pressure.csv")]
    for k, line in enumerate(config.output.lines, start=1):
        table = sample_line(pressure, line[:2], line[2:], config.output.n_samples)
        files.append(save_table(table, directory / f"pressure_line_{k}.csv"))
    network = result.setup.network
    if network.n_edges:
        profiles = [
            fracture_velocity_profile(pressure, edge).assign(EDGE=edge)
            for edge in range(network.n_edges)
        ]
        files.append(
            save_table(pd.concat(profiles, ignore_index=True), directory / "fracture_rates.csv")
        )
    if config.output.vtk:
        files.append(write_pressure(pressure, directory / "pressure.vtk"))
        if network.n_edges:
            files.append(
                write_traces(network, directory / "traces.vtk", config.output.trace_width)
            )
    return files


def _save_transport(result: CaseResult, with_qoi: bool) -> List[Path]:
    transport = result.transport
    assert transport is not None
    setup = result.setup
    config = setup.config
    directory = result.directory
    files: List[Path] = []
    if with_qoi:
        files.append(save_table(qoi_table(transport), directory / "qoi.csv"))
    partitioning = None
    if config.output.interpret and config.output.vtk and setup.intersection.fractured.any():
        partitioning = partition_all(setup.mesh, setup.intersection)
    for k, concentration in enumerate(transport.fields):
        stem = f"concentration_{k:04d}"
        files.append(save_field(concentration, directory / f"{stem}.csv"))
        if config.output.vtk:
            files.append(write_concentration(concentration, directory / f"{stem}.vtk"))
        if partitioning is not None:
            try:
                interpreted = interpret(concentration, partitioning)
            except InterpretationError as error:
                logger.warning("Интерпретированная концентрация не сохранена: %s", error)
                partitioning = None
                continue
            files.append(write_interpreted(interpreted, directory / f"{stem}_interpreted.vtk"))
    for k, line in enumerate(config.output.lines, start=1):
        table = sample_line(transport.final, line[:2], line[2:], config.output.n_samples)
        files.append(save_table(table, directory / f"concentration_line_{k}.csv"))
    return files


def _map(
    function: Callable[[Item], Output], items: Iterable[Item], threads: int = 1
) -> List[Output]:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as executor:
        return list(executor.map(function, items))


def _summarize(config: CaseConfig) -> Dict[str, Any]:
    result = run_case(config)
    manifest = result.manifest
    summary: Dict[str, Any] = {
        "name": config.name,
        "n_elements": manifest["mesh"]["n_elements"],
        "n_dofs": manifest.get("system", {}).get("n_dofs", result.setup.mesh.n_elements),
    }
    summary.update(manifest.get("errors", {}))
    if "profile_error" in manifest.get("transport", {}):
        summary["profile_error"] = manifest["transport"]["profile_error"]
    return summary


def _final_field(config: CaseConfig) -> ConcentrationField:
    result = run_case(config)
    assert result.transport is not None
    return result.transport.final


@dataclass
class ConvergenceStudy:
    """
    Результат исследования сходимости

    Аргументы:
        table (pd.DataFrame): Таблица расчетов
        slopes (dict[str, float]): Наклоны ошибок в логарифмических координатах
    """

    table: pd.DataFrame
    slopes: Dict[str, float]

    def save(self, directory: Path) -> List[Path]:
        directory = Path(directory)
        table = save_table(self.table, directory / "convergence.csv")
        slopes = directory / "slopes.json"
        slopes.write_text(json.dumps(_finite(self.slopes), indent=2, sort_keys=True), "utf-8")
        return [table, slopes]

    def print_stats(self):
        print(self.table.to_string(index=False))
        for name, slope in self.slopes.items():
            print(f"Наклон {name}: {slope:.3f}")


def spatial_convergence(configs: Sequence[CaseConfig], threads: int = 1) -> ConvergenceStudy:
    """
    Сходимость по пространству на семействе сеток

    Описание:
        Для каждой ошибки из манифестов (err_matrix, err_fracture, profile_error)
        вычисляется наклон относительно числа степеней свободы

    Аргументы:
        configs (list[CaseConfig]): Конфигурации на последовательности сеток
        threads (int): Количество параллельных процессов

    Вывод:
        ConvergenceStudy: Таблица ошибок и наклоны
    """
    table = pd.DataFrame(_map(_summarize, configs, threads))
    slopes: Dict[str, float] = {}
    for column in ("err_matrix", "err_fracture", "profile_error"):
        if column not in table:
            continue
        valid = table[column].notna() & (table[column] > 0.0)
        if valid.sum() >= 2:
            slopes[column] = convergence_slope(table["n_dofs"][valid], table[column][valid])
    logger.info("Сходимость по пространству: %s", slopes)
    return ConvergenceStudy(table, slopes)


def temporal_convergence(
    config: CaseConfig, steps: Sequence[float], reference_dt: float, threads: int = 1
) -> ConvergenceStudy:
    """
    Сходимость по времени на одной сетке

    Описание:
        Концентрации в момент T для шагов steps сравниваются в норме L² с решением
        с шагом reference_dt, наклон вычисляется относительно 1/Δt

    Аргументы:
        config (CaseConfig): Конфигурация с разделом transport
        steps (list[float]): Шаги по времени
        reference_dt (float): Шаг эталонного расчета
        threads (int): Количество параллельных процессов

    Вывод:
        ConvergenceStudy: Таблица ошибок и наклон

    Исключения:
        ConfigurationError: Если в конфигурации нет раздела transport
    """
    if config.transport is None:
        raise ConfigurationError("Для сходимости по времени нужен раздел transport")
    base = Path(config.output.directory)
    all_steps = [reference_dt, *steps]
    configs = []
    for k, dt in enumerate(all_steps):
        transport = replace(config.transport, dt=dt, stop_at_steady=False)
        configs.append(config.with_overrides(output=base / f"dt_{k}", transport=transport))
    fields = _map(_final_field, configs, threads)
    reference = fields[0]
    errors = [l2_difference(final, reference) for final in fields[1:]]
    table = pd.DataFrame({"dt": list(steps), "inverse_dt": [1.0 / dt for dt in steps]})
    table["l2_difference"] = errors
    slopes: Dict[str, float] = {}
    valid = table["l2_difference"] > 0.0
    if valid.sum() >= 2:
        slopes["l2_difference"] = convergence_slope(
            table["inverse_dt"][valid], table["l2_difference"][valid]
        )
    logger.info("Сходимость по времени: %s", slopes)
    return ConvergenceStudy(table, slopes)
