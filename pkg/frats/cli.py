from typing import Any, Dict, Optional, Sequence

import argparse
import logging
import sys
from pathlib import Path

from .cases import CASES, CaseConfig, get_case
from .cases.regular import parse_mesh
from .constants import DEFAULT_OUTPUT_DIR
from .exceptions import (
    ConfigurationError,
    FractureDataError,
    IngestionError,
    MaterialError,
    NumericalError,
    ResolutionError,
)
from .reference_data import ingest_reference
from .runner import prepare, run_case, spatial_convergence, temporal_convergence

logger = logging.getLogger("frats")

EXPECTED_ERRORS = (
    ConfigurationError,
    FractureDataError,
    IngestionError,
    MaterialError,
    NumericalError,
    ResolutionError,
    OSError,
)


def _add_case_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("config", nargs="?", help="Путь к конфигурации JSON")
    parser.add_argument("--case", choices=sorted(CASES), help="Встроенная задача")
    parser.add_argument("--mesh", default="UMR37", help="Сетка задачи regular (UMR N, LR i)")
    parser.add_argument("--global-rounds", type=int, default=2, help="i для задачи realistic")
    parser.add_argument("--fracture-rounds", type=int, default=2, help="j для задачи realistic")
    parser.add_argument(
        "--resolve", action="store_true", help="Разделять близкие трещины (realistic)"
    )
    parser.add_argument("--fractures", help="Таблица трещин задачи realistic")
    parser.add_argument(
        "--kind", default="inflow", choices=("inflow", "outflow"), help="Вариант pure-transport"
    )
    parser.add_argument("--n", type=int, default=32, help="Размер сетки pure-transport")
    parser.add_argument("--no-transport", action="store_true", help="Только задача давления")


def _add_common_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--output", help="Директория результатов")
    parser.add_argument("--threads", type=int, default=1, help="Количество процессов")
    parser.add_argument("--pressure-tol", type=float, help="Допуск решателя давления")
    parser.add_argument("--flux-tol", type=float, help="Допуск постобработки потока")
    parser.add_argument("--transport-tol", type=float, help="Допуск решателя переноса")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frats",
        description="Давление и перенос примеси в пористой среде с трещинами",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Подробный журнал")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Расчет задачи")
    _add_case_arguments(run)
    _add_common_arguments(run)

    convergence = commands.add_parser("convergence", help="Исследование сходимости")
    _add_case_arguments(convergence)
    _add_common_arguments(convergence)
    convergence.add_argument(
        "--meshes", nargs="+", default=[], help="Сетки задачи regular или размеры pure-transport"
    )
    convergence.add_argument("--dts", nargs="+", type=float, default=[], help="Шаги по времени")
    convergence.add_argument("--reference-dt", type=float, help="Шаг эталонного расчета")

    ingest = commands.add_parser("ingest-ref", help="Проверка таблицы эталонного решения")
    ingest.add_argument("path", help="Таблица центров ячеек")
    ingest.add_argument("--output", help="Сохранить проверенную таблицу")

    validate = commands.add_parser("validate", help="Проверка конфигурации без расчета")
    _add_case_arguments(validate)
    return parser


def _case_kwargs(args: argparse.Namespace, mesh: Optional[str] = None) -> Dict[str, Any]:
    if args.case == "regular":
        return {"mesh": mesh or args.mesh}
    if args.case == "realistic":
        return {
            "global_rounds": args.global_rounds,
            "fracture_rounds": args.fracture_rounds,
            "resolve": args.resolve,
            "path": args.fractures,
        }
    return {"kind": args.kind, "n": int(mesh) if mesh else args.n}


def load_config(args: argparse.Namespace, mesh: Optional[str] = None) -> CaseConfig:
    """
    Конфигурация из файла или встроенной задачи

    Исключения:
        ConfigurationError: Если не указаны ни файл, ни задача
    """
    if args.config:
        config = CaseConfig.from_json(args.config)
    elif args.case:
        case = get_case(args.case, **_case_kwargs(args, mesh))
        if args.case == "pure-transport":
            config = case.get_config()
        else:
            config = case.get_config(transport=not args.no_transport)
    else:
        raise ConfigurationError("Укажите файл конфигурации или встроенную задачу (--case)")
    if not hasattr(args, "output"):
        return config
    return config.with_overrides(
        output=args.output,
        pressure_tol=args.pressure_tol,
        flux_tol=args.flux_tol,
        transport_tol=args.transport_tol,
    )


def _run(args: argparse.Namespace) -> int:
    result = run_case(load_config(args))
    if result.errors is not None:
        result.errors.print_stats()
    if result.transport is not None:
        result.transport.print_stats()
    print(f"Результаты: {result.directory}")
    return 0


def _convergence(args: argparse.Namespace) -> int:
    if args.dts:
        config = load_config(args)
        reference_dt = args.reference_dt or min(args.dts) / 10.0
        study = temporal_convergence(config, args.dts, reference_dt, args.threads)
        directory = Path(config.output.directory)
    else:
        if not args.meshes:
            raise ConfigurationError("Укажите сетки (--meshes) или шаги по времени (--dts)")
        if args.case == "regular":
            for mesh in args.meshes:
                parse_mesh(mesh)
        directory = Path(args.output) if args.output else DEFAULT_OUTPUT_DIR / "convergence"
        configs = [load_config(args, mesh) for mesh in args.meshes]
        configs = [config.with_overrides(output=directory / config.name) for config in configs]
        study = spatial_convergence(configs, args.threads)
    study.save(directory)
    study.print_stats()
    return 0


def _ingest(args: argparse.Namespace) -> int:
    reference = ingest_reference(args.path)
    reference.print_stats()
    if args.output:
        print(f"Таблица сохранена: {reference.save(args.output)}")
    return 0


def _validate(args: argparse.Namespace) -> int:
    setup = prepare(load_config(args))
    setup.print_stats()
    if setup.face_sets is not None:
        kinds = {segment.kind for segment in setup.config.layout}
        if "dirichlet" not in kinds:
            raise ConfigurationError("Нет участков Дирихле: давление определено неоднозначно")
    print("Конфигурация корректна")
    return 0


COMMANDS = {
    "run": _run,
    "convergence": _convergence,
    "ingest-ref": _ingest,
    "validate": _validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Точка входа командной строки

    Пример использования:
        $ frats run --case regular --mesh UMR37 --output results/umr37
        $ frats convergence --case regular --meshes UMR19 UMR37 UMR73 --threads 3
        $ frats ingest-ref reference.csv
        $ frats validate case.json

    Аргументы:
        argv (list[str]): Аргументы (по умолчанию sys.argv)

    Вывод:
        int: Код завершения
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except EXPECTED_ERRORS as error:
        logger.error("%s", error)
        return 1


if __name__ == "__main__":
    sys.exit(main())
