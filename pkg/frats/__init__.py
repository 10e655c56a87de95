# Fractured Rock Advection and Transport Simulator (FRATS)
#
# Copyright (C) 2023
# Авторы: Шкарин Сергей <kouki.sergey@gmail.com>
#         Смирнова Екатерина <ekanerina@yandex.ru>
# URL: <https://github.com/SergeyShk/frats>

from .flux import FaceFluxField, average_flux, postprocess
from .fractures import FractureNetwork, IntersectionData, intersect, load_network
from .interpretation import InterpretedField, Partitioning, interpret, partition_all
from .mesh import BoundarySegment, Domain, FaceSets, Mesh, build_uniform, classify_boundary
from .metrics import calc_errors, sample_line
from .pressure import MaterialField, PressureField, assemble, solve
from .reference_data import ReferenceSolution, ingest_reference
from .transport import ConcentrationField, TransportConfig, TransportResult, run

# Метаданные

__description__ = """Расчет давления и переноса примеси в пористой среде с трещинами
методом встроенных трещин (EFEM) и конечных объемов.
Требует версию Python 3.8 и выше"""
__author__ = "Шкарин Сергей, Смирнова Екатерина"
__author_email__ = "kouki.sergey@gmail.com, ekanerina@yandex.ru"

__all__ = [
    "BoundarySegment",
    "ConcentrationField",
    "Domain",
    "FaceFluxField",
    "FaceSets",
    "FractureNetwork",
    "IntersectionData",
    "InterpretedField",
    "MaterialField",
    "Mesh",
    "Partitioning",
    "PressureField",
    "ReferenceSolution",
    "TransportConfig",
    "TransportResult",
    "assemble",
    "average_flux",
    "build_uniform",
    "calc_errors",
    "classify_boundary",
    "ingest_reference",
    "interpret",
    "intersect",
    "load_network",
    "partition_all",
    "postprocess",
    "run",
    "sample_line",
    "solve",
]
