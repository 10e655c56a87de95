from .tables import field_table, flux_table, qoi_table, save_field, save_table
from .vtk import write_concentration, write_interpreted, write_pressure, write_traces

__all__ = [
    "field_table",
    "flux_table",
    "qoi_table",
    "save_field",
    "save_table",
    "write_concentration",
    "write_interpreted",
    "write_pressure",
    "write_traces",
]
