"""Figure regeneration for kicked-rotor simulation outputs."""

from .io import SchemaError, read_filter_csv, read_result_json, read_series_csv
from .plots import (
    PlotSpec,
    make_plot,
    plot_energy_series,
    plot_filter,
    plot_reconstruction,
)

__version__ = "0.1.0"

__all__ = [
    "SchemaError", "read_filter_csv", "read_result_json", "read_series_csv",
    "PlotSpec", "make_plot", "plot_energy_series", "plot_filter",
    "plot_reconstruction",
]
