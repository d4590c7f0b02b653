from .data import (
    COLUMNS,
    NUMERIC_COLUMNS,
    EmptyTable,
    MissingColumn,
    NonNumericCell,
    ObservationTable,
    SchemaError,
    UnexpectedColumn,
    dump_observations,
    load_observations,
)
from .lowess import DegenerateNeighborhood, SmoothResult, SmoothSpec, lowess_surface
from .ols import RankDeficient, RegressionResult, TooFewObservations, critical_values, ols, stars
from .table import SPECS, format_table, run_specs

__all__ = [
    "COLUMNS",
    "NUMERIC_COLUMNS",
    "SPECS",
    "DegenerateNeighborhood",
    "EmptyTable",
    "MissingColumn",
    "NonNumericCell",
    "ObservationTable",
    "RankDeficient",
    "RegressionResult",
    "SchemaError",
    "SmoothResult",
    "SmoothSpec",
    "TooFewObservations",
    "UnexpectedColumn",
    "critical_values",
    "dump_observations",
    "format_table",
    "load_observations",
    "lowess_surface",
    "ols",
    "run_specs",
    "stars",
]
