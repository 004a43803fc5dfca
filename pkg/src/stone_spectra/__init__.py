"""Vacuum spectral resolutions and characteristic functions via Stone's formula."""

__version__ = "0.1.0"

from .config import DEFAULT_CONFIG, DEFAULT_SERIES, NumericsConfig, SeriesControl  # noqa: E402
from .errors import (  # noqa: E402
    DomainError,
    NumericalError,
    SpectralError,
)
from .resolvents import ObservableSpec, TestFunction, VACUUM  # noqa: E402
from .stone import SpectralCDF, stone_cdf  # noqa: E402
from .charfun import ComplexGridFunction, SpectralMeasure, cf_from_measure, measure_from_cdf  # noqa: E402

__all__ = [
    "DEFAULT_CONFIG",
    "DEFAULT_SERIES",
    "NumericsConfig",
    "SeriesControl",
    "DomainError",
    "NumericalError",
    "SpectralError",
    "ObservableSpec",
    "TestFunction",
    "VACUUM",
    "SpectralCDF",
    "stone_cdf",
    "ComplexGridFunction",
    "SpectralMeasure",
    "cf_from_measure",
    "measure_from_cdf",
]
