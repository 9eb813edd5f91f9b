"""Transformer loss-of-life estimation with machine learning and data fusion.

Hourly load and ambient temperature profiles are pushed through the
IEEE C57.91-2011 thermal/aging equations to synthesize loss-of-life targets.
ANFIS, RBF and MLP regressors are trained on those targets, and the ANFIS and
RBF outputs are fused with a GA-weighted OWA combination and a sequential
scalar Kalman filter.
"""

from lolfusion.errors import (
    ConfigError,
    DegenerateDataError,
    DivergenceError,
    EmptyInputError,
    InvalidInputError,
    LolFusionError,
    ParseError,
    SchemaError,
    ShapeError,
)
from lolfusion.thermal import ThermalState, ThermalStepInput, TransformerParams

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegenerateDataError",
    "DivergenceError",
    "EmptyInputError",
    "InvalidInputError",
    "LolFusionError",
    "ParseError",
    "SchemaError",
    "ShapeError",
    "ThermalState",
    "ThermalStepInput",
    "TransformerParams",
]
