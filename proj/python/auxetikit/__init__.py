"""Galerkin FFT homogenization, random-forest surrogates and inverse design of auxetic unit cells."""

from ._core import (
    GENERATOR_VERSION,
    ConvergenceError,
    Dataset,
    DegenerateError,
    Error,
    ForestModel,
    FormatError,
    ValidationError,
    base_stiffness,
    fit_forest,
    generate,
    geometry_svg,
    homogenize,
    inverse,
    rasterize,
    sample_params,
    shapes,
    sweep,
    train_and_evaluate,
)

__all__ = [
    "GENERATOR_VERSION",
    "ConvergenceError",
    "Dataset",
    "DegenerateError",
    "Error",
    "ForestModel",
    "FormatError",
    "ValidationError",
    "base_stiffness",
    "fit_forest",
    "generate",
    "geometry_svg",
    "homogenize",
    "inverse",
    "rasterize",
    "sample_params",
    "shapes",
    "sweep",
    "train_and_evaluate",
]
