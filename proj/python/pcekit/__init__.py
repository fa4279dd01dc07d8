"""Polynomial chaos surrogates, uncertainty quantification and Sobol' indices."""

from ._core import (
    ConfigError,
    IoError,
    ModelError,
    NumericalError,
    PceModel,
    PcekitError,
    build_pce,
    clenshaw_curtis,
    csg_proxy,
    enumerate_neighborhood,
    full_grid,
    gauss_legendre,
    latin_hypercube,
    legendre_eval,
    legendre_norm,
    rmse,
    rrmse,
    run_cli,
    sparse_grid,
)

__all__ = [
    "ConfigError",
    "IoError",
    "ModelError",
    "NumericalError",
    "PceModel",
    "PcekitError",
    "build_pce",
    "clenshaw_curtis",
    "csg_proxy",
    "enumerate_neighborhood",
    "full_grid",
    "gauss_legendre",
    "latin_hypercube",
    "legendre_eval",
    "legendre_norm",
    "rmse",
    "rrmse",
    "run_cli",
    "sparse_grid",
]
