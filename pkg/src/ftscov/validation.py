"""Input validation helpers: coerce paths to value matrices, check shapes and windows."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError
from .grid import GridFunction, GridSpace


def as_sample_matrix(path, space: GridSpace | None = None):
    """Coerce a sample path to an (N, d) float matrix plus its grid space.

    Accepts a sequence of GridFunction over a common space, a 2-d array
    (rows are observations; a uniform midpoint grid is assumed when ``space``
    is not given), or a single GridFunction (treated as N = 1).
    """
    if isinstance(path, GridFunction):
        path = [path]
    if isinstance(path, np.ndarray):
        values = np.asarray(path, dtype=float)
        if values.ndim == 1:
            values = values[None, :]
        if values.ndim != 2:
            raise DimensionError(f"sample matrix must be 2-d, got ndim={values.ndim}")
        if space is None:
            space = GridSpace.uniform(values.shape[1])
        elif values.shape[1] != space.d:
            raise DimensionError(
                f"sample matrix has {values.shape[1]} columns but the grid has {space.d} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("sample values must be finite")
        return values, space
    path = list(path)
    if not path:
        raise DimensionError("empty sample path")
    if all(isinstance(f, GridFunction) for f in path):
        sp = path[0].space
        for f in path[1:]:
            if not sp.compatible(f.space):
                raise DimensionError("path elements live on different grids")
        if space is not None and not space.compatible(sp):
            raise DimensionError("path grid does not match the requested space")
        return np.stack([f.values for f in path]), sp
    return as_sample_matrix(np.asarray(path, dtype=float), space)


def check_same_length(xs: np.ndarray, ys: np.ndarray) -> None:
    if xs.shape[0] != ys.shape[0]:
        raise DimensionError(
            f"paths must have equal length, got {xs.shape[0]} and {ys.shape[0]}"
        )


def check_positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def check_nonnegative(name: str, value: float) -> float:
    value = float(value)
    if value < 0:
        raise ValueError(f"{name} must be nonnegative, got {value}")
    return value
