"""Discretized separable Hilbert space: functions on a quadrature grid over [0, 1].

Elements are grid functions with the weighted inner product
``<f, g> = sum_i w_i f(t_i) g(t_i)``; linear operators are stored as kernel
matrices acting through the quadrature weights, so all three operator norms
come from the singular values of the weight-symmetrized matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, NumericError


def _readonly(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GridSpace:
    """Quadrature grid on [0, 1]: strictly increasing nodes, positive weights summing to one."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", _readonly(self.nodes))
        object.__setattr__(self, "weights", _readonly(self.weights))
        if self.nodes.ndim != 1 or self.nodes.shape != self.weights.shape:
            raise DimensionError("nodes and weights must be 1-d arrays of equal length")
        if self.d < 1:
            raise DimensionError("a grid needs at least one node")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be strictly positive")
        if abs(float(self.weights.sum()) - 1.0) > 1e-12:
            raise ValueError("quadrature weights must sum to one")
        object.__setattr__(self, "_sqrt_w", _readonly(np.sqrt(self.weights)))

    @property
    def d(self) -> int:
        return self.nodes.shape[0]

    @property
    def sqrt_weights(self) -> np.ndarray:
        return self._sqrt_w

    @classmethod
    def uniform(cls, d: int = 32) -> "GridSpace":
        """Midpoint grid with ``d`` nodes and weights 1/d (the package default)."""
        nodes = (np.arange(d) + 0.5) / d
        return cls(nodes=nodes, weights=np.full(d, 1.0 / d))

    def compatible(self, other: "GridSpace") -> bool:
        return self is other or (
            self.d == other.d
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )

    def function(self, values) -> "GridFunction":
        return GridFunction(self, values)

    def zero_function(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.d))


def _check_same_space(a: GridSpace, b: GridSpace, what: str) -> None:
    if not a.compatible(b):
        raise DimensionError(f"{what}: grid spaces do not match ({a.d} vs {b.d} nodes)")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """An element of the discretized space: values on the grid nodes."""

    space: GridSpace
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if self.values.shape != (self.space.d,):
            raise DimensionError(
                f"values must have shape ({self.space.d},), got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid function values must be finite")

    def norm(self) -> float:
        return float(np.sqrt(inner(self, self)))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _check_same_space(self.space, other.space, "add")
        return GridFunction(self.space, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _check_same_space(self.space, other.space, "subtract")
        return GridFunction(self.space, self.values - other.values)

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.space, -self.values)

    def __mul__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.space, float(scalar) * self.values)

    __rmul__ = __mul__


def inner(f: GridFunction, g: GridFunction) -> float:
    """Weighted inner product ``sum_i w_i f(t_i) g(t_i)``."""
    _check_same_space(f.space, g.space, "inner product")
    return float(np.dot(f.space.weights * f.values, g.values))


class OperatorNorms(NamedTuple):
    operator: float
    hilbert_schmidt: float
    nuclear: float


@dataclass(frozen=True, eq=False)
class LinearOp:
    """Bounded linear operator between grid spaces.

    The kernel matrix represents the operator with respect to the grid samples:
    ``(A f)(t_i) = sum_j kernel[i, j] * w_dom[j] * f(t_j)``, i.e. the quadrature
    discretization of an integral kernel. With this convention the adjoint is
    the plain matrix transpose and composition folds the intermediate weights.
    """

    domain: GridSpace
    codomain: GridSpace
    kernel: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kernel", _readonly(self.kernel))
        if self.kernel.shape != (self.codomain.d, self.domain.d):
            raise DimensionError(
                f"kernel must have shape ({self.codomain.d}, {self.domain.d}), "
                f"got {self.kernel.shape}"
            )
        if not np.all(np.isfinite(self.kernel)):
            raise ValueError("operator kernel must be finite")

    def apply(self, f: GridFunction) -> GridFunction:
        _check_same_space(self.domain, f.space, "apply")
        return GridFunction(self.codomain, self.kernel @ (self.domain.weights * f.values))

    def apply_matrix(self) -> np.ndarray:
        """Matrix M with (A f) values = M @ f values (weights folded in)."""
        return self.kernel * self.domain.weights[None, :]

    def weighted(self) -> np.ndarray:
        """Weight-symmetrized matrix ``W_cod^{1/2} K W_dom^{1/2}``; its singular values define the norms."""
        return self.codomain.sqrt_weights[:, None] * self.kernel * self.domain.sqrt_weights[None, :]

    def __add__(self, other: "LinearOp") -> "LinearOp":
        _check_same_space(self.domain, other.domain, "operator add (domain)")
        _check_same_space(self.codomain, other.codomain, "operator add (codomain)")
        return LinearOp(self.domain, self.codomain, self.kernel + other.kernel)

    def __sub__(self, other: "LinearOp") -> "LinearOp":
        _check_same_space(self.domain, other.domain, "operator subtract (domain)")
        _check_same_space(self.codomain, other.codomain, "operator subtract (codomain)")
        return LinearOp(self.domain, self.codomain, self.kernel - other.kernel)

    def __neg__(self) -> "LinearOp":
        return LinearOp(self.domain, self.codomain, -self.kernel)

    def __mul__(self, scalar: float) -> "LinearOp":
        return LinearOp(self.domain, self.codomain, float(scalar) * self.kernel)

    __rmul__ = __mul__


def identity_op(space: GridSpace) -> LinearOp:
    # (I f)(t_i) = f(t_i) requires kernel diag(1/w) under the quadrature convention
    return LinearOp(space, space, np.diag(1.0 / space.weights))


def zero_op(domain: GridSpace, codomain: GridSpace | None = None) -> LinearOp:
    codomain = domain if codomain is None else codomain
    return LinearOp(domain, codomain, np.zeros((codomain.d, domain.d)))


def tensor(x: GridFunction, y: GridFunction) -> LinearOp:
    """Tensorial product ``x (x) y = <x, .> y`` as an operator from x's space to y's space."""
    return LinearOp(x.space, y.space, np.outer(y.values, x.values))


def adjoint(a: LinearOp) -> LinearOp:
    """Adjoint operator; with the quadrature convention this is the kernel transpose."""
    return LinearOp(a.codomain, a.domain, a.kernel.T)


def compose(a: LinearOp, b: LinearOp) -> LinearOp:
    """Composition ``a o b`` (apply b first); requires domain(a) == codomain(b)."""
    _check_same_space(a.domain, b.codomain, "compose")
    return LinearOp(b.domain, a.codomain, a.kernel @ (a.domain.weights[:, None] * b.kernel))


def op_power(a: LinearOp, j: int) -> LinearOp:
    """j-fold composition of an endomorphism with itself; j = 0 gives the identity."""
    _check_same_space(a.domain, a.codomain, "operator power")
    out = identity_op(a.domain)
    for _ in range(int(j)):
        out = compose(a, out)
    return out


def op_norms(a: LinearOp) -> OperatorNorms:
    """(operator, Hilbert-Schmidt, nuclear) norms from the weighted singular values."""
    try:
        sv = np.linalg.svd(a.weighted(), compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy SVD rarely fails
        raise NumericError(f"SVD did not converge: {exc}") from exc
    return OperatorNorms(
        operator=float(sv[0]) if sv.size else 0.0,
        hilbert_schmidt=float(np.sqrt(np.sum(sv**2))),
        nuclear=float(np.sum(sv)),
    )


def hs_norm(a: LinearOp) -> float:
    """Hilbert-Schmidt norm (Frobenius norm of the weighted matrix; no SVD needed)."""
    return float(np.linalg.norm(a.weighted()))
