"""Cartesian powers of the grid space: stacked elements, block operators, lag windows.

The stacked element with power m at time k collects the last m observations
``(X_k, X_{k-1}, ..., X_{k-m+1})``; block operators between Cartesian powers
store one kernel per block, with block (i, j) mapping domain component j to
codomain component i.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, NumericError, WindowError
from .grid import GridFunction, GridSpace, LinearOp, OperatorNorms, _check_same_space, _readonly, inner


@dataclass(frozen=True, eq=False)
class ProductElement:
    """Element of the m-fold Cartesian power: a tuple of grid functions over one space."""

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise DimensionError("a product element needs at least one component")
        space = comps[0].space
        for c in comps[1:]:
            _check_same_space(space, c.space, "product element")
        object.__setattr__(self, "components", comps)

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def space(self) -> GridSpace:
        return self.components[0].space

    def stacked_values(self) -> np.ndarray:
        """(m, d) array of component values."""
        return np.stack([c.values for c in self.components])

    def norm(self) -> float:
        return float(np.sqrt(sum(inner(c, c) for c in self.components)))

    def __sub__(self, other: "ProductElement") -> "ProductElement":
        if self.m != other.m:
            raise DimensionError(f"product elements of power {self.m} vs {other.m}")
        return ProductElement(tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "ProductElement":
        return ProductElement(tuple(-c for c in self.components))

    def __mul__(self, scalar: float) -> "ProductElement":
        return ProductElement(tuple(scalar * c for c in self.components))

    __rmul__ = __mul__


def product_inner(x: ProductElement, y: ProductElement) -> float:
    """Cartesian inner product: sum of component inner products."""
    if x.m != y.m:
        raise DimensionError(f"product elements of power {x.m} vs {y.m}")
    return float(sum(inner(a, b) for a, b in zip(x.components, y.components)))


@dataclass(frozen=True, eq=False)
class BlockOp:
    """Operator between Cartesian powers, stored block-wise.

    ``blocks`` has shape (n, m, d_cod, d_dom): block (i, j) is the kernel of the
    operator sending domain component j to codomain component i, with the same
    quadrature convention as LinearOp. Flattening (for SVD-based norms and
    eigendecompositions) is row-major in the codomain/domain component index.
    """

    domain_space: GridSpace
    codomain_space: GridSpace
    blocks: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "blocks", _readonly(self.blocks))
        if self.blocks.ndim != 4:
            raise DimensionError("blocks must be a 4-d array (n, m, d_cod, d_dom)")
        n, m, dc, dd = self.blocks.shape
        if dc != self.codomain_space.d or dd != self.domain_space.d:
            raise DimensionError(
                f"block shape ({dc}, {dd}) does not match spaces "
                f"({self.codomain_space.d}, {self.domain_space.d})"
            )

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    @property
    def m(self) -> int:
        return self.blocks.shape[1]

    @classmethod
    def from_blocks(cls, rows: Sequence[Sequence[LinearOp]]) -> "BlockOp":
        first = rows[0][0]
        blocks = np.stack([np.stack([op.kernel for op in row]) for row in rows])
        return cls(first.domain, first.codomain, blocks)

    @classmethod
    def single(cls, op: LinearOp) -> "BlockOp":
        return cls(op.domain, op.codomain, op.kernel[None, None])

    @classmethod
    def from_flat(
        cls, flat: np.ndarray, domain_space: GridSpace, codomain_space: GridSpace, m: int, n: int
    ) -> "BlockOp":
        """Inverse of :meth:`flat_kernel`: split an (n*d_cod, m*d_dom) kernel into blocks."""
        dc, dd = codomain_space.d, domain_space.d
        blocks = flat.reshape(n, dc, m, dd).transpose(0, 2, 1, 3)
        return cls(domain_space, codomain_space, blocks)

    def block(self, i: int, j: int) -> LinearOp:
        """Block (i, j), 0-based."""
        return LinearOp(self.domain_space, self.codomain_space, self.blocks[i, j])

    def to_linear_op(self) -> LinearOp:
        if self.n != 1 or self.m != 1:
            raise DimensionError("only a 1x1 block operator reduces to a LinearOp")
        return LinearOp(self.domain_space, self.codomain_space, self.blocks[0, 0])

    def flat_kernel(self) -> np.ndarray:
        """(n*d_cod, m*d_dom) kernel of the operator on the flattened product spaces."""
        n, m, dc, dd = self.blocks.shape
        return self.blocks.transpose(0, 2, 1, 3).reshape(n * dc, m * dd)

    def weighted_flat(self) -> np.ndarray:
        sc = np.tile(self.codomain_space.sqrt_weights, self.n)
        sd = np.tile(self.domain_space.sqrt_weights, self.m)
        return sc[:, None] * self.flat_kernel() * sd[None, :]

    def norms(self) -> OperatorNorms:
        try:
            sv = np.linalg.svd(self.weighted_flat(), compute_uv=False)
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise NumericError(f"SVD did not converge: {exc}") from exc
        return OperatorNorms(
            operator=float(sv[0]) if sv.size else 0.0,
            hilbert_schmidt=float(np.sqrt(np.sum(sv**2))),
            nuclear=float(np.sum(sv)),
        )

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.weighted_flat()))

    def op_norm(self) -> float:
        return self.norms().operator

    def nuc_norm(self) -> float:
        return self.norms().nuclear

    def adjoint(self) -> "BlockOp":
        """Block transpose with per-block adjoints."""
        return BlockOp(self.codomain_space, self.domain_space, self.blocks.transpose(1, 0, 3, 2))

    def apply(self, x: ProductElement) -> ProductElement:
        if x.m != self.m:
            raise DimensionError(f"block operator of power {self.m} applied to power {x.m}")
        _check_same_space(self.domain_space, x.space, "block apply")
        vals = x.stacked_values()
        out = np.einsum("ijab,jb->ia", self.blocks, self.domain_space.weights[None, :] * vals)
        return ProductElement(tuple(GridFunction(self.codomain_space, row) for row in out))

    def __add__(self, other: "BlockOp") -> "BlockOp":
        self._check_same_shape(other)
        return BlockOp(self.domain_space, self.codomain_space, self.blocks + other.blocks)

    def __sub__(self, other: "BlockOp") -> "BlockOp":
        self._check_same_shape(other)
        return BlockOp(self.domain_space, self.codomain_space, self.blocks - other.blocks)

    def __mul__(self, scalar: float) -> "BlockOp":
        return BlockOp(self.domain_space, self.codomain_space, float(scalar) * self.blocks)

    __rmul__ = __mul__

    def _check_same_shape(self, other: "BlockOp") -> None:
        if self.blocks.shape != other.blocks.shape:
            raise DimensionError(
                f"block shapes differ: {self.blocks.shape} vs {other.blocks.shape}"
            )
        _check_same_space(self.domain_space, other.domain_space, "block operator (domain)")
        _check_same_space(self.codomain_space, other.codomain_space, "block operator (codomain)")


def compose_blocks(a: BlockOp, b: BlockOp) -> BlockOp:
    """Composition ``a o b`` of block operators (apply b first)."""
    if a.m != b.n:
        raise DimensionError(f"cannot compose: a has {a.m} domain blocks, b has {b.n} codomain blocks")
    _check_same_space(a.domain_space, b.codomain_space, "block compose")
    w = a.domain_space.weights
    kern = np.einsum("ilab,ljbc->ijac", a.blocks * w[None, None, None, :], b.blocks)
    return BlockOp(b.domain_space, a.codomain_space, kern)


@dataclass(frozen=True)
class LagWindow:
    """Combinatorics of one estimation cell: effective count and dependence window.

    ``n_prime = min{N, N-h} - max{m, n-h} + 1`` summands enter the estimator;
    ``kappa = max{m, n-h} + h*1{h >= 1} - 1`` and ``kappa_prime = max{1, kappa}``
    bound the range of dependent summand pairs.
    """

    N: int
    h: int
    m: int
    n: int
    n_prime: int
    kappa: int
    kappa_prime: int

    @property
    def k_start(self) -> int:
        """First summand index (1-based)."""
        return max(self.m, self.n - self.h)

    @property
    def k_stop(self) -> int:
        """Last summand index (1-based, inclusive)."""
        return min(self.N, self.N - self.h)


def lag_window(N: int, h: int, m: int, n: int) -> LagWindow:
    """Validate admissibility of (N, h, m, n) and compute (N', kappa, kappa')."""
    N, h, m, n = int(N), int(h), int(m), int(n)
    if N < 1:
        raise WindowError(f"sample size must be positive, got N={N}")
    if m < 1 or n < 1:
        raise WindowError(f"Cartesian powers must be positive, got m={m}, n={n}")
    if m > N:
        raise WindowError(f"violated m <= N: m={m}, N={N}")
    if n > N:
        raise WindowError(f"violated n <= N: n={n}, N={N}")
    if h > N - m:
        raise WindowError(f"violated h <= N - m: h={h}, N={N}, m={m}")
    if h < n - N:
        raise WindowError(f"violated h >= n - N: h={h}, N={N}, n={n}")
    n_prime = min(N, N - h) - max(m, n - h) + 1
    kappa = max(m, n - h) + (h if h >= 1 else 0) - 1
    return LagWindow(N=N, h=h, m=m, n=n, n_prime=n_prime, kappa=kappa, kappa_prime=max(1, kappa))


def embed(path, k: int, m: int, space: GridSpace | None = None) -> ProductElement:
    """Stack the last m path values at time k (1-based): component i is X_{k-i+1}.

    ``path`` may be a sequence of GridFunction or an (N, d) array (then ``space``
    is required unless a default uniform grid is acceptable).
    """
    from .validation import as_sample_matrix

    values, space = as_sample_matrix(path, space)
    if m < 1:
        raise WindowError(f"Cartesian power must be positive, got m={m}")
    if k < m:
        raise WindowError(f"violated k >= m: k={k}, m={m} (path starts at index 1)")
    if k > values.shape[0]:
        raise WindowError(f"index k={k} beyond path length N={values.shape[0]}")
    comps = tuple(GridFunction(space, values[k - i]) for i in range(1, m + 1))
    return ProductElement(comps)


def product_tensor(x: ProductElement, y: ProductElement) -> BlockOp:
    """Tensor product of stacked elements: block (i, j) is ``x_j (x) y_i``."""
    xv = x.stacked_values()
    yv = y.stacked_values()
    blocks = np.einsum("ia,jb->ijab", yv, xv)
    return BlockOp(x.space, y.space, blocks)
