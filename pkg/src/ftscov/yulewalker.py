"""Regularized Yule-Walker estimation of functional AR operator rows.

``psi_hat = C_hat^1 (C_hat^0 + ridge I)^{-1}`` with optional spectral
compression of both factors onto the top-K empirical eigenfunctions. The same
computation with the Cartesian power in the truncation role estimates the
leading operators of an invertible (fAR-infinity) representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from sklearn.base import BaseEstimator

from .covariance import empirical_auto_cov, empirical_cross_cov
from .errors import DimensionError, WindowError
from .grid import LinearOp, compose
from .product import BlockOp, compose_blocks
from .validation import as_sample_matrix

_DEFAULT_EV_THRESHOLD = 0.999
_DEFAULT_RANK_CAP = 12
_NUMERICAL_RANK_TOL = 1e-12


def tychonoff_inverse(cov: BlockOp, ridge: float) -> BlockOp:
    """Ridge inverse ``(C + ridge I)^{-1}`` of a symmetric PSD block operator."""
    ridge = float(ridge)
    if ridge <= 0:
        raise ValueError(f"ridge parameter must be positive, got {ridge}")
    if cov.m != cov.n or not cov.domain_space.compatible(cov.codomain_space):
        raise DimensionError("ridge inverse needs an endomorphism of one Cartesian power")
    w = cov.weighted_flat()
    lams, vecs = np.linalg.eigh(0.5 * (w + w.T))
    inv_weighted = (vecs / (lams + ridge)[None, :]) @ vecs.T
    sw = np.tile(cov.domain_space.sqrt_weights, cov.m)
    flat = inv_weighted / sw[:, None] / sw[None, :]
    return BlockOp.from_flat(flat, cov.domain_space, cov.codomain_space, cov.m, cov.n)


@dataclass(frozen=True)
class YWDiagnostics:
    residual_hs: float
    block_hs_norms: Tuple[float, ...]
    condition: float
    explained_variance: float
    rank_warning: bool
    n_samples: int
    order: int


@dataclass(frozen=True, eq=False)
class YWFit:
    """Fitted operator row (psi_1 ... psi_p) with its regularization bookkeeping."""

    psi_hat: BlockOp
    ridge: float
    rank: int
    diagnostics: YWDiagnostics

    def operator(self, j: int) -> LinearOp:
        """Fitted AR operator psi_hat_j, 1-based."""
        return self.psi_hat.block(0, j - 1)


def _spectral_inverse(cov: BlockOp, ridge: float, rank: Optional[int]):
    """Ridge inverse, optionally compressed onto the top-``rank`` eigenfunctions.

    rank=0 keeps the full inverse; rank=None selects the smallest rank reaching
    99.9% explained variance, capped at 12 and at the numerical rank.
    """
    w = cov.weighted_flat()
    lams, vecs = np.linalg.eigh(0.5 * (w + w.T))
    lams = np.clip(lams[::-1], 0.0, None)
    vecs = vecs[:, ::-1]
    total = float(lams.sum())
    numerical_rank = int(np.sum(lams > _NUMERICAL_RANK_TOL * max(lams[0], 1e-300)))
    rank_warning = False
    if rank is None:
        if total <= 0:
            k = 1
        else:
            frac = np.cumsum(lams) / total
            k = int(np.searchsorted(frac, _DEFAULT_EV_THRESHOLD) + 1)
        k = min(k, _DEFAULT_RANK_CAP, numerical_rank) or 1
    else:
        k = int(rank)
        if k > numerical_rank > 0:
            k = numerical_rank
            rank_warning = True
    sw = np.tile(cov.domain_space.sqrt_weights, cov.m)
    if k == 0:
        inv_weighted = (vecs / (lams + ridge)[None, :]) @ vecs.T
        used = len(lams)
    else:
        vk = vecs[:, :k]
        inv_weighted = (vk / (lams[:k] + ridge)[None, :]) @ vk.T
        used = k
    flat = inv_weighted / sw[:, None] / sw[None, :]
    inv = BlockOp.from_flat(flat, cov.domain_space, cov.codomain_space, cov.m, cov.n)
    explained = float(lams[:used].sum() / total) if total > 0 else 1.0
    condition = float((lams[0] + ridge) / (lams[min(used, len(lams)) - 1] + ridge))
    return inv, used if k else 0, explained, condition, rank_warning


def yw_fit(xs, p: int, ridge: Optional[float] = None, rank: Optional[int] = None, space=None) -> YWFit:
    """Fit the fAR(p) operator row from the Yule-Walker moment identity.

    Parameters
    ----------
    xs : path (sequence of GridFunction or (N, d) array)
    p : AR order (Cartesian power of the lagged covariance).
    ridge : Tychonoff parameter; defaults to N**(-1/3).
    rank : spectral truncation; 0 disables, None selects by explained variance
        (99.9%, capped at 12). Requests beyond the numerical rank are truncated
        with a warning diagnostic.
    """
    values, sp = as_sample_matrix(xs, space)
    n_samples = values.shape[0]
    p = int(p)
    if n_samples <= p + 1:
        raise WindowError(f"Yule-Walker fit needs N > p + 1, got N={n_samples}, p={p}")
    ridge = float(n_samples ** (-1.0 / 3.0)) if ridge is None else float(ridge)
    if ridge <= 0:
        raise ValueError(f"ridge parameter must be positive, got {ridge}")
    c0 = empirical_auto_cov(values, 0, p, space=sp)
    c1 = empirical_cross_cov(values, values, 1, p, 1, space=sp)
    inv, used_rank, explained, condition, rank_warning = _spectral_inverse(c0.op, ridge, rank)
    psi = compose_blocks(c1.op, inv)
    residual = (c1.op - compose_blocks(psi, c0.op)).hs_norm()
    block_norms = tuple(
        float(np.linalg.norm(psi.block(0, j).weighted())) for j in range(p)
    )
    diag = YWDiagnostics(
        residual_hs=residual,
        block_hs_norms=block_norms,
        condition=condition,
        explained_variance=explained,
        rank_warning=rank_warning,
        n_samples=n_samples,
        order=p,
    )
    return YWFit(psi_hat=psi, ridge=ridge, rank=used_rank, diagnostics=diag)


def yw_fit_truncated(
    xs, m: int, ridge: Optional[float] = None, rank: Optional[int] = None, space=None
) -> YWFit:
    """Truncated fAR(infinity) fit: the Cartesian power m plays the truncation role.

    Identical computation to :func:`yw_fit`; the fitted row estimates the first
    m operators of the invertible representation, with the neglected remainder
    shrinking as m grows.
    """
    return yw_fit(xs, m, ridge=ridge, rank=rank, space=space)


def truncation_decay(
    xs, orders: Sequence[int], ridge: Optional[float] = None, rank: Optional[int] = None, space=None
) -> list:
    """Leading-block distances between consecutive truncated fits, for remainder-decay diagnostics."""
    values, sp = as_sample_matrix(xs, space)
    fits = [yw_fit_truncated(values, m, ridge=ridge, rank=rank, space=sp) for m in orders]
    out = []
    for a, b in zip(fits, fits[1:]):
        diff = a.operator(1) - b.operator(1)
        out.append(float(np.linalg.norm(diff.weighted())))
    return out


def ma1_inversion_coefficients(beta: LinearOp, count: int) -> list:
    """Closed-form fAR(infinity) operators of an invertible fMA(1): psi_l = -(-beta)^l."""
    if count < 1:
        raise ValueError(f"need at least one coefficient, got {count}")
    coeffs = [beta]
    for _ in range(1, int(count)):
        coeffs.append(-1.0 * compose(coeffs[-1], beta))
    return coeffs


class YuleWalker(BaseEstimator):
    """Estimator-style wrapper around :func:`yw_fit` with one-step-ahead prediction.

    Parameters
    ----------
    order : AR order p.
    ridge : Tychonoff parameter (None: N**(-1/3)).
    rank : spectral truncation (None: explained-variance rule; 0: full inverse).
    """

    def __init__(self, order: int = 1, ridge: Optional[float] = None, rank: Optional[int] = None):
        self.order = order
        self.ridge = ridge
        self.rank = rank

    def fit(self, X, y=None):
        values, sp = as_sample_matrix(X)
        self.fit_ = yw_fit(values, self.order, ridge=self.ridge, rank=self.rank, space=sp)
        self.space_ = sp
        self.operators_ = [self.fit_.operator(j) for j in range(1, self.order + 1)]
        self.residual_ = self.fit_.diagnostics.residual_hs
        return self

    def predict(self, X):
        """One-step-ahead predictions X_hat_{k+1} for k = order, ..., N (last row is the forecast)."""
        if not hasattr(self, "fit_"):
            raise RuntimeError("call fit before predict")
        values, _ = as_sample_matrix(X, self.space_)
        n = values.shape[0]
        p = self.order
        if n < p:
            raise WindowError(f"prediction needs at least order={p} observations, got {n}")
        mats = [(op.kernel * op.domain.weights[None, :]).T for op in self.operators_]
        out = np.zeros((n - p + 1, values.shape[1]))
        for j, mat in enumerate(mats, start=1):
            out += values[p - j : n - j + 1] @ mat
        return out
