"""Empirical lagged (cross-)covariance operator estimators and analytic oracles.

The estimator averages ``X_k^[m] (x) Y_{k+h}^[n]`` over exactly the admissible
index range; no tapering, no bias correction, no sample-mean centering
(processes are centered by assumption). Analytic population oracles exist for
fAR(1), iid, degenerate and cross-linked models.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .errors import DimensionError, OracleError, StabilityError
from .grid import LinearOp, adjoint, compose, hs_norm, op_norms
from .product import BlockOp, LagWindow, lag_window
from .processes import ModelSpec
from .validation import as_sample_matrix, check_same_length


@dataclass(frozen=True, eq=False)
class CovEstimate:
    """A fitted lagged covariance operator together with its window bookkeeping."""

    op: BlockOp
    window: LagWindow
    kind: str

    def dense(self) -> np.ndarray:
        """Flattened (n*d, m*d) kernel, row-major in the block index."""
        return self.op.flat_kernel()

    def to_csv(self, path_or_buffer) -> None:
        """Dense kernel as CSV; the header comment names h, m, n, N' and the kind."""
        w = self.window
        header = f"# ftscov covariance estimate: kind={self.kind},h={w.h},m={w.m},n={w.n},N_prime={w.n_prime}\n"
        if hasattr(path_or_buffer, "write"):
            _write_dense_csv(path_or_buffer, header, self.dense())
        else:
            with open(path_or_buffer, "w", encoding="utf-8") as fh:
                _write_dense_csv(fh, header, self.dense())


def _write_dense_csv(fh, header: str, dense: np.ndarray) -> None:
    fh.write(header)
    for row in dense:
        fh.write(",".join(repr(float(v)) for v in row))
        fh.write("\n")


def _lagged_stack(values: np.ndarray, k_start: int, count: int, power: int) -> np.ndarray:
    """(count, power, d) stack with component i holding X_{k-i} (0-based i)."""
    return np.stack(
        [values[k_start - 1 - i : k_start - 1 - i + count] for i in range(power)], axis=1
    )


def empirical_cross_cov(xs, ys, h: int, m: int, n: int, space=None) -> CovEstimate:
    """Empirical lag-h cross-covariance operator between Cartesian powers m and n.

    Averages the ``N'`` tensor products ``X_k^[m] (x) Y_{k+h}^[n]`` over
    ``k = max{m, n-h}, ..., min{N, N-h}``; unbiased for the population operator
    under joint weak stationarity.
    """
    xv, sp = as_sample_matrix(xs, space)
    yv, sp_y = as_sample_matrix(ys, space if space is not None else sp)
    check_same_length(xv, yv)
    if not sp.compatible(sp_y):
        raise DimensionError("the two paths live on different grids")
    win = lag_window(xv.shape[0], h, m, n)
    xt = _lagged_stack(xv, win.k_start, win.n_prime, m)
    yt = _lagged_stack(yv, win.k_start + win.h, win.n_prime, n)
    blocks = np.einsum("ria,rjb->ijab", yt, xt) / win.n_prime
    return CovEstimate(op=BlockOp(sp, sp, blocks), window=win, kind="cross")


def empirical_auto_cov(xs, h: int, m: int, space=None) -> CovEstimate:
    """Empirical lag-h covariance operator of the power-m embedding (cross estimator with ys = xs)."""
    xv, sp = as_sample_matrix(xs, space)
    est = empirical_cross_cov(xv, xv, h, m, m, space=sp)
    return CovEstimate(op=est.op, window=est.window, kind="auto")


def estimation_error(est, truth) -> float:
    """Squared Hilbert-Schmidt distance between an estimate and a reference operator."""
    a = est.op if isinstance(est, CovEstimate) else est
    b = truth.op if isinstance(truth, CovEstimate) else truth
    return (a - b).hs_norm() ** 2


def _far1_operator(model: ModelSpec) -> LinearOp:
    if model.kind == "iid" or model.kind == "degenerate":
        from .grid import zero_op

        return zero_op(model.space)
    if model.kind == "far" and len(model.ar_ops) == 1:
        return model.ar_ops[0]
    raise OracleError(
        f"analytic oracles support fAR(1)/iid/degenerate models, got kind={model.kind!r} "
        f"with {len(model.ar_ops)} AR operators"
    )


def analytic_cov_far1(model: ModelSpec) -> LinearOp:
    """Stationary covariance operator solving ``C = psi C psi* + C_eps`` by truncated series.

    The truncation depth follows the contraction: J = ceil(log(1e-12) / log(xi^2)).
    """
    psi = _far1_operator(model)
    c_eps = model.innovation.effective_covariance()
    if model.kind == "degenerate":
        return c_eps
    xi = op_norms(psi).operator
    if xi >= 1.0:
        raise StabilityError(f"analytic covariance needs ||psi||_L < 1, got {xi:.4f}")
    if xi == 0.0:
        return c_eps
    terms = int(np.ceil(np.log(1e-12) / np.log(xi**2)))
    cov = c_eps
    term = c_eps
    psi_adj = adjoint(psi)
    for _ in range(terms):
        term = compose(psi, compose(term, psi_adj))
        cov = cov + term
    return cov


def _lagged_scalar_cov(model: ModelSpec, cov: LinearOp, g: int) -> LinearOp:
    """Population lag-g covariance C^g = E[X_0 (x) X_g] for the supported kinds."""
    from .grid import op_power, zero_op

    if model.kind == "degenerate":
        return cov
    if model.kind == "iid":
        return cov if g == 0 else zero_op(model.space)
    psi = _far1_operator(model)
    if g >= 0:
        return compose(op_power(psi, g), cov)
    return adjoint(compose(op_power(psi, -g), cov))


def analytic_block_cov(model: ModelSpec, h: int, m: int, n: int, cross: bool = False) -> BlockOp:
    """Population block covariance: block (i, j) is the lagged scalar ``C^{h+j-i}``.

    With ``cross=True`` the companion series enters and every block picks up the
    link operator: ``C^{g}_{X,Y} = theta o C^g_X``. Degenerate models have every
    block equal to C_X; iid models are block-diagonal.
    """
    if cross and model.cross_link is None:
        raise OracleError("cross oracle requested but the model has no cross link")
    cov = analytic_cov_far1(model)
    theta = model.cross_link.theta if cross else None
    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, m + 1):
            blk = _lagged_scalar_cov(model, cov, h + j - i)
            if theta is not None:
                blk = compose(theta, blk)
            row.append(blk)
        rows.append(row)
    return BlockOp.from_blocks(rows)


def analytic_nu_moments(model: ModelSpec):
    """Gaussian population moments (nu2_x, nu4_x, nu2_y, nu4_y) from the analytic covariance.

    Test oracle: for the supported Gaussian models ``E||X||^4 = (tr C)^2 + 2 tr(C^2)``.
    """
    cov = analytic_cov_far1(model)
    lam = np.clip(np.linalg.eigvalsh(cov.weighted()), 0.0, None)
    nu2_x = float(np.sqrt(lam.sum()))
    nu4_x = float((lam.sum() ** 2 + 2 * np.sum(lam**2)) ** 0.25)
    nu2_y = nu4_y = None
    if model.cross_link is not None:
        theta = model.cross_link.theta
        cy = compose(theta, compose(cov, adjoint(theta))) + model.cross_link.noise.effective_covariance()
        lam_y = np.clip(np.linalg.eigvalsh(cy.weighted()), 0.0, None)
        nu2_y = float(np.sqrt(lam_y.sum()))
        nu4_y = float((lam_y.sum() ** 2 + 2 * np.sum(lam_y**2)) ** 0.25)
    return nu2_x, nu4_x, nu2_y, nu4_y


class LaggedCovariance(BaseEstimator):
    """Estimator-style wrapper around :func:`empirical_cross_cov`.

    Parameters
    ----------
    h : int
        Lag of the estimated operator.
    m, n : int
        Cartesian powers of the domain (X side) and codomain (Y side) embeddings.

    After ``fit(X)`` (auto-covariance) or ``fit(X, Y)`` (cross-covariance) the
    fitted operator is available as ``operator_`` (a BlockOp), its window
    bookkeeping as ``window_``, and the flattened kernel as ``dense_``.
    """

    def __init__(self, h: int = 0, m: int = 1, n: int = 1):
        self.h = h
        self.m = m
        self.n = n

    def fit(self, X, Y=None):
        if Y is None:
            est = empirical_auto_cov(X, self.h, self.m)
            if self.n != self.m:
                est = empirical_cross_cov(X, X, self.h, self.m, self.n)
        else:
            est = empirical_cross_cov(X, Y, self.h, self.m, self.n)
        self.estimate_ = est
        self.operator_ = est.op
        self.window_ = est.window
        self.dense_ = est.dense()
        return self

    def error_norm(self, truth) -> float:
        """Squared Hilbert-Schmidt distance of the fitted operator from a reference."""
        if not hasattr(self, "estimate_"):
            raise RuntimeError("call fit before error_norm")
        return estimation_error(self.estimate_, truth)

    def to_csv(self, path_or_buffer) -> None:
        if not hasattr(self, "estimate_"):
            raise RuntimeError("call fit before to_csv")
        self.estimate_.to_csv(path_or_buffer)

    def csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()
