"""Evaluate the explicit error-bound formulas against estimated (or capped) moments.

Every evaluator returns a BoundReport splitting the value into the leading
moment product and the coupling-tail contribution, and records which moment
source and tail rule produced it. The cross-bound parenthesization follows the
derivation: the nu_4(X_1) nu_4(Y_1) prefactor multiplies the whole sum of both
coupling products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import InsufficientMomentsError
from .product import LagWindow, lag_window
from .processes import MomentSet
from .validation import check_nonnegative, check_positive

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class MomentCaps:
    """Optional user-supplied upper bounds that replace estimated moments.

    A coupling-sum cap bounds the full series ``sum_{k >= 1}``, hence is a valid
    (if crude) stand-in for any window start.
    """

    nu4_x: Optional[float] = None
    nu4_y: Optional[float] = None
    nu2_x: Optional[float] = None
    nu2_y: Optional[float] = None
    coupling_sum_x: Optional[float] = None
    coupling_sum_y: Optional[float] = None

    def any_set(self) -> bool:
        return any(
            v is not None
            for v in (
                self.nu4_x,
                self.nu4_y,
                self.nu2_x,
                self.nu2_y,
                self.coupling_sum_x,
                self.coupling_sum_y,
            )
        )


@dataclass(frozen=True)
class BoundReport:
    """One evaluated bound with its term breakdown and audit fields."""

    formula: str
    value: float
    leading_term: float
    tail_term: float
    window: LagWindow
    moment_source: str
    tail_rule: str


def _resolve(moments: MomentSet, caps: Optional[MomentCaps], start: int, need_y: bool):
    caps = caps or MomentCaps()
    source = "capped" if caps.any_set() else "estimated"
    nu4_x = caps.nu4_x if caps.nu4_x is not None else moments.nu4_x
    sum_x = (
        caps.coupling_sum_x
        if caps.coupling_sum_x is not None
        else moments.coupling_sum("x", start)
    )
    if not need_y:
        return source, nu4_x, sum_x, None, None
    nu4_y = caps.nu4_y if caps.nu4_y is not None else moments.nu4_y
    if nu4_y is None:
        raise InsufficientMomentsError("cross bound needs nu_4 of the companion series")
    sum_y = (
        caps.coupling_sum_y
        if caps.coupling_sum_y is not None
        else moments.coupling_sum("y", start)
    )
    return source, nu4_x, sum_x, nu4_y, sum_y


def xi_cross(moments: MomentSet, window: LagWindow, caps: Optional[MomentCaps] = None) -> BoundReport:
    """Cross-covariance bound:

    ``xi = nu4(X)^2 nu4(Y)^2
    + (2 sqrt(2) / (2 kappa' - 1)) nu4(X) nu4(Y)
    * sum_{k >= kappa'} [nu4(Y) a_k + nu4(X) b_k]``

    with ``a_k = nu4(X_k - X_k^(k))`` and ``b_k`` the companion analogue.
    """
    kp = window.kappa_prime
    source, nu4_x, sum_x, nu4_y, sum_y = _resolve(moments, caps, kp, need_y=True)
    leading = nu4_x**2 * nu4_y**2
    tail = (2.0 * _SQRT2 / (2 * kp - 1)) * nu4_x * nu4_y * (nu4_y * sum_x + nu4_x * sum_y)
    return BoundReport(
        formula="xi_cross",
        value=leading + tail,
        leading_term=leading,
        tail_term=tail,
        window=window,
        moment_source=source,
        tail_rule=moments.tail_rule.describe("x") + "|" + moments.tail_rule.describe("y"),
    )


def xi_auto(moments: MomentSet, window: LagWindow, caps: Optional[MomentCaps] = None) -> BoundReport:
    """Same-series specialization: ``nu4^4 + (4 sqrt(2) / (2 kappa' - 1)) nu4^3 sum_k a_k``."""
    kp = window.kappa_prime
    source, nu4_x, sum_x, _, _ = _resolve(moments, caps, kp, need_y=False)
    leading = nu4_x**4
    tail = (4.0 * _SQRT2 / (2 * kp - 1)) * nu4_x**3 * sum_x
    return BoundReport(
        formula="xi_auto",
        value=leading + tail,
        leading_term=leading,
        tail_term=tail,
        window=window,
        moment_source=source,
        tail_rule=moments.tail_rule.describe("x"),
    )


def tau(moments: MomentSet, window: LagWindow, caps: Optional[MomentCaps] = None) -> BoundReport:
    """Sharper same-series bound (no Minkowski step): factor 4 instead of 4 sqrt(2)."""
    kp = window.kappa_prime
    source, nu4_x, sum_x, _, _ = _resolve(moments, caps, kp, need_y=False)
    leading = nu4_x**4
    tail = (4.0 / (2 * kp - 1)) * nu4_x**3 * sum_x
    return BoundReport(
        formula="tau",
        value=leading + tail,
        leading_term=leading,
        tail_term=tail,
        window=window,
        moment_source=source,
        tail_rule=moments.tail_rule.describe("x"),
    )


def tau_tilde(
    moments: MomentSet, h: int, m: int, N: int, caps: Optional[MomentCaps] = None
) -> BoundReport:
    """Lagged covariance bound: tau at the m = n window."""
    report = tau(moments, lag_window(N, h, m, m), caps=caps)
    return BoundReport(
        formula="tau_tilde",
        value=report.value,
        leading_term=report.leading_term,
        tail_term=report.tail_term,
        window=report.window,
        moment_source=report.moment_source,
        tail_rule=report.tail_rule,
    )


class Far1ClosedBounds(NamedTuple):
    coupling_sum_bound: float
    tau_tilde_bound: float
    limit: float


def far1_closed_bounds(xi: float, nu4_eps: float, m: int) -> Far1ClosedBounds:
    """Closed forms for the fAR(1) family with contraction xi and innovation moment nu4_eps.

    coupling_sum_bound = 2 xi / (1 - xi)^2 * nu4_eps
    tau_tilde_bound    = nu4_eps^4 / (1 - xi)^4 * [1 + 8/(1-xi) * g(m)],
                         g(m) = xi for m <= 2, xi^(m-1)/(2m-3) for m > 2
    limit              = nu4_eps^4 / (1 - xi)^4   (m -> infinity)
    """
    xi = float(xi)
    if not 0.0 <= xi < 1.0:
        raise ValueError(f"closed forms need 0 <= xi < 1, got {xi}")
    nu4_eps = check_nonnegative("nu4_eps", nu4_eps)
    m = int(m)
    if m < 1:
        raise ValueError(f"Cartesian power must be positive, got m={m}")
    coupling = 2.0 * xi / (1.0 - xi) ** 2 * nu4_eps
    limit = nu4_eps**4 / (1.0 - xi) ** 4
    g = xi if m <= 2 else xi ** (m - 1) / (2 * m - 3)
    return Far1ClosedBounds(
        coupling_sum_bound=coupling,
        tau_tilde_bound=limit * (1.0 + 8.0 / (1.0 - xi) * g),
        limit=limit,
    )


def _xi_value(xi) -> float:
    return xi.value if isinstance(xi, BoundReport) else float(xi)


def sum_propagation(tau_val: float, f_val: float, xi, window: LagWindow) -> float:
    """Error bound for a plug-in sum ``psi = delta + C^h``:

    ``2 tau / f + 2 m n (2 kappa' - 1) / N' * xi``.
    """
    tau_val = check_nonnegative("tau", tau_val)
    f_val = check_positive("f", f_val)
    xi_val = check_nonnegative("xi", _xi_value(xi))
    w = window
    return 2.0 * tau_val / f_val + 2.0 * w.m * w.n * (2 * w.kappa_prime - 1) / w.n_prime * xi_val


def prod_propagation(
    tau_val: float,
    f_val: float,
    xi,
    window: LagWindow,
    delta_norm: float,
    nu2_x: float,
    nu2_y: float,
) -> float:
    """Error bound for a plug-in product ``psi = delta C^h``:

    ``sqrt(m n (2 kappa' - 1) xi / N') * (sqrt(tau / f) + ||delta||)
    + sqrt(m n tau / f) * nu2(X_0) nu2(Y_0)``.
    """
    tau_val = check_nonnegative("tau", tau_val)
    f_val = check_positive("f", f_val)
    xi_val = check_nonnegative("xi", _xi_value(xi))
    delta_norm = check_nonnegative("delta_norm", delta_norm)
    nu2_x = check_nonnegative("nu2_x", nu2_x)
    nu2_y = check_nonnegative("nu2_y", nu2_y)
    w = window
    mn = w.m * w.n
    first = np.sqrt(mn * (2 * w.kappa_prime - 1) * xi_val / w.n_prime) * (
        np.sqrt(tau_val / f_val) + delta_norm
    )
    second = np.sqrt(mn * tau_val / f_val) * nu2_x * nu2_y
    return float(first + second)


def bound_report_rows(reports) -> list:
    """Serialize BoundReports to header + rows (for CSV/JSON emission)."""
    header = [
        "formula",
        "N",
        "h",
        "m",
        "n",
        "n_prime",
        "kappa_prime",
        "leading_term",
        "tail_term",
        "value",
        "moment_source",
        "tail_rule",
    ]
    rows = []
    for r in reports:
        w = r.window
        rows.append(
            [
                r.formula,
                w.N,
                w.h,
                w.m,
                w.n,
                w.n_prime,
                w.kappa_prime,
                r.leading_term,
                r.tail_term,
                r.value,
                r.moment_source,
                r.tail_rule,
            ]
        )
    return [header] + rows
