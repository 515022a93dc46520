"""Bound evaluators: closed forms, brute-force summation oracles, monotonicity."""

import numpy as np
import pytest

from ftscov import (
    InsufficientMomentsError,
    LagWindow,
    MomentCaps,
    MomentSet,
    TailRule,
    far1_closed_bounds,
    lag_window,
    prod_propagation,
    sum_propagation,
    tau,
    tau_tilde,
    xi_auto,
    xi_cross,
)

SQRT2 = np.sqrt(2.0)


def _geometric_moments(ratio=0.5, horizon=40, nu=1.0):
    coupling = ratio ** np.arange(1, horizon + 1)
    return MomentSet(
        nu2_x=nu,
        nu4_x=nu,
        coupling_x=coupling,
        tail_rule=TailRule("geometric", ratio, ratio, horizon),
        nu2_y=nu,
        nu4_y=nu,
        coupling_y=coupling.copy(),
    )


def _zero_moments(nu_x=1.0, nu_y=1.0, horizon=10):
    zeros = np.zeros(horizon)
    return MomentSet(
        nu2_x=nu_x,
        nu4_x=nu_x,
        coupling_x=zeros,
        tail_rule=TailRule("geometric", 0.0, 0.0, horizon),
        nu2_y=nu_y,
        nu4_y=nu_y,
        coupling_y=zeros.copy(),
    )


def _window(kappa_prime, m=1, n=1):
    return LagWindow(
        N=1000, h=0, m=m, n=n, n_prime=900, kappa=kappa_prime, kappa_prime=kappa_prime
    )


def test_xi_cross_vanishing_couplings():
    ms = _zero_moments(nu_x=1.3, nu_y=0.7)
    rep = xi_cross(ms, _window(1))
    assert rep.value == pytest.approx(1.3**2 * 0.7**2, abs=1e-12)
    assert rep.tail_term == 0.0


def test_xi_cross_geometric_closed_form():
    # unit moments, coupling 0.5^k on both series, kappa' = 1:
    # xi = 1 + 2 sqrt(2) * sum_k (0.5^k + 0.5^k) = 1 + 4 sqrt(2)
    ms = _geometric_moments()
    rep = xi_cross(ms, _window(1))
    assert rep.value == pytest.approx(1 + 4 * SQRT2, abs=1e-12)
    assert rep.value == pytest.approx(rep.leading_term + rep.tail_term, abs=1e-12)


def test_xi_cross_against_brute_force_summation():
    ms = _geometric_moments()
    for kp in (1, 2, 5):
        rep = xi_cross(ms, _window(kp))
        brute = 1.0 + (2 * SQRT2 / (2 * kp - 1)) * sum(
            1.0 * 0.5**k + 1.0 * 0.5**k for k in range(kp, 201)
        )
        assert rep.value == pytest.approx(brute, abs=1e-10)


def test_tau_examples_and_ordering():
    ms = _zero_moments()
    assert tau(ms, _window(1)).value == pytest.approx(1.0, abs=1e-12)

    geo = _geometric_moments()
    t = tau(geo, _window(1))
    x = xi_auto(geo, _window(1))
    assert t.value == pytest.approx(5.0, abs=1e-12)
    assert x.value == pytest.approx(1 + 4 * SQRT2, abs=1e-12)
    assert t.value <= x.value


def test_tau_le_xi_auto_everywhere():
    rng = np.random.default_rng(0)
    for _ in range(20):
        horizon = 15
        coupling = np.abs(rng.standard_normal(horizon)) * 0.5 ** np.arange(1, horizon + 1)
        ms = MomentSet(
            nu2_x=float(rng.uniform(0.5, 2.0)),
            nu4_x=float(rng.uniform(0.5, 2.0)),
            coupling_x=coupling,
            tail_rule=TailRule("geometric", 0.5, None, horizon),
        )
        kp = int(rng.integers(1, 8))
        assert tau(ms, _window(kp)).value <= xi_auto(ms, _window(kp)).value


def test_tau_tilde_delegates_to_tau():
    ms = _geometric_moments()
    t1 = tau_tilde(ms, 2, 3, 100)
    t2 = tau(ms, lag_window(100, 2, 3, 3))
    assert t1.value == t2.value
    assert t1.leading_term == t2.leading_term
    assert t1.tail_term == t2.tail_term
    assert t1.formula == "tau_tilde"


def test_far1_closed_bound_values():
    cb = far1_closed_bounds(0.5, 1.0, 1)
    assert cb.coupling_sum_bound == pytest.approx(4.0, abs=1e-12)
    assert cb.tau_tilde_bound == pytest.approx(144.0, abs=1e-12)
    assert cb.limit == pytest.approx(16.0, abs=1e-12)
    assert far1_closed_bounds(0.5, 1.0, 2).tau_tilde_bound == pytest.approx(144.0, abs=1e-12)
    assert far1_closed_bounds(0.5, 1.0, 4).tau_tilde_bound == pytest.approx(22.4, abs=1e-12)

    iid = far1_closed_bounds(0.0, 1.0, 1)
    assert iid.coupling_sum_bound == 0.0
    assert iid.tau_tilde_bound == 1.0
    assert iid.limit == 1.0


def test_far1_closed_bound_limit_attained():
    limit = far1_closed_bounds(0.5, 1.0, 1).limit
    value = far1_closed_bounds(0.5, 1.0, 64).tau_tilde_bound
    assert abs(value - limit) / limit < 0.01


def test_far1_closed_bound_domain():
    with pytest.raises(ValueError):
        far1_closed_bounds(1.0, 1.0, 1)
    with pytest.raises(ValueError):
        far1_closed_bounds(-0.1, 1.0, 1)


def test_bounds_monotone_in_kappa_prime():
    ms = _geometric_moments()
    xi_prev = tau_prev = np.inf
    for kp in range(1, 12):
        x = xi_auto(ms, _window(kp)).value
        t = tau(ms, _window(kp)).value
        assert x <= xi_prev + 1e-12
        assert t <= tau_prev + 1e-12
        xi_prev, tau_prev = x, t


def test_tail_rule_errors_when_unusable():
    horizon = 5
    coupling = 0.5 ** np.arange(1, horizon + 1)
    ms = MomentSet(
        nu2_x=1.0,
        nu4_x=1.0,
        coupling_x=coupling,
        tail_rule=TailRule("geometric", None, None, horizon),
    )
    with pytest.raises(InsufficientMomentsError):
        tau(ms, _window(horizon + 2))
    # an exactly vanished sequence needs no tail rule
    ms_zero = MomentSet(
        nu2_x=1.0,
        nu4_x=1.0,
        coupling_x=np.zeros(horizon),
        tail_rule=TailRule("geometric", None, None, horizon),
    )
    assert tau(ms_zero, _window(horizon + 2)).value == pytest.approx(1.0, abs=1e-12)


def test_coupling_sum_beyond_horizon_extrapolates():
    ms = _geometric_moments(horizon=6)
    # start beyond the horizon: geometric continuation from the last point
    direct = sum(0.5**k for k in range(9, 200))
    assert ms.coupling_sum("x", 9) == pytest.approx(direct, rel=1e-10)


def test_moment_caps_replace_estimates():
    ms = _geometric_moments()
    caps = MomentCaps(nu4_x=2.0, coupling_sum_x=4.0)
    rep = tau(ms, _window(1))
    capped = tau(ms, _window(1), caps=caps)
    assert capped.moment_source == "capped"
    assert rep.moment_source == "estimated"
    assert capped.value == pytest.approx(2.0**4 + 4 * 2.0**3 * 4.0, abs=1e-12)


def test_sum_propagation_examples():
    win = LagWindow(N=100, h=0, m=1, n=1, n_prime=20, kappa=0, kappa_prime=1)
    assert sum_propagation(0.0, 1.0, 0.0, win) == 0.0
    assert sum_propagation(1.0, 100.0, 2.0, win) == pytest.approx(0.22, abs=1e-12)
    with pytest.raises(ValueError):
        sum_propagation(1.0, 0.0, 1.0, win)


def test_prod_propagation_examples():
    win = LagWindow(N=1, h=0, m=1, n=1, n_prime=1, kappa=0, kappa_prime=1)
    assert prod_propagation(0.0, 1.0, 1.0, win, 0.5, 1.0, 1.0) == pytest.approx(0.5, abs=1e-12)
    assert prod_propagation(1.0, 1.0, 1.0, win, 1.0, 1.0, 1.0) == pytest.approx(3.0, abs=1e-12)
    with pytest.raises(ValueError):
        prod_propagation(1.0, 1.0, 1.0, win, -0.1, 1.0, 1.0)


def test_duplicate_slow_path_oracles():
    # re-derived formulas evaluated independently on random inputs
    rng = np.random.default_rng(1)
    for _ in range(25):
        tau_v = float(rng.uniform(0, 3))
        f_v = float(rng.uniform(0.5, 50))
        xi_v = float(rng.uniform(0, 5))
        m, n, kp = (int(rng.integers(1, 4)) for _ in range(3))
        npr = int(rng.integers(5, 60))
        win = LagWindow(N=100, h=0, m=m, n=n, n_prime=npr, kappa=kp, kappa_prime=kp)
        slow_sum = 2 * tau_v / f_v + 2 * m * n * (2 * kp - 1) / npr * xi_v
        assert sum_propagation(tau_v, f_v, xi_v, win) == pytest.approx(slow_sum, rel=1e-12)
        d_v, n2x, n2y = (float(rng.uniform(0, 2)) for _ in range(3))
        slow_prod = np.sqrt(m * n * (2 * kp - 1) * xi_v / npr) * (
            np.sqrt(tau_v / f_v) + d_v
        ) + np.sqrt(m * n * tau_v / f_v) * n2x * n2y
        assert prod_propagation(tau_v, f_v, xi_v, win, d_v, n2x, n2y) == pytest.approx(
            slow_prod, rel=1e-12
        )
