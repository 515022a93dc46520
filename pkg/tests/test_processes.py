"""Simulation, couplings, and moment estimation."""

import numpy as np
import pytest

from ftscov import (
    ConfigError,
    GridFunction,
    GridSpace,
    InnovationLaw,
    LinearOp,
    ModelError,
    StabilityError,
    brownian_bridge_law,
    couple,
    degenerate_model,
    estimate_moments,
    far_model,
    fma1_model,
    gaussian_kernel_op,
    iid_model,
    linear_model,
    simulate,
    with_cross_link,
)
from ftscov.processes import causal_weights, child_seed


@pytest.fixture
def space():
    return GridSpace.uniform(8)


def test_innovation_nu4_normalized(space):
    law = brownian_bridge_law(space)
    assert law.nu4() == pytest.approx(1.0, abs=1e-12)
    # the raw Brownian-bridge fourth moment approaches the continuum value (1/20)^(1/4)
    raw = brownian_bridge_law(GridSpace.uniform(256), normalize=None)
    assert raw.nu4() == pytest.approx(0.05**0.25, rel=1e-2)


def test_innovation_rejects_non_psd(space):
    with pytest.raises(ModelError):
        InnovationLaw("gaussian-kernel", LinearOp(space, space, -np.eye(space.d)))


def test_far_model_records_contraction(space):
    model = far_model(space, contraction=0.5)
    assert model.contraction == pytest.approx(0.5, abs=1e-10)


def test_noncontractive_far_rejected(space):
    psi = gaussian_kernel_op(space, 0.25, norm=1.4)
    with pytest.raises(StabilityError):
        far_model(space, ar_ops=(psi,))


def test_simulation_is_seed_deterministic(space):
    model = with_cross_link(far_model(space, contraction=0.5))
    a = simulate(model, 25, 123)
    b = simulate(model, 25, 123)
    c = simulate(model, 25, 124)
    assert np.array_equal(a.xs, b.xs) and np.array_equal(a.ys, b.ys)
    assert not np.array_equal(a.xs, c.xs)


def test_far_with_zero_operator_reproduces_innovations(space):
    model = far_model(space, contraction=0.0)
    bundle = simulate(model, 40, 7)
    assert np.array_equal(bundle.xs, bundle.innovations[bundle.lead :])


def test_degenerate_path_is_constant(space):
    bundle = simulate(degenerate_model(space), 15, 3)
    assert np.all(bundle.xs == bundle.xs[0])


def test_iid_projection_has_no_lag_one_autocovariance(space):
    bundle = simulate(iid_model(space), 2000, 11)
    v = space.weights * np.ones(space.d)
    proj = bundle.xs @ v
    x0, x1 = proj[:-1], proj[1:]
    cov = np.mean((x0 - x0.mean()) * (x1 - x1.mean()))
    se = np.std((x0 - x0.mean()) * (x1 - x1.mean()), ddof=1) / np.sqrt(len(x0))
    assert abs(cov) < 3 * se


def test_couple_full_history_is_exact(space):
    model = far_model(space, contraction=0.5)
    bundle = simulate(model, 20, 5)
    j_terms = bundle.truncation
    exact = couple(model, bundle, 10, j_terms)
    assert np.array_equal(exact.values, bundle.xs[9])
    assert bundle.coupling_shared[(10, j_terms)] == j_terms


def test_couple_records_shared_structure(space):
    model = far_model(space, contraction=0.5)
    bundle = simulate(model, 20, 6)
    for ell in (0, 1, 4):
        couple(model, bundle, 12, ell)
        assert bundle.coupling_shared[(12, ell)] == ell


def test_couple_is_call_order_independent(space):
    model = far_model(space, contraction=0.5)
    b1 = simulate(model, 20, 9)
    b2 = simulate(model, 20, 9)
    v1 = couple(model, b1, 5, 2).values
    couple(model, b2, 11, 2)  # different first request, same fresh stream
    v2 = couple(model, b2, 5, 2).values
    assert np.array_equal(v1, v2)


def test_couple_degenerate_unsupported(space):
    model = degenerate_model(space)
    bundle = simulate(model, 5, 1)
    with pytest.raises(ModelError):
        couple(model, bundle, 2, 1)


def test_couple_order_zero_is_independent_copy(space):
    model = far_model(space, contraction=0.5)
    v = np.ones(space.d)
    wv = space.weights * v
    pairs = np.empty((2000, 2))
    for rep in range(2000):
        bundle = simulate(model, 3, child_seed(777, rep), burn_in=60)
        pairs[rep, 0] = bundle.xs[2] @ wv
        pairs[rep, 1] = couple(model, bundle, 3, 0).values @ wv
    a = pairs[:, 0] - pairs[:, 0].mean()
    b = pairs[:, 1] - pairs[:, 1].mean()
    corr = np.mean(a * b) / (a.std(ddof=1) * b.std(ddof=1))
    assert abs(corr) < 3.0 / np.sqrt(len(a))


def test_coupling_marginal_distribution_matches(space):
    # two-sample KS statistic below the 1% critical value at R = 2000
    model = far_model(space, contraction=0.5)
    v = space.weights * np.ones(space.d)
    orig = np.empty(2000)
    coup = np.empty(2000)
    for rep in range(2000):
        bundle = simulate(model, 5, child_seed(888, rep), burn_in=60)
        orig[rep] = bundle.xs[4] @ v
        coup[rep] = couple(model, bundle, 5, 2).values @ v
    pooled = np.sort(np.concatenate([orig, coup]))
    cdf_a = np.searchsorted(np.sort(orig), pooled, side="right") / len(orig)
    cdf_b = np.searchsorted(np.sort(coup), pooled, side="right") / len(coup)
    ks = np.abs(cdf_a - cdf_b).max()
    critical = 1.628 * np.sqrt(2.0 / 2000.0)
    assert ks < critical


def test_coupling_decay_against_geometric_bound(space):
    model = far_model(space, contraction=0.5)
    moments = estimate_moments(model, 400, 4, 13)
    nu4_eps = model.innovation.nu4()
    for k in range(1, 5):
        bound = 2 * nu4_eps * 0.5**k / (1 - 0.5)
        assert moments.coupling_x[k - 1] <= bound + 3 * moments.coupling_x_se[k - 1]


def test_estimate_moments_point_mass(space):
    rng = np.random.default_rng(4)
    x0 = GridFunction(space, rng.standard_normal(space.d))
    model = degenerate_model(space, fixed_value=x0)
    moments = estimate_moments(model, 50, 5, 2)
    assert moments.nu2_x == pytest.approx(x0.norm(), abs=1e-12)
    assert moments.nu4_x == pytest.approx(x0.norm(), abs=1e-12)
    assert np.all(moments.coupling_x == 0.0)


def test_estimate_moments_random_degenerate_rejected(space):
    with pytest.raises(ModelError):
        estimate_moments(degenerate_model(space), 50, 5, 2)


def test_estimate_moments_requires_replications(space):
    with pytest.raises(ConfigError):
        estimate_moments(far_model(space), 1, 5, 0)


def test_estimate_moments_far_chain_bound(space):
    # nu4(X_1) <= nu4(eps) / (1 - xi) = 2 at xi = 0.5
    model = far_model(space, contraction=0.5)
    moments = estimate_moments(model, 2000, 8, 21)
    assert moments.nu4_x <= 2.0 + 3 * moments.nu4_x_se

    # coupling sum <= 2*xi/(1-xi)^2 * nu4(eps) = 4 with Monte Carlo margin
    total = moments.coupling_sum("x", 1)
    se_total = float(np.sum(moments.coupling_x_se))
    assert total <= 4.0 + 3 * se_total


def test_linear_model_simulates_and_couples(space):
    model = linear_model(space, scale=0.4, ratio=0.5)
    bundle = simulate(model, 30, 17)
    assert bundle.xs.shape == (30, space.d)
    val = couple(model, bundle, 10, 3)
    assert val.values.shape == (space.d,)
    # shared part dominates once ell reaches the series length
    exact = couple(model, bundle, 10, bundle.truncation)
    assert np.array_equal(exact.values, bundle.xs[9])


def test_fma1_causal_weights(space):
    model = fma1_model(space, ma_norm=0.4)
    weights = causal_weights(model)
    assert len(weights) == 2  # identity plus the single MA term
    beta = model.ma_ops[0]
    assert np.allclose(weights[1], beta.kernel, atol=1e-14)


def test_cross_link_series_relationship(space):
    model = with_cross_link(far_model(space, contraction=0.5), theta_norm=0.7)
    bundle = simulate(model, 30, 19)
    theta = model.cross_link.theta
    recon = bundle.xs @ (theta.kernel * space.weights[None, :]).T + bundle.noise
    assert np.allclose(bundle.ys, recon, atol=1e-12)


def test_moment_estimates_match_gaussian_oracle(space):
    # Gaussian fourth-moment identity as an independent oracle for nu4
    from ftscov import analytic_nu_moments

    model = with_cross_link(far_model(space, contraction=0.5), theta_norm=0.7)
    moments = estimate_moments(model, 4000, 6, 23)
    nu2_x, nu4_x, nu2_y, nu4_y = analytic_nu_moments(model)
    assert moments.nu4_x == pytest.approx(nu4_x, abs=4 * moments.nu4_x_se)
    assert moments.nu4_y == pytest.approx(nu4_y, abs=4 * moments.nu4_y_se)
    assert moments.nu2_x == pytest.approx(nu2_x, rel=0.05)
    assert moments.nu2_y == pytest.approx(nu2_y, rel=0.05)
