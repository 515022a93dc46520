"""Eigendecomposition, sign alignment, perturbation inequalities, worked eigenstructure cases."""

import numpy as np
import pytest

from ftscov import (
    BlockOp,
    DimensionError,
    GridFunction,
    GridSpace,
    LinearOp,
    ProductElement,
    analytic_block_cov,
    analytic_cov_far1,
    commuting_block_eigmax,
    commuting_far_eigbound,
    commuting_far_model,
    degenerate_model,
    eig,
    empirical_auto_cov,
    far_model,
    iid_model,
    nuclear_identity_check,
    perturbation_checks,
    product_tensor,
    sign_align,
    simulate,
)
from ftscov.processes import InnovationLaw, child_seed


@pytest.fixture
def space():
    return GridSpace.uniform(8)


def _rank_one_block(space, rng):
    x = GridFunction(space, rng.standard_normal(space.d))
    x = (1.0 / x.norm()) * x
    return x, product_tensor(ProductElement((x,)), ProductElement((x,)))


def _spectrum_innovation(space, lams):
    """Innovation whose covariance has the prescribed eigenvalues on the grid basis."""
    kernel = np.diag(np.asarray(lams, dtype=float)) / np.outer(
        space.sqrt_weights, space.sqrt_weights
    )
    return InnovationLaw("gaussian-kernel", LinearOp(space, space, kernel))


def test_eig_rank_one(space):
    rng = np.random.default_rng(0)
    _, block = _rank_one_block(space, rng)
    system = eig(block)
    assert system.values[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.abs(system.values[1:]) < 1e-12)


def test_eig_degenerate_block_scaling(space):
    # all-equal blocks: nonzero eigenvalues are m * lambda_j(1)
    model = degenerate_model(space)
    lam_one = np.sort(np.clip(np.linalg.eigvalsh(analytic_cov_far1(model).weighted()), 0, None))[::-1]
    system = eig(analytic_block_cov(model, 0, 3, 3))
    nonzero = system.values[system.values > 1e-12]
    assert len(nonzero) == np.sum(lam_one > 1e-12)
    assert np.allclose(nonzero, 3 * lam_one[: len(nonzero)], rtol=1e-8)


def test_eig_matches_dense_oracle(space):
    rng = np.random.default_rng(1)
    raw = rng.standard_normal((2 * space.d, 2 * space.d))
    weighted = raw @ raw.T  # PSD
    sw = np.tile(space.sqrt_weights, 2)
    flat = weighted / sw[:, None] / sw[None, :]
    block = BlockOp.from_flat(flat, space, space, m=2, n=2)
    system = eig(block)
    oracle = np.linalg.eigvalsh(weighted)[::-1]
    assert np.abs(system.values - oracle).max() < 1e-10


def test_eig_orthonormal_functions(space):
    model = far_model(space, contraction=0.5)
    system = eig(analytic_block_cov(model, 0, 2, 2))
    from ftscov import product_inner

    for i in range(6):
        for j in range(6):
            expected = 1.0 if i == j else 0.0
            assert abs(product_inner(system.functions[i], system.functions[j]) - expected) < 1e-8


def test_eig_reconstructs_operator(space):
    model = far_model(space, contraction=0.5)
    cov = analytic_block_cov(model, 0, 2, 2)
    system = eig(cov)
    recon = np.zeros_like(cov.blocks)
    for lam, func in zip(system.values, system.functions):
        recon += lam * product_tensor(func, func).blocks
    assert BlockOp(space, space, cov.blocks - recon).hs_norm() < 1e-8


def test_eig_rejects_asymmetric(space):
    rng = np.random.default_rng(2)
    block = BlockOp(space, space, rng.standard_normal((1, 1, space.d, space.d)))
    with pytest.raises(DimensionError):
        eig(block)


def test_eig_gap_and_cap_sequences(space):
    lams = 1.0 / np.arange(1.0, space.d + 1.0) ** 2
    system = eig(BlockOp.single(_spectrum_innovation(space, lams).covariance))
    # alpha_1 = lam_1 - lam_2; alpha_2 = min(lam_1 - lam_2, lam_2 - lam_3)
    assert system.gaps[0] == pytest.approx(lams[0] - lams[1], abs=1e-12)
    assert system.gaps[1] == pytest.approx(min(lams[0] - lams[1], lams[1] - lams[2]), abs=1e-12)
    # Lambda_k closed form for lambda_j = j^{-2}: k (k+1)^2 / (m (2 + 1/k)), m = 1
    for k in (1, 2, 3):
        expected = k * (k + 1) ** 2 / (2 + 1.0 / k)
        assert system.lambda_caps[k - 1] == pytest.approx(expected, rel=1e-10)
    assert system.lambda_caps[1] == pytest.approx(7.2, rel=1e-10)


def test_degenerate_lambda_cap_scales_with_power(space):
    # eigenvalues m * j^{-2} for the all-equal block operator built from a j^{-2} spectrum
    lams = 1.0 / np.arange(1.0, space.d + 1.0) ** 2
    model = degenerate_model(space, innovation=_spectrum_innovation(space, lams))
    m = 3
    system = eig(analytic_block_cov(model, 0, m, m))
    for k in (1, 2):
        expected = k * (k + 1) ** 2 / (m * (2 + 1.0 / k))
        assert system.lambda_caps[k - 1] == pytest.approx(expected, rel=1e-8)


def test_sign_align_convention(space):
    rng = np.random.default_rng(3)
    c = ProductElement((GridFunction(space, rng.standard_normal(space.d)),))
    flipped = sign_align(-1.0 * c, c)
    assert np.allclose(flipped.components[0].values, c.components[0].values, atol=1e-14)

    # orthogonal estimate: sgn(0) = +1 keeps it unchanged
    f = GridFunction(space, np.sqrt(2) * np.sin(np.pi * space.nodes))
    g = GridFunction(space, np.sqrt(2) * np.sin(2 * np.pi * space.nodes))
    fe, ge = ProductElement((f,)), ProductElement((g,))
    from ftscov import product_inner

    assert abs(product_inner(fe, ge)) < 1e-12
    aligned = sign_align(fe, ge)
    assert np.array_equal(aligned.components[0].values, f.values)


def test_sign_align_picks_closer_candidate(space):
    rng = np.random.default_rng(4)
    for _ in range(20):
        c_hat = ProductElement((GridFunction(space, rng.standard_normal(space.d)),))
        c = ProductElement((GridFunction(space, rng.standard_normal(space.d)),))
        aligned = sign_align(c_hat, c)
        assert (aligned - c).norm() <= ((-1.0 * aligned) - c).norm() + 1e-12


def test_perturbation_checks_identical_operators(space):
    model = far_model(space, contraction=0.5)
    cov = analytic_block_cov(model, 0, 1, 1)
    system = eig(cov)
    report = perturbation_checks(system, system, cov, cov, k_max=4)
    assert report.delta_op == 0.0
    assert report.eigenvalue_slack == 0.0
    for _, slack in report.function_slacks:
        assert slack is None or slack >= 0.0
    assert report.all_hold()


def test_perturbation_checks_scalar_case():
    sp = GridSpace(nodes=np.array([0.5]), weights=np.array([1.0]))
    c = BlockOp.single(LinearOp(sp, sp, np.array([[2.0]])))
    c_hat = BlockOp.single(LinearOp(sp, sp, np.array([[2.5]])))
    report = perturbation_checks(eig(c_hat), eig(c), c_hat, c, k_max=1)
    assert report.delta_op == pytest.approx(0.5, abs=1e-14)
    assert report.eigenvalue_slack == pytest.approx(0.0, abs=1e-14)


def test_perturbation_checks_on_far_replications(space):
    model = far_model(space, contraction=0.5)
    truth_op = analytic_block_cov(model, 0, 1, 1)
    truth = eig(truth_op)
    for rep in range(30):
        bundle = simulate(model, 400, child_seed(55, rep))
        est_op = empirical_auto_cov(bundle.xs, 0, 1, space=space).op
        report = perturbation_checks(eig(est_op), truth, est_op, truth_op, k_max=5)
        assert report.all_hold(), f"violation at replication {rep}: {report.min_slack()}"


def test_nuclear_identity(space):
    model = far_model(space, contraction=0.5)
    for m in (1, 2, 4, 8):
        lhs, rhs = nuclear_identity_check(model, m)
        assert abs(lhs - rhs) <= 1e-8 * rhs

    # iid, m = 3: block-diagonal gives exactly 3 ||C_eps||_N
    from ftscov import op_norms

    model_iid = iid_model(space)
    lhs, rhs = nuclear_identity_check(model_iid, 3)
    c_eps_nuc = op_norms(model_iid.innovation.effective_covariance()).nuclear
    assert lhs == pytest.approx(3 * c_eps_nuc, rel=1e-10)
    assert rhs == pytest.approx(3 * c_eps_nuc, rel=1e-12)


def test_commuting_far_eigbound_values():
    assert commuting_far_eigbound(0.5, 3) == pytest.approx(2.0, abs=1e-12)
    assert commuting_far_eigbound(0.5, 10**6) == pytest.approx(3.0, abs=1e-9)
    with pytest.raises(ValueError):
        commuting_far_eigbound(1.0, 3)
    with pytest.raises(ValueError):
        commuting_far_eigbound(0.0, 3)


def test_commuting_far_eigbound_dense_oracle():
    # diagonal commuting model, d = 10, psi_j = 0.5, m = 5: every invariant block obeys the cap
    space = GridSpace.uniform(10)
    model = commuting_far_model(space, psi_values=0.5)
    lam_one = model.innovation.eigenvalues() / (1.0 - 0.25)
    m = 5
    factor = commuting_far_eigbound(0.5, m)
    for j in range(space.d):
        emax = commuting_block_eigmax(0.5, lam_one[j], m)
        assert emax <= factor * lam_one[j] + 1e-8


def test_commuting_model_block_structure(space):
    # blocks of the analytic covariance are psi^{|i-j|} C_X in the shared eigenbasis
    model = commuting_far_model(space, psi_values=0.5)
    block = analytic_block_cov(model, 0, 2, 2)
    c_x = analytic_cov_far1(model).kernel
    assert np.allclose(block.blocks[0, 0], c_x, atol=1e-10)
    psi = model.ar_ops[0]
    from ftscov import compose

    expected = compose(psi, analytic_cov_far1(model)).kernel
    assert np.allclose(block.blocks[0, 1], expected, atol=1e-10)
    assert np.allclose(block.blocks[1, 0], expected.T, atol=1e-10)
