"""Monte Carlo orchestration: bound-verification experiments and named check suites.

Replications are distributed over a process pool; every replication draws from
its own counter-based stream keyed by (seed, sample-size index, replication),
and aggregation runs in replication order, so serial and parallel execution
produce identical output bytes.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import bounds as bounds_mod
from .config import ExperimentConfig
from .covariance import analytic_block_cov, empirical_cross_cov, estimation_error
from .errors import ConfigError, FtscovError, WindowError
from .product import BlockOp, LagWindow, lag_window
from .processes import ModelSpec, child_seed, estimate_moments, simulate

_PATH_STREAM = 0
_MOMENT_STREAM = 1


@dataclass(frozen=True)
class MCCell:
    """One experiment cell: normalized empirical error against its bound."""

    N: int
    h: int
    m: int
    n: int
    n_prime: int
    kappa_prime: int
    empirical: float
    se: float
    bound: float
    passed: bool
    formula: str
    moment_source: str
    tail_rule: str


_CSV_HEADER = (
    "N,h,m,n,n_prime,kappa_prime,empirical,se,bound,passed,formula,moment_source,tail_rule"
)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


@dataclass
class MCSummary:
    """All cells of one bound-verification run."""

    rows: List[MCCell]

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_csv_string(self) -> str:
        lines = [_CSV_HEADER]
        for r in self.rows:
            lines.append(
                ",".join(
                    _fmt(v)
                    for v in (
                        r.N,
                        r.h,
                        r.m,
                        r.n,
                        r.n_prime,
                        r.kappa_prime,
                        r.empirical,
                        r.se,
                        r.bound,
                        r.passed,
                        r.formula,
                        r.moment_source,
                        r.tail_rule,
                    )
                )
            )
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> dict:
        return {
            "schema_version": 1,
            "all_passed": self.all_passed,
            "rows": [vars(r) for r in self.rows],
        }


def _select_bound(config: ExperimentConfig, moments, window: LagWindow):
    cross = config.model.has_cross
    target = config.bound_target
    caps = config.moment_caps
    if cross:
        if target in ("tau", "tau_tilde"):
            raise ConfigError(f"bound target {target!r} applies only to a single series")
        return bounds_mod.xi_cross(moments, window, caps=caps)
    if target == "xi":
        return bounds_mod.xi_auto(moments, window, caps=caps)
    if target == "tau":
        return bounds_mod.tau(moments, window, caps=caps)
    if target == "tau_tilde" or (target == "auto" and window.m == window.n):
        if window.m != window.n:
            raise ConfigError("tau_tilde needs m == n")
        return bounds_mod.tau_tilde(moments, window.h, window.m, window.N, caps=caps)
    return bounds_mod.tau(moments, window, caps=caps)


# Worker-side state, set once per process by the pool initializer (also used by
# the serial path so both code paths run the identical per-replication function).
_WORKER: dict = {}


def _init_worker(model: ModelSpec, n_value: int, n_index: int, cells, truth_blocks, seed: int):
    _WORKER["model"] = model
    _WORKER["n_value"] = n_value
    _WORKER["n_index"] = n_index
    _WORKER["cells"] = cells
    _WORKER["truths"] = [
        BlockOp(model.space, model.space, blk) for blk in truth_blocks
    ]
    _WORKER["seed"] = seed


def _rep_errors(rep: int):
    model = _WORKER["model"]
    bundle = simulate(
        model, _WORKER["n_value"], child_seed(_WORKER["seed"], _PATH_STREAM, _WORKER["n_index"], rep)
    )
    ys = bundle.ys if model.has_cross else bundle.xs
    out = np.empty(len(_WORKER["cells"]))
    for idx, (h, m, n) in enumerate(_WORKER["cells"]):
        est = empirical_cross_cov(bundle.xs, ys, h, m, n, space=model.space)
        out[idx] = estimation_error(est, _WORKER["truths"][idx])
    return out


def _errors_for_group(config: ExperimentConfig, n_value, n_index, cells, truth_blocks):
    args = (config.model, n_value, n_index, cells, truth_blocks, config.seed)
    reps = range(config.replications)
    if config.jobs <= 1:
        _init_worker(*args)
        results = [_rep_errors(r) for r in reps]
    else:
        chunk = max(1, config.replications // (config.jobs * 4))
        with ProcessPoolExecutor(
            max_workers=config.jobs, initializer=_init_worker, initargs=args
        ) as ex:
            results = list(ex.map(_rep_errors, reps, chunksize=chunk))
    return np.stack(results)


def run_bound_verification(config: ExperimentConfig) -> MCSummary:
    """Simulate, estimate, and compare normalized errors against the bound in every cell.

    The moments feeding the bounds come from an independent seed branch, so the
    bound is not fitted to the same noise as the error estimate.
    """
    model = config.model
    cross = model.has_cross

    windows = {}
    for n_value in config.sample_sizes:
        for h in config.lags:
            for m in config.powers_m:
                for n in config.powers_n:
                    try:
                        windows[(n_value, h, m, n)] = lag_window(n_value, h, m, n)
                    except WindowError as exc:
                        raise ConfigError(f"inadmissible cell (N={n_value}, h={h}, m={m}, n={n}): {exc}")

    moments = estimate_moments(
        model, config.moment_replications, config.horizon, child_seed(config.seed, _MOMENT_STREAM)
    )

    rows: List[MCCell] = []
    for n_index, n_value in enumerate(config.sample_sizes):
        cells = [
            (h, m, n)
            for h in config.lags
            for m in config.powers_m
            for n in config.powers_n
        ]
        truth_blocks = [
            analytic_block_cov(model, h, m, n, cross=cross).blocks for (h, m, n) in cells
        ]
        errors = _errors_for_group(config, n_value, n_index, cells, truth_blocks)
        for idx, (h, m, n) in enumerate(cells):
            win = windows[(n_value, h, m, n)]
            factor = win.n_prime / (win.m * win.n * (2 * win.kappa_prime - 1))
            errs = errors[:, idx]
            empirical = float(factor * np.mean(errs))
            se = float(factor * np.std(errs, ddof=1) / np.sqrt(len(errs)))
            report = _select_bound(config, moments, win)
            rows.append(
                MCCell(
                    N=n_value,
                    h=h,
                    m=m,
                    n=n,
                    n_prime=win.n_prime,
                    kappa_prime=win.kappa_prime,
                    empirical=empirical,
                    se=se,
                    bound=report.value,
                    passed=bool(empirical <= report.value + 3.0 * se),
                    formula=report.formula,
                    moment_source=report.moment_source,
                    tail_rule=report.tail_rule,
                )
            )
    return MCSummary(rows=rows)


def bound_reports(config: ExperimentConfig) -> list:
    """Evaluate the configured bound over the whole experiment grid (no simulation)."""
    moments = estimate_moments(
        config.model, config.moment_replications, config.horizon, child_seed(config.seed, _MOMENT_STREAM)
    )
    reports = []
    for n_value in config.sample_sizes:
        for h in config.lags:
            for m in config.powers_m:
                for n in config.powers_n:
                    try:
                        win = lag_window(n_value, h, m, n)
                    except WindowError as exc:
                        raise ConfigError(
                            f"inadmissible cell (N={n_value}, h={h}, m={m}, n={n}): {exc}"
                        )
                    reports.append(_select_bound(config, moments, win))
    return reports


# ---------------------------------------------------------------------------
# Named check suites


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class SuiteResult:
    suite: str
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_status(self) -> int:
        return 0 if self.passed else 1

    def to_json_obj(self) -> dict:
        return {
            "schema_version": 1,
            "suite": self.suite,
            "passed": self.passed,
            "checks": [vars(c) for c in self.checks],
        }

    def report_lines(self) -> List[str]:
        lines = []
        for c in self.checks:
            lines.append(f"{'PASS' if c.passed else 'FAIL'} {self.suite}.{c.name}: {c.detail}")
        lines.append(f"suite {self.suite}: {'all checks passed' if self.passed else 'FAILURES'}")
        return lines


def _check(name, passed, detail) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=str(detail))


def _suite_invariants(seed: int) -> List[CheckResult]:
    from .grid import GridSpace, GridFunction, adjoint, op_norms, tensor
    from .product import ProductElement, embed, product_tensor
    from .processes import far_model, with_cross_link

    rng = np.random.default_rng(seed)
    space = GridSpace.uniform(16)
    checks = []

    x = GridFunction(space, rng.standard_normal(16))
    y = GridFunction(space, rng.standard_normal(16))
    dev = abs(op_norms(tensor(x, y)).hilbert_schmidt - x.norm() * y.norm())
    checks.append(_check("tensor_hs_identity", dev < 1e-10, f"deviation {dev:.2e}"))

    from .grid import LinearOp

    a = LinearOp(space, space, rng.standard_normal((16, 16)))
    dev = float(np.abs(adjoint(adjoint(a)).kernel - a.kernel).max())
    checks.append(_check("adjoint_involution", dev == 0.0, f"max deviation {dev:.2e}"))

    norms = op_norms(a)
    chain = norms.operator <= norms.hilbert_schmidt + 1e-10 and norms.hilbert_schmidt <= norms.nuclear + 1e-10
    checks.append(_check("norm_chain", chain, f"{norms.operator:.4f} <= {norms.hilbert_schmidt:.4f} <= {norms.nuclear:.4f}"))

    comps = tuple(GridFunction(space, rng.standard_normal(16)) for _ in range(3))
    pe = ProductElement(comps)
    dev = abs(pe.norm() ** 2 - sum(c.norm() ** 2 for c in comps))
    checks.append(_check("product_pythagoras", dev < 1e-12, f"deviation {dev:.2e}"))

    ok = True
    worst = ""
    for n_value in (20, 50):
        for h in range(-5, 6):
            for m in range(1, 5):
                if abs(h) <= n_value - m:
                    win = lag_window(n_value, h, m, m)
                    if win.n_prime != n_value - abs(h) - m + 1 or win.kappa_prime != max(1, m + abs(h) - 1):
                        ok = False
                        worst = f"(N={n_value},h={h},m={m})"
    checks.append(_check("window_consistency", ok, worst or "N' and kappa' match the m = n closed forms"))

    model = with_cross_link(far_model(GridSpace.uniform(8), contraction=0.5))
    bundle = simulate(model, 30, seed)
    dev = 0.0
    for h, m, n in ((0, 1, 1), (1, 2, 1), (-2, 1, 3), (3, 2, 2)):
        est = empirical_cross_cov(bundle.xs, bundle.ys, h, m, n, space=model.space)
        rev = empirical_cross_cov(bundle.ys, bundle.xs, -h, n, m, space=model.space)
        dev = max(dev, float(np.abs(est.op.adjoint().blocks - rev.op.blocks).max()))
    checks.append(_check("estimator_adjoint_identity", dev < 1e-12, f"max deviation {dev:.2e}"))

    xs = bundle.xs[:5]
    est = empirical_cross_cov(xs, xs, 1, 2, 1, space=model.space)
    win = est.window
    acc = np.zeros_like(est.op.blocks)
    for k in range(win.k_start, win.k_stop + 1):
        xv = embed(xs, k, 2, space=model.space).stacked_values()
        yv = embed(xs, k + 1, 1, space=model.space).stacked_values()
        acc += np.einsum("ia,jb->ijab", yv, xv)
    dev = float(np.abs(acc / win.n_prime - est.op.blocks).max())
    checks.append(_check("estimator_brute_force", dev < 1e-12, f"max deviation {dev:.2e}"))

    pe = embed(bundle.xs, 7, 3, space=model.space)
    dev = abs(pe.norm() ** 2 - sum(c.norm() ** 2 for c in pe.components))
    checks.append(_check("embed_norm_identity", dev < 1e-12, f"deviation {dev:.2e}"))

    long_bundle = simulate(model, 2000, seed + 1)
    v = np.ones(model.space.d)
    proj = long_bundle.xs @ (model.space.weights * v)
    half = len(proj) // 2
    diff = abs(proj[:half].mean() - proj[half:].mean())
    se = np.sqrt(proj[:half].var(ddof=1) / half + proj[half:].var(ddof=1) / half)
    checks.append(_check("stationarity_windows", diff < 3 * se, f"window mean diff {diff:.4f} vs 3*SE {3*se:.4f}"))

    mean_dev = abs(proj.mean())
    se_all = proj.std(ddof=1) / np.sqrt(len(proj))
    checks.append(_check("centering", mean_dev < 3 * se_all, f"|mean| {mean_dev:.4f} vs 3*SE {3*se_all:.4f}"))
    return checks


def _suite_eigen(seed: int) -> List[CheckResult]:
    from .covariance import analytic_cov_far1
    from .grid import GridSpace, op_norms
    from .processes import degenerate_model, far_model, commuting_far_model
    from .spectral import (
        EigenSystem,
        commuting_block_eigmax,
        commuting_far_eigbound,
        eig,
        nuclear_identity_check,
        perturbation_checks,
    )
    from .product import product_tensor

    rng = np.random.default_rng(seed)
    checks = []
    space = GridSpace.uniform(8)
    model = far_model(space, contraction=0.5)

    cov = analytic_block_cov(model, 0, 2, 2)
    system = eig(cov)
    recon = np.zeros_like(cov.blocks)
    for lam, func in zip(system.values, system.functions):
        recon += lam * product_tensor(func, func).blocks
    dev = BlockOp(space, space, cov.blocks - recon).hs_norm()
    checks.append(_check("eig_reconstruction", dev < 1e-8, f"reconstruction error {dev:.2e}"))

    dense = np.linalg.eigvalsh(cov.weighted_flat())[::-1]
    dev = float(np.abs(dense - system.values).max())
    checks.append(_check("eig_dense_oracle", dev < 1e-10, f"max eigenvalue deviation {dev:.2e}"))

    truth_op = analytic_block_cov(model, 0, 1, 1)
    truth = eig(truth_op)
    worst = np.inf
    for rep in range(25):
        bundle = simulate(model, 400, child_seed(seed, 7, rep))
        est_op = empirical_cross_cov(bundle.xs, bundle.xs, 0, 1, 1, space=space).op
        report = perturbation_checks(eig(est_op), truth, est_op, truth_op, k_max=5)
        worst = min(worst, report.min_slack())
    checks.append(_check("perturbation_inequalities", worst >= -1e-8, f"min slack {worst:.2e} over 25 replications"))

    ok = True
    detail = []
    for m in (1, 2, 4):
        lhs, rhs = nuclear_identity_check(model, m)
        detail.append(f"m={m}: {abs(lhs - rhs) / rhs:.2e}")
        ok = ok and abs(lhs - rhs) <= 1e-8 * rhs
    checks.append(_check("nuclear_identity", ok, "; ".join(detail)))

    dmodel = degenerate_model(space)
    block = analytic_block_cov(dmodel, 0, 3, 3)
    lam_block = eig(block).values
    lam_one = np.clip(np.linalg.eigvalsh(analytic_cov_far1(dmodel).weighted()), 0, None)[::-1]
    nonzero = lam_block[lam_block > 1e-12]
    dev = float(np.abs(nonzero - 3 * lam_one[: len(nonzero)]).max() / lam_one[0])
    checks.append(_check("degenerate_eigenvalues", dev < 1e-8, f"relative deviation {dev:.2e}"))

    factor3 = commuting_far_eigbound(0.5, 3)
    ok = abs(factor3 - 2.0) < 1e-12
    cmodel = commuting_far_model(space, psi_values=0.5)
    lam_eps = cmodel.innovation.eigenvalues()
    lam_one = lam_eps / (1 - 0.25)
    for m in (3, 5):
        fac = commuting_far_eigbound(0.5, m)
        for j in range(4):
            emax = commuting_block_eigmax(0.5, lam_one[j], m)
            ok = ok and emax <= fac * lam_one[j] + 1e-8
    limit_dev = abs(commuting_far_eigbound(0.5, 10**6) - 3.0)
    ok = ok and limit_dev < 1e-9
    checks.append(_check("commuting_cap", ok, f"factor(m=3)={factor3}, limit deviation {limit_dev:.2e}"))

    lams = 1.0 / np.arange(1.0, 11.0) ** 2
    consec = np.concatenate([lams, [0.0]])
    gaps = consec[:-1] - consec[1:]
    cap2 = float(np.max(1.0 / gaps[:2]))
    expected = 2 * 9 / (1 * (2 + 0.5))
    checks.append(_check("lambda_cap_closed_form", abs(cap2 - expected) < 1e-12, f"Lambda_2 = {cap2} vs {expected}"))
    _ = rng  # seeded namespace reserved for future randomized checks
    return checks


def _suite_yulewalker(seed: int) -> List[CheckResult]:
    from .covariance import empirical_auto_cov
    from .grid import GridSpace, identity_op, hs_norm
    from .processes import far_model, fma1_model
    from .product import BlockOp as _BlockOp
    from .yulewalker import tychonoff_inverse, yw_fit, yw_fit_truncated

    checks = []
    space = GridSpace.uniform(8)
    model = far_model(space, contraction=0.5)
    bundle = simulate(model, 300, seed)

    c0 = empirical_auto_cov(bundle.xs, 0, 2, space=space).op
    ridge = 0.1
    ident_blocks = np.zeros_like(c0.blocks)
    for i in range(2):
        ident_blocks[i, i] = identity_op(space).kernel
    ident = _BlockOp(space, space, ident_blocks)
    from .product import compose_blocks

    composed = compose_blocks(c0 + ridge * ident, tychonoff_inverse(c0, ridge))
    dev = (composed - ident).hs_norm()
    checks.append(_check("tychonoff_residual", dev < 1e-10, f"||(C+r) o inv - I||_S = {dev:.2e}"))

    fit = yw_fit(bundle.xs, 1, ridge=0.05, rank=0, space=space)
    c1 = empirical_cross_cov(bundle.xs, bundle.xs, 1, 1, 1, space=space).op
    c0p = empirical_auto_cov(bundle.xs, 0, 1, space=space).op
    resid = (c1 - compose_blocks(fit.psi_hat, c0p)).hs_norm()
    target = 0.05 * fit.psi_hat.hs_norm()
    checks.append(_check("ridge_identity", abs(resid - target) < 1e-10, f"residual {resid:.6f} vs ridge*||psi|| {target:.6f}"))

    fit_a = yw_fit(bundle.xs, 1, ridge=0.05, rank=4, space=space)
    fit_b = yw_fit_truncated(bundle.xs, 1, ridge=0.05, rank=4, space=space)
    identical = np.array_equal(fit_a.psi_hat.blocks, fit_b.psi_hat.blocks)
    checks.append(_check("truncated_equals_plain", identical, "bit-identical blocks at m = p = 1"))

    norms = [tychonoff_inverse(c0, r).op_norm() for r in (0.01, 0.1, 1.0)]
    checks.append(_check("tychonoff_monotonicity", norms[0] >= norms[1] >= norms[2], f"inverse norms {['%.3f' % v for v in norms]}"))

    ma_model = fma1_model(space, ma_norm=0.4)
    beta = ma_model.ma_ops[0]
    hits = 0
    reps = 10
    for rep in range(reps):
        mb = simulate(ma_model, 400, child_seed(seed, 11, rep))
        f = yw_fit_truncated(mb.xs, 4, rank=0, space=space)
        lead = f.operator(1)
        if hs_norm(lead - beta) < hs_norm(lead + beta):
            hits += 1
    checks.append(_check("fma1_leading_sign", hits > reps // 2, f"{hits}/{reps} replications match the +beta sign pattern"))
    return checks


def _suite_bounds_closed_form(seed: int) -> List[CheckResult]:
    from .bounds import far1_closed_bounds, prod_propagation, sum_propagation, tau, xi_auto, xi_cross
    from .processes import MomentSet, TailRule

    checks = []
    cb = far1_closed_bounds(0.5, 1.0, 1)
    ok = (
        abs(cb.coupling_sum_bound - 4.0) < 1e-12
        and abs(cb.tau_tilde_bound - 144.0) < 1e-12
        and abs(cb.limit - 16.0) < 1e-12
    )
    cb4 = far1_closed_bounds(0.5, 1.0, 4)
    ok = ok and abs(cb4.tau_tilde_bound - 22.4) < 1e-12
    cb0 = far1_closed_bounds(0.0, 1.0, 1)
    ok = ok and cb0.coupling_sum_bound == 0.0 and cb0.tau_tilde_bound == 1.0 and cb0.limit == 1.0
    checks.append(_check("closed_form_plugins", ok, "coupling 4, tau-tilde 144 / 22.4, limit 16, iid degeneration"))

    horizon = 40
    coupling = 0.5 ** np.arange(1, horizon + 1)
    ms = MomentSet(
        nu2_x=1.0,
        nu4_x=1.0,
        coupling_x=coupling,
        tail_rule=TailRule("geometric", 0.5, 0.5, horizon),
        nu2_y=1.0,
        nu4_y=1.0,
        coupling_y=coupling.copy(),
    )
    win = lag_window(100, 0, 1, 1)
    xi_val = xi_cross(ms, win).value
    brute = 1.0 + 2.0 * np.sqrt(2.0) * sum(1.0 * 0.5**k + 1.0 * 0.5**k for k in range(1, 201))
    checks.append(_check("xi_brute_force_sum", abs(xi_val - brute) < 1e-10, f"xi {xi_val!r} vs direct sum {brute!r}"))

    tau_val = tau(ms, win).value
    xia = xi_auto(ms, win).value
    ok = abs(tau_val - 5.0) < 1e-12 and abs(xia - (1 + 4 * np.sqrt(2))) < 1e-12 and tau_val <= xia
    checks.append(_check("tau_le_xi_auto", ok, f"tau {tau_val!r} <= xi_auto {xia!r}"))

    ok = True
    prev_xi = prev_tau = np.inf
    for kp in range(1, 9):
        win_k = LagWindow(N=1000, h=0, m=kp, n=kp, n_prime=1000 - kp + 1, kappa=kp - 1, kappa_prime=max(1, kp - 1))
        x_val = xi_auto(ms, win_k).value
        t_val = tau(ms, win_k).value
        ok = ok and x_val <= prev_xi + 1e-12 and t_val <= prev_tau + 1e-12
        prev_xi, prev_tau = x_val, t_val
    checks.append(_check("monotone_in_kappa", ok, "xi/tau nonincreasing in kappa' for geometric couplings"))

    win_s = lag_window(100, 0, 1, 1)
    val = sum_propagation(1.0, 100.0, 2.0, LagWindow(N=100, h=0, m=1, n=1, n_prime=20, kappa=0, kappa_prime=1))
    ok = abs(val - 0.22) < 1e-12
    win_p = LagWindow(N=1, h=0, m=1, n=1, n_prime=1, kappa=0, kappa_prime=1)
    val_p = prod_propagation(1.0, 1.0, 1.0, win_p, 1.0, 1.0, 1.0)
    ok = ok and abs(val_p - 3.0) < 1e-12
    checks.append(_check("propagation_examples", ok, f"sum rule 0.22, product rule {val_p!r}"))
    _ = win_s, seed
    return checks


_SUITES = {
    "invariants": _suite_invariants,
    "eigen": _suite_eigen,
    "yulewalker": _suite_yulewalker,
    "bounds-closed-form": _suite_bounds_closed_form,
}


def suite_names() -> list:
    return sorted(_SUITES)


def run_suite(name: str, seed: int = 0) -> SuiteResult:
    """Execute one named property-check suite; nonzero exit status on any failure."""
    if name not in _SUITES:
        raise ConfigError(f"unknown suite {name!r}; available: {', '.join(suite_names())}")
    try:
        checks = _SUITES[name](int(seed))
    except FtscovError as exc:  # a broken check counts as a failure, not a crash
        checks = [CheckResult(name="suite_execution", passed=False, detail=str(exc))]
    return SuiteResult(suite=name, checks=checks)


def write_summary(summary: MCSummary, out_dir, fmt: str) -> list:
    """Persist an MCSummary under out_dir; returns the written paths."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if fmt in ("csv", "both"):
        path = os.path.join(out_dir, "verify.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(summary.to_csv_string())
        paths.append(path)
    if fmt in ("json", "both"):
        path = os.path.join(out_dir, "verify.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(summary.to_json_obj(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        paths.append(path)
    return paths
