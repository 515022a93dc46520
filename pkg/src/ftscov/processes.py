"""Process families with shared-innovation couplings and moment estimation.

Supported kinds: iid, functional AR(p), causal linear, functional ARMA(p, q),
and the degenerate constant-path process. Every random draw comes from a
counter-based stream derived from (master seed, stream index), so serial and
parallel replications agree bit-exactly.

The distributional defaults are implementation choices, not forced by the
estimation theory: innovations are zero-mean Gaussian with Brownian-bridge
covariance kernel ``min(s, t) - s t`` rescaled so that the fourth moment
functional nu_4 equals one at the discretization, and AR operators are smooth
Gaussian-bump kernels rescaled to a target operator norm.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, ModelError, StabilityError
from .grid import (
    GridFunction,
    GridSpace,
    LinearOp,
    _readonly,
    identity_op,
    op_norms,
    op_power,
    zero_op,
)

_STREAM_EPS = 0
_STREAM_ETA = 1
_STREAM_COUPLE = 2
_STREAM_MOMENTS = 3

# relative size of the neglected causal-series tail (fraction of nu_2(eps))
_SERIES_TOL = 1e-8
_MAX_SERIES_TERMS = 5000


def child_seed(seed, *key) -> np.random.SeedSequence:
    """Deterministic sub-seed: append ``key`` to the spawn key of ``seed``."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.SeedSequence(
        entropy=seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(int(k) for k in key)
    )


def substream(seed, *key) -> np.random.Generator:
    """Counter-based generator for the given (seed, key...) stream."""
    return np.random.Generator(np.random.Philox(child_seed(seed, *key)))


@dataclass(frozen=True, eq=False)
class InnovationLaw:
    """Zero-mean Gaussian innovation with a covariance kernel on the grid.

    ``covariance`` holds the raw kernel; samples are multiplied by ``scale``,
    so the effective covariance operator is ``scale**2 * covariance``.
    """

    kind: str
    covariance: LinearOp
    scale: float = 1.0

    def __post_init__(self):
        if self.kind != "gaussian-kernel":
            raise ModelError(f"unsupported innovation kind {self.kind!r}")
        if self.scale <= 0:
            raise ModelError("innovation scale must be positive")
        op = self.covariance
        if not op.domain.compatible(op.codomain):
            raise ModelError("innovation covariance must be an endomorphism")
        k = op.kernel
        sym_tol = 1e-10 * max(1.0, float(np.abs(k).max()))
        if float(np.abs(k - k.T).max()) > sym_tol:
            raise ModelError("innovation covariance kernel must be symmetric")
        w = op.weighted()
        lams, vecs = np.linalg.eigh(0.5 * (w + w.T))
        if lams.min() < -1e-10:
            raise ModelError(f"innovation covariance not PSD: min eigenvalue {lams.min():.3e}")
        lams = np.clip(lams[::-1], 0.0, None)
        vecs = vecs[:, ::-1]
        sampler = (vecs * np.sqrt(lams)[None, :]) / op.domain.sqrt_weights[:, None]
        object.__setattr__(self, "_lams", _readonly(lams))
        object.__setattr__(self, "_vecs", _readonly(np.array(vecs)))
        object.__setattr__(self, "_sampler", _readonly(sampler))

    @property
    def space(self) -> GridSpace:
        return self.covariance.domain

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """(size, d) matrix of independent draws."""
        g = rng.standard_normal((int(size), self.space.d))
        return self.scale * (g @ self._sampler.T)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the effective covariance operator, descending."""
        return self.scale**2 * self._lams

    def basis_values(self) -> np.ndarray:
        """(d, d) column matrix of orthonormal eigenfunction values."""
        return self._vecs / self.space.sqrt_weights[:, None]

    def nu2(self) -> float:
        return float(np.sqrt(self.eigenvalues().sum()))

    def nu4(self) -> float:
        # Gaussian fourth moment of the squared norm: (tr C)^2 + 2 tr(C^2)
        lam = self.eigenvalues()
        return float((lam.sum() ** 2 + 2.0 * np.sum(lam**2)) ** 0.25)

    def effective_covariance(self) -> LinearOp:
        return self.scale**2 * self.covariance


def brownian_bridge_law(space: GridSpace | None = None, normalize: str | None = "nu4") -> InnovationLaw:
    """Gaussian innovation with Brownian-bridge kernel ``min(s, t) - s t``.

    ``normalize="nu4"`` rescales so nu_4 = 1 exactly at the discretization
    (via the Gaussian fourth-moment identity); ``"nu2"`` targets nu_2 = 1;
    ``None`` keeps the raw kernel.
    """
    space = space or GridSpace.uniform()
    s = space.nodes
    kernel = np.minimum(s[:, None], s[None, :]) - np.outer(s, s)
    raw = InnovationLaw("gaussian-kernel", LinearOp(space, space, kernel))
    if normalize is None:
        return raw
    if normalize == "nu4":
        return InnovationLaw("gaussian-kernel", raw.covariance, scale=1.0 / raw.nu4())
    if normalize == "nu2":
        return InnovationLaw("gaussian-kernel", raw.covariance, scale=1.0 / raw.nu2())
    raise ModelError(f"unknown normalization {normalize!r}")


def gaussian_kernel_op(
    space: GridSpace, lengthscale: float = 0.25, norm: float | None = None
) -> LinearOp:
    """Smooth Gaussian-bump integral kernel, optionally rescaled to a target operator norm."""
    s = space.nodes
    kernel = np.exp(-(((s[:, None] - s[None, :]) / lengthscale) ** 2))
    op = LinearOp(space, space, kernel)
    if norm is not None:
        current = op_norms(op).operator
        if current == 0:
            raise ModelError("cannot rescale a zero kernel to a nonzero norm")
        op = (float(norm) / current) * op
    return op


def commuting_operator(innovation: InnovationLaw, values) -> LinearOp:
    """Self-adjoint operator sharing the innovation's eigenfunctions, with given eigenvalues."""
    space = innovation.space
    vals = np.broadcast_to(np.asarray(values, dtype=float), (space.d,))
    v = innovation._vecs
    weighted = (v * vals[None, :]) @ v.T
    kernel = weighted / space.sqrt_weights[:, None] / space.sqrt_weights[None, :]
    return LinearOp(space, space, kernel)


@dataclass(frozen=True, eq=False)
class LinearRule:
    """Coefficient rule for causal linear processes: phi_i = scale * ratio**(i-1) * base."""

    base: LinearOp
    scale: float
    ratio: float

    def __post_init__(self):
        if not 0.0 <= self.ratio < 1.0:
            raise StabilityError(f"linear coefficient ratio must lie in [0, 1), got {self.ratio}")
        if self.scale < 0:
            raise ModelError("linear coefficient scale must be nonnegative")

    def coefficient(self, i: int) -> LinearOp:
        return (self.scale * self.ratio ** (i - 1)) * self.base


@dataclass(frozen=True, eq=False)
class CrossLink:
    """Jointly stationary companion series ``Y_k = theta(X_k) + eta_k``."""

    theta: LinearOp
    noise: InnovationLaw


_MODEL_KINDS = ("iid", "far", "linear", "farma", "degenerate")


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Definition of one process family over a grid space.

    ``config`` holds the normalized config section for models built through
    :func:`ftscov.config.model_from_config`, enabling exact serialization back.
    """

    kind: str
    space: GridSpace
    innovation: InnovationLaw
    ar_ops: tuple = ()
    ma_ops: tuple = ()
    linear_rule: Optional[LinearRule] = None
    cross_link: Optional[CrossLink] = None
    fixed_value: Optional[GridFunction] = None
    config: Optional[dict] = None

    def __post_init__(self):
        if self.kind not in _MODEL_KINDS:
            raise ModelError(f"unknown model kind {self.kind!r}")
        if not self.innovation.space.compatible(self.space):
            raise ModelError("innovation law lives on a different grid")
        object.__setattr__(self, "ar_ops", tuple(self.ar_ops))
        object.__setattr__(self, "ma_ops", tuple(self.ma_ops))
        for op in (*self.ar_ops, *self.ma_ops):
            if not (op.domain.compatible(self.space) and op.codomain.compatible(self.space)):
                raise ModelError("model operators must be endomorphisms of the model grid")
        contraction = None
        if self.kind == "far":
            if not self.ar_ops:
                raise ModelError("far model needs at least one AR operator")
            if len(self.ar_ops) == 1:
                psi = self.ar_ops[0]
                powers = [op_norms(op_power(psi, j)).operator for j in range(1, 11)]
                if min(powers) >= 1.0:
                    raise StabilityError(
                        "no contraction: ||psi^j||_L >= 1 for every j <= 10 "
                        f"(||psi||_L = {powers[0]:.4f})"
                    )
                contraction = powers[0]
        elif self.kind == "linear":
            if self.linear_rule is None:
                raise ModelError("linear model needs a coefficient rule")
        elif self.kind == "farma":
            if not self.ar_ops and not self.ma_ops:
                raise ModelError("farma model needs AR and/or MA operators")
        elif self.kind in ("iid", "degenerate"):
            if self.ar_ops or self.ma_ops:
                raise ModelError(f"{self.kind} model takes no AR/MA operators")
        if self.fixed_value is not None:
            if self.kind != "degenerate":
                raise ModelError("fixed_value only applies to degenerate models")
            if not self.fixed_value.space.compatible(self.space):
                raise ModelError("fixed_value lives on a different grid")
        if self.cross_link is not None:
            th = self.cross_link.theta
            if not th.domain.compatible(self.space):
                raise ModelError("cross-link operator domain must match the model grid")
            if not self.cross_link.noise.space.compatible(th.codomain):
                raise ModelError("cross-link noise must live on the link codomain grid")
        object.__setattr__(self, "contraction", contraction)

    @property
    def has_cross(self) -> bool:
        return self.cross_link is not None


def iid_model(space: GridSpace | None = None, innovation: InnovationLaw | None = None) -> ModelSpec:
    space = space or GridSpace.uniform()
    return ModelSpec("iid", space, innovation or brownian_bridge_law(space))


def degenerate_model(
    space: GridSpace | None = None,
    innovation: InnovationLaw | None = None,
    fixed_value: GridFunction | None = None,
) -> ModelSpec:
    space = space or (fixed_value.space if fixed_value is not None else GridSpace.uniform())
    return ModelSpec(
        "degenerate", space, innovation or brownian_bridge_law(space), fixed_value=fixed_value
    )


def far_model(
    space: GridSpace | None = None,
    contraction: float = 0.5,
    lengthscale: float = 0.25,
    innovation: InnovationLaw | None = None,
    ar_ops: tuple | None = None,
    cross_link: CrossLink | None = None,
) -> ModelSpec:
    """fAR(1) with a smooth kernel operator of the requested operator norm (or explicit ar_ops)."""
    space = space or GridSpace.uniform()
    if ar_ops is None:
        psi = (
            zero_op(space)
            if contraction == 0.0
            else gaussian_kernel_op(space, lengthscale, norm=contraction)
        )
        ar_ops = (psi,)
    return ModelSpec(
        "far", space, innovation or brownian_bridge_law(space), ar_ops=ar_ops, cross_link=cross_link
    )


def commuting_far_model(
    space: GridSpace | None = None,
    psi_values=0.5,
    innovation: InnovationLaw | None = None,
) -> ModelSpec:
    """fAR(1) whose self-adjoint operator shares the innovation eigenfunctions."""
    space = space or GridSpace.uniform()
    innovation = innovation or brownian_bridge_law(space)
    return ModelSpec("far", space, innovation, ar_ops=(commuting_operator(innovation, psi_values),))


def linear_model(
    space: GridSpace | None = None,
    scale: float = 0.4,
    ratio: float = 0.5,
    lengthscale: float = 0.25,
    innovation: InnovationLaw | None = None,
) -> ModelSpec:
    space = space or GridSpace.uniform()
    base = gaussian_kernel_op(space, lengthscale, norm=1.0)
    return ModelSpec(
        "linear",
        space,
        innovation or brownian_bridge_law(space),
        linear_rule=LinearRule(base=base, scale=scale, ratio=ratio),
    )


def fma1_model(
    space: GridSpace | None = None,
    ma_norm: float = 0.4,
    lengthscale: float = 0.25,
    innovation: InnovationLaw | None = None,
) -> ModelSpec:
    """Invertible fMA(1): X_k = eps_k + beta(eps_{k-1}) with ||beta||_L < 1."""
    space = space or GridSpace.uniform()
    beta = gaussian_kernel_op(space, lengthscale, norm=ma_norm)
    return ModelSpec("farma", space, innovation or brownian_bridge_law(space), ma_ops=(beta,))


def with_cross_link(
    model: ModelSpec,
    theta_norm: float = 0.7,
    lengthscale: float = 0.35,
    noise_scale: float = 0.5,
) -> ModelSpec:
    """Attach a companion series Y = theta(X) + eta to an existing model."""
    theta = gaussian_kernel_op(model.space, lengthscale, norm=theta_norm)
    base = brownian_bridge_law(model.space)
    noise = InnovationLaw("gaussian-kernel", base.covariance, scale=base.scale * noise_scale)
    return ModelSpec(
        model.kind,
        model.space,
        model.innovation,
        ar_ops=model.ar_ops,
        ma_ops=model.ma_ops,
        linear_rule=model.linear_rule,
        cross_link=CrossLink(theta=theta, noise=noise),
        fixed_value=model.fixed_value,
    )


def _apply_matrix(op: LinearOp) -> np.ndarray:
    return op.kernel * op.domain.weights[None, :]


@functools.lru_cache(maxsize=64)
def _causal_weights_cached(model: ModelSpec):
    return tuple(_readonly(k) for k in _compute_causal_weights(model))


def causal_weights(model: ModelSpec) -> list:
    """Kernels of the causal series terms pi_0, ..., pi_{J-1} with X_k = sum_j pi_j(eps_{k-j}).

    J is chosen so the neglected operator-norm tail is below 1e-8 (relative to
    nu_2 of one innovation). Degenerate models have no innovation representation.
    """
    return list(_causal_weights_cached(model))


def _compute_causal_weights(model: ModelSpec):
    space = model.space
    ident = identity_op(space).kernel
    if model.kind == "degenerate":
        raise ModelError("degenerate models have no innovation representation")
    if model.kind == "iid":
        return [ident]
    w = space.weights
    if model.kind == "linear":
        rule = model.linear_rule
        kernels = [ident]
        if rule.scale == 0.0 or op_norms(rule.base).operator == 0.0:
            return kernels
        base_norm = op_norms(rule.base).operator * rule.scale
        j = 1
        while base_norm * rule.ratio ** (j - 1) / max(1e-300, 1.0 - rule.ratio) >= _SERIES_TOL:
            kernels.append(rule.coefficient(j).kernel)
            j += 1
            if j > _MAX_SERIES_TERMS:
                raise StabilityError("linear coefficient series does not reach the tail tolerance")
        return kernels

    # far / farma recursion: pi_0 = I, pi_j = beta_j + sum_i alpha_i pi_{j-i}
    alphas = [_apply_matrix(op) for op in model.ar_ops]
    betas = [op.kernel for op in model.ma_ops]
    kernels = [ident]
    norms = [1.0]
    sqrt_w = space.sqrt_weights
    j = 1
    while True:
        pi = betas[j - 1].copy() if j <= len(betas) else np.zeros_like(ident)
        for i, a in enumerate(alphas, start=1):
            if j - i >= 0:
                pi += a @ kernels[j - i]
        norm_j = float(np.linalg.svd(sqrt_w[:, None] * pi * sqrt_w[None, :], compute_uv=False)[0])
        # geometric tail estimate from the recent decay ratios
        ratios = [
            norms[i + 1] / norms[i]
            for i in range(max(0, j - 4), j - 1)
            if norms[i] > 0 and norms[i + 1] > 0
        ]
        if norm_j > 0 and norms[-1] > 0:
            ratios.append(norm_j / norms[-1])
        r = min(0.9999, max(ratios)) if ratios else 0.0
        tail = norm_j * r / (1.0 - r) if norm_j > 0 else 0.0
        if j > max(len(alphas), len(betas)) and norm_j + tail < _SERIES_TOL:
            break
        kernels.append(pi)
        norms.append(norm_j)
        j += 1
        if j > _MAX_SERIES_TERMS:
            raise StabilityError(
                "causal series does not decay below the tail tolerance; "
                "the AR specification is likely not contractive"
            )
    while len(kernels) > 1 and not np.any(kernels[-1]):
        kernels.pop()
    return kernels


@dataclass
class PathBundle:
    """A simulated path plus everything needed to rebuild its coupled approximants.

    ``innovations`` records the full innovation stream (lead-in included), so the
    generator knows exactly which stream produced each series term; ``couplings``
    caches requested coupled values and ``coupling_shared`` records how many
    series terms of each coupling were taken from the shared stream.
    """

    space: GridSpace
    xs: np.ndarray
    ys: Optional[np.ndarray]
    seed: np.random.SeedSequence
    burn_in: int
    truncation: int
    lead: int
    innovations: np.ndarray
    noise: Optional[np.ndarray] = None
    couplings: dict = field(default_factory=dict)
    coupling_shared: dict = field(default_factory=dict)
    _fresh: dict = field(default_factory=dict, repr=False)

    @property
    def n_samples(self) -> int:
        return self.xs.shape[0]

    def x(self, k: int) -> GridFunction:
        """Path value X_k, 1-based."""
        return GridFunction(self.space, self.xs[k - 1])

    def y(self, k: int) -> GridFunction:
        if self.ys is None:
            raise ModelError("bundle has no companion series")
        return GridFunction(self.space, self.ys[k - 1])

    def x_functions(self) -> list:
        return [GridFunction(self.space, row) for row in self.xs]


def simulate(model: ModelSpec, n: int, seed, burn_in: int | None = None) -> PathBundle:
    """Simulate N path values (plus the companion series when cross-linked).

    Recursive kinds discard ``burn_in`` steps (default 500); linear kinds use the
    truncated causal series with a lead-in instead. Deterministic given
    (model, n, seed): the innovation stream, companion noise and coupling
    copies all come from fixed sub-streams of ``seed``.
    """
    n = int(n)
    if n < 1:
        raise ModelError(f"need n >= 1 path values, got {n}")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    rng_eps = substream(root, _STREAM_EPS)
    kind = model.kind

    if kind == "degenerate":
        if model.fixed_value is not None:
            x0 = model.fixed_value.values
        else:
            x0 = model.innovation.sample(rng_eps, 1)[0]
        xs = np.tile(x0, (n, 1))
        bundle = PathBundle(
            space=model.space,
            xs=xs,
            ys=None,
            seed=root,
            burn_in=0,
            truncation=0,
            lead=0,
            innovations=np.zeros((0, model.space.d)),
        )
        return _attach_cross(model, bundle, root)

    weights = causal_weights(model)
    j_terms = len(weights)

    if kind == "iid":
        lead = 0
        eps = model.innovation.sample(rng_eps, n)
        xs = eps.copy()
        burn = 0
    elif kind == "linear":
        lead = j_terms - 1
        eps = model.innovation.sample(rng_eps, lead + n)
        xs = np.zeros((n, model.space.d))
        w = model.space.weights
        for j, kern in enumerate(weights):
            xs += eps[lead - j : lead - j + n] @ (kern * w[None, :]).T
        burn = 0
    else:  # far / farma by recursion
        burn = 500 if burn_in is None else int(burn_in)
        if burn < 0:
            raise ModelError("burn_in must be nonnegative")
        lead = burn
        eps = model.innovation.sample(rng_eps, lead + n)
        alphas = [_apply_matrix(op).T for op in model.ar_ops]
        betas = [_apply_matrix(op).T for op in model.ma_ops]
        full = np.zeros((lead + n, model.space.d))
        for t in range(lead + n):
            acc = eps[t].copy()
            for i, a in enumerate(alphas, start=1):
                if t - i >= 0:
                    acc += full[t - i] @ a
            for jj, b in enumerate(betas, start=1):
                if t - jj >= 0:
                    acc += eps[t - jj] @ b
            full[t] = acc
        xs = full[lead:]

    bundle = PathBundle(
        space=model.space,
        xs=xs,
        ys=None,
        seed=root,
        burn_in=burn,
        truncation=j_terms,
        lead=lead,
        innovations=eps,
    )
    return _attach_cross(model, bundle, root)


def _attach_cross(model: ModelSpec, bundle: PathBundle, root) -> PathBundle:
    if model.cross_link is None:
        return bundle
    rng_eta = substream(root, _STREAM_ETA)
    eta = model.cross_link.noise.sample(rng_eta, bundle.n_samples)
    theta_t = _apply_matrix(model.cross_link.theta).T
    bundle.ys = bundle.xs @ theta_t + eta
    bundle.noise = eta
    return bundle


def couple(model: ModelSpec, bundle: PathBundle, k: int, ell: int) -> GridFunction:
    """Coupled approximant X_k^(ell): same recent ell innovations, fresh copies beyond.

    The causal series is truncated at the bundle's J terms, so for ell >= J the
    coupled value uses only shared innovations and equals X_k exactly. For
    recursive kinds an exact shared reconstruction needs burn_in >= J (the
    default burn-in is far larger).
    """
    if model.kind == "degenerate":
        raise ModelError("degenerate models have no innovation representation to couple")
    k, ell = int(k), int(ell)
    if not 1 <= k <= bundle.n_samples:
        raise ModelError(f"coupling index k={k} outside the path 1..{bundle.n_samples}")
    if ell < 0:
        raise ModelError(f"coupling order must be nonnegative, got ell={ell}")
    key = (k, ell)
    if key in bundle.couplings:
        return GridFunction(bundle.space, bundle.couplings[key])

    j_terms = bundle.truncation
    if ell >= j_terms:
        values = bundle.xs[k - 1].copy()
        shared = j_terms
    else:
        weights = causal_weights(model)
        w = model.space.weights
        if ell not in bundle._fresh:
            rng = substream(bundle.seed, _STREAM_COUPLE, ell)
            bundle._fresh[ell] = model.innovation.sample(rng, bundle.lead + bundle.n_samples)
        fresh = bundle._fresh[ell]
        values = np.zeros(model.space.d)
        shared = 0
        for j, kern in enumerate(weights):
            idx = bundle.lead + k - 1 - j
            if idx < 0:
                break  # older than the stored stream: zero in the simulated path too
            source = bundle.innovations if j < ell else fresh
            values += (kern * w[None, :]) @ source[idx]
            if j < ell:
                shared += 1
    bundle.couplings[key] = values
    bundle.coupling_shared[key] = shared
    return GridFunction(bundle.space, values)


@dataclass(frozen=True)
class TailRule:
    """Geometric completion of coupling sums beyond the estimated horizon."""

    kind: str
    ratio_x: float
    ratio_y: Optional[float]
    horizon: int

    def describe(self, series: str = "x") -> str:
        r = self.ratio_x if series == "x" else self.ratio_y
        ratio = "none" if r is None else repr(float(r))
        return f"{self.kind}(ratio={ratio};horizon={self.horizon})"


@dataclass
class MomentSet:
    """Estimated nu_p moments and coupling-decay sequences feeding the bound formulas."""

    nu2_x: float
    nu4_x: float
    coupling_x: np.ndarray
    tail_rule: TailRule
    nu2_y: Optional[float] = None
    nu4_y: Optional[float] = None
    coupling_y: Optional[np.ndarray] = None
    nu4_x_se: float = 0.0
    nu4_y_se: Optional[float] = None
    coupling_x_se: Optional[np.ndarray] = None
    coupling_y_se: Optional[np.ndarray] = None

    def coupling_sum(self, series: str, start: int) -> float:
        """Sum of the coupling sequence from index ``start`` on, tail-completed."""
        from .errors import InsufficientMomentsError

        if series == "x":
            c, ratio = self.coupling_x, self.tail_rule.ratio_x
        elif series == "y":
            if self.coupling_y is None:
                raise InsufficientMomentsError("no coupling sequence for the companion series")
            c, ratio = self.coupling_y, self.tail_rule.ratio_y
        else:
            raise ValueError(f"unknown series {series!r}")
        horizon = len(c)
        start = int(start)
        if start < 1:
            raise ValueError(f"coupling sums start at k >= 1, got {start}")
        last = float(c[-1]) if horizon else 0.0
        if start > horizon:
            if last == 0.0:
                return 0.0
            if ratio is None or not 0.0 <= ratio < 1.0:
                raise InsufficientMomentsError(
                    f"window start {start} beyond horizon {horizon} and no usable tail rule"
                )
            return last * ratio ** (start - horizon) / (1.0 - ratio)
        head = float(np.sum(c[start - 1 :]))
        if last == 0.0:
            return head
        if ratio is None or not 0.0 <= ratio < 1.0:
            raise InsufficientMomentsError(
                "coupling sequence does not vanish at the horizon and no usable tail rule"
            )
        return head + last * ratio / (1.0 - ratio)


def _nu_hat(norms_sq: np.ndarray, p: int):
    """Empirical nu_p with a delta-method standard error, from squared norms."""
    q = norms_sq ** (p // 2)
    mean = float(np.mean(q))
    if mean <= 0.0:
        return 0.0, 0.0
    nu = mean ** (1.0 / p)
    se_mean = float(np.std(q, ddof=1)) / np.sqrt(len(q)) if len(q) > 1 else 0.0
    return nu, nu * se_mean / (p * mean)


def _fit_tail_ratio(c: np.ndarray) -> Optional[float]:
    """Geometric ratio from the last three positive points (log-linear fit)."""
    if len(c) == 0 or c[-1] <= 0.0:
        return 0.0
    pts = c[-3:] if len(c) >= 3 else c
    pts = pts[pts > 0.0]
    if len(pts) < 2:
        return None
    logs = np.log(pts)
    ratio = float(np.exp((logs[-1] - logs[0]) / (len(pts) - 1)))
    return ratio


def estimate_moments(model: ModelSpec, replications: int, horizon: int, seed) -> MomentSet:
    """Monte Carlo estimates of nu_2, nu_4 and the coupling-decay sequences.

    Coupling entry k estimates nu_4(X_k - X_k^(k)) from ``replications`` fresh
    pairs built on the truncated causal series; beyond the series length the
    difference is exactly zero. The infinite sums needed by the bounds are
    completed by a geometric tail fitted to the last three points.
    """
    replications = int(replications)
    horizon = int(horizon)
    if replications < 2:
        raise ConfigError(f"moment estimation needs at least 2 replications, got {replications}")
    if horizon < 1:
        raise ConfigError(f"moment horizon must be positive, got {horizon}")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    w = model.space.weights

    if model.kind == "degenerate":
        rng = substream(root, _STREAM_MOMENTS, 0)
        if model.fixed_value is not None:
            draws = np.tile(model.fixed_value.values, (replications, 1))
        else:
            raise ModelError(
                "a non-degenerate constant path is not coupling-approximable; "
                "moment estimation supports only point-mass degenerate models"
            )
        nsq = draws**2 @ w
        nu2, _ = _nu_hat(nsq, 2)
        nu4, nu4_se = _nu_hat(nsq, 4)
        zeros = np.zeros(horizon)
        return MomentSet(
            nu2_x=nu2,
            nu4_x=nu4,
            coupling_x=zeros,
            tail_rule=TailRule("geometric", 0.0, None, horizon),
            nu4_x_se=nu4_se,
            coupling_x_se=np.zeros(horizon),
        )

    weights = causal_weights(model)
    mats = [(kern * w[None, :]).T for kern in weights]
    j_terms = len(weights)

    # stationary draws of X (and Y) for the nu moments
    rng_x = substream(root, _STREAM_MOMENTS, 0)
    eps = np.stack([model.innovation.sample(rng_x, replications) for _ in range(j_terms)], axis=1)
    x = np.zeros((replications, model.space.d))
    for j, mat in enumerate(mats):
        x += eps[:, j] @ mat
    nsq_x = x**2 @ w
    nu2_x, _ = _nu_hat(nsq_x, 2)
    nu4_x, nu4_x_se = _nu_hat(nsq_x, 4)

    nu2_y = nu4_y = nu4_y_se = None
    theta_t = None
    if model.has_cross:
        rng_y = substream(root, _STREAM_MOMENTS, 3)
        eta = model.cross_link.noise.sample(rng_y, replications)
        theta_t = _apply_matrix(model.cross_link.theta).T
        yv = x @ theta_t + eta
        nsq_y = yv**2 @ w
        nu2_y, _ = _nu_hat(nsq_y, 2)
        nu4_y, nu4_y_se = _nu_hat(nsq_y, 4)

    # coupling differences Delta_k = sum_{j >= k} pi_j(eps_j - eps'_j), suffix-accumulated
    rng_c1 = substream(root, _STREAM_MOMENTS, 1)
    rng_c2 = substream(root, _STREAM_MOMENTS, 2)
    coupling_x = np.zeros(horizon)
    coupling_x_se = np.zeros(horizon)
    coupling_y = np.zeros(horizon) if model.has_cross else None
    coupling_y_se = np.zeros(horizon) if model.has_cross else None
    acc = np.zeros((replications, model.space.d))
    top = min(horizon, j_terms - 1)
    for j in range(j_terms - 1, 0, -1):
        delta = model.innovation.sample(rng_c1, replications) - model.innovation.sample(
            rng_c2, replications
        )
        acc += delta @ mats[j]
        if j <= top:
            nsq = acc**2 @ w
            coupling_x[j - 1], coupling_x_se[j - 1] = _nu_hat(nsq, 4)
            if model.has_cross:
                nsq_y = (acc @ theta_t) ** 2 @ w
                coupling_y[j - 1], coupling_y_se[j - 1] = _nu_hat(nsq_y, 4)

    ratio_x = _fit_tail_ratio(coupling_x)
    ratio_y = _fit_tail_ratio(coupling_y) if coupling_y is not None else None
    return MomentSet(
        nu2_x=nu2_x,
        nu4_x=nu4_x,
        coupling_x=coupling_x,
        tail_rule=TailRule("geometric", ratio_x, ratio_y, horizon),
        nu2_y=nu2_y,
        nu4_y=nu4_y,
        coupling_y=coupling_y,
        nu4_x_se=nu4_x_se,
        nu4_y_se=nu4_y_se,
        coupling_x_se=coupling_x_se,
        coupling_y_se=coupling_y_se,
    )
