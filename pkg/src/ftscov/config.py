"""Structured JSON configuration for models and experiments.

Top-level schema (``schema_version`` is required and must equal 1):

    {
      "schema_version": 1,
      "model": { ... },        # see model_from_config
      "experiment": { ... }    # see experiment_from_config
    }

The model section is also accepted on its own by commands that only simulate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .bounds import MomentCaps
from .errors import ConfigError, FtscovError
from .grid import GridSpace
from .processes import (
    CrossLink,
    InnovationLaw,
    LinearRule,
    ModelSpec,
    brownian_bridge_law,
    commuting_operator,
    gaussian_kernel_op,
)

SCHEMA_VERSION = 1

_BOUND_TARGETS = ("auto", "xi", "tau", "tau_tilde")


@dataclass
class ExperimentConfig:
    """Validated Monte Carlo experiment definition."""

    model: ModelSpec
    lags: list
    powers_m: list
    powers_n: list
    sample_sizes: list
    replications: int
    seed: int
    bound_target: str = "auto"
    horizon: int = 12
    moment_replications: int = 2000
    moment_caps: Optional[MomentCaps] = None
    jobs: int = 1
    raw: dict = field(default_factory=dict, repr=False)


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")
    return data


def _innovation_from_config(space: GridSpace, section: Optional[dict]) -> InnovationLaw:
    section = section or {}
    kernel = section.get("kernel", "brownian-bridge")
    if kernel != "brownian-bridge":
        raise ConfigError(f"unknown innovation kernel {kernel!r}")
    normalize = section.get("normalize", "nu4")
    law = brownian_bridge_law(space, normalize=normalize)
    extra = section.get("scale")
    if extra is not None:
        law = InnovationLaw(law.kind, law.covariance, scale=law.scale * float(extra))
    return law


def _ops_from_config(space: GridSpace, entries) -> tuple:
    ops = []
    for entry in entries:
        norm = float(entry["norm"])
        lengthscale = float(entry.get("lengthscale", 0.25))
        ops.append(gaussian_kernel_op(space, lengthscale, norm=norm))
    return tuple(ops)


def model_from_config(section: dict) -> ModelSpec:
    """Build a ModelSpec from its config section; raises ConfigError on bad input."""
    if not isinstance(section, dict):
        raise ConfigError("model section must be a JSON object")
    kind = section.get("kind")
    if kind not in ("iid", "far", "linear", "farma", "degenerate"):
        raise ConfigError(f"unknown model kind {kind!r}")
    d = int(section.get("grid_points", 32))
    if d < 1:
        raise ConfigError(f"grid_points must be positive, got {d}")
    space = GridSpace.uniform(d)
    innovation = _innovation_from_config(space, section.get("innovation"))
    try:
        if kind == "iid":
            model = ModelSpec("iid", space, innovation)
        elif kind == "degenerate":
            model = ModelSpec("degenerate", space, innovation)
        elif kind == "far":
            if "commuting_psi" in section:
                psi = commuting_operator(innovation, float(section["commuting_psi"]))
                ar_ops = (psi,)
            elif "ar" in section:
                ar_ops = _ops_from_config(space, section["ar"])
            else:
                contraction = float(section.get("contraction", 0.5))
                lengthscale = float(section.get("ar_lengthscale", 0.25))
                if contraction == 0.0:
                    from .grid import zero_op

                    ar_ops = (zero_op(space),)
                else:
                    ar_ops = (gaussian_kernel_op(space, lengthscale, norm=contraction),)
            model = ModelSpec("far", space, innovation, ar_ops=ar_ops)
        elif kind == "linear":
            lin = section.get("linear", {})
            base = gaussian_kernel_op(space, float(lin.get("lengthscale", 0.25)), norm=1.0)
            rule = LinearRule(
                base=base, scale=float(lin.get("scale", 0.4)), ratio=float(lin.get("ratio", 0.5))
            )
            model = ModelSpec("linear", space, innovation, linear_rule=rule)
        else:  # farma
            ar_ops = _ops_from_config(space, section.get("ar", []))
            ma_ops = _ops_from_config(space, section.get("ma", []))
            model = ModelSpec("farma", space, innovation, ar_ops=ar_ops, ma_ops=ma_ops)
    except FtscovError as exc:
        raise ConfigError(f"invalid model section: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model section: {exc}") from exc

    cross = section.get("cross")
    cross_link = None
    if cross is not None:
        theta = gaussian_kernel_op(
            space, float(cross.get("lengthscale", 0.35)), norm=float(cross.get("norm", 0.7))
        )
        base = brownian_bridge_law(space)
        noise = InnovationLaw(
            base.kind, base.covariance, scale=base.scale * float(cross.get("noise_scale", 0.5))
        )
        cross_link = CrossLink(theta=theta, noise=noise)
    return ModelSpec(
        model.kind,
        model.space,
        model.innovation,
        ar_ops=model.ar_ops,
        ma_ops=model.ma_ops,
        linear_rule=model.linear_rule,
        cross_link=cross_link,
        fixed_value=model.fixed_value,
        config=json.loads(json.dumps(section)),
    )


def model_to_config(model: ModelSpec) -> dict:
    """Config section reproducing a model built by :func:`model_from_config`.

    Round trip: ``model_from_config(model_to_config(m))`` rebuilds the same
    model. Models assembled directly from operators carry no config section
    and are rejected.
    """
    if model.config is None:
        raise ConfigError("model was not built from a config section; nothing to serialize")
    return json.loads(json.dumps(model.config))


def _caps_from_config(section) -> Optional[MomentCaps]:
    if not section:
        return None
    known = {"nu4_x", "nu4_y", "nu2_x", "nu2_y", "coupling_sum_x", "coupling_sum_y"}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown moment cap fields: {sorted(unknown)}")
    return MomentCaps(**{k: float(v) for k, v in section.items()})


def experiment_from_config(data: dict, jobs: int = 1, seed: Optional[int] = None) -> ExperimentConfig:
    """Build a validated ExperimentConfig; admissibility of every cell is checked later
    against the lag-window rules, but counts and targets are validated here."""
    model = model_from_config(data.get("model", {}))
    exp = data.get("experiment")
    if not isinstance(exp, dict):
        raise ConfigError("missing experiment section")
    try:
        lags = [int(h) for h in exp.get("lags", [0])]
        powers_m = [int(m) for m in exp.get("powers_m", [1])]
        powers_n = [int(n) for n in exp.get("powers_n", powers_m)]
        sample_sizes = [int(n) for n in exp.get("sample_sizes", [400])]
        replications = int(exp.get("replications", 100))
        cfg_seed = int(exp.get("seed", 0))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid experiment section: {exc}") from exc
    if replications < 2:
        raise ConfigError(f"replications must be >= 2, got {replications}")
    if not lags or not powers_m or not powers_n or not sample_sizes:
        raise ConfigError("experiment grid must be nonempty")
    bound = exp.get("bound", {})
    target = bound.get("target", "auto")
    if target not in _BOUND_TARGETS:
        raise ConfigError(f"unknown bound target {target!r}; expected one of {_BOUND_TARGETS}")
    horizon = int(bound.get("horizon", 12))
    moment_reps = int(bound.get("moment_replications", 2000))
    if horizon < 1 or moment_reps < 2:
        raise ConfigError("bound horizon must be >= 1 and moment_replications >= 2")
    caps = _caps_from_config(bound.get("moment_caps"))
    return ExperimentConfig(
        model=model,
        lags=lags,
        powers_m=powers_m,
        powers_n=powers_n,
        sample_sizes=sample_sizes,
        replications=replications,
        seed=cfg_seed if seed is None else int(seed),
        bound_target=target,
        horizon=horizon,
        moment_replications=moment_reps,
        moment_caps=caps,
        jobs=int(jobs),
        raw=data,
    )
