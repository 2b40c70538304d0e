"""
Named constructions used by the command line and the tests.

Each recipe maps a flat parameter dict to a transform (or, for pairings, a
:class:`SubordinationSpec`). Parameter names match the shared config schema:
``alpha, b, h_epsilon, h_phase, scale`` for exponents plus family-specific
keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .mixtures import (
    compound_poisson_lt,
    degenerate_lt,
    exponential_lt,
    gamma_lt,
    gen_semi_ml_lt,
    generalized_semi_alpha_laplace,
    phi_mixture_pgf,
)
from .semistable import (
    discrete_semistable_pgf,
    make_exponent,
    make_laplace_exponent,
    semistable_cf,
    semistable_lt,
)
from .subordination import SubordinationSpec
from .transforms import Kind, TransformFn

__all__ = ["Recipe", "RECIPES", "get_recipe", "build", "recipe_table", "UnknownRecipeError"]


class UnknownRecipeError(KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unknown recipe {self.name!r}"


@dataclass(frozen=True)
class Recipe:
    name: str
    kind: str
    description: str
    defaults: dict
    builder: Callable = field(repr=False)
    aliases: tuple = ()

    def build(self, params=None):
        p = dict(self.defaults)
        for k, v in (params or {}).items():
            k = _canonical(k)
            if k not in p:
                raise ValueError(f"recipe {self.name!r} has no parameter {k!r}; "
                                 f"known: {', '.join(sorted(p)) or 'none'}")
            p[k] = v
        return self.builder(**p)

    def to_dict(self):
        return {"name": self.name, "kind": self.kind, "description": self.description,
                "parameters": dict(self.defaults), "aliases": list(self.aliases)}


_ALIASES = {"eps": "h_epsilon", "phase": "h_phase", "lambda": "lam", "lambda_": "lam",
            "jump-mean": "jump_mean"}


def _canonical(key):
    for prefix in ("driven_", "directing_"):
        if key.startswith(prefix):
            return prefix + _canonical(key[len(prefix):])
    key = key.replace("-", "_") if key not in _ALIASES else key
    return _ALIASES.get(key, key)


def _exponent(alpha, b, h_epsilon=0.0, h_phase=0.0, scale=1.0, override=False):
    return make_exponent(float(alpha), float(b), float(h_epsilon), float(h_phase),
                         float(scale), override=bool(override))


def _point_mass(x0):
    x0 = float(x0)

    def innovation(rho):
        return lambda rng, size: np.full(size, (1.0 - rho) * x0)

    return TransformFn(
        Kind.CF, lambda s: np.exp(1j * x0 * np.asarray(s, dtype=float)),
        label=f"point-mass(x0={x0:g})",
        sampler=lambda rng, size: np.full(size, x0),
        meta={"family": "point-mass", "params": {"x0": x0}, "sd": True,
              "innovation_sampler": innovation},
    )


def _poisson_pgf(lam):
    lam = float(lam)
    lexp = make_laplace_exponent(1.0, 0.5, scale=lam)
    P = discrete_semistable_pgf(lexp)
    return TransformFn(Kind.PGF, P.func, label=f"poisson(lambda={lam:g})", sampler=P.sampler,
                       meta={**P.meta, "family": "poisson", "params": {"lam": lam}})


def _geometric_pgf(p):
    p = float(p)
    if not 0.0 < p <= 1.0:
        raise ValueError("p must be in (0, 1]")
    # the exponential LT with theta = (1-p)/p read at 1 - s
    return TransformFn(
        Kind.PGF, lambda s: p / (1.0 - (1.0 - p) * np.asarray(s)),
        label=f"geometric(p={p:g})",
        sampler=lambda rng, size: rng.geometric(p, size) - 1,
        meta={"family": "geometric", "params": {"p": p},
              "source_lt": exponential_lt((1.0 - p) / p) if p < 1 else None},
    )


def _point_pgf(k):
    k = int(k)
    if k < 0:
        raise ValueError("k must be nonnegative")
    return TransformFn(Kind.PGF, lambda s: np.asarray(s) ** k, label=f"point-pgf(k={k})",
                       sampler=lambda rng, size: np.full(size, k, dtype=np.int64),
                       meta={"family": "point", "params": {"k": k}})


def _pgf_mixture(beta, lam):
    return phi_mixture_pgf(gamma_lt(float(beta)), _poisson_pgf(lam))


def _pairing(driven, directing, times="0,1", paths=0, seed=0):
    def make(**p):
        sub = {k: p.pop(k) for k in ("time_grid", "mc_paths", "seed")}
        dv = RECIPES[driven].build({k[7:]: v for k, v in p.items() if k.startswith("driven_")})
        dr = RECIPES[directing].build(
            {k[10:]: v for k, v in p.items() if k.startswith("directing_")})
        psi = dv.meta["exponent"]
        grid = sub["time_grid"]
        if isinstance(grid, str):
            grid = [float(t) for t in grid.split(",") if t.strip()]
        return SubordinationSpec(psi, dr, tuple(grid), int(sub["mc_paths"]), int(sub["seed"]))

    defaults = {"time_grid": times, "mc_paths": paths, "seed": seed}
    defaults.update({f"driven_{k}": v for k, v in RECIPES[driven].defaults.items()})
    defaults.update({f"directing_{k}": v for k, v in RECIPES[directing].defaults.items()})
    return make, defaults


RECIPES: dict[str, Recipe] = {}


def _register(name, kind, description, defaults, builder, aliases=()):
    RECIPES[name] = Recipe(name, kind, description, dict(defaults), builder, tuple(aliases))
    for a in aliases:
        RECIPES.setdefault(a, RECIPES[name])


_register("gaussian", "CF", "N(0, sigma^2), stable with alpha=2",
          {"sigma": 1.0, "b": 0.5},
          lambda sigma, b: semistable_cf(_exponent(2.0, b, scale=0.5 * float(sigma) ** 2)))
_register("cauchy", "CF", "Cauchy exp(-scale |s|)", {"scale": 1.0, "b": 0.5},
          lambda scale, b: semistable_cf(_exponent(1.0, b, scale=scale)))
_register("stable", "CF", "symmetric stable exp(-scale |s|^alpha)",
          {"alpha": 1.5, "scale": 1.0, "b": 0.5},
          lambda alpha, scale, b: semistable_cf(_exponent(alpha, b, scale=scale)))
_register("semistable", "CF", "symmetric semi-stable(a, b) with log-periodic h",
          {"alpha": 1.0, "b": math.exp(-1.0), "h_epsilon": 0.03, "h_phase": 0.0,
           "scale": 1.0, "override": False},
          lambda **p: semistable_cf(_exponent(**p)))
_register("linnik", "CF", "Linnik (alpha-Laplace) 1/(1 + scale |s|^alpha)",
          {"alpha": 1.0, "scale": 1.0, "b": 0.5},
          lambda alpha, scale, b: generalized_semi_alpha_laplace(
              _exponent(alpha, b, scale=scale), 1.0), aliases=("alpha-laplace",))
_register("gen-semi-alpha-laplace", "CF", "(1 + psi(s))^-beta with psi semi-stable",
          {"alpha": 1.0, "b": math.exp(-1.0), "h_epsilon": 0.03, "h_phase": 0.0,
           "scale": 1.0, "beta": 1.0},
          lambda beta, **p: generalized_semi_alpha_laplace(_exponent(**p), float(beta)))
_register("point-mass", "CF", "degenerate law at x0", {"x0": 1.0}, _point_mass)

_register("gamma-lt", "LT", "gamma LT (1 + theta x)^-beta (SD)", {"beta": 1.0, "theta": 1.0},
          lambda beta, theta: gamma_lt(float(beta), float(theta)))
_register("exponential-lt", "LT", "exponential LT 1/(1 + theta x) (SD)", {"theta": 1.0},
          lambda theta: exponential_lt(float(theta)))
_register("degenerate-lt", "LT", "point mass LT exp(-rate x)", {"rate": 1.0},
          lambda rate: degenerate_lt(float(rate)))
_register("stable-subordinator-lt", "LT", "positive stable LT exp(-scale x^gamma)",
          {"gamma": 0.6, "scale": 1.0, "b": 0.5},
          lambda gamma, scale, b: semistable_lt(
              make_laplace_exponent(float(gamma), float(b), scale=float(scale))))
_register("semistable-lt", "LT", "positive semi-stable LT exp(-scale x^gamma h(x))",
          {"gamma": 0.5, "b": 0.2, "h_epsilon": 3e-4, "h_phase": 0.0, "scale": 1.0},
          lambda gamma, b, h_epsilon, h_phase, scale: semistable_lt(make_laplace_exponent(
              float(gamma), float(b), float(h_epsilon), float(h_phase), float(scale))))
_register("gen-semi-ml-lt", "LT", "(1 + x^gamma h(x))^-beta, semi-SD(b)",
          {"gamma": 0.5, "b": math.exp(-1.0), "h_epsilon": 5e-6, "h_phase": 0.0,
           "scale": 1.0, "beta": 1.0},
          lambda gamma, b, h_epsilon, h_phase, scale, beta: gen_semi_ml_lt(
              make_laplace_exponent(float(gamma), float(b), float(h_epsilon),
                                    float(h_phase), float(scale)), float(beta)))
_register("compound-poisson-lt", "LT", "Poisson(rate) sum of exponential(jump_mean) jumps",
          {"rate": 1.0, "jump_mean": 1.0},
          lambda rate, jump_mean: compound_poisson_lt(float(rate), float(jump_mean)))

_register("pgf-poisson", "PGF", "Poisson(lambda)", {"lam": 3.0}, _poisson_pgf)
_register("pgf-geometric", "PGF", "geometric on {0, 1, ...}: p / (1 - (1-p) s)",
          {"p": 0.5}, _geometric_pgf)
_register("pgf-point", "PGF", "point mass s^k (k=1 is the negative control)", {"k": 1},
          _point_pgf)
_register("pgf-discrete-semistable", "PGF", "discrete semi-stable exp(-psi_+(1 - s))",
          {"gamma": 0.5, "b": 0.2, "h_epsilon": 3e-4, "h_phase": 0.0, "scale": 1.0},
          lambda gamma, b, h_epsilon, h_phase, scale: discrete_semistable_pgf(
              make_laplace_exponent(float(gamma), float(b), float(h_epsilon),
                                    float(h_phase), float(scale))))
_register("pgf-mixture", "PGF", "gamma(beta) mixture of Poisson(lambda): negative binomial",
          {"beta": 2.0, "lam": 3.0}, _pgf_mixture)

for _name, _driven, _directing, _desc in [
    ("sub-gamma-brownian", "gaussian", "gamma-lt", "variance gamma: gamma clock, Brownian"),
    ("sub-gamma-cauchy", "cauchy", "gamma-lt", "gamma clock, Cauchy: Linnik marginal, SD"),
    ("sub-gamma-semistable", "semistable", "gamma-lt", "gamma clock, semi-stable driven"),
    ("sub-semiml-semistable", "semistable", "gen-semi-ml-lt",
     "semi-SD(b^alpha) clock, semi-stable driven"),
    ("sub-degenerate-brownian", "gaussian", "degenerate-lt", "deterministic clock, Brownian"),
    ("sub-stable-brownian", "gaussian", "stable-subordinator-lt",
     "positive stable clock, Brownian"),
    ("sub-cpoisson-brownian", "gaussian", "compound-poisson-lt",
     "compound Poisson clock, Brownian"),
]:
    _b, _d = _pairing(_driven, _directing)
    _register(_name, "subordination", _desc, _d, _b)


def get_recipe(name):
    try:
        return RECIPES[name]
    except KeyError:
        raise UnknownRecipeError(name) from None


def build(name, params=None):
    return get_recipe(name).build(params)


def recipe_table():
    """One entry per recipe (aliases folded in)."""
    seen = []
    for name, r in RECIPES.items():
        if r.name == name:
            seen.append(r.to_dict())
    return seen
