"""
phi-mixtures of infinitely divisible laws.

For a Laplace transform ``phi`` and an ID characteristic function ``omega``
the CF ``phi(-ln omega(s))`` is the law of ``Y(T)``: the Levy process with
time-1 CF ``omega`` read at an independent random time ``T`` with LT ``phi``.
The discrete analogue uses an ID PGF ``Q`` in place of ``omega``.

When ``omega = exp(-psi)`` with ``psi`` semi-stable(a, b), ``psi(bs) =
b^alpha psi(s)``, so ``f(s) = phi(psi(s))`` factors as

    f(s) = phi(b^alpha psi(s)) * [phi(psi(s)) / phi(b^alpha psi(s))]
         = f(bs) * phi0(psi(s)),

and ``phi0 = phi(x) / phi(b^alpha x)`` is a Laplace transform whenever
``phi`` decomposes at ``c = b^alpha``. The witness functions below check both
halves of that argument numerically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decompose import (
    DEFAULT_C_GRID,
    RESIDUAL_TOLERANCE,
    check_lt_semisd,
    is_valid_cf,
)
from .errors import VanishingTransformError
from .report import (
    DecompositionReport,
    Identity,
    ValidityCertificate,
    Verdict,
    combine_verdicts,
    verdict_from,
)
from .transforms import DEFAULT_CONFIG, Kind, TransformFn, _require_kind

__all__ = [
    "MixtureSpec",
    "gamma_lt",
    "exponential_lt",
    "degenerate_lt",
    "compound_poisson_lt",
    "gen_semi_ml_lt",
    "neg_log",
    "phi_mixture_cf",
    "phi_mixture_pgf",
    "generalized_semi_alpha_laplace",
    "theorem3_witness",
    "theorem4_witness",
    "ASSUMED_SD",
    "SAMPLED_SD",
]

ASSUMED_SD = "assumed-SD (corpus)"
SAMPLED_SD = "sampled-SD (checked)"

_FLOOR = 1e-300
_PATH_STEPS = 128


def gamma_lt(beta, theta=1.0):
    """Laplace transform ``(1 + theta x)^-beta`` of a gamma law (SD)."""
    if not beta > 0 or not theta > 0:
        raise ValueError("beta and theta must be positive")
    return TransformFn(
        Kind.LT, lambda x: (1.0 + theta * x) ** (-beta),
        label=f"gamma-lt(beta={beta:g}, theta={theta:g})",
        sampler=lambda rng, size: rng.gamma(beta, theta, size),
        meta={"family": "gamma", "params": {"beta": beta, "theta": theta}, "sd": True},
    )


def exponential_lt(theta=1.0):
    """Laplace transform ``1 / (1 + theta x)`` of an exponential law (SD)."""
    lt = gamma_lt(1.0, theta)
    return TransformFn(Kind.LT, lt.func, label=f"exponential-lt(theta={theta:g})",
                       sampler=lt.sampler,
                       meta={**lt.meta, "family": "gamma", "alias": "exponential"})


def degenerate_lt(rate=1.0):
    """Laplace transform ``exp(-rate x)`` of the point mass at ``rate``.

    As a directing process it is the deterministic clock ``T(t) = rate t``.
    """
    if not rate > 0:
        raise ValueError("rate must be positive")
    return TransformFn(
        Kind.LT, lambda x: np.exp(-rate * np.asarray(x)),
        label=f"degenerate-lt(rate={rate:g})",
        sampler=lambda rng, size: np.full(size, float(rate)),
        meta={"family": "degenerate", "params": {"rate": rate}, "sd": True},
    )


def compound_poisson_lt(rate=1.0, jump_mean=1.0):
    """LT ``exp(-rate (1 - 1/(1 + jump_mean x)))``: Poisson many exponential jumps.

    Not SD (it has an atom at 0), so theorem witnesses sweep it rather than
    assume.
    """
    if not rate > 0 or not jump_mean > 0:
        raise ValueError("rate and jump_mean must be positive")

    def sample(rng, size):
        k = rng.poisson(rate, size)
        return np.where(k > 0, rng.gamma(np.maximum(k, 1), jump_mean), 0.0)

    return TransformFn(
        Kind.LT,
        lambda x: np.exp(-rate * (1.0 - 1.0 / (1.0 + jump_mean * np.asarray(x)))),
        label=f"compound-poisson-lt(rate={rate:g}, jump_mean={jump_mean:g})",
        sampler=sample,
        meta={"family": "compound-poisson", "params": {"rate": rate, "jump_mean": jump_mean}},
    )


def gen_semi_ml_lt(lexp, beta=1.0):
    """LT ``(1 + psi_+(x))^-beta`` with ``psi_+`` a one-sided semi-stable exponent.

    Semi-SD(``lexp.b``): the ratio ``phi(x) / phi(b^gamma x)`` is itself a gamma
    mixture. With ``eps != 0`` it is not flagged SD.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    meta = {"family": "gen-semi-mittag-leffler", "semisd_b": lexp.b,
            "params": {**lexp.to_dict(), "beta": beta}, "laplace_exponent": lexp}
    if lexp.h_epsilon == 0.0:
        meta["sd"] = True
    return TransformFn(
        Kind.LT, lambda x: (1.0 + lexp(x)) ** (-beta),
        label=(f"gen-semi-ml-lt(gamma={lexp.gamma:g}, b={lexp.b:.6g}, "
               f"eps={lexp.h_epsilon:.3g}, beta={beta:g})"),
        meta=meta,
    )


@dataclass(frozen=True)
class MixtureSpec:
    phi: TransformFn
    base: TransformFn
    result_kind: Kind = Kind.CF

    def __post_init__(self):
        _require_kind(self.phi, Kind.LT)
        object.__setattr__(self, "result_kind", Kind(self.result_kind))
        if self.base.kind is not self.result_kind:
            raise ValueError(
                f"base is a {self.base.kind.value}, result_kind is {self.result_kind.value}")
        if abs(complex(self.phi(0.0)) - 1.0) > 1e-12:
            raise ValueError("phi(0) must be 1")

    def to_dict(self):
        return {"phi": {"label": self.phi.label, **self.phi.meta.get("params", {})},
                "base": {"label": self.base.label, **self.base.meta.get("params", {})},
                "result_kind": self.result_kind.value}


def neg_log(base):
    """Callable ``s -> -ln base(s)`` on the continuous branch.

    Uses the attached exponent when the base carries one. Otherwise takes the
    principal log and, where the values leave the positive reals, tracks the
    argument along the straight path from the base point (0 for a CF, 1 for a
    PGF) and picks the matching ``2 pi k`` shift.
    """
    if base.kind is Kind.CF and "exponent" in base.meta:
        return lambda s: base.meta["exponent"](s)
    if base.kind is Kind.PGF and "neg_log" in base.meta:
        return base.meta["neg_log"]
    origin = 0.0 if base.kind is Kind.CF else 1.0

    def func(s):
        s = np.asarray(s)
        w = np.asarray(base(s), dtype=complex)
        small = np.abs(w) < _FLOOR
        if np.any(small):
            raise VanishingTransformError(
                f"nonvanishing violated at {complex(np.broadcast_to(s, w.shape)[small].ravel()[0]):.6g}",
                code="nonvanishing-violated")
        if np.all((w.imag == 0) & (w.real > 0)):
            return -np.log(w.real)
        principal = np.log(w)
        t = np.linspace(0.0, 1.0, _PATH_STEPS)
        flat = np.atleast_1d(s).ravel()
        path = origin + np.multiply.outer(flat - origin, t)
        along = np.asarray(base(path), dtype=complex)
        if np.any(np.abs(along) < _FLOOR):
            raise VanishingTransformError("nonvanishing violated on the path",
                                          code="nonvanishing-violated")
        arg = np.unwrap(np.angle(along), axis=-1)[:, -1].reshape(principal.shape)
        k = np.round((arg - principal.imag) / (2.0 * np.pi))
        return -(principal + 2j * np.pi * k)

    return func


def _mixture_sampler(phi, base):
    """``Y(T)`` sampler when both ingredients have closed forms."""
    if phi.sampler is None:
        return None
    psi = base.meta.get("exponent")
    if psi is not None and getattr(psi, "is_stable", False):
        from .semistable import stable_increment_sampler

        inc = stable_increment_sampler(psi)
        return lambda rng, size: inc(rng, phi.sampler(rng, size))
    if base.meta.get("family") == "discrete-semistable" and \
            base.meta["laplace_exponent"].gamma == 1.0:
        lam = base.meta["laplace_exponent"].scale
        return lambda rng, size: rng.poisson(lam * phi.sampler(rng, size))
    return None


def phi_mixture_cf(spec):
    """CF ``f(s) = phi(-ln omega(s))`` of the phi-mixture ``Y(T)``.

    Raises :class:`VanishingTransformError` (``nonvanishing-violated``) on
    evaluation where the base CF vanishes.
    """
    if spec.result_kind is not Kind.CF:
        raise ValueError("phi_mixture_cf needs result_kind CF")
    phi, base = spec.phi, spec.base
    nl = neg_log(base)
    meta = {"family": "phi-mixture", "phi": phi, "base": base}
    if "exponent" in base.meta:
        meta["exponent_inner"] = base.meta["exponent"]
    return TransformFn(
        Kind.CF, lambda s: phi(nl(s)),
        label=f"phi_mixture({phi.label} o {base.label})",
        sampler=_mixture_sampler(phi, base), meta=meta,
    )


def _zero_inflated_innovation(psi, beta, marginal_sampler):
    """Innovation sampler for ``(1 + psi)^-beta`` with integer ``beta``.

    With ``c = rho^alpha``, ``((1 + c psi)/(1 + psi))^beta`` is the law of
    ``Y(G)``, ``G ~ Gamma(K)``, ``K ~ Binomial(beta, 1 - c)``.
    """
    from .semistable import power_of_b, stable_increment_sampler

    inc = stable_increment_sampler(psi)

    def factory(rho):
        if not psi.is_stable and power_of_b(rho, psi.b) is None:
            return None
        c = rho ** psi.alpha

        def sample(rng, size):
            k = rng.binomial(int(beta), 1.0 - c, size)
            t = np.where(k > 0, rng.gamma(np.maximum(k, 1), 1.0, size), 0.0)
            return inc(rng, t)

        return sample

    return factory


def generalized_semi_alpha_laplace(psi, beta):
    """CF ``(1 + psi(s))^-beta``: the gamma(beta) mixture of ``exp(-psi)``.

    ``beta = 1`` with a stable ``psi`` is the Linnik (alpha-Laplace) law.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    from .semistable import semistable_cf

    phi = gamma_lt(beta)
    base = semistable_cf(psi)
    f = phi_mixture_cf(MixtureSpec(phi, base))
    meta = dict(f.meta)
    meta.update(family="gen-semi-alpha-laplace",
                params={**psi.to_dict(), "beta": beta}, exponent_inner=psi)
    if psi.is_stable and float(beta).is_integer():
        meta["innovation_sampler"] = _zero_inflated_innovation(psi, beta, f.sampler)
    return TransformFn(
        Kind.CF, lambda s: (1.0 + psi(s)) ** (-beta),
        label=(f"gen-semi-alpha-laplace(alpha={psi.alpha:g}, b={psi.b:.6g}, "
               f"eps={psi.h_epsilon:g}, beta={beta:g})"),
        sampler=f.sampler, meta=meta,
    )


def _sd_hypothesis(phi, c_grid, cfg):
    """Return (label, verdict, sub_reports) for the claim "phi is SD"."""
    if phi.meta.get("sd"):
        return ASSUMED_SD, Verdict.PASS, []
    subs = [check_lt_semisd(phi, c, cfg=cfg) for c in c_grid]
    return SAMPLED_SD, combine_verdicts(r.verdict for r in subs), subs


def _witness(psi, phi, c, route, hypothesis, hyp_verdict, hyp_reports, grid, cfg):
    grid = cfg.psd_grid() if grid is None else np.asarray(grid, dtype=float)
    f = lambda s: phi(psi(s))
    phi0 = lambda x: phi(x) / phi(c * np.asarray(x))
    f0 = TransformFn(Kind.CF, lambda s: phi0(psi(s)),
                     label=f"{route}_innovation({phi.label}, c={c:.6g})")
    resid = float(np.max(np.abs(f(grid) - f(psi.b * grid) * f0(grid))))
    cert = is_valid_cf(f0, grid, cfg.tolerance)
    lt_report = check_lt_semisd(phi, c, cfg=cfg)
    verdict = combine_verdicts([
        verdict_from(resid, cert.value, cfg.tolerance, RESIDUAL_TOLERANCE),
        lt_report.verdict,
        hyp_verdict,
    ])
    caveat = cert.caveat
    if route == "theorem4":
        caveat += ("; the LT-level factor phi(x)/phi(b^alpha x) is the substitution "
                   "c = b^alpha carried over from the SD case")
    return DecompositionReport(
        Identity.CF_SEMI_SD, {"b": psi.b, "c": c}, resid, cert, verdict,
        caveat=caveat,
        details={"route": route, "hypothesis": hypothesis,
                 "hypothesis_verdict": hyp_verdict.value,
                 "lt_factor_verdict": lt_report.verdict.value,
                 "exponent": psi.to_dict(), "phi": phi.label},
        sub_reports=[lt_report, *hyp_reports], factor=f0,
    )


def _resolve_c(psi, c):
    c0 = psi.b ** psi.alpha
    if c is not None and not np.isclose(c, c0, rtol=1e-12, atol=0):
        raise ValueError(f"the witness needs c = b^alpha = {c0:.12g}, got {c!r}")
    return c0


def theorem3_witness(psi, phi_sd, c=None, grid=None, cfg=DEFAULT_CONFIG,
                     c_grid=DEFAULT_C_GRID):
    """Certify that ``phi(psi(s))`` is semi-SD(b) when ``phi`` is SD.

    ``phi`` is taken as SD from its corpus flag or checked by an LT semi-SD
    sweep over ``c_grid``; the CF decomposition is then tested at
    ``c = b^alpha``.
    """
    _require_kind(phi_sd, Kind.LT)
    c = _resolve_c(psi, c)
    label, verdict, subs = _sd_hypothesis(phi_sd, c_grid, cfg)
    return _witness(psi, phi_sd, c, "theorem3", label, verdict, subs, grid, cfg)


def theorem4_witness(psi, phi_semisd, grid=None, cfg=DEFAULT_CONFIG):
    """Certify that ``phi(psi(s))`` is semi-SD(b) when ``phi`` is semi-SD(b^alpha).

    Only the single decomposition of ``phi`` at ``c = b^alpha`` is required.
    """
    _require_kind(phi_semisd, Kind.LT)
    c = _resolve_c(psi, None)
    hyp = check_lt_semisd(phi_semisd, c, cfg=cfg)
    return _witness(psi, phi_semisd, c, "theorem4", f"semi-SD({c:.6g}) (checked)",
                    hyp.verdict, [], grid, cfg)


def phi_mixture_pgf(phi, Q, cfg=DEFAULT_CONFIG):
    """PGF ``P(s) = phi(-ln Q(s))``.

    Raises
    ------
    VanishingTransformError
        If ``Q`` vanishes on ``[0, 1]``.
    """
    _require_kind(phi, Kind.LT)
    _require_kind(Q, Kind.PGF)
    s = np.linspace(0.0, 1.0, cfg.unit_grid_points)
    q = np.abs(np.asarray(Q(s), dtype=complex))
    if np.any(q < _FLOOR):
        raise VanishingTransformError(
            f"Q vanishes at s={s[np.argmax(q < _FLOOR)]:.4g}", code="vanishing-pgf")
    nl = neg_log(Q)
    meta = {"family": "phi-mixture-pgf", "phi": phi, "base": Q}
    if "b" in Q.meta:
        meta["b"] = Q.meta["b"]
    return TransformFn(
        Kind.PGF, lambda z: phi(nl(z)),
        label=f"phi_mixture_pgf({phi.label} o {Q.label})",
        sampler=_mixture_sampler(phi, Q), meta=meta,
    )
