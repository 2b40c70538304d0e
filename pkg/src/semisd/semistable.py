"""
Semi-stable Levy exponents with a log-periodic modulation.

The symmetric exponent is

    psi(u) = scale * |u|^alpha * h(u),
    h(u)   = 1 + eps * cos(2 pi ln|u| / ln(1/b) + phase),

so ``psi(u) = a psi(b u)`` holds identically with ``a = b^-alpha``: replacing
``u`` by ``b u`` shifts ``ln|u|`` by exactly one period of ``h``. ``eps = 0``
gives the strictly stable exponent.

The positive (subordinator) analogue ``x^gamma h(x)`` with ``0 < gamma < 1``
provides semi-stable Laplace transforms and, through ``P(s) = phi(1 - s)``,
discrete semi-stable PGFs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache

import numpy as np
from scipy.special import gamma as gamma_fn

from . import samplers
from .errors import InvalidExponentError
from .report import DecompositionReport, Identity, ValidityCertificate, Verdict
from .transforms import DEFAULT_CONFIG, Kind, TransformFn

__all__ = [
    "H_EPS_CAP",
    "h_eps_max",
    "levy_density_bound",
    "subordinator_density_bound",
    "SemiStableExponent",
    "SemiStableLaplaceExponent",
    "make_exponent",
    "make_laplace_exponent",
    "semistable_cf",
    "semistable_lt",
    "discrete_semistable_pgf",
    "check_scaling_identity",
    "theorem8_innovation",
]

H_EPS_CAP = 0.05


def h_eps_max(alpha):
    """Default admissibility cap on ``|eps|``.

    An exponent with ``alpha = 2`` must be Gaussian, so no modulation is
    allowed there.
    """
    return 0.0 if alpha == 2 else H_EPS_CAP


def _levy_weight(z):
    # |u|^z = int (1 - cos ux) C(z) |x|^{-1-z} dx for 0 < Re z < 2
    return gamma_fn(1.0 + z) * np.sin(0.5 * np.pi * z) / np.pi


def _subordinator_weight(z):
    # x^z = int_0^inf (1 - e^{-xt}) K(z) t^{-1-z} dt for 0 < Re z < 1
    return z / gamma_fn(1.0 - z)


def levy_density_bound(alpha, b):
    """Largest ``|eps|`` keeping the Levy density of ``|u|^alpha h(u)`` nonnegative.

    With one harmonic of frequency ``w = 2 pi / ln(1/b)`` the density is
    ``|x|^{-1-alpha} [C(alpha) + eps Re(e^{i phase} C(alpha + i w) |x|^{-i w})]``,
    so the law exists iff ``|eps| <= C(alpha) / |C(alpha + i w)|``.
    """
    if alpha >= 2:
        return 0.0
    w = 2.0 * np.pi / math.log(1.0 / b)
    return float(abs(_levy_weight(alpha)) / abs(_levy_weight(alpha + 1j * w)))


def subordinator_density_bound(gamma, b):
    """As :func:`levy_density_bound` for the one-sided exponent ``x^gamma h(x)``."""
    if gamma >= 1:
        return 0.0
    w = 2.0 * np.pi / math.log(1.0 / b)
    return float(abs(_subordinator_weight(gamma))
                 / abs(_subordinator_weight(gamma + 1j * w)))


def _validate_common(index, b, h_epsilon, scale, index_name, upper):
    if not (0.0 < index <= upper):
        raise ValueError(f"{index_name} must be in (0, {upper:g}]")
    if not (0.0 < b < 1.0):
        raise ValueError("b must be in (0, 1); negative b is not supported")
    if not scale > 0:
        raise ValueError("scale must be positive")
    if not math.isfinite(h_epsilon):
        raise ValueError("h_epsilon must be finite")


@dataclass(frozen=True)
class SemiStableExponent:
    """Symmetric semi-stable Levy exponent ``scale |u|^alpha h(u)``.

    ``a`` is derived as ``b**-alpha`` and never set independently.
    ``unverified`` marks an exponent built past the admissibility cap; CFs
    built from it must pass the PSD certificate first.
    """

    alpha: float
    b: float
    h_epsilon: float = 0.0
    h_phase: float = 0.0
    scale: float = 1.0
    unverified: bool = False
    a: float = field(init=False)

    def __post_init__(self):
        _validate_common(self.alpha, self.b, self.h_epsilon, self.scale, "alpha", 2.0)
        if abs(self.h_epsilon) >= 1.0:
            raise InvalidExponentError("|h_epsilon| >= 1 makes h vanish")
        object.__setattr__(self, "h_phase", float(self.h_phase) % (2.0 * np.pi))
        object.__setattr__(self, "a", self.b ** (-self.alpha))

    @property
    def period(self):
        """Period of ``h`` in ``ln|u|``."""
        return -math.log(self.b)

    @property
    def is_stable(self):
        return self.h_epsilon == 0.0

    def h(self, u):
        au = np.abs(np.asarray(u, dtype=float))
        with np.errstate(divide="ignore"):
            arg = 2.0 * np.pi * np.log(au) / self.period + self.h_phase
        out = 1.0 + self.h_epsilon * np.cos(arg)
        return np.where(au > 0, out, 1.0)

    def __call__(self, u):
        au = np.abs(np.asarray(u, dtype=float))
        if self.h_epsilon == 0.0:
            return self.scale * au ** self.alpha
        safe = np.where(au > 0, au, 1.0)
        val = self.scale * safe ** self.alpha * self.h(safe)
        return np.where(au > 0, val, 0.0)

    @cached_property
    def admissibility_bound(self):
        return levy_density_bound(self.alpha, self.b)

    def levy_tail(self, x):
        """Levy measure of ``(x, inf)`` for ``x > 0``."""
        x = np.asarray(x, dtype=float)
        w = 2.0 * np.pi / self.period
        c0 = _levy_weight(self.alpha)
        z = self.alpha + 1j * w
        mod = self.h_epsilon * np.real(
            np.exp(1j * self.h_phase) * _levy_weight(z) * x ** (-z) / z)
        return self.scale * (c0 * x ** (-self.alpha) / self.alpha + mod)

    def with_scale(self, scale):
        return replace(self, scale=scale)

    def to_dict(self):
        return {"alpha": self.alpha, "b": self.b, "h_epsilon": self.h_epsilon,
                "h_phase": self.h_phase, "scale": self.scale}


@dataclass(frozen=True)
class SemiStableLaplaceExponent:
    """One-sided exponent ``scale x^gamma h(x)`` of a semi-stable subordinator.

    Evaluates on complex ``x`` with positive real part through the principal
    branch, which is what PGFs on the unit circle need.
    """

    gamma: float
    b: float
    h_epsilon: float = 0.0
    h_phase: float = 0.0
    scale: float = 1.0
    a: float = field(init=False)

    def __post_init__(self):
        _validate_common(self.gamma, self.b, self.h_epsilon, self.scale, "gamma", 1.0)
        if self.gamma == 1.0 and self.h_epsilon != 0.0:
            raise InvalidExponentError("gamma = 1 admits only the drift (eps = 0)")
        if abs(self.h_epsilon) >= 1.0:
            raise InvalidExponentError("|h_epsilon| >= 1 makes h vanish")
        object.__setattr__(self, "h_phase", float(self.h_phase) % (2.0 * np.pi))
        object.__setattr__(self, "a", self.b ** (-self.gamma))

    @property
    def alpha(self):
        return self.gamma

    @property
    def period(self):
        return -math.log(self.b)

    def __call__(self, x):
        x = np.asarray(x)
        if not np.iscomplexobj(x):
            x = x.astype(float)
        nz = x != 0
        safe = np.where(nz, x, 1.0)
        logx = np.log(safe)
        val = np.exp(self.gamma * logx)
        if self.h_epsilon != 0.0:
            val = val * (1.0 + self.h_epsilon
                         * np.cos(2.0 * np.pi * logx / self.period + self.h_phase))
        return np.where(nz, self.scale * val, 0.0)

    @cached_property
    def admissibility_bound(self):
        return subordinator_density_bound(self.gamma, self.b)

    def to_dict(self):
        return {"gamma": self.gamma, "b": self.b, "h_epsilon": self.h_epsilon,
                "h_phase": self.h_phase, "scale": self.scale}


def make_exponent(alpha, b, h_epsilon=0.0, h_phase=0.0, scale=1.0, *, override=False):
    """Build a :class:`SemiStableExponent` after range and admissibility checks.

    Raises
    ------
    ValueError
        Out-of-range ``alpha``, ``b`` or ``scale``.
    InvalidExponentError
        ``|h_epsilon|`` above :func:`h_eps_max` without ``override``. With the
        override the exponent is flagged and :func:`semistable_cf` certifies
        the CF before returning it.
    """
    cap = h_eps_max(alpha)
    beyond = abs(h_epsilon) > cap
    if beyond and not override:
        raise InvalidExponentError(
            f"|h_epsilon|={abs(h_epsilon):g} exceeds the admissibility cap "
            f"{cap:g} for alpha={alpha:g}; pass override=True to certify downstream"
        )
    return SemiStableExponent(alpha, b, h_epsilon, h_phase, scale, unverified=beyond)


def make_laplace_exponent(gamma, b, h_epsilon=0.0, h_phase=0.0, scale=1.0, *,
                          override=False):
    """One-sided counterpart of :func:`make_exponent`.

    The cap is the smaller of ``H_EPS_CAP`` and the exact density bound,
    which is tiny unless ``b`` is small: ``1 / Gamma(1 - gamma - i w)`` grows
    like ``exp(pi w / 2)``.
    """
    cap = 0.0 if gamma == 1 else min(H_EPS_CAP, subordinator_density_bound(gamma, b))
    if abs(h_epsilon) > cap and not override:
        raise InvalidExponentError(
            f"|h_epsilon|={abs(h_epsilon):g} exceeds the admissibility cap {cap:.3g} "
            f"for gamma={gamma:g}, b={b:g}"
        )
    return SemiStableLaplaceExponent(gamma, b, h_epsilon, h_phase, scale)


def stable_increment_sampler(psi):
    """Closed-form sampler of ``Y(t)`` for a stable exponent (``eps = 0``)."""
    alpha, scale = psi.alpha, psi.scale

    def sample(rng, elapsed):
        elapsed = np.asarray(elapsed, dtype=float)
        if alpha == 2.0:
            return np.sqrt(2.0 * scale * elapsed) * rng.standard_normal(elapsed.shape)
        z = samplers.symmetric_stable(rng, alpha, elapsed.shape)
        return (scale * elapsed) ** (1.0 / alpha) * z

    return sample


@lru_cache(maxsize=16)
def levy_sampler(psi, cfg=DEFAULT_CONFIG):
    """Cached numeric-inversion sampler of ``Y(t)`` for a modulated exponent."""
    return samplers.SemiStableLevySampler(psi, cfg)


def power_of_b(rho, b, tol=1e-9):
    """Integer ``k >= 1`` with ``rho = b^k``, or ``None``."""
    k = math.log(rho) / math.log(b)
    r = round(k)
    return int(r) if r >= 1 and abs(k - r) < tol else None


def semistable_cf(psi, cfg=DEFAULT_CONFIG):
    """The CF ``exp(-psi(s))``; real, even, and semi-stable(a, b).

    Stable exponents get closed-form samplers (Gaussian, Cauchy, CMS) and an
    innovation-sampler factory for AR(1) use. Unverified exponents are PSD
    certified before the CF is handed out.
    """
    func = lambda s: np.exp(-psi(s))
    meta = {"exponent": psi, "family": "semistable", "params": psi.to_dict()}
    sampler = None
    if psi.is_stable:
        inc = stable_increment_sampler(psi)
        sampler = lambda rng, size: inc(rng, np.ones(size))
        # exp(-psi(s) + psi(rho s)) is stable with scale (1 - rho^alpha) scale
        meta["innovation_sampler"] = lambda rho: (
            lambda rng, size: inc(rng, np.full(size, 1.0 - rho ** psi.alpha)))
        meta["sd"] = True
        name = {2.0: "gaussian", 1.0: "cauchy"}.get(psi.alpha, "stable")
    else:
        name = "semistable"
        sampler = lambda rng, size: levy_sampler(psi, cfg)(rng, np.ones(size))

        def innovation(rho):
            # psi(rho s) = rho^alpha psi(s) only along powers of b
            if power_of_b(rho, psi.b) is None:
                return None
            t = 1.0 - rho ** psi.alpha
            return lambda rng, size: levy_sampler(psi, cfg)(rng, np.full(size, t))

        meta["innovation_sampler"] = innovation
    f = TransformFn(
        Kind.CF, func,
        label=(f"{name}(alpha={psi.alpha:g}, b={psi.b:.6g}, eps={psi.h_epsilon:g}, "
               f"phase={psi.h_phase:.4g}, scale={psi.scale:g})"),
        sampler=sampler, meta=meta,
    )
    if psi.unverified:
        from .decompose import is_valid_cf

        cert = is_valid_cf(f, cfg.psd_grid(), cfg.tolerance)
        if cert.value < -cfg.tolerance:
            raise InvalidExponentError(
                f"exp(-psi) fails the PSD certificate (min eigenvalue {cert.value:.3g})"
            )
        f = f.with_flags("certified-necessary-only")
    return f


def semistable_lt(lexp):
    """Laplace transform ``exp(-psi_+(x))`` of a positive semi-stable law."""
    meta = {"exponent": lexp, "family": "semistable-lt", "params": lexp.to_dict(),
            "semisd_b": lexp.b}
    sampler = None
    if lexp.h_epsilon == 0.0:
        meta["sd"] = True
        meta["family"] = "stable-subordinator" if lexp.gamma < 1 else "degenerate"
        g, c = lexp.gamma, lexp.scale
        if g < 1:
            sampler = lambda rng, size: c ** (1.0 / g) * samplers.positive_stable(rng, g, size)
        else:
            sampler = lambda rng, size: np.full(size, c)
    return TransformFn(
        Kind.LT, lambda x: np.exp(-lexp(x)),
        label=(f"semistable-lt(gamma={lexp.gamma:g}, b={lexp.b:.6g}, "
               f"eps={lexp.h_epsilon:g}, scale={lexp.scale:g})"),
        sampler=sampler, meta=meta,
    )


def discrete_semistable_pgf(lexp):
    """Discrete semi-stable(a, b) PGF ``Q(s) = exp(-psi_+(1 - s))``.

    ``Q(s) = Q(1 - b + b s)^a`` with ``a = b^-gamma``; ``gamma = 1, eps = 0``
    is the Poisson law with mean ``scale``.
    """
    neg_log = lambda s: lexp(1.0 - s)
    meta = {"neg_log": neg_log, "laplace_exponent": lexp, "family": "discrete-semistable",
            "params": lexp.to_dict(), "b": lexp.b, "a": lexp.a}
    sampler = None
    if lexp.gamma == 1.0:
        sampler = lambda rng, size: rng.poisson(lexp.scale, size)
    elif lexp.h_epsilon == 0.0:
        g, c = lexp.gamma, lexp.scale
        sampler = lambda rng, size: rng.poisson(
            c ** (1.0 / g) * samplers.positive_stable(rng, g, size))
    return TransformFn(
        Kind.PGF, lambda s: np.exp(-neg_log(s)),
        label=(f"discrete-semistable(gamma={lexp.gamma:g}, b={lexp.b:.6g}, "
               f"eps={lexp.h_epsilon:g}, scale={lexp.scale:g})"),
        sampler=sampler, meta=meta,
    )


def check_scaling_identity(psi, grid, a=None, b=None, tolerance=1e-12):
    """Report ``max |psi(u) - a psi(b u)|`` over ``grid``.

    ``a`` and ``b`` default to the exponent's own attributes, so hand-built
    callables can be checked against any claimed pair.
    """
    a = psi.a if a is None else a
    b = psi.b if b is None else b
    u = np.asarray(grid, dtype=float)
    if np.any(u == 0):
        raise ValueError("grid must not contain 0")
    lhs = np.asarray(psi(u), dtype=float)
    rhs = a * np.asarray(psi(b * u), dtype=float)
    resid = np.abs(lhs - rhs)
    worst = int(np.argmax(resid))
    max_resid = float(resid[worst])
    degenerate = bool(np.all(lhs == 0))
    cert = ValidityCertificate(
        "scaling-residual", -max_resid,
        {"points": int(u.size), "min": float(np.min(np.abs(u))),
         "max": float(np.max(np.abs(u)))},
        witness=float(u[worst]),
        reason="degenerate exponent (psi == 0)" if degenerate else "",
        caveat="exact identity checked on a finite grid",
    )
    verdict = Verdict.PASS if max_resid <= tolerance else Verdict.FAIL
    return DecompositionReport(
        Identity.SCALING, {"a": a, "b": b}, max_resid, cert, verdict,
        caveat=cert.caveat, details={"degenerate": degenerate},
    )


def theorem8_innovation(psi):
    """The factor ``f0(s) = f(bs)^(a-1) = exp(-(a-1) psi(b s))``.

    ``f(s) = f(bs) f0(s)`` holds identically, so every semi-stable(a, b) law is
    semi-SD(b). ``f0`` is itself semi-stable with scale ``(1 - b^alpha) scale``,
    which is attached as its exponent.
    """
    a, b = psi.a, psi.b
    inner = psi.with_scale((1.0 - b ** psi.alpha) * psi.scale)
    return TransformFn(
        Kind.CF,
        lambda s: np.exp(-(a - 1.0) * psi(b * np.asarray(s, dtype=float))),
        label=f"theorem8_innovation(a={a:.6g}, b={b:.6g})",
        meta={"exponent": inner, "family": "semistable", "params": inner.to_dict()},
    )
