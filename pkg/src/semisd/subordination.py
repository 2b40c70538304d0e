"""
Levy-process marginals and subordination.

A driven Levy process ``Y`` with exponent ``psi`` read at the random clock
``T`` (a subordinator whose time-1 LT is ``phi``) has marginal CF

    E exp(i s Y(T(t))) = phi(psi(s))^t,

the ``t``-th power of the time-1 phi-mixture. Paths are simulated by drawing
clock increments, then driven increments over the elapsed clock time.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import samplers
from .decompose import DEFAULT_C_GRID, check_sd_full, check_semisd
from .errors import SamplerUnavailableError
from .mixtures import theorem3_witness, theorem4_witness
from .report import (
    DecompositionReport,
    Identity,
    ValidityCertificate,
    Verdict,
    combine_verdicts,
)
from .semistable import SemiStableExponent, levy_sampler, stable_increment_sampler
from .series import BLOCK_SIZE, SeriesSample, block_rng, worker_count
from .transforms import DEFAULT_CONFIG, Kind, TransformFn, _require_kind

__all__ = [
    "LevyMarginal",
    "SubordinationSpec",
    "subordinated_cf",
    "marginal_transform",
    "directing_increment_sampler",
    "driven_increment_sampler",
    "simulate_subordinated_path",
    "empirical_cf",
    "mc_crosscheck",
    "verify_theorem567",
    "DEFAULT_S_GRID",
    "SUPPORTED_DIRECTING",
    "SUPPORTED_DRIVEN",
]

DEFAULT_S_GRID = np.linspace(-3.0, 3.0, 13)
SUPPORTED_DIRECTING = ("gamma", "degenerate", "stable-subordinator", "compound-poisson")
SUPPORTED_DRIVEN = ("gaussian", "stable", "semistable (numeric inversion)")
POWER_READING = "t-th power of the time-1 transform"


@dataclass(frozen=True)
class LevyMarginal:
    """Time-``t`` marginal of a Levy process with exponent ``psi``."""

    exponent: object
    t: float

    def __post_init__(self):
        if not self.t >= 0:
            raise ValueError("t must be nonnegative")

    def cf(self, s):
        if self.t == 0:
            return np.ones(np.shape(s))
        return np.exp(-self.t * np.asarray(self.exponent(s)))

    def transform(self):
        return TransformFn(Kind.CF, self.cf, label=f"levy-marginal(t={self.t:g})",
                           meta={"exponent": self.exponent, "t": self.t})


@dataclass(frozen=True)
class SubordinationSpec:
    """Driven exponent, directing LT, time grid and Monte-Carlo settings."""

    driven_exponent: object
    directing_lt: TransformFn
    time_grid: tuple = (0.0, 1.0)
    mc_paths: int = 0
    seed: int = 0

    def __post_init__(self):
        _require_kind(self.directing_lt, Kind.LT)
        grid = tuple(float(t) for t in np.atleast_1d(self.time_grid))
        if not grid or grid[0] < 0 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("time_grid must be strictly increasing and nonnegative")
        object.__setattr__(self, "time_grid", grid)
        if int(self.mc_paths) < 0:
            raise ValueError("mc_paths must be nonnegative")
        object.__setattr__(self, "mc_paths", int(self.mc_paths))

    def to_dict(self):
        psi = self.driven_exponent
        return {
            "driven": psi.to_dict() if hasattr(psi, "to_dict") else repr(psi),
            "directing": {"label": self.directing_lt.label,
                          **self.directing_lt.meta.get("params", {})},
            "time_grid": list(self.time_grid),
            "mc_paths": self.mc_paths,
            "seed": int(self.seed),
            "power_reading": POWER_READING,
        }


def subordinated_cf(spec, t, s):
    """``phi(psi(s))^t``; identically 1 at ``t = 0``."""
    if not t >= 0:
        raise ValueError("t must be nonnegative")
    base = np.asarray(spec.directing_lt(spec.driven_exponent(s)))
    if t == 0:
        return np.ones_like(base)
    if np.iscomplexobj(base) or np.any(base < 0):
        return np.exp(t * np.log(base.astype(complex)))
    return base ** t


def marginal_transform(spec, t=1.0):
    """The time-``t`` marginal CF as a :class:`TransformFn`."""
    return TransformFn(
        Kind.CF, lambda s: subordinated_cf(spec, t, s),
        label=f"subordinated({spec.directing_lt.label}, t={t:g})",
        meta={"family": "subordinated", "exponent_inner": spec.driven_exponent, "t": t},
    )


def directing_increment_sampler(phi):
    """Sampler ``(rng, dt, size) -> T(dt)`` for a corpus subordinator."""
    fam = phi.meta.get("family")
    p = phi.meta.get("params", {})
    if fam == "gamma":
        beta, theta = p["beta"], p["theta"]
        return lambda rng, dt, size: rng.gamma(beta * dt, theta, size)
    if fam == "degenerate":
        rate = p.get("rate", p.get("scale", 1.0))
        return lambda rng, dt, size: np.full(size, rate * dt)
    if fam == "stable-subordinator":
        g, c = p["gamma"], p["scale"]
        return lambda rng, dt, size: (c * dt) ** (1.0 / g) * samplers.positive_stable(rng, g, size)
    if fam == "compound-poisson":
        lam, mu = p["rate"], p["jump_mean"]

        def sample(rng, dt, size):
            k = rng.poisson(lam * dt, size)
            return np.where(k > 0, rng.gamma(np.maximum(k, 1), mu), 0.0)

        return sample
    raise SamplerUnavailableError(
        f"no increment sampler for directing law {phi.label!r}",
        supported=SUPPORTED_DIRECTING,
    )


def driven_increment_sampler(psi, cfg=DEFAULT_CONFIG):
    """Sampler ``(rng, elapsed) -> Y(elapsed)`` for the driven process."""
    if isinstance(psi, SemiStableExponent):
        if psi.is_stable:
            return stable_increment_sampler(psi)
        return levy_sampler(psi, cfg)
    raise SamplerUnavailableError(
        f"no increment sampler for driven exponent {psi!r}", supported=SUPPORTED_DRIVEN)


def _simulate_block(spec, directing, driven, block, size):
    rng = block_rng(spec.seed, block)
    grid = np.asarray(spec.time_grid)
    dts = np.diff(np.concatenate([[0.0], grid]))
    T = np.zeros((size, grid.size))
    X = np.zeros((size, grid.size))
    tcur = np.zeros(size)
    xcur = np.zeros(size)
    for j, dt in enumerate(dts):
        if dt > 0:
            dT = np.maximum(directing(rng, dt, size), 0.0)
            xcur = xcur + driven(rng, dT)
            tcur = tcur + dT
        T[:, j] = tcur
        X[:, j] = xcur
    return T, X


def simulate_subordinated_path(spec, cfg=DEFAULT_CONFIG):
    """Simulate ``mc_paths`` paths of ``Y(T(t))`` on ``spec.time_grid``.

    Returns a :class:`SeriesSample` with ``values`` (X) and ``directing`` (T)
    of shape ``(mc_paths, len(time_grid))``. Paths are generated in blocks of
    ``BLOCK_SIZE``, each with its own stream keyed by the block index, so the
    output is bit-identical for any ``SEMISD_THREADS``.
    """
    directing = directing_increment_sampler(spec.directing_lt)
    driven = driven_increment_sampler(spec.driven_exponent, cfg)
    n = spec.mc_paths
    steps = len(spec.time_grid)
    blocks = [(k, min(BLOCK_SIZE, n - k * BLOCK_SIZE))
              for k in range(-(-n // BLOCK_SIZE))]
    if blocks:
        with ThreadPoolExecutor(max_workers=min(worker_count(), len(blocks))) as pool:
            parts = list(pool.map(
                lambda kb: _simulate_block(spec, directing, driven, *kb), blocks))
        T = np.concatenate([p[0] for p in parts])
        X = np.concatenate([p[1] for p in parts])
    else:
        T = np.zeros((0, steps))
        X = np.zeros((0, steps))
    return SeriesSample(values=X, directing=T, times=np.asarray(spec.time_grid),
                        config=spec, seed=spec.seed, burn_in=0,
                        meta={"paths": n, "block_size": BLOCK_SIZE})


def empirical_cf(x, s):
    """``mean(exp(i s x))`` for each ``s``."""
    x = np.asarray(x, dtype=float).ravel()
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if x.size == 0:
        return np.full(s.shape, np.nan + 0j)
    out = np.empty(s.shape, dtype=complex)
    for i, si in enumerate(s):
        out[i] = np.mean(np.exp(1j * si * x))
    return out


def mc_crosscheck(spec, sample, s_grid=DEFAULT_S_GRID, envelope=5.0):
    """Compare empirical CFs of the sample with ``phi(psi(s))^t`` at every time.

    Pass iff the sup distance at every grid time is at most
    ``envelope / sqrt(N)``.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    n = sample.values.shape[0]
    if n == 0:
        raise ValueError("empty sample")
    bound = envelope / np.sqrt(n)
    per_time = []
    monotone = bool(np.all(np.diff(sample.directing, axis=1) >= 0))
    for j, t in enumerate(sample.times):
        d = np.abs(empirical_cf(sample.values[:, j], s_grid) - subordinated_cf(spec, t, s_grid))
        per_time.append({"t": float(t), "sup_distance": float(np.max(d)),
                         "argmax_s": float(s_grid[int(np.argmax(d))])})
    worst = max(p["sup_distance"] for p in per_time)
    verdict = Verdict.PASS if worst <= bound and monotone else Verdict.FAIL
    cert = ValidityCertificate(
        "mc-envelope-margin", bound - worst,
        {"s_points": int(s_grid.size), "s_min": float(s_grid.min()),
         "s_max": float(s_grid.max()), "paths": int(n)},
        reason="" if monotone else "directing path decreased",
        caveat="Monte-Carlo envelope, not a proof",
    )
    return DecompositionReport(
        Identity.SUBORDINATION_MC, {"paths": int(n), "envelope": float(bound)}, worst,
        cert, verdict, caveat=f"{envelope:g}/sqrt(N) envelope; marginal as the {POWER_READING}",
        details={"per_time": per_time, "directing_monotone": monotone},
    )


def verify_theorem567(spec, which, b_or_cgrid=None, cfg=DEFAULT_CONFIG):
    """Certify the time-1 marginal of a subordinated process.

    ``T5``: SD clock and stable driven, full SD sweep over the c grid.
    ``T6``: SD clock and semi-stable(a, b) driven, semi-SD(b).
    ``T7``: semi-SD(b^alpha) clock and semi-stable(a, b) driven, semi-SD(b).
    """
    which = str(which).upper()
    psi = spec.driven_exponent
    f = marginal_transform(spec, 1.0)
    if which == "T5":
        c_grid = DEFAULT_C_GRID if b_or_cgrid is None else tuple(np.atleast_1d(b_or_cgrid))
        if not getattr(psi, "is_stable", False):
            raise ValueError("T5 needs a stable driven exponent")
        main = check_sd_full(f, c_grid, cfg=cfg)
        subs = [main]
        param = {"c_grid": list(c_grid)}
    elif which in ("T6", "T7"):
        b = psi.b if b_or_cgrid is None else float(b_or_cgrid)
        if not np.isclose(b, psi.b, rtol=1e-12, atol=0):
            raise ValueError(f"the driven exponent is semi-stable with b={psi.b:.12g}")
        main = check_semisd(f, b, cfg=cfg)
        if which == "T6":
            witness = theorem3_witness(psi, spec.directing_lt, cfg=cfg)
        else:
            witness = theorem4_witness(psi, spec.directing_lt, cfg=cfg)
        subs = [main, witness]
        param = {"b": b}
    else:
        raise ValueError(f"which must be T5, T6 or T7, got {which!r}")
    verdict = combine_verdicts(r.verdict for r in subs)
    return DecompositionReport(
        Identity.SUBORDINATION_THEOREM, {"which": which, **param},
        max(r.max_residual for r in subs), main.certificate, verdict,
        caveat=main.caveat + f"; marginal at t=1 as the {POWER_READING}",
        details={"which": which, "directing": spec.directing_lt.label,
                 "driven": psi.to_dict() if hasattr(psi, "to_dict") else repr(psi)},
        sub_reports=subs, factor=main.factor,
    )
