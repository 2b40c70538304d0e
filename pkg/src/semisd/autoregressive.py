"""
AR(1) and INAR(1) schemes with a prescribed stationary marginal.

``X_n = rho X_{n-1} + e_n`` keeps the law of ``X`` fixed exactly when
``f(s) = f(rho s) f_e(s)`` for a CF ``f_e``, so configurations are built
only after the marginal passes the semi-SD certificate at ``rho``. The
integer-valued scheme replaces ``rho X`` by binomial thinning, whose PGF is
``P(1 - rho + rho s)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy import signal, stats

from .decompose import check_discrete_semisd, check_semisd
from .errors import NotSemiSDAtRhoError
from .report import DecompositionReport, Identity, ValidityCertificate, Verdict
from .samplers import CoefficientTable, TabulatedCdf
from .series import SeriesSample
from .transforms import DEFAULT_CONFIG, Kind, TransformFn, pgf_coefficients

__all__ = [
    "InnovationSource",
    "Ar1Config",
    "build_ar1",
    "simulate_ar1",
    "binomial_thinning",
    "simulate_inar1",
    "stationarity_diagnostic",
    "empirical_pgf",
    "poisson_gof",
    "pooled_chisquare",
    "MIN_DIAGNOSTIC_LENGTH",
]

MIN_DIAGNOSTIC_LENGTH = 10_000
DEFAULT_PGF_GRID = np.round(np.arange(1, 10) / 10.0, 1)
DEFAULT_CF_GRID = np.linspace(-3.0, 3.0, 13)


class InnovationSource(str, Enum):
    CLOSED_FORM = "closed-form"
    NUMERIC_INVERSION = "numeric-inversion"
    COEFFICIENT_TABLE = "coefficient-table"


@dataclass
class Ar1Config:
    """A certified AR(1)/INAR(1) configuration.

    ``innovation`` is the extracted factor ``f(s) / f(rho s)`` (or the PGF
    analogue); ``report`` is the certificate that admitted it.
    """

    rho: float
    marginal: TransformFn
    innovation: TransformFn
    innovation_source: InnovationSource
    innovation_sampler: Callable
    marginal_sampler: Callable
    report: DecompositionReport
    n: int = 200_000
    burn_in: int = 0
    seed: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def discrete(self):
        return self.marginal.kind is Kind.PGF

    def to_dict(self):
        return {
            "rho": self.rho, "marginal": self.marginal.label,
            "innovation": self.innovation.label,
            "innovation_source": self.innovation_source.value,
            "n": int(self.n), "burn_in": int(self.burn_in), "seed": int(self.seed),
            "verdict": self.report.verdict.value, **self.meta,
        }


def _table_sampler(f, cfg):
    return TabulatedCdf(f, cfg)


def build_ar1(marginal, rho, *, n=200_000, burn_in=0, seed=0, cfg=DEFAULT_CONFIG):
    """Certify ``marginal`` at ``rho`` and attach innovation/marginal samplers.

    Raises
    ------
    NotSemiSDAtRhoError
        When the semi-SD(rho) certificate does not pass; carries the report.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must be in (0, 1)")
    if n < 0 or burn_in < 0:
        raise ValueError("n and burn_in must be nonnegative")
    if marginal.kind is Kind.PGF:
        report = check_discrete_semisd(marginal, rho, cfg)
    elif marginal.kind is Kind.CF:
        report = check_semisd(marginal, rho, cfg=cfg)
    else:
        raise ValueError("marginal must be a CF or a PGF")
    if report.verdict is not Verdict.PASS:
        raise NotSemiSDAtRhoError(
            f"{marginal.label} is not semi-SD({rho:g}) at certificate strength "
            f"(verdict {report.verdict.value})", report)
    innovation = report.factor

    if marginal.kind is Kind.PGF:
        source = InnovationSource.COEFFICIENT_TABLE
        inn = CoefficientTable(innovation.meta["coefficients"])
        x0 = marginal.sampler or CoefficientTable(pgf_coefficients(marginal, cfg).coeffs)
    else:
        factory = marginal.meta.get("innovation_sampler")
        inn = factory(rho) if factory is not None else None
        if inn is not None:
            source = InnovationSource.CLOSED_FORM
        else:
            source = InnovationSource.NUMERIC_INVERSION
            inn = _table_sampler(innovation, cfg)
        x0 = marginal.sampler or _table_sampler(marginal, cfg)
    return Ar1Config(rho, marginal, innovation, source, inn, x0, report,
                     int(n), int(burn_in), int(seed))


def _rng(seed):
    return np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))


def simulate_ar1(cfg):
    """Simulate ``X_n = rho X_{n-1} + e_n`` starting from ``X_0`` ~ marginal.

    Returns the ``n`` values after discarding ``burn_in``.
    """
    if cfg.discrete:
        raise ValueError("use simulate_inar1 for a PGF marginal")
    rng = _rng(cfg.seed)
    x0 = float(np.asarray(cfg.marginal_sampler(rng, 1)).ravel()[0])
    total = cfg.n + cfg.burn_in
    eps = np.asarray(cfg.innovation_sampler(rng, total), dtype=float)
    x, _ = signal.lfilter([1.0], [1.0, -cfg.rho], eps, zi=[cfg.rho * x0])
    return SeriesSample(values=x[cfg.burn_in:], config=cfg, seed=cfg.seed,
                        burn_in=cfg.burn_in, meta={"x0": x0})


def binomial_thinning(x, rho, rng):
    """``rho o x``: the number of survivors among ``x`` Bernoulli(rho) trials."""
    x = np.asarray(x)
    if np.any(x < 0) or not np.all(np.equal(np.mod(x, 1), 0)):
        raise ValueError("x must be a nonnegative integer")
    if not 0.0 < rho <= 1.0:
        raise ValueError("rho must be in (0, 1]")
    out = rng.binomial(x.astype(np.int64), rho)
    return int(out) if x.ndim == 0 else out


def _inar_lifetimes(rng, x0, eps, rho):
    """Thinning chain via unit lifetimes.

    Each unit present at step ``j`` survives to ``j + 1`` with probability
    ``rho`` independently, so the number of further steps it survives is
    geometric. Counting live units per step is equal in law to applying
    thinning step by step.
    """
    total = eps.size
    births = np.concatenate([np.zeros(x0, dtype=np.int64),
                             np.repeat(np.arange(1, total + 1), eps)])
    # steps survived after birth: P(K >= k) = rho^k
    extra = rng.geometric(1.0 - rho, births.size) - 1
    deaths = births + extra + 1
    diff = np.zeros(total + 2, dtype=np.int64)
    np.add.at(diff, births, 1)
    np.add.at(diff, np.minimum(deaths, total + 1), -1)
    return np.cumsum(diff)[1:total + 1]


def _inar_sequential(rng, x0, eps, rho):
    out = np.empty(eps.size, dtype=np.int64)
    x = x0
    for j, e in enumerate(eps):
        x = int(rng.binomial(x, rho)) + int(e)
        out[j] = x
    return out


def simulate_inar1(cfg, method="lifetimes"):
    """Simulate ``X_n = rho o X_{n-1} + e_n`` from ``X_0`` ~ marginal.

    ``method="sequential"`` applies the thinning step by step; the default
    vectorized lifetime construction has the same law.
    """
    if not cfg.discrete:
        raise ValueError("simulate_inar1 needs a PGF marginal")
    rng = _rng(cfg.seed)
    x0 = int(np.asarray(cfg.marginal_sampler(rng, 1)).ravel()[0])
    total = cfg.n + cfg.burn_in
    eps = np.asarray(cfg.innovation_sampler(rng, total), dtype=np.int64)
    if method == "lifetimes":
        x = _inar_lifetimes(rng, x0, eps, cfg.rho)
    elif method == "sequential":
        x = _inar_sequential(rng, x0, eps, cfg.rho)
    else:
        raise ValueError(f"unknown method {method!r}")
    return SeriesSample(values=x[cfg.burn_in:], config=cfg, seed=cfg.seed,
                        burn_in=cfg.burn_in, meta={"x0": x0, "method": method})


def empirical_pgf(x, s):
    x = np.asarray(x, dtype=float).ravel()
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return np.array([np.mean(si ** x) for si in s])


def _empirical_cf(x, s):
    x = np.asarray(x, dtype=float).ravel()
    return np.array([np.mean(np.exp(1j * si * x)) for si in np.atleast_1d(s)])


def stationarity_diagnostic(sample, marginal=None, s_grid=None, envelope=5.0):
    """Check the sample against its target marginal and the factorization.

    Two sup distances on ``s_grid`` must both stay within ``envelope/sqrt(n)``:
    empirical transform of the sample vs the marginal, and empirical transform
    of ``X_n`` vs that of ``rho X_{n-1}`` (thinned, for PGFs) times the
    innovation transform.

    Raises
    ------
    ValueError
        If the sample is shorter than ``MIN_DIAGNOSTIC_LENGTH``.
    """
    x = np.asarray(sample.values)
    n = x.size
    if n < MIN_DIAGNOSTIC_LENGTH:
        raise ValueError(f"sample length {n} below the minimum {MIN_DIAGNOSTIC_LENGTH}")
    cfg = sample.config
    marginal = cfg.marginal if marginal is None else marginal
    discrete = marginal.kind is Kind.PGF
    if s_grid is None:
        s_grid = DEFAULT_PGF_GRID if discrete else DEFAULT_CF_GRID
    s_grid = np.asarray(s_grid, dtype=float)
    bound = envelope / np.sqrt(n)
    rho = cfg.rho
    if discrete:
        emp = empirical_pgf(x, s_grid)
        lag = empirical_pgf(x[:-1], 1.0 - rho + rho * s_grid)
        lead = empirical_pgf(x[1:], s_grid)
    else:
        emp = _empirical_cf(x, s_grid)
        lag = _empirical_cf(rho * x[:-1], s_grid)
        lead = _empirical_cf(x[1:], s_grid)
    d_marg = np.abs(emp - np.asarray(marginal(s_grid)))
    d_fact = np.abs(lead - lag * np.asarray(cfg.innovation(s_grid)))
    worst = float(max(d_marg.max(), d_fact.max()))
    verdict = Verdict.PASS if worst <= bound else Verdict.FAIL
    cert = ValidityCertificate(
        "mc-envelope-margin", bound - worst,
        {"s_points": int(s_grid.size), "s_min": float(s_grid.min()),
         "s_max": float(s_grid.max()), "n": int(n)},
        witness=float(s_grid[int(np.argmax(np.maximum(d_marg, d_fact)))]),
        caveat="Monte-Carlo envelope, not a proof",
    )
    return DecompositionReport(
        Identity.STATIONARITY, {"rho": rho, "n": int(n), "envelope": float(bound)},
        worst, cert, verdict, caveat=f"{envelope:g}/sqrt(n) envelope",
        details={"marginal_sup_distance": float(d_marg.max()),
                 "factorization_sup_distance": float(d_fact.max()),
                 "transform": "pgf" if discrete else "cf"},
    )


def pooled_chisquare(counts, probs, min_expected=5.0):
    """Chi-square GOF after pooling adjacent bins to expected counts >= ``min_expected``.

    ``counts[k]`` and ``probs[k]`` refer to value ``k``; the last pooled bin
    absorbs the upper tail. Degrees of freedom are pooled bins minus one.
    """
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    n = counts.sum()
    size = max(counts.size, probs.size)
    counts = np.pad(counts, (0, size - counts.size))
    probs = np.pad(probs, (0, size - probs.size))
    expected = n * probs
    expected[-1] += n * max(0.0, 1.0 - probs.sum())
    obs_bins, exp_bins = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(counts, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_bins.append(acc_o)
            exp_bins.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if obs_bins:
            obs_bins[-1] += acc_o
            exp_bins[-1] += acc_e
        else:
            obs_bins.append(acc_o)
            exp_bins.append(acc_e)
    if len(obs_bins) < 2:
        raise ValueError("fewer than two bins after pooling")
    res = stats.chisquare(obs_bins, exp_bins)
    return float(res.statistic), float(res.pvalue), len(obs_bins)


def poisson_gof(values, lam):
    """Pooled chi-square test of integer ``values`` against Poisson(``lam``)."""
    values = np.asarray(values, dtype=np.int64)
    kmax = int(max(values.max(), stats.poisson.ppf(1 - 1e-12, lam))) + 1
    counts = np.bincount(values, minlength=kmax + 1)
    probs = stats.poisson.pmf(np.arange(counts.size), lam)
    return pooled_chisquare(counts, probs)
