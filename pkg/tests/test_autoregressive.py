import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from semisd.autoregressive import (
    MIN_DIAGNOSTIC_LENGTH,
    InnovationSource,
    binomial_thinning,
    build_ar1,
    empirical_pgf,
    poisson_gof,
    pooled_chisquare,
    simulate_ar1,
    simulate_inar1,
    stationarity_diagnostic,
)
from semisd.errors import NotSemiSDAtRhoError
from semisd.recipes import build
from semisd.report import Verdict
from semisd.samplers import CoefficientTable
from semisd.transforms import Kind, TransformFn

from conftest import pgf

S = np.linspace(-3, 3, 13)


@pytest.fixture(scope="module")
def gaussian_cfg():
    return build_ar1(build("gaussian"), 0.5, n=200_000, seed=7)


@pytest.fixture(scope="module")
def gaussian_sample(gaussian_cfg):
    return simulate_ar1(gaussian_cfg)


def poisson3():
    return build("pgf-poisson", {"lam": 3.0})


def test_gaussian_innovation_closed_form(gaussian_cfg):
    assert gaussian_cfg.innovation_source is InnovationSource.CLOSED_FORM
    assert np.allclose(gaussian_cfg.innovation(S), np.exp(-0.75 * S * S / 2), atol=1e-14)
    e = gaussian_cfg.innovation_sampler(np.random.default_rng(0), 200_000)
    assert np.var(e) == pytest.approx(0.75, rel=0.02)


def test_poisson_innovation_table():
    cfg = build_ar1(poisson3(), 0.4)
    assert cfg.innovation_source is InnovationSource.COEFFICIENT_TABLE
    k = np.arange(25)
    assert np.allclose(cfg.innovation.meta["coefficients"][:25], stats.poisson.pmf(k, 1.8),
                       atol=1e-12)


def test_point_mass_marginal():
    cfg = build_ar1(build("point-mass", {"x0": 1.0}), 0.5, n=50)
    assert np.allclose(cfg.innovation(S), np.exp(0.5j * S))
    x = simulate_ar1(cfg).values
    assert np.allclose(x, 1.0)


def test_point_pgf_rejected():
    with pytest.raises(NotSemiSDAtRhoError) as info:
        build_ar1(pgf(lambda s: s), 0.5)
    assert info.value.code == "not-semi-SD-at-rho"
    assert info.value.report.verdict is Verdict.FAIL


@pytest.mark.parametrize("rho", [0.0, 1.0, -0.3])
def test_rho_range(rho):
    with pytest.raises(ValueError):
        build_ar1(build("gaussian"), rho)


def test_gaussian_mean_envelope(gaussian_sample):
    n = gaussian_sample.values.size
    assert abs(gaussian_sample.values.mean()) <= 4 / math.sqrt(n)


def test_gaussian_stationarity_passes(gaussian_sample):
    rep = stationarity_diagnostic(gaussian_sample)
    assert rep.verdict is Verdict.PASS
    assert rep.details["marginal_sup_distance"] <= 5 / math.sqrt(200_000)
    assert rep.details["factorization_sup_distance"] <= 5 / math.sqrt(200_000)


def test_gaussian_lag1_autocorrelation():
    cfg = build_ar1(build("gaussian"), 0.999, n=200_000, burn_in=0, seed=3)
    x = simulate_ar1(cfg).values
    assert np.corrcoef(x[:-1], x[1:])[0, 1] == pytest.approx(0.999, abs=0.01)


def test_ar1_determinism(gaussian_cfg):
    a = simulate_ar1(gaussian_cfg).values
    b = simulate_ar1(gaussian_cfg).values
    assert np.array_equal(a, b)


def test_burn_in_discarded():
    cfg = build_ar1(build("gaussian"), 0.5, n=100, burn_in=50, seed=1)
    s = simulate_ar1(cfg)
    assert s.values.size == 100 and s.burn_in == 50


def test_wrong_innovation_fails():
    cfg = build_ar1(build("gaussian"), 0.5, n=200_000, seed=7)
    # halve the innovation variance; the chain then drifts to variance 0.5
    cfg.innovation_sampler = lambda rng, size: rng.normal(0.0, math.sqrt(0.375), size)
    cfg.burn_in = 200
    assert stationarity_diagnostic(simulate_ar1(cfg)).verdict is Verdict.FAIL


def test_diagnostic_minimum_length():
    cfg = build_ar1(build("gaussian"), 0.5, n=MIN_DIAGNOSTIC_LENGTH - 1)
    with pytest.raises(ValueError):
        stationarity_diagnostic(simulate_ar1(cfg))


def test_linnik_ar1_zero_inflated():
    cfg = build_ar1(build("linnik"), 0.5, n=100_000, seed=2)
    assert cfg.innovation_source is InnovationSource.CLOSED_FORM
    assert stationarity_diagnostic(simulate_ar1(cfg)).passed


def test_semistable_ar1_numeric_innovation():
    psi_cf = build("semistable")
    b = psi_cf.meta["exponent"].b
    cfg = build_ar1(psi_cf, b, n=20_000, seed=5)
    assert cfg.innovation_source in (InnovationSource.CLOSED_FORM,
                                     InnovationSource.NUMERIC_INVERSION)
    assert stationarity_diagnostic(simulate_ar1(cfg)).passed


def test_binomial_thinning_edges():
    rng = np.random.default_rng(0)
    assert binomial_thinning(0, 0.3, rng) == 0
    assert binomial_thinning(1000, 1 - 1e-12, rng) == 1000
    out = binomial_thinning(np.full(100_000, 10), 0.3, rng)
    assert out.mean() == pytest.approx(3.0, abs=0.03)
    with pytest.raises(ValueError):
        binomial_thinning(-1, 0.5, rng)
    with pytest.raises(ValueError):
        binomial_thinning(2.5, 0.5, rng)


def test_inar_poisson_mean_and_gof():
    cfg = build_ar1(poisson3(), 0.4, n=200_000, burn_in=1000, seed=0)
    x = simulate_inar1(cfg).values
    assert abs(x.mean() - 3.0) <= 3 * math.sqrt(3 / x.size)
    assert poisson_gof(x, 3.0)[1] > 0.001
    assert stationarity_diagnostic(simulate_inar1(cfg)).passed


def test_inar_methods_agree_in_law():
    cfg = build_ar1(poisson3(), 0.4, n=20_000, burn_in=100, seed=4)
    a = simulate_inar1(cfg, "lifetimes").values
    b = simulate_inar1(cfg, "sequential").values
    # same law: two-sample chi-square on the pooled histogram
    assert stats.ks_2samp(a, b).pvalue > 1e-4
    for x in (a, b):
        assert np.corrcoef(x[:-1], x[1:])[0, 1] == pytest.approx(0.4, abs=0.03)


def test_inar_geometric():
    cfg = build_ar1(build("pgf-geometric", {"p": 0.5}), 0.5, n=100_000, seed=1)
    s = simulate_inar1(cfg)
    assert stationarity_diagnostic(s).passed
    counts = np.bincount(s.values)
    probs = 0.5 ** (np.arange(counts.size) + 1)
    assert pooled_chisquare(counts, probs)[1] > 0.001


def test_inar_all_zero():
    zero = TransformFn(Kind.PGF, lambda s: np.ones_like(np.asarray(s, dtype=complex)),
                       label="zero", sampler=lambda rng, size: np.zeros(size, dtype=np.int64))
    cfg = build_ar1(zero, 0.5, n=1000)
    assert isinstance(cfg.innovation_sampler, CoefficientTable)
    assert np.all(simulate_inar1(cfg).values == 0)


def test_inar_wrong_kind():
    with pytest.raises(ValueError):
        simulate_inar1(build_ar1(build("gaussian"), 0.5, n=10))
    with pytest.raises(ValueError):
        simulate_ar1(build_ar1(poisson3(), 0.5, n=10))
    with pytest.raises(ValueError):
        simulate_inar1(build_ar1(poisson3(), 0.5, n=10), method="other")


def test_empirical_pgf():
    assert np.allclose(empirical_pgf([0, 1, 2], [0.0, 0.5, 1.0]), [1 / 3, 1.75 / 3, 1.0])


def test_pooled_chisquare_bins():
    probs = stats.poisson.pmf(np.arange(30), 3.0)
    counts = np.round(probs * 1000)
    stat, p, bins = pooled_chisquare(counts, probs)
    assert p > 0.99 and bins < 30
    with pytest.raises(ValueError):
        pooled_chisquare([3], [1.0])


@settings(max_examples=15, deadline=None)
@given(lam=st.floats(0.5, 8.0), rho=st.floats(0.1, 0.9))
def test_poisson_always_admits_inar(lam, rho):
    cfg = build_ar1(build("pgf-poisson", {"lam": lam}), rho, n=10)
    assert np.allclose(cfg.innovation.meta["coefficients"][:20],
                       stats.poisson.pmf(np.arange(20), lam * (1 - rho)), atol=1e-10)
