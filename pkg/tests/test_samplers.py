import math

import numpy as np
import pytest
from scipy import stats

from semisd.errors import SamplerAccuracyError, TruncationUnsafeError
from semisd.samplers import (
    CoefficientTable,
    SemiStableLevySampler,
    TabulatedCdf,
    effective_halfwidth,
    positive_stable,
    symmetric_stable,
)
from semisd.semistable import make_exponent
from semisd.subordination import empirical_cf

from conftest import cf

N = 100_000
S = np.linspace(-3, 3, 13)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 2.0])
def test_symmetric_stable_cf(alpha):
    x = symmetric_stable(np.random.default_rng(1), alpha, N)
    d = np.abs(empirical_cf(x, S) - np.exp(-np.abs(S) ** alpha))
    assert d.max() <= 5 / math.sqrt(N)


def test_cauchy_ks():
    x = symmetric_stable(np.random.default_rng(2), 1.0, N)
    assert stats.kstest(x, "cauchy").pvalue > 1e-3


@pytest.mark.parametrize("gamma", [0.3, 0.6, 0.9])
def test_positive_stable_lt(gamma):
    x = positive_stable(np.random.default_rng(3), gamma, N)
    assert np.all(x > 0)
    u = np.array([0.1, 0.5, 1.0, 2.0, 5.0])
    emp = np.array([np.mean(np.exp(-ui * x)) for ui in u])
    assert np.max(np.abs(emp - np.exp(-u ** gamma))) <= 5 / math.sqrt(N)


@pytest.mark.parametrize("gamma", [0.0, 1.0, 1.2])
def test_positive_stable_range(gamma):
    with pytest.raises(ValueError):
        positive_stable(np.random.default_rng(0), gamma, 3)


def test_effective_halfwidth():
    g = cf(lambda s: np.exp(-np.asarray(s) ** 2 / 2))
    u = effective_halfwidth(g)
    assert 5.0 < u < 10.0
    with pytest.raises(TruncationUnsafeError):
        effective_halfwidth(cf(lambda s: 1.0 / (1.0 + np.abs(np.asarray(s)) ** 0.5)))


def test_tabulated_gaussian():
    t = TabulatedCdf(cf(lambda s: np.exp(-np.asarray(s) ** 2 / 2)))
    u = np.array([0.001, 0.1, 0.5, 0.9, 0.999])
    assert np.allclose(t.ppf(u), stats.norm.ppf(u), atol=1e-4)
    x = t.sample(np.random.default_rng(0), N)
    assert stats.kstest(x, "norm").pvalue > 1e-3


def test_tabulated_skewed_mixture():
    # 0.3 N(-1, 0.5^2) + 0.7 N(2, 1)
    f = cf(lambda s: 0.3 * np.exp(-1j * s - 0.125 * s * s) + 0.7 * np.exp(2j * s - 0.5 * s * s))
    t = TabulatedCdf(f)
    x = t.sample(np.random.default_rng(5), N)
    ref = lambda z: 0.3 * stats.norm.cdf(z, -1, 0.5) + 0.7 * stats.norm.cdf(z, 2, 1)
    assert stats.kstest(x, ref).pvalue > 1e-3


def test_tabulated_heavy_tail_needs_completion():
    # Cauchy tails carry too much mass beyond any aliasing-safe table
    with pytest.raises(SamplerAccuracyError):
        TabulatedCdf(cf(lambda s: np.exp(-np.abs(np.asarray(s)))))


def test_tabulated_cauchy_with_tail():
    t = TabulatedCdf(cf(lambda s: np.exp(-np.abs(np.asarray(s)))),
                     tail=lambda x: 1.0 / (np.pi * np.asarray(x)))
    u = np.array([1e-7, 0.25, 0.5, 0.75, 1 - 1e-7])
    assert np.allclose(t.ppf(u), stats.cauchy.ppf(u), rtol=1e-3, atol=1e-4)


def test_tabulated_rejects_lt():
    from conftest import lt
    with pytest.raises(ValueError):
        TabulatedCdf(lt(lambda x: np.exp(-x)))


def test_coefficient_table():
    p = stats.poisson.pmf(np.arange(60), 3.0)
    t = CoefficientTable(p)
    x = t.sample(np.random.default_rng(0), N)
    assert x.dtype == np.int64
    assert x.mean() == pytest.approx(3.0, abs=0.03)
    assert t.probs.sum() == pytest.approx(1.0)
    assert t.probs.size < 60
    assert np.all(CoefficientTable([1.0]).sample(np.random.default_rng(0), 10) == 0)
    with pytest.raises(ValueError):
        CoefficientTable([0.0, 0.0])


def test_coefficient_table_clips_negative_noise():
    t = CoefficientTable([0.5, -1e-17, 0.5])
    assert t.probs[1] == 0.0


@pytest.mark.slow
def test_semistable_levy_sampler():
    psi = make_exponent(1.0, math.exp(-1.0), 0.03)
    sampler = SemiStableLevySampler(psi)
    rng = np.random.default_rng(8)
    for t in (0.3, 1.0, 4.0):
        x = sampler(rng, np.full(40_000, t))
        d = np.abs(empirical_cf(x, S) - np.exp(-t * psi(S)))
        assert d.max() <= 5 / math.sqrt(40_000), t
    assert np.all(sampler(rng, np.zeros(5)) == 0)
