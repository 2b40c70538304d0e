import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from semisd.decompose import check_discrete_semisd, check_sd_full, check_semisd, is_valid_cf
from semisd.errors import VanishingTransformError
from semisd.mixtures import (
    ASSUMED_SD,
    SAMPLED_SD,
    MixtureSpec,
    compound_poisson_lt,
    degenerate_lt,
    gamma_lt,
    gen_semi_ml_lt,
    generalized_semi_alpha_laplace,
    neg_log,
    phi_mixture_cf,
    phi_mixture_pgf,
    theorem3_witness,
    theorem4_witness,
)
from semisd.report import Verdict
from semisd.semistable import (
    discrete_semistable_pgf,
    make_exponent,
    make_laplace_exponent,
    semistable_cf,
)
from semisd.transforms import DEFAULT_CONFIG, Kind

from conftest import cf, lt, pgf

S = np.linspace(-5, 5, 101)


def test_linnik_from_cauchy():
    f = phi_mixture_cf(MixtureSpec(gamma_lt(1.0), semistable_cf(make_exponent(1.0, 0.5))))
    assert np.allclose(f(S), 1.0 / (1.0 + np.abs(S)), rtol=1e-14)
    assert f(0.0) == 1.0


def test_gamma2_on_square():
    f = phi_mixture_cf(MixtureSpec(gamma_lt(2.0), cf(lambda s: np.exp(-s * s))))
    assert np.allclose(f(S), (1.0 + S * S) ** -2, rtol=1e-13)


def test_generalized_laplace_reductions():
    linnik = generalized_semi_alpha_laplace(make_exponent(1.0, 0.5), 1.0)
    assert np.allclose(linnik(S), 1.0 / (1.0 + np.abs(S)), rtol=1e-15)
    sq = generalized_semi_alpha_laplace(make_exponent(2.0, 0.5), 2.0)
    assert np.allclose(sq(S), (1.0 + S * S) ** -2, rtol=1e-15)
    assert is_valid_cf(sq, DEFAULT_CONFIG.psd_grid()).value >= -1e-8


def test_gen_laplace_semisd_at_b():
    psi = make_exponent(1.0, math.exp(-1.0), 0.03)
    rep = check_semisd(generalized_semi_alpha_laplace(psi, 1.0), psi.b)
    assert rep.verdict is Verdict.PASS
    assert rep.certificate.value >= -1e-8


def test_gen_laplace_semisd_at_root_of_b():
    # with b = v^alpha, the alpha-rescaled exponent is semi-stable with ratio v
    v, alpha = 0.6, 0.8
    psi = make_exponent(alpha, v, 0.02)
    assert check_semisd(generalized_semi_alpha_laplace(psi, 1.5), v).passed


@pytest.mark.parametrize("alpha,b,eps,beta", [
    (1.0, 0.5, 0.0, 1.0), (1.3, math.exp(-1.0), 0.03, 2.0), (2.0, 0.3, 0.0, 0.5),
])
def test_generalized_matches_mixture(alpha, b, eps, beta):
    psi = make_exponent(alpha, b, eps)
    direct = generalized_semi_alpha_laplace(psi, beta)
    mixed = phi_mixture_cf(MixtureSpec(gamma_lt(beta), semistable_cf(psi)))
    grid = DEFAULT_CONFIG.psd_grid()
    assert np.allclose(direct(grid), mixed(grid), rtol=1e-14, atol=1e-14)


@pytest.mark.parametrize("beta", [1e-3, 1e-6])
def test_beta_to_zero(beta):
    f = generalized_semi_alpha_laplace(make_exponent(1.0, 0.5), beta)
    assert np.allclose(f(S), 1.0, atol=5 * beta)


def test_sd_mixer_witness_gamma_cauchy():
    rep = theorem3_witness(make_exponent(1.0, 0.5), gamma_lt(1.0), c=0.5)
    assert rep.verdict is Verdict.PASS
    assert rep.max_residual <= 1e-13
    assert rep.details["hypothesis"] == ASSUMED_SD
    assert rep.factor(0.0) == pytest.approx(1.0)


def test_sd_mixer_witness_degenerate_matches_semistable_factor():
    psi = make_exponent(1.0, math.exp(-1.0), 0.03)
    rep = theorem3_witness(psi, degenerate_lt(1.0))
    assert rep.passed
    f = semistable_cf(psi)
    expected = f(S) / f(psi.b * S)
    assert np.allclose(rep.factor(S), expected, rtol=1e-13)


def test_sd_mixer_witness_rejects_wrong_c():
    with pytest.raises(ValueError):
        theorem3_witness(make_exponent(1.0, 0.5), gamma_lt(1.0), c=0.3)


def test_sd_mixer_witness_sampled_hypothesis_fails_for_non_sd():
    rep = theorem3_witness(make_exponent(1.0, 0.5), compound_poisson_lt())
    assert rep.details["hypothesis"] == SAMPLED_SD
    assert rep.verdict is not Verdict.PASS


def test_semisd_mixer_witness_gamma():
    psi = make_exponent(1.0, math.exp(-1.0), 0.03)
    rep = theorem4_witness(psi, gamma_lt(2.0))
    assert rep.passed
    assert "b^alpha" in rep.caveat
    assert rep.parameter["c"] == pytest.approx(psi.b)


def test_semisd_mixer_witness_semisd_only_mixer():
    psi = make_exponent(0.5, math.exp(-2.0), 0.03)
    c = psi.b ** psi.alpha
    lexp = make_laplace_exponent(0.5, c, 5e-6)
    phi = gen_semi_ml_lt(lexp)
    assert "sd" not in phi.meta
    assert theorem4_witness(psi, phi).passed


def test_mixer_witnesses_coincide_when_stable():
    psi = make_exponent(1.5, 0.4)
    r3 = theorem3_witness(psi, gamma_lt(1.0))
    r4 = theorem4_witness(psi, gamma_lt(1.0))
    grid = DEFAULT_CONFIG.psd_grid()
    assert np.allclose(r3.factor(grid), r4.factor(grid), rtol=0, atol=1e-13)


def test_stable_base_implies_sd_sweep():
    f = generalized_semi_alpha_laplace(make_exponent(1.0, 0.5), 1.0)
    assert check_sd_full(f).passed


def test_pgf_mixture_geometric_type():
    lam = 2.5
    Q = pgf(lambda s: np.exp(lam * (np.asarray(s) - 1.0)))
    P = phi_mixture_pgf(gamma_lt(1.0), Q)
    s = np.linspace(0, 1, 51)
    assert np.allclose(P(s), 1.0 / (1.0 + lam * (1.0 - s)), rtol=1e-14)
    one = phi_mixture_pgf(gamma_lt(1.0), pgf(lambda s: np.ones_like(np.asarray(s, float))))
    assert np.allclose(one(s), 1.0)


def test_pgf_mixture_negative_binomial_coefficients():
    beta, lam = 2.0, 3.0
    Q = discrete_semistable_pgf(make_laplace_exponent(1.0, 0.5, scale=lam))
    P = phi_mixture_pgf(gamma_lt(beta), Q)
    rep = check_discrete_semisd(P, 0.5)
    assert rep.passed
    from semisd.transforms import extract_pgf_coeffs
    k = np.arange(20)
    p = 1.0 / (1.0 + lam)
    assert np.allclose(extract_pgf_coeffs(P, 19), stats.nbinom.pmf(k, beta, p), atol=1e-10)


def test_pgf_mixture_of_discrete_semistable_is_semisd():
    lexp = make_laplace_exponent(0.5, 0.2, 3e-4)
    P = phi_mixture_pgf(gamma_lt(1.0), discrete_semistable_pgf(lexp))
    assert check_discrete_semisd(P, lexp.b).passed


def test_pgf_mixture_vanishing_q():
    with pytest.raises(VanishingTransformError):
        phi_mixture_pgf(gamma_lt(1.0), pgf(lambda s: np.asarray(s, dtype=float)))


def test_neg_log_branch_tracking():
    # exp(-0.1 s^2 + 3 i s) leaves the principal branch once 3 |s| > pi
    base = cf(lambda s: np.exp(-0.1 * np.asarray(s) ** 2 + 3j * np.asarray(s)))
    s = np.linspace(-4, 4, 33)
    assert np.allclose(neg_log(base)(s), 0.1 * s ** 2 - 3j * s, atol=1e-12)


def test_neg_log_vanishing_base():
    base = cf(lambda s: np.clip(1.0 - np.abs(np.asarray(s, float)), 0.0, None))
    with pytest.raises(VanishingTransformError) as info:
        neg_log(base)(np.array([0.5, 2.0]))
    assert info.value.code == "nonvanishing-violated"


def test_mixture_spec_validation():
    with pytest.raises(ValueError):
        MixtureSpec(lt(lambda x: 0.5 + 0 * np.asarray(x)), semistable_cf(make_exponent(1.0, 0.5)))
    with pytest.raises(ValueError):
        MixtureSpec(gamma_lt(1.0), pgf(lambda s: s), Kind.CF)
    d = MixtureSpec(gamma_lt(2.0), semistable_cf(make_exponent(1.0, 0.5))).to_dict()
    assert d["result_kind"] == "CF" or d["result_kind"] == Kind.CF.value
    assert d["phi"]["beta"] == 2.0


def test_mixture_sampler_linnik_moments():
    f = generalized_semi_alpha_laplace(make_exponent(2.0, 0.5, scale=0.5), 1.0)
    x = f.sampler(np.random.default_rng(3), 200_000)
    # gamma(1) mixture of N(0, T): E[X^2] = E[T] = 1
    assert np.var(x) == pytest.approx(1.0, abs=0.03)


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(0.3, 2.0), b=st.floats(0.1, 0.9), beta=st.floats(0.2, 4.0))
def test_generalized_laplace_semisd_property(alpha, b, beta):
    psi = make_exponent(alpha, b, 0.0)
    assert check_semisd(generalized_semi_alpha_laplace(psi, beta), b).passed


@settings(max_examples=20, deadline=None)
@given(beta=st.floats(0.2, 4.0), eps=st.floats(0.0, 0.03))
def test_sd_mixer_witness_property(beta, eps):
    psi = make_exponent(1.0, math.exp(-1.0), eps)
    rep = theorem3_witness(psi, gamma_lt(beta))
    assert rep.passed and rep.max_residual <= 1e-13
