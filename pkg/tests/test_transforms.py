import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from semisd.errors import (
    CompleteMonotonicityError,
    NotAPowerSeriesError,
    TransformKindError,
    TruncationUnsafeError,
)
from semisd.transforms import (
    DEFAULT_CONFIG,
    InversionConfig,
    Kind,
    Support,
    check_complete_monotonicity,
    default_cm_grid,
    extract_pgf_coeffs,
    invert_cf_to_cdf,
    lt_to_pgf,
    pgf_to_lt,
)

from conftest import cf, lt, pgf

S01 = np.linspace(0.0, 1.0, 101)


def test_lt_to_pgf_exponential_is_geometric():
    P = lt_to_pgf(lt(lambda s: 1.0 / (1.0 + s)))
    assert P.kind is Kind.PGF
    assert P.support is Support.NONNEGATIVE_INTEGERS
    assert np.allclose(P(S01), 1.0 / (2.0 - S01), atol=1e-15)
    k = np.arange(21)
    assert np.allclose(extract_pgf_coeffs(P, 20), 0.5 ** (k + 1), atol=1e-12)


def test_lt_to_pgf_point_mass_is_poisson():
    lam = 2.5
    P = lt_to_pgf(lt(lambda s: np.exp(-lam * s)))
    k = np.arange(15)
    assert np.allclose(extract_pgf_coeffs(P, 14), stats.poisson.pmf(k, lam), atol=1e-12)


def test_lt_to_pgf_identity_case():
    P = lt_to_pgf(lt(lambda s: np.ones_like(np.asarray(s, dtype=float))))
    assert np.all(P(S01) == 1.0)


def test_lt_to_pgf_rejects_other_kinds():
    with pytest.raises(TransformKindError):
        lt_to_pgf(cf(lambda s: np.exp(-s * s)))


def test_lt_to_pgf_sampler_is_poisson_mixture():
    phi = lt(lambda s: 1.0 / (1.0 + s))
    phi = type(phi)(Kind.LT, phi.func, sampler=lambda rng, n: rng.exponential(1.0, n))
    x = lt_to_pgf(phi).sampler(np.random.default_rng(0), 200_000)
    # geometric(1/2) on {0, 1, ...}: mean 1, P(0) = 1/2
    assert np.mean(x) == pytest.approx(1.0, abs=0.02)
    assert np.mean(x == 0) == pytest.approx(0.5, abs=0.01)


def test_pgf_to_lt_round_trip():
    phi = pgf_to_lt(pgf(lambda s: 1.0 / (2.0 - s)))
    s = np.linspace(0.0, 5.0, 51)
    assert np.allclose(phi(s), 1.0 / (1.0 + s), atol=1e-14)
    assert "certified-necessary-only" in phi.flags


def test_pgf_to_lt_poisson():
    phi = pgf_to_lt(pgf(lambda s: np.exp(3.0 * (s - 1.0))))
    s = np.linspace(0.0, 5.0, 51)
    assert np.allclose(phi(s), np.exp(-3.0 * s), atol=1e-15)


def test_pgf_to_lt_rejects_mass_at_one():
    with pytest.raises(CompleteMonotonicityError) as info:
        pgf_to_lt(pgf(lambda s: s))
    order, point, value = info.value.violation
    assert value < 0
    assert info.value.code == "not-completely-monotone"


@pytest.mark.parametrize("phi", [
    lambda s: 1.0 / (1.0 + s),
    lambda s: np.exp(-s),
    lambda s: (1.0 + 2.0 * s) ** -0.5,
    lambda s: np.exp(-np.sqrt(s)),
])
def test_round_trip_corpus(phi):
    s = np.linspace(0.0, 5.0, 101)
    back = pgf_to_lt(lt_to_pgf(lt(phi)))
    assert np.max(np.abs(back(s) - phi(s))) <= 1e-12


@pytest.mark.parametrize("phi", [lambda s: 1.0 / (1.0 + s), lambda s: np.exp(-s)])
def test_cm_passes_on_completely_monotone(phi):
    rep = check_complete_monotonicity(lt(phi), 6, default_cm_grid())
    assert rep.passed
    assert len(rep.certificate.extra["worst_per_order"]) == 7


def test_cm_fails_on_cosine():
    grid = np.linspace(0.05, 3.0, 60)
    rep = check_complete_monotonicity(lt(np.cos), 6, grid)
    assert not rep.passed
    assert rep.certificate.witness[0] in (1, 2)


@pytest.mark.parametrize("grid,order", [
    (np.linspace(0.0, 1.0, 20), 4),  # contains 0
    (np.array([0.1, 0.3, 0.4, 0.9, 1.0, 1.2, 1.3, 1.8]), 2),  # nonuniform
    (np.linspace(0.1, 1.0, 20), 1),  # order too small
])
def test_cm_rejects_bad_grids(grid, order):
    with pytest.raises(ValueError):
        check_complete_monotonicity(lt(np.exp), order, grid)


def test_inversion_gaussian_points():
    f = cf(lambda s: np.exp(-0.5 * s * s))
    assert invert_cf_to_cdf(f, 0.0) == pytest.approx(0.5, abs=1e-12)
    assert invert_cf_to_cdf(f, 1.0) == pytest.approx(0.841345, abs=1e-6)


def test_inversion_cauchy_point():
    f = cf(lambda s: np.exp(-np.abs(s)))
    assert invert_cf_to_cdf(f, 1.0) == pytest.approx(0.75, abs=1e-6)


def test_inversion_shifted_law_uses_imaginary_part():
    mu = 0.7
    f = cf(lambda s: np.exp(1j * mu * s - 0.5 * s * s))
    x = np.linspace(-2.0, 3.0, 11)
    assert np.allclose(invert_cf_to_cdf(f, x), stats.norm.cdf(x, loc=mu), atol=1e-8)


def test_inversion_refuses_slow_decay():
    with pytest.raises(TruncationUnsafeError) as info:
        invert_cf_to_cdf(cf(lambda s: np.exp(1j * s)), 0.0)
    assert info.value.code == "truncation-unsafe"


def test_inversion_monotone():
    # skewed two-component normal mixture
    f = cf(lambda s: 0.3 * np.exp(-0.5 * s * s) + 0.7 * np.exp(2j * s - 2.0 * s * s))
    x = np.linspace(-8.0, 8.0, 161)
    F = invert_cf_to_cdf(f, x)
    assert np.all(np.diff(F) >= -1e-6)
    assert np.all((F >= 0) & (F <= 1))


def test_extract_poisson():
    P = pgf(lambda s: np.exp(3.0 * (s - 1.0)))
    k = np.arange(6)
    expected = np.exp(-3.0) * 3.0 ** k / np.array([math.factorial(i) for i in k])
    assert np.allclose(extract_pgf_coeffs(P, 5), expected, atol=1e-14)


def test_extract_point_mass_two():
    c = extract_pgf_coeffs(pgf(lambda s: s ** 2), 5)
    assert np.allclose(c, [0, 0, 1, 0, 0, 0], atol=1e-14)


def test_extract_rejects_non_power_series():
    # the principal square root jumps across the negative real axis
    with pytest.raises(NotAPowerSeriesError):
        extract_pgf_coeffs(pgf(lambda s: np.sqrt(s)), 5)


def test_extract_index_bound():
    with pytest.raises(ValueError):
        extract_pgf_coeffs(pgf(lambda s: s), DEFAULT_CONFIG.dft_size // 2)


@pytest.mark.parametrize("P", [
    lambda s: np.exp(3.0 * (s - 1.0)),
    lambda s: 1.0 / (2.0 - s),
    lambda s: (0.3 + 0.7 * s) ** 5,
    lambda s: (0.5 / (1.0 - 0.5 * s)) ** 2.5,
])
def test_extracted_coefficients_are_probabilities(P):
    c = extract_pgf_coeffs(pgf(P), 200)
    assert c.sum() <= 1.0 + 1e-9
    assert np.all(c >= -1e-9)


@pytest.mark.parametrize("kwargs", [
    {"grid_points": 8}, {"dft_size": 1000}, {"tolerance": 0.0}, {"grid_halfwidth": -1.0},
])
def test_inversion_config_validation(kwargs):
    with pytest.raises(ValueError):
        InversionConfig(**kwargs)


def test_cf_invariants_detected():
    assert cf(lambda s: np.exp(-s * s)).invariant_violations() == []
    problems = cf(lambda s: 1.0 + s * s).invariant_violations()
    assert "|f| > 1" in problems
    assert "not Hermitian" in cf(lambda s: np.exp(1j * s ** 2)).invariant_violations()


def test_scalar_in_scalar_out():
    f = cf(lambda s: np.exp(-s * s))
    assert np.ndim(f(1)) == 0
    assert f(0) == 1.0


@settings(max_examples=40, deadline=None)
@given(lam=st.floats(0.1, 20.0), theta=st.floats(0.05, 5.0))
def test_bridge_matches_substitution(lam, theta):
    phi = lt(lambda s: np.exp(-lam * s) / (1.0 + theta * s))
    P = lt_to_pgf(phi)
    assert np.allclose(P(S01), phi(1.0 - S01), atol=0, rtol=0)


@settings(max_examples=25, deadline=None)
@given(sigma=st.floats(0.3, 3.0), x=st.floats(-4.0, 4.0))
def test_inversion_matches_normal_cdf(sigma, x):
    f = cf(lambda s: np.exp(-0.5 * (sigma * s) ** 2))
    assert invert_cf_to_cdf(f, x) == pytest.approx(stats.norm.cdf(x / sigma), abs=1e-6)
