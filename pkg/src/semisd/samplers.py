"""Random-variate primitives used by the simulators.

Closed-form generators (symmetric stable, positive stable) plus two
numeric-inversion samplers: a tabulated inverse CDF built from a
characteristic function, and a semi-stable Levy-increment sampler that
reduces any elapsed time to a handful of tabulated levels through the
scaling ``Y(a t) = Y(t) / b`` in law.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .errors import SamplerAccuracyError, TruncationUnsafeError
from .transforms import DEFAULT_CONFIG, Kind, TransformFn, invert_cf_to_cdf

__all__ = [
    "symmetric_stable",
    "positive_stable",
    "TabulatedCdf",
    "CoefficientTable",
    "SemiStableLevySampler",
    "effective_halfwidth",
]

ACCURACY_BUDGET = 1e-6
DEFAULT_KNOTS = 2048


def symmetric_stable(rng, alpha, size):
    """Standard symmetric stable variates with CF ``exp(-|s|^alpha)``.

    Chambers-Mallows-Stuck construction.
    """
    if alpha == 2.0:
        return math.sqrt(2.0) * rng.standard_normal(size)
    v = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, size)
    if alpha == 1.0:
        return np.tan(v)
    w = rng.standard_exponential(size)
    return (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))


def positive_stable(rng, gamma, size):
    """Positive stable variates with Laplace transform ``exp(-x^gamma)``, 0<gamma<1.

    Kanter's representation.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must be in (0, 1)")
    u = rng.uniform(0.0, np.pi, size)
    e = rng.standard_exponential(size)
    a = ((np.sin(gamma * u) / np.sin(u)) ** (1.0 / (1.0 - gamma))
         * np.sin((1.0 - gamma) * u) / np.sin(gamma * u))
    return (a / e) ** ((1.0 - gamma) / gamma)


def effective_halfwidth(f, cfg=DEFAULT_CONFIG, floor=None):
    """Smallest truncation limit beyond which ``|f|`` stays below ``floor``.

    Scans a fine grid of ``[0, grid_halfwidth]`` backwards. Raises
    :class:`TruncationUnsafeError` when ``|f(grid_halfwidth)|`` itself is too
    large.
    """
    floor = cfg.tolerance * 1e-3 if floor is None else floor
    s = np.linspace(0.0, cfg.grid_halfwidth, 8001)
    mag = np.maximum(np.abs(np.asarray(f(s), dtype=complex)),
                     np.abs(np.asarray(f(-s), dtype=complex)))
    if mag[-1] >= floor:
        raise TruncationUnsafeError(
            f"|f| = {mag[-1]:.3g} at s={cfg.grid_halfwidth:g} does not decay "
            "below the inversion floor"
        )
    above = np.nonzero(mag >= floor)[0]
    last = s[above[-1] + 1] if above.size else s[1]
    return float(max(last, 1e-3))


class TabulatedCdf:
    """Inverse-CDF sampler on a cached table of Gil-Pelaez CDF values.

    Knots are spread with a ``sinh`` map so heavy tails get coverage without
    starving the body. Uniforms falling beyond the table go to the optional
    ``tail`` function (``tail(x)`` ~ ``P(X > x)`` for large ``x``, and
    ``P(X < -x)`` by symmetry); without one, the table must hold all but
    ``budget`` of the mass.

    Parameters
    ----------
    f : TransformFn
        Characteristic function of the law.
    cfg : InversionConfig
    knots : int
    tail : callable, optional
    budget : float
        Accuracy budget in probability.
    """

    def __init__(self, f, cfg=DEFAULT_CONFIG, knots=DEFAULT_KNOTS, tail=None,
                 budget=ACCURACY_BUDGET):
        if f.kind is not Kind.CF:
            raise ValueError("TabulatedCdf needs a characteristic function")
        self.f = f
        self.budget = budget
        self.tail = tail
        u_eff = effective_halfwidth(f, cfg)
        self.cfg = replace(cfg, grid_halfwidth=u_eff)
        # the midpoint sums alias once x * h approaches pi
        self.x_cap = 0.5 * np.pi * cfg.grid_points / u_eff

        cdf = lambda x: invert_cf_to_cdf(f, x, self.cfg)
        lo, hi, width = self._bracket(cdf)
        probe = np.linspace(0.1, 10.0, 7)
        symmetric = np.allclose(np.asarray(f(probe), dtype=complex).imag, 0.0) and \
            np.allclose(f(probe), f(-probe))
        if symmetric:
            # F(-x) = 1 - F(x): tabulate the right half only
            hi = max(hi, -lo)
            t = np.linspace(0.0, np.arcsinh(hi / width), knots // 2 + 1)
            xr = width * np.sinh(t)
            fr = np.maximum.accumulate(cdf(xr))
            self.x = np.concatenate([-xr[:0:-1], xr])
            self.cdf = np.concatenate([1.0 - fr[:0:-1], fr])
        else:
            t = np.linspace(np.arcsinh(lo / width), np.arcsinh(hi / width), knots)
            self.x = width * np.sinh(t)
            self.cdf = np.maximum.accumulate(cdf(self.x))
        self.lower_mass = float(self.cdf[0])
        self.upper_mass = float(1.0 - self.cdf[-1])
        if tail is None and max(self.lower_mass, self.upper_mass) > budget:
            raise SamplerAccuracyError(
                f"table holds all but {max(self.lower_mass, self.upper_mass):.3g} "
                f"of the mass within |x| <= {self.x_cap:.4g}; budget {budget:g}",
                lower_mass=self.lower_mass, upper_mass=self.upper_mass,
            )
        if tail is not None:
            # first-order tail asymptotics are off by O(tail^2)
            err = max(tail(abs(self.x[0])), tail(abs(self.x[-1]))) ** 2
            if err > budget:
                raise SamplerAccuracyError(
                    f"tail completion error ~{err:.3g} exceeds budget {budget:g}"
                )

    def _bracket(self, cdf):
        q = cdf(np.array([-1.0, 1.0]))
        width = 1.0
        # grow/shrink the unit until the quartile-ish spread is resolved
        for _ in range(60):
            if q[1] - q[0] > 0.9:
                width *= 0.5
            elif q[1] - q[0] < 0.2:
                width *= 2.0
            else:
                break
            q = cdf(np.array([-width, width]))
        lo, hi = -width, width
        while cdf(hi) < 1.0 - self.budget and hi < self.x_cap:
            hi = min(2.0 * hi, self.x_cap)
        while cdf(lo) > self.budget and -lo < self.x_cap:
            lo = max(2.0 * lo, -self.x_cap)
        return lo, hi, width

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        out = np.interp(u, self.cdf, self.x)
        if self.tail is not None:
            upper = u > self.cdf[-1]
            lower = u < self.cdf[0]
            if np.any(upper):
                out[upper] = self._tail_inverse(1.0 - u[upper], self.x[-1])
            if np.any(lower):
                out[lower] = -self._tail_inverse(u[lower], -self.x[0])
        return out

    def _tail_inverse(self, p, start):
        # tail is decreasing in x; bracket then bisect on a log scale
        lo = np.full(p.shape, start)
        hi = lo.copy()
        for _ in range(200):
            grow = self.tail(hi) > p
            if not np.any(grow):
                break
            hi = np.where(grow, hi * 4.0, hi)
        for _ in range(80):
            mid = np.sqrt(lo * hi)
            above = self.tail(mid) > p
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        return np.sqrt(lo * hi)

    def sample(self, rng, size):
        return self.ppf(rng.uniform(size=size))

    __call__ = sample


class CoefficientTable:
    """Inverse-CDF sampler on a table of nonnegative-integer probabilities.

    The table is cut where the cumulative mass first reaches ``1 - cut`` and
    renormalized.
    """

    def __init__(self, probs, cut=1e-12):
        p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
        total = p.sum()
        if not total > 0:
            raise ValueError("empty probability table")
        cum = np.cumsum(p) / total
        stop = int(np.searchsorted(cum, 1.0 - cut)) + 1
        p = p[:stop]
        self.probs = p / p.sum()
        self.cdf = np.cumsum(self.probs)
        self.cdf[-1] = 1.0

    def sample(self, rng, size):
        return np.searchsorted(self.cdf, rng.uniform(size=size), side="right").astype(np.int64)

    __call__ = sample


class SemiStableLevySampler:
    """Increments ``Y(t)`` of a symmetric semi-stable Levy process.

    Any ``t > 0`` is written as ``a^k t'`` with ``t'`` in ``[1, a)``, so
    ``Y(t) = b^{-k} Y(t')`` in law. ``Y(t')`` is then split into ``Y(t_j)`` at
    the nearest lower tabulated level ``t_j = a^{j/L}`` plus an independent
    remainder, which is handled the same way until its scale is negligible.

    ``psi`` must expose ``alpha``, ``a``, ``b``, ``scale``, ``__call__`` and
    ``levy_tail(x)`` (the Levy measure of ``(x, inf)``).
    """

    def __init__(self, psi, cfg=DEFAULT_CONFIG, levels=8, knots=DEFAULT_KNOTS,
                 budget=ACCURACY_BUDGET, floor=1e-13):
        self.psi = psi
        self.levels = levels
        self.log_a = math.log(psi.a)
        self.times = psi.a ** (np.arange(levels) / levels)
        self.floor = floor
        self.tables = []
        for t in self.times:
            cf = TransformFn(Kind.CF, lambda s, t=t: np.exp(-t * psi(s)),
                             label=f"semistable Y({t:.4g})")
            tail = lambda x, t=t: t * psi.levy_tail(x)
            self.tables.append(TabulatedCdf(cf, cfg, knots, tail=tail, budget=budget))

    def __call__(self, rng, elapsed):
        rem = np.array(elapsed, dtype=float, copy=True).ravel()
        out = np.zeros_like(rem)
        alpha = self.psi.alpha
        scale = self.psi.scale
        for _ in range(200):
            active = np.nonzero((scale * rem) ** (1.0 / alpha) > self.floor)[0]
            if active.size == 0:
                break
            r = rem[active]
            k = np.floor(np.log(r) / self.log_a)
            tp = r / self.psi.a ** k
            # rounding can leave tp just outside [1, a)
            k = np.where(tp >= self.psi.a, k + 1, np.where(tp < 1.0, k - 1, k))
            tp = r / self.psi.a ** k
            j = np.clip(np.floor(self.levels * np.log(tp) / self.log_a).astype(int),
                        0, self.levels - 1)
            draws = np.empty(active.size)
            for level in np.unique(j):
                sel = j == level
                draws[sel] = self.tables[level].sample(rng, int(sel.sum()))
            out[active] += self.psi.b ** (-k) * draws
            rem[active] = np.maximum(r - self.psi.a ** k * self.times[j], 0.0)
        return out.reshape(np.shape(elapsed))
