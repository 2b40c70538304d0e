"""
Characteristic functions, Laplace transforms and PGFs as evaluable objects.

A :class:`TransformFn` wraps a vectorized callable together with its kind
(CF, LT or PGF) and support. Everything else in the package composes these
objects; nothing is symbolic.

This module also holds the numerical plumbing shared by the other modules:

* the LT <-> PGF bridge ``P(s) = phi(1 - s)``,
* a finite-difference complete-monotonicity check,
* Gil-Pelaez inversion of a CF to a CDF,
* DFT extraction of PGF coefficients from values on the unit circle.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Mapping, Optional

import numpy as np

from .errors import (
    CompleteMonotonicityError,
    NotAPowerSeriesError,
    TransformKindError,
    TruncationUnsafeError,
)
from .report import (
    NECESSARY_ONLY,
    DecompositionReport,
    Identity,
    ValidityCertificate,
    verdict_from,
)

__all__ = [
    "Kind",
    "Support",
    "TransformFn",
    "InversionConfig",
    "DEFAULT_CONFIG",
    "lt_to_pgf",
    "pgf_to_lt",
    "invert_cf_to_cdf",
    "extract_pgf_coeffs",
    "pgf_coefficients",
    "PgfCoefficients",
    "check_complete_monotonicity",
    "default_cm_grid",
]

CERTIFIED_NECESSARY_ONLY = "certified-necessary-only"
CANDIDATE = "candidate"


class Kind(str, Enum):
    CF = "CF"
    LT = "LT"
    PGF = "PGF"


class Support(str, Enum):
    REAL_LINE = "real-line"
    NONNEGATIVE_REALS = "nonnegative-reals"
    NONNEGATIVE_INTEGERS = "nonnegative-integers"


_DEFAULT_SUPPORT = {
    Kind.CF: Support.REAL_LINE,
    Kind.LT: Support.NONNEGATIVE_REALS,
    Kind.PGF: Support.NONNEGATIVE_INTEGERS,
}

Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class TransformFn:
    """An evaluable transform with metadata.

    Parameters
    ----------
    kind : Kind
        CF, LT or PGF.
    func : callable
        Vectorized map from a numpy array of arguments to values. CFs take
        real arguments; LTs take nonnegative reals (complex values with
        positive real part are allowed where the closed form extends); PGFs
        must accept complex arguments in the closed unit disk.
    support : Support, optional
        Defaults from ``kind``.
    label : str
        Human-readable construction recipe.
    sampler : callable, optional
        ``sampler(rng, size)`` drawing from the law, when a closed form exists.
    meta : mapping
        Free-form construction data (exponent, family, parameters, flags such
        as ``sd`` for laws known to be selfdecomposable).
    flags : frozenset of str
        Status markers, e.g. ``"candidate"`` or ``"certified-necessary-only"``.
    """

    kind: Kind
    func: Callable[[np.ndarray], Any]
    support: Optional[Support] = None
    label: str = ""
    sampler: Optional[Sampler] = field(default=None, compare=False)
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)
    flags: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.support is None:
            object.__setattr__(self, "support", _DEFAULT_SUPPORT[self.kind])
        object.__setattr__(self, "flags", frozenset(self.flags))

    def __call__(self, s):
        arr = np.asarray(s)
        if arr.dtype.kind in "biu":
            arr = arr.astype(float)
        out = np.asarray(self.func(arr))
        if out.shape != arr.shape:
            out = np.broadcast_to(out, arr.shape).copy()
        return out[()] if arr.ndim == 0 else out

    def with_flags(self, *flags):
        return replace(self, flags=self.flags | set(flags))

    def with_meta(self, **meta):
        return replace(self, meta={**self.meta, **meta})

    def invariant_violations(self, grid=None, tol=1e-12):
        """List the basic invariants of this kind that fail on ``grid``."""
        problems = []
        if self.kind is Kind.CF:
            s = np.linspace(-10.0, 10.0, 101) if grid is None else np.asarray(grid, float)
            v = np.asarray(self(s), dtype=complex)
            if abs(complex(self(0.0)) - 1.0) > tol:
                problems.append("f(0) != 1")
            if np.any(np.abs(v) > 1.0 + tol):
                problems.append("|f| > 1")
            vm = np.asarray(self(-s), dtype=complex)
            if np.any(np.abs(vm - np.conj(v)) > tol):
                problems.append("not Hermitian")
        elif self.kind is Kind.LT:
            s = np.linspace(0.0, 10.0, 101) if grid is None else np.asarray(grid, float)
            v = np.real(self(s))
            if abs(float(np.real(self(0.0))) - 1.0) > tol:
                problems.append("phi(0) != 1")
            if np.any(np.diff(v) > tol):
                problems.append("phi increasing")
            if np.any(v < -tol):
                problems.append("phi negative")
        else:
            s = np.linspace(0.0, 1.0, 101) if grid is None else np.asarray(grid, float)
            v = np.real(self(s))
            if abs(float(np.real(self(1.0))) - 1.0) > tol:
                problems.append("P(1) != 1")
            if np.any(np.diff(v) < -tol):
                problems.append("P decreasing")
        return problems


@dataclass(frozen=True)
class InversionConfig:
    """Numerical settings shared by inversion and certification routines.

    ``grid_halfwidth`` and ``grid_points`` drive Gil-Pelaez quadrature,
    ``dft_size`` the PGF coefficient extraction. The ``psd_*`` and ``cm_*``
    fields set the default grids of the PSD and complete-monotonicity
    certificates.
    """

    grid_halfwidth: float = 200.0
    grid_points: int = 20001
    dft_size: int = 4096
    tolerance: float = 1e-8
    psd_points: int = 41
    psd_halfwidth: float = 5.0
    cm_order: int = 6
    cm_points: int = 64
    cm_max: float = 8.0
    unit_grid_points: int = 257

    def __post_init__(self):
        if not self.grid_halfwidth > 0:
            raise ValueError("grid_halfwidth must be positive")
        if self.grid_points < 16:
            raise ValueError("grid_points must be >= 16")
        if self.dft_size < 2 or self.dft_size & (self.dft_size - 1):
            raise ValueError("dft_size must be a power of two")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.psd_points < 21:
            raise ValueError("psd_points must be >= 21")
        if self.cm_order < 2 or self.cm_points < self.cm_order + 2:
            raise ValueError("cm grid too small for the requested order")

    def psd_grid(self):
        return np.linspace(-self.psd_halfwidth, self.psd_halfwidth, self.psd_points)

    def refined(self):
        """Same settings with the PSD grid resolution doubled."""
        return replace(self, psd_points=2 * self.psd_points - 1)


DEFAULT_CONFIG = InversionConfig()


def _require_kind(t, kind):
    if not isinstance(t, TransformFn) or t.kind is not kind:
        got = getattr(t, "kind", type(t).__name__)
        raise TransformKindError(f"expected a {kind.value} transform, got {got}")


def default_cm_grid(cfg=DEFAULT_CONFIG):
    h = cfg.cm_max / cfg.cm_points
    return h * np.arange(1, cfg.cm_points + 1)


# ----------------------------------------------------------------------------
# LT <-> PGF bridge
# ----------------------------------------------------------------------------


def lt_to_pgf(phi):
    """Map a Laplace transform to the PGF ``P(s) = phi(1 - s)``.

    The resulting law is the Poisson mixture with random intensity drawn from
    the law of ``phi``; when ``phi`` carries a sampler, so does the result.
    """
    _require_kind(phi, Kind.LT)
    sampler = None
    if phi.sampler is not None:
        lt_sampler = phi.sampler

        def sampler(rng, size):
            return rng.poisson(lt_sampler(rng, size))

    return TransformFn(
        Kind.PGF,
        lambda s: phi.func(1.0 - s),
        label=f"lt_to_pgf({phi.label})",
        sampler=sampler,
        meta={"source_lt": phi, "family": "poisson-mixture"},
    )


def pgf_to_lt(P, cfg=DEFAULT_CONFIG):
    """Map a PGF to ``phi(s) = P(1 - s)`` after a complete-monotonicity check.

    Raises
    ------
    CompleteMonotonicityError
        With the first violating finite difference.
    """
    _require_kind(P, Kind.PGF)
    candidate = TransformFn(
        Kind.LT, lambda s: P.func(1.0 - s), label=f"pgf_to_lt({P.label})"
    )
    report = check_complete_monotonicity(
        candidate, cfg.cm_order, default_cm_grid(cfg), tolerance=cfg.tolerance
    )
    if not report.passed:
        raise CompleteMonotonicityError(
            f"P(1-s) is not completely monotone: {report.certificate.reason}",
            violation=report.certificate.witness,
            report=report,
        )
    return candidate.with_flags(CERTIFIED_NECESSARY_ONLY)


# ----------------------------------------------------------------------------
# complete monotonicity
# ----------------------------------------------------------------------------


def check_complete_monotonicity(phi, order, grid, tolerance=DEFAULT_CONFIG.tolerance):
    """Finite-difference check that ``(-1)^k Delta^k phi >= 0`` for ``k <= order``.

    Order 0 (nonnegativity) is included. This is a necessary condition only.
    """
    grid = np.asarray(grid, dtype=float)
    if order < 2:
        raise ValueError("order must be >= 2")
    if grid.ndim != 1 or grid.size < order + 2:
        raise ValueError("grid needs at least order + 2 points")
    steps = np.diff(grid)
    if np.any(grid <= 0) or np.any(steps <= 0):
        raise ValueError("grid must be positive and strictly increasing")
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise ValueError("grid must be uniformly spaced")

    values = np.asarray(phi(grid))
    if np.iscomplexobj(values):
        values = values.real
    meta = {"points": int(grid.size), "min": float(grid[0]), "max": float(grid[-1]),
            "order": int(order)}

    if not np.all(np.isfinite(values)):
        bad = float(grid[np.argmin(np.isfinite(values))])
        cert = ValidityCertificate(
            "min-signed-difference", -np.inf, meta,
            reason="non-finite value", witness=(0, bad, None),
        )
        return DecompositionReport(
            Identity.COMPLETE_MONOTONICITY, {"order": order}, 0.0, cert,
            verdict_from(0.0, -np.inf, tolerance),
        )

    # the reported violation is the one at the smallest grid point, lowest
    # order first on ties
    worst_per_order = []
    first_violation = None
    first_index = grid.size
    diff = values
    for k in range(order + 1):
        signed = (-1) ** k * diff
        idx = int(np.argmin(signed))
        worst_per_order.append(float(signed[idx]))
        bad = np.nonzero(signed < -tolerance)[0]
        if bad.size and bad[0] < first_index:
            first_index = int(bad[0])
            first_violation = (k, float(grid[bad[0]]), float(signed[bad[0]]))
        diff = np.diff(diff)

    value = min(worst_per_order)
    reason = ""
    if first_violation is not None:
        reason = (f"order {first_violation[0]} difference {first_violation[2]:.3g} "
                  f"at s={first_violation[1]:.4g}")
    cert = ValidityCertificate(
        "min-signed-difference", value, meta, reason=reason,
        witness=first_violation, extra={"worst_per_order": worst_per_order},
    )
    return DecompositionReport(
        Identity.COMPLETE_MONOTONICITY,
        {"order": order},
        0.0,
        cert,
        verdict_from(0.0, value, tolerance),
        caveat="necessary-only: finite-order differences on a finite grid",
    )


# ----------------------------------------------------------------------------
# Gil-Pelaez inversion
# ----------------------------------------------------------------------------

_CHUNK_ELEMENTS = 4_000_000


def _midpoint_gp_integral(cf_values, s, h, x):
    """Midpoint sum of Im[exp(-isx) f(s)]/s over the nodes ``s``."""
    w_re = cf_values.real * (h / s)
    w_im = cf_values.imag * (h / s)
    has_imag = np.any(w_im != 0.0)
    out = np.empty(x.size)
    rows = max(1, _CHUNK_ELEMENTS // s.size)
    for start in range(0, x.size, rows):
        xs = x[start:start + rows]
        phase = np.outer(xs, s)
        acc = -(np.sin(phase) @ w_re)
        if has_imag:
            acc += np.cos(phase) @ w_im
        out[start:start + rows] = acc
    return out


def _midpoint_nodes(U, n):
    h = U / n
    return (np.arange(n) + 0.5) * h, h


def invert_cf_to_cdf(f, x, cfg=DEFAULT_CONFIG):
    """CDF at ``x`` from a characteristic function by Gil-Pelaez inversion.

    ``F(x) = 1/2 - (1/pi) int_0^U Im[exp(-isx) f(s)] / s ds``, evaluated with
    composite midpoint rules on ``n`` and ``2n`` nodes combined by one
    Richardson step (the midpoint nodes avoid the removable singularity at 0;
    the Richardson step removes the O(h^2) error from kinks such as
    ``exp(-|s|)``).

    Raises
    ------
    TruncationUnsafeError
        If ``|f(+-U)|`` is not below ``cfg.tolerance``.
    """
    _require_kind(f, Kind.CF)
    U = cfg.grid_halfwidth
    tail = max(abs(complex(f(U))), abs(complex(f(-U))))
    if not tail < cfg.tolerance:
        raise TruncationUnsafeError(
            f"|f| = {tail:.3g} at the truncation limit U={U:g}; increase "
            "grid_halfwidth or use a faster-decaying CF"
        )
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    n = cfg.grid_points
    s1, h1 = _midpoint_nodes(U, n)
    s2, h2 = _midpoint_nodes(U, 2 * n)
    f1 = np.asarray(f(s1), dtype=complex)
    f2 = np.asarray(f(s2), dtype=complex)
    coarse = _midpoint_gp_integral(f1, s1, h1, xs.ravel())
    fine = _midpoint_gp_integral(f2, s2, h2, xs.ravel())
    integral = (4.0 * fine - coarse) / 3.0
    cdf = np.clip(0.5 - integral / np.pi, 0.0, 1.0).reshape(xs.shape)
    return float(cdf[0]) if np.ndim(x) == 0 else cdf


# ----------------------------------------------------------------------------
# PGF coefficients
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class PgfCoefficients:
    """All ``dft_size`` coefficients from one DFT pass.

    ``tail_mass`` is the absolute mass found at indices ``>= dft_size/2``; for
    a genuine power series it bounds the aliasing error of the low indices.
    """

    coeffs: np.ndarray
    tail_mass: float
    imag_residue: float


def pgf_coefficients(P, cfg=DEFAULT_CONFIG, check_imag=True):
    """Inverse DFT of ``P`` sampled at the ``dft_size`` roots of unity."""
    N = cfg.dft_size
    z = np.exp(2j * np.pi * np.arange(N) / N)
    values = np.asarray(P(z), dtype=complex)
    if values.shape != z.shape or not np.all(np.isfinite(values)):
        raise NotAPowerSeriesError("PGF is not finite on the unit circle")
    c = np.fft.fft(values) / N
    imag_residue = float(np.max(np.abs(c.imag)))
    if check_imag and imag_residue > cfg.tolerance:
        raise NotAPowerSeriesError(
            f"imaginary residue {imag_residue:.3g} exceeds tolerance "
            f"{cfg.tolerance:.3g}"
        )
    real = c.real.copy()
    tail = float(np.sum(np.abs(real[N // 2:])))
    return PgfCoefficients(real, tail, imag_residue)


def extract_pgf_coeffs(P, n_max, cfg=DEFAULT_CONFIG):
    """Probabilities ``p_0 .. p_{n_max}`` of a PGF.

    Raises
    ------
    NotAPowerSeriesError
        If the DFT output has an imaginary part above ``cfg.tolerance``.
    """
    _require_kind(P, Kind.PGF)
    if not 0 <= n_max < cfg.dft_size // 2:
        raise ValueError(f"n_max must be in [0, {cfg.dft_size // 2})")
    return pgf_coefficients(P, cfg).coeffs[: n_max + 1]
