"""
Certification of decomposition identities.

Each check extracts the candidate factor as a ratio (so the identity holds up
to rounding) and then certifies the finitely checkable necessary conditions
for the factor to be a transform of the right kind:

=====================  ==============================  ========================
identity               factor                          certificate
=====================  ==============================  ========================
f(s) = f(bs) f0(s)     f0 = f(s) / f(bs)               min eigenvalue of the
                                                       kernel [f0(s_j - s_k)]
phi(s) = phi(cs) phi0  phi0 = phi(s) / phi(cs)         finite-order complete
                                                       monotonicity
P(s) = P(1-c+cs) P0    P0 = P(s) / P(1-c+cs)           DFT coefficients >= 0,
                                                       summing to 1
=====================  ==============================  ========================
"""

from __future__ import annotations

import numpy as np

from .errors import NotAPowerSeriesError, VanishingTransformError
from .report import (
    NECESSARY_ONLY,
    DecompositionReport,
    Identity,
    ValidityCertificate,
    Verdict,
    combine_verdicts,
    verdict_from,
)
from .transforms import (
    CANDIDATE,
    DEFAULT_CONFIG,
    Kind,
    TransformFn,
    _require_kind,
    check_complete_monotonicity,
    default_cm_grid,
    lt_to_pgf,
    pgf_coefficients,
)

__all__ = [
    "innovation_cf",
    "is_valid_cf",
    "check_semisd",
    "check_sd_full",
    "check_discrete_semisd",
    "check_lt_semisd",
    "corollary1_bridge",
    "DEFAULT_C_GRID",
    "RESIDUAL_TOLERANCE",
]

DEFAULT_C_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))
# ratio extraction makes the identity exact up to rounding
RESIDUAL_TOLERANCE = 1e-13
_FLOOR = np.finfo(float).tiny


def _check_param(name, value):
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must be in (0, 1), got {value!r}")


def _ratio(num, den, kind, code, label, flags=(CANDIDATE,), meta=None):
    """Transform ``num(s) / den(s)`` that refuses to divide by a vanishing value."""

    def func(s):
        d = np.asarray(den(s))
        small = np.abs(d) < _FLOOR
        if np.any(small):
            witness = np.broadcast_to(np.asarray(s), d.shape)[small].ravel()[0]
            raise VanishingTransformError(
                f"denominator vanishes at {complex(witness):.6g}", code=code,
                witness=witness)
        return np.asarray(num(s)) / d

    return TransformFn(kind, func, label=label, flags=frozenset(flags), meta=meta or {})


def innovation_cf(f, b, grid=None):
    """Candidate innovation ``f0(s) = f(s) / f(bs)``.

    Raises
    ------
    VanishingTransformError
        (code ``vanishing-cf``) if ``f(bs)`` vanishes on the working grid.
    """
    _require_kind(f, Kind.CF)
    _check_param("b", b)
    grid = DEFAULT_CONFIG.psd_grid() if grid is None else np.asarray(grid, dtype=float)
    scaled = lambda s: f(b * np.asarray(s, dtype=float))
    f0 = _ratio(f, scaled, Kind.CF, "vanishing-cf", f"innovation_cf({f.label}, b={b:.6g})",
                meta={"parent": f, "b": b})
    # touching the grid here surfaces a vanishing CF before any caller uses f0
    f0(grid)
    return f0


def is_valid_cf(g, grid=None, tolerance=DEFAULT_CONFIG.tolerance):
    """Bochner necessary check on ``grid``.

    Prechecks ``g(0) = 1``, ``|g| <= 1`` and Hermitian symmetry on all pairwise
    differences, then reports the minimum eigenvalue of ``[g(s_j - s_k)]``.
    A failed precheck yields ``value = -inf`` with a witness point.
    """
    grid = DEFAULT_CONFIG.psd_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 21:
        raise ValueError("grid needs at least 21 points")
    if not np.allclose(grid, -grid[::-1], atol=1e-12):
        raise ValueError("grid must be symmetric around 0")
    meta = {"points": int(grid.size), "halfwidth": float(grid[-1])}

    def failed(reason, witness):
        return ValidityCertificate("min-eigenvalue", -np.inf, meta, reason=reason,
                                   witness=float(witness))

    d = np.subtract.outer(grid, grid)
    try:
        m = np.asarray(g(d), dtype=complex)
    except VanishingTransformError as exc:
        return failed(f"{exc.code}: {exc}", np.real(exc.witness))
    g0 = complex(g(0.0))
    if abs(g0 - 1.0) > tolerance:
        return failed(f"g(0) = {g0:.6g} != 1", 0.0)
    if not np.all(np.isfinite(m)):
        return failed("non-finite value", d[~np.isfinite(m)][0])
    over = np.abs(m) - 1.0
    if np.max(over) > tolerance:
        k = np.unravel_index(np.argmax(over), over.shape)
        return failed(f"|g| = {abs(m[k]):.6g} > 1", d[k])
    herm = np.abs(m - m.conj().T)
    if np.max(herm) > tolerance:
        k = np.unravel_index(np.argmax(herm), herm.shape)
        return failed("g(-s) != conj(g(s))", d[k])
    eig = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return ValidityCertificate("min-eigenvalue", float(eig[0]), meta,
                               extra={"max_eigenvalue": float(eig[-1])})


def check_semisd(f, b, grid=None, cfg=DEFAULT_CONFIG):
    """Certify ``f(s) = f(bs) f0(s)`` with ``f0`` a (PSD-certified) CF."""
    grid = cfg.psd_grid() if grid is None else np.asarray(grid, dtype=float)
    f0 = innovation_cf(f, b, grid)
    resid = float(np.max(np.abs(f(grid) - f(b * grid) * f0(grid))))
    cert = is_valid_cf(f0, grid, cfg.tolerance)
    verdict = verdict_from(resid, cert.value, cfg.tolerance, RESIDUAL_TOLERANCE)
    return DecompositionReport(
        Identity.CF_SEMI_SD, {"b": b}, resid, cert, verdict,
        details={"transform": f.label}, factor=f0,
    )


def check_sd_full(f, c_grid=DEFAULT_C_GRID, grid=None, cfg=DEFAULT_CONFIG):
    """Run :func:`check_semisd` at every ``c`` of a finite grid.

    A pass is evidence for selfdecomposability on the sampled ``c`` only.
    """
    subs = [check_semisd(f, c, grid, cfg) for c in c_grid]
    worst = min(subs, key=lambda r: r.certificate.value)
    cert = ValidityCertificate(
        worst.certificate.kind, worst.certificate.value, worst.certificate.grid,
        reason=worst.certificate.reason, witness=worst.certificate.witness,
        extra={"worst_c": worst.parameter["b"]},
        caveat=NECESSARY_ONLY + "; every-c quantifier sampled on a finite c grid",
    )
    failed = [r.parameter["b"] for r in subs if r.verdict is not Verdict.PASS]
    return DecompositionReport(
        Identity.CF_SD_FULL, {"c_grid": list(c_grid)},
        max(r.max_residual for r in subs), cert,
        combine_verdicts(r.verdict for r in subs),
        caveat=cert.caveat,
        details={"transform": f.label, "failed_c": failed},
        sub_reports=subs,
    )


def _unit_interval(cfg):
    return np.linspace(0.0, 1.0, cfg.unit_grid_points)


def check_discrete_semisd(P, c, cfg=DEFAULT_CONFIG):
    """Certify ``P(s) = P(1 - c + cs) P0(s)`` with ``P0`` a PGF.

    ``P0`` is extracted as a ratio and its ``dft_size`` coefficients are read
    off the unit circle; they must be ``>= -tol`` and sum to ``1 +- tol``. A
    pole of ``P0`` on the circle means no convergent power series and fails.

    Raises
    ------
    VanishingTransformError
        (code ``vanishing-pgf``) if ``P(1 - c + cs)`` vanishes on ``[0, 1]``.
    """
    _require_kind(P, Kind.PGF)
    _check_param("c", c)
    thinned = lambda s: P(1.0 - c + c * np.asarray(s))
    p0 = _ratio(P, thinned, Kind.PGF, "vanishing-pgf",
                f"discrete_innovation({P.label}, c={c:.6g})", meta={"parent": P, "c": c})
    s = _unit_interval(cfg)
    p0(s)  # vanishing denominators on [0, 1] are errors, not verdicts
    resid = float(np.max(np.abs(P(s) - thinned(s) * p0(s))))
    meta = {"points_on_circle": cfg.dft_size, "unit_interval_points": int(s.size)}

    try:
        table = pgf_coefficients(p0, cfg)
    except (NotAPowerSeriesError, VanishingTransformError) as exc:
        cert = ValidityCertificate("min-coefficient", -np.inf, meta,
                                   reason=f"not a power series on the unit circle: {exc}")
        return DecompositionReport(Identity.PGF_SEMI_SD, {"c": c}, resid, cert,
                                   Verdict.FAIL, details={"transform": P.label}, factor=p0)

    coeffs = table.coeffs
    total = float(coeffs.sum())
    min_coeff = float(coeffs.min())
    reason = ""
    if abs(total - 1.0) > cfg.tolerance:
        reason = f"coefficients sum to {total:.12g}"
    elif min_coeff < -cfg.tolerance:
        k = int(np.argmin(coeffs))
        reason = f"negative coefficient {min_coeff:.3g} at k={k}"
    cert = ValidityCertificate(
        "min-coefficient", min_coeff, meta, reason=reason,
        witness=int(np.argmin(coeffs)),
        extra={"coefficient_sum": total, "tail_mass": table.tail_mass,
               "imag_residue": table.imag_residue},
    )
    verdict = verdict_from(resid, min_coeff, cfg.tolerance, RESIDUAL_TOLERANCE)
    if abs(total - 1.0) > cfg.tolerance:
        verdict = Verdict.FAIL
    p0 = p0.with_meta(coefficients=coeffs)
    return DecompositionReport(
        Identity.PGF_SEMI_SD, {"c": c}, resid, cert, verdict,
        details={"transform": P.label}, factor=p0,
    )


def check_lt_semisd(phi, c, grid=None, cfg=DEFAULT_CONFIG):
    """Certify ``phi(s) = phi(cs) phi0(s)`` with ``phi0`` completely monotone
    to order ``cfg.cm_order`` on ``grid`` (default: ``cfg.cm_points`` points
    up to ``cfg.cm_max``)."""
    _require_kind(phi, Kind.LT)
    _check_param("c", c)
    grid = default_cm_grid(cfg) if grid is None else np.asarray(grid, dtype=float)
    scaled = lambda s: phi(c * np.asarray(s))
    phi0 = _ratio(phi, scaled, Kind.LT, "vanishing-lt",
                  f"lt_innovation({phi.label}, c={c:.6g})", meta={"parent": phi, "c": c})
    pts = np.concatenate([[0.0], grid])
    resid = float(np.max(np.abs(phi(pts) - scaled(pts) * phi0(pts))))
    cm = check_complete_monotonicity(phi0, cfg.cm_order, grid, cfg.tolerance)
    at0 = float(np.real(phi0(0.0)))
    cert = cm.certificate
    if abs(at0 - 1.0) > cfg.tolerance:
        cert = ValidityCertificate(cert.kind, -np.inf, cert.grid,
                                   reason=f"phi0(0) = {at0:.6g}", witness=0.0)
    verdict = verdict_from(resid, cert.value, cfg.tolerance, RESIDUAL_TOLERANCE)
    return DecompositionReport(
        Identity.LT_SEMI_SD, {"c": c}, resid, cert, verdict,
        caveat=cm.caveat, details={"transform": phi.label}, factor=phi0,
    )


def corollary1_bridge(phi, c, cfg=DEFAULT_CONFIG):
    """Check that an LT passing semi-SD(c) maps to a discrete semi-SD(c) PGF.

    ``pass``: both certificates pass. ``fail``: the LT passes and the PGF does
    not (the implication is violated). ``inconclusive``: the LT itself is not
    certified, so the implication says nothing.
    """
    lt_report = check_lt_semisd(phi, c, cfg=cfg)
    pgf_report = check_discrete_semisd(lt_to_pgf(phi), c, cfg)
    if lt_report.passed:
        verdict = Verdict.PASS if pgf_report.passed else Verdict.FAIL
    else:
        verdict = Verdict.INCONCLUSIVE
    cert = pgf_report.certificate
    return DecompositionReport(
        Identity.LT_PGF_BRIDGE, {"c": c},
        max(lt_report.max_residual, pgf_report.max_residual), cert, verdict,
        details={"lt_verdict": lt_report.verdict.value,
                 "pgf_verdict": pgf_report.verdict.value, "transform": phi.label},
        sub_reports=[lt_report, pgf_report],
    )
