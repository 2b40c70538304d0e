"""Certificate and report containers shared by every checking routine."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

SCHEMA_VERSION = 1

NECESSARY_ONLY = (
    "necessary-only: passing a finite check does not prove the factor is a "
    "valid transform"
)


class Identity(str, Enum):
    CF_SEMI_SD = "CF-semi-SD(b)"
    CF_SD_FULL = "CF-SD-full-range"
    LT_SEMI_SD = "LT-semi-SD(c)"
    PGF_SEMI_SD = "PGF-discrete-semi-SD(c)"
    # identities checked by the other modules
    SCALING = "semistable-scaling"
    COMPLETE_MONOTONICITY = "LT-complete-monotonicity"
    LT_PGF_BRIDGE = "LT-PGF-bridge(c)"
    STATIONARITY = "AR1-stationarity"
    SUBORDINATION_MC = "subordination-monte-carlo"
    SUBORDINATION_THEOREM = "subordination-marginal"


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


def verdict_from(max_residual, certificate_value, tolerance, residual_tolerance=None):
    """Combine a residual and a certificate value into a verdict.

    A certificate in ``[-10*tol, -tol)`` is too close to the boundary to call
    and gives ``inconclusive``; anything lower is a failure.
    """
    rtol = tolerance if residual_tolerance is None else residual_tolerance
    if not (max_residual <= rtol):
        return Verdict.FAIL
    if certificate_value >= -tolerance:
        return Verdict.PASS
    if certificate_value >= -10.0 * tolerance:
        return Verdict.INCONCLUSIVE
    return Verdict.FAIL


def combine_verdicts(verdicts):
    verdicts = list(verdicts)
    if any(v is Verdict.FAIL for v in verdicts):
        return Verdict.FAIL
    if any(v is Verdict.INCONCLUSIVE for v in verdicts):
        return Verdict.INCONCLUSIVE
    return Verdict.PASS


def _json_number(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _jsonable(obj):
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _jsonable(obj.tolist())
    if isinstance(obj, float):
        return _json_number(obj)
    if isinstance(obj, complex):
        return {"re": _json_number(obj.real), "im": _json_number(obj.imag)}
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    return str(obj)


@dataclass
class ValidityCertificate:
    """Outcome of a finite necessary-condition check on an extracted factor.

    ``value`` is the minimum eigenvalue (CF), minimum coefficient (PGF) or
    minimum signed finite difference (LT); ``-inf`` marks a failed precheck.
    """

    kind: str
    value: float
    grid: dict = field(default_factory=dict)
    reason: str = ""
    witness: Any = None
    extra: dict = field(default_factory=dict)
    caveat: str = NECESSARY_ONLY

    def to_dict(self):
        return {
            "kind": self.kind,
            "value": _json_number(self.value),
            "grid": _jsonable(self.grid),
            "reason": self.reason,
            "witness": _jsonable(self.witness),
            "extra": _jsonable(self.extra),
            "caveat": self.caveat,
        }


@dataclass
class DecompositionReport:
    identity: Identity
    parameter: Any
    max_residual: float
    certificate: ValidityCertificate
    verdict: Verdict
    caveat: str = NECESSARY_ONLY
    details: dict = field(default_factory=dict)
    sub_reports: list = field(default_factory=list)
    # the extracted factor (a TransformFn); kept for callers, not serialized
    factor: Any = field(default=None, repr=False, compare=False)

    @property
    def passed(self):
        return self.verdict is Verdict.PASS

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "identity": self.identity.value,
            "parameter": _jsonable(self.parameter),
            "max_residual": _json_number(self.max_residual),
            "min_eigenvalue_or_coeff": _json_number(self.certificate.value),
            "verdict": self.verdict.value,
            "grid": _jsonable(self.certificate.grid),
            "caveat": self.caveat,
            "certificate": self.certificate.to_dict(),
            "details": _jsonable(self.details),
            "sub_reports": [r.to_dict() for r in self.sub_reports],
        }

    def summary(self):
        return (
            f"{self.identity.value} @ {self.parameter}: {self.verdict.value} "
            f"(residual={self.max_residual:.3g}, "
            f"{self.certificate.kind}={self.certificate.value:.3g})"
        )
