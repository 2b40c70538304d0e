"""
Command-line front end.

Exit status: 0 when every certificate passes, 1 when a certificate fails (or
is inconclusive), 2 on a usage error. Reports are JSON with a schema version;
data files are CSV with a single ``#`` JSON header line.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .autoregressive import (
    MIN_DIAGNOSTIC_LENGTH,
    build_ar1,
    pooled_chisquare,
    simulate_ar1,
    simulate_inar1,
    stationarity_diagnostic,
)
from .decompose import (
    DEFAULT_C_GRID,
    check_discrete_semisd,
    check_lt_semisd,
    check_sd_full,
    check_semisd,
    corollary1_bridge,
    is_valid_cf,
)
from .errors import (
    CompleteMonotonicityError,
    InvalidExponentError,
    NotSemiSDAtRhoError,
    SamplerAccuracyError,
    SamplerUnavailableError,
    SemiSDError,
    TransformKindError,
    TruncationUnsafeError,
    VanishingTransformError,
)
from .mixtures import theorem3_witness, theorem4_witness
from .recipes import UnknownRecipeError, get_recipe, recipe_table
from .report import (
    SCHEMA_VERSION,
    DecompositionReport,
    Identity,
    Verdict,
    combine_verdicts,
    verdict_from,
)
from .semistable import check_scaling_identity
from .series import write_csv
from .subordination import (
    SubordinationSpec,
    mc_crosscheck,
    simulate_subordinated_path,
    verify_theorem567,
)
from .transforms import DEFAULT_CONFIG, Kind, invert_cf_to_cdf, pgf_coefficients

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

COMMANDS = ("construct", "certify", "simulate-ar1", "simulate-inar1",
            "simulate-subordinated", "invert", "report", "list-recipes")
CHECKS = ("semisd", "sd-full", "discrete-semisd", "lt-semisd", "bridge", "psd", "scaling",
          "theorem3", "theorem4", "T5", "T6", "T7")

# shortcut flags that feed recipe parameters
PARAM_FLAGS = {
    "alpha": "alpha", "b": "b", "eps": "h_epsilon", "phase": "h_phase", "scale": "scale",
    "beta": "beta", "lambda": "lam", "p": "p", "gamma": "gamma", "theta": "theta",
    "rate": "rate", "jump-mean": "jump_mean", "x0": "x0", "sigma": "sigma", "k": "k",
}


class UsageError(Exception):
    pass


def _coerce(text):
    if not isinstance(text, str):
        return text
    low = text.strip().lower()
    if low in ("true", "yes"):
        return True
    if low in ("false", "no"):
        return False
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def _key_value(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), _coerce(v)


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=S, help="JSON or YAML file of options")
    common.add_argument("--recipe", default=S)
    common.add_argument("--param", action="append", type=_key_value, default=S,
                        metavar="KEY=VALUE", help="recipe parameter (repeatable)")
    for flag, key in PARAM_FLAGS.items():
        common.add_argument(f"--{flag}", dest=f"param__{key}", type=_coerce, default=S)
    common.add_argument("--seed", type=int, default=S)
    common.add_argument("--output", default=S, help="data file (CSV)")
    common.add_argument("--report", default=S, help="report file (JSON); stdout if absent")
    common.add_argument("--format", choices=("csv", "json", "text"), default=S)
    common.add_argument("--tolerance", type=float, default=S)
    common.add_argument("--psd-points", type=int, default=S)
    common.add_argument("--dft-size", type=int, default=S)

    parser = argparse.ArgumentParser(
        prog="semisd", description="Semi-selfdecomposable laws: construct, certify, simulate.")
    parser.add_argument("--version", action="version", version=f"semisd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("construct", parents=[common], help="build a recipe and tabulate it")
    p = sub.add_parser("certify", parents=[common], help="run a decomposition certificate")
    p.add_argument("--check", choices=CHECKS, default=S)
    p.add_argument("--c", type=float, default=S, help="decomposition parameter")
    p.add_argument("--c-grid", default=S, help="comma-separated c values for sd-full")

    for name in ("simulate-ar1", "simulate-inar1"):
        p = sub.add_parser(name, parents=[common], help="simulate a stationary chain")
        p.add_argument("--marginal", dest="recipe", default=S)
        p.add_argument("--rho", type=float, default=S)
        p.add_argument("--n", type=int, default=S)
        p.add_argument("--burn-in", type=int, default=S)
    p = sub.add_parser("simulate-subordinated", parents=[common],
                       help="simulate Y(T(t)) paths for a pairing recipe")
    p.add_argument("--pairing", dest="recipe", default=S)
    p.add_argument("--times", default=S, help="comma-separated time grid")
    p.add_argument("--paths", type=int, default=S)
    p = sub.add_parser("invert", parents=[common], help="CDF by Gil-Pelaez inversion")
    p.add_argument("--x", default=S, help="comma-separated abscissae")
    p.add_argument("--x-min", type=float, default=S)
    p.add_argument("--x-max", type=float, default=S)
    p.add_argument("--points", type=int, default=S)
    p = sub.add_parser("report", parents=[common],
                       help="all applicable certificates for a recipe, or summarize a saved report")
    p.add_argument("--input", default=S, help="saved report to summarize")
    p = sub.add_parser("list-recipes", help="print the recipe corpus")
    p.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def _load_config(path):
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith((".yaml", ".yml")):
        import yaml

        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise UsageError(f"cannot parse config: {exc}") from None
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a mapping")
    return data


def _effective(args):
    """Merge config file and flags (flags win); return (effective, echo)."""
    flags = {k: v for k, v in vars(args).items() if k != "command"}
    cfg_file = {}
    if "config" in flags:
        try:
            cfg_file = _load_config(flags.pop("config"))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        except ValueError as exc:
            raise UsageError(f"cannot parse config: {exc}") from None
    flag_params = {k[7:]: v for k, v in list(flags.items()) if k.startswith("param__")}
    for k in [k for k in flags if k.startswith("param__")]:
        del flags[k]
    flag_params.update(dict(flags.pop("param", [])))
    eff = {k.replace("-", "_"): v for k, v in cfg_file.items() if k != "params"}
    params = dict(cfg_file.get("params") or {})
    eff.update(flags)
    params.update(flag_params)
    eff["params"] = params
    echo = {"config_file": cfg_file, "flags": {**flags, "params": flag_params},
            "effective": eff}
    return eff, echo


def _inversion_config(eff):
    cfg = DEFAULT_CONFIG
    for key in ("tolerance", "psd_points", "dft_size"):
        if key in eff:
            cfg = replace(cfg, **{key: eff[key]})
    return cfg


def _build(eff):
    if "recipe" not in eff:
        raise UsageError("missing --recipe")
    recipe = get_recipe(eff["recipe"])
    return recipe, recipe.build(eff["params"])


def _envelope(command, echo, report=None, extra=None):
    out = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": echo,
    }
    if report is not None:
        out["verdict"] = report.verdict.value
        out["report"] = report.to_dict()
    if extra:
        out.update(extra)
    return out


def _emit(eff, payload):
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default,
                      allow_nan=False) + "\n"
    if "report" in eff:
        Path(eff["report"]).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return _finite(obj.item())
    if isinstance(obj, np.ndarray):
        return [_json_default(x) if isinstance(x, np.generic) else x for x in obj.tolist()]
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if hasattr(obj, "value"):
        return obj.value
    return str(obj)


def _finite(x):
    return x if not isinstance(x, float) or math.isfinite(x) else None


def _status(verdict):
    return EXIT_PASS if verdict is Verdict.PASS else EXIT_FAIL


def _sanitize(obj):
    """Replace non-finite floats so the JSON stays strict."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float):
        return _finite(obj)
    if isinstance(obj, np.generic):
        return _sanitize(obj.item())
    return obj


# ---------------------------------------------------------------- commands


def _describe(obj):
    if isinstance(obj, SubordinationSpec):
        return {"kind": "subordination", **obj.to_dict()}
    return {"kind": obj.kind.value, "label": obj.label,
            "params": obj.meta.get("params", {}), "flags": sorted(obj.flags),
            "has_sampler": obj.sampler is not None}


def cmd_construct(eff, echo):
    recipe, obj = _build(eff)
    extra = {"object": _describe(obj)}
    if isinstance(obj, SubordinationSpec):
        s = np.linspace(-3.0, 3.0, 13)
        from .subordination import subordinated_cf

        vals = subordinated_cf(obj, 1.0, s)
    else:
        s = np.linspace(0.0, 1.0, 11) if obj.kind is Kind.PGF else np.linspace(-3.0, 3.0, 13)
        if obj.kind is Kind.LT:
            s = np.linspace(0.0, 6.0, 13)
        vals = np.asarray(obj(s), dtype=complex)
    vals = np.asarray(vals, dtype=complex)
    extra["values"] = [{"s": float(a), "re": float(v.real), "im": float(v.imag)}
                       for a, v in zip(s, vals)]
    if "output" in eff:
        write_csv(eff["output"], ["s", "re", "im"], [s, vals.real, vals.imag],
                  header=echo["effective"])
    _emit(eff, _envelope("construct", echo, extra=extra))
    return EXIT_PASS


def _semisd_b(obj, eff):
    if "c" in eff:
        return float(eff["c"])
    for key in ("exponent", "exponent_inner"):
        psi = obj.meta.get(key)
        if psi is not None and hasattr(psi, "b"):
            return float(psi.b)
    for key in ("semisd_b", "b"):
        if key in obj.meta:
            return float(obj.meta[key])
    raise UsageError("--c is required: the recipe carries no semi-stable b")


def _c_grid(eff):
    grid = eff.get("c_grid")
    if grid is None:
        return DEFAULT_C_GRID
    if isinstance(grid, str):
        grid = [float(v) for v in grid.split(",") if v.strip()]
    return tuple(float(v) for v in grid)


def _require(obj, kind, check):
    if isinstance(obj, SubordinationSpec) or obj.kind is not kind:
        raise UsageError(f"check {check!r} needs a {kind.value} recipe")


def _psd_report(f, cfg):
    cert = is_valid_cf(f, cfg.psd_grid(), cfg.tolerance)
    return DecompositionReport(Identity.CF_SEMI_SD, {"check": "psd"}, 0.0, cert,
                               verdict_from(0.0, cert.value, cfg.tolerance),
                               caveat=cert.caveat, details={"label": f.label})


def run_check(obj, check, eff, cfg):
    """Dispatch one named certificate; returns a DecompositionReport."""
    if check in ("T5", "T6", "T7", "theorem3", "theorem4"):
        if not isinstance(obj, SubordinationSpec):
            raise UsageError(f"check {check!r} needs a subordination pairing recipe")
        if check == "theorem3":
            return theorem3_witness(obj.driven_exponent, obj.directing_lt, cfg=cfg)
        if check == "theorem4":
            return theorem4_witness(obj.driven_exponent, obj.directing_lt, cfg=cfg)
        arg = _c_grid(eff) if check == "T5" else None
        return verify_theorem567(obj, check, arg, cfg=cfg)
    if check == "semisd":
        _require(obj, Kind.CF, check)
        return check_semisd(obj, _semisd_b(obj, eff), cfg=cfg)
    if check == "sd-full":
        _require(obj, Kind.CF, check)
        return check_sd_full(obj, _c_grid(eff), cfg=cfg)
    if check == "psd":
        _require(obj, Kind.CF, check)
        return _psd_report(obj, cfg)
    if check == "scaling":
        psi = None if isinstance(obj, SubordinationSpec) else obj.meta.get("exponent")
        if isinstance(obj, SubordinationSpec):
            psi = obj.driven_exponent
        if psi is None or not hasattr(psi, "a"):
            raise UsageError("check 'scaling' needs a recipe with a semi-stable exponent")
        return check_scaling_identity(psi, np.logspace(-3, 3, 1001))
    if check == "discrete-semisd":
        _require(obj, Kind.PGF, check)
        return check_discrete_semisd(obj, _semisd_b(obj, eff), cfg)
    if check in ("lt-semisd", "bridge"):
        _require(obj, Kind.LT, check)
        c = _semisd_b(obj, eff) if "c" in eff or "semisd_b" not in obj.meta \
            else float(obj.meta["semisd_b"])
        fn = check_lt_semisd if check == "lt-semisd" else corollary1_bridge
        return fn(obj, c, cfg=cfg)
    raise UsageError(f"unknown check {check!r}")


def _error_report(exc):
    return {"verdict": Verdict.FAIL.value,
            "error": {"type": type(exc).__name__, "code": getattr(exc, "code", None),
                      "message": str(exc),
                      "details": _sanitize(getattr(exc, "details", {}))}}


def cmd_certify(eff, echo):
    recipe, obj = _build(eff)
    if "check" not in eff:
        raise UsageError(f"missing --check (one of {', '.join(CHECKS)})")
    cfg = _inversion_config(eff)
    try:
        report = run_check(obj, eff["check"], eff, cfg)
    except (VanishingTransformError, CompleteMonotonicityError, TruncationUnsafeError) as exc:
        _emit(eff, _envelope("certify", echo, extra=_error_report(exc)))
        return EXIT_FAIL
    _emit(eff, _envelope("certify", echo, report))
    return _status(report.verdict)


def _write_series(eff, sample, fmt_default="csv"):
    if "output" not in eff:
        return None
    if eff.get("format", fmt_default) == "json":
        names, cols = sample.columns()
        data = {n: np.asarray(c).tolist() for n, c in zip(names, cols)}
        Path(eff["output"]).write_text(
            json.dumps({"header": _sanitize(json.loads(json.dumps(
                sample.config_echo(), default=_json_default))), "data": data},
                sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    else:
        sample.to_csv(eff["output"])
    return eff["output"]


def _simulate_chain(eff, echo, command):
    recipe, marginal = _build(eff)
    if isinstance(marginal, SubordinationSpec) or marginal.kind is Kind.LT:
        raise UsageError(f"{command} needs a CF or PGF marginal recipe")
    discrete = marginal.kind is Kind.PGF
    if discrete != (command == "simulate-inar1"):
        raise UsageError(f"{command} needs a {'PGF' if command == 'simulate-inar1' else 'CF'} "
                         "marginal recipe")
    if "rho" not in eff:
        raise UsageError("missing --rho")
    cfg = _inversion_config(eff)
    try:
        config = build_ar1(marginal, float(eff["rho"]), n=int(eff.get("n", 200_000)),
                           burn_in=int(eff.get("burn_in", 0)), seed=int(eff.get("seed", 0)),
                           cfg=cfg)
    except NotSemiSDAtRhoError as exc:
        _emit(eff, _envelope(command, echo, exc.report, extra=_error_report(exc)))
        return EXIT_FAIL
    sample = simulate_inar1(config) if discrete else simulate_ar1(config)
    out = _write_series(eff, sample)
    extra = {"output": out, "n": len(sample), "innovation_source":
             config.innovation_source.value, "certificate": config.report.to_dict()}
    if len(sample) < MIN_DIAGNOSTIC_LENGTH:
        extra["diagnostic"] = f"skipped: n below {MIN_DIAGNOSTIC_LENGTH}"
        _emit(eff, _envelope(command, echo, config.report, extra=extra))
        return EXIT_PASS
    report = stationarity_diagnostic(sample)
    if discrete:
        table = pgf_coefficients(marginal, cfg).coeffs
        counts = np.bincount(np.asarray(sample.values, dtype=np.int64))
        stat, pval, bins = pooled_chisquare(counts, np.clip(table, 0.0, None))
        extra["gof"] = {"statistic": stat, "p_value": pval, "bins": bins}
    _emit(eff, _envelope(command, echo, report, extra=extra))
    return _status(report.verdict)


def cmd_simulate_subordinated(eff, echo):
    params = dict(eff["params"])
    if "times" in eff:
        params["time_grid"] = eff["times"]
    if "paths" in eff:
        params["mc_paths"] = eff["paths"]
    if "seed" in eff:
        params["seed"] = eff["seed"]
    if "recipe" not in eff:
        raise UsageError("missing --pairing")
    recipe = get_recipe(eff["recipe"])
    if recipe.kind != "subordination":
        raise UsageError(f"recipe {recipe.name!r} is not a subordination pairing")
    spec = recipe.build(params)
    cfg = _inversion_config(eff)
    sample = simulate_subordinated_path(spec, cfg)
    out = _write_series(eff, sample)
    extra = {"output": out, "paths": spec.mc_paths}
    if spec.mc_paths == 0:
        extra["diagnostic"] = "skipped: no paths"
        _emit(eff, _envelope("simulate-subordinated", echo, extra=extra))
        return EXIT_PASS
    report = mc_crosscheck(spec, sample)
    _emit(eff, _envelope("simulate-subordinated", echo, report, extra=extra))
    return _status(report.verdict)


def cmd_invert(eff, echo):
    recipe, f = _build(eff)
    if isinstance(f, SubordinationSpec) or f.kind is not Kind.CF:
        raise UsageError("invert needs a CF recipe")
    if "x" in eff:
        xs = eff["x"]
        x = np.array([float(v) for v in (xs.split(",") if isinstance(xs, str) else xs)])
    else:
        x = np.linspace(float(eff.get("x_min", -3.0)), float(eff.get("x_max", 3.0)),
                        int(eff.get("points", 61)))
    cfg = _inversion_config(eff)
    try:
        F = invert_cf_to_cdf(f, x, cfg)
    except TruncationUnsafeError as exc:
        _emit(eff, _envelope("invert", echo, extra=_error_report(exc)))
        return EXIT_FAIL
    if "output" in eff:
        write_csv(eff["output"], ["x", "cdf"], [x, F], header=echo["effective"])
    _emit(eff, _envelope("invert", echo, extra={
        "label": f.label, "values": [{"x": float(a), "cdf": float(v)} for a, v in zip(x, F)]}))
    return EXIT_PASS


def _applicable_checks(obj):
    if isinstance(obj, SubordinationSpec):
        psi = obj.driven_exponent
        checks = ["scaling"]
        if getattr(psi, "is_stable", False):
            checks.append("T5")
        checks.append("T6" if obj.directing_lt.meta.get("sd") else "T7")
        return checks
    if obj.kind is Kind.CF:
        checks = []
        if "exponent" in obj.meta:
            checks.append("scaling")
        if "exponent" in obj.meta or "exponent_inner" in obj.meta:
            checks.append("semisd")
        # the full sweep is a claim only for laws flagged SD; semi-stable laws fail it
        inner = obj.meta.get("exponent_inner")
        if obj.meta.get("sd") or getattr(inner, "is_stable", False):
            checks.append("sd-full")
        return checks
    if obj.kind is Kind.LT:
        return ["lt-semisd", "bridge"]
    return ["discrete-semisd"]


def cmd_report(eff, echo):
    if "input" in eff:
        try:
            saved = json.loads(Path(eff["input"]).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read report: {exc}") from None
        verdict = saved.get("verdict")
        sys.stdout.write(f"{saved.get('command', '?')}: {verdict}\n")
        return EXIT_PASS if verdict == Verdict.PASS.value else EXIT_FAIL
    recipe, obj = _build(eff)
    cfg = _inversion_config(eff)
    if not isinstance(obj, SubordinationSpec) and obj.kind is not Kind.CF and "c" not in eff \
            and "semisd_b" not in obj.meta and "b" not in obj.meta:
        eff = {**eff, "c": 0.5}
    reports, errors = [], []
    for check in _applicable_checks(obj):
        try:
            reports.append(run_check(obj, check, eff, cfg))
        except (VanishingTransformError, CompleteMonotonicityError) as exc:
            errors.append({"check": check, **_error_report(exc)["error"]})
    verdicts = [r.verdict for r in reports] + [Verdict.FAIL] * len(errors)
    verdict = combine_verdicts(verdicts)
    _emit(eff, _envelope("report", echo, extra={
        "verdict": verdict.value, "reports": [r.to_dict() for r in reports],
        "errors": errors}))
    return _status(verdict)


def cmd_list_recipes(eff, echo):
    table = recipe_table()
    if eff.get("format") == "json":
        sys.stdout.write(json.dumps(_sanitize(table), indent=2, sort_keys=True) + "\n")
        return EXIT_PASS
    width = max(len(r["name"]) for r in table)
    kw = max(len(r["kind"]) for r in table)
    for r in table:
        params = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                           for k, v in r["parameters"].items())
        sys.stdout.write(f"{r['name']:<{width}}  {r['kind']:<{kw}}  {r['description']}"
                         f"  [{params}]\n")
    return EXIT_PASS


HANDLERS = {
    "construct": cmd_construct,
    "certify": cmd_certify,
    "simulate-ar1": lambda e, c: _simulate_chain(e, c, "simulate-ar1"),
    "simulate-inar1": lambda e, c: _simulate_chain(e, c, "simulate-inar1"),
    "simulate-subordinated": cmd_simulate_subordinated,
    "invert": cmd_invert,
    "report": cmd_report,
    "list-recipes": cmd_list_recipes,
}


def _usage_failure(message):
    names = ", ".join(r["name"] for r in recipe_table())
    sys.stderr.write(f"semisd: error: {message}\nsupported recipes: {names}\n")
    return EXIT_USAGE


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        eff, echo = _effective(args)
        return HANDLERS[args.command](eff, echo)
    except UnknownRecipeError as exc:
        return _usage_failure(str(exc))
    except (UsageError, InvalidExponentError, TransformKindError) as exc:
        return _usage_failure(str(exc))
    except SamplerUnavailableError as exc:
        return _usage_failure(f"{exc} (supported: {', '.join(exc.details.get('supported', ()))})")
    except SamplerAccuracyError as exc:
        sys.stderr.write(f"semisd: sampler accuracy: {exc}\n")
        return EXIT_FAIL
    except SemiSDError as exc:
        sys.stderr.write(f"semisd: {exc.code}: {exc}\n")
        return EXIT_FAIL
    except ValueError as exc:
        return _usage_failure(str(exc))


if __name__ == "__main__":
    sys.exit(main())
