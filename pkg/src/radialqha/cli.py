"""The ``qha`` command: calibrate a model, evaluate single quantities, run check suites.

Exit codes: 0 success, 1 numeric or verification failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import jsonschema
import numpy as np

from .errors import ParameterError, QHAError
from .funxform import PlancherelRule, build_plancherel_rule, calibrate, rule_from_cache, sft
from .model import (
    MODEL_VERSION,
    ModelParams,
    RadialProfile,
    constant,
    hpow,
    indicator,
    rpow,
)
from .qha import AlgebraElement, GelfandPoint, conv_ff, conv_fo, conv_oo, gelfand_eval, op_fourier
from .radop import RadialOperator, berezin, toeplitz_eigs
from .spherical import phi
from .verify import SUITES, run_suite

log = logging.getLogger("qha")

EVAL_TARGETS = ("phi", "sft", "op-ft", "toeplitz-eigs", "berezin", "conv", "gelfand")
CACHE_VERSION = 1


class InputError(Exception):
    """Malformed command line or configuration (exit code 2)."""


# ---------------------------------------------------------------- schema and config


def load_schema(name: str) -> dict:
    text = resources.files("radialqha").joinpath("schema", f"{name}.schema.json").read_text()
    return json.loads(text)


def read_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, load_schema("config"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"config does not match the schema at {where}: {exc.message}") from exc
    return cfg


def model_from_config(cfg: dict) -> ModelParams:
    m = cfg.get("model", {})
    kw = {k: m[k] for k in ("n", "nu", "rho", "truncation", "lambda_max") if k in m}
    n = kw.get("n", 1)
    if "nu" in kw and not kw["nu"] > n:
        raise InputError("nu must exceed n")
    try:
        return ModelParams(**kw)
    except ParameterError as exc:
        raise InputError(str(exc)) from exc


# ---------------------------------------------------------------- parsing helpers


def parse_complex(text: str) -> complex:
    s = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError as exc:
        raise InputError(f"not a number: {text!r}") from exc


def parse_list(text: Optional[str], conv=float) -> List:
    if text is None:
        return []
    try:
        return [conv(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"bad list {text!r}") from exc


def parse_object(obj, n: int, named: Dict[str, Any]):
    """Build a profile or operator from ``kind:arg`` text, a config dict or a config name."""
    if isinstance(obj, str) and obj in named:
        obj = named[obj]
    if isinstance(obj, dict):
        (kind, arg), = obj.items()
        if kind == "opcoeffs":
            return RadialOperator(np.asarray(arg, float), n)
        obj = f"{kind}:{arg}"
    if not isinstance(obj, str) or ":" not in obj:
        raise InputError(f"cannot parse object {obj!r}; use hpow:s, rpow:k, indicator:r0, const:c or op:P<m>")
    kind, _, arg = obj.partition(":")
    try:
        if kind == "hpow":
            return hpow(float(arg))
        if kind == "rpow":
            return rpow(int(arg))
        if kind == "indicator":
            return indicator(float(arg))
        if kind == "const":
            return constant(float(arg))
        if kind == "op":
            if arg.upper().startswith("P"):
                return RadialOperator.projection(int(arg[1:]), n)
            return RadialOperator(np.asarray(parse_list(arg, parse_complex)), n)
    except (ValueError, ParameterError) as exc:
        raise InputError(f"bad object {obj!r}: {exc}") from exc
    raise InputError(f"unknown object kind {kind!r}")


# ---------------------------------------------------------------- output


def cplx(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2)


def rows_to_csv(rows: List[dict]) -> str:
    flat = []
    for row in rows:
        out = {}
        for k, v in row.items():
            if isinstance(v, dict) and set(v) == {"re", "im"}:
                out[f"{k}_re"], out[f"{k}_im"] = v["re"], v["im"]
            else:
                out[k] = v
        flat.append(out)
    cols = sorted({k for row in flat for k in row})
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for row in flat:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def model_dict(params: ModelParams) -> dict:
    d = params.as_dict()
    return {k: d[k] for k in ("n", "nu", "rho", "truncation", "lambda_max")}


# ---------------------------------------------------------------- calibration cache


def cache_dir() -> Path:
    env = os.environ.get("QHA_CACHE_DIR")
    return Path(env) if env else Path.home() / ".cache" / "qha"


def cache_path(params: ModelParams) -> Path:
    return cache_dir() / f"rule-v{CACHE_VERSION}-m{MODEL_VERSION}-{params.key()}.json"


def get_rule(params: ModelParams, use_cache: bool = True) -> PlancherelRule:
    path = cache_path(params)
    if use_cache and path.exists():
        try:
            data = json.loads(path.read_text())
            if data.get("version") == CACHE_VERSION:
                return rule_from_cache(params, data["rule"])
        except (OSError, ValueError, KeyError, ParameterError) as exc:
            log.warning("ignoring unreadable cache %s: %s", path, exc)
    rule = build_plancherel_rule(params)
    if use_cache:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps({"version": CACHE_VERSION, "rule": rule.to_dict()}, sort_keys=True))
            tmp.replace(path)
        except OSError as exc:
            log.warning("could not write cache %s: %s", path, exc)
    return rule


# ---------------------------------------------------------------- commands


def cmd_calibrate(params: ModelParams, args) -> int:
    report = calibrate(params)
    d = report.to_dict()
    print(dump_json({"command": "calibrate", "model": model_dict(params), "report": d}))
    if report.status != "pass":
        for f in report.failures:
            print(f"calibration failure: {f}", file=sys.stderr)
        return 1
    if not args.no_cache:
        get_rule(params, True)
    return 0


def _need(value, flag: str, what: str):
    if value is None or (isinstance(value, list) and not value):
        raise InputError(f"eval {what} needs {flag}")
    return value


def _operator_arg(args, params, named):
    if args.opcoeffs is not None:
        return RadialOperator(np.asarray(parse_list(args.opcoeffs, parse_complex)), params.n)
    if args.f is not None:
        obj = parse_object(args.f, params.n, named)
        if isinstance(obj, RadialOperator):
            return obj
    raise InputError("an operator is required: pass --opcoeffs c0,c1,... or --f op:P<m>")


def eval_rows(what: str, params: ModelParams, args, named: dict, rule: PlancherelRule) -> List[dict]:
    lams = parse_list(args.lam, parse_complex)
    rs = parse_list(args.r, float)
    if what == "phi":
        _need(lams, "--lambda", what)
        _need(rs, "--r", what)
        return [{"lambda": cplx(l), "r": r, "value": cplx(phi(params, l, r))} for l in lams for r in rs]
    if what == "sft":
        f = parse_object(_need(args.f, "--f", what), params.n, named)
        if not isinstance(f, RadialProfile):
            raise InputError("sft needs a function, not an operator")
        vals = sft(params, f, np.asarray(_need(lams, "--lambda", what)))
        return [{"lambda": cplx(l), "value": cplx(v)} for l, v in zip(lams, np.atleast_1d(vals))]
    if what == "op-ft":
        A = _operator_arg(args, params, named)
        vals = op_fourier(params, A, np.asarray(_need(lams, "--lambda", what)))
        return [{"lambda": cplx(l), "value": cplx(v)} for l, v in zip(lams, np.atleast_1d(vals))]
    if what == "toeplitz-eigs":
        f = parse_object(_need(args.f, "--f", what), params.n, named)
        if not isinstance(f, RadialProfile):
            raise InputError("toeplitz-eigs needs a function symbol")
        M = params.truncation if args.m is None else args.m
        T = toeplitz_eigs(params, f, M)
        return [{"m": m, "value": cplx(c)} for m, c in enumerate(T.coeffs)]
    if what == "berezin":
        A = _operator_arg(args, params, named)
        vals = np.atleast_1d(berezin(params, A, np.asarray(_need(rs, "--r", what))))
        return [{"r": r, "value": cplx(v)} for r, v in zip(rs, vals)]
    if what == "conv":
        lhs = parse_object(_need(args.lhs, "--lhs", what), params.n, named)
        rhs = parse_object(_need(args.rhs, "--rhs", what), params.n, named)
        if isinstance(lhs, RadialOperator) and isinstance(rhs, RadialProfile):
            lhs, rhs = rhs, lhs
        if isinstance(lhs, RadialProfile) and isinstance(rhs, RadialOperator):
            out = conv_fo(params, lhs, rhs, args.m, rule)
            return [{"m": m, "value": cplx(c)} for m, c in enumerate(out.coeffs)]
        prof = conv_ff(params, lhs, rhs, rule) if isinstance(lhs, RadialProfile) else conv_oo(params, lhs, rhs, rule)
        vals = np.atleast_1d(np.asarray(prof(np.asarray(_need(rs, "--r", what))), complex))
        return [{"r": r, "value": cplx(v)} for r, v in zip(rs, vals)]
    if what == "gelfand":
        fun = parse_object(args.f, params.n, named) if args.f is not None else None
        if fun is not None and not isinstance(fun, RadialProfile):
            raise InputError("gelfand takes the function part with --f and the operator with --opcoeffs")
        op = RadialOperator(np.asarray(parse_list(args.opcoeffs, parse_complex)), params.n) if args.opcoeffs else None
        kw = {}
        if fun is not None:
            kw["fun"] = fun
        if op is not None:
            kw["op"] = op
        x = AlgebraElement(**kw)
        j = 0 if args.j is None else args.j
        return [
            {"lambda": cplx(l), "j": j, "value": cplx(gelfand_eval(params, x, GelfandPoint(l, j)))}
            for l in _need(lams, "--lambda", what)
        ]
    raise InputError(f"unknown eval target {what!r}")


def cmd_eval(params: ModelParams, args, named: dict) -> int:
    rule = get_rule(params, not args.no_cache)
    try:
        rows = eval_rows(args.what, params, args, named, rule)
    except InputError:
        raise
    except (QHAError, ArithmeticError, ValueError) as exc:
        print(f"eval {args.what} failed: {exc}", file=sys.stderr)
        return 1
    if args.csv:
        sys.stdout.write(rows_to_csv(rows))
    else:
        print(dump_json({"command": "eval", "what": args.what, "model": model_dict(params), "rows": rows}))
    return 0


def cmd_verify(params: ModelParams, args) -> int:
    report = run_suite(params, args.suite, args.seed)
    report["model"] = model_dict(params)
    report["command"] = "verify"
    if args.csv:
        sys.stdout.write(rows_to_csv(report["checks"]))
    else:
        print(dump_json(report))
    if not report["passed"]:
        print("failing checks: " + ", ".join(report["failing"]), file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------- entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-c", "--config", help="JSON job configuration")
    common.add_argument("--csv", action="store_true", default=None, help="emit CSV instead of JSON")
    common.add_argument("--seed", type=int, default=None, help="seed for randomized checks (default 0)")
    common.add_argument("--no-cache", action="store_true", default=None, help="recompute calibration artifacts")
    common.add_argument("-v", "--verbose", action="store_true", help="diagnostics on stderr")

    p = _Parser(prog="qha", description="Quantum harmonic analysis on the complex ball: radial calculus.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("calibrate", parents=[common], help="select rho and fit the Plancherel rule")

    ev = sub.add_parser("eval", parents=[common], help="evaluate one quantity on a grid")
    ev.add_argument("what", choices=EVAL_TARGETS)
    ev.add_argument("--lambda", dest="lam", help="comma-separated spectral points, e.g. 2,0.5i,1+0.5i")
    ev.add_argument("--r", help="comma-separated radii in [0, 1)")
    ev.add_argument("--f", help="function (hpow:s, rpow:k, indicator:r0, const:c) or config object name")
    ev.add_argument("--opcoeffs", help="operator eigenvalues c0,c1,... on P0,P1,...")
    ev.add_argument("--lhs", help="left factor for conv (function or op:P<m>)")
    ev.add_argument("--rhs", help="right factor for conv")
    ev.add_argument("--j", type=int, choices=(0, 1), help="sign bit of the Gelfand point")
    ev.add_argument("--m", type=int, help="output degree for operator results")

    ve = sub.add_parser("verify", parents=[common], help="run named check suites")
    ve.add_argument("suite", nargs="?", default="all", choices=("all",) + SUITES)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
        cfg = read_config(args.config)
        opts = cfg.get("options", {})
        for key, default in (("csv", False), ("seed", 0), ("no_cache", False)):
            if getattr(args, key) is None:
                setattr(args, key, opts.get(key, default))
        params = model_from_config(cfg)
        named = cfg.get("objects", {})
        if args.command == "calibrate":
            return cmd_calibrate(params, args)
        if args.command == "eval":
            return cmd_eval(params, args, named)
        return cmd_verify(params, args)
    except InputError as exc:
        print(f"qha: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
