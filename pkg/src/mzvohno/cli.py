"""Command-line front end.

Exit codes: 0 pass, 1 verification failure, 2 usage or parse error,
3 numeric or domain error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConvergenceError, DomainError, MZVError, ParseError, QuadratureError, RankDeficient
from .genfun import (DEFAULT_LAMBDAS, check_f_difference, check_lemma_cases, eval_f, eval_F,
                     eval_g, eval_G)
from .indices import (dual, enumerate_admissible, enumerate_indices,
                      enumerate_pair_compositions, parse_index, parse_pair_composition)
from .mellin import eval_Psi
from .ohno import (VerificationReport, fit_reduction, load_table, verify_duality, verify_identity,
                   verify_landen, verify_ohno, verify_reduced, verify_sum_formula)
from .series_eval import EvalConfig, eval_mpl_estimate, eval_mzv_estimate

SUITES = ("ohno", "reduced", "duality", "sum", "landen", "table", "difference", "lemma")
KINDS = ("zeta", "li", "f", "g", "F", "G", "Psi")
DEFAULT_MAX_WEIGHT = {"ohno": 6, "reduced": 5, "duality": 8, "sum": 7, "landen": 5,
                      "table": 6, "difference": 5, "lemma": 5}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    args: list
    eval_config: EvalConfig
    output: str | None = None
    fmt: str = "text"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.fmt not in ("json", "csv", "text"):
            raise UsageError(f"unknown format {self.fmt!r}")


# ---------------------------------------------------------------------------
# argument helpers


def _eval_config(args) -> EvalConfig:
    n = args.N
    if n is None:
        env = os.environ.get("MZV_DEFAULT_N")
        if env:
            try:
                n = int(float(env))
            except ValueError:
                raise UsageError(f"MZV_DEFAULT_N={env!r} is not an integer") from None
    kw = {}
    if n is not None:
        if n <= 0:
            raise UsageError("N must be positive")
        kw["truncation_N"] = n
    if getattr(args, "tol", None) is not None:
        if args.tol <= 0:
            raise UsageError("tolerance must be positive")
        kw["target_abs_tol"] = args.tol
    return EvalConfig(**kw)


def _number(text):
    try:
        return float(text)
    except ValueError:
        try:
            return complex(text.replace("i", "j"))
        except ValueError:
            raise UsageError(f"not a number: {text!r}") from None


def _samples(text, seed, default):
    """``"0.5,-0.3"``, ``"random:K"`` (seeded) or ``None`` for the default set."""
    if text is None:
        return list(default)
    if text.startswith("random:"):
        k = int(text.split(":", 1)[1])
        rng = np.random.default_rng(seed)
        out = []
        while len(out) < k:
            x = round(float(rng.uniform(-0.9, 0.9)), 6)
            if abs(x) > 1e-3 and x not in out:
                out.append(x)
        return out
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad sample list {text!r}") from None


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag] if v.imag else v.real
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _emit(rc: RunConfig, obj: dict, text: str, rows=None, header=None):
    if rc.fmt == "json":
        out = json.dumps(obj, indent=2, default=_jsonable) + "\n"
    elif rc.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header or list(obj.keys()))
        for r in rows if rows is not None else [list(obj.values())]:
            w.writerow([_jsonable(x) for x in r])
        out = buf.getvalue()
    else:
        out = text.rstrip("\n") + "\n"
    if rc.output:
        with open(rc.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


# ---------------------------------------------------------------------------
# commands


def cmd_dual(rc: RunConfig) -> int:
    k = parse_index(rc.args[0])
    d = dual(k)
    _emit(rc, {"command": "dual", "index": str(k), "dual": str(d)}, str(d))
    return 0


def _eval_value(kind, arg, opts, cfg):
    lam, z = opts.get("lambda"), opts.get("z")
    if kind in ("f", "g", "F", "G") and lam is None:
        raise UsageError(f"eval {kind} needs --lambda")
    if kind in ("li", "Psi") and z is None:
        raise UsageError(f"eval {kind} needs --z")
    if kind == "zeta":
        return eval_mzv_estimate(parse_index(arg), cfg)
    if kind == "li":
        return eval_mpl_estimate(parse_index(arg), z, cfg)
    if kind == "f":
        return eval_f(parse_pair_composition(arg), lam, cfg, with_error=True)
    if kind == "g":
        return eval_g(parse_pair_composition(arg), lam, cfg, with_error=True)
    if kind == "F":
        return eval_F(parse_index(arg), lam, cfg, with_error=True)
    if kind == "G":
        return eval_G(parse_index(arg), lam, cfg, with_error=True)
    if kind == "Psi":
        if isinstance(z, complex):
            raise DomainError("Psi needs real z")
        return eval_Psi(parse_index(arg), z, cfg, route=opts.get("route", "a"), with_error=True)
    raise UsageError(f"unknown kind {kind!r}")


def cmd_eval(rc: RunConfig) -> int:
    kind, arg = rc.args
    t0 = time.perf_counter()
    est = _eval_value(kind, arg, rc.options, rc.eval_config)
    dt = time.perf_counter() - t0
    value = est.value
    obj = {"command": "eval", "kind": kind, "argument": arg,
           "lambda": rc.options.get("lambda"), "z": rc.options.get("z"),
           "value": value, "error": est.error, "N": rc.eval_config.truncation_N,
           "runtime": dt}
    text = f"{value!r} ± {est.error:.2e}"
    _emit(rc, obj, text)
    return 0


def _suite_reports(suite, max_weight, samples, cfg, opts) -> list:
    if suite == "ohno":
        return [verify_ohno(pc, samples, cfg)
                for w in range(2, max_weight + 1) for pc in enumerate_pair_compositions(w)]
    if suite == "reduced":
        return [verify_reduced(k, samples, cfg)
                for w in range(1, max_weight + 1) for k in enumerate_indices(w)]
    if suite == "duality":
        return [verify_duality(k, cfg) for w in range(2, max_weight + 1) for k in enumerate_admissible(w)]
    if suite == "sum":
        return [verify_sum_formula(w, n, cfg) for w in range(2, max_weight + 1) for n in range(1, w)]
    if suite == "landen":
        zs = opts.get("z_samples") or [0.2, 0.4]
        return [verify_landen(k, zs, cfg) for w in range(1, max_weight + 1)
                for k in enumerate_indices(w) if len(k) <= 3]
    if suite == "table":
        return [verify_identity(i, samples, cfg) for i in load_table(min(max_weight, 6))]
    if suite == "difference":
        zv = opts.get("zero_pair_value", 0.0)
        out = []
        for w in range(2, max_weight + 1):
            for pc in enumerate_pair_compositions(w):
                for kind in ("f", "g"):
                    out.append(_residual_report(
                        f"difference {kind} {pc}", samples,
                        lambda lam: check_f_difference(pc, lam, cfg, kind=kind, zero_pair_value=zv)))
        return out
    if suite == "lemma":
        out = []
        for w in range(2, max_weight + 1):
            for pc in enumerate_pair_compositions(w):
                per = {lam: check_lemma_cases(pc, lam, cfg) for lam in samples}
                keys = next(iter(per.values())).keys() if per else []
                for key in keys:
                    out.append(_residual_report(f"lemma {key[0]} i={key[1]} {pc}", samples,
                                                lambda lam, key=key: per[lam][key]))
        return out
    raise UsageError(f"unknown suite {suite!r}")


def _residual_report(name, samples, fn) -> VerificationReport:
    t0 = time.perf_counter()
    rs = [fn(lam) for lam in samples]
    return VerificationReport(name, list(samples), [r.residual for r in rs], [r.budget for r in rs],
                              time.perf_counter() - t0)


def cmd_verify(rc: RunConfig) -> int:
    suite = rc.args[0]
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    max_weight = rc.options.get("max_weight") or DEFAULT_MAX_WEIGHT[suite]
    samples = rc.options["samples"]
    t0 = time.perf_counter()
    reports = _suite_reports(suite, max_weight, samples, rc.eval_config, rc.options)
    dt = time.perf_counter() - t0
    failures = [r.identity for r in reports if not r.passed]
    obj = {
        "command": "verify",
        "suite": suite,
        "max_weight": max_weight,
        "samples": samples,
        "seed": rc.options.get("seed"),
        "N": rc.eval_config.truncation_N,
        "passed": not failures,
        "count": len(reports),
        "failures": failures,
        "runtime": dt,
        "reports": [r.to_dict() for r in reports],
    }
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.max_residual:.2e}  {r.identity}" for r in reports]
    lines.append(f"{suite}: {len(reports) - len(failures)}/{len(reports)} passed in {dt:.1f}s")
    rows = [[r.identity, s, res, b, res <= b]
            for r in reports for s, res, b in zip(r.samples, r.residuals, r.budgets)]
    _emit(rc, obj, "\n".join(lines), rows, ["identity", "sample", "residual", "budget", "passed"])
    return 0 if not failures else 1


def cmd_fit(rc: RunConfig) -> int:
    pc = parse_pair_composition(rc.args[0])
    opts = rc.options
    res = fit_reduction(pc, cfg=rc.eval_config, snap=opts.get("snap", True),
                        held_out=opts.get("held_out"), seed=opts.get("seed") or 0,
                        max_zeta_weight=opts.get("max_weight"))
    obj = {"command": "fit", "pc": str(pc),
           "ansatz": [[str(z), str(a)] for z, a in res.ansatz],
           "coefficients": [float(c) for c in res.coefficients],
           "condition_number": res.condition_number,
           "residual_norm": res.residual_norm}
    if res.snapped is None:
        text = "\n".join(f"{c:+.12g} z{z} F{a}" for c, (z, a) in zip(res.coefficients, res.ansatz))
        _emit(rc, obj, text)
        return 0
    line = res.line()
    ok = res.held_out_residual <= max(res.held_out_budget, 1e-6)
    obj.update({"identity": line, "snapped": [str(c) for c in res.snapped],
                "held_out": res.held_out, "held_out_residual": res.held_out_residual,
                "passed": ok})
    text = f"{line}\nheld-out residual {res.held_out_residual:.2e} (condition {res.condition_number:.2e})"
    _emit(rc, obj, text, [[line, res.held_out_residual, res.condition_number]],
          ["identity", "held_out_residual", "condition_number"])
    return 0 if ok else 1


COMMANDS = {"dual": cmd_dual, "eval": cmd_eval, "verify": cmd_verify, "fit": cmd_fit}


# ---------------------------------------------------------------------------
# parser


def _common(p):
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.add_argument("--output", "-o", help="write to this file instead of stdout")
    p.add_argument("--N", type=int, help="truncation N (default: MZV_DEFAULT_N or 10^6)")
    p.add_argument("--tol", type=float, help="target absolute tolerance")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mzvohno", description="Multiple zeta values, the Ohno "
                                 "relation and its reduction, Landen connection formula.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dual", help="print the dual of an admissible index")
    p.add_argument("index")
    _common(p)

    p = sub.add_parser("eval", help="evaluate zeta, li, f, g, F, G or Psi")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("argument", help='index "(2,1)" or pair composition "((2,1),(1,2))"')
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--z")
    p.add_argument("--route", choices=("a", "b"), default="a", help="Psi route")
    _common(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--max-weight", type=int)
    p.add_argument("--samples", help='lambda samples: "0.5,-0.3" or "random:K"')
    p.add_argument("--z-samples", help="z samples for the landen suite")
    p.add_argument("--zero-pair-value", type=float, default=0.0,
                   help="value of f((0,0)) in the difference suite")
    _common(p)

    p = sub.add_parser("fit", help="fit f(pc) as a zeta-linear combination of F")
    p.add_argument("pc")
    p.add_argument("--max-weight", type=int, help="largest zeta weight in the ansatz")
    p.add_argument("--samples", help="held-out lambda samples")
    p.add_argument("--snap", action=argparse.BooleanOptionalAction, default=True)
    _common(p)
    return ap


def _run_config(ns) -> RunConfig:
    cfg = _eval_config(ns)
    opts = {"seed": ns.seed}
    if ns.command == "dual":
        args = [ns.index]
    elif ns.command == "eval":
        args = [ns.kind, ns.argument]
        opts.update({"lambda": ns.lam, "z": _number(ns.z) if ns.z is not None else None,
                     "route": ns.route})
    elif ns.command == "verify":
        args = [ns.suite]
        if ns.max_weight is not None and ns.max_weight < 1:
            raise UsageError("--max-weight must be positive")
        opts.update({"max_weight": ns.max_weight,
                     "samples": _samples(ns.samples, ns.seed, DEFAULT_LAMBDAS),
                     "z_samples": _samples(ns.z_samples, ns.seed, ()) if ns.z_samples else None,
                     "zero_pair_value": ns.zero_pair_value})
    else:
        args = [ns.pc]
        opts.update({"max_weight": ns.max_weight, "snap": ns.snap,
                     "held_out": _samples(ns.samples, ns.seed, ()) if ns.samples else None})
    return RunConfig(ns.command, args, cfg, ns.output, ns.format, opts)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        rc = _run_config(ns)
        return COMMANDS[rc.subcommand](rc)
    except (UsageError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RankDeficient as exc:
        print(f"error: {exc} (condition number {exc.condition_number:.3g})", file=sys.stderr)
        return 3
    except (DomainError, ConvergenceError, QuadratureError, MZVError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
