"""Identity verification: Ohno, reduced Ohno, duality, sum formula, Landen,
the reduction table, and least-squares fitting of reductions.

Every ``verify_*`` returns a :class:`VerificationReport` holding one residual
and one error budget per sample point.
"""
from __future__ import annotations

import itertools
import re
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np

from .errors import DomainError, ParseError, RankDeficient
from .genfun import DEFAULT_LAMBDAS, F_chain, eval_f, eval_F, eval_g, eval_G, f_chain
from .indices import (Index, PairComposition, as_index, as_pair_composition, dual,
                      enumerate_admissible, enumerate_compositions, kappa_inv,
                      parse_pair_composition, strictly_precedes)
from .series_eval import (EvalConfig, Estimate, eval_mpl_estimate, eval_mzv_estimate,
                          pole_coefficients)

__all__ = [
    "LinearIdentity",
    "VerificationReport",
    "FitResult",
    "parse_identity",
    "parse_table",
    "load_table",
    "verify_identity",
    "verify_table",
    "verify_ohno",
    "verify_reduced",
    "verify_duality",
    "verify_sum_formula",
    "verify_landen",
    "landen_terms",
    "reduction_ansatz",
    "fit_samples",
    "fit_reduction",
    "zeta_class",
    "canonical_coefficients",
    "format_identity",
]

_EPS = 2.2e-16
BUDGET_FACTOR = 10.0


# ---------------------------------------------------------------------------
# identities


@dataclass(frozen=True)
class LinearIdentity:
    """``f(lhs; lam) = sum coeff * zeta(zeta_index) * F(arg; lam)``."""

    lhs: PairComposition
    terms: tuple  # ((Fraction, Index, Index), ...)

    def __post_init__(self):
        w = self.lhs.weight
        for c, z, arg in self.terms:
            if z.parts and not z.admissible:
                raise DomainError(f"zeta{z} diverges")
            if not arg.parts:
                raise DomainError("F needs a nonempty argument")
            if z.weight + arg.weight + 1 != w:
                raise DomainError(f"term {c} z{z} F{arg} has weight "
                                  f"{z.weight + arg.weight + 1}, lhs has {w}")

    @property
    def weight(self) -> int:
        return self.lhs.weight

    @property
    def name(self) -> str:
        return f"f({self.lhs.short()})"

    def coefficients(self) -> dict:
        return {(z, arg): c for c, z, arg in self.terms}

    def __str__(self):
        return format_identity(self.lhs, self.terms)


def _fmt_term(c: Fraction, z: Index, arg: Index, first: bool) -> str:
    sign = "-" if c < 0 else "+"
    mag = abs(c)
    body = "" if mag == 1 else f"{mag} "
    if z.parts:
        body += f"z({','.join(map(str, z.parts))}) "
    body += f"F({','.join(map(str, arg.parts))})"
    if first:
        return body if sign == "+" else "-" + body
    return f" {sign} {body}"


def format_identity(lhs, terms) -> str:
    lhs = as_pair_composition(lhs)
    out = f"f({lhs.short()}) ="
    if not terms:
        return out + " 0"
    out += " "
    for i, (c, z, arg) in enumerate(terms):
        out += _fmt_term(Fraction(c), z, arg, i == 0)
    return out


_TERM = re.compile(
    r"([+-]?)(\d+(?:/\d+)?)?\*?(?:z\(((?:\d+(?:,\d+)*)?|∅)\))?\*?F\((\d+(?:,\d+)*)\)")


def parse_identity(line: str) -> LinearIdentity:
    """Parse ``f(2,2) = 2 F(3) + F(1,2) - z(2) F(1)``."""
    t = re.sub(r"\s+", "", line)
    m = re.fullmatch(r"f\((.+?)\)=(.+)", t)
    if not m:
        raise ParseError(f"expected 'f(...) = ...': {line!r}")
    try:
        lhs = parse_pair_composition(f"({m.group(1)})")
    except (ParseError, DomainError) as exc:
        raise ParseError(f"bad left-hand side in {line!r}: {exc}") from None
    rhs, pos, terms = m.group(2), 0, []
    while pos < len(rhs):
        tm = _TERM.match(rhs, pos)
        if not tm or tm.end() == pos or (terms and not tm.group(1)):
            raise ParseError(f"cannot parse right-hand side near {rhs[pos:]!r} in {line!r}")
        sign, coeff, z, arg = tm.groups()
        c = Fraction(coeff) if coeff else Fraction(1)
        if sign == "-":
            c = -c
        zi = Index(()) if z in (None, "", "∅") else Index(tuple(map(int, z.split(","))))
        terms.append((c, zi, Index(tuple(map(int, arg.split(","))))))
        pos = tm.end()
    try:
        return LinearIdentity(lhs, tuple(terms))
    except DomainError as exc:
        raise ParseError(f"{line!r}: {exc}") from None


def parse_table(text: str) -> list:
    """Parse identity lines; blank lines and ``#`` comments are skipped."""
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(parse_identity(line))
        except ParseError as exc:
            raise ParseError(f"line {no}: {exc}") from None
    return out


def load_table(max_weight: int | None = None) -> list:
    """The shipped reduction table (weights 2 to 6)."""
    text = resources.files("mzvohno").joinpath("data/reduction_table.txt").read_text("utf-8")
    ids = parse_table(text)
    return [i for i in ids if max_weight is None or i.weight <= max_weight]


# ---------------------------------------------------------------------------
# reports


@dataclass
class VerificationReport:
    identity: str
    samples: list
    residuals: list
    budgets: list
    runtime: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r <= b for r, b in zip(self.residuals, self.budgets))

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "samples": [_jsonable(s) for s in self.samples],
            "residuals": [float(r) for r in self.residuals],
            "budgets": [float(b) for b in self.budgets],
            "passed": self.passed,
            "runtime": self.runtime,
        }


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    return float(x)


def _report(name, samples, fn, **info) -> VerificationReport:
    """Run ``fn(sample) -> (residual, budget)`` over the samples."""
    t0 = time.perf_counter()
    res, bud = [], []
    for s in samples:
        r, b = fn(s)
        res.append(float(r))
        bud.append(float(b))
    return VerificationReport(name, list(samples), res, bud, time.perf_counter() - t0, info)


def _budget(errors, values) -> float:
    big = max((abs(v) for v in values), default=0.0)
    return BUDGET_FACTOR * (sum(errors) + 64 * _EPS * big * max(len(values), 1))


def _product(a: Estimate, b: Estimate) -> Estimate:
    return Estimate(a.value * b.value, abs(a.value) * b.error + abs(b.value) * a.error)


def _zeta(z: Index, cfg) -> Estimate:
    return eval_mzv_estimate(z, cfg) if z.parts else Estimate(1.0, 0.0)


# ---------------------------------------------------------------------------
# verification


def verify_identity(ident: LinearIdentity, lambda_samples=DEFAULT_LAMBDAS, cfg=None):
    cfg = cfg or EvalConfig()

    def one(lam):
        lhs = eval_f(ident.lhs, lam, cfg, with_error=True)
        vals, errs = [lhs.value], [lhs.error]
        total = lhs.value
        for c, z, arg in ident.terms:
            t = _product(_zeta(z, cfg), eval_F(arg, lam, cfg, with_error=True))
            total -= float(c) * t.value
            vals.append(float(c) * t.value)
            errs.append(abs(float(c)) * t.error)
        return abs(total), _budget(errs, vals)

    return _report(str(ident), lambda_samples, one, kind="table")


def verify_table(max_weight: int = 6, lambda_samples=DEFAULT_LAMBDAS, cfg=None, table=None) -> list:
    if max_weight > 6 and table is None:
        raise DomainError("the shipped table stops at weight 6")
    ids = table if table is not None else load_table(max_weight)
    return [verify_identity(i, lambda_samples, cfg) for i in ids if i.weight <= max_weight]


def verify_ohno(pc, lambda_samples=DEFAULT_LAMBDAS, cfg=None) -> VerificationReport:
    """``|f(pc; lam) - g(pc; lam)|``."""
    pc = as_pair_composition(pc)
    cfg = cfg or EvalConfig()

    def one(lam):
        a = eval_f(pc, lam, cfg, with_error=True)
        b = eval_g(pc, lam, cfg, with_error=True)
        return abs(a.value - b.value), _budget([a.error, b.error], [a.value, b.value])

    return _report(f"ohno {pc}", lambda_samples, one, kind="ohno")


def verify_reduced(k, lambda_samples=DEFAULT_LAMBDAS, cfg=None) -> VerificationReport:
    """``|F(k; lam) - G(k; lam)|`` with F from its series and G from g's."""
    k = as_index(k)
    cfg = cfg or EvalConfig()

    def one(lam):
        a = eval_F(k, lam, cfg, with_error=True)
        b = eval_G(k, lam, cfg, with_error=True)
        return abs(a.value - b.value), _budget([a.error, b.error], [a.value, b.value])

    return _report(f"reduced {k}", lambda_samples, one, kind="reduced")


def verify_duality(k, cfg=None) -> VerificationReport:
    k = as_index(k)
    kd = dual(k)
    cfg = cfg or EvalConfig()

    def one(_):
        a, b = eval_mzv_estimate(k, cfg), eval_mzv_estimate(kd, cfg)
        return abs(a.value - b.value), _budget([a.error, b.error], [a.value, b.value])

    return _report(f"duality {k} {kd}", [0.0], one, kind="duality")


def verify_sum_formula(weight: int, depth: int, cfg=None) -> VerificationReport:
    """``zeta(w)`` against the sum over admissible indices of weight w, depth n."""
    if not weight > depth >= 1:
        raise DomainError("need weight > depth >= 1")
    cfg = cfg or EvalConfig()

    def one(_):
        lhs = eval_mzv_estimate((weight,), cfg)
        ests = [eval_mzv_estimate(k, cfg) for k in enumerate_admissible(weight, depth)]
        total = sum(e.value for e in ests)
        return (abs(lhs.value - total),
                _budget([lhs.error] + [e.error for e in ests], [lhs.value] + [e.value for e in ests]))

    return _report(f"sum w={weight} n={depth}", [0.0], one, kind="sum")


def landen_terms(k) -> list:
    """Indices ``c_1 ... c_n`` (concatenated) with ``|c_i| = k_i``; sign ``(-1)^n``."""
    k = as_index(k)
    pieces = [enumerate_compositions(e) for e in k.parts]
    return [Index(tuple(itertools.chain.from_iterable(p.parts for p in combo)))
            for combo in itertools.product(*pieces)]


def verify_landen(k, z_samples=(0.2, 0.4), cfg=None, boundary=False) -> VerificationReport:
    """``Li_k(z) - (-1)^n sum Li_c(z/(z-1))``.

    ``boundary=True`` admits ``z = 1/2``, where the right side is evaluated
    at -1 as an alternating series.
    """
    k = as_index(k)
    if not k.parts:
        raise DomainError("Landen needs a nonempty index")
    cfg = cfg or EvalConfig()
    for z in z_samples:
        if not 0 < z <= 0.5 or (z == 0.5 and not boundary):
            raise DomainError(f"z={z} outside (0, 1/2); use boundary mode for z=1/2")
    sign = (-1) ** len(k)
    idx = landen_terms(k)

    def one(z):
        lhs = eval_mpl_estimate(k, z, cfg)
        x = z / (z - 1)
        ests = [eval_mpl_estimate(c, x, cfg) for c in idx]
        rhs = sign * sum(e.value for e in ests)
        return (abs(lhs.value - rhs),
                _budget([lhs.error] + [e.error for e in ests], [lhs.value] + [e.value for e in ests]))

    return _report(f"landen {k}", list(z_samples), one, kind="landen")


# ---------------------------------------------------------------------------
# fitting


@dataclass
class FitResult:
    pc: PairComposition
    ansatz: list
    coefficients: np.ndarray
    residual_norm: float
    condition_number: float
    snapped: list | None = None
    held_out_residual: float | None = None
    held_out_budget: float | None = None
    samples: list = field(default_factory=list)
    held_out: list = field(default_factory=list)
    merged: list = field(default_factory=list)  # ((dropped term), (kept term))

    @property
    def snap_deviation(self) -> float:
        """Largest distance between a fitted coefficient and its snapped value."""
        if self.snapped is None:
            return float("nan")
        return max((abs(float(c) - float(r)) for c, r in zip(self.coefficients, self.snapped)),
                   default=0.0)

    def identity(self) -> LinearIdentity:
        """The snapped identity with zero terms dropped, in canonical order."""
        if self.snapped is None:
            raise ValueError("fit was not snapped")
        terms = [(c, z, a) for c, (z, a) in zip(self.snapped, self.ansatz) if c != 0]
        return LinearIdentity(self.pc, tuple(sorted(terms, key=_term_order)))

    def line(self) -> str:
        return str(self.identity())


def _lex_desc(t: tuple):
    return tuple(-x for x in t) + (0,)


def _term_order(term):
    _, z, a = term
    return (bool(z.parts), -z.weight, _lex_desc(z.parts), _lex_desc(a.parts))


def reduction_ansatz(pc, max_zeta_weight=None) -> list:
    """Weight-homogeneous ``(zeta_index, F_argument)`` pairs with
    ``kappa^-1(zeta_index)`` strictly preceding ``pc``.

    Columns that are proportional because of relations among zeta values
    are not removed here; :func:`fit_reduction` selects an independent set.
    """
    pc = as_pair_composition(pc)
    w = pc.weight
    zs = [Index(())]
    top = w - 2 if max_zeta_weight is None else min(w - 2, max_zeta_weight)
    for j in range(2, top + 1):
        zs += [z for z in enumerate_admissible(j)
               if strictly_precedes(kappa_inv(z).flat, pc.flat)]
    out = []
    for z in zs:
        out += [(z, Index(c.parts)) for c in enumerate_compositions(w - 1 - z.weight)]
    return sorted(out, key=lambda za: _term_order((0, *za)))


def fit_samples(count: int, seed: int = 0, guard: float = 0.1, lo=-1.5, hi=12.5) -> list:
    """``count`` distinct lambda samples in ``(lo, hi)`` at least ``guard`` from integers >= 1."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        x = float(rng.uniform(lo, hi))
        if x >= 1 - guard and abs(x - round(x)) < guard:
            continue
        if all(abs(x - y) > 1e-3 for y in out):
            out.append(round(x, 6))
    return out


def _column(z, arg, lam, cfg) -> Estimate:
    return _product(_zeta(z, cfg), eval_F(arg, lam, cfg, with_error=True))


def zeta_class(z, cfg=None) -> tuple:
    """``(rep, r)`` with ``zeta(z) = r * zeta(rep)`` for the first index ``rep``
    of the same weight (in enumeration order) giving a rational ``r`` with
    denominator at most 64.  Used to merge ansatz columns that coincide
    because of relations among zeta values, e.g. ``zeta(2,1) = zeta(3)``.
    """
    z = as_index(z)
    if not z.parts:
        return z, Fraction(1)
    cfg = cfg or EvalConfig()
    v = eval_mzv_estimate(z, cfg).value
    for rep in enumerate_admissible(z.weight):
        if rep == z:
            break
        ratio = v / eval_mzv_estimate(rep, cfg).value
        r = Fraction(ratio).limit_denominator(64)
        if abs(ratio - float(r)) < 1e-11 * max(1.0, abs(ratio)):
            return rep, r
    return z, Fraction(1)


def canonical_coefficients(ident: LinearIdentity, cfg=None) -> dict:
    """Coefficients keyed by ``(zeta class representative, F argument)``.

    Two identities that differ only by known relations among zeta values
    map to the same dictionary.
    """
    out: dict = {}
    for c, z, arg in ident.terms:
        rep, r = zeta_class(z, cfg)
        out[(rep, arg)] = out.get((rep, arg), Fraction(0)) + c * r
    return {k: v for k, v in out.items() if v != 0}


def _merge_columns(ansatz, cfg) -> tuple:
    """Keep the first term of every group of proportional columns."""
    seen, kept, merged = {}, [], []
    for z, a in ansatz:
        rep, _ = zeta_class(z, cfg)
        key = (rep, a)
        if key in seen:
            merged.append(((z, a), seen[key]))
        else:
            seen[key] = (z, a)
            kept.append((z, a))
    return kept, merged


def _select_independent(a, tol=1e-9) -> list:
    """Greedy column selection: keep a column unless it lies in the span of the kept ones."""
    keep, q = [], np.zeros((a.shape[0], 0))
    for j in range(a.shape[1]):
        v = a[:, j] / np.linalg.norm(a[:, j])
        r = v - q @ (q.T @ v)
        r = r - q @ (q.T @ r)
        if np.linalg.norm(r) > tol:
            keep.append(j)
            q = np.column_stack([q, r / np.linalg.norm(r)])
    return keep


def _residue_system(pc, ansatz, rows, cfg):
    """Rows are the coefficients of ``1/(p - lam)``, ``p = 1..rows``, on both sides."""
    y = pole_coefficients(f_chain(pc), rows, cfg)
    a = np.column_stack([_zeta(z, cfg).value * pole_coefficients(F_chain(arg), rows, cfg)
                         for z, arg in ansatz])
    return a, y


def _sample_system(pc, ansatz, samples, cfg):
    a = np.array([[_column(z, arg, lam, cfg).value for z, arg in ansatz] for lam in samples])
    y = np.array([eval_f(pc, lam, cfg) for lam in samples])
    return a, y


def fit_reduction(pc, ansatz=None, lambda_samples=None, cfg=None, snap=True,
                  max_denominator=64, held_out=None, seed=0, method="residues",
                  max_condition=1e13, max_zeta_weight=None) -> FitResult:
    """Least-squares ``f(pc; lam) = sum alpha * zeta(z) * F(arg; lam)``.

    ``method="residues"`` matches the coefficients of ``1/(p - lam)`` for
    ``p = 1, 2, ...`` (both sides are sums of simple poles, so this is
    equivalent and much better conditioned); ``method="samples"`` matches
    values at ``lambda_samples``.

    Ansatz terms whose zeta values are rationally proportional (same F
    argument) are merged into the first of them, since only their combined
    coefficient is determined.  Without an ansatz the candidates come from
    :func:`reduction_ansatz`, reduced greedily to independent columns.
    Snapping rounds each coefficient to the nearest rational with bounded
    denominator and re-verifies the snapped identity at held-out lambdas.
    """
    pc = as_pair_composition(pc)
    cfg = cfg or EvalConfig()
    auto = ansatz is None
    ansatz = reduction_ansatz(pc, max_zeta_weight) if auto else [(as_index(z), as_index(a)) for z, a in ansatz]
    for z, a in ansatz:
        if z.weight + a.weight + 1 != pc.weight:
            raise DomainError(f"ansatz term z{z} F{a} is not of weight {pc.weight}")
    ansatz, merged = _merge_columns(ansatz, cfg)
    m = len(ansatz)
    if method == "residues":
        samples = list(range(1, 2 * m + 11))
        a, y = _residue_system(pc, ansatz, len(samples), cfg)
    elif method == "samples":
        samples = list(lambda_samples) if lambda_samples is not None else fit_samples(2 * m + 6, seed)
        if len(samples) < m + 2:
            raise DomainError(f"{len(samples)} samples for {m} unknowns; need at least {m + 2}")
        a, y = _sample_system(pc, ansatz, samples, cfg)
    else:
        raise ValueError(f"unknown fit method {method!r}")
    if held_out is None:
        held_out = list(lambda_samples) if method == "residues" and lambda_samples is not None \
            else fit_samples(3, seed + 1)
    if auto:
        keep = _select_independent(a)
        ansatz = [ansatz[j] for j in keep]
        a = a[:, keep]
    scale = np.linalg.norm(a, axis=0)
    if np.any(scale == 0):
        raise RankDeficient("ansatz has an identically zero column")
    cond = float(np.linalg.cond(a / scale))
    if not np.isfinite(cond) or cond > max_condition:
        raise RankDeficient(f"sample matrix is numerically singular (condition {cond:.3g})", cond)
    coef, *_ = np.linalg.lstsq(a / scale, y, rcond=None)
    coef = coef / scale
    resid = float(np.linalg.norm(a @ coef - y))
    res = FitResult(pc, ansatz, coef, resid, cond, samples=samples,
                    held_out=list(held_out), merged=merged)
    if not snap:
        return res
    res.snapped = [Fraction(float(c)).limit_denominator(max_denominator) for c in coef]
    report = verify_identity(res.identity(), held_out, cfg)
    res.held_out_residual = report.max_residual
    res.held_out_budget = max(report.budgets)
    return res
