"""Generating functions f, g, F, G, bracket series and their difference relations.

All functions here reduce to :func:`series_eval.eval_chain`.  A relation is a
list of :class:`DifferenceRelationTerm` whose signed sum vanishes; the
checkers expand a relation, evaluate every term and return the residual
together with the propagated error budget.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .errors import DomainError
from .indices import (Index, PairComposition, as_index, dual, normalize,
                      parse_pair_composition)
from .series_eval import ChainFactor, ChainSeries, EvalConfig, Estimate, eval_chain, eval_mzv_estimate

__all__ = [
    "BracketSpec",
    "DifferenceRelationTerm",
    "Residual",
    "LEMMA_CASES",
    "DEFAULT_LAMBDAS",
    "raw_pairs",
    "f_chain",
    "F_chain",
    "G_scalar_chain",
    "eval_f",
    "eval_g",
    "eval_F",
    "eval_G",
    "eval_G_scalar",
    "eval_F_selector",
    "eval_bracket",
    "f_difference_terms",
    "F_relation_terms",
    "lemma_terms",
    "relation_weights",
    "evaluate_relation",
    "check_f_difference",
    "check_F_relation",
    "check_lemma_cases",
]

DEFAULT_LAMBDAS = (-0.7, -0.3, 0.25, 0.5, 0.8)
_I = ((0, 0), (1, 0), (0, 1))


# ---------------------------------------------------------------------------
# arguments


def raw_pairs(pc) -> tuple:
    """Pairs ``((a_1, b_1), ...)`` with nonnegative entries (zeros allowed)."""
    if isinstance(pc, PairComposition):
        return pc.pairs
    if isinstance(pc, str):
        try:
            return parse_pair_composition(pc).pairs
        except DomainError:
            # PairComposition rejects zeros, which are legal here
            return _pairs_from_flat(re.findall(r"\d+", pc))
    pc = tuple(pc)
    if pc and isinstance(pc[0], (tuple, list)):
        out = tuple((int(a), int(b)) for a, b in pc)
    else:
        out = _pairs_from_flat(pc)
    if not out or any(a < 0 or b < 0 for a, b in out):
        raise DomainError(f"invalid pair sequence {pc!r}")
    return out


def _pairs_from_flat(flat):
    flat = tuple(int(x) for x in flat)
    if not flat or len(flat) % 2:
        raise DomainError(f"pair sequence needs an even, nonzero number of entries: {flat}")
    return tuple(zip(flat[0::2], flat[1::2]))


def _vanishes(pairs) -> bool:
    # f := 0 when a_1 = 0 or b_s = 0, read on the raw sequence
    return pairs[0][0] == 0 or pairs[-1][1] == 0


def _canonical(pairs) -> PairComposition:
    flat = normalize(itertools.chain.from_iterable(pairs)).parts
    return PairComposition.from_flat(flat)


# ---------------------------------------------------------------------------
# bracket series


@dataclass(frozen=True)
class BracketSpec:
    """Entries ``((a_i, d_i), b_i)`` stored flat as ``(a_i, d_i, b_i)``.

    Zero entries follow the merge rules: ``a_i = 0`` joins the neighbouring
    ``b`` blocks, ``b_i = 0`` moves ``a_i`` onto the head of the next block,
    which is only defined when both heads carry the same shift ``d``.
    """

    entries: tuple

    def __post_init__(self):
        ents = tuple((int(a), int(d), int(b)) for a, d, b in self.entries)
        if not ents:
            raise DomainError("a bracket needs at least one entry")
        for a, d, b in ents:
            if a < 0 or b < 0:
                raise DomainError(f"negative bracket entry in {ents}")
            if d not in (0, 1):
                raise DomainError(f"shift d must be 0 or 1, got {d}")
        object.__setattr__(self, "entries", ents)

    @classmethod
    def from_pairs(cls, pc, d=0):
        pairs = raw_pairs(pc)
        ds = [d] * len(pairs) if isinstance(d, int) else list(d)
        if len(ds) != len(pairs):
            raise DomainError("one shift per pair is required")
        return cls(tuple((a, di, b) for (a, b), di in zip(pairs, ds)))

    @property
    def weight(self) -> int:
        return sum(a + b for a, _, b in self.entries)

    def chain(self) -> ChainSeries:
        factors = []
        pending = []  # (power, shift) waiting for the next head variable
        for a, d, b in self.entries:
            if a:
                pending.append((a, d))
            if b == 0:
                continue
            power, shift = _merge_heads(pending, self.entries)
            pending = []
            factors.append(ChainFactor(power=power, shift=shift, lambda_count=1))
            factors.extend(ChainFactor(lambda_count=1) for _ in range(b - 1))
        if pending:
            raise DomainError(f"bracket {self.entries} ends with a block of no variables")
        if not factors:
            raise DomainError(f"bracket {self.entries} has no variables")
        return ChainSeries(tuple(factors), weight=self.weight)

    def __str__(self):
        return "[{" + ",".join(f"({a},{d}),{b}" for a, d, b in self.entries) + "}]"


def _merge_heads(pending, entries):
    if not pending:
        return 0, 0
    shifts = {d for _, d in pending}
    if len(shifts) > 1:
        raise DomainError(f"unresolved merge of heads with different shifts in {entries}")
    return sum(a for a, _ in pending), shifts.pop()


def eval_bracket(b, lam, cfg: EvalConfig | None = None, with_error=False):
    """Bracket series ``[{(a_i, d_i), b_i}; lam]``."""
    spec = b if isinstance(b, BracketSpec) else BracketSpec(tuple(b))
    est = _chain_value(spec.chain(), lam, cfg or EvalConfig())
    return est if with_error else est.value


# ---------------------------------------------------------------------------
# generating functions


def f_chain(pc) -> ChainSeries:
    return BracketSpec.from_pairs(pc, 0).chain()


def F_chain(k) -> ChainSeries:
    """``sum 1/(m_1^k_1 (m_1 - lam) m_2^k_2 ... m_n^k_n)``."""
    k = as_index(k)
    if not k.parts:
        raise DomainError("F needs a nonempty index")
    factors = [ChainFactor(power=k[0], lambda_count=1)]
    factors += [ChainFactor(power=e) for e in k.parts[1:]]
    return ChainSeries(tuple(factors), weight=k.weight + 1)


def G_scalar_chain(k: int) -> ChainSeries:
    """``sum 1/(m_1 (m_1 - lam) (m_2 - lam) ... (m_k - lam))``."""
    if k < 1:
        raise DomainError("k must be positive")
    factors = [ChainFactor(power=1, lambda_count=1)]
    factors += [ChainFactor(lambda_count=1) for _ in range(k - 1)]
    return ChainSeries(tuple(factors), weight=k + 1)


@lru_cache(maxsize=1 << 15)
def _chain_value(cs, lam, cfg) -> Estimate:
    return eval_chain(cs, lam, 1.0, cfg)


def eval_f(pc, lam, cfg: EvalConfig | None = None, with_error=False):
    """``f(pc; lam)``.  Zeros inside ``pc`` are normalized; ``a_1 = 0`` or
    ``b_s = 0`` gives exactly 0."""
    pairs = raw_pairs(pc)
    if _vanishes(pairs):
        est = Estimate(0.0, 0.0)
    else:
        est = _chain_value(f_chain(_canonical(pairs)), lam, cfg or EvalConfig())
    return est if with_error else est.value


def eval_g(pc, lam, cfg: EvalConfig | None = None, with_error=False):
    """``g(pc; lam) = f(reversed, swapped pc; lam)``."""
    pairs = raw_pairs(pc)
    swapped = tuple((b, a) for a, b in reversed(pairs))
    return eval_f(swapped, lam, cfg, with_error)


def eval_F(k, lam, cfg: EvalConfig | None = None, with_error=False):
    """``F(k; lam)`` from its explicit single-lambda series."""
    est = _chain_value(F_chain(k), lam, cfg or EvalConfig())
    return est if with_error else est.value


def _selector_pairs(k, delta):
    pairs = [(k[0], 1)] + [(e - d, 1) for e, d in zip(k.parts[1:], delta)]
    return tuple(pairs)


def _selector_terms(k, kind):
    k = as_index(k)
    if not k.parts:
        raise DomainError(f"{kind} needs a nonempty index")
    n = len(k)
    terms = []
    for delta in itertools.product((0, 1), repeat=n - 1):
        p = n - 1 - sum(delta)
        terms.append(DifferenceRelationTerm.make(kind, _selector_pairs(k, delta), (-1) ** p, p))
    return terms


def eval_F_selector(k, lam, cfg: EvalConfig | None = None, with_error=False):
    """``F(k; lam)`` as the signed selector sum of f's."""
    return _sum_terms(_selector_terms(k, "f"), lam, cfg, with_error)


def eval_G(k, lam, cfg: EvalConfig | None = None, with_error=False):
    """``G(k; lam)`` as the signed selector sum of g's."""
    return _sum_terms(_selector_terms(k, "g"), lam, cfg, with_error)


def eval_G_scalar(k: int, lam, cfg: EvalConfig | None = None, with_error=False):
    """``G(k; lam)`` for a single positive integer from its explicit series."""
    est = _chain_value(G_scalar_chain(k), lam, cfg or EvalConfig())
    return est if with_error else est.value


def _sum_terms(terms, lam, cfg, with_error):
    cfg = cfg or EvalConfig()
    total, err = 0.0, 0.0
    for t in terms:
        v, e = t.evaluate(lam, cfg)
        total += v
        err += e
    return Estimate(total, err) if with_error else total


# ---------------------------------------------------------------------------
# relations


@dataclass(frozen=True)
class DifferenceRelationTerm:
    """``coeff * nu**lam_power * kind(arg; mu)``.

    ``mu`` is ``lam - 1`` when ``shifted`` is set and ``lam`` otherwise;
    ``nu`` likewise follows ``mult_shifted``.  ``kind`` is one of ``f``,
    ``g``, ``F``, ``G``, ``bracket``, ``zeta`` or ``const`` (``arg`` is then
    the constant's value and its weight is 0).
    """

    kind: str
    arg: object
    coeff: float = 1.0
    lam_power: int = 0
    shifted: bool = False
    mult_shifted: bool = False

    @classmethod
    def make(cls, kind, arg, coeff=1.0, lam_power=0, shifted=False, mult_shifted=None):
        if kind in ("f", "g"):
            arg = raw_pairs(arg)
        elif kind in ("F", "G", "zeta"):
            arg = as_index(arg)
        elif kind == "bracket":
            arg = arg if isinstance(arg, BracketSpec) else BracketSpec(tuple(arg))
        return cls(kind, arg, coeff, lam_power, shifted,
                   shifted if mult_shifted is None else mult_shifted)

    @property
    def vanishes(self) -> bool:
        return self.kind in ("f", "g") and _vanishes(self.arg)

    @property
    def weight(self) -> int:
        """Weight with ``lam`` (and ``lam - 1``) counted as ``-1``."""
        if self.kind in ("f", "g"):
            w = sum(a + b for a, b in self.arg)
        elif self.kind in ("F", "G"):
            w = self.arg.weight + 1
        elif self.kind == "zeta":
            w = self.arg.weight
        elif self.kind == "bracket":
            w = self.arg.weight
        else:
            w = 0
        return w - self.lam_power

    def evaluate(self, lam, cfg) -> tuple:
        mu = lam - 1 if self.shifted else lam
        nu = lam - 1 if self.mult_shifted else lam
        scale = self.coeff * nu ** self.lam_power if self.lam_power else self.coeff
        if self.kind == "const":
            return scale * self.arg, 0.0
        if self.vanishes:
            return 0.0, 0.0
        if self.kind == "f":
            est = eval_f(self.arg, mu, cfg, with_error=True)
        elif self.kind == "g":
            est = eval_g(self.arg, mu, cfg, with_error=True)
        elif self.kind == "F":
            est = eval_F(self.arg, mu, cfg, with_error=True)
        elif self.kind == "G":
            est = eval_G(self.arg, mu, cfg, with_error=True)
        elif self.kind == "bracket":
            est = eval_bracket(self.arg, mu, cfg, with_error=True)
        elif self.kind == "zeta":
            est = eval_mzv_estimate(self.arg, cfg)
        else:
            raise ValueError(f"unknown term kind {self.kind!r}")
        return scale * est.value, abs(scale) * est.error


class Residual(NamedTuple):
    residual: float
    budget: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.budget


def evaluate_relation(terms, lam, cfg: EvalConfig | None = None) -> Residual:
    """``|sum of terms|`` and the summed error estimates of the terms.

    The budget also carries a rounding allowance proportional to the
    largest term, since the sum cancels to zero.
    """
    cfg = cfg or EvalConfig()
    total, err, big = 0.0, 0.0, 0.0
    for t in terms:
        v, e = t.evaluate(lam, cfg)
        total += v
        err += e
        big = max(big, abs(v))
    return Residual(abs(total), err + 64 * 2.2e-16 * big * max(len(terms), 1))


def relation_weights(terms) -> set:
    """Distinct weights of the nonvanishing terms; homogeneous iff one element."""
    return {t.weight for t in terms if not t.vanishes}


def f_difference_terms(pc, kind="f", zero_pair_value=0.0) -> list:
    """Both sides of the f (or g) difference relation, moved to one side.

    ``zero_pair_value`` is the value assigned to the all-zero sequence
    ``((0, 0))`` that appears for ``s = 1``; the boundary convention makes
    it 0.
    """
    pairs = raw_pairs(pc)
    if any(a < 1 or b < 1 for a, b in pairs):
        raise DomainError("the difference relation takes a canonical pair composition")
    s = len(pairs)
    terms = []

    def add(sel_pairs, sign, power, shifted):
        if all(a == 0 and b == 0 for a, b in sel_pairs):
            if zero_pair_value:
                terms.append(DifferenceRelationTerm("const", zero_pair_value, sign * (-1) ** power,
                                                    power, shifted, shifted))
            return
        terms.append(DifferenceRelationTerm.make(kind, sel_pairs, sign * (-1) ** power, power, shifted))

    for sel in itertools.product(_I, repeat=s):
        p = s - sum(d + e for d, e in sel)
        add(tuple((a - d, b - e) for (a, b), (d, e) in zip(pairs, sel)), 1, p, False)
    for d1, e_last in itertools.product((0, 1), repeat=2):
        for mid in itertools.product(_I, repeat=s - 1):
            ds = (d1,) + tuple(d for d, _ in mid)
            es = tuple(e for _, e in mid) + (e_last,)
            p = s - sum(ds) - sum(es)
            add(tuple((a - ds[i], b - es[i]) for i, (a, b) in enumerate(pairs)), -1, p, True)
    return terms


def check_f_difference(pc, lam, cfg: EvalConfig | None = None, kind="f",
                       zero_pair_value=0.0) -> Residual:
    """Residual of the difference relation for ``f`` (or ``g``) at ``lam``."""
    return evaluate_relation(f_difference_terms(pc, kind, zero_pair_value), lam, cfg)


def F_relation_terms(k, kind="F", literal=False) -> list:
    """Relation between ``F(k; lam)`` and lower F's (``kind='G'`` for G).

    For ``k_1 >= 2``: ``lam F(k) + zeta(k) = F(k_1 - 1, ...)``.  For
    ``k_1 = 1``: ``lam F(1, k_2, ...) - zeta(k_2 + 1, ...) = lam' F(1, k_2,
    ...; lam') + lam' F(k_2 + 1, ...; lam')``.  The zeta term of the second
    case enters with ``+`` when ``literal`` is set; that form is off by
    exactly ``2 zeta(k_2 + 1, ...)``.
    """
    k = as_index(k)
    if not k.parts:
        raise DomainError("the F relation needs a nonempty index")
    T = DifferenceRelationTerm.make
    if k[0] >= 2:
        z = k if kind == "F" else dual(k)
        lower = Index((k[0] - 1,) + k.parts[1:])
        return [T(kind, k, 1.0, 1), T("zeta", z), T(kind, lower, -1.0)]
    if len(k) == 1:
        raise DomainError("the k_1 = 1 relation needs depth at least 2")
    head = Index((k[1] + 1,) + k.parts[2:])
    z = head if kind == "F" else dual(head)
    return [T(kind, k, 1.0, 1), T("zeta", z, 1.0 if literal else -1.0),
            T(kind, k, -1.0, 1, True), T(kind, head, -1.0, 1, True)]


def check_F_relation(k, lam, cfg: EvalConfig | None = None, literal=False) -> dict:
    """Residuals of the F line and the G line of the F/G relation."""
    return {kind: evaluate_relation(F_relation_terms(k, kind, literal), lam, cfg)
            for kind in ("F", "G")}


# ---------------------------------------------------------------------------
# bracket lemma


LEMMA_CASES = ("i_a", "i_b", "ii", "iii_a", "iii_b")


def _ents(pairs, ds):
    return tuple((a, d, b) for (a, b), d in zip(pairs, ds))


def _with(pairs, i, da=0, db=0):
    out = [list(p) for p in pairs]
    out[i][0] -= da
    out[i][1] -= db
    return tuple(map(tuple, out))


def lemma_terms(case: str, pc, i: int | None = None) -> list:
    """One bracket-lemma identity as a list of terms summing to zero.

    Blocks not touched by a case carry the shifts used when the lemma is
    applied in sequence: ``d = 1`` before the active block and ``d = 0``
    after it.  ``i`` (1-based) selects the active block for case ``ii``.
    """
    pairs = raw_pairs(pc)
    s = len(pairs)
    T = DifferenceRelationTerm.make
    (a1, b1), b_s = pairs[0], pairs[-1][1]
    zeros, ones = (0,) * s, (1,) * s

    def br(ps, ds, coeff=1.0, power=0, shifted=False, mult_shifted=None):
        return T("bracket", _ents(ps, ds), coeff, power, shifted, mult_shifted)

    if case in ("i_a", "i_b") and s == 1 and b1 == 1:
        raise DomainError("case (i) needs at least two chain variables")
    if case == "i_a":
        if a1 < 2:
            raise DomainError("case (i)(a) needs a_1 >= 2")
        d1 = (1,) + zeros[1:]
        return [br(pairs, zeros, 1.0, 1), br(_with(pairs, 0, da=1), zeros, -1.0),
                br(_with(pairs, 0, db=1), zeros, -1.0),
                br(pairs, d1, -1.0, 1, False, True), br(_with(pairs, 0, da=1), d1, 1.0)]
    if case == "i_b":
        if a1 != 1:
            raise DomainError("case (i)(b) needs a_1 = 1")
        d1 = (1,) + zeros[1:]
        return [br(pairs, zeros, 1.0, 1), br(_with(pairs, 0, db=1), zeros, -1.0),
                br(pairs, d1, -1.0, 1, False, True)]
    if case == "ii":
        if i is None or not 2 <= i <= s:
            raise DomainError("case (ii) needs an interior block index 2 <= i <= s")
        if i == s and b_s == 1:
            raise DomainError("case (ii) with i = s needs b_s != 1")
        j = i - 1
        before = (1,) * j + (0,) * (s - j)
        after = (1,) * (j + 1) + (0,) * (s - j - 1)
        return [br(pairs, before, 1.0, 1), br(_with(pairs, j, da=1), before, -1.0),
                br(_with(pairs, j, db=1), before, -1.0),
                br(pairs, after, -1.0, 1, False, True), br(_with(pairs, j, da=1), after, 1.0),
                br(_with(pairs, j - 1, db=1), after, 1.0)]
    if case == "iii_a":
        if b_s < 2:
            raise DomainError("case (iii)(a) needs b_s >= 2")
        return [br(pairs, ones), br(pairs, zeros, -1.0, 0, True),
                br(_with(pairs, s - 1, db=1), zeros, 1.0, -1, True)]
    if case == "iii_b":
        if b_s != 1:
            raise DomainError("case (iii)(b) needs b_s = 1")
        if s < 2:
            raise DomainError("case (iii)(b) needs s >= 2")
        last0 = (1,) * (s - 1) + (0,)
        return [br(pairs, last0, 1.0, 1), br(_with(pairs, s - 1, da=1), last0, -1.0),
                br(pairs, zeros, -1.0, 1, True), br(_with(pairs, s - 1, da=1), zeros, 1.0, 0, True),
                br(_with(pairs, s - 2, db=1), zeros, 1.0, 0, True)]
    raise ValueError(f"unknown lemma case {case!r}")


def lemma_cases_for(pc) -> list:
    """``(case, i)`` pairs whose hypotheses hold for ``pc``."""
    pairs = raw_pairs(pc)
    s = len(pairs)
    (a1, _), (_, b_s) = pairs[0], pairs[-1]
    (_, b1) = pairs[0]
    out = []
    if s > 1 or b1 > 1:
        out.append(("i_a", None) if a1 >= 2 else ("i_b", None))
    out += [("ii", i) for i in range(2, s + 1) if i < s or b_s != 1]
    if b_s >= 2:
        out.append(("iii_a", None))
    elif s >= 2:
        out.append(("iii_b", None))
    return out


def check_lemma_cases(pc, lam, cfg: EvalConfig | None = None, cases=None) -> dict:
    """Residual of every applicable bracket-lemma case, keyed by ``(case, i)``."""
    cases = cases if cases is not None else lemma_cases_for(pc)
    out = {}
    for case, i in cases:
        out[(case, i)] = evaluate_relation(lemma_terms(case, pc, i), lam, cfg)
    return out
