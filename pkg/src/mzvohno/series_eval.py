"""Nested strict-chain sums.

Every series in the package is an instance of

    sum_{m_1 > m_2 > ... > m_B > 0}  prod_j  h_j(m_j)

with ``h_j(m) = (m - d_j)**(-a_j) * (m - lam)**(-c_j)`` and an optional
``z**m`` weight.  The sum is evaluated innermost-first with prefix sums
(``O(N B)`` time), and the part of the outermost sum beyond ``N`` is
recovered from log-power asymptotic expansions of every prefix sum
(Euler-Maclaurin for ``z = 1``, Boole summation for ``z = -1``).
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import bernoulli

from .asymptotic import LogPowerSeries, power_factor_series
from .errors import ConvergenceError, DomainError
from .indices import as_index

__all__ = [
    "ChainFactor",
    "ChainSeries",
    "EvalConfig",
    "Estimate",
    "TailCorrection",
    "eval_chain",
    "eval_chain_batch",
    "eval_mzv",
    "eval_mzv_estimate",
    "eval_mpl_estimate",
    "eval_mpl",
    "mzv_chain",
    "mpl_chain",
    "pole_coefficients",
    "DEFAULT_N",
]

DEFAULT_N = 10**6
_EPS = np.finfo(float).eps


class TailCorrection(str, enum.Enum):
    NONE = "none"
    INTEGRAL_FIRST_ORDER = "integral_first_order"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class EvalConfig:
    """Truncation and tolerance settings shared by all evaluators.

    ``expansion_order`` is the highest power of ``1/N`` kept in the tail
    expansions; it only matters for ``TailCorrection.ASYMPTOTIC``.
    """

    truncation_N: int = DEFAULT_N
    tail_correction: TailCorrection = TailCorrection.ASYMPTOTIC
    target_abs_tol: float = 1e-9
    lambda_guard: float = 1e-3
    expansion_order: int = 10

    def __post_init__(self):
        if self.truncation_N < 10:
            raise ValueError("truncation_N must be at least 10")
        if not self.target_abs_tol > 0:
            raise ValueError("target_abs_tol must be positive")
        if not self.lambda_guard > 0:
            raise ValueError("lambda_guard must be positive")
        if self.expansion_order < 2:
            raise ValueError("expansion_order must be at least 2")
        object.__setattr__(self, "tail_correction", TailCorrection(self.tail_correction))

    def with_N(self, n):
        return EvalConfig(n, self.tail_correction, self.target_abs_tol,
                          self.lambda_guard, self.expansion_order)


class Estimate(NamedTuple):
    value: complex
    error: float


@dataclass(frozen=True)
class ChainFactor:
    """Summand factor ``(m - shift)**(-power) * (m - lam)**(-lambda_count)``.

    ``z_weight`` attaches ``z**m`` at this chain position.
    """

    power: int = 0
    shift: int = 0
    lambda_count: int = 0
    z_weight: bool = False

    def __post_init__(self):
        if self.power < 0 or self.lambda_count < 0:
            raise ValueError("exponents must be nonnegative")
        if self.power + self.lambda_count < 1:
            raise ValueError("each chain position needs a decaying factor")

    @property
    def decay(self):
        return self.power + self.lambda_count


@dataclass(frozen=True)
class ChainSeries:
    """Factors listed from the outermost variable ``m_1`` inwards."""

    factors: tuple = ()
    weight: int | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def __len__(self):
        return len(self.factors)

    @property
    def has_lambda(self):
        return any(f.lambda_count for f in self.factors)


def mzv_chain(k, z_weight=False) -> ChainSeries:
    k = as_index(k)
    factors = [ChainFactor(power=p) for p in k]
    if factors and z_weight:
        factors[0] = ChainFactor(power=k[0], z_weight=True)
    return ChainSeries(tuple(factors), weight=k.weight)


def mpl_chain(k) -> ChainSeries:
    return mzv_chain(k, z_weight=True)


# ---------------------------------------------------------------------------
# kernel


@lru_cache(maxsize=64)
def _grid(n):
    m = np.arange(1, n + 1, dtype=float)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=32)
def _shifted_power(n, power, shift):
    m = _grid(n)
    base = m - shift
    with np.errstate(divide="ignore"):
        out = np.where(base > 0, base, np.inf) ** (-float(power))
    out.setflags(write=False)
    return out


def _factor_values(f, n, lam, z):
    h = _shifted_power(n, f.power, f.shift) if f.power else None
    if f.lambda_count:
        lf = (_grid(n) - lam) ** (-f.lambda_count)
        h = lf if h is None else h * lf
    if f.z_weight and z != 1:
        zw = _z_powers(n, z)
        h = zw if h is None else h * zw
    return h


def _z_powers(n, z):
    if z == -1:
        out = np.ones(n)
        out[0::2] = -1.0
        return out
    m = _grid(n)
    if isinstance(z, complex) or np.iscomplexobj(z):
        return np.power(complex(z), m)
    return np.power(float(z), m)  # integer exponents, so z < 0 is fine


def _check_lambda(cs, lam, n, guard):
    if not cs.has_lambda:
        return
    lam_c = complex(lam)
    p = min(max(round(lam_c.real), 1), n)
    if abs(lam_c - p) < guard:
        raise DomainError(
            f"lambda={lam!r} lies within {guard:g} of the pole at {p}")


def _check_shifts(cs):
    b = len(cs)
    for j, f in enumerate(cs.factors):
        if f.power and f.shift >= b - j:
            raise DomainError(
                f"chain position {j + 1} reaches m={f.shift}, where (m-{f.shift})^-{f.power} is singular")


def _outer_mode(cs, z):
    """Classify the outermost weight: 'one', 'alternating' or 'geometric'."""
    first = cs.factors[0]
    for f in cs.factors[1:]:
        if f.z_weight and z != 1 and not abs(z) < 1:
            raise DomainError("inner z weights require |z| < 1")
    if not first.z_weight or z == 1:
        return "one"
    if abs(z) > 1:
        raise DomainError(f"|z| = {abs(z):g} > 1 is outside the disc of convergence")
    if abs(z) < 1:
        return "geometric"
    if z == -1:
        return "alternating"
    raise DomainError("on |z| = 1 only z = 1 and z = -1 are supported")


def _geometric_N(z, n):
    r = abs(z)
    if r == 0:
        return 10
    need = int(math.ceil(45.0 / -math.log(r))) + 20
    return max(10, min(n, need))


@lru_cache(maxsize=None)
def _boole_coefficients(count):
    b = bernoulli(2 * count)
    return tuple((2 ** (2 * k) - 1) * b[2 * k] / math.factorial(2 * k) for k in range(1, count + 1))


def _alternating_tail(series, x):
    """``sum_{k>=0} (-1)**k g(x + k)`` from the expansion of ``g``."""
    total = 0.5 * series(x)
    d = series.derivative()
    last = 0.0
    for e in _boole_coefficients(series.order // 2 + 2):
        if d.min_order() > series.order:
            break
        last = e * d(x)
        total -= last
        d = d.derivative().derivative()
    return total, abs(last)


def eval_chain(cs: ChainSeries, lam=0.0, z=1.0, cfg: EvalConfig | None = None) -> Estimate:
    """Evaluate a nested chain sum with a tail correction and error estimate.

    ``lam`` and ``z`` may be complex.  ``z`` only acts on positions whose
    factor has ``z_weight`` set.
    """
    cfg = cfg or EvalConfig()
    b = len(cs)
    if b == 0:
        return Estimate(1.0, 0.0)
    mode = _outer_mode(cs, z)
    if mode == "one" and cs.factors[0].decay < 2:
        raise ConvergenceError("outermost decay exponent must be at least 2 at z = 1")
    n = cfg.truncation_N
    if mode == "geometric":
        n = _geometric_N(z, n)
    _check_lambda(cs, lam, n, cfg.lambda_guard)
    _check_shifts(cs)

    order = cfg.expansion_order
    need_series = mode != "geometric"
    q = None
    q_series = LogPowerSeries.constant(1.0, order) if need_series else None
    scale = 0.0
    for j in range(b - 1, -1, -1):
        f = cs.factors[j]
        h = _factor_values(f, n, lam, z)
        g = h if q is None else h * q
        p = _prefix_sums(g)
        scale += float(np.max(np.abs(p)))
        if j == 0:
            break
        if need_series:
            if f.z_weight and z != 1:
                g_series = LogPowerSeries.constant(0.0, order)
                p_series = LogPowerSeries.constant(p[-1], order)
            else:
                g_series = power_factor_series(f.power, f.shift, lam, f.lambda_count, order) * q_series
                em = g_series.euler_maclaurin()
                p_series = em + (p[-1] - em(n))
            q_series = p_series - g_series
        q = np.empty_like(p)
        q[0] = 0.0
        q[1:] = p[:-1]

    head = p[-1]
    rounding = 8.0 * _EPS * b * scale
    first = cs.factors[0]
    if mode == "geometric":
        r = abs(z)
        last = abs(g[-1]) if g.size else 0.0
        tail_bound = 2.0 * last * r / (1.0 - r)
        return Estimate(_real_if_possible(head), tail_bound + rounding)

    h_series = power_factor_series(first.power, first.shift, lam, first.lambda_count, order)
    g_series = h_series * q_series
    if mode == "alternating":
        tail, last = _alternating_tail(g_series, n + 1.0)
        if n % 2 == 0:
            tail = -tail
        mags = g_series.term_magnitudes(n)
        trunc = last + float(mags[-1])
        if cfg.tail_correction is TailCorrection.NONE:
            return Estimate(_real_if_possible(head), abs(tail) + trunc + rounding)
        if cfg.tail_correction is TailCorrection.INTEGRAL_FIRST_ORDER:
            approx = (-1) ** (n + 1) * 0.5 * g_series(n + 1.0)
            return Estimate(_real_if_possible(head + approx), abs(tail - approx) + trunc + rounding)
        return Estimate(_real_if_possible(head + tail), trunc + rounding)

    if g_series.min_order() < 2:
        raise ConvergenceError("outermost summand decays too slowly for z = 1")
    em = g_series.euler_maclaurin()
    tail = -em(n)
    mags = em.term_magnitudes(n)
    nz = np.nonzero(mags)[0]
    trunc = float(mags[nz[-1]]) if nz.size else 0.0
    if cfg.tail_correction is TailCorrection.NONE:
        return Estimate(_real_if_possible(head), abs(tail) + trunc + rounding)
    if cfg.tail_correction is TailCorrection.INTEGRAL_FIRST_ORDER:
        approx = _first_order_tail(h_series, q_series, n)
        return Estimate(_real_if_possible(head + approx), abs(tail - approx) + trunc + rounding)
    return Estimate(_real_if_possible(head + tail), trunc + rounding)


_BLOCK = 1024


def _prefix_sums(g):
    """Running sums of ``g`` without the ``N eps`` drift of a plain cumsum.

    A single running sum drops the low bits of every small late term once
    the partial sum is large.  Here each block of ``_BLOCK`` terms is summed
    locally and offset by the total of the preceding blocks, which is
    accumulated in extended precision.
    """
    n = g.shape[0]
    nb = -(-n // _BLOCK)
    buf = np.zeros(nb * _BLOCK, dtype=g.dtype)
    buf[:n] = g
    local = np.cumsum(buf.reshape(nb, _BLOCK), axis=1)
    wide = np.clongdouble if np.iscomplexobj(g) else np.longdouble
    offsets = np.zeros(nb, dtype=wide)
    np.cumsum(local[:-1, -1], dtype=wide, out=offsets[1:])
    # split the wide offsets into a leading double and a correction
    hi = offsets.astype(g.dtype)
    lo = (offsets - hi).astype(g.dtype)
    local += lo[:, None]
    local += hi[:, None]
    return local.ravel()[:n]


def _first_order_tail(h_series, q_series, n):
    # inner prefix frozen at its value for m = N+1, outer factor integrated
    # from N + 1/2 (midpoint rule)
    return -h_series.antiderivative()(n + 0.5) * q_series(n + 1.0)


def _real_if_possible(v):
    if isinstance(v, complex) or np.iscomplexobj(v):
        v = complex(v)
        return v
    return float(v)


def eval_chain_batch(cs, points: Sequence, cfg=None, max_workers=None):
    """Evaluate ``cs`` at many ``(lam, z)`` points; results keep input order."""
    points = list(points)
    with ThreadPoolExecutor(max_workers=max_workers) as ex:
        return list(ex.map(lambda lz: eval_chain(cs, lz[0], lz[1], cfg), points))


def eval_mzv(k, cfg: EvalConfig | None = None) -> float:
    """Multiple zeta value ``zeta(k_1, ..., k_n)``; ``zeta(()) = 1``."""
    return eval_mzv_estimate(k, cfg).value


def eval_mzv_estimate(k, cfg=None) -> Estimate:
    k = as_index(k)
    if not k.admissible:
        raise DomainError(f"zeta{k} diverges: first entry must be at least 2")
    return _eval_mzv_cached(k, cfg or EvalConfig())


@lru_cache(maxsize=4096)
def _eval_mzv_cached(k, cfg):
    return eval_chain(mzv_chain(k), 0.0, 1.0, cfg)


def eval_mpl(k, z, cfg: EvalConfig | None = None):
    """Multiple polylogarithm ``Li_k(z)``; ``Li_()(z) = 1``."""
    return eval_mpl_estimate(k, z, cfg).value


def eval_mpl_estimate(k, z, cfg=None) -> Estimate:
    k = as_index(k)
    if abs(z) > 1:
        raise DomainError(f"|z| = {abs(z):g} > 1")
    if len(k) == 0:
        return Estimate(1.0, 0.0)
    if z == 1 and not k.admissible:
        raise DomainError(f"Li{k}(1) diverges")
    return eval_chain(mpl_chain(k), 0.0, z, cfg)


# ---------------------------------------------------------------------------
# pole coefficients


def pole_coefficients(cs: ChainSeries, p_max: int, cfg: EvalConfig | None = None) -> np.ndarray:
    """Coefficients ``c_p`` of ``1/(p - lam)`` in the partial fractions of ``cs``.

    Every position must carry at most one ``(m - lam)`` factor and no ``z``
    weight.  Position ``j`` is pinned to ``m_j = p``; the outer variables are
    summed to infinity (a shifted chain in ``n = m - p``), the inner ones are
    a finite sum below ``p``.  Returns ``c[0..p_max-1]`` for ``p = 1..p_max``.
    """
    cfg = cfg or EvalConfig()
    fs = cs.factors
    if any(f.lambda_count > 1 for f in fs):
        raise ValueError("pole_coefficients needs simple poles (lambda_count <= 1)")
    if any(f.z_weight for f in fs):
        raise ValueError("pole_coefficients takes chains without z weights")
    if fs and fs[0].decay < 2:
        raise ConvergenceError("outermost decay exponent must be at least 2")
    _check_shifts(cs)
    ps = np.arange(1, p_max + 1, dtype=float)
    out = np.zeros(p_max)
    inner = _inner_pinned_sums(fs, p_max)
    for j, f in enumerate(fs):
        if not f.lambda_count:
            continue
        w = (ps - f.shift) ** (-float(f.power)) if f.power else np.ones(p_max)
        if f.power and f.shift >= 1:
            w = np.where(ps > f.shift, w, 0.0)
        outer = np.ones(p_max) if j == 0 else _outer_pinned_sums(fs[:j], p_max, cfg)
        out += w * outer * inner[j]
    return out


def _inner_pinned_sums(fs, p_max):
    """``I_j(p) = sum_{p > m_{j+1} > ... > m_B > 0} prod_{i>j} w_i(m_i) / (m_i - p)^{c_i}``."""
    b = len(fs)
    ps = np.arange(1, p_max + 1, dtype=float)
    m = np.arange(1, p_max + 1, dtype=float)
    res = [None] * b
    # rows: p, columns: m; the strict bound m < p is enforced at the end of
    # each level (the partial sum excludes m >= p)
    diff = m[None, :] - ps[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_diff = np.where(diff != 0, 1.0 / diff, 0.0)
    acc = None  # acc[p, m] = sum over deeper chain with m_{i+1} < m
    res[b - 1] = np.ones(p_max)
    for i in range(b - 1, 0, -1):
        f = fs[i]
        w = np.ones(p_max)
        if f.power:
            base = m - f.shift
            w = np.where(base > 0, np.abs(base) ** (-float(f.power)), 0.0)
        term = w[None, :] * inv_diff ** f.lambda_count
        if acc is not None:
            term = term * acc
        cum = np.cumsum(term, axis=1)
        # I_{i-1}(p) sums m_i over 1..p-1
        res[i - 1] = np.concatenate(([0.0], cum[np.arange(1, p_max), np.arange(0, p_max - 1)]))
        acc = np.zeros_like(cum)
        acc[:, 1:] = cum[:, :-1]
    return res


def _outer_pinned_sums(outer_fs, p_max, cfg):
    """``O_j(p) = sum_{m_1 > ... > m_{j-1} > p} prod w_i(m_i)/(m_i - p)^{c_i}``.

    With ``n_i = m_i - p`` this is an ordinary chain whose power factors are
    shifted by ``shift - p`` and whose lambda factors become ``n**(-c)``.
    """
    out = np.empty(p_max)
    for idx in range(p_max):
        p = idx + 1
        shifted = ChainSeries(tuple(
            ChainFactor(power=f.power, shift=f.shift - p, lambda_count=f.lambda_count)
            for f in outer_fs))
        n = max(12 * p, 400)
        out[idx] = eval_chain(shifted, 0.0, 1.0, cfg.with_N(n)).value
    return out
