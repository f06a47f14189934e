"""Mellin transform layer: power series from pole coefficients and back.

A generating function with simple poles at the positive integers,
``f(lam) = sum_p c_p / (p - lam)``, corresponds to the power series
``phi(z) = sum_p c_p z^p`` and ``f(lam) = int_0^1 phi(z) z^(-lam-1) dz``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .asymptotic import LogPowerSeries, shifted_inverse_power
from .errors import ConvergenceError, DomainError, QuadratureError
from .genfun import G_scalar_chain, _canonical, _selector_pairs, f_chain
from .indices import as_index, enumerate_compositions
from .series_eval import ChainSeries, EvalConfig, Estimate, eval_mpl_estimate, pole_coefficients

__all__ = [
    "PowerSeriesFunction",
    "QuadratureConfig",
    "TailModel",
    "coefficient_stream",
    "inverse_mellin",
    "inverse_mellin_series",
    "forward_mellin",
    "eval_Psi",
    "psi_landen_terms",
    "vartheta_inverse",
]


@dataclass(frozen=True)
class QuadratureConfig:
    """``node_count`` is the subinterval limit handed to the adaptive rule.

    ``endpoint_mode`` is ``"alg"`` (algebraic weight ``z^(-lam)`` at 0) or
    ``"cut"`` (plain integrand, breakpoints accumulating at 1).
    """

    node_count: int = 400
    endpoint_mode: str = "alg"
    abs_tol: float = 1e-9

    def __post_init__(self):
        if self.node_count < 16:
            raise ValueError("node_count must be at least 16")
        if self.abs_tol <= 0:
            raise ValueError("abs_tol must be positive")
        if self.endpoint_mode not in ("alg", "cut"):
            raise ValueError(f"unknown endpoint mode {self.endpoint_mode!r}")


@dataclass(frozen=True)
class TailModel:
    """Least-squares fit ``c_p ~ sum coef[r, i] log(p)^r p^(-i)`` for ``p > P``."""

    coef: np.ndarray
    fit_error: float

    def series(self, order=14) -> LogPowerSeries:
        m = np.zeros((self.coef.shape[0], order + 1))
        m[:, 1:self.coef.shape[1] + 1] = self.coef
        return LogPowerSeries(m, order)

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        out = np.zeros_like(p)
        for r in range(self.coef.shape[0]):
            for i in range(self.coef.shape[1]):
                out += self.coef[r, i] * np.log(p) ** r * p ** (-(i + 1.0))
        return out


def _fit_tail(c, log_degree=2, orders=3) -> TailModel:
    # a larger basis fits [P/8, P] as well but extrapolates worse (collinear columns)
    n = len(c)
    p = np.arange(n // 8, n + 1, dtype=float)
    y = c[n // 8 - 1:]
    cols = [(r, i) for r in range(log_degree + 1) for i in range(1, orders + 1)]
    a = np.stack([np.log(p) ** r * p ** (-float(i)) for r, i in cols], axis=1)
    scale = np.abs(a).max(axis=0)
    sol, *_ = np.linalg.lstsq(a / scale, y, rcond=None)
    sol = sol / scale
    coef = np.zeros((log_degree + 1, orders))
    for (r, i), v in zip(cols, sol):
        coef[r, i - 1] = v
    return TailModel(coef, float(np.max(np.abs(a @ sol - y))))


@dataclass
class PowerSeriesFunction:
    """``phi(z) = sum_{p >= 1} c_p z^p`` with ``c[0]`` holding ``c_1``.

    ``tail`` (optional) models ``c_p`` beyond the stored coefficients; it
    is used by :func:`forward_mellin` and for the Abel limit ``z -> 1``.
    ``exact=True`` declares a polynomial (no coefficients beyond the cutoff).
    """

    coefficients: np.ndarray
    tail: TailModel | None = None
    exact: bool = False
    radius: float = 1.0
    _partial: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)

    @property
    def cutoff(self) -> int:
        return len(self.coefficients)

    @property
    def partial_sums(self) -> np.ndarray:
        if self._partial is None:
            self._partial = np.cumsum(self.coefficients)
        return self._partial

    def truncation_bound(self, z) -> float:
        """Bound on ``sum_{p > P} |c_p| z^p`` from the last stored coefficient."""
        z = abs(z)
        if self.exact:
            return 0.0
        if z >= 1:
            return math.inf
        p = self.cutoff
        return abs(self.coefficients[-1]) * z ** (p + 1) / (1 - z)

    def __call__(self, z):
        if not 0 <= abs(z) < self.radius:
            raise DomainError(f"|z| = {abs(z)} outside the disc of convergence")
        return float(np.polynomial.polynomial.polyval(z, np.concatenate(([0.0], self.coefficients))))

    def theta(self, m=1) -> "PowerSeriesFunction":
        """``(z d/dz)^m phi``: coefficients ``p^m c_p``."""
        p = np.arange(1, self.cutoff + 1, dtype=float)
        return PowerSeriesFunction(self.coefficients * p ** m, exact=self.exact)

    def shift_z(self) -> "PowerSeriesFunction":
        """``z * phi``."""
        return PowerSeriesFunction(np.concatenate(([0.0], self.coefficients)), exact=self.exact)

    def __add__(self, other):
        n = max(self.cutoff, other.cutoff)
        a = np.zeros(n)
        a[:self.cutoff] += self.coefficients
        a[:other.cutoff] += other.coefficients
        return PowerSeriesFunction(a, exact=self.exact and other.exact)

    def scale(self, x) -> "PowerSeriesFunction":
        return PowerSeriesFunction(self.coefficients * x, exact=self.exact)


# ---------------------------------------------------------------------------
# inverse transform


def _cutoff_for(z, tol, floor=40):
    return max(floor, int(math.ceil(math.log(tol) / math.log(z))) + 20)


@lru_cache(maxsize=256)
def _stream(cs: ChainSeries, p_max: int, cfg: EvalConfig) -> np.ndarray:
    out = pole_coefficients(cs, p_max, cfg)
    out.setflags(write=False)
    return out


def coefficient_stream(cs: ChainSeries, p_max: int, cfg=None, with_tail=False) -> PowerSeriesFunction:
    """Pole coefficients of ``cs`` as a power series, optionally with a fitted tail."""
    cfg = cfg or EvalConfig()
    c = np.array(_stream(cs, p_max, cfg))
    return PowerSeriesFunction(c, _fit_tail(c) if with_tail else None)


def _as_chain(obj) -> ChainSeries:
    if isinstance(obj, ChainSeries):
        return obj
    return f_chain(obj)


def inverse_mellin_series(cs, p_max=2000, cfg=None) -> PowerSeriesFunction:
    """``phi`` for a chain (or a pair composition, meaning its ``f``), with tail model."""
    return coefficient_stream(_as_chain(cs), p_max, cfg, with_tail=True)


def inverse_mellin(cs, z, cfg=None, tol=1e-14) -> float:
    """``sum_p c_p z^p`` for ``0 < z < 1``."""
    if not 0 < z < 1:
        raise DomainError("inverse_mellin needs 0 < z < 1")
    cs = _as_chain(cs)
    p_max = _cutoff_for(z, tol)
    if p_max > 20000:
        raise ConvergenceError(f"z = {z} needs {p_max} coefficients")
    phi = coefficient_stream(cs, p_max, cfg)
    bound = phi.truncation_bound(z)
    if bound > max(tol, 1e-12) * max(1.0, abs(phi(z))):
        raise ConvergenceError(f"coefficient tail bound {bound:.2e} exceeds tolerance")
    return phi(z)


# ---------------------------------------------------------------------------
# forward transform


def _tail_transform(model: TailModel, p_max: int, lam: float) -> float:
    """``sum_{p > P} c_p / (p - lam)`` for the modelled tail, by Euler-Maclaurin."""
    h = model.series() * shifted_inverse_power(lam, 1, 14)
    return float(-h.euler_maclaurin()(p_max))


def forward_mellin(phi, lam, qc: QuadratureConfig | None = None, with_error=False):
    """``int_0^1 phi(z) z^(-lam-1) dz``.

    ``phi`` is a :class:`PowerSeriesFunction` (the stored polynomial part is
    integrated numerically, the modelled tail is added analytically) or a
    callable on ``(0, 1)`` with ``phi(z) = O(z)`` at 0.
    """
    qc = qc or QuadratureConfig()
    if lam >= 1:
        raise DomainError("forward_mellin needs lam < 1")
    if isinstance(phi, PowerSeriesFunction):
        coeffs = phi.coefficients  # phi(z)/z = sum c_p z^(p-1)
        g = lambda z: float(np.polynomial.polynomial.polyval(z, coeffs))
    else:
        g = lambda z: phi(z) / z if z > 0 else 0.0
    if qc.endpoint_mode == "alg":
        val, err = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(-lam, 0.0),
                                  limit=qc.node_count, epsabs=qc.abs_tol * 0.1, epsrel=1e-13)
    else:
        val, err = 0.0, 0.0
        cuts = [0.0] + [1 - 2.0 ** -k for k in range(1, 40)] + [1.0]
        for a, b in zip(cuts[:-1], cuts[1:]):
            v, e = integrate.quad(lambda z: g(z) * z ** (-lam), a, b,
                                  limit=qc.node_count, epsabs=qc.abs_tol * 0.01, epsrel=1e-13)
            val += v
            err += e
    if not err <= qc.abs_tol:
        raise QuadratureError(f"quadrature error estimate {err:.2e} exceeds {qc.abs_tol:.1e}")
    if isinstance(phi, PowerSeriesFunction) and phi.tail is not None:
        val += _tail_transform(phi.tail, phi.cutoff, lam)
        err += phi.tail.fit_error * phi.cutoff
    return Estimate(val, err) if with_error else val


def vartheta_inverse(phi: PowerSeriesFunction, constant, z) -> float:
    """``-constant + int_0^z phi(t) dt / t`` on the coefficient stream."""
    if not 0 < z <= 1:
        raise DomainError("vartheta_inverse needs 0 < z <= 1")
    p = np.arange(1, phi.cutoff + 1, dtype=float)
    c = phi.coefficients / p
    if z < 1:
        if phi.truncation_bound(z) > 1e-12:
            raise ConvergenceError("too few coefficients for this z")
        return -constant + float(np.polynomial.polynomial.polyval(z, np.concatenate(([0.0], c))))
    # Abel limit
    if phi.exact:
        return -constant + float(np.sum(c))
    if phi.tail is None:
        raise ConvergenceError("z = 1 needs a tail model")
    tail = phi.tail.series() * shifted_inverse_power(0.0, 1, 14)
    return -constant + float(np.sum(c) - tail.euler_maclaurin()(phi.cutoff))


# ---------------------------------------------------------------------------
# Psi


def psi_landen_terms(k: int) -> list:
    """Indices of ``-sum_j sum_{|c| = k, len(c) = k - j + 1} Li_c`` (every composition of k)."""
    return [as_index(c.parts) for c in enumerate_compositions(k)]


def _psi_stream(k, p_max, cfg) -> np.ndarray:
    """Coefficients of ``Psi(k; z)``: pole coefficients of ``G(k; lam)``.

    A multiplier ``(-lam)^e`` on a term becomes ``(-p)^e`` on its stream.
    """
    k = as_index(k)
    if len(k) == 1:
        return np.array(_stream(G_scalar_chain(k[0]), p_max, cfg))
    p = np.arange(1, p_max + 1, dtype=float)
    n = len(k)
    out = np.zeros(p_max)
    for delta in itertools.product((0, 1), repeat=n - 1):
        e = n - 1 - sum(delta)
        pairs = _selector_pairs(k, delta)
        swapped = tuple((b, a) for a, b in reversed(pairs))
        cs = f_chain(_canonical(swapped))
        out += (-p) ** e * np.array(_stream(cs, p_max, cfg))
    return out


def eval_Psi(k, z, cfg=None, route="a", with_error=False):
    """``Psi(k; z)``, the inverse Mellin transform of ``G(k; lam)``.

    ``route="a"`` sums the pole-coefficient stream; ``route="b"`` uses the
    Landen form ``(-1)^n sum Li_{c_1...c_n}(z/(z-1))`` over compositions
    ``|c_i| = k_i`` (needs ``z < 1/2``).
    """
    k = as_index(k)
    if not k.parts:
        raise DomainError("Psi needs a nonempty index")
    if not 0 < z < 1:
        raise DomainError("eval_Psi needs 0 < z < 1")
    cfg = cfg or EvalConfig()
    if route == "a":
        p_max = _cutoff_for(z, 1e-15)
        c = _psi_stream(k, p_max, cfg)
        bound = abs(c[-1]) * p_max ** len(k) * z ** (p_max + 1) / (1 - z)
        val = float(np.polynomial.polynomial.polyval(z, np.concatenate(([0.0], c))))
        est = Estimate(val, bound + 1e-15 * abs(val))
    elif route == "b":
        if z >= 0.5:
            raise DomainError("route b needs |z/(z-1)| < 1, i.e. z < 1/2")
        x = z / (z - 1)
        pieces = [enumerate_compositions(e) for e in k.parts]
        total, err = 0.0, 0.0
        for combo in itertools.product(*pieces):
            idx = tuple(itertools.chain.from_iterable(c.parts for c in combo))
            e = eval_mpl_estimate(idx, x, cfg)
            total += e.value
            err += e.error
        est = Estimate((-1) ** len(k) * total, err)
    else:
        raise ValueError(f"unknown route {route!r}")
    return est if with_error else est.value
