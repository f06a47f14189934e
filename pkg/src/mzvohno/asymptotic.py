"""Log-power asymptotic expansions and Euler-Maclaurin tails.

A :class:`LogPowerSeries` stores a truncated expansion

    sum_{r, i} c[r, i] * (log x)**r * x**(-i)

valid for large ``x``.  Prefix sums of nested chains grow like powers of
``log n`` and their tails decay like ``(log n)**r / n**i``, so this basis is
closed under everything the chain kernel needs: products, derivatives,
antiderivatives and the Euler-Maclaurin summation operator.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.signal import convolve2d
from scipy.special import bernoulli

__all__ = ["LogPowerSeries", "power_factor_series", "shifted_inverse_power"]


@lru_cache(maxsize=None)
def _bernoulli_over_factorial(k_max):
    b = bernoulli(2 * k_max)
    return tuple(b[2 * k] / math.factorial(2 * k) for k in range(1, k_max + 1))


class LogPowerSeries:
    """Truncated expansion in ``(log x)**r / x**i``.

    ``coef[r, i]`` multiplies ``(log x)**r * x**(-i)``.  Terms with
    ``i > order`` are dropped on every operation.
    """

    __slots__ = ("coef", "order")

    def __init__(self, coef, order):
        self.coef = np.asarray(coef)
        self.order = order
        if self.coef.ndim != 2 or self.coef.shape[1] != order + 1:
            raise ValueError("coefficient array must have shape (R, order + 1)")

    @classmethod
    def constant(cls, value, order):
        coef = np.zeros((1, order + 1), dtype=np.result_type(value, float))
        coef[0, 0] = value
        return cls(coef, order)

    @property
    def log_degree(self):
        return self.coef.shape[0] - 1

    def min_order(self):
        """Smallest ``i`` with a nonzero coefficient (``order + 1`` if zero)."""
        nz = np.nonzero(np.any(self.coef != 0, axis=0))[0]
        return int(nz[0]) if nz.size else self.order + 1

    def _trim(self):
        rows = np.nonzero(np.any(self.coef != 0, axis=1))[0]
        keep = int(rows[-1]) + 1 if rows.size else 1
        if keep < self.coef.shape[0]:
            self.coef = self.coef[:keep]
        return self

    def __add__(self, other):
        if not isinstance(other, LogPowerSeries):
            return self + LogPowerSeries.constant(other, self.order)
        r = max(self.coef.shape[0], other.coef.shape[0])
        out = np.zeros((r, self.order + 1), dtype=np.result_type(self.coef, other.coef))
        out[: self.coef.shape[0]] += self.coef
        out[: other.coef.shape[0]] += other.coef
        return LogPowerSeries(out, self.order)._trim()

    __radd__ = __add__

    def __neg__(self):
        return LogPowerSeries(-self.coef, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, LogPowerSeries):
            return LogPowerSeries(self.coef * other, self.order)
        full = convolve2d(self.coef, other.coef)
        return LogPowerSeries(full[:, : self.order + 1], self.order)._trim()

    __rmul__ = __mul__

    def derivative(self):
        c = self.coef
        out = np.zeros((c.shape[0], self.order + 1), dtype=c.dtype)
        i = np.arange(self.order)
        # d/dx L^r x^-i = r L^(r-1) x^-(i+1) - i L^r x^-(i+1)
        out[:, 1:] -= c[:, :-1] * i
        if c.shape[0] > 1:
            r = np.arange(1, c.shape[0])[:, None]
            out[:-1, 1:] += c[1:, :-1] * r
        return LogPowerSeries(out, self.order)._trim()

    def antiderivative(self):
        """Antiderivative without constant term.

        Raises ``ValueError`` when an ``x**0`` term is present, since its
        integral grows like ``x``.
        """
        c = self.coef
        if np.any(c[:, 0] != 0):
            raise ValueError("antiderivative of a non-decaying series is not representable")
        rmax = c.shape[0]
        out = np.zeros((rmax + 1, self.order + 1), dtype=np.result_type(c, float))
        for r in range(rmax):
            # i == 1: L^r / x -> L^(r+1) / (r+1)
            out[r + 1, 0] += c[r, 1] / (r + 1)
            for i in range(2, self.order + 1):
                v = c[r, i]
                if v == 0:
                    continue
                k = 1.0 - i
                fall = 1.0
                for t in range(r + 1):
                    out[r - t, i - 1] += v * (-1) ** t * fall / k ** (t + 1)
                    fall *= r - t
        return LogPowerSeries(out, self.order)._trim()

    def __call__(self, x):
        lx = math.log(x)
        inv = 1.0 / x
        ipow = inv ** np.arange(self.order + 1)
        lpow = lx ** np.arange(self.coef.shape[0])
        return lpow @ self.coef @ ipow

    def term_magnitudes(self, x):
        """Absolute contribution of each power ``x**-i`` at ``x``."""
        lpow = abs(math.log(x)) ** np.arange(self.coef.shape[0])
        return (lpow @ np.abs(self.coef)) * (1.0 / x) ** np.arange(self.order + 1)

    def euler_maclaurin(self):
        """Series ``S`` with ``sum_{m<=n} g(m) = C + S(n)`` for this ``g``.

        ``S`` is the antiderivative plus ``g/2`` plus the Bernoulli
        corrections ``B_2k/(2k)! g^(2k-1)`` that survive truncation.
        """
        total = self.antiderivative() + self * 0.5
        coeffs = _bernoulli_over_factorial(self.order // 2 + 2)
        d = self.derivative()
        for c in coeffs:
            if d.min_order() > self.order:
                break
            total = total + d * c
            d = d.derivative().derivative()
        return total


def shifted_inverse_power(shift, power, order):
    """Expansion of ``(x - shift)**(-power)`` in ``1/x``."""
    coef = np.zeros((1, order + 1), dtype=np.result_type(shift, float))
    if power == 0:
        coef[0, 0] = 1.0
        return LogPowerSeries(coef, order)
    term = 1.0
    for l in range(0, order + 1 - power):
        coef[0, power + l] = term
        term = term * shift * (power + l) / (l + 1)
    return LogPowerSeries(coef, order)


def power_factor_series(power, shift, lam, lam_count, order):
    """Expansion of ``(x - shift)**(-power) * (x - lam)**(-lam_count)``."""
    s = shifted_inverse_power(shift, power, order)
    if lam_count:
        s = s * shifted_inverse_power(lam, lam_count, order)
    return s
