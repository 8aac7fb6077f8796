"""Truncated Taylor arithmetic ("jets") used to propagate derivatives analytically.

A :class:`Jet` of order ``k`` stores the Taylor coefficients
``c[j] = f^(j)(x) / j!`` for ``j = 0..k``; each coefficient may be a scalar or a
numpy array (one entry per abscissa). The family coefficient functions are
written with plain arithmetic, so they accept jets and arrays alike.
"""

from __future__ import annotations

import math

import numpy as np


class Jet:
    __slots__ = ("c",)
    __array_priority__ = 1000  # make ndarray <op> Jet defer to Jet

    def __init__(self, coeffs):
        self.c = [np.asarray(ci, dtype=float) for ci in coeffs]

    @classmethod
    def variable(cls, x, order: int) -> "Jet":
        x = np.asarray(x, dtype=float)
        coeffs = [x]
        if order >= 1:
            coeffs.append(np.ones_like(x))
        coeffs.extend(np.zeros_like(x) for _ in range(order - 1))
        return cls(coeffs)

    @classmethod
    def from_derivs(cls, derivs) -> "Jet":
        return cls([d / math.factorial(j) for j, d in enumerate(derivs)])

    @property
    def order(self) -> int:
        return len(self.c) - 1

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    def derivs(self) -> list[np.ndarray]:
        return [cj * math.factorial(j) for j, cj in enumerate(self.c)]

    def deriv(self) -> "Jet":
        """d/dx, lowering the order by one."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        return Jet([(j + 1) * self.c[j + 1] for j in range(self.order)])

    def truncate(self, order: int) -> "Jet":
        return Jet(self.c[: order + 1])

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            k = min(self.order, other.order)
            return self.c[: k + 1], other.c[: k + 1]
        other = np.asarray(other, dtype=float)
        zero = np.zeros_like(other)
        return self.c, [other] + [zero] * self.order

    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return Jet([x - y for x, y in zip(a, b)])

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return Jet([y - x for x, y in zip(a, b)])

    def __neg__(self):
        return Jet([-x for x in self.c])

    def __mul__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            return Jet([x * other for x in self.c])
        a, b = self._coerce(other)
        return Jet([sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(len(a))])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            return Jet([x / other for x in self.c])
        a, b = self._coerce(other)
        return _divide(a, b)

    def __rtruediv__(self, other):
        b, a = self._coerce(other)
        return _divide(a, b)

    def __pow__(self, p: int):
        if not isinstance(p, (int, np.integer)) or p < 0:
            raise TypeError("jets support non-negative integer powers only")
        out = Jet([np.ones_like(self.c[0])] + [np.zeros_like(self.c[0])] * self.order)
        for _ in range(p):
            out = out * self
        return out

    def __repr__(self):
        return f"Jet(order={self.order}, c0={self.c[0]!r})"


def _divide(a, b) -> Jet:
    out = []
    for k in range(len(a)):
        acc = a[k] - sum(b[j] * out[k - j] for j in range(1, k + 1))
        out.append(acc / b[0])
    return Jet(out)


def integrate_riccati(b0, x, rhs, order: int) -> Jet:
    """Taylor coefficients of the solution of ``b' = rhs(x, b)`` through ``b(x) = b0``.

    ``rhs`` must be built from jet-compatible arithmetic. Each pass fixes one
    more coefficient, so ``order`` passes suffice.
    """
    xj = Jet.variable(x, order)
    b = Jet([b0])
    for k in range(order):
        f = rhs(xj.truncate(k), b)
        b = Jet(b.c + [f.c[k] / (k + 1)])
    return b


def extend_ode2(derivs, x, p, q, r, order: int) -> Jet:
    """Extend a jet of a solution of ``p y'' + q y' + r y = 0`` to ``order``.

    ``derivs`` holds the known derivatives ``[y, y', ...]`` (at least two);
    missing higher coefficients are generated from the ODE.
    """
    y = Jet.from_derivs(derivs[: order + 1])
    xj = Jet.variable(x, order)
    while y.order < order:
        k = y.order - 1  # next known coefficient of y'' is index k
        yk = y
        rhs = -(q(xj.truncate(k)) * yk.deriv().truncate(k) + r(xj.truncate(k)) * yk.truncate(k)) / p(
            xj.truncate(k)
        )
        y = Jet(y.c + [rhs.c[k] / ((k + 1) * (k + 2))])
    return y
