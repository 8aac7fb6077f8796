"""Pure numpy fallback for the compiled recurrence kernels in ``_kernels.pyx``.

Both implementations share one contract:

``three_term(x, A, B, C)``
    Runs ``p[k+1] = (A[k] x + B[k]) p[k] - C[k] p[k-1]`` from ``p[0] = 1``,
    ``p[-1] = 0`` together with the differentiated recurrences, returning
    ``(values, d1, d2)`` each of shape ``(len(A) + 1, len(x))``.

``bessel_j_seq(x, nmax)``
    Returns ``J_k(x)`` for ``k = 0..nmax`` as an array of shape
    ``(nmax + 1, len(x))``; requires ``x > 0``.
"""

import math

import numpy as np

_RESCALE = 1e250
# below this the ascending series is cancellation-free for every order
SERIES_CUTOFF = 2.0


def three_term(x, A, B, C):
    x = np.ascontiguousarray(x, dtype=float)
    nmax = len(A)
    vals = np.empty((nmax + 1, x.size))
    d1 = np.empty_like(vals)
    d2 = np.empty_like(vals)
    vals[0] = 1.0
    d1[0] = 0.0
    d2[0] = 0.0
    pm = np.zeros_like(x)
    dpm = np.zeros_like(x)
    ddpm = np.zeros_like(x)
    for k in range(nmax):
        lin = A[k] * x + B[k]
        vals[k + 1] = lin * vals[k] - C[k] * pm
        d1[k + 1] = A[k] * vals[k] + lin * d1[k] - C[k] * dpm
        d2[k + 1] = 2.0 * A[k] * d1[k] + lin * d2[k] - C[k] * ddpm
        pm, dpm, ddpm = vals[k], d1[k], d2[k]
    return vals, d1, d2


def miller_start(x: float, nmax: int) -> int:
    """Even starting order for the backward recurrence at abscissa ``x``."""
    m = max(nmax, int(x)) + 20 + int(math.sqrt(40.0 * max(nmax, x, 1.0)))
    return m + (m % 2)


def _series(x: float, k: int) -> float:
    """Ascending series for J_k(x)."""
    h = 0.5 * x
    term = 1.0
    for j in range(1, k + 1):
        term *= h / j
    total = term
    h2 = h * h
    j = 0
    while True:
        j += 1
        term *= -h2 / (j * (j + k))
        total += term
        if abs(term) <= 1e-17 * abs(total) or j > 500:
            return total


def _miller(x: float, nmax: int, out: np.ndarray) -> None:
    m = miller_start(x, nmax)
    jp = 0.0
    j = 1e-30
    norm = 0.0
    for k in range(m, 0, -1):
        # j holds J_k (unnormalised), jp holds J_{k+1}
        if k <= nmax:
            out[k] = j
        if k % 2 == 0:
            norm += 2.0 * j
        jm = (2.0 * k / x) * j - jp
        jp, j = j, jm
        if abs(j) > _RESCALE:
            j /= _RESCALE
            jp /= _RESCALE
            norm /= _RESCALE
            out[: nmax + 1] /= _RESCALE
    out[0] = j
    norm += j
    out[: nmax + 1] /= norm


def bessel_j_seq(x, nmax: int):
    x = np.ascontiguousarray(x, dtype=float)
    out = np.empty((nmax + 1, x.size))
    col = np.empty(nmax + 1)
    for i, xi in enumerate(x):
        if xi >= SERIES_CUTOFF:
            _miller(xi, nmax, col)
            out[:, i] = col
        else:
            for k in range(nmax + 1):
                out[k, i] = _series(xi, k)
    return out
