"""Standard raising/lowering relations, written out independently of the presets.

Each entry gives ``(coefficient of d/dx, additive term, scalar)`` for
``[c(x) d + a(x)] psi_n = s psi_{n+1}`` (raise) and
``[c(x) d + a(x)] psi_{n+1} = s psi_n`` (lower).
"""


def raising(kind, n, x, alpha=0.0, beta=0.0, lam=0.0):
    if kind == "hermite":
        return 1.0, -2.0 * x, -1.0
    if kind == "laguerre":
        return x, alpha + n + 1 - x, n + 1.0
    if kind == "legendre":
        return x * x - 1, (n + 1) * x, n + 1.0
    if kind == "chebyshev":
        return 1 - x * x, -n * x, -float(n)
    if kind == "jacobi_function":
        v = 2 * n + alpha + 1
        return x * (1 - x), -(n + alpha) * (x - (n + lam) / v), (n + alpha) * (n + lam) / v
    if kind == "jacobi_polynomial":
        q = 2 * n + 2 + alpha + beta
        return 1 - x * x, (n + 1 + alpha + beta) * (-x + (beta - alpha) / q), -2 * (n + 1) * (n + 1 + alpha + beta) / q
    if kind == "bessel":
        return 1.0, -n / x, -1.0
    raise KeyError(kind)


def lowering(kind, n, x, alpha=0.0, beta=0.0, lam=0.0):
    if kind == "hermite":
        return 1.0, 0.0 * x, 2.0 * (n + 1)
    if kind == "laguerre":
        return x, -(n + 1.0) + 0 * x, -(alpha + n + 1)
    if kind == "legendre":
        return x * x - 1, -(n + 1) * x, -(n + 1.0)
    if kind == "chebyshev":
        return 1 - x * x, (n + 1) * x, n + 1.0
    if kind == "jacobi_function":
        v = 2 * n + alpha + 1
        return x * (1 - x), (n + 1) * (x - (n + 1 + alpha - lam) / v), -(n + 1) * (n + 1 + alpha - lam) / v
    if kind == "jacobi_polynomial":
        q = 2 * n + 2 + alpha + beta
        return 1 - x * x, (n + 1) * (x + (beta - alpha) / q), 2 * (n + 1 + alpha) * (n + 1 + beta) / q
    if kind == "bessel":
        return 1.0, (n + 1) / x, 1.0
    raise KeyError(kind)


def ladder_residuals(family, n, x, vals, d1):
    """Relative residuals of both relations given psi_n, psi_{n+1} and derivatives."""
    import numpy as np

    p = dict(alpha=family.alpha, beta=family.beta, lam=family.lam)
    out = []
    for rel, lo, hi in ((raising, n, n + 1), (lowering, n + 1, n)):
        c, a, s = rel(family.kind, n, x, **p)
        terms = [c * d1[lo], a * vals[lo], s * vals[hi]]
        res = terms[0] + terms[1] - terms[2]
        scale = max(float(np.max(np.abs(t))) for t in terms)
        a = float(np.max(np.abs(res)))
        out.append(a / scale if scale > 0 else a)  # all-zero terms: the relation reads 0 = 0
    return out
