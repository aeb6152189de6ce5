"""Small numerical kernels with removable singularities handled explicitly."""

from __future__ import annotations

import math

import numpy as np

CLAMP_RELATIVE = 1e-14
SERIES_CUTOFF = 1e-4


def bose_kernel(x):
    """B(x) = x / (e^x - 1), with B(0) = 1.

    Uses the 4th-order series for |x| < 1e-4 and an overflow-free form for
    large positive x.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < SERIES_CUTOFF
    pos = (x >= SERIES_CUTOFF)
    neg = (x <= -SERIES_CUTOFF)
    xs = x[small]
    out[small] = 1.0 - xs / 2.0 + xs**2 / 12.0 - xs**4 / 720.0
    xp = x[pos]
    out[pos] = xp * np.exp(-xp) / (-np.expm1(-xp))
    xn = x[neg]
    out[neg] = xn / np.expm1(xn)
    return out if out.ndim else float(out)


def qfi_kernel(x):
    """e^{-x} f(x) / b(x)^2 = (e^x - 1)^2 / (e^x (e^x + 1)); zero at x = 0.

    expm1 keeps the quadratic zero accurate without a series branch. The
    kernel grows like e^{|x|} for negative x, so callers multiplying by
    exponentially small weights should use ``log_qfi_kernel``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    xp = x[pos]
    out[pos] = np.expm1(-xp) ** 2 / (1.0 + np.exp(-xp))
    xn = x[~pos]
    with np.errstate(over="ignore"):
        out[~pos] = np.expm1(xn) ** 2 / (np.exp(xn) * (np.exp(xn) + 1.0))
    return out if out.ndim else float(out)


def log_qfi_kernel(x):
    """Natural log of ``qfi_kernel``; -inf at x = 0."""
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    with np.errstate(divide="ignore"):
        base = 2.0 * np.log(-np.expm1(-a)) - np.log1p(np.exp(-a))
    return np.where(x < 0, base + a, base)


def log1p_minus_x(d: float) -> float:
    """log1p(d) - d, accurate for small |d| where the difference is O(d^2)."""
    if abs(d) >= 0.1:
        return math.log1p(d) - d
    # sum_{n>=2} (-1)^(n+1) d^n / n
    total = 0.0
    power = d
    for n in range(2, 24):
        power *= d
        total += (-1) ** (n + 1) * power / n
    return total


def log_mean_factor(r):
    """ln(r) / (r - 1) for r in [0, 1], equal to 1 at r = 1 and +inf at r = 0.

    For r close to 1 the ratio is evaluated through log1p with a series
    fallback, so the result stays accurate when r - 1 is dominated by
    rounding.
    """
    r = np.asarray(r, dtype=float)
    t = r - 1.0
    out = np.empty_like(r)
    tiny = np.abs(t) < 1e-8
    out[tiny] = 1.0 - t[tiny] / 2.0 + t[tiny] ** 2 / 3.0
    mid = ~tiny & (r >= 0.5)
    out[mid] = np.log1p(t[mid]) / t[mid]
    far = ~tiny & ~mid
    with np.errstate(divide="ignore"):
        out[far] = np.log(r[far]) / t[far]
    return out


def log_kernel(lam_j, lam_k):
    """lam_j lam_k (ln lam_k - ln lam_j) / (lam_k - lam_j), elementwise.

    The degenerate limit is lam_j; a zero weight gives zero.
    """
    big = np.maximum(lam_j, lam_k)
    small = np.minimum(lam_j, lam_k)
    out = np.zeros(np.broadcast(big, small).shape)
    ok = small > 0
    out[ok] = small[ok] * log_mean_factor(small[ok] / big[ok])
    return out


def log_divided_difference(y_j, y_k):
    """(ln y_j - ln y_k) / (y_j - y_k) for strictly positive arguments."""
    big = np.maximum(y_j, y_k)
    small = np.minimum(y_j, y_k)
    return log_mean_factor(small / big) / big


def xlogx_sum(values) -> float:
    """Sum of v ln v over entries, with entries <= 0 contributing zero."""
    v = np.asarray(values, dtype=float)
    v = v[v > 0]
    return float(np.sum(v * np.log(v)))


def clamp_weights(weights):
    w = np.asarray(weights, dtype=float).copy()
    if w.size == 0:
        return w
    cutoff = CLAMP_RELATIVE * max(float(w.max()), 0.0)
    w[w < cutoff] = 0.0
    return w


def gauss_legendre_panels(breaks, order: int):
    """Composite Gauss-Legendre nodes and weights on consecutive breakpoints."""
    x, w = np.polynomial.legendre.leggauss(order)
    breaks = np.asarray(breaks, dtype=float)
    a = breaks[:-1, None]
    b = breaks[1:, None]
    half = (b - a) / 2.0
    nodes = (a + b) / 2.0 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()
