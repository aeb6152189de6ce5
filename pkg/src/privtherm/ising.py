"""Infinite transverse-field Ising chain H = -sum_j (Z_j Z_{j+1} + g X_j).

Free-fermion closed forms for <X_0>, <X_0 X_x>_c, the autocorrelator
<X_0(t) X_0>_c and the lowest-order Holevo curvature of the environment.

Normalization of the double integral: expanding the squared momentum
integrals of the autocorrelator into exponentials gives

    d2_chiE = 1/(4 pi^2) int_0^pi dphi int_0^pi dphi' [
        B(b(L+L')) (1 - CC') (1 + D)(1 + D')
      + B(-b(L+L')) (1 - CC') (1 - D)(1 - D')
      + 2 B(b(L-L')) (1 + CC') (1 + D)(1 - D') ]

with L = Lambda(phi), primes at phi', b = beta and B(x) = x / (e^x - 1).
The prefactor 1/(4 pi^2) makes the beta = 0 value exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._numerics import bose_kernel, gauss_legendre_panels
from .errors import QuadratureError, ValidationError
from .private_info import VERDICT_TOL, KeyRateReport, _verdict

KERNEL_PREFACTOR = 1.0 / (4.0 * np.pi**2)


@dataclass(frozen=True)
class IsingParams:
    g: float
    beta: float

    def __post_init__(self):
        if not self.g > 0:
            raise ValidationError(f"g must be positive, got {self.g}")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise ValidationError(f"beta must be finite and >= 0, got {self.beta}")


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite Gauss-Legendre settings.

    ``nodes_1d`` nodes in total for momentum integrals (order-16 panels),
    ``panels_2d`` panels per axis for the double integral, and at least
    ``min_panels_per_oscillation`` panels per period of cos(x phi).
    Every result is recomputed with doubled panels; a change above
    ``rtol`` * |value| + ``atol`` raises QuadratureError.
    """

    nodes_1d: int = 2048
    panels_2d: int = 40
    min_panels_per_oscillation: int = 8
    order_1d: int = 16
    order_2d: int = 12
    rtol: float = 1e-8
    atol: float = 1e-15
    check: bool = True

    def __post_init__(self):
        for name in ("nodes_1d", "panels_2d", "min_panels_per_oscillation", "order_1d", "order_2d"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")

    def doubled(self) -> "QuadratureConfig":
        return replace(self, nodes_1d=2 * self.nodes_1d, panels_2d=2 * self.panels_2d,
                       min_panels_per_oscillation=2 * self.min_panels_per_oscillation)


def dispersion(phi, g):
    """Lambda(phi) = 2 sqrt((cos phi - g)^2 + sin^2 phi)."""
    phi = np.asarray(phi, dtype=float)
    return 2.0 * np.sqrt((np.cos(phi) - g) ** 2 + np.sin(phi) ** 2)


def bogoliubov(phi, g):
    """(C, S) = (cos 2 lambda, sin 2 lambda) = (2 (cos phi - g), 2 sin phi) / Lambda.

    At the gapless point (g = 1, phi = 0) both are set to 0; quadrature
    nodes never land there.
    """
    phi = np.asarray(phi, dtype=float)
    lam = dispersion(phi, g)
    safe = np.where(lam > 0, lam, 1.0)
    c = np.where(lam > 0, 2.0 * (np.cos(phi) - g) / safe, 0.0)
    s = np.where(lam > 0, 2.0 * np.sin(phi) / safe, 0.0)
    return c, s


def _occupation_factors(lam, beta):
    """(1 + D, 1 - D) with D = tanh(beta Lambda / 2), both without cancellation."""
    e = np.exp(-beta * lam)
    return 2.0 / (1.0 + e), 2.0 * e / (1.0 + e)


def _breaks(panels: int, beta: float, g: float) -> np.ndarray:
    """Uniform panels on [0, pi] with geometric grading toward phi = 0.

    Grading resolves the 1/beta scale of tanh(beta Lambda / 2) near the
    gap minimum at low temperature.
    """
    uniform = np.linspace(0.0, np.pi, panels + 1)
    if beta <= 0:
        return uniform
    scale = 0.05 / beta
    first = uniform[1]
    extra = []
    p = first / 2.0
    while p > scale:
        extra.append(p)
        p /= 2.0
    return np.unique(np.concatenate([uniform, extra]))


def _nodes_1d(cfg: QuadratureConfig, beta: float, g: float, x_max: int = 0):
    panels = max(cfg.nodes_1d // cfg.order_1d, 1)
    # cos(x phi) completes x/2 periods on [0, pi]
    panels = max(panels, int(np.ceil(cfg.min_panels_per_oscillation * x_max / 2.0)))
    return gauss_legendre_panels(_breaks(panels, beta, g), cfg.order_1d)


def _checked(compute, cfg: QuadratureConfig, what: str):
    value = compute(cfg)
    if not cfg.check:
        return value
    fine_cfg = cfg.doubled()
    fine = compute(fine_cfg)
    v, f = np.asarray(value), np.asarray(fine)
    err = np.abs(f - v)
    bound = cfg.rtol * np.abs(f) + cfg.atol
    if np.any(err > bound):
        raise QuadratureError(f"{what}: doubling the nodes changed the result by "
                              f"{float(np.max(err)):.3g}", nodes=_node_count(fine_cfg))
    return fine


def _node_count(cfg: QuadratureConfig) -> int:
    return cfg.nodes_1d


def _x_mean(params: IsingParams, cfg: QuadratureConfig) -> float:
    phi, w = _nodes_1d(cfg, params.beta, params.g)
    c, _ = bogoliubov(phi, params.g)
    d = np.tanh(params.beta * dispersion(phi, params.g) / 2.0)
    return float(-np.dot(w, c * d) / np.pi)


def x_mean(params: IsingParams, quad: QuadratureConfig | None = None) -> float:
    """<X_0>_beta = -(1/pi) int_0^pi C D dphi (positive, along the field)."""
    quad = quad or QuadratureConfig()
    return float(_checked(lambda c: _x_mean(params, c), quad, "x_mean"))


def _fourier_pair(params: IsingParams, xs: np.ndarray, cfg: QuadratureConfig) -> np.ndarray:
    """Rows (a_x, b_x): (1/pi) int cos(x phi) C D and (1/pi) int sin(x phi) S D."""
    phi, w = _nodes_1d(cfg, params.beta, params.g, int(np.max(xs)))
    c, s = bogoliubov(phi, params.g)
    d = np.tanh(params.beta * dispersion(phi, params.g) / 2.0)
    arg = np.outer(xs, phi)
    a = np.cos(arg) @ (w * c * d) / np.pi
    b = np.sin(arg) @ (w * s * d) / np.pi
    return np.stack([a, b])


def xx_correlators(params: IsingParams, xs, quad: QuadratureConfig | None = None) -> np.ndarray:
    """<X_0 X_x>_c = b_x^2 - a_x^2 for each x >= 1."""
    quad = quad or QuadratureConfig()
    xs = np.atleast_1d(np.asarray(xs, dtype=int))
    if np.any(xs < 1):
        raise ValidationError("separations must be >= 1")
    ab = _checked(lambda c: _fourier_pair(params, xs, c), quad, "xx_correlator")
    return ab[1] ** 2 - ab[0] ** 2


def xx_correlator(params: IsingParams, x: int, quad: QuadratureConfig | None = None) -> float:
    return float(xx_correlators(params, [x], quad)[0])


def _time_pair(params: IsingParams, ts: np.ndarray, cfg: QuadratureConfig) -> np.ndarray:
    phi, w = _nodes_1d(cfg, params.beta, params.g)
    lam = dispersion(phi, params.g)
    c, _ = bogoliubov(phi, params.g)
    d = np.tanh(params.beta * lam / 2.0)
    arg = np.outer(ts, lam)
    cos_t, sin_t = np.cos(arg), np.sin(arg)
    i1 = (cos_t @ w - 1j * (sin_t @ (w * d))) / np.pi
    i2 = (1j * (sin_t @ (w * c)) - cos_t @ (w * c * d)) / np.pi
    return np.stack([i1, i2])


def time_autocorrelators(params: IsingParams, ts, quad: QuadratureConfig | None = None) -> np.ndarray:
    """<X_0(t) X_0>_c = I1(t)^2 - I2(t)^2 with

    I1 = int dphi/pi [cos Lt - i sin Lt D],  I2 = int dphi/pi C [i sin Lt - cos Lt D].
    """
    quad = quad or QuadratureConfig()
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if not np.all(np.isfinite(ts)):
        raise ValidationError("times must be finite")
    # Lambda t oscillations need panels like a Fourier integral of order max|t| Lambda_max / 2
    lam_max = 2.0 * (1.0 + params.g)
    x_equiv = int(np.ceil(np.max(np.abs(ts)) * lam_max / 2.0)) if ts.size else 0

    def compute(cfg):
        extra = max(cfg.nodes_1d, int(np.ceil(cfg.min_panels_per_oscillation * x_equiv / 2.0)) * cfg.order_1d)
        return _time_pair(params, ts, replace(cfg, nodes_1d=extra))

    pair = _checked(compute, quad, "time_autocorrelator")
    return pair[0] ** 2 - pair[1] ** 2


def time_autocorrelator(params: IsingParams, t: float, quad: QuadratureConfig | None = None) -> complex:
    return complex(time_autocorrelators(params, [t], quad)[0])


def _d2_chiE(params: IsingParams, cfg: QuadratureConfig) -> float:
    beta, g = params.beta, params.g
    phi, w = gauss_legendre_panels(_breaks(cfg.panels_2d, beta, g), cfg.order_2d)
    lam = dispersion(phi, g)
    c, _ = bogoliubov(phi, g)
    plus, minus = _occupation_factors(lam, beta)
    total = 0.0
    chunk = max(1, 4_000_000 // phi.size)
    for start in range(0, phi.size, chunk):
        sl = slice(start, start + chunk)
        l1, c1, p1, m1, w1 = lam[sl, None], c[sl, None], plus[sl, None], minus[sl, None], w[sl, None]
        s = l1 + lam[None, :]
        cc = c1 * c[None, :]
        kern = (bose_kernel(beta * s) * (1.0 - cc) * p1 * plus[None, :]
                + bose_kernel(-beta * s) * (1.0 - cc) * m1 * minus[None, :]
                + 2.0 * bose_kernel(beta * (l1 - lam[None, :])) * (1.0 + cc) * p1 * minus[None, :])
        total += float(np.sum(w1 * kern * w[None, :]))
    return KERNEL_PREFACTOR * total


def d2_chiE_ising(params: IsingParams, quad: QuadratureConfig | None = None) -> float:
    """Lowest-order Holevo curvature of the environment for O_A = X_0, in nats."""
    quad = quad or QuadratureConfig()
    return float(_checked(lambda c: _d2_chiE(params, c), quad, "d2_chiE_ising"))


def d2_Iab_ising(params: IsingParams, xs, quad: QuadratureConfig | None = None) -> np.ndarray:
    """<X_0 X_x>_c^2 / (1 - <X_0>^2) for each x."""
    corr = xx_correlators(params, xs, quad)
    m = x_mean(params, quad)
    return corr**2 / (1.0 - m * m)


def key_length_ising(params: IsingParams, x_max: int, quad: QuadratureConfig | None = None,
                     tol: float = VERDICT_TOL) -> KeyRateReport:
    """Exhaustive scan x = 1..x_max; x_K is the largest x with d2_K > tol."""
    if x_max < 1:
        raise ValidationError("x_max must be >= 1")
    chi = d2_chiE_ising(params, quad)
    xs = np.arange(1, x_max + 1)
    iab = d2_Iab_ising(params, xs, quad)
    rows = tuple((int(x), float(i), float(i - chi)) for x, i in zip(xs, iab))
    x_k = 0
    for x, _, k in rows:
        if k > tol:
            x_k = x
    best = max(rows, key=lambda r: r[2])
    flags = ("x_K >= x_max (censored)",) if x_k == x_max else ()
    return KeyRateReport(chi, best[1], best[2], _verdict(best[2], tol), best[2] - tol,
                         x_K=x_k, flags=flags, scan=rows)
