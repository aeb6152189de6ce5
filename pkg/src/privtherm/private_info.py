"""Holevo quantities, mutual information and the lowest-order key rate.

All information quantities are in nats. The measurement on A is the weak
two-outcome POVM M_a = (1 + (-1)^a mu O_A) / 2; B measures
(1 + (-1)^b O_B / ||O_B||) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._numerics import (bose_kernel, clamp_weights, log1p_minus_x, log_divided_difference,
                        log_kernel, xlogx_sum)
from .errors import NumericalError, ValidationError
from .operators import Operator, identity, partial_trace
from .thermal import (ThermalState, connected_correlator, expectation, reduced_density,
                      sector_mixture_state, spectral_function)

ENTANGLED = "entangled-across-separating-bipartitions"
INCONCLUSIVE = "inconclusive"
EXACT_ZERO = "exact-zero"
NOT_APPLICABLE = "not-applicable"
VERDICT_TOL = 1e-9
PROBABILITY_FLOOR = 1e-15
# below this value of mu ||O|| the second difference of Tr X ln X is
# evaluated through its integral remainder instead of two eigendecompositions
INTEGRAL_ROUTE_MAX = 0.25


@dataclass(frozen=True, eq=False)
class WeakPovm:
    observable: Operator
    mu: float
    elements: tuple = field(init=False, repr=False)

    def __post_init__(self):
        norm = self.observable.spectral_norm()
        if abs(self.mu) * norm > 1.0 + 1e-12:
            raise ValidationError(
                f"mu * ||O_A|| = {abs(self.mu) * norm:.6g} > 1: POVM elements not positive")
        one = identity(self.observable.n_sites)
        m0 = 0.5 * (one + self.mu * self.observable)
        m1 = 0.5 * (one - self.mu * self.observable)
        object.__setattr__(self, "elements", (m0, m1))

    @property
    def strength(self) -> float:
        """mu ||O_A||, the quantity that must not exceed 1."""
        return abs(self.mu) * self.observable.spectral_norm()


@dataclass(frozen=True)
class KeyRateReport:
    d2_chiE: float
    d2_Iab: float
    d2_K: float
    verdict: str
    margin: float
    x_K: int | None = None
    beta_p: float | None = None
    scale_b: float = 1.0
    flags: tuple = ()
    scan: tuple = ()


def _verdict(d2_K: float, tol: float) -> str:
    return ENTANGLED if d2_K > tol else INCONCLUSIVE


def _xlogx_matrix_sum(y: np.ndarray) -> float:
    return xlogx_sum(clamp_weights(np.clip(y, 0.0, None)))


def _hessian_xlogx(y_mat: np.ndarray, h: np.ndarray) -> float:
    """Second directional derivative of Tr Y ln Y at Y along h."""
    y, u = np.linalg.eigh(y_mat)
    y = np.maximum(y, 1e-300)
    ht = u.conj().T @ h @ u
    psi = log_divided_difference(y[:, None], y[None, :])
    return float(np.sum(np.abs(ht) ** 2 * psi))


def _gl_order(strength: float) -> int:
    """Gauss-Legendre order for an integrand analytic on |s| < 1/strength."""
    if strength <= 0:
        return 1
    r = 1.0 / strength
    rho = r + math.sqrt(r * r - 1.0)
    return int(min(32, max(2, math.ceil(18 * math.log(10) / (2 * math.log(rho))))))


def second_difference(lam: np.ndarray, h: np.ndarray, strength: float,
                      route: str = "auto") -> float:
    """F(L + h) + F(L - h) - 2 F(L) for F(X) = Tr X ln X and L = diag(lam) > 0.

    ``strength`` bounds ||L^{-1/2} h L^{-1/2}||. The integral route writes
    the second difference as int_0^1 (1 - s)[F''(L + s h) + F''(L - s h)][h, h] ds,
    a sum of positive terms free of cancellation; the direct route uses
    two eigendecompositions and loses relative accuracy for small h.
    """
    if route == "auto":
        route = "integral" if strength <= INTEGRAL_ROUTE_MAX else "direct"
    if not np.any(h):
        return 0.0
    base = np.diag(lam)
    if route == "direct":
        return (_xlogx_matrix_sum(np.linalg.eigvalsh(base + h))
                + _xlogx_matrix_sum(np.linalg.eigvalsh(base - h)) - 2.0 * xlogx_sum(lam))
    if route != "integral":
        raise ValidationError(f"unknown route {route!r}")
    if strength >= 1.0:
        raise ValidationError("integral route needs strength < 1")
    x, w = np.polynomial.legendre.leggauss(_gl_order(strength))
    s = (x + 1.0) / 2.0
    w = w / 2.0
    total = 0.0
    for si, wi in zip(s, w):
        total += wi * (1.0 - si) * (_hessian_xlogx(base + si * h, h)
                                    + _hessian_xlogx(base - si * h, h))
    return total


def _binary_entropy_excess(x: float) -> float:
    """((1+x) ln(1+x) + (1-x) ln(1-x)) / 2 without cancellation."""
    return 0.5 * (math.log1p(-x * x) + 2.0 * x * math.atanh(x))


def _check_branches(x: float, what: str):
    if 0.5 * (1.0 - abs(x)) < PROBABILITY_FLOOR:
        raise ValidationError(f"{what}: outcome probability below {PROBABILITY_FLOOR:g} (degenerate branch)")


def chi_E_exact(state: ThermalState, povm: WeakPovm, route: str = "auto") -> float:
    """Holevo quantity of the purifying environment.

    rho_{E,a} is isospectral with sqrt(rho) M_a sqrt(rho) / p_a, which in the
    eigenbasis of rho equals (L +- mu W) / (2 p_a) with W = sqrt(L) O sqrt(L).
    """
    idx = state.support()
    lam = state.weights[idx]
    ot = state.in_eigenbasis(povm.observable)[np.ix_(idx, idx)]
    x = povm.mu * float(np.real(np.dot(lam, np.diag(ot))))
    _check_branches(x, "chi_E")
    sq = np.sqrt(lam)
    h = povm.mu * (sq[:, None] * ot * sq[None, :])
    delta = second_difference(lam, h, povm.strength, route)
    return max(0.5 * delta - _binary_entropy_excess(x), 0.0)


def chi_B_exact(state: ThermalState, povm: WeakPovm, region_b) -> float:
    """S(rho_B) - sum_a p_a S(rho_{B,a}) with rho_{B,a} = Tr_{not B}(M_a rho) / p_a."""
    region_b = sorted(set(region_b))
    if set(region_b) & set(povm.observable.support):
        raise ValidationError("region B overlaps the support of O_A")
    rho_b = reduced_density(state, region_b)
    o_rho = povm.observable.apply(state.density_matrix())
    sigma = partial_trace(o_rho, region_b, state.n_sites).matrix
    sigma = (sigma + sigma.conj().T) / 2
    x = povm.mu * float(np.real(np.trace(sigma)))
    _check_branches(x, "chi_B")
    lb, ub = np.linalg.eigh((rho_b + rho_b.conj().T) / 2)
    lb = clamp_weights(np.clip(lb, 0.0, None))
    keep = lb > 0
    h = povm.mu * (ub.conj().T @ sigma @ ub)[np.ix_(keep, keep)]
    delta = second_difference(lb[keep], h, povm.strength)
    return max(0.5 * delta - _binary_entropy_excess(x), 0.0)


def _check_disjoint(op_a: Operator, op_b: Operator):
    if op_a.support & op_b.support:
        raise ValidationError(
            f"supports of {op_a.label!r} and {op_b.label!r} overlap: {sorted(op_a.support & op_b.support)}")


def _b_moments(state: ThermalState, op_a: Operator, op_b: Operator):
    _check_disjoint(op_a, op_b)
    scale = op_b.spectral_norm()
    if scale == 0:
        raise ValidationError("O_B is zero")
    mean_a = expectation(state, op_a)
    mean_b = expectation(state, op_b) / scale
    corr = connected_correlator(state, op_a, op_b) / scale
    return scale, mean_a, mean_b, corr


def mutual_information_ab(state: ThermalState, op_a: Operator, op_b: Operator, mu: float) -> float:
    """Classical mutual information of the outcomes (a, b), in nats.

    Written as sum p (log1p(d) - d) + (p - q)^2 / q with q = p_a p_b and
    d = (p - q) / q, so the O(mu^2) result carries no cancellation.
    """
    scale, mean_a, mean_b, corr = _b_moments(state, op_a, op_b)
    if abs(mu) * op_a.spectral_norm() > 1.0 + 1e-12:
        raise ValidationError("mu * ||O_A|| > 1")
    _check_branches(mu * mean_a, "I_ab (a)")
    _check_branches(mean_b, "I_ab (b)")
    total = 0.0
    for a in (1.0, -1.0):
        pa = 0.5 * (1.0 + a * mu * mean_a)
        for b in (1.0, -1.0):
            pb = 0.5 * (1.0 + b * mean_b)
            q = pa * pb
            diff = 0.25 * a * b * mu * corr
            p = q + diff
            if p < -1e-14:
                raise NumericalError(f"negative joint probability {p:.3g}")
            if p > 0:
                d = diff / q
                total += p * log1p_minus_x(d)
            total += diff * diff / q
    return max(total, 0.0)


def d2_chiE_eigensum(state: ThermalState, op_a: Operator) -> float:
    """sum_jk |O_jk|^2 lam_j lam_k (ln lam_k - ln lam_j)/(lam_k - lam_j) - <O>^2.

    Pairs with both weights below the clamp threshold are dropped. The sum
    is invariant under O -> O - c, so it is evaluated with c = <O>, which
    makes every term nonnegative and removes the subtraction.
    """
    lam = state.weights
    ot = state.in_eigenbasis(op_a)
    idx = state.support()
    mean = float(np.real(np.dot(lam, np.diag(ot).real)))
    rows = ot[idx, :].copy()
    rows[np.arange(idx.size), idx] -= mean
    amp = np.abs(rows) ** 2
    kern = log_kernel(lam[idx][:, None], lam[None, :])
    total = float(np.sum(amp * kern))
    # pairs (j outside, k inside) mirror (k inside, j outside); add them once more
    outside = np.setdiff1d(np.arange(lam.size), idx)
    if outside.size:
        total += float(np.sum(amp[:, outside] * kern[:, outside]))
    return total


def d2_chiE_spectral(state: ThermalState, op_a: Operator) -> float:
    """sum over lines of B(beta omega) w - static, with B(x) = x / (e^x - 1).

    Uses the spectral function of O - <O>, whose static term vanishes; the
    value is unchanged and no O(1) cancellation occurs at low temperature.
    """
    sf = spectral_function(state, op_a, centered=True)
    return float(np.sum(bose_kernel(sf.beta * sf.omegas) * sf.weights)) - sf.static_subtraction


def d2_Iab(state: ThermalState, op_a: Operator, op_b: Operator) -> float:
    """<O_A O_B>_c^2 / (||O_B||^2 - <O_B>^2)."""
    _check_disjoint(op_a, op_b)
    scale = op_b.spectral_norm()
    mean_b = expectation(state, op_b)
    denom = scale * scale - mean_b * mean_b
    if denom <= 1e-14 * scale * scale:
        raise ValidationError("degenerate B measurement: <O_B>^2 equals ||O_B||^2")
    c = connected_correlator(state, op_a, op_b)
    return c * c / denom


def richardson_d2(f: Callable[[float], float], mu: float) -> float:
    """Second derivative at 0 of an even function from f(mu) and f(mu/2).

    Uses e(m) = 2 f(m) / m^2 = f''(0) + O(m^2) and cancels the m^2 term.
    """
    e1 = 2.0 * f(mu) / mu**2
    e2 = 2.0 * f(mu / 2) / (mu / 2) ** 2
    return (4.0 * e2 - e1) / 3.0


def key_rate_report(state: ThermalState, op_a: Operator, op_b: Operator | None = None,
                    family: Sequence[tuple[int, Operator]] | None = None,
                    tol: float = VERDICT_TOL, d2_chiE: float | None = None) -> KeyRateReport:
    """Lowest-order key rate d2_K = d2_Iab - d2_chiE and the entanglement verdict.

    With ``family`` (pairs (x, O_B(x))) every x is evaluated and x_K is the
    largest x with d2_K > tol (0 when none is positive).
    """
    if (op_b is None) == (family is None):
        raise ValidationError("give exactly one of op_b or family")
    chi = d2_chiE_eigensum(state, op_a) if d2_chiE is None else d2_chiE
    if op_b is not None:
        iab = d2_Iab(state, op_a, op_b)
        k = iab - chi
        return KeyRateReport(chi, iab, k, _verdict(k, tol), k - tol,
                             scale_b=op_b.spectral_norm())
    rows = []
    x_k = 0
    for x, ob in sorted(family, key=lambda t: t[0]):
        iab = d2_Iab(state, op_a, ob)
        k = iab - chi
        rows.append((x, iab, k))
        if k > tol:
            x_k = x
    best = max(rows, key=lambda r: r[2])
    flags = ("x_K >= x_max (censored)",) if x_k and x_k == rows[-1][0] else ()
    return KeyRateReport(chi, best[1], best[2], _verdict(best[2], tol), best[2] - tol,
                         x_K=x_k, flags=flags, scan=tuple(rows))


def find_beta_p(make_state: Callable[[float], ThermalState], op_a: Operator, op_b: Operator,
                beta_grid: Sequence[float], tol: float = VERDICT_TOL,
                rtol: float = 1e-3) -> tuple[float | None, tuple]:
    """Smallest beta with d2_K > tol, refined by bisection to relative width rtol.

    Returns (beta_p, flags). More than one sign change on the grid adds
    "non-monotone"; the smallest crossing is still returned.
    """
    grid = sorted(float(b) for b in beta_grid)

    def d2k(beta):
        st = make_state(beta)
        return d2_Iab(st, op_a, op_b) - d2_chiE_eigensum(st, op_a)

    positive = [d2k(b) > tol for b in grid]
    flags = []
    changes = sum(1 for p, q in zip(positive, positive[1:]) if p != q)
    if changes > 1:
        flags.append("non-monotone")
    if not any(positive):
        return None, tuple(flags + ["not-found"])
    first = positive.index(True)
    if first == 0:
        return grid[0], tuple(flags + ["at-grid-start"])
    lo, hi = grid[first - 1], grid[first]
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if d2k(mid) > tol:
            hi = mid
        else:
            lo = mid
    return hi, tuple(flags)


def strong_symmetry_chiE(state: ThermalState, symmetry: Operator, op_a: Operator,
                         atol: float = 1e-10) -> str:
    """"exact-zero" when U rho = e^{i theta} rho and U O_A U^dag = -O_A, else "not-applicable"."""
    rho = state.density_matrix()
    u_rho = symmetry.apply(rho)
    overlap = np.trace(rho.conj().T @ u_rho)
    if abs(overlap) < 1e-300:
        return NOT_APPLICABLE
    phase = overlap / abs(overlap)
    if np.linalg.norm(u_rho - phase * rho) > atol:
        return NOT_APPLICABLE
    conj = (symmetry @ op_a @ symmetry.dagger()).matrix
    if np.linalg.norm(conj + op_a.matrix) > atol:
        return NOT_APPLICABLE
    return EXACT_ZERO


@dataclass(frozen=True)
class EpsilonRow:
    epsilon: float
    report: KeyRateReport
    ratio: float
    beta_p: float | None = None
    beta_p_flags: tuple = ()


def epsilon_mixing_scan(H: Operator, generator: Operator, q: float, beta: float,
                        epsilons: Sequence[float], op_a: Operator, op_b: Operator,
                        beta_grid: Sequence[float] | None = None,
                        tol: float = VERDICT_TOL) -> list[EpsilonRow]:
    """Key-rate reports on (1 - eps) rho_q + eps rho_q' with ratio d2_chiE / (eps ln(1/eps))."""
    rows = []
    for eps in epsilons:
        eps = float(eps)
        st = sector_mixture_state(H, generator, q, beta, eps)
        rep = key_rate_report(st, op_a, op_b, tol=tol)
        ratio = rep.d2_chiE / (eps * math.log(1.0 / eps)) if 0 < eps < 1 else float("nan")
        bp, flags = None, ()
        if beta_grid is not None:
            bp, flags = find_beta_p(lambda b, e=eps: sector_mixture_state(H, generator, q, b, e),
                                    op_a, op_b, beta_grid, tol)
        rows.append(EpsilonRow(eps, rep, ratio, bp, flags))
    return rows
