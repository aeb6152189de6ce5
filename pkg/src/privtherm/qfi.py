"""Quantum Fisher information of thermal states and multipartite-entanglement bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numerics import log_qfi_kernel
from .errors import ValidationError
from .operators import Operator
from .thermal import ThermalState, spectral_function

SATISFIED = "satisfied"
NOT_SATISFIED = "not-satisfied"


@dataclass(frozen=True)
class QfiReport:
    """``bound_k`` is the smallest k whose producibility bound is violated and
    ``max_violated_k`` the largest; a violation at k implies (k+1)-partite
    entanglement. Bounds are checked against f_eigensum / 4, the QFI of the
    spin generator Sigma / 2 for Pauli sums."""

    f_paper: float | None
    f_eigensum: float
    ratio: float
    bound_k: int | None
    max_violated_k: int | None
    bipartite_condition: str | None = None


def qfi_spectral(state: ThermalState, sigma: Operator) -> float:
    """(1/4 pi) int dw e^{-bw} f(bw)/b(bw)^2 s(w) = (1/2) sum_l w_l K(beta omega_l).

    K(x) = (e^x - 1)^2 / (e^x (e^x + 1)) grows like e^{|x|} for negative x,
    so each term is formed in the log domain.
    """
    sf = spectral_function(state, sigma)
    x = sf.beta * sf.omegas
    pos = sf.weights > 0
    logs = np.log(sf.weights[pos]) + log_qfi_kernel(x[pos])
    return 0.5 * float(np.sum(np.exp(logs)))


def qfi_eigensum(state: ThermalState, sigma: Operator) -> float:
    """2 sum_jk (lam_j - lam_k)^2 / (lam_j + lam_k) |<j|Sigma|k>|^2."""
    lam = state.weights
    st = state.in_eigenbasis(sigma)
    num = (lam[:, None] - lam[None, :]) ** 2
    den = lam[:, None] + lam[None, :]
    ratio = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return 2.0 * float(np.sum(ratio * np.abs(st) ** 2))


def producibility_bound(n: int, k: int) -> int:
    """floor(N/k) k^2 + (N - floor(N/k) k)^2, exact integer arithmetic."""
    n, k = int(n), int(k)
    if not 1 <= k <= n:
        raise ValidationError(f"need 1 <= k <= N, got k={k}, N={n}")
    s = n // k
    r = n - s * k
    return s * k * k + r * r


def violated_bounds(f_spin: float, n: int, atol: float = 1e-9) -> list[int]:
    """All k whose producibility bound is exceeded by the spin-generator QFI."""
    return [k for k in range(1, n + 1) if f_spin > producibility_bound(n, k) + atol]


def qfi_bipartite_condition(state: ThermalState, op_a: Operator, op_b: Operator) -> str:
    """qfi_spectral with Sigma = O_A + O_B compared against 2."""
    if op_a.support & op_b.support:
        raise ValidationError("O_A and O_B must act on disjoint sites")
    f = qfi_spectral(state, op_a + op_b)
    return SATISFIED if f > 2.0 else NOT_SATISFIED


def qfi_report(state: ThermalState, sigma: Operator, n_sites: int | None = None,
               op_a: Operator | None = None, op_b: Operator | None = None) -> QfiReport:
    # the spectral formula needs a globally thermal state
    f_paper = qfi_spectral(state, sigma) if state.is_thermal else None
    f_eig = qfi_eigensum(state, sigma)
    ratio = f_eig / f_paper if f_paper else float("nan")
    violated = violated_bounds(f_eig / 4.0, n_sites or state.n_sites)
    cond = None
    if op_a is not None and op_b is not None and state.is_thermal:
        cond = qfi_bipartite_condition(state, op_a, op_b)
    return QfiReport(f_paper, f_eig, ratio, min(violated) if violated else None,
                     max(violated) if violated else None, cond)
