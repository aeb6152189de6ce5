"""Two-qubit separability: partial transpose, PPT verdict, Heisenberg-ring check."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateGroundStateError, ValidationError
from .operators import ModelSpec, build_hamiltonian, eigendecompose, natural_symmetry, pauli_string
from .operators import partial_trace

SEPARABLE = "separable-by-PPT"
ENTANGLED = "entangled"
GAP_TOL = 1e-8
FORM_TOL = 1e-8

_SINGLET = np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2.0)


@dataclass(frozen=True)
class TwoQubitState:
    matrix: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape != (4, 4):
            raise ValidationError(f"two-qubit state must be 4x4, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ValidationError("two-qubit state is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ValidationError("two-qubit state does not have unit trace")
        if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -1e-10:
            raise ValidationError("two-qubit state is not positive semidefinite")


@dataclass(frozen=True)
class PptResult:
    verdict: str
    negativity: float
    min_eigenvalue: float


@dataclass(frozen=True)
class HeisenbergCheck:
    n: int
    x: int
    zz: float
    verdict: str
    negativity: float
    form_error: float
    gap: float
    correlators: tuple


def partial_transpose(state: TwoQubitState) -> np.ndarray:
    """Transpose on the first qubit."""
    t = np.asarray(state.matrix).reshape(2, 2, 2, 2)
    return t.transpose(2, 1, 0, 3).reshape(4, 4)


def ppt_verdict(state: TwoQubitState, tol: float = 1e-12) -> PptResult:
    """PPT is necessary and sufficient for two qubits."""
    ev = np.linalg.eigvalsh(partial_transpose(state))
    negativity = float(max(0.0, -np.sum(ev[ev < 0])))
    verdict = ENTANGLED if ev[0] < -tol else SEPARABLE
    return PptResult(verdict, negativity, float(ev[0]))


def heisenberg_rho_ab(zz: float) -> TwoQubitState:
    """-zz |singlet><singlet| + (1 + zz) 1/4, valid for zz in [-1, 1/3]."""
    if not -1.0 - 1e-12 <= zz <= 1.0 / 3.0 + 1e-12:
        raise ValidationError(f"zz = {zz} outside the positive window [-1, 1/3]")
    m = -zz * np.outer(_SINGLET, _SINGLET) + (1.0 + zz) * np.eye(4) / 4.0
    return TwoQubitState(m, provenance=f"SU(2) form, zz={zz:g}")


@lru_cache(maxsize=4)
def _ring_ground_state(n: int):
    model = ModelSpec("heisenberg", n, boundary="periodic")
    spec = eigendecompose(build_hamiltonian(model), natural_symmetry(model))
    gap = float(spec.values[1] - spec.values[0])
    if gap <= GAP_TOL:
        raise DegenerateGroundStateError(
            f"ground state of the N={n} ring is degenerate (gap {gap:.3g})")
    psi = spec.vectors[:, 0].copy()
    psi.setflags(write=False)
    return psi, gap


def heisenberg_chain_check(n: int, x: int) -> HeisenbergCheck:
    """Ground state of the Heisenberg ring, reduced to sites (0, x), tested by PPT."""
    if n % 2 or n < 2:
        raise ValidationError(f"N must be even (singlet ground state), got {n}")
    if not 1 <= x <= n // 2:
        raise ValidationError(f"x must lie in [1, N/2], got {x}")
    psi, gap = _ring_ground_state(n)
    rho = np.outer(psi, psi.conj())
    rho_ab = partial_trace(rho, [0, x], n).matrix
    corr = []
    for axis in "XYZ":
        op = pauli_string([(0, axis), (x, axis)], n)
        corr.append(float(np.real(np.vdot(psi, op.apply(psi)))))
    zz = corr[2]
    form = heisenberg_rho_ab(zz)
    err = float(np.linalg.norm(rho_ab - form.matrix))
    if err > FORM_TOL:
        raise ValidationError(f"reduced state deviates from the SU(2) form by {err:.3g}")
    res = ppt_verdict(TwoQubitState(rho_ab, provenance=f"ED N={n} ring, sites 0 and {x}"))
    return HeisenbergCheck(n, x, zz, res.verdict, res.negativity, err, gap, tuple(corr))
