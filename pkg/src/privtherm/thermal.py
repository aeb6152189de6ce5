"""Thermal ensembles, entropies, correlators and discrete spectral functions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._numerics import CLAMP_RELATIVE, clamp_weights, xlogx_sum
from .errors import NumericalError, ValidationError
from .operators import Operator, eigendecompose, partial_trace, sector_bases

SECTOR_MATCH_TOL = 1e-6
LINE_MERGE = 1e-9
DETAILED_BALANCE_TOL = 1e-8
AMPLITUDE_FLOOR = 1e-26


@dataclass(frozen=True, eq=False)
class ThermalState:
    """Density matrix held in its eigenbasis.

    ``weights`` are descending; ``vectors`` holds the matching eigenvectors
    in columns. ``energies`` is present when the state is a function of a
    known Hamiltonian. ``ensemble`` is one of "grand", "sector", "mixture"
    or "density"; ``sectors`` lists the generator eigenvalues involved.
    """

    n_sites: int
    weights: np.ndarray
    vectors: np.ndarray
    beta: float | None = None
    ensemble: str = "density"
    energies: np.ndarray | None = None
    sectors: tuple = ()
    epsilon: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dimension(self) -> int:
        return self.vectors.shape[0]

    @property
    def is_thermal(self) -> bool:
        return self.energies is not None and self.ensemble == "grand"

    def describe(self) -> str:
        if self.ensemble == "sector":
            return f"sector(q={self.sectors[0]:g})"
        if self.ensemble == "mixture":
            return f"mixture(q={self.sectors[0]:g},q'={self.sectors[1]:g},eps={self.epsilon:g})"
        return self.ensemble

    def support(self, relative: float = CLAMP_RELATIVE) -> np.ndarray:
        """Indices of eigenvectors carrying weight >= relative * max weight."""
        return np.nonzero(self.weights >= relative * self.weights[0])[0]

    def density_matrix(self) -> np.ndarray:
        if "rho" not in self._cache:
            idx = self.support(0.0)
            idx = idx[self.weights[idx] > 0]
            v = self.vectors[:, idx]
            self._cache["rho"] = (v * self.weights[idx]) @ v.conj().T
        return self._cache["rho"]

    def in_eigenbasis(self, op: Operator) -> np.ndarray:
        """V^dag O V, cached per operator."""
        key = ("tilde", id(op))
        hit = self._cache.get(key)
        if hit is not None and hit[0] is op:
            return hit[1]
        _check_dims(self, op)
        v = self.vectors
        mat = v.conj().T @ op.apply(v)
        self._cache[key] = (op, mat)
        return mat


@dataclass(frozen=True)
class DiscreteSpectralFunction:
    """Line spectrum of an operator: s(omega) = sum_l weights_l delta(omega - omegas_l)."""

    omegas: np.ndarray
    weights: np.ndarray
    static_subtraction: float
    beta: float

    def sum_rule(self) -> float:
        return float(np.sum(self.weights)) - self.static_subtraction

    def detailed_balance_error(self, floor: float = 1e-12) -> float:
        """Largest relative mismatch of w(-omega) against e^{-beta omega} w(omega)."""
        keys = np.rint(self.omegas / LINE_MERGE).astype(np.int64)
        order = np.argsort(keys)
        sk = keys[order]
        sel = (self.omegas > 0) & (self.weights > floor)
        if not np.any(sel):
            return 0.0
        target = -keys[sel]
        pos = np.clip(np.searchsorted(sk, target), 0, len(sk) - 1)
        found = sk[pos] == target
        got = np.where(found, self.weights[order][pos], 0.0)
        expected = np.exp(-self.beta * self.omegas[sel]) * self.weights[sel]
        rel = np.abs(got - expected) / np.maximum(expected, floor)
        return float(rel.max())


def _check_dims(state: ThermalState, op: Operator):
    if op.dimension != state.dimension:
        raise ValidationError(
            f"operator dimension {op.dimension} does not match state dimension {state.dimension}")


def _boltzmann(energies: np.ndarray, beta: float) -> np.ndarray:
    if energies.size == 0:
        raise ValidationError("empty sector")
    w = np.exp(-beta * (energies - energies.min()))
    return w / w.sum()


def _check_beta(beta: float):
    if not np.isfinite(beta) or beta < 0:
        raise ValidationError(f"beta must be finite and >= 0, got {beta}")


def _assemble(n_sites, weights, vectors, energies, **meta) -> ThermalState:
    # descending weights; ties keep the ascending-energy order of the input
    order = np.argsort(-weights, kind="stable")
    return ThermalState(n_sites, weights[order], vectors[:, order],
                        energies=None if energies is None else energies[order], **meta)


def gibbs_state(H: Operator, beta: float, symmetry: Operator | None = None) -> ThermalState:
    """rho = exp(-beta H) / Z, optionally diagonalizing H block by block."""
    _check_beta(beta)
    spec = eigendecompose(H, symmetry)
    return _assemble(H.n_sites, _boltzmann(spec.values, beta), spec.vectors, spec.values,
                     beta=float(beta), ensemble="grand")


def _sector_index(spec, q: float, generator: Operator) -> np.ndarray:
    idx = np.nonzero(np.abs(spec.sectors - q) <= SECTOR_MATCH_TOL)[0]
    if idx.size == 0:
        raise ValidationError(f"sector {q:g} of {generator.label!r} is empty")
    return idx


def canonical_state(H: Operator, generator: Operator, q: float, beta: float) -> ThermalState:
    """rho = exp(-beta H) Pi_q / Z_q."""
    _check_beta(beta)
    spec = eigendecompose(H, generator)
    idx = _sector_index(spec, q, generator)
    w = np.zeros(spec.values.size)
    w[idx] = _boltzmann(spec.values[idx], beta)
    return _assemble(H.n_sites, w, spec.vectors, spec.values, beta=float(beta),
                     ensemble="sector", sectors=(float(spec.sectors[idx[0]]),))


def next_sector(generator: Operator, q: float) -> float:
    """Smallest generator eigenvalue strictly above q."""
    values = [v for v, _ in sector_bases(generator)]
    above = [v for v in values if v > q + SECTOR_MATCH_TOL]
    if not above:
        raise ValidationError(f"no sector of {generator.label!r} above {q:g}")
    return min(above)


def sector_mixture_state(H: Operator, generator: Operator, q: float, beta: float,
                         epsilon: float) -> ThermalState:
    """(1 - eps) rho_{beta,q} + eps rho_{beta,q'} with q' the next sector up."""
    _check_beta(beta)
    if not 0.0 <= epsilon <= 0.5:
        raise ValidationError(f"epsilon must lie in [0, 1/2], got {epsilon}")
    spec = eigendecompose(H, generator)
    q2 = next_sector(generator, q)
    i1 = _sector_index(spec, q, generator)
    i2 = _sector_index(spec, q2, generator)
    w = np.zeros(spec.values.size)
    w[i1] = (1.0 - epsilon) * _boltzmann(spec.values[i1], beta)
    w[i2] = epsilon * _boltzmann(spec.values[i2], beta)
    return _assemble(H.n_sites, w, spec.vectors, spec.values, beta=float(beta),
                     ensemble="mixture", sectors=(float(q), float(q2)), epsilon=float(epsilon))


def density_state(rho: np.ndarray, n_sites: int | None = None) -> ThermalState:
    """Wrap an arbitrary density matrix; tiny and negative eigenvalues are clamped."""
    rho = np.asarray(rho)
    d = rho.shape[0]
    if n_sites is None:
        n_sites = int(round(np.log2(d)))
    if rho.shape != (d, d) or 2**n_sites != d:
        raise ValidationError(f"density matrix shape {rho.shape} is not 2^N square")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ValidationError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-10:
        raise ValidationError(f"density matrix trace {tr} != 1")
    lam, vec = np.linalg.eigh((rho + rho.conj().T) / 2)
    if lam.min() < -1e-10:
        raise ValidationError(f"density matrix has negative eigenvalue {lam.min():.3g}")
    w = clamp_weights(np.clip(lam, 0.0, None))
    w = w / w.sum()
    return _assemble(n_sites, w, vec, None, ensemble="density")


def pure_state(psi: np.ndarray, n_sites: int | None = None) -> ThermalState:
    psi = np.asarray(psi)
    psi = psi / np.linalg.norm(psi)
    return density_state(np.outer(psi, psi.conj()), n_sites)


def expectation(state: ThermalState, op: Operator) -> float:
    _check_dims(state, op)
    idx = state.support(0.0)
    idx = idx[state.weights[idx] > 0]
    v = state.vectors[:, idx]
    diag = np.einsum("ij,ij->j", v.conj(), op.apply(v))
    return float(np.real(np.dot(state.weights[idx], diag)))


def connected_correlator(state: ThermalState, op_a: Operator, op_b: Operator) -> float:
    """Re Tr[rho A B] - <A><B>."""
    _check_dims(state, op_a)
    _check_dims(state, op_b)
    idx = state.support(0.0)
    idx = idx[state.weights[idx] > 0]
    v = state.vectors[:, idx]
    ab = np.einsum("ij,ij->j", op_a.apply(v).conj(), op_b.apply(v))
    return float(np.real(np.dot(state.weights[idx], ab))) - expectation(state, op_a) * expectation(state, op_b)


def entropy_nats(state: ThermalState) -> float:
    return -xlogx_sum(clamp_weights(state.weights))


def reduced_density(state: ThermalState, keep) -> np.ndarray:
    return partial_trace(state.density_matrix(), list(keep), state.n_sites).matrix


def spectral_function(state: ThermalState, op: Operator,
                      centered: bool = False) -> DiscreteSpectralFunction:
    """Lines at omega = E_j - E_i with weight lambda_i |<i|O|j>|^2.

    Pairs where both weights fall below the clamp threshold are dropped
    (the same pairs the eigen-sum drops). Lines closer than 1e-9 merge.
    ``centered`` uses O - <O> instead of O: same finite-frequency lines,
    static term reduced to zero.
    """
    if state.energies is None:
        raise ValidationError("spectral function needs a thermal state with energies")
    if state.ensemble != "grand":
        raise ValidationError(
            f"spectral function needs a globally thermal state, got {state.describe()}")
    key = ("spectral", id(op), centered)
    hit = state._cache.get(key)
    if hit is not None and hit[0] is op:
        return hit[1]
    tilde = state.in_eigenbasis(op)
    mean = expectation(state, op)
    if centered:
        tilde = tilde - mean * np.eye(tilde.shape[0])
    lam = state.weights
    keep_i = lam >= CLAMP_RELATIVE * lam[0]
    # rows: i in support (any j); plus rows outside support only pair with support columns
    amp = np.abs(tilde) ** 2
    # |<i|O|j>|^2 at the round-off floor of the basis change is not a line
    amp[amp < AMPLITUDE_FLOOR * amp.max()] = 0.0
    weights = lam[:, None] * amp
    mask = keep_i[:, None] | keep_i[None, :]
    omegas = state.energies[None, :] - state.energies[:, None]
    om = omegas[mask]
    wt = weights[mask]
    keys = np.rint(om / LINE_MERGE).astype(np.int64)
    uniq, inverse = np.unique(keys, return_inverse=True)
    merged_w = np.bincount(inverse, weights=wt)
    merged_om = np.bincount(inverse, weights=om * wt) / np.where(merged_w > 0, merged_w, 1.0)
    nonzero = merged_w > 0
    merged_om, merged_w = merged_om[nonzero], merged_w[nonzero]
    static = 0.0 if centered else mean**2
    out = DiscreteSpectralFunction(merged_om, merged_w, static, float(state.beta))
    err = out.detailed_balance_error()
    if err > DETAILED_BALANCE_TOL:
        raise NumericalError(f"detailed balance violated (relative error {err:.3g})")
    state._cache[key] = (op, out)
    return out
