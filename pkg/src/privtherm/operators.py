"""Dense operators on N-qubit registers.

Conventions: site 0 is the leftmost tensor factor (most significant bit of
the basis index), ``|0>`` is the +1 eigenstate of Z, couplings are in units
of J = 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError

MAX_ED_SITES = 12
HERMITIAN_TOL = 1e-12
DEGENERACY_TOL = 1e-9

_AXES = "XYZ"


@dataclass(frozen=True, eq=False)
class Operator:
    """Hermitian (by convention) dense operator with site-support metadata.

    ``monomial`` is an optional sparse shadow for signed permutation
    matrices (Pauli strings and their products): ``(rows, vals)`` such that
    column i has its single nonzero ``vals[i]`` in row ``rows[i]``.
    """

    n_sites: int
    matrix: np.ndarray
    support: frozenset = frozenset()
    label: str = ""
    monomial: tuple | None = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        d = 2**self.n_sites
        if self.matrix.shape != (d, d):
            raise ValidationError(
                f"matrix shape {self.matrix.shape} does not match 2^{self.n_sites}")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_diagonal(self) -> bool:
        key = "is_diagonal"
        if key not in self._cache:
            if self.monomial is not None:
                rows, _ = self.monomial
                self._cache[key] = bool(np.all(rows == np.arange(len(rows))))
            else:
                m = self.matrix
                self._cache[key] = not np.any(m - np.diag(np.diag(m)))
        return self._cache[key]

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def dagger(self) -> "Operator":
        mono = None
        if self.monomial is not None:
            rows, vals = self.monomial
            inv = np.empty_like(rows)
            inv[rows] = np.arange(len(rows))
            mono = (inv, np.conj(vals[inv]))
        return Operator(self.n_sites, _realify(self.matrix.conj().T),
                        self.support, self.label + "^dag", mono)

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        """Return ``matrix @ vectors`` using the permutation shadow when present."""
        if self.monomial is None:
            return self.matrix @ vectors
        rows, vals = self.monomial
        out = np.zeros(vectors.shape, dtype=np.result_type(vals, vectors))
        if vectors.ndim == 1:
            out[rows] = vals * vectors
        else:
            out[rows] = vals[:, None] * vectors
        return out

    def __add__(self, other: "Operator") -> "Operator":
        _check_same_register(self, other)
        return Operator(self.n_sites, _realify(self.matrix + other.matrix),
                        self.support | other.support, _join(self.label, "+", other.label))

    def __sub__(self, other: "Operator") -> "Operator":
        return self + (-1.0) * other

    def __neg__(self) -> "Operator":
        return (-1.0) * self

    def __mul__(self, scalar) -> "Operator":
        if isinstance(scalar, Operator):
            return NotImplemented
        mono = None
        if self.monomial is not None:
            rows, vals = self.monomial
            mono = (rows, _realify(vals * scalar))
        return Operator(self.n_sites, _realify(self.matrix * scalar), self.support,
                        f"{scalar:g}*{self.label}" if self.label else "", mono)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        _check_same_register(self, other)
        mono = None
        if self.monomial is not None and other.monomial is not None:
            ra, va = self.monomial
            rb, vb = other.monomial
            mono = (ra[rb], _realify(va[rb] * vb))
            matrix = _monomial_dense(*mono)
        elif other.monomial is not None:
            rows, vals = other.monomial
            matrix = self.matrix[:, rows] * vals[None, :]
        else:
            matrix = self.apply(other.matrix)
        return Operator(self.n_sites, _realify(matrix), self.support | other.support,
                        _join(self.label, "*", other.label), mono)

    def commutator_norm(self, other: "Operator") -> float:
        """Frobenius norm of [self, other]."""
        ab = (self @ other).matrix
        ba = (other @ self).matrix
        return float(np.linalg.norm(ab - ba))

    def local_matrix(self) -> np.ndarray:
        """The 2^k x 2^k factor acting on ``support`` (sorted site order)."""
        sites = sorted(self.support)
        if not sites:
            return np.array([[np.trace(self.matrix) / self.dimension]])
        return partial_trace(self, sites).matrix / 2 ** (self.n_sites - len(sites))

    def spectral_norm(self) -> float:
        key = "spectral_norm"
        if key not in self._cache:
            local = self.local_matrix()
            self._cache[key] = float(np.max(np.abs(np.linalg.eigvalsh(local))))
        return self._cache[key]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues with orthonormal eigenvectors in columns.

    ``sectors`` holds the symmetry-generator eigenvalue of each eigenvector
    when the decomposition was done block by block.
    """

    values: np.ndarray
    vectors: np.ndarray
    sectors: np.ndarray | None = None

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values[None, :]) @ self.vectors.conj().T


@dataclass(frozen=True)
class ModelSpec:
    family: str
    n_sites: int
    g: float = 1.0
    boundary: str = "open"
    terms: tuple = ()
    max_sites: int = MAX_ED_SITES

    def __post_init__(self):
        if self.family not in ("tfim", "xx", "heisenberg", "custom"):
            raise ValidationError(f"unknown model family {self.family!r}")
        if self.n_sites < 2:
            raise ValidationError("models need at least 2 sites")
        if self.n_sites > self.max_sites:
            raise ValidationError(
                f"N={self.n_sites} exceeds the dense-ED cap of {self.max_sites} sites")
        if self.boundary not in ("open", "periodic"):
            raise ValidationError(f"boundary must be open or periodic, got {self.boundary!r}")
        if self.family == "custom":
            for coef, spec in self.terms:
                if not np.isreal(coef):
                    raise ValidationError("custom term coefficients must be real")


def _join(a: str, op: str, b: str) -> str:
    if a and b:
        return f"{a}{op}{b}"
    return a or b


def _check_same_register(a: Operator, b: Operator):
    if a.n_sites != b.n_sites:
        raise ValidationError(f"register mismatch: {a.n_sites} vs {b.n_sites} sites")


def _realify(m):
    m = np.asarray(m)
    if np.iscomplexobj(m) and not np.any(m.imag):
        return np.ascontiguousarray(m.real)
    return m


def _monomial_dense(rows, vals):
    d = len(rows)
    m = np.zeros((d, d), dtype=np.result_type(vals, float))
    m[rows, np.arange(d)] = vals
    return m


def _pauli_monomial(spec: Sequence[tuple[int, str]], n_sites: int):
    idx = np.arange(2**n_sites)
    flip = 0
    vals = np.ones(2**n_sites, dtype=complex)
    for site, axis in spec:
        shift = n_sites - 1 - site
        bit = (idx >> shift) & 1
        sign = 1.0 - 2.0 * bit
        if axis == "X":
            flip |= 1 << shift
        elif axis == "Y":
            flip |= 1 << shift
            vals = vals * 1j * sign
        else:
            vals = vals * sign
    return idx ^ flip, _realify(vals)


def pauli_string(spec: Iterable[tuple[int, str]], n_sites: int, label: str = "") -> Operator:
    """Tensor product of single-site Paulis, identity elsewhere."""
    spec = [(int(s), str(a).upper()) for s, a in spec]
    sites = [s for s, _ in spec]
    if len(set(sites)) != len(sites):
        raise ValidationError(f"duplicate site in Pauli string {spec}")
    for s, a in spec:
        if not 0 <= s < n_sites:
            raise ValidationError(f"site {s} outside register of {n_sites} sites")
        if a not in _AXES:
            raise ValidationError(f"unknown Pauli axis {a!r}")
    rows, vals = _pauli_monomial(spec, n_sites)
    if not label:
        label = "*".join(f"{a}@{s}" for s, a in spec) or "I"
    return Operator(n_sites, _monomial_dense(rows, vals), frozenset(sites), label, (rows, vals))


_OBS_RE = re.compile(r"^\s*([XYZxyz])\s*@\s*(\d+)\s*$")


def parse_pauli(text: str, n_sites: int) -> Operator:
    """Parse ``X@0`` or a product such as ``X@0*Z@3``."""
    factors = [f for f in text.split("*") if f.strip()]
    spec = []
    for f in factors:
        m = _OBS_RE.match(f)
        if not m:
            raise ValidationError(f"cannot parse observable {text!r}; expected AXIS@site")
        spec.append((int(m.group(2)), m.group(1).upper()))
    return pauli_string(spec, n_sites, label=text.replace(" ", ""))


def identity(n_sites: int) -> Operator:
    return pauli_string([], n_sites)


def sum_operators(terms: Sequence[tuple[float, Operator]], n_sites: int, label: str = "") -> Operator:
    """Weighted sum of operators accumulated into one dense matrix."""
    d = 2**n_sites
    dtype = float
    for c, op in terms:
        if np.iscomplexobj(op.matrix) or np.iscomplexobj(c):
            dtype = complex
            break
    total = np.zeros((d, d), dtype=dtype)
    support = set()
    for c, op in terms:
        if op.monomial is not None:
            rows, vals = op.monomial
            total[rows, np.arange(d)] += c * vals
        else:
            total += c * op.matrix
        support |= op.support
    return Operator(n_sites, _realify(total), frozenset(support), label)


def _bonds(n_sites: int, boundary: str):
    bonds = [(j, j + 1) for j in range(n_sites - 1)]
    if boundary == "periodic":
        bonds.append((n_sites - 1, 0))
    return bonds


def build_hamiltonian(model: ModelSpec) -> Operator:
    n = model.n_sites
    terms = []
    if model.family == "tfim":
        for i, j in _bonds(n, model.boundary):
            terms.append((-1.0, pauli_string([(i, "Z"), (j, "Z")], n)))
        for i in range(n):
            terms.append((-model.g, pauli_string([(i, "X")], n)))
        label = f"tfim(N={n},g={model.g:g},{model.boundary})"
    elif model.family in ("xx", "heisenberg"):
        axes = "XY" if model.family == "xx" else "XYZ"
        for i, j in _bonds(n, model.boundary):
            for a in axes:
                terms.append((1.0, pauli_string([(i, a), (j, a)], n)))
        label = f"{model.family}(N={n},{model.boundary})"
    else:
        for coef, spec in model.terms:
            op = spec if isinstance(spec, Operator) else pauli_string(spec, n)
            terms.append((float(np.real(coef)), op))
        label = f"custom(N={n})"
    return sum_operators(terms, n, label)


def charge_operator(n_sites: int) -> Operator:
    """Q = sum_j Z_j."""
    return sum_operators([(1.0, pauli_string([(j, "Z")], n_sites)) for j in range(n_sites)],
                         n_sites, "Q")


def parity_operator(n_sites: int, axis: str = "X") -> Operator:
    """Global parity prod_j AXIS_j."""
    return pauli_string([(j, axis) for j in range(n_sites)], n_sites, label=f"P{axis}")


def natural_symmetry(model: ModelSpec) -> Operator | None:
    """Symmetry generator conserved by the model family, if any."""
    if model.family == "tfim":
        return parity_operator(model.n_sites, "X")
    if model.family in ("xx", "heisenberg"):
        return charge_operator(model.n_sites)
    return None


def sector_bases(generator: Operator, tol: float = 1e-8) -> list[tuple[float, sp.csc_matrix]]:
    """Orthonormal bases of the generator's eigenspaces, ascending eigenvalue.

    Diagonal generators give computational-basis columns; involutory signed
    permutations (Pauli strings) give pair states; anything else falls back
    to a dense eigendecomposition.
    """
    d = generator.dimension
    if generator.is_diagonal:
        diag = np.real(np.diag(generator.matrix))
        return _group_columns(diag, tol)
    if generator.monomial is not None:
        rows, vals = generator.monomial
        if np.all(rows[rows] == np.arange(d)) and np.allclose(vals[rows] * vals, 1.0):
            return _pair_bases(rows, vals, tol)
    spec = eigendecompose(generator)
    out = []
    for value, idx in _clusters(spec.values, tol):
        out.append((float(np.mean(spec.values[idx])), sp.csc_matrix(spec.vectors[:, idx])))
    return out


def _group_columns(diag, tol):
    d = len(diag)
    order = np.argsort(diag, kind="stable")
    out = []
    for value, idx in _clusters(diag[order], tol):
        cols = np.sort(order[idx])
        basis = sp.csc_matrix((np.ones(len(cols)), (cols, np.arange(len(cols)))),
                              shape=(d, len(cols)))
        out.append((float(np.mean(diag[cols])), basis))
    return out


def _pair_bases(rows, vals, tol):
    d = len(rows)
    groups: dict[float, list] = {}
    for i in range(d):
        j = rows[i]
        if j < i:
            continue
        if j == i:
            ev = float(np.real(vals[i]))
            groups.setdefault(ev, []).append(((i,), (1.0,)))
            continue
        # P e_i = vals[i] e_j, P e_j = vals[j] e_i with vals[i] vals[j] = 1
        c = vals[i]
        s = 1 / np.sqrt(2.0)
        groups.setdefault(1.0, []).append(((i, j), (s, s * c)))
        groups.setdefault(-1.0, []).append(((i, j), (s, -s * c)))
    out = []
    for ev in sorted(groups):
        entries = groups[ev]
        r, cidx, data = [], [], []
        for col, (idx, coef) in enumerate(entries):
            for a, b in zip(idx, coef):
                r.append(a)
                cidx.append(col)
                data.append(b)
        data = np.asarray(data)
        basis = sp.csc_matrix((_realify(data), (r, cidx)), shape=(d, len(entries)))
        out.append((ev, basis))
    return out


def _clusters(sorted_values, tol):
    """Split an ascending array into runs whose neighbours differ by <= tol*scale."""
    v = np.asarray(sorted_values, dtype=float)
    if v.size == 0:
        return []
    scale = max(1.0, float(np.max(np.abs(v))))
    breaks = np.nonzero(np.diff(v) > tol * scale)[0] + 1
    bounds = np.concatenate([[0], breaks, [v.size]])
    return [(float(v[a]), np.arange(a, b)) for a, b in zip(bounds[:-1], bounds[1:])]


def _canonical_basis(block: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Gram-Schmidt of projected computational basis vectors, taken in index order.

    Returns an orthonormal basis of span(block) whose k-th vector has a
    positive real component on the k-th pivot basis state.
    """
    m = block.shape[1]
    coeffs = block.conj()  # row i = coordinates of P e_i in the block basis
    norms = np.linalg.norm(coeffs, axis=1)
    q = np.zeros((m, m), dtype=block.dtype)
    k = 0
    for i in np.nonzero(norms > tol)[0]:
        a = coeffs[i]
        r = a - q[:, :k] @ (q[:, :k].conj().T @ a)
        nr = np.linalg.norm(r)
        if nr > tol:
            q[:, k] = r / nr
            k += 1
            if k == m:
                break
    if k < m:
        return block
    return block @ q


def eigendecompose(op: Operator, symmetry: Operator | None = None) -> Spectrum:
    """Deterministic Hermitian eigendecomposition.

    With ``symmetry`` the operator is diagonalized block by block in the
    generator's eigenspaces; degenerate subspaces are then canonicalized
    within each (sector, energy) cluster. Results are cached on ``op``.
    """
    key = ("eig", id(symmetry), symmetry.label if symmetry is not None else None)
    cached = op._cache.get(key)
    if cached is not None and cached[0] is symmetry:
        return cached[1]
    err = op.hermiticity_error()
    if err > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(op.matrix), initial=0.0))):
        raise ValidationError(f"operator {op.label!r} is not Hermitian (error {err:.3g})")
    if symmetry is None:
        values, vectors = np.linalg.eigh(op.matrix)
        sectors = None
    else:
        values, vectors, sectors = _block_eigh(op, symmetry)
    values, vectors, sectors = _canonicalize(values, vectors, sectors)
    spec = Spectrum(values, vectors, sectors)
    op._cache[key] = (symmetry, spec)
    return spec


def _block_eigh(op: Operator, symmetry: Operator):
    comm = op.commutator_norm(symmetry)
    if comm > 1e-10 * max(1.0, np.linalg.norm(op.matrix)):
        raise ValidationError(f"{symmetry.label!r} does not commute with {op.label!r} ({comm:.3g})")
    d = op.dimension
    dtype = np.result_type(op.matrix, float)
    vals_all, vecs_all, secs = [], [], []
    for q, basis in sector_bases(symmetry):
        bh = basis.conj().T
        t = bh @ op.matrix                    # m x d
        hq = (bh @ t.conj().T).conj().T       # m x m = B^H H B
        hq = (hq + hq.conj().T) / 2
        e, u = np.linalg.eigh(_realify(hq))
        vecs_all.append(basis @ u)
        vals_all.append(e)
        secs.append(np.full(len(e), q))
        dtype = np.result_type(dtype, vecs_all[-1])
    values = np.concatenate(vals_all)
    vectors = np.empty((d, d), dtype=dtype)
    col = 0
    for v in vecs_all:
        vectors[:, col:col + v.shape[1]] = v
        col += v.shape[1]
    return values, vectors, np.concatenate(secs)


def _canonicalize(values, vectors, sectors):
    keys = sectors if sectors is not None else np.zeros_like(values)
    order = np.lexsort((keys, values))
    values = values[order]
    vectors = vectors[:, order]
    keys = keys[order]
    vectors = np.array(vectors, copy=True)
    for _, idx in _clusters(values, DEGENERACY_TOL):
        for sec in np.unique(keys[idx]):
            sub = idx[keys[idx] == sec]
            vectors[:, sub] = _canonical_basis(vectors[:, sub])
    return values, _realify(vectors), (keys if sectors is not None else None)


def symmetry_sector_projector(generator: Operator, eigenvalue: float) -> Operator:
    for q, basis in sector_bases(generator):
        if abs(q - eigenvalue) <= 1e-6:
            b = basis.toarray()
            proj = b @ b.conj().T
            return Operator(generator.n_sites, _realify(proj), generator.support,
                            f"Pi[{generator.label}={q:g}]")
    raise ValidationError(f"eigenvalue {eigenvalue} not in the spectrum of {generator.label!r}")


def partial_trace(op: Operator | np.ndarray, keep: Iterable[int], n_sites: int | None = None) -> Operator:
    """Trace out every site not in ``keep``; kept sites stay in the given order."""
    if isinstance(op, Operator):
        matrix, n = op.matrix, op.n_sites
    else:
        matrix, n = np.asarray(op), int(n_sites)
    keep = list(keep)
    if len(set(keep)) != len(keep) or any(not 0 <= s < n for s in keep):
        raise ValidationError(f"invalid site selection {keep} for {n} sites")
    rest = [s for s in range(n) if s not in keep]
    t = matrix.reshape((2,) * (2 * n))
    perm = keep + rest + [n + s for s in keep] + [n + s for s in rest]
    t = t.transpose(perm)
    dk, dr = 2 ** len(keep), 2 ** len(rest)
    t = t.reshape(dk, dr, dk, dr)
    reduced = np.einsum("arbr->ab", t)
    if not keep:
        return Operator(0, reduced.reshape(1, 1), frozenset(), "trace")
    return Operator(len(keep), _realify(reduced), frozenset(range(len(keep))), "reduced")
