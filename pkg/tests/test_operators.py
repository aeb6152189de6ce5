import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privtherm import (ModelSpec, Operator, ValidationError, build_hamiltonian, charge_operator,
                       eigendecompose, identity, parity_operator, parse_pauli, partial_trace,
                       pauli_string, sum_operators, symmetry_sector_projector)
from privtherm.operators import sector_bases

from conftest import random_hermitian

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
PAULI = {"X": X, "Y": Y, "Z": Z}


def kron_oracle(spec, n):
    mats = [np.eye(2, dtype=complex)] * n
    for site, axis in spec:
        mats[site] = PAULI[axis]
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def test_pauli_string_examples():
    assert np.allclose(pauli_string([(0, "Z")], 1).matrix, np.diag([1, -1]))
    assert np.allclose(pauli_string([], 2).matrix, np.eye(4))
    assert np.allclose(pauli_string([(0, "X"), (1, "X")], 2).matrix, np.fliplr(np.eye(4)))


def test_pauli_string_matches_kron_oracle():
    for spec in [[(0, "X")], [(2, "Y")], [(0, "Z"), (2, "X")], [(1, "Y"), (2, "Y")]]:
        assert np.allclose(pauli_string(spec, 3).matrix, kron_oracle(spec, 3))


def test_pauli_string_rejects_bad_input():
    with pytest.raises(ValidationError):
        pauli_string([(3, "X")], 3)
    with pytest.raises(ValidationError):
        pauli_string([(0, "W")], 2)
    with pytest.raises(ValidationError):
        pauli_string([(0, "X"), (0, "Z")], 2)


def test_parse_pauli():
    op = parse_pauli("X@0*Z@2", 3)
    assert np.allclose(op.matrix, kron_oracle([(0, "X"), (2, "Z")], 3))
    assert op.support == frozenset({0, 2})
    with pytest.raises(ValidationError):
        parse_pauli("Q@0", 3)


pauli_specs = st.lists(st.tuples(st.integers(0, 3), st.sampled_from("XYZ")),
                       max_size=4, unique_by=lambda t: t[0])


@settings(max_examples=60, deadline=None)
@given(pauli_specs, pauli_specs)
def test_pauli_commutation_follows_overlap_parity(a, b):
    pa, pb = pauli_string(a, 4), pauli_string(b, 4)
    da, db = dict(a), dict(b)
    clashes = sum(1 for s in da if s in db and da[s] != db[s])
    sign = -1 if clashes % 2 else 1
    ab, ba = (pa @ pb).matrix, (pb @ pa).matrix
    assert np.array_equal(ab, sign * ba)
    assert np.allclose(ab, pa.matrix @ pb.matrix)


def test_hamiltonian_examples():
    ev = np.linalg.eigvalsh(build_hamiltonian(ModelSpec("tfim", 2, g=0.0)).matrix)
    assert np.allclose(ev, [-1, -1, 1, 1])
    ev = np.linalg.eigvalsh(build_hamiltonian(ModelSpec("heisenberg", 2)).matrix)
    assert np.allclose(ev, [-3, 1, 1, 1])


def test_large_field_ground_state_is_plus_plus():
    spec = eigendecompose(build_hamiltonian(ModelSpec("tfim", 2, g=1e4)))
    plus = np.ones(4) / 2
    assert abs(np.vdot(plus, spec.vectors[:, 0])) > 1 - 1e-6


def test_free_fermion_ground_energy():
    # open-chain TFIM energy from the single-particle spectrum of the BdG matrix
    n, g = 8, 0.7
    h = build_hamiltonian(ModelSpec("tfim", n, g=g))
    a = np.zeros((n, n))
    b = np.zeros((n, n))
    for i in range(n):
        a[i, i] = 2 * g
    for i in range(n - 1):
        a[i, i + 1] = a[i + 1, i] = -1.0
        b[i, i + 1], b[i + 1, i] = -1.0, 1.0
    eps = np.sqrt(np.clip(np.linalg.eigvalsh((a - b) @ (a + b)), 0, None))
    eps = np.sort(eps)
    values = eigendecompose(h).values
    assert np.isclose(values[0], -0.5 * np.sum(eps), atol=1e-10)
    assert np.isclose(values[1] - values[0], eps[0], atol=1e-10)


@pytest.mark.parametrize("family,boundary", [("tfim", "open"), ("tfim", "periodic"),
                                             ("xx", "open"), ("xx", "periodic"),
                                             ("heisenberg", "periodic")])
def test_hamiltonian_commutes_with_symmetry(family, boundary):
    h = build_hamiltonian(ModelSpec(family, 6, g=0.8, boundary=boundary))
    gen = parity_operator(6, "X") if family == "tfim" else charge_operator(6)
    assert h.commutator_norm(gen) <= 1e-10


def test_model_spec_validation():
    with pytest.raises(ValidationError):
        ModelSpec("potts", 4)
    with pytest.raises(ValidationError):
        ModelSpec("tfim", 13)
    with pytest.raises(ValidationError):
        ModelSpec("tfim", 4, boundary="twisted")


def test_sector_projector_examples():
    p = symmetry_sector_projector(charge_operator(2), 0)
    assert np.allclose(p.matrix, np.diag([0, 1, 1, 0]))
    p = symmetry_sector_projector(charge_operator(2), 2)
    assert np.allclose(p.matrix, np.diag([1, 0, 0, 0]))
    p = symmetry_sector_projector(parity_operator(3, "X"), 1)
    assert np.isclose(np.trace(p.matrix).real, 4)
    assert np.allclose(p.matrix @ p.matrix, p.matrix)
    with pytest.raises(ValidationError):
        symmetry_sector_projector(charge_operator(2), 1)


def test_sector_bases_are_complete_and_orthonormal():
    for gen in [charge_operator(4), parity_operator(4, "X"), parity_operator(4, "Z")]:
        blocks = sector_bases(gen)
        basis = np.hstack([b.toarray() for _, b in blocks])
        assert basis.shape == (16, 16)
        assert np.allclose(basis.conj().T @ basis, np.eye(16))
        for value, b in blocks:
            b = b.toarray()
            assert np.allclose(gen.matrix @ b, value * b)


def test_eigendecompose_examples():
    assert np.allclose(eigendecompose(pauli_string([(0, "Z")], 1)).values, [-1, 1])
    assert np.allclose(eigendecompose(identity(2)).values, [1, 1, 1, 1])


def test_eigendecompose_rejects_non_hermitian():
    m = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(ValidationError):
        eigendecompose(Operator(1, m, frozenset({0}), "sigma+"))


def test_reconstruct_round_trip_and_symmetry_blocks_agree(rng):
    h = build_hamiltonian(ModelSpec("xx", 6, boundary="periodic"))
    plain = eigendecompose(h)
    blocked = eigendecompose(h, charge_operator(6))
    assert np.allclose(plain.reconstruct(), h.matrix, atol=1e-10)
    assert np.allclose(blocked.reconstruct(), h.matrix, atol=1e-10)
    assert np.allclose(plain.values, blocked.values, atol=1e-10)
    m = random_hermitian(rng, 8)
    op = Operator(3, m, frozenset(range(3)), "random")
    assert np.allclose(eigendecompose(op).reconstruct(), m, atol=1e-10)


def test_degenerate_basis_is_reproducible():
    a = eigendecompose(build_hamiltonian(ModelSpec("heisenberg", 6, boundary="periodic")),
                       charge_operator(6))
    b = eigendecompose(build_hamiltonian(ModelSpec("heisenberg", 6, boundary="periodic")),
                       charge_operator(6))
    assert np.array_equal(a.vectors, b.vectors)
    assert np.array_equal(a.values, b.values)


def test_partial_trace_examples():
    bell = np.zeros(4)
    bell[[0, 3]] = 1 / np.sqrt(2)
    out = partial_trace(np.outer(bell, bell), [0], 2)
    assert np.allclose(out.matrix, np.eye(2) / 2)
    ra = np.array([[0.7, 0.2], [0.2, 0.3]])
    rb = np.array([[0.4, 0.1j], [-0.1j, 0.6]])
    assert np.allclose(partial_trace(np.kron(ra, rb), [0], 2).matrix, ra)
    assert np.allclose(partial_trace(np.kron(ra, rb), [1], 2).matrix, rb)


def test_partial_trace_matches_index_contraction_on_tfim_ground_state():
    n = 10
    psi = eigendecompose(build_hamiltonian(ModelSpec("tfim", n, g=1.1))).vectors[:, 0]
    keep = (2, 7)
    got = partial_trace(np.outer(psi, psi.conj()), keep, n).matrix
    # brute force: <ab|rho|a'b'> = sum over basis states agreeing off the kept sites
    bits = (np.arange(2 ** n)[:, None] >> (n - 1 - np.arange(n))) & 1
    ref = np.zeros((4, 4), dtype=complex)
    for a, b in itertools.product(range(4), repeat=2):
        ia = (bits[:, keep[0]] == a >> 1) & (bits[:, keep[1]] == a & 1)
        idx = np.flatnonzero(ia)
        flipped = idx.copy()
        for k, site in enumerate(keep):
            target = (b >> (1 - k)) & 1
            flipped = np.where(bits[idx, site] != target, flipped ^ (1 << (n - 1 - site)), flipped)
        ref[a, b] = np.sum(psi[idx] * psi[flipped].conj())
    assert np.allclose(got, ref, atol=1e-12)


def test_partial_trace_is_linear(rng):
    for _ in range(5):
        a, b = random_hermitian(rng, 16), random_hermitian(rng, 16)
        ca, cb = rng.normal(size=2)
        lhs = partial_trace(ca * a + cb * b, [1, 3], 4).matrix
        rhs = ca * partial_trace(a, [1, 3], 4).matrix + cb * partial_trace(b, [1, 3], 4).matrix
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_sum_operators_and_arithmetic():
    n = 3
    s = sum_operators([(1.0, pauli_string([(j, "Z")], n)) for j in range(n)], n, "Q")
    assert np.allclose(s.matrix, charge_operator(n).matrix)
    a = parse_pauli("X@0", n)
    assert np.allclose((a + a - a).matrix, a.matrix)
    assert np.allclose((2.0 * a).matrix, 2 * a.matrix)
    assert np.isclose(s.spectral_norm(), 3.0)
