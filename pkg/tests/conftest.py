import functools

import numpy as np
import pytest

from privtherm import ModelSpec, build_hamiltonian, natural_symmetry


@functools.lru_cache(maxsize=None)
def hamiltonian(family, n, g=1.0, boundary="open"):
    """Shared Hamiltonians so eigendecompositions cached on them are reused."""
    spec = ModelSpec(family, n, g=g, boundary=boundary)
    return build_hamiltonian(spec), natural_symmetry(spec)


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def random_density(rng, d, rank=None):
    rank = rank or d
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@functools.lru_cache(maxsize=None)
def thermal(family, n, g, boundary, beta):
    """Shared Gibbs states; N = 12 diagonalizations are the slow part of the suite."""
    from privtherm import gibbs_state

    h, sym = hamiltonian(family, n, g, boundary)
    return gibbs_state(h, beta, sym)


ACCEPTANCE_LINES = {}


def record_criterion(number, name, ok, detail):
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
