import numpy as np
import pytest

from privtherm import (TwoQubitState, ValidationError, heisenberg_chain_check,
                       heisenberg_rho_ab, partial_transpose, ppt_verdict)
from privtherm.separability import ENTANGLED, SEPARABLE

from conftest import random_density


def test_singlet_is_entangled():
    s = np.array([0, 1, -1, 0]) / np.sqrt(2)
    res = ppt_verdict(TwoQubitState(np.outer(s, s)))
    assert res.verdict == ENTANGLED
    assert res.min_eigenvalue == pytest.approx(-0.5)
    assert res.negativity == pytest.approx(0.5)


def test_product_states_are_separable(rng):
    for _ in range(20):
        rho = np.kron(random_density(rng, 2), random_density(rng, 2))
        res = ppt_verdict(TwoQubitState(rho))
        assert res.verdict == SEPARABLE and res.negativity == 0.0


def test_partial_transpose_matches_index_definition(rng):
    rho = random_density(rng, 4)
    t = rho.reshape(2, 2, 2, 2)
    ref = np.einsum("ajbk->bjak", t).reshape(4, 4)
    assert np.allclose(partial_transpose(TwoQubitState(rho)), ref)


def test_su2_family_boundary():
    assert ppt_verdict(heisenberg_rho_ab(-1 / 3)).min_eigenvalue == pytest.approx(0, abs=1e-15)
    assert ppt_verdict(heisenberg_rho_ab(-0.3334)).verdict == ENTANGLED
    assert ppt_verdict(heisenberg_rho_ab(-0.3332)).verdict == SEPARABLE
    assert np.allclose(heisenberg_rho_ab(0.0).matrix, np.eye(4) / 4)


def test_negativity_is_continuous_on_family():
    zz = np.linspace(-1, 1 / 3, 401)
    neg = np.array([ppt_verdict(heisenberg_rho_ab(z)).negativity for z in zz])
    assert np.max(np.abs(np.diff(neg))) <= 1.01 * (zz[1] - zz[0]) * 0.75


def test_state_validation():
    with pytest.raises(ValidationError):
        TwoQubitState(np.eye(3) / 3)
    with pytest.raises(ValidationError):
        TwoQubitState(np.diag([1.0, 0.5, -0.5, 0.0]))
    with pytest.raises(ValidationError):
        heisenberg_rho_ab(0.5)


def test_heisenberg_ring_small():
    res = heisenberg_chain_check(8, 1)
    assert res.verdict == ENTANGLED
    assert res.zz < -1 / 3
    assert np.ptp(res.correlators) < 1e-8
    with pytest.raises(ValidationError):
        heisenberg_chain_check(7, 1)
    with pytest.raises(ValidationError):
        heisenberg_chain_check(8, 5)
