import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sepconv.adm import adm_of, majorizes, monotones, unitary_stab_test
from sepconv.errors import NonUnitaryStabilizer, SingularFactor
from sepconv.fourqubit import klein_stabilizer
from sepconv.stabilizer import StabilizerGroup
from sepconv.states import max_entangled, schmidt_state
from sepconv.tensor_core import (
    LocalOperator,
    apply_raw,
    random_local_unitary,
    random_special_operator,
    reduced_density,
)

from oracles import crit4, on_party


def test_identity_and_unitary(rng):
    psi = crit4().state
    assert np.array_equal(adm_of(psi, LocalOperator.identity((2,) * 4)).matrix, np.eye(16))
    u = random_local_unitary((2,) * 4, rng)
    assert np.allclose(adm_of(psi, u).matrix, np.eye(16), atol=1e-10)


def test_diag_filter_example():
    psi = crit4().state
    g = on_party(np.diag([2, 0.5]))
    rho = adm_of(psi, g)
    n2 = np.linalg.norm(apply_raw(g, psi.amp)) ** 2
    assert rho.norm_sq == pytest.approx(n2) and n2 == pytest.approx(17 / 8)
    assert np.allclose(np.sort(rho.eigenvalues), np.sort(np.repeat([4, 0.25], 8) / n2))
    assert np.allclose(rho.local_factors[0], np.diag([4, 0.25]))


def test_singular_g():
    with pytest.raises(SingularFactor):
        adm_of(crit4().state, on_party(np.diag([1, 0])))


@given(seed=st.integers(0, 2**32 - 1))
def test_adm_invariants(seed):
    rng = np.random.default_rng(seed)
    psi = crit4().state
    rho = adm_of(psi, random_special_operator((2,) * 4, rng, max_cond=30))
    M = rho.matrix
    assert np.linalg.eigvalsh(M)[0] > 0
    assert np.real(psi.amp.conj() @ M @ psi.amp) == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(rho.eigenvalues, np.linalg.eigvalsh(M)[::-1], atol=1e-10)
    E = monotones(rho).E
    assert E[0] == pytest.approx(np.trace(M).real) and E[-1] == pytest.approx(rho.lambda_min)
    assert np.all(np.diff(E) <= 1e-12) and np.all(E > 0)


def test_conjugation_is_isospectral(rng):
    psi = crit4().state
    rho = adm_of(psi, random_special_operator((2,) * 4, rng, max_cond=30))
    for U in klein_stabilizer():
        assert np.allclose(monotones(rho.conjugated(U)).E, monotones(rho).E, atol=1e-12)
        assert rho.conjugated(U).target().equiv(rho.target())


def test_bipartite_reduction(rng):
    # ADM of A (x) I on the maximally entangled state, with Hermitian A, is d * rho_r (x) I
    d = 3
    psi = max_entangled(d)
    B = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    A = B @ B.conj().T + np.eye(d)
    rho = adm_of(psi, LocalOperator([A, np.eye(d)]))
    rho_r = reduced_density(rho.target(), 0)
    assert np.allclose(rho.matrix, d * np.kron(rho_r, np.eye(d)), atol=1e-9)


def test_monotone_examples():
    assert np.array_equal(monotones(np.eye(16)).E, 17 - np.arange(1, 17))
    assert np.allclose(monotones(np.array([0.6, 0.6, 0.4, 0.4])).E, [2, 1.4, 0.8, 0.4])
    assert np.allclose(monotones(np.array([4, 1]) / 2.5).E, [2, 0.4])


def test_bipartite_adm_spectrum():
    # under the <psi|rho|psi> = 1 normalization the sqrt(0.6)/sqrt(0.4) ADM has spectrum 2 * {0.6, 0.6, 0.4, 0.4}
    psi = max_entangled(2)
    rho = adm_of(psi, LocalOperator([np.diag(np.sqrt([0.6, 0.4])), np.eye(2)]))
    assert rho.target().equiv(schmidt_state([0.6, 0.4]))
    assert np.allclose(monotones(rho).E, 2 * np.array([2, 1.4, 0.8, 0.4]))


def test_majorization_examples():
    assert majorizes(np.array([0.6, 0.25, 0.15]), np.array([0.5, 0.3, 0.2]))
    r = majorizes(np.array([0.4, 0.3, 0.3]), np.array([0.5, 0.5, 0.0]))
    assert not r and "partial sum 1" in r.reason
    rho = np.diag([0.7, 0.2, 0.1])
    assert majorizes(rho, rho)


def test_majorization_trace_mismatch():
    r = majorizes(np.array([1.0, 0.5]), np.array([0.5, 0.5]))
    assert not r.holds and "trace" in r.reason


def test_unitary_stab_test():
    psi = crit4().state
    k = klein_stabilizer()
    assert unitary_stab_test(np.eye(16), k)
    assert not unitary_stab_test(adm_of(psi, on_party(np.diag([2, 0.5]))), k)
    assert unitary_stab_test(adm_of(psi, LocalOperator([3 * np.eye(2)] + [np.eye(2)] * 3)), k)
    with pytest.raises(NonUnitaryStabilizer):
        unitary_stab_test(np.eye(16), StabilizerGroup([on_party(np.diag([2, 0.5]))]))
