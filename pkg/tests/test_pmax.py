import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepconv.adm import adm_of
from sepconv.errors import NonPositiveFactor, NonUnitaryStabilizer
from sepconv.fourqubit import klein_stabilizer
from sepconv.pmax import (
    DeficitOperator,
    lemma1_separability,
    partial_transpose,
    pmax_bounds,
    pmax_to_critical,
    psd_relaxation,
    separability_probe,
    teleportation_monotone,
)
from sepconv.sep_decide import check_deterministic
from sepconv.stabilizer import StabilizerGroup
from sepconv.states import max_entangled
from sepconv.tensor_core import LocalOperator, random_special_operator

from oracles import crit4, forward_instance, on_party, psd_relaxation_cvxpy

EYE4 = LocalOperator.identity((2,) * 4)
DIAG = np.diag([2, 0.5])


@pytest.mark.parametrize("n", [1, 2, 4])
def test_lemma1_examples(n):
    eye = LocalOperator.identity((2,) * n)
    assert lemma1_separability(eye, 1.0).separable
    M = LocalOperator([np.diag([4, 0.25])] + [np.eye(2)] * (n - 1))
    v = lemma1_separability(M, 0.25)
    assert v.separable and v.certificate["lambda_max"] == pytest.approx(4)
    assert lemma1_separability(M, 0.3).separable is False


def test_lemma1_certificate_reconstructs(rng):
    facs = []
    for _ in range(3):
        A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        facs.append(A @ A.conj().T)
    M = LocalOperator(facs)
    v = lemma1_separability(M, 0.5 / lemma1_separability(M, 0).certificate["lambda_max"])
    V = np.ones((1, 1))
    for B in v.certificate["product_basis"]:
        V = np.kron(V, B)
    rebuilt = V @ np.diag(v.certificate["weights"]) @ V.conj().T
    assert np.allclose(rebuilt, np.eye(8) - 0.5 / v.certificate["lambda_max"] * M.matrix)
    assert np.all(v.certificate["weights"] >= 0)


def test_lemma1_rejects_indefinite():
    with pytest.raises(NonPositiveFactor):
        lemma1_separability(LocalOperator([np.diag([1.0, -1.0])]), 0.1)


def test_probe_zero():
    v = separability_probe(np.zeros((4, 4)), dims=(2, 2))
    assert v.status == "separable-certified"


def test_probe_lemma_route(rng):
    psi = crit4().state
    rho1 = adm_of(psi, random_special_operator((2,) * 4, rng, max_cond=10))
    ident = adm_of(psi, EYE4)
    d = DeficitOperator(rho1, [ident], [rho1.lambda_min])
    v = separability_probe(d)
    assert v.status == "separable-certified" and "lemma1" in v.detail
    over = DeficitOperator(rho1, [ident], [min(1.0, 1.01 * rho1.lambda_min)])
    assert separability_probe(over).separable is False


def _werner(p):
    phi = max_entangled(2).projector()
    return p * phi + (1 - p) * np.eye(4) / 4


def test_probe_werner():
    v = separability_probe(_werner(0.9), dims=(2, 2))
    assert v.status == "entangled-certified" and v.certificate["min_eigenvalue"] < 0
    assert separability_probe(_werner(0.2), dims=(2, 2)).separable


def test_probe_not_psd():
    v = separability_probe(-np.eye(4), dims=(2, 2))
    assert v.status == "entangled-certified" and "semidefinite" in v.detail


def test_probe_unknown_for_ppt_multipartite():
    # a PSD product-diagonal operator passes PPT on every cut but has no single-term structure
    M = np.diag(np.linspace(1, 2, 8))
    assert separability_probe(M, dims=(2, 2, 2)).status == "unknown"


def test_partial_transpose_involution(rng):
    A = rng.normal(size=(12, 12))
    T = partial_transpose(A, (2, 3, 2), [1, 2])
    assert np.allclose(partial_transpose(T, (2, 3, 2), [1, 2]), A)


def test_pmax_to_critical_examples():
    psi = crit4().state
    assert pmax_to_critical(adm_of(psi, EYE4)) == pytest.approx(1.0)
    assert pmax_to_critical(adm_of(psi, on_party(DIAG))) == pytest.approx(2 / 17, abs=1e-12)
    b = adm_of(max_entangled(2), LocalOperator([np.diag(np.sqrt([0.6, 0.4])), np.eye(2)]))
    assert pmax_to_critical(b) == pytest.approx(0.8)


def test_teleportation_examples():
    assert teleportation_monotone(np.eye(4)) == pytest.approx(0.0)
    b = adm_of(max_entangled(2), LocalOperator([np.diag(np.sqrt([0.6, 0.4])), np.eye(2)]))
    assert teleportation_monotone(b) == pytest.approx(-np.log2(1.2))
    assert teleportation_monotone(np.diag([2.0, 0.5])) == pytest.approx(-1.0)


def test_critical_target_bounds(rng):
    psi = crit4().state
    g1 = random_special_operator((2,) * 4, rng, max_cond=10)
    b = pmax_bounds(psi, klein_stabilizer(), g1, EYE4)
    lam = pmax_to_critical(adm_of(psi, g1))
    assert b.exact_reason == "critical-target" and b.exact == pytest.approx(lam, abs=1e-8)
    assert b.lower == pytest.approx(lam, abs=1e-8) and b.upper_psd == pytest.approx(lam, abs=1e-8)


def test_same_state_is_certain(rng):
    g = random_special_operator((2,) * 4, rng, max_cond=10)
    b = pmax_bounds(crit4().state, klein_stabilizer(), g, g)
    assert b.exact == pytest.approx(1.0)
    for v in (b.lower, b.upper_vidal, b.upper_twirl, b.upper_psd):
        assert v == pytest.approx(1.0, abs=1e-9)


def test_commuting_pair_lower_bound_vs_eigenvalue_ratio():
    # for commuting rho1, rho2: 1/lambda_max(rho1^-1 rho2) = min(a/b) <= max(a)/max(b), strictly here
    psi = crit4().state
    g1 = on_party(np.diag([1 / 1.5, 1.5]))
    g2 = LocalOperator([DIAG, DIAG, np.eye(2), np.eye(2)])
    trivial = StabilizerGroup([EYE4])
    b = pmax_bounds(psi, trivial, g1, g2)
    r1, r2 = adm_of(psi, g1), adm_of(psi, g2)
    direct = 1 / np.max(np.diag(r2.matrix).real / np.diag(r1.matrix).real)
    assert b.lower == pytest.approx(direct, abs=1e-12)
    assert b.lower < r1.lambda_max / r2.lambda_max - 1e-3


def _random_pair(rng):
    psi = crit4().state
    g1 = random_special_operator((2,) * 4, rng, max_cond=6)
    g2 = random_special_operator((2,) * 4, rng, max_cond=6)
    return psi, g1, g2


def test_bound_ordering_on_random_pairs(rng):
    stab = klein_stabilizer()
    for _ in range(100):
        psi, g1, g2 = _random_pair(rng)
        b = pmax_bounds(psi, stab, g1, g2)
        assert 0 < b.lower <= 1
        assert b.lower <= b.upper_psd + 1e-6
        assert b.lower <= b.upper_vidal + 1e-6
        assert b.lower <= b.upper_twirl + 1e-6
        assert b.psd_primal <= b.upper_psd + 1e-12
        if b.exact is not None:
            assert b.lower - 1e-9 <= b.exact <= b.min_upper + 1e-9


def test_relaxation_history_monotone(rng):
    psi, g1, g2 = _random_pair(rng)
    b = pmax_bounds(psi, klein_stabilizer(), g1, g2)
    h = b.history
    assert h is not None and len(h) >= 1
    assert np.all(np.diff(h[:, 0]) >= -1e-15) and np.all(np.diff(h[:, 1]) <= 1e-15)
    assert np.all(h[:, 0] <= h[:, 1] + 1e-12)


def test_relaxation_matches_conic_solver(rng):
    stab = klein_stabilizer()
    for _ in range(4):
        psi, g1, g2 = _random_pair(rng)
        b = pmax_bounds(psi, stab, g1, g2)
        R1 = adm_of(psi, g1).matrix
        Cs = [adm_of(psi, g2).conjugated(U).matrix for U in stab]
        assert b.upper_psd == pytest.approx(psd_relaxation_cvxpy(R1, Cs), abs=1e-6)


def test_psd_relaxation_primal_feasible(rng):
    A = [rng.normal(size=(3, 3)) for _ in range(4)]
    B = np.stack([a @ a.T + 0.1 * np.eye(3) for a in A])
    rel = psd_relaxation(B)
    assert rel.t_dual - rel.t_primal <= 1e-8
    assert np.linalg.eigvalsh(np.eye(3) - rel.t_primal * np.tensordot(rel.q, B, axes=1))[0] >= -1e-10


@settings(max_examples=10)
@given(seed=st.integers(0, 2**32 - 1))
def test_lambda_max_along_feasible_instances(seed):
    # the direction that holds: a SEP-reachable target has the larger lambda_max
    rng = np.random.default_rng(seed)
    stab = klein_stabilizer()
    g1, g2, _ = forward_instance(stab, rng, party=int(rng.integers(4)))
    psi = crit4().state
    assert check_deterministic(psi, stab, g1, g2).feasible
    assert adm_of(psi, g1).lambda_max <= adm_of(psi, g2).lambda_max + 1e-8


def test_nonunitary_stabilizer_rejected():
    with pytest.raises(NonUnitaryStabilizer):
        pmax_bounds(crit4().state, StabilizerGroup([on_party(DIAG)]), EYE4, EYE4)
