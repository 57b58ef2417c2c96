import numpy as np
import pytest

from sepconv.critical import check_critical, kempf_ness_probe, normalize_to_critical
from sepconv.errors import NoConvergence, NotCritical, SingularReduction
from sepconv.fourqubit import make_crit_state, u_basis
from sepconv.states import bell, ghz, max_entangled, schmidt_state, w_state
from sepconv.tensor_core import PureState, apply, random_special_operator, random_state

from oracles import CRIT_Z


def test_examples():
    assert check_critical(ghz(3)).is_critical
    w = check_critical(w_state(3))
    assert not w.is_critical
    # rho_0(W) = diag(2/3, 1/3)
    assert w.deviations[0] == pytest.approx(np.linalg.norm(np.diag([2 / 3, 1 / 3]) - np.eye(2) / 2))
    assert check_critical(u_basis()[0]).is_critical


def test_report_consistency(rng):
    r = check_critical(random_state((2, 2, 2), rng), tol=1e-3)
    assert r.is_critical == (r.max_deviation <= 1e-3)
    assert r.max_deviation == max(r.deviations)


@pytest.mark.parametrize("state", [ghz(3), bell(), max_entangled(3)], ids=["ghz", "bell", "d3"])
def test_norm_minimality(state):
    assert kempf_ness_probe(state, trials=100, seed=1) >= 1 - 1e-9


def test_probe_with_identity_is_one():
    assert kempf_ness_probe(ghz(3), trials=0) == pytest.approx(1.0, abs=1e-15)


def test_probe_refuses_non_critical():
    with pytest.raises(NotCritical):
        kempf_ness_probe(w_state(3))


def test_normalize_critical_input_is_fixed():
    res = normalize_to_critical(ghz(3))
    assert res.sweeps <= 1
    assert res.state.equiv(ghz(3))


def test_normalize_schmidt_to_bell():
    res = normalize_to_critical(schmidt_state([0.6, 0.4]))
    assert res.state.equiv(bell(), 1e-8)
    A, B = res.g.factors
    for F in (A, B):
        assert abs(F[0, 1]) < 1e-9 and abs(F[1, 0]) < 1e-9
    # only the product of the two diagonal filters is fixed: diag(0.6^{-1/2}, 0.4^{-1/2}) up to scale
    ratio = (A[0, 0] * B[0, 0]) / (A[1, 1] * B[1, 1])
    assert abs(ratio) == pytest.approx(np.sqrt(0.4 / 0.6), rel=1e-8)


def test_normalize_w_diverges():
    with pytest.raises(NoConvergence):
        normalize_to_critical(w_state(3), max_iters=1000)


def test_singular_reduction():
    with pytest.raises(SingularReduction):
        normalize_to_critical(PureState.basis((2, 2), (0, 0)))


def test_normalize_random_orbit_point(rng):
    g = random_special_operator((2, 2, 2), rng, max_cond=20)
    start, _ = apply(g, ghz(3))
    res = normalize_to_critical(start)
    assert check_critical(res.state).is_critical
    img, _ = apply(res.g, start)
    assert img.equiv(res.state, 1e-8)
    assert np.all(np.diff(res.norms) <= 1e-12)


def _pair_spectra(s):
    n = s.shape.n
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            rest = [k for k in range(n) if k not in (i, j)]
            t = np.transpose(s.tensor, [i, j] + rest).reshape(4, -1)
            out.append(np.linalg.eigvalsh(t @ t.conj().T))
    return np.array(out)


@pytest.mark.parametrize("reference", [ghz(3), make_crit_state(CRIT_Z).state], ids=["ghz", "crit4"])
def test_random_orders_reach_the_same_unitary_orbit(reference, rng):
    g = random_special_operator(reference.shape, rng, max_cond=20)
    start, _ = apply(g, reference)
    a = normalize_to_critical(start, seed=1)
    b = normalize_to_critical(start, seed=2)
    # two-party spectra are local-unitary invariants
    assert np.allclose(_pair_spectra(a.state), _pair_spectra(reference), atol=1e-7)
    assert np.allclose(_pair_spectra(b.state), _pair_spectra(reference), atol=1e-7)
