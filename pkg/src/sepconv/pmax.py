"""Maximum SEP conversion probability: exact cases, bounds and a PSD relaxation."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .adm import ADM, adm_of, monotones
from .errors import NonPositiveFactor, NonUnitaryStabilizer, ShapeMismatch
from .stabilizer import StabilizerGroup, twirl
from .tensor_core import HilbertShape, LocalOperator, PureState, as_shape

PSD_TOL = 1e-10
PSD_PROBE_TOL = 1e-9
PPT_TOL = 1e-9
LEMMA_TOL = 1e-12


def _psd_power(F: np.ndarray, power: float) -> np.ndarray:
    w, V = np.linalg.eigh(F)
    return (V * w**power) @ V.conj().T


@dataclass(frozen=True)
class SeparabilityVerdict:
    status: str
    """``separable-certified``, ``entangled-certified`` or ``unknown``"""
    detail: str
    certificate: dict = field(default_factory=dict)

    @property
    def separable(self) -> bool | None:
        return {"separable-certified": True, "entangled-certified": False}.get(self.status)


def lemma1_separability(M: LocalOperator, p: float) -> SeparabilityVerdict:
    """``I - p M`` for a product ``M`` of PSD factors is separable iff ``p <= 1/lambda_max(M)``.

    ``I - p M`` is diagonal in the product eigenbasis of ``M``, so the
    certificate is that basis together with the weights ``1 - p mu``.
    """
    bases, spectra = [], []
    for i, F in enumerate(M.factors):
        if np.linalg.norm(F - F.conj().T) > 1e-10:
            raise NonPositiveFactor(f"factor {i} is not Hermitian")
        w, V = np.linalg.eigh((F + F.conj().T) / 2)
        if w[0] < -1e-12:
            raise NonPositiveFactor(f"factor {i} has negative eigenvalue {w[0]:.3e}")
        bases.append(V)
        spectra.append(np.clip(w, 0, None))
    mu = np.ones(1)
    for w in spectra:
        mu = np.kron(mu, w)
    lam = float(mu.max())
    weights = 1.0 - p * mu
    cert = {"lambda_max": lam, "product_basis": bases, "weights": weights}
    if lam == 0 or p <= 1.0 / lam + LEMMA_TOL:
        return SeparabilityVerdict("separable-certified", "lemma1: diagonal in a product eigenbasis", cert)
    return SeparabilityVerdict("entangled-certified", f"lemma1: p = {p:.6g} exceeds 1/lambda_max = {1 / lam:.6g} (not PSD)", cert)


class DeficitOperator:
    """``rho1 - sum_k p_k C_k`` with the ``C_k`` kept as ADMs (product form)."""

    def __init__(self, rho1: ADM, terms: Sequence[ADM], p: Sequence[float]):
        p = np.asarray(p, dtype=float)
        if len(terms) != p.size:
            raise ShapeMismatch("one weight per term required")
        if np.any(p < -1e-12) or p.sum() > 1 + 1e-9:
            raise ValueError("weights must be nonnegative with sum at most 1")
        self.rho1, self.terms, self.p = rho1, list(terms), np.clip(p, 0, None)
        self.shape: HilbertShape = rho1.shape
        M = rho1.matrix - sum(pk * C.matrix for pk, C in zip(self.p, self.terms))
        self.matrix = (M + M.conj().T) / 2

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, dims) -> "DeficitOperator":
        obj = cls.__new__(cls)
        obj.rho1, obj.terms, obj.p = None, [], np.zeros(0)
        obj.shape = as_shape(dims)
        M = np.asarray(matrix, dtype=complex)
        if M.shape != (obj.shape.D, obj.shape.D):
            raise ShapeMismatch(f"matrix shape {M.shape} does not match dims {obj.shape.dims}")
        obj.matrix = (M + M.conj().T) / 2
        return obj

    def single_term(self) -> tuple[float, ADM] | None:
        """``(t, C)`` when every term with positive weight is the same matrix."""
        idx = [k for k, pk in enumerate(self.p) if pk > 1e-14]
        if self.rho1 is None or not idx:
            return None
        C0 = self.terms[idx[0]].matrix
        if any(np.linalg.norm(self.terms[k].matrix - C0) > 1e-12 for k in idx[1:]):
            return None
        return float(self.p[idx].sum()), self.terms[idx[0]]


def partial_transpose(M: np.ndarray, dims: Sequence[int], parties: Sequence[int]) -> np.ndarray:
    n = len(dims)
    T = M.reshape(tuple(dims) * 2)
    perm = list(range(2 * n))
    for i in parties:
        perm[i], perm[n + i] = n + i, i
    D = int(np.prod(dims))
    return T.transpose(perm).reshape(D, D)


def _bipartitions(n: int):
    # one side of every cut: the side without party 0
    for r in range(1, n):
        yield from combinations(range(1, n), r)


def separability_probe(
    delta: DeficitOperator | np.ndarray, dims=None, psd_tol: float = PSD_TOL
) -> SeparabilityVerdict:
    """Certify separability or entanglement of a deficit operator where cheap tests allow."""
    if not isinstance(delta, DeficitOperator):
        delta = DeficitOperator.from_matrix(delta, dims)
    M, shape = delta.matrix, delta.shape
    w = np.linalg.eigvalsh(M)
    if w[0] < -psd_tol:
        return SeparabilityVerdict("entangled-certified", "not positive semidefinite", {"min_eigenvalue": float(w[0])})
    if np.abs(w).max(initial=0.0) <= PSD_TOL:
        return SeparabilityVerdict("separable-certified", "zero operator", {})
    single = delta.single_term()
    if single is not None:
        t, C = single
        r1 = delta.rho1
        # rho1 - t C = rho1^{1/2} (I - t M) rho1^{1/2} with M a product of PSD factors
        scale_c = r1.norm_sq / C.norm_sq
        facs = []
        for F1, FC in zip(r1.local_factors, C.local_factors):
            R = _psd_power(F1, -0.5)
            facs.append(R @ FC @ R)
        verdict = lemma1_separability(LocalOperator(facs), t * scale_c)
        return SeparabilityVerdict(verdict.status, "conjugated " + verdict.detail, verdict.certificate)
    dims = shape.dims
    for S in _bipartitions(shape.n):
        ev = float(np.linalg.eigvalsh(partial_transpose(M, dims, S))[0])
        if ev < -PPT_TOL:
            return SeparabilityVerdict(
                "entangled-certified", f"negative partial transpose on parties {list(S)}",
                {"parties": list(S), "min_eigenvalue": ev},
            )
    if shape.n == 2 and shape.D <= 6 and min(dims) <= 2:
        return SeparabilityVerdict("separable-certified", "PPT is sufficient for 2x2 and 2x3", {})
    return SeparabilityVerdict("unknown", "PSD and PPT across all cuts; no certificate available", {})


def pmax_to_critical(rho1: ADM) -> float:
    """Exact conversion probability to the critical representative: ``lambda_min(rho1)``."""
    return float(min(1.0, rho1.lambda_min))


def teleportation_monotone(rho) -> float:
    """``-log2 lambda_max(rho)``."""
    lam = rho.lambda_max if isinstance(rho, ADM) else float(np.linalg.eigvalsh(np.asarray(rho))[-1])
    return float(-np.log2(lam))


def sigma_p(rho1: ADM, rho2: ADM, stab: StabilizerGroup, p: float) -> np.ndarray:
    """``rho1 - p G(rho2)``, the twirled deficit for a twirl-invariant source."""
    return rho1.matrix - p * twirl(stab, rho2.matrix)


@dataclass(frozen=True)
class PmaxBounds:
    lower: float
    upper_vidal: float
    upper_twirl: float
    upper_psd: float
    """certified upper bound on the PSD relaxation (hence on ``P_max``)"""
    exact: float | None = None
    exact_reason: str = ""
    lower_index: int = 0
    """stabilizer element realizing ``lower``"""
    psd_primal: float = 0.0
    """total weight of ``psd_p``, whose deficit operator is PSD"""
    psd_p: np.ndarray | None = None
    separability: SeparabilityVerdict | None = None
    history: np.ndarray | None = None
    """per iteration: (achievable t, certified upper t) of the relaxation solver"""

    @property
    def min_upper(self) -> float:
        return min(self.upper_vidal, self.upper_twirl, self.upper_psd)


@dataclass(frozen=True)
class Relaxation:
    t_primal: float
    t_dual: float
    q: np.ndarray
    history: np.ndarray
    iterations: int


def psd_relaxation(B: np.ndarray, iters: int = 500, gap: float = 1e-9, top: int = 3) -> Relaxation:
    """``max sum p`` subject to ``sum_k p_k B_k <= I``, ``p >= 0`` (uncapped).

    By homogeneity the optimum is ``1 / f*`` with
    ``f* = min_{q in simplex} lambda_max(sum_k q_k B_k)``, a convex problem.
    Kelley cutting planes: every eigenvector ``v`` gives the linear minorant
    ``q -> sum_k q_k <v|B_k|v>``; the LP over the collected cuts bounds ``f*``
    from below while evaluated points bound it from above.
    """
    m = B.shape[0]
    cuts: list[np.ndarray] = []

    def evaluate(q):
        w, V = np.linalg.eigh(np.tensordot(q, B, axes=1))
        for j in range(1, min(top, len(w)) + 1):
            v = V[:, -j]
            cuts.append(np.real(np.einsum("i,kij,j->k", v.conj(), B, v)))
        return float(w[-1])

    best, best_q = np.inf, None
    for q in [np.eye(m)[k] for k in range(m)] + [np.full(m, 1.0 / m)]:
        f = evaluate(q)
        if f < best:
            best, best_q = f, q
    lb, hist, it = 0.0, [], 0
    c = np.r_[np.zeros(m), 1.0]
    A_eq, bounds = np.r_[np.ones(m), 0.0][None], [(0, None)] * m + [(None, None)]
    for it in range(1, iters + 1):
        C = np.array(cuts)
        res = linprog(c, A_ub=np.c_[C, -np.ones(len(C))], b_ub=np.zeros(len(C)),
                      A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs")
        if res.status != 0:
            break
        lb = max(lb, float(res.x[m]))
        q = np.clip(res.x[:m], 0, None)
        q /= q.sum()
        f = evaluate(q)
        if f < best:
            best, best_q = f, q
        hist.append((1.0 / best, 1.0 / lb if lb > 0 else np.inf))
        if lb > 0 and 1.0 / lb - 1.0 / best <= gap:
            break
    t_dual = 1.0 / lb if lb > 0 else np.inf
    return Relaxation(1.0 / best, t_dual, best_q, np.array(hist).reshape(-1, 2), it)


def pmax_bounds(
    psi: PureState,
    stab: StabilizerGroup,
    g1: LocalOperator,
    g2: LocalOperator,
    iters: int = 500,
) -> PmaxBounds:
    """Bracket ``P_max(g1 psi -> g2 psi)``.

    ``lower`` is achievable (a single stabilizer element with the largest
    admissible weight).  ``upper_vidal`` and ``upper_twirl`` are closed forms;
    ``upper_psd`` relaxes separability of the deficit operator to positivity.
    """
    if not stab.is_unitary:
        raise NonUnitaryStabilizer("P_max bounds need a unitary stabilizer")
    rho1, rho2 = adm_of(psi, g1), adm_of(psi, g2)
    R1 = rho1.matrix
    terms = [rho2.conjugated(U) for U in stab]
    m = len(terms)

    inv_half = [_psd_power(F, -0.5) for F in rho1.local_factors]
    ratios = []
    for C in terms:
        lam = rho1.norm_sq / C.norm_sq
        for R, FC in zip(inv_half, C.local_factors):
            lam *= np.linalg.eigvalsh(R @ FC @ R)[-1]
        ratios.append(1.0 / lam)
    k_best = int(np.argmax(ratios))
    lower = float(min(1.0, ratios[k_best]))

    E1, E2 = monotones(rho1).E, monotones(rho2).E
    upper_vidal = float(min(1.0, np.min(E1 / E2)))
    G1, G2 = twirl(stab, R1), twirl(stab, rho2.matrix)
    upper_twirl = float(min(1.0, np.linalg.eigvalsh(G1)[-1] / np.linalg.eigvalsh(G2)[-1]))

    R = _kron_inv_half(inv_half, rho1.norm_sq)
    history = None
    if np.linalg.norm(G1 - R1) <= 1e-9:
        # twirl-invariant source: twirling any PSD deficit gives the uniform one, so uniform q is optimal
        A = R @ G2 @ R
        t_star = 1.0 / float(np.linalg.eigvalsh((A + A.conj().T) / 2)[-1])
        t_primal, t_dual, q = t_star, t_star, np.full(m, 1.0 / m)
    else:
        B = np.stack([R @ C.matrix @ R for C in terms])
        B = (B + np.conj(np.transpose(B, (0, 2, 1)))) / 2
        rel = psd_relaxation(B, iters=iters)
        t_primal, t_dual, q, history = rel.t_primal, rel.t_dual, rel.q, rel.history
    # the single-element certificate behind ``lower`` is itself relaxation-feasible
    if lower >= t_primal:
        t_primal, q = lower, np.eye(m)[k_best]
    t_primal = min(1.0, t_primal)
    upper_psd = float(min(1.0, max(t_dual, t_primal)))
    p = q * t_primal

    delta = DeficitOperator(rho1, terms, p)
    sep = separability_probe(delta, psd_tol=PSD_PROBE_TOL)
    exact, reason = None, ""
    if np.linalg.norm(rho2.matrix - np.eye(rho2.shape.D)) <= 1e-9:
        exact, reason = pmax_to_critical(rho1), "critical-target"
    elif sep.status == "separable-certified" and upper_psd - t_primal <= 1e-6:
        exact, reason = t_primal, "separable-optimum"
    elif lower >= min(upper_vidal, upper_twirl, upper_psd) - 1e-9:
        exact, reason = lower, "bounds-collapse"
    return PmaxBounds(
        lower, upper_vidal, upper_twirl, upper_psd, exact, reason, k_best,
        float(t_primal), p, sep, history,
    )


def _kron_inv_half(inv_half, norm_sq) -> np.ndarray:
    """``rho1^{-1/2}`` assembled from its factors."""
    out = np.ones((1, 1))
    for R in inv_half:
        out = np.kron(out, R)
    return out * np.sqrt(norm_sq)
