"""Deterministic and ensemble SEP-convertibility decisions within one orbit."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import nnls

from .adm import adm_of, majorizes
from .errors import (
    InconsistentEnsemble,
    InvalidStabilizer,
    NonUnitaryStabilizer,
    ShapeMismatch,
)
from .stabilizer import (
    GHZ_H,
    TorusStabilizer,
    StabilizerGroup,
    ghz_t0_twirl,
    twirl,
)
from .states import ghz
from .tensor_core import LocalOperator, PureState, apply_raw, compose, reduced_density

FEAS_TOL = 1e-8
MARGINAL_TOL = 1e-6
FIXED_POINT_TOL = 1e-9
STAB_TOL = 1e-8


def _vec(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M)
    return np.concatenate([M.real.ravel(), M.imag.ravel()])


def simplex_nnls(
    columns: Sequence[np.ndarray],
    target: np.ndarray,
    groups: Sequence[Sequence[int]] | None = None,
    masses: Sequence[float] | None = None,
) -> tuple[np.ndarray, float]:
    """Nonnegative weights ``p`` with fixed group sums minimizing ``||sum p_i C_i - target||_F``.

    Matrix equality is realified (real and imaginary parts of every entry) and
    each group-sum constraint is appended as a heavily weighted row.  Returns
    the weights, renormalized to the exact group masses, and the Frobenius
    residual recomputed from them.
    """
    n = len(columns)
    if groups is None:
        groups, masses = [list(range(n))], [1.0]
    A = np.stack([_vec(C) for C in columns], axis=1)
    b = _vec(target)
    w = 1e4 * max(1.0, float(np.abs(A).max(initial=0.0)), float(np.abs(b).max(initial=0.0)))
    rows = np.zeros((len(groups), n))
    for r, idx in enumerate(groups):
        rows[r, list(idx)] = w
    A_aug = np.vstack([A, rows])
    b_aug = np.concatenate([b, w * np.asarray(masses, dtype=float)])
    p, _ = nnls(A_aug, b_aug, maxiter=max(50 * n, 1000))
    for idx, mass in zip(groups, masses):
        idx = list(idx)
        s = p[idx].sum()
        if s > 0:
            p[idx] *= mass / s
    residual = float(np.linalg.norm(A @ p - b))
    return p, residual


@dataclass(frozen=True)
class TransformationVerdict:
    feasible: bool | None
    p: np.ndarray | None
    residual: float
    method: str
    twirl_residual: float | None = None
    marginal: bool = False
    note: str = ""


def _require_unitary(psi: PureState, stab: StabilizerGroup) -> None:
    if psi.shape.dims != stab.shape.dims:
        raise ShapeMismatch(f"shape mismatch: {psi.shape.dims} vs {stab.shape.dims}")
    if not stab.is_unitary:
        raise NonUnitaryStabilizer("finite unitary stabilizer required; unitarize it first")
    res = max(float(np.linalg.norm(apply_raw(S, psi.amp) - psi.amp)) for S in stab)
    if res > STAB_TOL:
        raise InvalidStabilizer(f"group does not stabilize the representative (residual {res:.2e})")


def _clean(p: np.ndarray) -> np.ndarray:
    p = np.where(p < 1e-12, 0.0, p)
    s = p.sum()
    return p / s if s > 0 else p


def check_deterministic(
    psi: PureState,
    stab: StabilizerGroup,
    g1: LocalOperator,
    g2: LocalOperator,
    tol: float = FEAS_TOL,
    fast_paths: bool = True,
) -> TransformationVerdict:
    """Can ``g1 psi`` be converted to ``g2 psi`` with certainty by separable operations?

    Looks for a distribution ``p`` over the stabilizer with
    ``sum_k p_k U_k^dag rho2 U_k = rho1``.  With ``fast_paths`` the twirl
    necessary condition is checked first (a failure already bounds the best
    residual from below, since twirling is a contraction), and a twirl-invariant
    ``rho1`` is settled by the uniform distribution.
    """
    _require_unitary(psi, stab)
    rho1, rho2 = adm_of(psi, g1), adm_of(psi, g2)
    R1 = rho1.matrix
    tw1, tw2 = twirl(stab, R1), twirl(stab, rho2.matrix)
    tw_res = float(np.linalg.norm(tw1 - tw2))
    if fast_paths and tw_res > tol:
        return TransformationVerdict(
            False, None, tw_res, "twirl-necessary-failed", tw_res, tw_res <= MARGINAL_TOL,
            "twirled ADMs differ; residual is a lower bound on the best achievable",
        )
    cols = [rho2.conjugated(U).matrix for U in stab]
    if fast_paths and np.linalg.norm(tw1 - R1) <= FIXED_POINT_TOL:
        p = np.full(stab.m, 1.0 / stab.m)
        res = float(np.linalg.norm(sum(pk * C for pk, C in zip(p, cols)) - R1))
        return TransformationVerdict(res <= tol, p, res, "twirl-sufficient", tw_res, tol < res <= MARGINAL_TOL)
    p, res = simplex_nnls(cols, R1)
    p = _clean(p)
    res = float(np.linalg.norm(sum(pk * C for pk, C in zip(p, cols)) - R1))
    return TransformationVerdict(res <= tol, p, res, "lp", tw_res, tol < res <= MARGINAL_TOL)


def kraus_operators(
    psi: PureState,
    stab: StabilizerGroup,
    g1: LocalOperator,
    g2: LocalOperator,
    p: Sequence[float],
    cutoff: float = 1e-12,
) -> list[LocalOperator]:
    """``M_k = (||g1 psi|| / ||g2 psi||) sqrt(p_k) g2 U_k g1^{-1}`` for every ``p_k > cutoff``."""
    n1 = np.linalg.norm(apply_raw(g1, psi.amp))
    n2 = np.linalg.norm(apply_raw(g2, psi.amp))
    g1inv = g1.inverse()
    out = []
    for pk, U in zip(p, stab):
        if pk > cutoff:
            out.append(compose(compose(g2, U), g1inv).scaled(n1 / n2 * np.sqrt(pk)))
    return out


@dataclass(frozen=True)
class EnsembleSpec:
    targets: tuple[tuple[float, LocalOperator], ...]

    def __post_init__(self):
        targets = tuple((float(p), g) for p, g in self.targets)
        if not targets:
            raise InconsistentEnsemble("ensemble is empty")
        probs = np.array([p for p, _ in targets])
        if np.any(probs < 0):
            raise InconsistentEnsemble("negative probability in ensemble")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise InconsistentEnsemble(f"probabilities sum to {probs.sum():.12g}, not 1")
        object.__setattr__(self, "targets", targets)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for p, _ in self.targets])


@dataclass(frozen=True)
class EnsembleVerdict:
    feasible: bool | None
    P: np.ndarray | None
    """``P[j, k]``: weight of stabilizer element ``k`` towards target ``j``"""
    residual: float
    method: str
    twirl_residual: float
    marginal: bool = False


def check_ensemble(
    psi: PureState,
    stab: StabilizerGroup,
    g: LocalOperator,
    ens: EnsembleSpec,
    tol: float = FEAS_TOL,
    fast_paths: bool = True,
) -> EnsembleVerdict:
    """Can ``g psi`` be converted to target ``j`` with probability ``p_j``?"""
    _require_unitary(psi, stab)
    rho = adm_of(psi, g)
    R = rho.matrix
    targets = [(pj, adm_of(psi, gj)) for pj, gj in ens.targets]
    tw = twirl(stab, R)
    tw_mix = sum(pj * twirl(stab, rj.matrix) for pj, rj in targets)
    tw_res = float(np.linalg.norm(tw - tw_mix))
    J, m = len(targets), stab.m
    if fast_paths and tw_res > tol:
        return EnsembleVerdict(False, None, tw_res, "twirl-necessary-failed", tw_res, tw_res <= MARGINAL_TOL)
    cols = [rj.conjugated(U).matrix for _, rj in targets for U in stab]
    if fast_paths and np.linalg.norm(tw - R) <= FIXED_POINT_TOL:
        P = np.repeat(ens.probabilities[:, None] / m, m, axis=1)
    else:
        groups = [range(j * m, (j + 1) * m) for j in range(J)]
        flat, _ = simplex_nnls(cols, R, groups, ens.probabilities)
        P = np.where(flat < 1e-12, 0.0, flat).reshape(J, m)
        for j in range(J):
            s = P[j].sum()
            if s > 0:
                P[j] *= ens.probabilities[j] / s
    res = float(np.linalg.norm(sum(w * C for w, C in zip(P.ravel(), cols)) - R))
    method = "twirl-sufficient" if fast_paths and np.linalg.norm(tw - R) <= FIXED_POINT_TOL else "lp"
    return EnsembleVerdict(res <= tol, P, res, method, tw_res, tol < res <= MARGINAL_TOL)


@dataclass(frozen=True)
class BipartiteVerdict:
    feasible: bool
    method: str
    source_spectrum: np.ndarray
    target_spectrum: np.ndarray
    reason: str


def schmidt_spectrum(s: PureState) -> np.ndarray:
    return np.sort(np.clip(np.linalg.eigvalsh(reduced_density(s, 0)), 0, None))[::-1]


def check_bipartite(psi1: PureState, psi2: PureState, tol: float = FEAS_TOL, rank_tol: float = 1e-10) -> BipartiteVerdict:
    """Deterministic conversion of bipartite pure states decided by majorization of Schmidt spectra."""
    dims = psi1.shape.dims
    if len(dims) != 2 or dims[0] != dims[1] or psi2.shape.dims != dims:
        raise ShapeMismatch(f"need two states on C^d (x) C^d, got {dims} and {psi2.shape.dims}")
    l1, l2 = schmidt_spectrum(psi1), schmidt_spectrum(psi2)
    r1, r2 = int(np.sum(l1 > rank_tol)), int(np.sum(l2 > rank_tol))
    if r1 < r2:
        return BipartiteVerdict(False, "schmidt-rank", l1, l2, f"different SLOCC class: Schmidt rank {r1} cannot grow to {r2}")
    res = majorizes(l2, l1, tol=tol)
    return BipartiteVerdict(res.holds, "majorization", l1, l2, res.reason)


# --- three-qubit GHZ class -------------------------------------------------

_GHZ_BLOCK = [0, 7]


@dataclass(frozen=True)
class GhzVerdict:
    feasible: bool | None
    method: str
    residual: float
    certificate: tuple[tuple[float, LocalOperator], ...] = field(default=())
    """``(p_k, S_k)`` with ``S_k`` in the GHZ stabilizer and ``sum p_k S_k^dag rho2 S_k = rho1``"""

    @property
    def status(self) -> str:
        return {True: "feasible", False: "infeasible", None: "unknown"}[self.feasible]


def _torus_grid(n: int = 5) -> list[LocalOperator]:
    # exact quadrature for torus characters of degree <= 4 needs n > 4
    th = 2 * np.pi * np.arange(n) / n
    return [TorusStabilizer.element(a, b) for a in th for b in th]


def _positive_torus(u1: float, u2: float) -> LocalOperator:
    return TorusStabilizer.complex_element(np.exp(u1), np.exp(u2))


def _certificate_residual(cert, rho1: np.ndarray, rho2: np.ndarray) -> float:
    acc = np.zeros_like(rho1)
    for w, S in cert:
        M = S.matrix
        acc += w * (M.conj().T @ rho2 @ M)
    return float(np.linalg.norm(acc - rho1))


def check_ghz_class(
    g1: LocalOperator,
    g2: LocalOperator,
    tol: float = FEAS_TOL,
    log_range: float = 3.0,
    grid: int = 13,
) -> GhzVerdict:
    """SEP conversion ``g1 GHZ -> g2 GHZ`` inside the three-qubit GHZ class.

    1. direct search over the unitary part of the stabilizer (a certificate);
    2. the ``{000, 111}`` block of the torus-twirled condition, a necessary
       linear system in the two coset weights (failure certifies infeasibility);
    3. when ``rho1`` is torus invariant the twirled condition is also
       sufficient: search diagonal stabilizer elements on a log grid and expand
       the hit into an explicit finite certificate.
    Anything else is reported as unknown.
    """
    psi = ghz(3)
    if g1.shape.dims != (2, 2, 2) or g2.shape.dims != (2, 2, 2):
        raise ShapeMismatch("GHZ-class check needs three-qubit operators")
    R1, R2 = adm_of(psi, g1).matrix, adm_of(psi, g2).matrix
    H = GHZ_H.matrix

    torus = _torus_grid()
    unit = torus + [GHZ_H @ t for t in torus]
    cols = [S.matrix.conj().T @ R2 @ S.matrix for S in unit]
    p, res = simplex_nnls(cols, R1)
    if res <= tol:
        cert = tuple((float(pk), S) for pk, S in zip(p, unit) if pk > 1e-12)
        return GhzVerdict(True, "ghz-unitary-search", _certificate_residual(cert, R1, R2), cert)

    T1, T2, T2h = ghz_t0_twirl(R1), ghz_t0_twirl(R2), ghz_t0_twirl(H @ R2 @ H)
    blk = np.ix_(_GHZ_BLOCK, _GHZ_BLOCK)
    _, bres = simplex_nnls([T2[blk], T2h[blk]], T1[blk])
    if bres > tol:
        return GhzVerdict(False, "ghz-block-necessary", bres)

    if np.linalg.norm(T1 - R1) <= FIXED_POINT_TOL:
        us = np.linspace(-log_range, log_range, grid)
        diag_ops, cols = [], []
        for coset, base in ((0, T2), (1, T2h)):
            for u1 in us:
                for u2 in us:
                    d = _positive_torus(u1, u2)
                    D = d.matrix.conj().T @ d.matrix
                    diag_ops.append((coset, d))
                    cols.append(D @ base)
        p, tres = simplex_nnls(cols, T1)
        if tres <= tol:
            cert = []
            for pk, (coset, d) in zip(p, diag_ops):
                if pk <= 1e-12:
                    continue
                for t in torus:
                    S = d @ t
                    cert.append((float(pk) / len(torus), GHZ_H @ S if coset else S))
            cres = _certificate_residual(cert, R1, R2)
            if cres <= tol:
                return GhzVerdict(True, "ghz-torus-certificate", cres, tuple(cert))
        return GhzVerdict(None, "ghz-torus-search-exhausted", tres)
    return GhzVerdict(None, "ghz-necessary-only", bres)
