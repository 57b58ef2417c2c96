"""Finite stabilizer groups, unitarization, twirling and the known stabilizer catalog."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .critical import check_critical
from .errors import (
    InvalidStabilizer,
    NonUnitaryStabilizer,
    ShapeMismatch,
    SingularDelta,
    UnknownCatalogEntry,
)
from .tensor_core import HilbertShape, LocalOperator, PureState, apply_raw

MAX_ORDER = 10_000
UNITARY_TOL = 1e-9
CLOSURE_TOL = 1e-8
STAB_TOL = 1e-8

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _phase_residual(P: np.ndarray, E: np.ndarray) -> float:
    """Relative distance between ``P`` and ``E`` after the best global phase."""
    c = np.vdot(E, P)
    phase = c / abs(c) if abs(c) > 0 else 1.0
    return float(np.linalg.norm(P - phase * E) / max(np.linalg.norm(P), 1e-300))


def _best_match(P: np.ndarray, mats: Sequence[np.ndarray], phase: bool) -> float:
    if phase:
        return min(_phase_residual(P, E) for E in mats)
    return min(float(np.linalg.norm(P - E) / max(np.linalg.norm(P), 1e-300)) for E in mats)


def _factor_unitarity(op: LocalOperator) -> float:
    return max(np.linalg.norm(A.conj().T @ A - np.eye(len(A))) for A in op.factors)


class StabilizerGroup:
    """A finite group of local operators given as an explicit element list."""

    def __init__(self, elements: Sequence[LocalOperator]):
        elements = tuple(elements)
        if not elements:
            raise ValueError("a group needs at least the identity")
        if len(elements) > MAX_ORDER:
            raise ValueError(f"group order {len(elements)} exceeds {MAX_ORDER}")
        shape = elements[0].shape
        for e in elements:
            if e.shape.dims != shape.dims:
                raise ShapeMismatch("all elements must act on the same space")
        self.shape: HilbertShape = shape
        self.elements = elements
        self.unitarity_residual = max(_factor_unitarity(e) for e in elements)
        self.is_unitary = self.unitarity_residual <= UNITARY_TOL

    @property
    def m(self) -> int:
        return len(self.elements)

    def __len__(self):
        return self.m

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self):
        return f"StabilizerGroup(m={self.m}, dims={self.shape.dims}, unitary={self.is_unitary})"

    def matrices(self) -> list[np.ndarray]:
        return [e.matrix for e in self.elements]

    def closure_residual(self) -> float:
        mats = self.matrices()
        worst = 0.0
        for A in mats:
            for B in mats:
                worst = max(worst, _best_match(A @ B, mats, phase=True))
        return worst

    def inverse_residual(self) -> float:
        mats = self.matrices()
        return max(_best_match(np.linalg.inv(A), mats, phase=True) for A in mats)

    def identity_residual(self) -> float:
        return _best_match(np.eye(self.shape.D), self.matrices(), phase=True)


@dataclass(frozen=True)
class StabilizerCheck:
    verified: bool
    residual: float
    """max over elements of ``||S psi - psi||`` (phase-strict)"""
    closure_residual: float
    inverse_residual: float
    identity_residual: float
    unitarity_residual: float
    critical_nonunitary: bool
    """True when the reference is critical but the group is not unitary."""


def verify_stabilizer(psi: PureState, cand: StabilizerGroup) -> StabilizerCheck:
    if psi.shape.dims != cand.shape.dims:
        raise ShapeMismatch(f"shape mismatch: {psi.shape.dims} vs {cand.shape.dims}")
    residual = max(float(np.linalg.norm(apply_raw(S, psi.amp) - psi.amp)) for S in cand)
    clos = cand.closure_residual()
    inv = cand.inverse_residual()
    ident = cand.identity_residual()
    # a finite stabilizer of a critical state is unitary
    crit_nonu = (not cand.is_unitary) and check_critical(psi).is_critical
    ok = (
        residual <= STAB_TOL
        and clos <= CLOSURE_TOL
        and inv <= CLOSURE_TOL
        and ident <= CLOSURE_TOL
        and not crit_nonu
    )
    return StabilizerCheck(ok, residual, clos, inv, ident, cand.unitarity_residual, crit_nonu)


def generate_group(generators: Sequence[LocalOperator], tol: float = 1e-9) -> StabilizerGroup:
    """Close a set of generators under multiplication (phase-strict comparison)."""
    gens = list(generators)
    ident = LocalOperator.identity(gens[0].shape)
    elems = [ident]
    mats = [ident.matrix]
    frontier = [ident]
    while frontier:
        new = []
        for a in frontier:
            for g in gens:
                p = g @ a
                P = p.matrix
                if all(np.linalg.norm(P - M) > tol * max(1.0, np.linalg.norm(M)) for M in mats):
                    elems.append(p)
                    mats.append(P)
                    new.append(p)
                    if len(elems) > MAX_ORDER:
                        raise ValueError("generated group exceeds the order guard")
        frontier = new
    return StabilizerGroup(elems)


@dataclass(frozen=True)
class Unitarization:
    delta: LocalOperator
    state: PureState
    group: StabilizerGroup


def unitarize(psi: PureState, stab: StabilizerGroup) -> Unitarization:
    """Conjugate a finite stabilizer into a unitary one.

    Per party ``l`` the averaging operator ``Delta_l = (sum_k A_k^dag A_k)^{1/2}``
    turns ``Delta_l A_k Delta_l^{-1}`` unitary; the new reference is
    ``Delta psi / ||Delta psi||`` and its stabilizer is ``{Delta S_k Delta^{-1}}``.
    """
    chk = verify_stabilizer(psi, stab)
    if chk.residual > STAB_TOL or chk.closure_residual > CLOSURE_TOL:
        raise InvalidStabilizer(
            f"group does not stabilize the state (residual {chk.residual:.2e}, "
            f"closure {chk.closure_residual:.2e})"
        )
    # Move scalars so every factor has |det| = 1; the product is unchanged because
    # a finite-order element has |det S| = 1.
    normed = []
    for S in stab:
        normed.append([A / abs(np.linalg.det(A)) ** (1.0 / len(A)) for A in S.factors])
    deltas = []
    for l, d in enumerate(psi.shape.dims):
        acc = sum(f[l].conj().T @ f[l] for f in normed)
        w, V = np.linalg.eigh((acc + acc.conj().T) / 2)
        if w[0] <= 0 or w[0] / w[-1] < 1e-12:
            raise SingularDelta(f"averaging operator of party {l} is singular")
        deltas.append((V * np.sqrt(w)) @ V.conj().T)
    delta = LocalOperator(deltas)
    dinv = [np.linalg.inv(D) for D in deltas]
    new_elems = [LocalOperator([D @ A @ Di for D, A, Di in zip(deltas, f, dinv)]) for f in normed]
    state = PureState(psi.shape, apply_raw(delta, psi.amp))
    return Unitarization(delta, state, StabilizerGroup(new_elems))


def twirl(stab: StabilizerGroup, sigma: np.ndarray) -> np.ndarray:
    """Group average ``(1/m) sum_k U_k^dag sigma U_k`` over a unitary stabilizer."""
    if not stab.is_unitary:
        raise NonUnitaryStabilizer("twirling requires a unitary stabilizer")
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.shape != (stab.shape.D, stab.shape.D):
        raise ShapeMismatch(f"matrix shape {sigma.shape} does not match D={stab.shape.D}")
    out = np.zeros_like(sigma)
    for U in stab.matrices():
        out += U.conj().T @ sigma @ U
    return out / stab.m


# --- three-qubit GHZ torus -------------------------------------------------

GHZ_H = LocalOperator([X, X, X])


def _torus_keys() -> list[tuple[int, int]]:
    """Character of each 3-qubit basis state under the torus ``s1 s2 s3 = 1``.

    Basis state ``|b1 b2 b3>`` picks up ``prod_j s_j^{e_j}`` with ``e_j = 1 - 2 b_j``;
    eliminating ``theta_3 = -theta_1 - theta_2`` leaves ``(e1 - e3, e2 - e3)``.
    """
    keys = []
    for idx in range(8):
        b = [(idx >> 2) & 1, (idx >> 1) & 1, idx & 1]
        e = [1 - 2 * bj for bj in b]
        keys.append((e[0] - e[2], e[1] - e[2]))
    return keys


TORUS_KEYS = _torus_keys()
_T0_MASK = np.array([[ka == kb for kb in TORUS_KEYS] for ka in TORUS_KEYS])


def _check_ghz_shape(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.shape != (8, 8):
        raise ShapeMismatch(f"GHZ torus twirl acts on 8x8 matrices, got {sigma.shape}")
    return sigma


def ghz_t0_twirl(sigma: np.ndarray) -> np.ndarray:
    """Haar average over the torus ``diag(s1,1/s1) (x) diag(s2,1/s2) (x) diag(s3,1/s3)``.

    Entry ``(a, b)`` survives iff basis states ``a`` and ``b`` carry the same
    torus character; only the diagonal and the ``000``/``111`` coherences do.
    """
    sigma = _check_ghz_shape(sigma)
    return np.where(_T0_MASK, sigma, 0)


def ghz_t_twirl(sigma: np.ndarray) -> np.ndarray:
    """Twirl over the compact part ``T0 u h T0`` of the GHZ stabilizer."""
    t0 = ghz_t0_twirl(sigma)
    H = GHZ_H.matrix
    return 0.5 * t0 + 0.5 * H @ t0 @ H


class TorusStabilizer:
    """The GHZ stabilizer ``St u h St``; ``St`` is a complex 2-torus."""

    shape = HilbertShape((2, 2, 2))
    h = GHZ_H

    @staticmethod
    def element(theta1: float, theta2: float) -> LocalOperator:
        """Unitary torus element with ``s_j = exp(i theta_j)``, ``theta_3 = -theta_1 - theta_2``."""
        return TorusStabilizer.complex_element(np.exp(1j * theta1), np.exp(1j * theta2))

    @staticmethod
    def complex_element(s1: complex, s2: complex) -> LocalOperator:
        s3 = 1.0 / (s1 * s2)
        return LocalOperator([np.diag([s, 1 / s]) for s in (s1, s2, s3)])

    def sample(self, rng: np.random.Generator, coset: bool | None = None) -> LocalOperator:
        th = rng.uniform(0, 2 * np.pi, size=2)
        t = self.element(*th)
        if coset is None:
            coset = bool(rng.integers(2))
        return self.h @ t if coset else t

    def twirl(self, sigma: np.ndarray) -> np.ndarray:
        return ghz_t_twirl(sigma)


class BipartiteStabilizer:
    """Stabilizer ``{S^{-1} (x) S^T}`` of the maximally entangled state on ``C^d (x) C^d``."""

    def __init__(self, d: int):
        self.d = int(d)
        self.shape = HilbertShape((self.d, self.d))

    def element(self, S: np.ndarray) -> LocalOperator:
        S = np.asarray(S, dtype=complex)
        return LocalOperator([np.linalg.inv(S), S.T])

    def compact_element(self, V: np.ndarray) -> LocalOperator:
        """Element ``V^dag (x) V^T`` of the compact subgroup (``V`` unitary)."""
        V = np.asarray(V, dtype=complex)
        return LocalOperator([V.conj().T, V.T])

    def sample(self, rng: np.random.Generator, compact: bool = False) -> LocalOperator:
        d = self.d
        Zm = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
        if compact:
            Q, R = np.linalg.qr(Zm)
            return self.compact_element(Q * (np.diag(R) / np.abs(np.diag(R))))
        return self.element(Zm)


CATALOG_NAMES = ("bipartite", "klein4", "ghz3", "l-state")


def catalog(name: str, d: int = 2):
    """Known stabilizers by name.

    ``klein4`` and ``l-state`` are finite ``StabilizerGroup`` objects,
    ``ghz3`` a ``TorusStabilizer`` and ``bipartite`` a ``BipartiteStabilizer``
    sampler for ``C^d (x) C^d``.
    """
    key = name.lower().replace("_", "-")
    if key == "klein4":
        from .fourqubit import klein_stabilizer

        return klein_stabilizer()
    if key in ("l-state", "lstate"):
        from .fourqubit import l_state_stabilizer

        return l_state_stabilizer()
    if key == "ghz3":
        return TorusStabilizer()
    if key == "bipartite":
        return BipartiteStabilizer(d)
    raise UnknownCatalogEntry(f"unknown catalog entry {name!r}; known: {', '.join(CATALOG_NAMES)}")


def from_matrices(factor_lists: Sequence[Sequence[np.ndarray]]) -> StabilizerGroup:
    return StabilizerGroup([LocalOperator(f) for f in factor_lists])

