"""Four-qubit critical states ``sum_i z_i u_i``, the Klein stabilizer and the L state."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .adm import adm_of
from .errors import CatalogObstruction, NonGenericState, VanishingInvariant, ZeroVector
from .invariants import VANISH_TOL, f2_four_qubit
from .stabilizer import X, Y, Z, StabilizerGroup, generate_group, twirl
from .states import bell
from .tensor_core import LocalOperator, PureState, apply_raw

OMEGA = np.exp(2j * np.pi / 3)
GENERIC_TOL = 1e-10
SEP_TOL = 1e-8

# magic basis: phi+, i phi-, i psi+, psi-  (columns)
_MAGIC = np.array([[1, 0, 0, 1], [1j, 0, 0, -1j], [0, 1j, 1j, 0], [0, 1, -1, 0]]).T / np.sqrt(2)


def u_basis() -> list[PureState]:
    """``u0 = phi+ phi+``, ``u1 = phi- phi-``, ``u2 = psi+ psi+``, ``u3 = psi- psi-``.

    Qubits (0, 1) carry the first Bell pair and qubits (2, 3) the second.
    """
    out = []
    for kind in ("phi+", "phi-", "psi+", "psi-"):
        b = bell(kind).amp
        out.append(PureState.from_amplitudes((2, 2, 2, 2), np.kron(b, b)))
    return out


@dataclass(frozen=True, eq=False)
class CritBasisState:
    z: np.ndarray
    """normalized coefficients in the u-basis"""
    state: PureState
    generic: bool


def is_generic(z: Sequence[complex], tol: float = GENERIC_TOL) -> bool:
    sq = np.asarray(z, dtype=complex) ** 2
    return all(abs(sq[i] - sq[j]) > tol for i in range(4) for j in range(i + 1, 4))


def make_crit_state(z: Sequence[complex]) -> CritBasisState:
    z = np.asarray(z, dtype=complex).reshape(4)
    nz = np.linalg.norm(z)
    if nz < 1e-300:
        raise ZeroVector("z must be nonzero")
    z = z / nz
    amp = sum(zi * u.amp for zi, u in zip(z, u_basis()))
    z.setflags(write=False)
    return CritBasisState(z, PureState.from_amplitudes((2, 2, 2, 2), amp), is_generic(z))


def l_state() -> CritBasisState:
    return make_crit_state([1, OMEGA, OMEGA.conjugate(), 0])


@lru_cache(maxsize=None)
def klein_stabilizer() -> StabilizerGroup:
    """``{I, XXXX, YYYY, ZZZZ}``."""
    return StabilizerGroup([LocalOperator([P] * 4) for P in (np.eye(2), X, Y, Z)])


def _kron_factor(W: np.ndarray, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Split a 4x4 matrix into ``A (x) B`` (rank-one realignment)."""
    R = W.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    U, s, Vh = np.linalg.svd(R)
    A = np.sqrt(s[0]) * U[:, 0].reshape(2, 2)
    B = np.sqrt(s[0]) * Vh[0].reshape(2, 2)
    if np.linalg.norm(np.kron(A, B) - W) > tol:
        raise CatalogObstruction("pair unitary is not a product of single-qubit factors")
    return A, B


@lru_cache(maxsize=None)
def p3_operator() -> LocalOperator:
    """Local unitary permuting ``u0 -> u2, u1 -> u0, u2 -> u1, u3 -> u3``.

    In the magic basis a product ``A (x) B`` of SU(2) factors is a real rotation;
    the u-basis is ``u_i = eta_i m_i (x) m_i`` with ``eta = (1, -1, -1, 1)``, so a
    signed permutation on the first pair and the same permutation with signs
    ``(-1, -1, 1, 1)`` on the second realizes the cycle exactly.
    """
    P = np.zeros((4, 4))
    for src, dst in ((0, 2), (1, 0), (2, 1), (3, 3)):
        P[dst, src] = 1.0
    O2 = P @ np.diag([-1.0, -1.0, 1.0, 1.0])
    A, B = _kron_factor(_MAGIC @ P @ _MAGIC.conj().T)
    C, D = _kron_factor(_MAGIC @ O2 @ _MAGIC.conj().T)
    op = LocalOperator([A, B, C, D])
    u = u_basis()
    for src, dst in ((0, 2), (1, 0), (2, 1), (3, 3)):
        if np.linalg.norm(apply_raw(op, u[src].amp) - u[dst].amp) > 1e-9:
            raise CatalogObstruction(f"p3 fails to map u{src} to u{dst}")
    return op


@lru_cache(maxsize=None)
def l_state_stabilizer() -> StabilizerGroup:
    """Order-12 stabilizer of the L state: the Klein group extended by a 3-cycle.

    The generator is ``conj(omega) p3``; with ``p3`` as specified above this is
    the phase that fixes ``(u0 + omega u1 + conj(omega) u2) / sqrt(3)``.
    """
    gen = p3_operator().scaled(OMEGA.conjugate())
    klein = klein_stabilizer().elements
    return generate_group([klein[1], klein[3], gen])


@dataclass(frozen=True)
class FourQubitVerdict:
    convertible: bool
    residual: float
    """``||G(sigma) - I||_F`` for the Klein twirl ``G``"""
    twirled: np.ndarray


def sep_characterization_4q(psi: CritBasisState | PureState, g: LocalOperator, tol: float = SEP_TOL) -> FourQubitVerdict:
    """Generic critical ``psi`` converts to ``g psi`` by SEP iff the Klein twirl of its ADM is ``I``."""
    if isinstance(psi, CritBasisState):
        if not psi.generic:
            raise NonGenericState("characterization needs z_i^2 pairwise distinct")
        state = psi.state
    else:
        state = psi
    f = f2_four_qubit(state)
    if abs(f) <= VANISH_TOL:
        raise VanishingInvariant("degree-2 invariant vanishes; supply the stabilizer explicitly")
    sigma = adm_of(state, g).matrix
    G = twirl(klein_stabilizer(), sigma)
    res = float(np.linalg.norm(G - np.eye(16)))
    return FourQubitVerdict(res <= tol, res, G)
