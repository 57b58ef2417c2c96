"""Associate density matrices, their spectra and the tail-sum monotones."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NonUnitaryStabilizer, ShapeMismatch
from .stabilizer import StabilizerGroup
from .tensor_core import HilbertShape, LocalOperator, PureState, apply, apply_raw, compose, kron_all

TRACE_TOL = 1e-9
COMMUTE_TOL = 1e-9


class ADM:
    """``rho = g^dag g / ||g psi||^2`` kept in product form.

    ``g`` maps the orbit representative ``psi`` to the state ``g psi / ||g psi||``
    that this matrix describes.
    """

    def __init__(self, reference: PureState, g: LocalOperator):
        if reference.shape.dims != g.shape.dims:
            raise ShapeMismatch(f"shape mismatch: {reference.shape.dims} vs {g.shape.dims}")
        g.check_invertible()
        self.reference = reference
        self.g = g
        self.shape: HilbertShape = g.shape
        self.norm_sq = float(np.linalg.norm(apply_raw(g, reference.amp)) ** 2)
        facs = []
        for A in g.factors:
            F = A.conj().T @ A
            facs.append((F + F.conj().T) / 2)
        self.local_factors: tuple[np.ndarray, ...] = tuple(facs)

    def __repr__(self):
        return f"ADM(dims={self.shape.dims}, norm_sq={self.norm_sq:.6g})"

    @cached_property
    def matrix(self) -> np.ndarray:
        M = kron_all(self.local_factors) / self.norm_sq
        M.setflags(write=False)
        return M

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Descending spectrum, computed factor-wise."""
        w = np.ones(1)
        for F in self.local_factors:
            w = np.kron(w, np.linalg.eigvalsh(F))
        return np.sort(w / self.norm_sq)[::-1]

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    def target(self) -> PureState:
        return apply(self.g, self.reference)[0]

    def conjugated(self, U: LocalOperator) -> ADM:
        """``U^dag rho U``; for ``U`` in the stabilizer this is another ADM of the same state."""
        return ADM(self.reference, compose(self.g, U))


def adm_of(psi: PureState, g: LocalOperator) -> ADM:
    return ADM(psi, g)


def _spectrum(x) -> np.ndarray:
    if isinstance(x, ADM):
        return x.eigenvalues.copy()
    a = np.asarray(x)
    if a.ndim == 1:
        return np.sort(a.real)[::-1]
    a = (a + a.conj().T) / 2
    return np.linalg.eigvalsh(a)[::-1]


@dataclass(frozen=True)
class MonotoneVector:
    E: np.ndarray
    """``E[k-1] = sum_{m >= k} lambda_m`` with ``lambda`` sorted descending."""

    def __len__(self):
        return len(self.E)

    def __getitem__(self, k):
        return self.E[k]


def monotones(rho) -> MonotoneVector:
    """Tail sums of the descending spectrum (generalized Vidal monotones).

    Accepts an ``ADM``, any Hermitian matrix, or a 1-D spectrum.
    """
    lam = _spectrum(rho)
    E = np.cumsum(lam[::-1])[::-1]
    E.setflags(write=False)
    return MonotoneVector(E)


@dataclass(frozen=True)
class MajorizationResult:
    holds: bool
    reason: str
    margin: float
    """smallest ``sum_k lambda2 - sum_k lambda1`` over partial sums (negative on failure)"""

    def __bool__(self):
        return self.holds


def majorizes(rho2, rho1, tol: float = TRACE_TOL) -> MajorizationResult:
    """Does the spectrum of ``rho2`` majorize that of ``rho1`` (``rho1 < rho2``)?"""
    l2, l1 = _spectrum(rho2), _spectrum(rho1)
    if l2.size != l1.size:
        raise ShapeMismatch(f"dimension mismatch: {l2.size} vs {l1.size}")
    c2, c1 = np.cumsum(l2), np.cumsum(l1)
    if abs(c2[-1] - c1[-1]) > tol:
        return MajorizationResult(False, f"trace mismatch ({c2[-1]:.12g} vs {c1[-1]:.12g})", float(c2[-1] - c1[-1]))
    gaps = c2 - c1
    margin = float(gaps[:-1].min()) if gaps.size > 1 else 0.0
    if np.all(gaps >= -tol):
        return MajorizationResult(True, "majorized", margin)
    k = int(np.argmax(gaps < -tol))
    return MajorizationResult(False, f"partial sum {k + 1} violated", margin)


def unitary_stab_test(rho, stab: StabilizerGroup, tol: float = COMMUTE_TOL) -> bool:
    """``[rho, U_k] = 0`` for every ``U_k``: the target's stabilizer is unitary too."""
    if not stab.is_unitary:
        raise NonUnitaryStabilizer("commutation test needs a unitary stabilizer")
    R = rho.matrix if isinstance(rho, ADM) else np.asarray(rho)
    return all(np.linalg.norm(R @ U - U @ R) <= tol for U in stab.matrices())
