"""SL-invariant polynomials of two, three and four qubits.

``<psi*|`` denotes the component-wise complex conjugate in the computational
basis, so ``<psi*| M |psi> = psi^T M psi`` is a bilinear (not sesquilinear)
form and the resulting values are holomorphic in the amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ShapeMismatch, VanishingInvariant
from .stabilizer import StabilizerGroup, Y
from .tensor_core import PureState, kron_all

VANISH_TOL = 1e-10

_YY = np.kron(Y, Y)
_YYYY = kron_all([Y] * 4)


def _require(s: PureState, dims: tuple[int, ...]) -> np.ndarray:
    if s.shape.dims != dims:
        raise ShapeMismatch(f"expected shape {dims}, got {s.shape.dims}")
    return s.amp


def _bilinear(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(a @ _YY @ b)


def f2_bipartite(s: PureState) -> complex:
    """Degree-2 two-qubit invariant; its modulus is the concurrence."""
    psi = _require(s, (2, 2))
    return _bilinear(psi, psi)


def f4_three_qubit(s: PureState) -> complex:
    """Degree-4 three-qubit invariant; its modulus is the 3-tangle (up to normalization)."""
    psi = _require(s, (2, 2, 2))
    p0, p1 = psi[:4], psi[4:]
    gram = np.array([[_bilinear(p0, p0), _bilinear(p0, p1)], [_bilinear(p1, p0), _bilinear(p1, p1)]])
    return complex(np.linalg.det(gram))


def f2_four_qubit(s: PureState) -> complex:
    """Degree-2 four-qubit invariant ``psi^T (Y (x) Y (x) Y (x) Y) psi``."""
    psi = _require(s, (2, 2, 2, 2))
    return complex(psi @ _YYYY @ psi)


@dataclass(frozen=True)
class InvariantValue:
    name: str
    degree: int
    value: complex


_REGISTRY: dict[tuple[int, ...], list[tuple[str, int, Callable[[PureState], complex]]]] = {
    (2, 2): [("f2", 2, f2_bipartite)],
    (2, 2, 2): [("f4", 4, f4_three_qubit)],
    (2, 2, 2, 2): [("f2_4q", 2, f2_four_qubit)],
}


def applicable_invariants(s: PureState) -> list[InvariantValue]:
    return [InvariantValue(name, k, f(s)) for name, k, f in _REGISTRY.get(s.shape.dims, [])]


def null_cone_flag(s: PureState, tol: float = VANISH_TOL) -> bool | None:
    """True when every implemented invariant for this shape vanishes.

    This is only ever "consistent with the null cone": the implemented
    invariants do not generate the full invariant ring for four qubits.
    ``None`` means no invariant is implemented for the shape.
    """
    vals = applicable_invariants(s)
    if not vals:
        return None
    return all(abs(v.value) <= tol for v in vals)


def invariant_for(dims: tuple[int, ...], degree: int) -> Callable[[PureState], complex]:
    for _, k, f in _REGISTRY.get(tuple(dims), []):
        if k == degree:
            return f
    raise KeyError(f"no degree-{degree} invariant implemented for shape {dims}")


def scalar_part(op) -> complex:
    """``a`` in ``op = a g`` with ``g`` determinant-one, using principal roots."""
    a = 1.0 + 0j
    for A in op.factors:
        a *= np.linalg.det(A) ** (1.0 / len(A))
    return a


@dataclass(frozen=True)
class PhaseCheck:
    passed: bool
    degree: int
    invariant_value: complex
    violations: tuple[int, ...]
    """indices of elements with ``|a^k - 1| > tol``"""
    max_defect: float


def stabilizer_phase_check(
    stab: StabilizerGroup,
    degree: int,
    psi: PureState,
    invariant: Callable[[PureState], complex] | None = None,
    tol: float = 1e-8,
) -> PhaseCheck:
    """Every stabilizer element ``a g`` must satisfy ``a^k = 1`` when ``f(psi) != 0``."""
    f = invariant or invariant_for(psi.shape.dims, degree)
    val = f(psi)
    if abs(val) <= VANISH_TOL:
        raise VanishingInvariant(f"invariant vanishes on the state (|f| = {abs(val):.2e})")
    bad, worst = [], 0.0
    for i, S in enumerate(stab):
        defect = abs(scalar_part(S) ** degree - 1.0)
        worst = max(worst, defect)
        if defect > tol:
            bad.append(i)
    return PhaseCheck(not bad, degree, val, tuple(bad), worst)
