"""Dense multi-qudit states and tensor-product (local) operators.

Amplitudes are stored row-major with party 0 as the slowest index, so the
flat vector of a state on dims ``(d0, d1, ..., d_{n-1})`` is
``psi.reshape(dims)`` in C order.  Parties are indexed from 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import IndexOutOfRange, ShapeMismatch, SingularFactor, ZeroVector

MAX_DIM = 4096
CONSTRUCTION_TOL = 1e-10
COMPARE_TOL = 1e-9
RCOND_MIN = 1e-12


def _frozen(a, dtype=complex) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    """Kronecker product of a sequence of matrices, first factor slowest."""
    return reduce(np.kron, mats)


@dataclass(frozen=True)
class HilbertShape:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 1:
            raise ShapeMismatch("at least one party is required")
        if any(d < 2 for d in dims):
            raise ShapeMismatch(f"every party dimension must be >= 2, got {dims}")
        if int(np.prod(dims)) > MAX_DIM:
            raise ShapeMismatch(f"total dimension {int(np.prod(dims))} exceeds {MAX_DIM}")
        object.__setattr__(self, "dims", dims)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def D(self) -> int:
        return int(np.prod(self.dims))

    def check_party(self, party: int) -> int:
        if not 0 <= party < self.n:
            raise IndexOutOfRange(f"party {party} out of range for {self.n} parties")
        return party


def as_shape(dims: HilbertShape | Sequence[int]) -> HilbertShape:
    return dims if isinstance(dims, HilbertShape) else HilbertShape(tuple(dims))


@dataclass(frozen=True, eq=False)
class PureState:
    """A unit vector on a multi-qudit space.  Normalized on construction."""

    shape: HilbertShape
    amp: np.ndarray = field(repr=False)

    def __post_init__(self):
        shape = as_shape(self.shape)
        amp = np.asarray(self.amp, dtype=complex).reshape(-1)
        if amp.size != shape.D:
            raise ShapeMismatch(f"expected {shape.D} amplitudes, got {amp.size}")
        norm = np.linalg.norm(amp)
        if norm < 1e-300:
            raise ZeroVector("cannot normalize the zero vector")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "amp", _frozen(amp / norm))

    @classmethod
    def from_amplitudes(cls, dims, amp) -> PureState:
        return cls(as_shape(dims), amp)

    @classmethod
    def basis(cls, dims, digits: Sequence[int]) -> PureState:
        shape = as_shape(dims)
        amp = np.zeros(shape.D, dtype=complex)
        amp[np.ravel_multi_index(tuple(digits), shape.dims)] = 1.0
        return cls(shape, amp)

    @property
    def tensor(self) -> np.ndarray:
        return self.amp.reshape(self.shape.dims)

    def overlap(self, other: PureState) -> complex:
        _require_same(self.shape, other.shape)
        return complex(np.vdot(self.amp, other.amp))

    def equiv(self, other: PureState, tol: float = COMPARE_TOL) -> bool:
        """Equality up to global phase."""
        return abs(self.overlap(other)) >= 1.0 - tol

    def projector(self) -> np.ndarray:
        return np.outer(self.amp, self.amp.conj())


class LocalOperator:
    """A tensor product ``A_0 (x) A_1 (x) ... (x) A_{n-1}`` of per-party matrices."""

    def __init__(self, factors: Sequence[np.ndarray]):
        mats = []
        for A in factors:
            A = np.asarray(A, dtype=complex)
            if A.ndim != 2 or A.shape[0] != A.shape[1]:
                raise ShapeMismatch(f"factor must be square, got shape {A.shape}")
            mats.append(_frozen(A))
        self.shape = HilbertShape(tuple(A.shape[0] for A in mats))
        self.factors: tuple[np.ndarray, ...] = tuple(mats)
        self.is_unitary = all(
            np.linalg.norm(A.conj().T @ A - np.eye(len(A))) <= CONSTRUCTION_TOL for A in mats
        )
        self.is_special = all(abs(np.linalg.det(A) - 1.0) <= CONSTRUCTION_TOL for A in mats)

    @classmethod
    def identity(cls, dims) -> LocalOperator:
        return cls([np.eye(d) for d in as_shape(dims).dims])

    def __repr__(self):
        return f"LocalOperator(dims={self.shape.dims}, unitary={self.is_unitary}, special={self.is_special})"

    @cached_property
    def matrix(self) -> np.ndarray:
        return _frozen(kron_all(self.factors))

    def rconds(self) -> list[float]:
        return [1.0 / np.linalg.cond(A) for A in self.factors]

    def check_invertible(self) -> None:
        for i, rc in enumerate(self.rconds()):
            if not np.isfinite(rc) or rc < RCOND_MIN:
                raise SingularFactor(f"factor {i} is numerically singular (rcond={rc:.3g})")

    def dagger(self) -> LocalOperator:
        return LocalOperator([A.conj().T for A in self.factors])

    def inverse(self) -> LocalOperator:
        self.check_invertible()
        return LocalOperator([np.linalg.inv(A) for A in self.factors])

    def scaled(self, c: complex) -> LocalOperator:
        """Multiply the whole operator by ``c`` (absorbed into factor 0)."""
        facs = list(self.factors)
        facs[0] = c * facs[0]
        return LocalOperator(facs)

    def special_part(self) -> LocalOperator:
        """Rescale every factor to determinant one (principal root)."""
        self.check_invertible()
        out = []
        for A in self.factors:
            out.append(A / np.linalg.det(A) ** (1.0 / len(A)))
        return LocalOperator(out)

    def __matmul__(self, other: LocalOperator) -> LocalOperator:
        return compose(self, other)


def _require_same(a: HilbertShape, b: HilbertShape) -> None:
    if a.dims != b.dims:
        raise ShapeMismatch(f"shape mismatch: {a.dims} vs {b.dims}")


def apply_raw(op: LocalOperator, amp: np.ndarray) -> np.ndarray:
    """Apply ``op`` to an unnormalized flat amplitude vector."""
    t = np.asarray(amp, dtype=complex).reshape(op.shape.dims)
    for i, A in enumerate(op.factors):
        t = np.moveaxis(np.tensordot(A, t, axes=([1], [i])), 0, i)
    return t.reshape(-1)


def apply(op: LocalOperator, s: PureState) -> tuple[PureState, float]:
    """Return the normalized image ``g psi / ||g psi||`` and the norm ``||g psi||``."""
    _require_same(op.shape, s.shape)
    op.check_invertible()
    v = apply_raw(op, s.amp)
    norm = float(np.linalg.norm(v))
    return PureState(s.shape, v), norm


def reduced_density(s: PureState, party: int) -> np.ndarray:
    """Single-party reduced density matrix (partial trace over all other parties)."""
    s.shape.check_party(party)
    t = np.moveaxis(s.tensor, party, 0).reshape(s.shape.dims[party], -1)
    rho = t @ t.conj().T
    return (rho + rho.conj().T) / 2


def compose(a: LocalOperator, b: LocalOperator) -> LocalOperator:
    """Party-wise product ``a b``."""
    _require_same(a.shape, b.shape)
    return LocalOperator([A @ B for A, B in zip(a.factors, b.factors)])


def random_special_operator(
    dims, rng: np.random.Generator, max_cond: float = 1e6
) -> LocalOperator:
    """Per-party complex Gaussian matrices rescaled to determinant one.

    Draws with condition number above ``max_cond`` are rejected and redrawn.
    """
    shape = as_shape(dims)
    facs = []
    for d in shape.dims:
        while True:
            A = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
            if np.linalg.cond(A) <= max_cond:
                break
        facs.append(A / np.linalg.det(A) ** (1.0 / d))
    return LocalOperator(facs)


def random_local_unitary(dims, rng: np.random.Generator) -> LocalOperator:
    shape = as_shape(dims)
    facs = []
    for d in shape.dims:
        Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
        Q, R = np.linalg.qr(Z)
        facs.append(Q * (np.diag(R) / np.abs(np.diag(R))))
    return LocalOperator(facs)


def random_state(dims, rng: np.random.Generator) -> PureState:
    shape = as_shape(dims)
    v = rng.standard_normal(shape.D) + 1j * rng.standard_normal(shape.D)
    return PureState(shape, v)
