"""Criticality tests, Kempf-Ness norm probes and normalization to a critical state."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotCritical, SingularReduction
from .tensor_core import (
    LocalOperator,
    PureState,
    apply_raw,
    random_special_operator,
    reduced_density,
)

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class CriticalityReport:
    is_critical: bool
    deviations: tuple[float, ...]
    max_deviation: float
    tol: float


def check_critical(s: PureState, tol: float = DEFAULT_TOL) -> CriticalityReport:
    """A state is critical iff every single-party reduced state is maximally mixed."""
    devs = []
    for i, d in enumerate(s.shape.dims):
        rho = reduced_density(s, i)
        devs.append(float(np.linalg.norm(rho - np.eye(d) / d)))
    worst = max(devs)
    return CriticalityReport(worst <= tol, tuple(devs), worst, tol)


def kempf_ness_probe(
    s: PureState,
    trials: int = 100,
    seed: int | None = 0,
    tol: float = DEFAULT_TOL,
    include_identity: bool = True,
) -> float:
    """Smallest ``||g psi||`` seen over random determinant-one local operators.

    Only meaningful for critical states, where the minimum over the whole
    group is attained on the local-unitary orbit and equals one.
    """
    if not check_critical(s, tol).is_critical:
        raise NotCritical("the norm-minimality probe is only defined for critical states")
    rng = np.random.default_rng(seed)
    best = np.inf
    if include_identity:
        best = float(np.linalg.norm(s.amp))
    for _ in range(trials):
        g = random_special_operator(s.shape, rng)
        best = min(best, float(np.linalg.norm(apply_raw(g, s.amp))))
    return best


@dataclass(frozen=True)
class Normalization:
    g: LocalOperator
    state: PureState
    sweeps: int
    norms: tuple[float, ...]
    """``||g_t psi||`` after each sweep, starting with ``||psi|| = 1``."""


def _inv_sqrt_special(rho: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(rho)
    # rho^{-1/2} rescaled to unit determinant
    scale = np.exp(np.mean(np.log(w)) / 2)
    return (V * (scale / np.sqrt(w))) @ V.conj().T


def normalize_to_critical(
    s: PureState,
    max_iters: int = 1000,
    tol: float = DEFAULT_TOL,
    seed: int | None = None,
    min_rcond: float = 1e-10,
) -> Normalization:
    """Drive ``s`` to the critical point of its orbit by cyclic local filtering.

    Each step replaces party ``i``'s reduced matrix by a multiple of the
    identity using the determinant-one filter ``rho_i^{-1/2}``.  The filters
    can only lower the norm (AM-GM on the spectrum of ``rho_i``).  With a
    ``seed`` the party order is reshuffled every sweep.

    Raises ``SingularReduction`` if some party's reduced matrix of the input is
    singular, and ``NoConvergence`` if no critical point is reached, which is
    what happens for null-cone states such as W.
    """
    dims = s.shape.dims
    for i in range(len(dims)):
        w = np.linalg.eigvalsh(reduced_density(s, i))
        if w[0] / w[-1] < min_rcond:
            raise SingularReduction(f"reduced state of party {i} is singular")

    rng = np.random.default_rng(seed) if seed is not None else None
    order = np.arange(len(dims))
    facs = [np.eye(d, dtype=complex) for d in dims]
    v = s.amp.copy()
    norms = [1.0]
    for sweep in range(1, max_iters + 1):
        if rng is not None:
            order = rng.permutation(len(dims))
        for i in order:
            t = np.moveaxis(v.reshape(dims), i, 0).reshape(dims[i], -1)
            rho = t @ t.conj().T
            rho = (rho + rho.conj().T) / 2
            w = np.linalg.eigvalsh(rho)
            if w[0] <= 0 or w[0] / w[-1] < 1e-15:
                raise NoConvergence(
                    f"reduced state of party {i} degenerated after {sweep} sweeps (null cone?)"
                )
            F = _inv_sqrt_special(rho)
            t = F @ t
            v = np.moveaxis(t.reshape((dims[i],) + tuple(np.delete(dims, i))), 0, i).reshape(-1)
            facs[i] = F @ facs[i]
        nrm = float(np.linalg.norm(v))
        norms.append(nrm)
        if nrm < 1e-12:
            raise NoConvergence(f"orbit norm collapsed to {nrm:.3g}; state lies in the null cone")
        state = PureState(s.shape, v)
        if check_critical(state, tol).is_critical:
            return Normalization(LocalOperator(facs), state, sweep, tuple(norms))
    raise NoConvergence(f"not critical after {max_iters} sweeps")
