"""Named reference states used throughout the package and its tests."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .tensor_core import PureState


def bell(kind: str = "phi+") -> PureState:
    """Two-qubit Bell state: ``phi+``, ``phi-``, ``psi+`` or ``psi-``."""
    amp = {
        "phi+": [1, 0, 0, 1],
        "phi-": [1, 0, 0, -1],
        "psi+": [0, 1, 1, 0],
        "psi-": [0, 1, -1, 0],
    }[kind]
    return PureState.from_amplitudes((2, 2), amp)


def max_entangled(d: int) -> PureState:
    return PureState.from_amplitudes((d, d), np.eye(d).reshape(-1))


def schmidt_state(coeffs: Sequence[float]) -> PureState:
    """``sum_i sqrt(lambda_i) |ii>`` for a Schmidt spectrum ``lambda``."""
    lam = np.asarray(coeffs, dtype=float)
    d = len(lam)
    return PureState.from_amplitudes((d, d), np.diag(np.sqrt(lam)).reshape(-1))


def ghz(n: int = 3) -> PureState:
    amp = np.zeros(2**n, dtype=complex)
    amp[0] = amp[-1] = 1
    return PureState.from_amplitudes((2,) * n, amp)


def w_state(n: int = 3) -> PureState:
    amp = np.zeros(2**n, dtype=complex)
    for k in range(n):
        amp[1 << k] = 1
    return PureState.from_amplitudes((2,) * n, amp)
