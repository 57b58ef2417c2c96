"""Regenerate docs/fixtures/*.json (deterministic)."""

from pathlib import Path

import numpy as np
from scipy.linalg import sqrtm

from sepconv.fourqubit import klein_stabilizer, make_crit_state
from sepconv.io import operator_payload, stabilizer_payload, state_payload, write_json
from sepconv.stabilizer import X, Y, Z
from sepconv.states import bell, ghz, w_state
from sepconv.tensor_core import LocalOperator, PureState

OUT = Path(__file__).resolve().parent.parent / "docs" / "fixtures"
I2 = np.eye(2)


def single_qubit(A):
    return LocalOperator([A, I2, I2, I2])


def bloch_root(a, b, c):
    return sqrtm(I2 + a * X + b * Y + c * Z)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    crit = make_crit_state(np.array([1, 2, 3j, 5]) / np.sqrt(39)).state
    write_json(OUT / "ghz3.json", state_payload(ghz(3)))
    write_json(OUT / "w3.json", state_payload(w_state(3)))
    write_json(OUT / "zero4.json", state_payload(PureState.basis((2,) * 4, (0, 0, 0, 0))))
    write_json(OUT / "crit4.json", state_payload(crit))
    write_json(OUT / "klein4.json", stabilizer_payload(klein_stabilizer(), crit))
    write_json(OUT / "id4.json", {"dims": [2, 2, 2, 2], "identity": True})
    d = np.diag([2.0, 0.5])
    write_json(OUT / "diag_one_qubit.json", operator_payload(single_qubit(d)))
    write_json(OUT / "diag_two_qubit.json", operator_payload(LocalOperator([d, d, I2, I2])))
    # target Bloch vector (a, b, c); the source mixes its Klein images with q = (0.4, 0.3, 0.2, 0.1)
    a, b, c = 0.5, -0.3, 0.4
    q = np.array([0.4, 0.3, 0.2, 0.1])
    sa, sb, sc = q @ [1, 1, -1, -1], q @ [1, -1, 1, -1], q @ [1, -1, -1, 1]
    write_json(OUT / "forward_target.json", operator_payload(single_qubit(bloch_root(a, b, c))))
    write_json(OUT / "forward_source.json", operator_payload(single_qubit(bloch_root(a * sa, b * sb, c * sc))))
    write_json(OUT / "ensemble.json", {"targets": [
        {"p": 0.5, "g": operator_payload(single_qubit(bloch_root(a, b, c)))},
        {"p": 0.5, "g": operator_payload(single_qubit(bloch_root(-a, -b, -c)))},
    ]})
    write_json(OUT / "schmidt_src.json", {"schmidt": [0.5, 0.3, 0.2]})
    write_json(OUT / "schmidt_tgt.json", {"schmidt": [0.6, 0.25, 0.15]})
    write_json(OUT / "bell.json", state_payload(bell("phi+")))
    write_json(OUT / "ghz_target.json", operator_payload(LocalOperator([np.array([[1.0, 0.5], [0.0, 1.0]]), I2, I2])))
    write_json(OUT / "id3.json", {"dims": [2, 2, 2], "identity": True})


if __name__ == "__main__":
    main()
