"""JSON file formats for states, operators, stabilizers, ensembles and reports.

Complex numbers are ``[re, im]`` pairs.  Amplitudes are row-major with party 0
slowest, matching ``numpy.ravel_multi_index`` on ``dims``.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

import numpy as np

from .errors import SepConvError, ShapeMismatch
from .sep_decide import EnsembleSpec
from .stabilizer import StabilizerGroup, verify_stabilizer
from .states import schmidt_state
from .tensor_core import LocalOperator, PureState, as_shape

NORM_WARN_TOL = 1e-6
REPORT_SCHEMA = 1


class InvalidInput(SepConvError, ValueError):
    """Malformed input file."""


def _cplx(x) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise InvalidInput(f"expected a number or an [re, im] pair, got {x!r}")


def decode_vector(items) -> np.ndarray:
    if not isinstance(items, list):
        raise InvalidInput("expected a list of complex entries")
    return np.array([_cplx(v) for v in items], dtype=complex)


def decode_matrix(grid) -> np.ndarray:
    if not isinstance(grid, list) or not grid or not all(isinstance(r, list) for r in grid):
        raise InvalidInput("expected a non-empty list of rows")
    rows = [decode_vector(r) for r in grid]
    if len({len(r) for r in rows}) != 1:
        raise InvalidInput("ragged matrix")
    return np.stack(rows)


def encode(x: Any) -> Any:
    """numpy / complex values to plain JSON types; complex becomes ``[re, im]``."""
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return encode(x.tolist())
        return x.tolist()
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, dict):
        return {str(k): encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    return x


def _dims(obj: dict) -> tuple[int, ...]:
    dims = obj.get("dims")
    if not isinstance(dims, list) or not all(isinstance(d, int) for d in dims):
        raise InvalidInput("'dims' must be a list of integers")
    return as_shape(dims).dims


def parse_state(obj: dict, warnings: list[str] | None = None) -> PureState:
    if not isinstance(obj, dict):
        raise InvalidInput("state payload must be an object")
    if "schmidt" in obj:
        lam = obj["schmidt"]
        if not isinstance(lam, list):
            raise InvalidInput("'schmidt' must be a list of probabilities")
        if any(not isinstance(v, (int, float)) or v < 0 for v in lam):
            raise InvalidInput("Schmidt coefficients must be nonnegative numbers")
        return schmidt_state([float(v) for v in lam])
    dims = _dims(obj)
    if "amplitudes" not in obj:
        raise InvalidInput("state payload needs 'amplitudes' or 'schmidt'")
    amp = decode_vector(obj["amplitudes"])
    if amp.size != int(np.prod(dims)):
        raise ShapeMismatch(f"expected {int(np.prod(dims))} amplitudes, got {amp.size}")
    norm = float(np.linalg.norm(amp))
    if warnings is not None and abs(norm - 1.0) > NORM_WARN_TOL:
        warnings.append(f"input norm {norm:.9g} renormalized to 1")
    return PureState.from_amplitudes(dims, amp)


def state_payload(s: PureState) -> dict:
    return {"dims": list(s.shape.dims), "amplitudes": encode(s.amp)}


def parse_operator(obj: dict) -> LocalOperator:
    if not isinstance(obj, dict):
        raise InvalidInput("operator payload must be an object")
    dims = _dims(obj)
    if obj.get("identity") is True:
        return LocalOperator.identity(dims)
    facs = obj.get("factors")
    if not isinstance(facs, list) or len(facs) != len(dims):
        raise InvalidInput(f"'factors' must hold {len(dims)} matrices")
    mats = [decode_matrix(F) for F in facs]
    for d, F in zip(dims, mats):
        if F.shape != (d, d):
            raise ShapeMismatch(f"factor of shape {F.shape} on a {d}-dimensional party")
    op = LocalOperator(mats)
    op.check_invertible()
    return op


def operator_payload(op: LocalOperator) -> dict:
    return {"dims": list(op.shape.dims), "factors": [encode(F) for F in op.factors]}


def parse_stabilizer(obj: dict, warnings: list[str] | None = None) -> StabilizerGroup:
    if not isinstance(obj, dict) or not isinstance(obj.get("elements"), list) or not obj["elements"]:
        raise InvalidInput("stabilizer payload needs a non-empty 'elements' list")
    group = StabilizerGroup([parse_operator(e) for e in obj["elements"]])
    if "reference_state" in obj:
        ref = parse_state(obj["reference_state"], warnings)
        check = verify_stabilizer(ref, group)
        if not check.verified:
            raise InvalidInput(f"stabilizer fails verification against its reference state (residual {check.residual:.2e})")
    return group


def stabilizer_payload(group: StabilizerGroup, reference: PureState | None = None) -> dict:
    out = {"elements": [operator_payload(S) for S in group]}
    if reference is not None:
        out["reference_state"] = state_payload(reference)
    return out


def parse_ensemble(obj: dict) -> EnsembleSpec:
    targets = obj.get("targets") if isinstance(obj, dict) else None
    if not isinstance(targets, list) or not targets:
        raise InvalidInput("ensemble payload needs a non-empty 'targets' list")
    try:
        return EnsembleSpec(tuple((float(t["p"]), parse_operator(t["g"])) for t in targets))
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed ensemble target: {exc}") from exc


def parse_matrix(obj: dict) -> tuple[tuple[int, ...], np.ndarray]:
    """A Hermitian-matrix payload, or a state payload read as its projector."""
    if isinstance(obj, dict) and "matrix" in obj:
        dims = _dims(obj)
        M = decode_matrix(obj["matrix"])
        D = int(np.prod(dims))
        if M.shape != (D, D):
            raise ShapeMismatch(f"matrix shape {M.shape} does not match dims {dims}")
        return dims, M
    s = parse_state(obj)
    return s.shape.dims, s.projector()


def read_json(path: str | Path) -> tuple[Any, str]:
    """Parsed JSON and the sha256 of the raw bytes."""
    raw = Path(path).read_bytes()
    try:
        return json.loads(raw), hashlib.sha256(raw).hexdigest()
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InvalidInput(f"{path}: not valid JSON ({exc})") from exc


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(json.dumps(encode(obj), indent=2) + "\n")


REPORT_KEYS = ("schema", "tool", "version", "command", "argv", "inputs", "tolerances", "seed", "result", "warnings", "exit_code")


def make_report(**fields) -> dict:
    rep = {"schema": REPORT_SCHEMA, "tool": "sepconv"}
    rep.update(fields)
    missing = [k for k in REPORT_KEYS if k not in rep]
    if missing:
        raise KeyError(f"report is missing {missing}")
    return encode(rep)


def dump_report(rep: dict) -> str:
    return json.dumps(rep, indent=2, sort_keys=True)


def load_report(text: str) -> dict:
    rep = json.loads(text)
    missing = [k for k in REPORT_KEYS if k not in rep]
    if missing or rep.get("schema") != REPORT_SCHEMA:
        raise InvalidInput(f"not a sepconv report (missing {missing})")
    return rep
