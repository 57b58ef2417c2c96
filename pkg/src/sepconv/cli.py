"""``sepconv`` command line: JSON files in, one JSON report out.

Exit codes: 0 success or feasible, 1 usage, 2 invalid input, 3 infeasible,
4 unknown or marginal.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Callable

import numpy as np

from . import __version__
from .adm import adm_of
from .critical import check_critical, kempf_ness_probe
from .errors import SepConvError
from .invariants import applicable_invariants, null_cone_flag
from .io import (
    InvalidInput,
    dump_report,
    make_report,
    parse_ensemble,
    parse_matrix,
    parse_operator,
    parse_stabilizer,
    parse_state,
    read_json,
)
from .pmax import pmax_bounds, teleportation_monotone
from .sep_decide import (
    FEAS_TOL,
    check_bipartite,
    check_deterministic,
    check_ensemble,
    check_ghz_class,
    kraus_operators,
)
from .stabilizer import StabilizerGroup, TorusStabilizer, catalog, twirl
from .tensor_core import reduced_density

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_UNKNOWN = 0, 1, 2, 3, 4
SEED_ENV = "SEPCONV_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _Ctx:
    """Per-invocation state: input digests and warnings."""

    def __init__(self, args):
        self.args = args
        self.inputs: dict[str, str] = {}
        self.warnings: list[str] = []

    def load(self, label: str, path: str):
        try:
            obj, digest = read_json(path)
        except OSError as exc:
            raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc
        self.inputs[label] = f"sha256:{digest}"
        return obj

    def stabilizer(self) -> StabilizerGroup:
        a = self.args
        if a.stab and a.stab_catalog:
            raise InvalidInput("give either --stab or --stab-catalog, not both")
        if a.stab:
            return parse_stabilizer(self.load("stab", a.stab), self.warnings)
        if a.stab_catalog:
            group = catalog(a.stab_catalog)
            if not isinstance(group, StabilizerGroup):
                raise InvalidInput(f"catalog entry {a.stab_catalog!r} is not a finite group; use the ghz command")
            self.inputs["stab"] = f"catalog:{a.stab_catalog}"
            return group
        raise InvalidInput("a stabilizer is required (--stab or --stab-catalog)")


def _verdict_code(feasible, marginal=False) -> int:
    if feasible is None or marginal:
        return EXIT_UNKNOWN
    return EXIT_OK if feasible else EXIT_INFEASIBLE


def _word(feasible) -> str:
    return {True: "feasible", False: "infeasible", None: "unknown"}[feasible]


def cmd_analyze(ctx: _Ctx):
    psi = parse_state(ctx.load("state", ctx.args.state), ctx.warnings)
    crit = check_critical(psi, ctx.args.tol)
    spectra = [np.linalg.eigvalsh(reduced_density(psi, i))[::-1] for i in range(psi.shape.n)]
    invs = [
        {"name": v.name, "degree": v.degree, "value": v.value, "abs": abs(v.value)}
        for v in applicable_invariants(psi)
    ]
    flag = null_cone_flag(psi)
    res = {
        "dims": list(psi.shape.dims),
        "critical": crit.is_critical,
        "max_deviation": crit.max_deviation,
        "reduced_spectra": spectra,
        "invariants": invs,
        "null_cone": {None: "no invariant implemented", True: "consistent with null cone", False: "not in null cone"}[flag],
    }
    if crit.is_critical and ctx.args.probe:
        res["kempf_ness_min_norm"] = kempf_ness_probe(psi, ctx.args.probe, ctx.args.seed, ctx.args.tol)
    return res, EXIT_OK, "critical" if crit.is_critical else "not-critical"


def cmd_convert(ctx: _Ctx):
    a = ctx.args
    psi = parse_state(ctx.load("rep", a.rep), ctx.warnings)
    stab = ctx.stabilizer()
    g1, g2 = parse_operator(ctx.load("g1", a.g1)), parse_operator(ctx.load("g2", a.g2))
    v = check_deterministic(psi, stab, g1, g2, tol=a.tol, fast_paths=not a.no_fast_paths)
    res = {
        "verdict": _word(v.feasible),
        "method": v.method,
        "p": v.p,
        "residual": v.residual,
        "twirl_residual": v.twirl_residual,
        "marginal": v.marginal,
    }
    if v.note:
        res["note"] = v.note
    if v.feasible:
        ks = kraus_operators(psi, stab, g1, g2, v.p)
        comp = sum(K.matrix.conj().T @ K.matrix for K in ks)
        res["kraus_count"] = len(ks)
        res["kraus_completeness_residual"] = float(np.linalg.norm(comp - np.eye(psi.shape.D)))
    return res, _verdict_code(v.feasible, v.marginal), _word(v.feasible) + (" (marginal)" if v.marginal else "")


def cmd_ensemble(ctx: _Ctx):
    a = ctx.args
    psi = parse_state(ctx.load("rep", a.rep), ctx.warnings)
    stab = ctx.stabilizer()
    g = parse_operator(ctx.load("g", a.g))
    ens = parse_ensemble(ctx.load("ensemble", a.ensemble))
    v = check_ensemble(psi, stab, g, ens, tol=a.tol, fast_paths=not a.no_fast_paths)
    res = {
        "verdict": _word(v.feasible),
        "method": v.method,
        "P": v.P,
        "residual": v.residual,
        "twirl_residual": v.twirl_residual,
        "marginal": v.marginal,
    }
    return res, _verdict_code(v.feasible, v.marginal), _word(v.feasible)


def cmd_pmax(ctx: _Ctx):
    a = ctx.args
    psi = parse_state(ctx.load("rep", a.rep), ctx.warnings)
    stab = ctx.stabilizer()
    g1, g2 = parse_operator(ctx.load("g1", a.g1)), parse_operator(ctx.load("g2", a.g2))
    b = pmax_bounds(psi, stab, g1, g2, iters=a.iters)
    res = {
        "lower": b.lower,
        "lower_index": b.lower_index,
        "upper_vidal": b.upper_vidal,
        "upper_twirl": b.upper_twirl,
        "upper_psd": b.upper_psd,
        "psd_primal": b.psd_primal,
        "exact": b.exact,
        "exact_reason": b.exact_reason or None,
        "separability": {"status": b.separability.status, "detail": b.separability.detail},
        "teleportation_monotone": {
            "source": teleportation_monotone(adm_of(psi, g1)),
            "target": teleportation_monotone(adm_of(psi, g2)),
        },
    }
    line = f"exact={b.exact:.10g} ({b.exact_reason})" if b.exact is not None else f"[{b.lower:.10g}, {b.min_upper:.10g}]"
    return res, EXIT_OK, line


def cmd_bipartite(ctx: _Ctx):
    a = ctx.args
    s1 = parse_state(ctx.load("source", a.source), ctx.warnings)
    s2 = parse_state(ctx.load("target", a.target), ctx.warnings)
    v = check_bipartite(s1, s2, tol=a.tol)
    res = {
        "verdict": _word(v.feasible),
        "method": v.method,
        "reason": v.reason,
        "source_spectrum": v.source_spectrum,
        "target_spectrum": v.target_spectrum,
    }
    return res, _verdict_code(v.feasible), _word(v.feasible)


def cmd_ghz(ctx: _Ctx):
    a = ctx.args
    g1, g2 = parse_operator(ctx.load("g1", a.g1)), parse_operator(ctx.load("g2", a.g2))
    v = check_ghz_class(g1, g2, tol=a.tol)
    res = {
        "verdict": v.status,
        "method": v.method,
        "residual": v.residual,
        "certificate_size": len(v.certificate),
    }
    return res, _verdict_code(v.feasible), v.status


def cmd_twirl(ctx: _Ctx):
    a = ctx.args
    dims, M = parse_matrix(ctx.load("input", a.input))
    if a.stab_catalog and a.stab_catalog.lower() == "ghz3":
        ctx.inputs["stab"] = "catalog:ghz3"
        out = TorusStabilizer().twirl(M)
    else:
        stab = ctx.stabilizer()
        if stab.shape.dims != tuple(dims):
            raise InvalidInput(f"stabilizer acts on {stab.shape.dims}, matrix on {tuple(dims)}")
        out = twirl(stab, M)
    res = {"dims": list(dims), "twirled": out, "trace": np.trace(out)}
    return res, EXIT_OK, "ok"


def _add_stab(p):
    p.add_argument("--stab", help="stabilizer file")
    p.add_argument("--stab-catalog", help="named stabilizer: klein4, l-state (ghz3 for twirl)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sepconv", description="SEP convertibility of multipartite pure states.")
    ap.add_argument("--version", action="version", version=f"sepconv {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=FEAS_TOL, help="feasibility/criticality tolerance")
    common.add_argument("--seed", type=int, default=None, help=f"random seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--quiet", action="store_true", help="print only the verdict line")
    common.add_argument("--out", help="also write the report to this file")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", parents=[common], help="criticality, reduced spectra, invariants")
    p.add_argument("state")
    p.add_argument("--probe", type=int, default=0, help="random trials of the norm-minimality probe")
    p.set_defaults(func=cmd_analyze)

    for name, func, hlp in (("convert", cmd_convert, "deterministic conversion g1 psi -> g2 psi"), ("pmax", cmd_pmax, "bounds on the conversion probability")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("--rep", required=True, help="orbit representative (state file)")
        _add_stab(p)
        p.add_argument("--g1", required=True)
        p.add_argument("--g2", required=True)
        if name == "convert":
            p.add_argument("--no-fast-paths", action="store_true", help="always solve the full feasibility problem")
        else:
            p.add_argument("--iters", type=int, default=500, help="subgradient iteration cap")
        p.set_defaults(func=func)

    p = sub.add_parser("ensemble", parents=[common], help="conversion to an ensemble of targets")
    p.add_argument("--rep", required=True)
    _add_stab(p)
    p.add_argument("--g", required=True)
    p.add_argument("--ensemble", required=True)
    p.add_argument("--no-fast-paths", action="store_true")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("bipartite", parents=[common], help="majorization test for two bipartite states")
    p.add_argument("source")
    p.add_argument("target")
    p.set_defaults(func=cmd_bipartite)

    p = sub.add_parser("ghz", parents=[common], help="conversion inside the three-qubit GHZ class")
    p.add_argument("--g1", required=True)
    p.add_argument("--g2", required=True)
    p.set_defaults(func=cmd_ghz)

    p = sub.add_parser("twirl", parents=[common], help="average a matrix over a stabilizer")
    p.add_argument("--input", required=True, help="matrix file, or a state file (its projector)")
    _add_stab(p)
    p.set_defaults(func=cmd_twirl)
    return ap


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    if args.seed is None:
        env = os.environ.get(SEED_ENV)
        try:
            args.seed = int(env) if env else 0
        except ValueError:
            print(f"sepconv: error: {SEED_ENV}={env!r} is not an integer", file=sys.stderr)
            return EXIT_USAGE
    ctx = _Ctx(args)
    func: Callable = args.func
    try:
        result, code, line = func(ctx)
    except (SepConvError, ValueError, KeyError, IndexError) as exc:
        print(f"sepconv: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    rep = make_report(
        version=__version__,
        command=args.command,
        argv=argv,
        inputs=ctx.inputs,
        tolerances={"tol": args.tol},
        seed=args.seed,
        result=result,
        warnings=ctx.warnings,
        exit_code=code,
    )
    text = dump_report(rep)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    if args.quiet:
        print(f"{args.command}: {line}")
    else:
        print(text)
    for w in ctx.warnings:
        print(f"sepconv: warning: {w}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
