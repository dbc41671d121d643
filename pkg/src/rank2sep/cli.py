"""Command-line front end.

Exit codes:

    0  separable (decide), success (concurrence, generate), no entanglement witnessed (verify)
    1  entangled (decide), entanglement witnessed by an oracle (verify)
    2  unreadable or malformed input file, invalid arguments
    3  input violates a state invariant (normalization, orthogonality, Hermiticity, ...)
    4  density matrix is not rank two
    5  --verify found an invalid separability certificate (internal inconsistency)
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import samples
from .concurrence import concurrence, invariants
from .criterion import decide, decide_real
from .errors import ComplexInput, InvalidState, NotRankTwo, StateFileError
from .multilinear import (
    DensityMatrix,
    PartyShape,
    PureState,
    ghz_state,
    rank_two_extract,
)
from .oracle import max_abs_distance, ppt_check, pure_product_oracle
from .statefile import FORMAT_VERSION, read_state_file, state_file_text

EXIT_OK = 0
EXIT_ENTANGLED = 1
EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_NOT_RANK_TWO = 4
EXIT_CERTIFICATE = 5


@dataclass(frozen=True)
class Tolerances:
    norm: float = 1e-9
    orth: float = 1e-9
    rank: float = 1e-9
    criterion: float = 1e-8
    separable: float = 1e-8
    ppt: float = 1e-9
    recon: float = 1e-8

    def scaled(self, factor: float) -> Tolerances:
        return Tolerances(**{k: v * factor for k, v in dataclasses.asdict(self).items()})

    def override(self, spec: str | None) -> Tolerances:
        """Apply ``"name=value,name=value"`` overrides."""
        if not spec:
            return self
        values = dataclasses.asdict(self)
        for item in spec.split(","):
            name, sep, value = item.partition("=")
            name = name.strip()
            if not sep or name not in values:
                raise ValueError(f"bad --tol-profile item {item!r}; known names: "
                                 f"{', '.join(values)}")
            values[name] = float(value)
        return Tolerances(**values)


def _pair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _digest(raw: bytes) -> str:
    return "sha256:" + hashlib.sha256(raw).hexdigest()


def _write_report(report: dict, path):
    if path is None:
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n")


def _base_report(command, sf, raw, tols) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "command": command,
        "input_digest": _digest(raw),
        "kind": sf.kind,
        "shape": {"num_parties": sf.shape.num_parties, "local_dim": sf.shape.local_dim},
        "tolerance_profile": dataclasses.asdict(tols),
    }


def _tolerances(args) -> Tolerances:
    return Tolerances().scaled(args.tol).override(args.tol_profile)


def _load(args, kinds):
    sf, raw = read_state_file(args.path)
    if sf.kind not in kinds:
        raise StateFileError(f"kind {sf.kind!r} not accepted here, expected one of {kinds}",
                             "kind")
    return sf, raw


def cmd_concurrence(args) -> int:
    tols = _tolerances(args)
    sf, raw = _load(args, ("pure",))
    state = sf.to_state(tol=tols.norm)
    inv = invariants(state, tols.norm)
    c = concurrence(state, tols.norm)
    print(f"concurrence: {c!r}")
    print(f"I0: {inv.i0!r}")
    for cut, value in zip(inv.cuts, inv.biquadratics):
        print(f"I[{cut}]: {value!r}")
    report = _base_report("concurrence", sf, raw, tols)
    report.update(concurrence=c, invariants=inv.as_dict(),
                  separable=bool(c < tols.separable))
    _write_report(report, args.json_out)
    return EXIT_OK


_RESIDUAL_KEYS = ("phase", "proportionality", "root_separation", "common_root", "root_phase",
                  "delta1", "delta2", "gamma_max", "factors1_residual", "factors2_residual",
                  "delta1_reconstruction", "delta2_reconstruction")


def cmd_decide(args) -> int:
    tols = _tolerances(args)
    sf, raw = _load(args, ("rank2", "density"))
    report = _base_report("decide", sf, raw, tols)
    obj = sf.to_state(tol=tols.norm, orth_tol=tols.orth)
    if isinstance(obj, DensityMatrix):
        rho = obj
        state = rank_two_extract(rho, tols.rank)
        report["extracted"] = {"p": state.p,
                               "e1": [_pair(a) for a in state.e1.amplitudes],
                               "e2": [_pair(a) for a in state.e2.amplitudes]}
    else:
        state = obj
        rho = DensityMatrix(state.shape, state.density(), tol=tols.norm)

    verdict = decide_real(state, tols.criterion) if args.real_branch else decide(
        state, tols.criterion)
    w = verdict.witness
    c1, c2 = concurrence(state.e1), concurrence(state.e2)
    report.update(
        decision=verdict.decision.value,
        branch="real" if args.real_branch else "complex",
        failed_check=w.get("failed"),
        p=state.p,
        concurrences={"c_e1": c1, "c_e2": c2},
        theta=w.get("theta"),
        roots=({"mu1": _pair(w["mu1"]), "mu2": _pair(w["mu2"])} if "mu1" in w else None),
        p_prime=(verdict.decomposition.p_prime if verdict.decomposition else None),
        residuals={k: float(w[k]) for k in _RESIDUAL_KEYS if k in w},
    )
    if "certificate_error" in w:
        report["certificate_error"] = list(w["certificate_error"])

    print(f"decision: {verdict.decision.value}")
    print(f"p: {state.p!r}  C(E1): {c1!r}  C(E2): {c2!r}")
    if verdict.failed:
        print(f"failed check: {verdict.failed}")
    if report["roots"] is not None:
        print(f"mu1: {complex(w['mu1'])!r}  mu2: {complex(w['mu2'])!r}  theta: {w.get('theta')!r}")
    if report["p_prime"] is not None:
        print(f"p': {report['p_prime']!r}")

    code = EXIT_OK if verdict.is_separable else EXIT_ENTANGLED
    if args.verify:
        ppt = ppt_check(rho, tols.ppt)
        report["residuals"]["ppt_min_eig"] = {str(c): v for c, v in ppt.per_bipartition}
        print(f"ppt: {'pass' if ppt.passed else 'FAIL'} (min eigenvalue {ppt.min_eigenvalue!r})")
        if verdict.is_separable:
            dec = verdict.decomposition
            ok = dec is not None and dec.factors1 is not None and dec.factors2 is not None
            if dec is not None:
                recon = max_abs_distance(dec.density(), rho.entries)
                report["residuals"]["reconstruction"] = recon
                print(f"reconstruction residual: {recon!r}")
                ok = ok and recon < tols.recon
            ok = ok and ppt.passed
            report["certificate_valid"] = bool(ok)
            if not ok:
                print("certificate check FAILED", file=sys.stderr)
                code = EXIT_CERTIFICATE
    _write_report(report, args.json_out)
    return code


def cmd_verify(args) -> int:
    tols = _tolerances(args)
    sf, raw = _load(args, ("pure", "rank2", "density"))
    report = _base_report("verify", sf, raw, tols)
    obj = sf.to_state(tol=tols.norm, orth_tol=tols.orth)
    if isinstance(obj, PureState):
        product = pure_product_oracle(obj, tols.separable)
        report["product"] = product
        print(f"product state: {product}")
        witnessed = not product
    else:
        rho = obj if isinstance(obj, DensityMatrix) else DensityMatrix(
            obj.shape, obj.density(), tol=tols.norm)
        ppt = ppt_check(rho, tols.ppt)
        report["residuals"] = {"ppt_min_eig": {str(c): v for c, v in ppt.per_bipartition}}
        report["ppt_passed"] = ppt.passed
        for cut, value in ppt.per_bipartition:
            print(f"min eig of partial transpose on {cut}: {value!r}")
        print(f"ppt: {'pass' if ppt.passed else 'FAIL'}")
        witnessed = not ppt.passed
    report["entanglement_witnessed"] = witnessed
    _write_report(report, args.json_out)
    return EXIT_ENTANGLED if witnessed else EXIT_OK


GENERATORS = ("product-mixture", "ghz-orthogonal", "random-pure", "ghz", "product")


def cmd_generate(args) -> int:
    shape = PartyShape(args.parties, args.local_dim)
    rng = np.random.default_rng(args.seed)
    if args.kind == "product-mixture":
        obj = samples.product_mixture(shape, rng, real=args.real)
    elif args.kind == "ghz-orthogonal":
        obj = samples.ghz_orthogonal(shape, args.p, rng, real=args.real)
    elif args.kind == "random-pure":
        obj = samples.random_pure(shape, rng, real=args.real)
    elif args.kind == "ghz":
        obj = ghz_state(shape)
    else:
        obj = samples.random_product(shape, rng, real=args.real)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(state_file_text(obj))
    print(f"wrote {args.kind} ({shape.num_parties} parties, dim {shape.local_dim}) to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rank2sep",
        description="Separability of rank-two multipartite quantum states.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("\n", 2)[2],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("path", help="state file")
        p.add_argument("--tol", type=float, default=1.0,
                       help="factor applied to every default tolerance (default 1)")
        p.add_argument("--tol-profile", default=None,
                       help="per-check overrides, e.g. 'criterion=1e-7,ppt=1e-8'")
        p.add_argument("--json-out", default=None, help="write the machine-readable report here")

    p = sub.add_parser("concurrence", help="generalized concurrence of a pure state")
    common(p)
    p.set_defaults(func=cmd_concurrence)

    p = sub.add_parser("decide", help="separability verdict for a rank-two state")
    common(p)
    p.add_argument("--real-branch", action="store_true",
                   help="use the real-coefficient test (amplitudes must be real)")
    p.add_argument("--verify", action="store_true",
                   help="check the decomposition certificate and run the PPT battery")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("verify", help="criterion-free oracle battery")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="write a reproducible test state file")
    p.add_argument("kind", choices=GENERATORS)
    p.add_argument("out")
    p.add_argument("--parties", "-M", type=int, default=3)
    p.add_argument("--local-dim", "-N", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", type=float, default=0.3, help="E1 weight for ghz-orthogonal")
    p.add_argument("--real", action="store_true", help="real amplitudes")
    p.set_defaults(func=cmd_generate)
    return parser


_ERRORS = (
    ((StateFileError, OSError), EXIT_PARSE, "error"),
    ((NotRankTwo,), EXIT_NOT_RANK_TWO, "not rank two"),
    ((InvalidState, ComplexInput), EXIT_INVALID, "invalid state"),
    # bad shape or tolerance arguments
    ((ValueError,), EXIT_PARSE, "error"),
)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except Exception as exc:
        for classes, code, label in _ERRORS:
            if isinstance(exc, classes):
                break
        else:
            raise
        print(f"{label}: {exc}", file=sys.stderr)
        _write_report({"format_version": FORMAT_VERSION, "command": args.command,
                       "error": type(exc).__name__, "message": str(exc), "exit_code": code},
                      getattr(args, "json_out", None))
        return code


if __name__ == "__main__":
    sys.exit(main())
