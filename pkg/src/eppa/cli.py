"""Command-line entry point: ``eppa extend | verify | oracle``.

Exit codes: 0 success, 2 invalid input, 3 budget exhausted, 4 unsupported
instance, 5 verification mismatch.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import io
from .errors import (
    BudgetError,
    CapacityError,
    EppaError,
    InvariantError,
    MalformedInputError,
    PreconditionError,
    RankError,
    SeparationBudgetError,
    UnsupportedInstanceError,
)
from .hilbert import identity, mat_mul, mat_vec, reflection, witt_extend
from .malg import Algebra, extend_partial_automorphisms, good_check, refines, verify_extension_malg
from .metric import (
    equivalence_classes,
    check_result,
    classify_chains,
    extend_isometries,
    verify_extension,
)
from .oracles import classify_with_oracle

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3
EXIT_UNSUPPORTED = 4
EXIT_MISMATCH = 5


class Mismatch(EppaError):
    def __init__(self, report):
        self.report = report
        super().__init__("verification failed")


def _report(status: str, **fields) -> dict:
    return {"status": status, **fields}


# ----------------------------------------------------------------------
# extend


def _extend_metric(env, opts) -> dict:
    space, maps = io.parse_metric(env.payload)
    result = extend_isometries(space, maps, opts["budget_order"], opts["max_degree"])
    return io.metric_result_doc(env, result)


def _extend_malg(env, opts) -> dict:
    A = io.parse_malg(env.payload)
    B = extend_partial_automorphisms(A)
    report = good_check(A, B)
    if not report.good:
        raise InvariantError("refinement is not good", report.witness)
    return {"kind": "malg", "instance_digest": env.digest, "status": "ok", "refinement": B.to_json()}


def _extend_hilbert(env, opts) -> dict:
    space, phi, _ = io.parse_hilbert(env.payload)
    res = witt_extend(space, phi)
    return {"kind": "hilbert", "instance_digest": env.digest, "status": "ok", **res.to_json()}


EXTENDERS = {"metric": _extend_metric, "malg": _extend_malg, "hilbert": _extend_hilbert}


# ----------------------------------------------------------------------
# verify


def _verify_metric(env, doc, opts) -> dict:
    space, maps = io.parse_metric(env.payload)
    result = io.metric_result_from_doc(space, maps, doc)
    problems = check_result(space, maps, result)
    expected = equivalence_classes(space, maps, result.quotient, result.elements)
    if [tuple(c) for c in expected] != [tuple(c) for c in result.classes]:
        problems.append(("classes differ from the quotient's equivalence classes",))
    if problems:
        raise Mismatch({"problems": [_describe(p) for p in problems]})
    report = verify_extension(space, maps, result, opts["oracle_depth"])
    if not report.ok:
        raise Mismatch({"mismatches": report.mismatches, "chain_failures": [list(c) for c in report.chain_failures]})
    return {"checked": report.checked, "inconclusive": report.inconclusive}


def _describe(problem) -> str:
    kind, *rest = problem
    if kind in ("asymmetric", "nonpositive distance", "not an isometry"):
        return f"{kind} at class pair {tuple(rest[-2:])}" if kind != "not an isometry" else \
            f"{kind}: generator {rest[0]} at class pair {tuple(rest[1:])}"
    if kind == "triangle":
        return f"triangle inequality fails on classes {tuple(rest)}"
    return " ".join(str(x) for x in problem)


def _verify_malg(env, doc, opts) -> dict:
    A = io.parse_malg(env.payload)
    try:
        B = Algebra.from_json(doc["refinement"])
    except (KeyError, TypeError) as exc:
        raise MalformedInputError(f"malformed malg result: {exc}") from exc
    if not refines(B, A):
        raise Mismatch({"problem": "result is not a refinement of the instance"})
    good = good_check(A, B)
    if not good.good:
        raise Mismatch({"problem": "refinement is not good", "witness": list(good.witness)})
    report = verify_extension_malg(A, B)
    if not report.ok:
        raise Mismatch({"problem": "partial automorphism does not extend", "failure": report.failure})
    return {"checked": report.checked}


def _verify_hilbert(env, doc, opts) -> dict:
    space, phi, _ = io.parse_hilbert(env.payload)
    try:
        M = io.matrix_from_json(doc["matrix"])
        ws = [tuple(io.parse_scalar(str(x)) for x in w) for w in doc["reflections"]]
    except (KeyError, TypeError) as exc:
        raise MalformedInputError(f"malformed hilbert result: {exc}") from exc
    if len(M) != space.dim or any(len(r) != space.dim for r in M):
        raise MalformedInputError("matrix size does not match dim")
    problems = []
    if not space.is_isometry(M):
        problems.append("M^T G M differs from G")
    for j, (u, v) in enumerate(zip(phi.domain, phi.images)):
        if mat_vec(M, u) != v:
            problems.append(f"M does not send domain vector {j} to its image")
    product = identity(space.dim)
    for w in ws:
        r = reflection(space, w)
        if mat_mul(r, r) != identity(space.dim):
            problems.append("a reflection is not an involution")
        product = mat_mul(r, product)
    if product != M:
        problems.append("product of reflections differs from M")
    if problems:
        raise Mismatch({"problems": problems})
    return {"checked": len(phi.domain) + len(ws) + 1}


VERIFIERS = {"metric": _verify_metric, "malg": _verify_malg, "hilbert": _verify_hilbert}


# ----------------------------------------------------------------------
# oracle


def _oracle(env, opts) -> dict:
    if env.kind != "metric":
        raise MalformedInputError("the oracle command accepts metric instances only")
    space, maps = io.parse_metric(env.payload)
    depth = opts["oracle_depth"]
    trivial, nontrivial = classify_chains(space, maps)
    cache: dict = {}
    counts = {"agree": 0, "disagree": 0, "inconclusive": 0}
    disagreements = []
    verdicts = [(sig, True, w) for sig, w in trivial.items()] + [(sig, False, None) for sig in nontrivial]
    for sig, engine_trivial, witness in verdicts:
        v = classify_with_oracle(maps, sig, engine_trivial, witness, depth, cache=cache)
        if v.agrees is None:
            counts["inconclusive"] += 1
        elif v.agrees:
            counts["agree"] += 1
        else:
            counts["disagree"] += 1
            disagreements.append({"pairs": [list(p) for p in sig], "engine_trivial": engine_trivial,
                                  "oracle": v.oracle})
    result = extend_isometries(space, maps, opts["budget_order"], opts["max_degree"])
    dist = verify_extension(space, maps, result, depth)
    out = {"chains": counts, "distance_checks": {"checked": dist.checked, "inconclusive": dist.inconclusive,
                                                  "mismatches": dist.mismatches}}
    if disagreements or not dist.ok:
        raise Mismatch({**out, "disagreements": disagreements,
                        "chain_failures": [list(c) for c in dist.chain_failures]})
    out["warning"] = bool(counts["inconclusive"] or dist.inconclusive)
    return out


# ----------------------------------------------------------------------
# driver


def _load_envelope(path):
    return io.parse_envelope(io.load_json(path))


def _options(env, args) -> dict:
    return io.resolve_options(env, {"budget_order": args.budget_order, "max_degree": args.max_degree,
                                    "oracle_depth": args.oracle_depth, "seed": args.seed})


def run(args) -> tuple[int, dict]:
    started = time.perf_counter()
    try:
        env = _load_envelope(args.instance)
        opts = _options(env, args)
        if args.command == "extend":
            doc = EXTENDERS[env.kind](env, opts)
            if args.verify:
                doc_check = VERIFIERS[env.kind](env, doc, opts)
                doc["verification"] = doc_check
            if args.out:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(io.dumps(doc))
            report = _report("ok", kind=env.kind, out=args.out, verification=doc.get("verification"))
            if not args.out:
                report["result"] = doc
        elif args.command == "verify":
            doc = io.load_json(args.result)
            if not isinstance(doc, dict) or doc.get("kind") != env.kind or doc.get("instance_digest") != env.digest:
                raise MalformedInputError("result file does not belong to this instance")
            report = _report("ok", kind=env.kind, verification=VERIFIERS[env.kind](env, doc, opts))
        else:
            report = _report("ok", kind=env.kind, oracle=_oracle(env, opts))
        code = EXIT_OK
    except Mismatch as exc:
        code, report = EXIT_MISMATCH, _report("mismatch", counterexample=exc.report)
    except InvariantError as exc:
        code, report = EXIT_MISMATCH, _report("mismatch", error=str(exc))
    except SeparationBudgetError as exc:
        code, report = EXIT_BUDGET, _report("budget-exhausted", error=str(exc), last_degree=exc.last_degree)
    except BudgetError as exc:
        code, report = EXIT_BUDGET, _report("budget-exhausted", error=str(exc))
    except (UnsupportedInstanceError, CapacityError) as exc:
        code, report = EXIT_UNSUPPORTED, _report("unsupported-instance", error=str(exc))
    except (MalformedInputError, PreconditionError, RankError) as exc:
        extra = {"triple": list(exc.triple)} if hasattr(exc, "triple") else {}
        code, report = EXIT_INVALID, _report("invalid-input", error=str(exc), **extra)
    report["timing_seconds"] = round(time.perf_counter() - started, 3)
    return code, report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eppa", description="Extend partial automorphisms of finite structures.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget-order", type=int, default=None, help="largest quotient order (default 10000)")
    common.add_argument("--max-degree", type=int, default=None, help="largest symmetric-group degree (default 6)")
    common.add_argument("--oracle-depth", type=int, default=None, help="chain length for oracles (default 8)")
    common.add_argument("--seed", type=int, default=None, help="seed for sampled checks (default 0)")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("extend", parents=[common], help="build an extension and its certificate")
    p.add_argument("instance")
    p.add_argument("--out", default=None, help="write the result document here")
    p.add_argument("--verify", action="store_true", help="run the independent checks on the result")
    p = sub.add_parser("verify", parents=[common], help="check a result document against its instance")
    p.add_argument("instance")
    p.add_argument("result")
    p = sub.add_parser("oracle", parents=[common], help="compare engine answers with brute-force oracles")
    p.add_argument("instance")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    code, report = run(args)
    sys.stdout.write(io.dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
