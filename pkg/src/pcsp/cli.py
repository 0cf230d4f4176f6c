"""Command-line entry point.

Every command prints one canonical JSON report on stdout.  Exit codes:
0 positive verdict, 1 negative verdict, 2 inconclusive or resource limit,
64 usage error, 65 data error.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time

from . import analysis, catalog, classifier, derivation, polymorphisms, relaxations
from .core import SearchConfig, canonical_json, parse_structure, serialize_structure, structure_to_obj
from .errors import DataError, InvalidTemplate, PromiseViolation, ResourceLimitExceeded, SignatureMismatch

EXIT_POSITIVE, EXIT_NEGATIVE, EXIT_INCONCLUSIVE, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 64, 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def load_structure(arg: str, log):
    """A file path or a catalog key; a file wins when both exist."""
    if os.path.exists(arg):
        if catalog.is_catalog_key(arg):
            log(f"warning: {arg!r} is both a file and a catalog key; using the file")
        with open(arg, encoding="utf-8") as fh:
            return parse_structure(fh.read())
    if catalog.is_catalog_key(arg):
        return catalog.catalog_get(arg)
    raise DataError(f"{arg!r} is neither a readable file nor a catalog key")


def _digest(S) -> str:
    return hashlib.sha256(serialize_structure(S).encode("utf-8")).hexdigest()


def _tuple_arg(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise DataError(f"expected comma-separated integers, got {text!r}") from None


# --------------------------------------------------------------------------
# commands: each returns (exit code, result object)
# --------------------------------------------------------------------------

def cmd_analyze(args, inputs, limits):
    S = inputs["structure"]
    rels = {}
    for rel in S.relations:
        entry = {"arity": rel.arity, "size": len(rel)}
        if rel.tuples:
            w = analysis.is_balanced(rel)
            entry["balanced"] = w is not None
            entry["balance_witness"] = None if w is None else w.to_dict()
        else:
            entry["balanced"] = None
        entry["hypergraph"] = analysis.hypergraph_metrics(S, rel.name).to_dict()
        rels[rel.name] = entry
    try:
        sc = derivation.is_super_connected(S, limits["max_nodes"])
        sc_out = {"super_connected": sc is not None, "super_connected_relation": sc}
    except ResourceLimitExceeded as exc:
        sc_out = {"super_connected": None, "super_connected_resource": str(exc)}
    result = {
        "symmetric": analysis.is_symmetric(S).holds,
        "symmetric_detail": analysis.is_symmetric(S).to_dict(),
        "functional": analysis.is_functional(S).holds,
        "functional_detail": analysis.is_functional(S).to_dict(),
        "balanced": all(r["balanced"] is not False for r in rels.values()),
        "relations": rels,
        **sc_out,
    }
    return EXIT_POSITIVE, result


def _classify(args, inputs, limits):
    A, B = inputs["A"], inputs["B"]
    bounds = classifier.ClassifierBounds.for_template(A, B, limits["m_max"])
    return classifier.classify(A, B, bounds, SearchConfig(max_nodes=limits["max_nodes"]),
                               node_cap=limits["max_nodes"])


def cmd_classify(args, inputs, limits):
    v = _classify(args, inputs, limits)
    code = {classifier.TRACTABLE: EXIT_POSITIVE, classifier.NP_HARD: EXIT_NEGATIVE}.get(v.outcome, EXIT_INCONCLUSIVE)
    return code, v.to_dict()


def cmd_solve(args, inputs, limits):
    v = _classify(args, inputs, limits)
    if v.outcome != classifier.TRACTABLE:
        return EXIT_INCONCLUSIVE, {"solved": False, "reason": f"template verdict is {v.outcome}",
                                   "verdict": v.to_dict()}
    try:
        h = classifier.solve_instance(inputs["instance"], inputs["A"], inputs["B"], v)
    except PromiseViolation as exc:
        return EXIT_NEGATIVE, {"solved": False, "reason": str(exc)}
    return EXIT_POSITIVE, {"solved": True, "homomorphism": list(h), "m": v.m}


def cmd_relax(args, inputs, limits):
    solver = {"blp": relaxations.solve_blp, "aip": relaxations.solve_aip,
              "blp+aip": relaxations.solve_blp_aip}[args.method]
    X, T = inputs["instance"], inputs["template"]
    verdict = solver(X, T)
    system = relaxations.build_relaxation_system(X, T)
    return (EXIT_POSITIVE if verdict.accepted else EXIT_NEGATIVE), verdict.to_dict(system)


def cmd_poly(args, inputs, limits):
    A, B = inputs["A"], inputs["B"]
    config = SearchConfig(max_nodes=limits["max_nodes"])
    if args.enumerate is not None:
        polys = polymorphisms.enumerate_polymorphisms(A, B, args.enumerate, limits["enum_cap"], config)
        result = {"arity": args.enumerate, "count": len(polys), "tables": [list(f.values) for f in polys]}
        if args.collisions:
            result["additivity_collisions"] = len(polymorphisms.additivity_collisions(polys))
            result["dependency_collisions"] = len(polymorphisms.dependency_collisions(polys))
        return (EXIT_POSITIVE if polys else EXIT_NEGATIVE), result
    table = polymorphisms.exists_factored_polymorphism(A, B, args.kind, args.k, config, limits["enum_cap"])
    result = {"kind": args.kind, "k": args.k, "arity": 2 * args.k + 1, "exists": table is not None}
    if table is not None:
        result["table"] = table.to_dict()
    return (EXIT_POSITIVE if table is not None else EXIT_NEGATIVE), result


def cmd_derive(args, inputs, limits):
    S = inputs["structure"]
    rel = args.relation or S.relations[0].name
    ctx = derivation.DerivationContext(S, rel, args.n)
    if args.premises == "gamma":
        if args.n != 3:
            raise DataError("the repeated-pattern premises are triples; use --n 3")
        premises = derivation.gamma(S)
    elif args.premises == "delta":
        premises = derivation.delta(S, args.n)
    else:
        premises = {_tuple_arg(p) for p in args.premises.split(";") if p.strip()}
    if args.target is None:
        D = derivation.derivable_set(ctx, premises, limits["max_nodes"])
        complete = len(D) == S.domain_size ** args.n
        return (EXIT_POSITIVE if complete else EXIT_NEGATIVE), {
            "relation": rel, "derived": len(D), "of": S.domain_size ** args.n, "complete": complete,
            "tuples": [list(t) for t in sorted(D)]}
    target = _tuple_arg(args.target)
    tree = derivation.derives(ctx, premises, target, limits["max_nodes"])
    if tree is None:
        return EXIT_NEGATIVE, {"relation": rel, "target": list(target), "derivable": False}
    return EXIT_POSITIVE, {"relation": rel, "target": list(target), "derivable": True, "depth": tree.depth,
                           "valid": derivation.validate_proof(tree, S.relation(rel).tuples, premises),
                           "proof": tree.to_dict()}


def cmd_catalog(args, inputs, limits):
    if args.key is None:
        return EXIT_POSITIVE, {"keys": sorted(catalog.CATALOG), "standard": sorted(catalog.standard_templates())}
    S = catalog.catalog_get(args.key)
    return EXIT_POSITIVE, {"key": args.key, "structure": structure_to_obj(S)}


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--max-nodes", type=int, default=2_000_000,
                        help="node budget for searches and derivations (default 2000000)")
    common.add_argument("--m-max", type=int, default=None,
                        help="largest modulus tried by the classifier (default |B|^(a^2))")
    common.add_argument("--enum-cap", type=int, default=2_000_000,
                        help="size cap for enumerations and constraint sets (default 2000000)")
    common.add_argument("--verbose", action="store_true", help="human-readable summary on stderr")

    p = _Parser(prog="pcsp", description="Promise CSP toolkit for symmetric and functional templates.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("analyze", parents=[common], help="structural predicates of one structure")
    s.add_argument("--structure", required=True)

    s = sub.add_parser("classify", parents=[common], help="tractable / NP-hard verdict for (A, B)")
    s.add_argument("--A", required=True)
    s.add_argument("--B", required=True)

    s = sub.add_parser("solve", parents=[common], help="solve an instance through the sandwich")
    s.add_argument("--A", required=True)
    s.add_argument("--B", required=True)
    s.add_argument("--instance", required=True)

    s = sub.add_parser("relax", parents=[common], help="run BLP, AIP or BLP+AIP")
    s.add_argument("--method", required=True, choices=["blp", "aip", "blp+aip"])
    s.add_argument("--template", required=True)
    s.add_argument("--instance", required=True)

    s = sub.add_parser("poly", parents=[common], help="symmetric polymorphism search or enumeration")
    s.add_argument("--A", required=True)
    s.add_argument("--B", required=True)
    s.add_argument("--kind", choices=["alternating", "block_symmetric"], default="alternating")
    s.add_argument("--k", type=int, default=1, help="arity is 2k+1")
    s.add_argument("--enumerate", type=int, metavar="N", help="list all N-ary polymorphisms instead")
    s.add_argument("--collisions", action="store_true", help="with --enumerate, run the profile collision scans")

    s = sub.add_parser("derive", parents=[common], help="derivations over one relation")
    s.add_argument("--structure", required=True)
    s.add_argument("--relation")
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--premises", default="gamma",
                   help="'gamma', 'delta', or tuples like '0,0,1;1,0,1'")
    s.add_argument("--target", help="tuple like '1,1,0'; omit to print the derivable set")

    s = sub.add_parser("catalog", parents=[common], help="list catalog keys or print one structure")
    s.add_argument("key", nargs="?")
    return p


COMMANDS = {
    "analyze": (cmd_analyze, ["structure"]),
    "classify": (cmd_classify, ["A", "B"]),
    "solve": (cmd_solve, ["A", "B", "instance"]),
    "relax": (cmd_relax, ["template", "instance"]),
    "poly": (cmd_poly, ["A", "B"]),
    "derive": (cmd_derive, ["structure"]),
    "catalog": (cmd_catalog, []),
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    def log(msg):
        print(msg, file=stderr)

    func, names = COMMANDS[args.command]
    limits = {"max_nodes": args.max_nodes, "m_max": args.m_max, "enum_cap": args.enum_cap}
    report = {"command": args.command, "limits": limits}
    start = time.perf_counter()
    try:
        inputs = {name: load_structure(getattr(args, name), log) for name in names}
        report["inputs"] = {name: {"source": getattr(args, name), "sha256": _digest(S)} for name, S in inputs.items()}
        code, result = func(args, inputs, limits)
        report["result"] = result
    except ResourceLimitExceeded as exc:
        code = EXIT_INCONCLUSIVE
        report["result"] = {"resource_limit": str(exc), "limit": exc.limit}
    except (DataError, SignatureMismatch, InvalidTemplate, KeyError) as exc:
        log(f"data error: {exc}")
        return EXIT_DATA
    if args.verbose:
        log(f"{args.command}: exit {code} in {time.perf_counter() - start:.3f}s")
        for key, val in report.get("result", {}).items():
            if not isinstance(val, (dict, list)):
                log(f"  {key}: {val}")
    stdout.write(canonical_json(report) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
