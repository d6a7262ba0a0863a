"""Command-line interface.

Every subcommand writes a JSON certificate (to stdout, or to ``--out`` with a
one-line summary on stdout) and exits 0 when the property holds, 1 when it
fails and 2 on any input or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import FamilyMismatch, StatcatError
from .inference import (
    check_equivalence,
    is_complete,
    is_sufficient,
    oracle_search,
    verify_equivalence_certificate,
)
from .io import (
    CERTIFICATE_SCHEMA,
    dumps,
    encode,
    kernel_from_json,
    map_from_document,
    model_from_document,
    read,
)
from .kernels import (
    bayes_identity_check,
    detailed_balance_check,
    dual_conditional,
    kernel_from_map,
    regular_conditional,
)
from .measure import SigmaAlgebra, uniform_mixture
from .morphisms import (
    classify_morphism,
    induce_morphism,
    l1_identity_partition,
    morphism_onto,
)
from .parametrisation import analyze_parametrisation, minimal_length, structural_equivalence
from .topology import canonical_topology, is_kolmogorov_equivalent, kolmogorov_quotient

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class Session:
    """Loads inputs once and remembers their digests for the certificate."""

    def __init__(self):
        self.inputs = {}

    def model(self, role: str, name: str):
        loaded = read(name, "model")
        self.inputs[role] = {"name": name, "sha256": loaded.sha256}
        return model_from_document(loaded.doc)

    def map(self, name: str, domain, codomain=None):
        loaded = read(name, "map")
        self.inputs["map"] = {"name": name, "sha256": loaded.sha256}
        return map_from_document(loaded.doc, domain, codomain)


def _verdict(passed: bool) -> str:
    return "pass" if passed else "fail"


def _report(report) -> dict:
    out = {"verdict": report.verdict}
    if report.witness is not None:
        out["witness"] = encode(report.witness)
    if report.certificate is not None:
        out["certificate"] = encode(report.certificate)
    return out


def _class_names(model, part):
    return [[model.names[i] for i in c] for c in part.classes]


# -- subcommands -----------------------------------------------------------


def cmd_sufficient(args, s: Session) -> dict:
    model = s.model("model", args.model).model
    t = s.map(args.map, model.sigma)
    subfamily = [model.index(n) for n in args.member] if args.member else None
    r = is_sufficient(model, t, subfamily)
    return {"verdict": r.verdict, "route": r.route, **_report(r)}


def cmd_complete(args, s: Session) -> dict:
    source = s.model("model_a", args.model_a).model
    target = s.model("model_b", args.model_b).model
    t = s.map(args.map, source.sigma, target.sigma)
    source_sigma = None
    if args.source_partition:
        blocks = json.loads(args.source_partition)
        source_sigma = SigmaAlgebra.from_labels(source.space, blocks)
    r = is_complete(target, t, source_sigma)
    return {"verdict": r.verdict, "route": r.route, **_report(r)}


def cmd_equivalent(args, s: Session) -> dict:
    a = s.model("model_a", args.model_a).model
    b = s.model("model_b", args.model_b).model
    out = {}
    if args.map:
        t = s.map(args.map, a.sigma, b.sigma)
        v = check_equivalence(a, b, t, workers=args.threads)
        out["routes"] = {r.route: _report(r) for r in v.routes}
        out["agree"] = v.agree
        out["verdict"] = _verdict(v.passed)
        if v.route_iso.passed:
            forward, backward = v.route_iso.certificate
            out["certificate"] = {"forward": encode(forward), "backward": encode(backward)}
    if args.oracle:
        res = oracle_search(a, b)
        out["oracle"] = {
            "maps_tried": res.maps_tried,
            "candidates": len(res.entries),
            "equivalent_maps": [e.assignment for e in res.entries if e.verdict.route_iso.passed],
            "routes_agree": all(e.verdict.agree for e in res.entries),
        }
        if not args.map:
            out["verdict"] = _verdict(res.exists)
    return out


def cmd_classify(args, s: Session) -> dict:
    source = s.model("model", args.model).model
    if args.target:
        target = s.model("target", args.target).model
        f = morphism_onto(source, target, s.map(args.map, source.sigma, target.sigma))
    else:
        f = induce_morphism(source, s.map(args.map, source.sigma))
    c = classify_morphism(f)
    out = {
        "verdict": _verdict(c.iso_reverse_kernel),
        "mono": c.mono,
        "epi": c.epi,
        "iso_naive": c.iso_naive,
        "iso_reverse_kernel": c.iso_reverse_kernel,
    }
    if c.reverse_kernel is not None:
        out["certificate"] = {"reverse_kernel": encode(c.reverse_kernel)}
    if c.certificate is not None:
        out["certificate"] = {"infeasibility": encode(c.certificate)}
    if c.witness is not None:
        out["witness"] = encode(c.witness)
    return out


def cmd_bayes(args, s: Session) -> dict:
    model = s.model("model", args.model).model
    k = kernel_from_map(s.map(args.map, model.sigma))
    members = [model.index(n) for n in args.member] if args.member else range(len(model))
    checks = {}
    for i in members:
        checks[model.names[i]] = bayes_identity_check(k, model.family[i])
    failed = [n for n, r in checks.items() if not r.passed]
    out = {
        "verdict": _verdict(not failed),
        "checked_pairs": {n: r.checked for n, r in checks.items()},
    }
    if failed:
        out["witness"] = {"member": failed[0], "pair": list(checks[failed[0]].witness)}
    return out


def cmd_balance(args, s: Session) -> dict:
    model = s.model("model", args.model).model
    k = kernel_from_map(s.map(args.map, model.sigma))
    am = model.atomic()
    ref = am.family[model.index(args.reference)] if args.reference else uniform_mixture(am.family)
    ka = k.atomic()
    forward = regular_conditional(ka, ref)
    backward = dual_conditional(ka, ref)
    r = detailed_balance_check(forward, backward, am.family, workers=args.threads)
    out = {"verdict": r.verdict, "route": r.route, "checked_members": r.checked}
    if r.passed:
        out["certificate"] = {"forward": encode(forward.kernel), "backward": encode(backward.kernel)}
    else:
        idx, x, y = r.witness
        out["witness"] = {"member": am.names[idx], "x": x, "y": y}
    return out


def cmd_quotient(args, s: Session) -> dict:
    model = s.model("model", args.model).model
    part = l1_identity_partition(model)
    q = kolmogorov_quotient(canonical_topology(model))
    again = kolmogorov_quotient(q.quotient)
    ok = q.classes == part.classes and q.quotient.is_t0() and again.quotient == q.quotient
    return {
        "verdict": _verdict(ok),
        "l1_classes": _class_names(model, part),
        "kolmogorov_classes": [[model.names[i] for i in c] for c in q.classes],
        "quotient_opens": encode(q.quotient),
    }


def cmd_canonical_topology(args, s: Session) -> dict:
    model = s.model("model", args.model).model
    t = canonical_topology(model)
    part = l1_identity_partition(model)
    q = kolmogorov_quotient(t)
    return {
        "verdict": _verdict(q.classes == part.classes),
        "members": list(model.names),
        "opens": encode(t),
        "minimal_base": [sorted(u) for u in t.minimal_base()],
        "indistinguishable": [[model.names[i] for i in c] for c in q.classes],
    }


def cmd_kq_equivalent(args, s: Session) -> dict:
    a = s.model("model_a", args.model_a).model
    b = s.model("model_b", args.model_b).model
    qa = kolmogorov_quotient(canonical_topology(a))
    qb = kolmogorov_quotient(canonical_topology(b))
    perm = is_kolmogorov_equivalent(canonical_topology(a), canonical_topology(b))
    out = {"verdict": _verdict(perm is not None)}
    if perm is not None:
        out["certificate"] = {
            "bijection": [
                [[a.names[i] for i in qa.classes[x]], [b.names[i] for i in qb.classes[y]]]
                for x, y in enumerate(perm)
            ]
        }
    else:
        out["witness"] = {"classes_a": len(qa.classes), "classes_b": len(qb.classes)}
    return out


def cmd_param(args, s: Session) -> dict:
    doc = s.model("model", args.model)
    if doc.parametrisation is None:
        raise StatcatError("the model document has no parametrisation block")
    r = analyze_parametrisation(doc.parametrisation, doc.model)
    out = {
        "verdict": _verdict(r.identifiable),
        "cardinality": r.cardinality,
        "length": r.length,
        "affine_rank": r.affine_rank,
    }
    if r.witness is not None:
        first, second = r.witness
        if first is None:
            out["witness"] = {"uncovered_class": [doc.model.names[i] for i in second]}
        else:
            out["witness"] = {"collision": [encode(list(first)), encode(list(second))]}
    return out


def cmd_minimal(args, s: Session) -> dict:
    model = s.model("model", args.model).model
    length, theta = minimal_length(model, args.category)
    check = analyze_parametrisation(theta, model)
    return {
        "verdict": _verdict(check.identifiable),
        "length": length,
        "certificate": {
            "parameters": encode([list(t) for t in theta.parameters]),
            "assignment": [model.names[i] for i in theta.assignment],
        },
    }


def cmd_structural(args, s: Session) -> dict:
    a = s.model("model_a", args.model_a).model
    b = s.model("model_b", args.model_b).model
    r = structural_equivalence(a, b, args.category)
    return {"route": r.route, **_report(r)}


COMMANDS = {
    "sufficient": cmd_sufficient,
    "complete": cmd_complete,
    "equivalent": cmd_equivalent,
    "classify": cmd_classify,
    "bayes": cmd_bayes,
    "balance": cmd_balance,
    "quotient": cmd_quotient,
    "canonical-topology": cmd_canonical_topology,
    "kq-equivalent": cmd_kq_equivalent,
    "param": cmd_param,
    "minimal": cmd_minimal,
    "structural": cmd_structural,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker threads (output is unaffected)")
    common.add_argument("--out", help="write the certificate here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="statcat", description="Exact checks on finite statistical models."
    )
    parser.add_argument("--version", action="version", version=f"statcat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help):
        return sub.add_parser(name, help=help, parents=[common])

    p = add("sufficient", "is the map a sufficient statistic")
    p.add_argument("--model", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--member", action="append", help="restrict to these family members")

    p = add("complete", "is the map complete for the target model")
    p.add_argument("--model-a", required=True)
    p.add_argument("--model-b", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--source-partition", help="JSON list of label blocks generating the image algebra")

    p = add("equivalent", "statistical equivalence by three routes")
    p.add_argument("--model-a", required=True)
    p.add_argument("--model-b", required=True)
    p.add_argument("--map")
    p.add_argument("--oracle", action="store_true", help="also search all maps (4 points at most)")

    p = add("classify", "mono/epi/iso classification of the induced morphism")
    p.add_argument("--model", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--target", help="target model; defaults to the pushforward family")

    p = add("bayes", "Bayes identity for the map's kernel")
    p.add_argument("--model", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--member", action="append")

    p = add("balance", "detailed balance of one conditional pair across the family")
    p.add_argument("--model", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--reference", help="member whose dual is the backward table (default: mixture)")

    p = add("quotient", "L1-classes and the Kolmogorov quotient of the canonical topology")
    p.add_argument("--model", required=True)

    p = add("canonical-topology", "canonical topology of the model family")
    p.add_argument("--model", required=True)

    p = add("kq-equivalent", "Kolmogorov equivalence of canonical topologies")
    p.add_argument("--model-a", required=True)
    p.add_argument("--model-b", required=True)

    p = add("param", "analyze the model's parametrisation")
    p.add_argument("--model", required=True)

    p = add("minimal", "minimal parametrisation length")
    p.add_argument("--model", required=True)
    p.add_argument("--category", default="Set")

    p = add("structural", "structural equivalence in Set or FinTop")
    p.add_argument("--model-a", required=True)
    p.add_argument("--model-b", required=True)
    p.add_argument("--category", default="Set")
    return parser


def run(argv=None) -> tuple[int, dict | None]:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be positive")
    if args.command == "equivalent" and not (args.map or args.oracle):
        parser.error("equivalent needs --map, --oracle or both")
    session = Session()
    try:
        body = COMMANDS[args.command](args, session)
    except FamilyMismatch as e:
        name, image = e.witness
        body = {
            "verdict": "fail",
            "reason": "family-mismatch",
            "witness": {"member": name, "distribution": encode(image)},
        }
    doc = {
        "schema": CERTIFICATE_SCHEMA,
        "command": args.command,
        "inputs": session.inputs,
        "tool_version": __version__,
        **body,
    }
    code = EXIT_PASS if doc["verdict"] == "pass" else EXIT_FAIL
    text = dumps(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"{args.command}: {doc['verdict']}")
    else:
        sys.stdout.write(text)
    return code, doc


def main(argv=None) -> int:
    try:
        code, _ = run(argv)
    except SystemExit as e:
        # argparse reports usage errors with status 2 and --help/--version with 0
        return e.code if isinstance(e.code, int) else EXIT_ERROR
    except (StatcatError, OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"statcat: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:  # the exit-code contract covers unexpected failures too
        print(f"statcat: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR
    return code


def revalidate_certificate(doc: dict, modelA, modelB) -> bool:
    """Reload the kernels of a passing `equivalent` certificate and re-check
    them exactly against both families."""
    if doc.get("command") != "equivalent" or doc.get("verdict") != "pass":
        return False
    forward = kernel_from_json(doc["certificate"]["forward"])
    backward = kernel_from_json(doc["certificate"]["backward"])
    return verify_equivalence_certificate(modelA, modelB, forward, backward)


if __name__ == "__main__":
    sys.exit(main())
