"""Command-line interface: ``treelike <command> ...``.

Every command prints one JSON envelope with sorted keys (``patterns`` prints
the pattern-set text format unless ``--json`` is given).  Exit codes: 0 for
success or a true verdict, 1 for a false verdict or failed replay, 2 for
usage errors, 3 when a budget ran out before a verdict.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import signal
import sys
from concurrent.futures.process import BrokenProcessPool
from typing import Optional

from . import __version__
from .appendix import fragment_names, reference_set
from .cdc import (
    CDCError,
    find_cdc,
    is_congruent,
    packing_profile,
    treelike_5cdc,
    verify_cdc,
)
from .chromatic import (
    EI5Certificate,
    certify_ei5,
    excessive_index,
    fragment_cuts,
    inclusion_fact,
    replay_ei5,
    verify_cover_witness,
    verify_snark,
    witness_matchings,
)
from .constructions import (
    NAMED,
    Fragment,
    SpecError,
    as_snark_expr,
    bracket_str,
    build_fragment,
    halin_graph,
    named_instance,
    parse_bracket,
    treelike_snark,
)
from .flows import (
    PQFlow,
    find_pq_flow,
    phi_c_exact_small,
    phi_c_lower_cert,
    replay_structural,
    structural_phi5_certificate,
    verify_pq_flow,
)
from .graph import GenGraph, are_isomorphic, bits, mask_of
from .matchcover import PatternError, PatternSet, pattern_set, pattern_set_equal

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class TimeLimit(Exception):
    pass


# -- inputs ------------------------------------------------------------------


def load_input(spec: str):
    """Graph or fragment named by ``spec``.

    Accepted: an instance name, ``halin:<tree>`` for the Halin graph itself,
    ``file:<path>`` for the line graph format, a Halin tree such as
    ``(L,L,L)`` or a fusion expression such as ``F*(F+F)`` for a treelike
    snark, or a bracket such as ``F+F`` for a fragment.
    """
    s = spec.strip()
    try:
        if s in NAMED:
            return named_instance(s)
        if s.startswith("halin:"):
            return halin_graph(s[len("halin:"):])
        if s.startswith("file:"):
            with open(s[len("file:"):], encoding="ascii") as fh:
                return GenGraph.from_text(fh.read())
        if "*" in s or "L" in s:
            return treelike_snark(s)
        return build_fragment(parse_bracket(s))
    except (SpecError, ValueError, OSError) as exc:
        raise UsageError(f"cannot read {spec!r}: {exc}") from exc


def load_graph(spec: str) -> GenGraph:
    obj = load_input(spec)
    if isinstance(obj, Fragment):
        raise UsageError(f"{spec!r} is a fragment; this command needs a closed graph")
    return obj


def load_fragment(spec: str) -> tuple[Fragment, str]:
    obj = load_input(spec)
    if not isinstance(obj, Fragment):
        raise UsageError(f"{spec!r} is not a fragment expression")
    return obj, bracket_str(parse_bracket(spec))


def snark_cuts(spec: str) -> list:
    try:
        return fragment_cuts(as_snark_expr(spec))
    except (SpecError, TypeError, ValueError):
        return []


def envelope(kind: str, spec: str, payload: dict, status: str) -> dict:
    return {"kind": kind, "version": __version__, "input": spec, "payload": payload, "status": status}


def masks_to_lists(masks) -> list[list[int]]:
    return [list(bits(m)) for m in masks]


# -- commands ----------------------------------------------------------------


def cmd_build(args) -> tuple[dict, int]:
    obj = load_input(args.spec)
    if isinstance(obj, Fragment):
        g = obj.graph
        payload = {"fragment": True, "graph": g.to_text(loose_order=obj.spokes)}
    else:
        g = obj
        payload = {"fragment": False, "graph": g.to_text()}
    payload.update(vertices=g.num_vertices, edges=g.num_edges, loose=len(g.loose()))
    return envelope("graph", args.spec, payload, "ok"), EXIT_OK


def _pattern_set(args, frag: Fragment, name: str) -> PatternSet:
    return pattern_set(
        frag, name, jobs=args.jobs, method=args.method, max_nodes=args.max_nodes,
        max_matchings=args.max_matchings,
    )


def cmd_patterns(args) -> tuple[object, int]:
    frag, name = load_fragment(args.spec)
    ps = _pattern_set(args, frag, name)
    code = EXIT_OK if ps.complete else EXIT_BUDGET
    if not args.json:
        return ps.to_text(), code
    payload = {"fragment": name, "count": len(ps), "patterns": ps.to_text().splitlines()[1:]}
    return envelope("patterns", args.spec, payload, "complete" if ps.complete else "incomplete"), code


def cmd_appendix_check(args) -> tuple[dict, int]:
    overrides = {}
    for item in args.reference or []:
        try:
            with open(item, encoding="ascii") as fh:
                ps = PatternSet.from_text(fh.read())
        except (OSError, PatternError) as exc:
            raise UsageError(f"cannot read reference {item!r}: {exc}") from exc
        overrides[bracket_str(parse_bracket(ps.fragment))] = ps
    names = args.fragments or fragment_names()
    computed, report = {}, []
    ok, complete = True, True
    for name in names:
        key = bracket_str(parse_bracket(name))
        ps = _pattern_set(args, build_fragment(parse_bracket(name)), key)
        computed[key] = ps
        ref = overrides.get(key) or reference_set(name)
        complete &= ps.complete
        missing = sorted(ref.as_set() - ps.as_set())
        extra = sorted(ps.as_set() - ref.as_set())
        same = pattern_set_equal(ps, ref)
        ok &= same
        report.append({
            "fragment": key,
            "computed": len(ps),
            "reference": len(ref),
            "match": same,
            "missing": [" ".join(p) for p in missing],
            "extra": [" ".join(p) for p in extra],
        })
    facts = []
    for rule in ("i", "ii"):
        fact = inclusion_fact(rule, computed) if _has_rule_sets(rule, computed) else None
        if fact is not None:
            facts.append(fact)
            ok &= fact["holds"] and fact["strict"]
    a, b = "(F+(F+F))", "((F+F)+F)"
    nonassoc = None
    if a in computed and b in computed:
        nonassoc = not pattern_set_equal(computed[a], computed[b])
        ok &= nonassoc
    payload = {"fragments": report, "inclusions": facts, "non_associative": nonassoc}
    if not complete:
        return envelope("appendix_check", "appendix", payload, "incomplete"), EXIT_BUDGET
    return envelope("appendix_check", "appendix", payload, "match" if ok else "mismatch"), (
        EXIT_OK if ok else EXIT_FALSE
    )


def _has_rule_sets(rule: str, computed: dict) -> bool:
    from .chromatic import RULES

    old, new = RULES[rule]
    return bracket_str(old) in computed and bracket_str(new) in computed


def cmd_snark_verify(args) -> tuple[dict, int]:
    g = load_graph(args.spec)
    rep = verify_snark(g, snark_cuts(args.spec))
    payload = rep.as_dict()
    payload.update(graph=g.to_text(), vertices=g.num_vertices)
    return envelope("snark_report", args.spec, payload, "snark" if rep.is_snark else "not-snark"), (
        EXIT_OK if rep.is_snark else EXIT_FALSE
    )


def cmd_excessive(args) -> tuple[dict, int]:
    g = load_graph(args.spec)
    res = excessive_index(g, k_max=args.k_max, max_matchings=args.max_matchings, max_nodes=args.max_nodes)
    payload = {
        "graph": g.to_text(),
        "k_max": args.k_max,
        "matchings": res.matchings,
        "refuted_k": sorted(res.refuted),
        "value": res.label(),
        "witness": masks_to_lists(witness_matchings(g, res)) if res.witness else None,
    }
    if not res.complete:
        return envelope("excessive", args.spec, payload, "incomplete"), EXIT_BUDGET
    return envelope("excessive", args.spec, payload, res.label()), EXIT_OK


def cmd_certify_ei5(args) -> tuple[dict, int]:
    cert = certify_ei5(args.spec, check_base=not args.skip_base)
    return envelope("ei5", args.spec, cert.as_dict(), "certified"), EXIT_OK


def cmd_flow(args) -> tuple[dict, int]:
    g = load_graph(args.spec)
    res = find_pq_flow(g, args.p, args.q, jobs=args.jobs, max_states=args.max_states)
    payload = {"graph": g.to_text(), "p": args.p, "q": args.q, "frontier": res.stats.get("frontier")}
    if res.flow is not None:
        payload["flow"] = res.flow.to_text()
    code = {"found": EXIT_OK, "incomplete": EXIT_BUDGET}.get(res.status, EXIT_FALSE)
    return envelope("flow", args.spec, payload, res.status), code


def cmd_phi_c(args) -> tuple[dict, int]:
    if args.structural:
        try:
            cert = structural_phi5_certificate(args.spec)
        except (SpecError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
        return envelope("phi_c_structural", args.spec, cert, "certified"), EXIT_OK
    g = load_graph(args.spec)
    if args.q_max is None:
        value = phi_c_exact_small(g)
        payload = {"graph": g.to_text(), "phi_c": str(value)}
        return envelope("phi_c_exact", args.spec, payload, "exact"), EXIT_OK
    cert = phi_c_lower_cert(g, args.q_max, jobs=args.jobs, max_states=args.max_states)
    cert["graph"] = g.to_text()
    code = {"refuted": EXIT_OK, "flow-found": EXIT_FALSE}.get(cert["status"], EXIT_BUDGET)
    return envelope("phi_c_lower", args.spec, cert, cert["status"]), code


def cmd_cdc(args) -> tuple[dict, int]:
    obj = load_input(args.spec)
    if isinstance(obj, Fragment):
        raise UsageError("a cycle double cover needs a closed graph")
    treelike = "*" in args.spec or "L" in args.spec.replace("halin:", "")
    treelike = treelike and not args.spec.startswith(("halin:", "file:"))
    if treelike and args.cdc_k == 5 and not args.search:
        r = treelike_5cdc(args.spec)
        ok_cc, cuts = is_congruent(r.graph, r.coloring)
        payload = {
            "graph": r.graph.to_text(),
            "k": 5,
            "cycles": masks_to_lists(r.cycles),
            "circuit": list(bits(r.circuit)),
            "join": list(bits(r.join)),
            "coloring": [[e, c] for e, c in sorted(r.coloring.colors.items())],
            "congruent": ok_cc,
            "cuts_checked": cuts,
            "packing": masks_to_lists(r.packing),
            "packing_profile": packing_profile(r.graph, r.packing),
            "join_cover": masks_to_lists(r.join_cover),
        }
        return envelope("cdc", args.spec, payload, "found"), EXIT_OK
    g = obj
    try:
        cycles = find_cdc(g, args.cdc_k, max_nodes=args.max_nodes)
    except CDCError as exc:
        if str(exc) == "budget":
            return envelope("cdc", args.spec, {"graph": g.to_text(), "k": args.cdc_k}, "incomplete"), EXIT_BUDGET
        raise UsageError(str(exc)) from exc
    payload = {"graph": g.to_text(), "k": args.cdc_k, "cycles": masks_to_lists(cycles) if cycles else None}
    if cycles is None:
        return envelope("cdc", args.spec, payload, "none"), EXIT_FALSE
    return envelope("cdc", args.spec, payload, "found"), EXIT_OK


def cmd_iso(args) -> tuple[dict, int]:
    g1, g2 = load_graph(args.spec), load_graph(args.other)
    res = are_isomorphic(g1, g2)
    payload = {"isomorphic": res.isomorphic, "mapping": list(res.mapping) if res.isomorphic else None}
    return envelope("iso", f"{args.spec} ~ {args.other}", payload, "isomorphic" if res.isomorphic else "distinct"), (
        EXIT_OK if res.isomorphic else EXIT_FALSE
    )


# -- replay ------------------------------------------------------------------


def replay(env: dict) -> tuple[bool, list[str]]:
    """Check an envelope using only its own contents."""
    kind, payload = env.get("kind"), env.get("payload", {})
    problems: list[str] = []
    if kind == "ei5":
        return replay_ei5(EI5Certificate.from_dict(payload))
    if kind == "phi_c_structural":
        return replay_structural(payload)
    g = GenGraph.from_text(payload["graph"]) if "graph" in payload else None
    if kind == "snark_report":
        rep = verify_snark(g)
        fresh = rep.as_dict()
        for key, val in fresh.items():
            if payload.get(key) != val:
                problems.append(f"{key}: recorded {payload.get(key)!r}, recomputed {val!r}")
    elif kind == "cdc":
        cycles = [mask_of(c) for c in payload.get("cycles") or []]
        if not cycles or not verify_cdc(g, cycles):
            problems.append("cycles do not form a cycle double cover")
        elif len(cycles) != payload.get("k"):
            problems.append("number of cycles differs from k")
    elif kind == "excessive":
        value = payload.get("value")
        if payload.get("witness"):
            ms = [mask_of(m) for m in payload["witness"]]
            if not verify_cover_witness(g, ms) or str(len(ms)) != value:
                problems.append("witness cover is invalid")
        res = excessive_index(g, k_max=payload["k_max"])
        if res.label() != value:
            problems.append(f"recomputed value {res.label()}, recorded {value}")
    elif kind == "flow":
        if env.get("status") == "found":
            if not verify_pq_flow(g, PQFlow.from_text(payload["flow"])):
                problems.append("flow does not verify")
        else:
            res = find_pq_flow(g, payload["p"], payload["q"])
            if res.status != env.get("status"):
                problems.append(f"recomputed status {res.status}")
    elif kind == "phi_c_lower":
        cert = phi_c_lower_cert(g, payload["q_max"])
        if cert["status"] != payload.get("status"):
            problems.append(f"recomputed status {cert['status']}")
    elif kind == "phi_c_exact":
        if str(phi_c_exact_small(g)) != payload.get("phi_c"):
            problems.append("recomputed value differs")
    else:
        problems.append(f"unknown certificate kind {kind!r}")
    return not problems, problems


def cmd_verify(args) -> tuple[dict, int]:
    try:
        with open(args.file, encoding="utf-8") as fh:
            env = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read certificate: {exc}") from exc
    if args.kind and env.get("kind") != args.kind:
        raise UsageError(f"certificate kind is {env.get('kind')!r}, expected {args.kind!r}")
    try:
        ok, problems = replay(env)
    except (KeyError, TypeError, ValueError) as exc:
        ok, problems = False, [f"malformed certificate: {exc}"]
    payload = {"replayed_kind": env.get("kind"), "problems": problems}
    return envelope("replay", args.file, payload, "pass" if ok else "fail"), EXIT_OK if ok else EXIT_FALSE


# -- parser ------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--jobs", type=int, default=1, help="worker processes (output does not depend on it)")
    p.add_argument("--seed", type=int, default=0, help="accepted for reproducible scripts; no effect on results")
    p.add_argument("--time-limit", type=float, default=None, help="seconds before reporting 'incomplete'")
    p.add_argument("--out", default=None, help="write output to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treelike", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build and serialise a graph or fragment")
    p.add_argument("spec")
    p.set_defaults(func=cmd_build)

    for name, func, help_ in (
        ("patterns", cmd_patterns, "pattern set of a fragment"),
        ("appendix-check", cmd_appendix_check, "recompute the five pattern sets and compare"),
    ):
        p = sub.add_parser(name, help=help_)
        if name == "patterns":
            p.add_argument("spec")
            p.add_argument("--json", action="store_true")
        else:
            p.add_argument("--fragments", nargs="*", help="restrict to these fragments")
            p.add_argument("--reference", nargs="*", help="pattern-set files overriding the embedded lists")
        p.add_argument("--method", choices=("labels", "matchings"), default="labels")
        p.add_argument("--max-matchings", type=int, default=None)
        p.add_argument("--max-nodes", type=int, default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("snark-verify", help="cubic, bridgeless, girth, cyclic connectivity, chromatic index")
    p.add_argument("spec")
    p.set_defaults(func=cmd_snark_verify)

    p = sub.add_parser("excessive", help="excessive index up to --k-max")
    p.add_argument("spec")
    p.add_argument("--k-max", type=int, default=5)
    p.add_argument("--max-matchings", type=int, default=None)
    p.add_argument("--max-nodes", type=int, default=None)
    p.set_defaults(func=cmd_excessive)

    p = sub.add_parser("certify-ei5", help="induction certificate for excessive index at least 5")
    p.add_argument("spec")
    p.add_argument("--skip-base", action="store_true", help="do not re-run the base-case refutation")
    p.set_defaults(func=cmd_certify_ei5)

    p = sub.add_parser("flow", help="search for a (p,q)-flow")
    p.add_argument("spec")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--max-states", type=int, default=None)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("phi-c", help="exact circular flow number, bounded refutation or structural certificate")
    p.add_argument("spec")
    p.add_argument("--q-max", type=int, default=None, help="refute (5q-1,q)-flows for q <= Q")
    p.add_argument("--structural", action="store_true")
    p.add_argument("--max-states", type=int, default=None)
    p.set_defaults(func=cmd_phi_c)

    p = sub.add_parser("cdc", help="cycle double cover")
    p.add_argument("spec")
    p.add_argument("--cdc-k", type=int, default=5)
    p.add_argument("--search", action="store_true", help="use plain search even for treelike snarks")
    p.add_argument("--max-nodes", type=int, default=None)
    p.set_defaults(func=cmd_cdc)

    p = sub.add_parser("verify", help="replay a certificate envelope")
    p.add_argument("file")
    p.add_argument("--kind", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("iso", help="isomorphism test")
    p.add_argument("spec")
    p.add_argument("other")
    p.set_defaults(func=cmd_iso)

    for p in sub.choices.values():
        _common(p)
    return parser


def _on_alarm(signum, frame):
    for child in multiprocessing.active_children():
        child.terminate()
    raise TimeLimit()


def render(result) -> str:
    if isinstance(result, str):
        return result
    return json.dumps(result, sort_keys=True, indent=2) + "\n"


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    if args.time_limit is not None:
        signal.signal(signal.SIGALRM, _on_alarm)
        signal.setitimer(signal.ITIMER_REAL, args.time_limit)
    try:
        result, code = args.func(args)
    except UsageError as exc:
        print(f"treelike: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TimeLimit, BrokenProcessPool):
        spec = getattr(args, "spec", args.command)
        result = envelope(args.command, spec, {"reason": "time-limit", "seconds": args.time_limit}, "incomplete")
        code = EXIT_BUDGET
    finally:
        if args.time_limit is not None:
            signal.setitimer(signal.ITIMER_REAL, 0)
    text = render(result)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
