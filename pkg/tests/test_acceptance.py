"""Acceptance criteria; each test records one PASS/FAIL line for the terminal summary."""

from __future__ import annotations

import io
import json
import time
from contextlib import redirect_stdout

import pytest

from conftest import ACCEPTANCE
from treelike.appendix import EXPECTED_COUNTS
from treelike.cdc import (
    is_congruent,
    multiplicities,
    packing_profile,
    treelike_5cdc,
    verify_cdc,
)
from treelike.chromatic import (
    certify_ei5,
    excessive_index,
    replay_ei5,
    verify_cover_witness,
    verify_snark,
    witness_matchings,
)
from treelike.cli import main
from treelike.constructions import (
    bracket_str,
    cubic_trees,
    halin_str,
    parse_bracket,
    petersen,
    treelike_snark,
)
from treelike.flows import phi_c_exact_small, phi_c_lower_cert, replay_structural, structural_phi5_certificate
from treelike.graph import bits, is_join
from oracles import from_networkx
import networkx as nx


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")


def cli_output(*argv) -> tuple[int, str]:
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


@pytest.fixture(scope="module")
def appendix_run():
    t = time.time()
    code, out = cli_output("appendix-check", "--jobs", "1")
    return code, out, time.time() - t


def test_criterion_1_pattern_counts(appendix_run):
    code, out, secs = appendix_run
    env = json.loads(out)
    counts = {r["fragment"]: r["computed"] for r in env["payload"]["fragments"]}
    expected = {bracket_str(parse_bracket(k)): v for k, v in EXPECTED_COUNTS.items()}
    matches = all(r["match"] for r in env["payload"]["fragments"])
    ok = counts == expected and matches and code == 0
    shown = "/".join(str(counts.get(k)) for k in expected)
    record(1, ok, f"counts {shown} (expected 42/18/9/25/10), orbit sets equal: {matches}, {secs:.1f} s")
    assert ok


def test_criterion_2_inclusions_and_non_associativity(appendix_run):
    env = json.loads(appendix_run[1])
    facts = {f["rule"]: f for f in env["payload"]["inclusions"]}
    strict = all(facts[r]["holds"] and facts[r]["strict"] for r in ("i", "ii"))
    nonassoc = env["payload"]["non_associative"] is True
    ok = strict and nonassoc
    record(2, ok, f"strict inclusions (i),(ii): {strict}; F+(F+F) differs from (F+F)+F: {nonassoc}")
    assert ok


def test_criterion_3_three_leaf_snark():
    t = time.time()
    g = treelike_snark("F*(F+F)")
    rep = verify_snark(g)
    ei = excessive_index(g, k_max=5)
    witness_ok = bool(ei.witness) and verify_cover_witness(g, witness_matchings(g, ei))
    secs = time.time() - t
    ok = (
        g.num_vertices == 34
        and rep.girth == 5
        and rep.cyclically_4_connected
        and rep.chromatic_index == 4
        and ei.label() == "5"
        and sorted(ei.refuted) == [1, 2, 3, 4]
        and witness_ok
        and secs <= 600
    )
    record(
        3, ok,
        f"|V|={g.num_vertices}, girth={rep.girth}, cyc4={rep.cyclically_4_connected}, "
        f"chi'={rep.chromatic_index}, chi'_e={ei.label()} ({ei.matchings} matchings, "
        f"4-covers refuted, 5-cover verified), {secs:.1f} s (budget 600 s)",
    )
    assert ok


def test_criterion_4_ei5_certificates():
    t = time.time()
    shapes, failures, direct = 0, [], []
    for L in range(3, 9):
        for tree in cubic_trees(L):
            shapes += 1
            cert = certify_ei5(tree, check_base=(shapes == 1))
            ok, problems = replay_ei5(cert)
            if not ok:
                failures.append((halin_str(tree), problems))
            if L <= 4:
                value = excessive_index(treelike_snark(tree), k_max=4).label()
                direct.append((halin_str(tree), value))
    agree = all(v == ">4" for _, v in direct)
    ok = not failures and shapes >= 10 and agree
    record(
        4, ok,
        f"{shapes} shapes with 3-8 leaves, replay failures: {len(failures)}; "
        f"direct excessive_index(.,4) for <=4 leaves: {direct}; {time.time() - t:.1f} s",
    )
    assert ok, failures


def test_criterion_5_flows():
    t = time.time()
    phi_p = phi_c_exact_small(petersen())
    phi_k4 = phi_c_exact_small(from_networkx(nx.complete_graph(4)))
    pet = phi_c_lower_cert(petersen(), 3)
    t3 = time.time()
    l3 = phi_c_lower_cert(treelike_snark("F*(F+F)"), 2)
    l3_secs = time.time() - t3
    replays = []
    for L in (3, 4, 5):
        for tree in cubic_trees(L):
            cert = structural_phi5_certificate(tree)
            replays.append(replay_structural(cert)[0])
    ok = (
        phi_p == 5
        and phi_k4 == 4
        and pet["status"] == "refuted"
        and l3["status"] == "refuted"
        and l3_secs <= 1800
        and all(replays)
    )
    record(
        5, ok,
        f"phi_c(Petersen)={phi_p}, phi_c(K4)={phi_k4}; Petersen (5q-1,q) q<=3: {pet['status']}; "
        f"L=3 q<=2: {l3['status']} in {l3_secs:.1f} s (budget 1800 s); "
        f"structural replays L=3..5: {sum(replays)}/{len(replays)}; total {time.time() - t:.1f} s",
    )
    assert ok


def test_criterion_6_cdc():
    t = time.time()
    results = []
    for L in range(3, 7):
        for tree in cubic_trees(L):
            r = treelike_5cdc(tree)
            g = r.graph
            prof = packing_profile(g, r.packing)
            mult = multiplicities(g, r.join_cover)
            checks = [
                len(r.cycles) == 5 and verify_cdc(g, r.cycles),
                r.coloring.is_proper(g) and is_congruent(g, r.coloring)[0],
                all(prof.values()),
                all(is_join(g, j) for j in r.join_cover) and set(mult) <= {1, 2},
                all(multiplicities(g, r.packing)[e] == 2 for e in bits(r.packing[3])),
            ]
            results.append((halin_str(tree), all(checks)))
    ok = all(v for _, v in results)
    record(
        6, ok,
        f"{sum(v for _, v in results)}/{len(results)} shapes with L=3..6 pass the 5-CDC, congruence, "
        f"2-packing profile and (1,2)-cover checks; {time.time() - t:.1f} s",
    )
    assert ok


def test_criterion_7_property_suites():
    import test_cdc
    import test_flows
    import test_matchcover
    import test_properties

    t = time.time()
    outcomes = {}

    def attempt(name, fn, *args):
        try:
            fn(*args)
            outcomes[name] = True
        except AssertionError:
            outcomes[name] = False

    attempt("parity lemma (all cuts, all colourings, <=10 vertices)", test_properties.test_parity_lemma_exhaustive)
    attempt("join/cycle duality (<=12 edges, exhaustive)", test_properties.test_join_cycle_duality_exhaustive)
    for name in sorted(test_matchcover.CORPUS):
        if test_matchcover.CORPUS[name].num_vertices <= 16:
            attempt(f"(2,1,1) profile {name}", test_matchcover.test_four_matching_covers_pick_profile, name)
    attempt("edge reversal on 1000 random flows", test_flows.test_edge_reversal_invariance)
    attempt("sunlet, 45 prescriptions", test_cdc.test_sunlet_all_prescriptions)
    ok = all(outcomes.values())
    failed = [k for k, v in outcomes.items() if not v]
    record(7, ok, f"{sum(outcomes.values())}/{len(outcomes)} suites pass{'; failed: ' + ', '.join(failed) if failed else ''}; {time.time() - t:.1f} s")
    assert ok


def test_criterion_8_determinism(appendix_run):
    t = time.time()
    _, one, _ = appendix_run
    code, eight = cli_output("appendix-check", "--jobs", "8")
    same_patterns = one == eight and code == 0
    same_cdc = True
    for L in range(3, 7):
        for tree in cubic_trees(L):
            spec = halin_str(tree)
            a = cli_output("cdc", spec, "--jobs", "1")[1]
            b = cli_output("cdc", spec, "--jobs", "8")[1]
            same_cdc &= a == b
    ok = same_patterns and same_cdc
    record(8, ok, f"--jobs 1 vs 8 byte-identical: appendix-check {same_patterns}, cdc L=3..6 {same_cdc}; {time.time() - t:.1f} s")
    assert ok
