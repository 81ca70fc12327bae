"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import itertools
import random
import time

import pytest

from tgdconserve.chase import Budget, chase, null_components
from tgdconserve.conway import (
    QUERY_SCHEMA,
    ConwaySpec,
    RiverSpec,
    gen_guarded_T0,
    has_defect,
    myth_chain_spec,
    river_build,
)
from tgdconserve.frontier import TType, validate_proper_tree, MalformedTree
from tgdconserve.hom import cq_entailed, find_hom, hom_exists_n, infinite_chain_hom
from tgdconserve.linear import build_hardness_instance, check_triviality
from tgdconserve.model import Atom, Instance, classify
from tgdconserve.textio import parse_cq, parse_cqs, parse_database, parse_rules

import cases
import gen


@pytest.fixture
def report(capsys):
    def emit(num, title, ok, detail, start):
        line = f"ACCEPTANCE {num} {'PASS' if ok else 'FAIL'}: {title} ({detail}; {time.perf_counter() - start:.2f}s)"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return emit


def _rivers():
    """Every river with n <= 3 and values <= 4, then a seeded sample with n = 4, 5."""
    for n in (1, 2, 3):
        for p in itertools.product(range(1, 5), repeat=n):
            for t in itertools.product(range(1, 5), repeat=n):
                yield RiverSpec(p, t)
    rng = random.Random(2024)
    for n in (4, 5):
        for _ in range(300):
            yield RiverSpec([rng.randint(1, 4) for _ in range(n)], [rng.randint(1, 4) for _ in range(n)])


def test_1_chain_hom_matches_defect(report):
    start = time.perf_counter()
    total = bad = 0
    for k in _rivers():
        v = infinite_chain_hom(myth_chain_spec(k), river_build(k), QUERY_SCHEMA)
        total += 1
        bad += v.holds != has_defect(k)
    secs = time.perf_counter() - start
    ok = bad == 0 and total >= 200 and secs < 60
    report(1, "chain homomorphism into River agrees with the defect predicate", ok, f"{total} rivers, {bad} disagreements", start)


def test_2_bounded_but_no_full_hom(report):
    start = time.perf_counter()
    t1 = parse_rules(cases.CHAIN_T1)
    t2 = parse_rules("A(x) -> exists y. S(x,y), B(y).\nB(x) -> exists y. R(y,x), B(y).")
    db = parse_database("A(c).")
    bounded = []
    for n in range(0, 9):
        src = chase(db, t2, Budget(n + 3)).instance
        tgt = chase(db, t1, Budget(n + 5)).instance
        bounded.append(hom_exists_n(src, tgt, ["R"], n).holds)
    r2 = chase(db, t2, Budget(8))
    r1 = chase(db, t1, Budget(8))
    comps = null_components(r2, ["R"], db)
    s2 = next(f.args[1] for f in r2.instance.sorted_facts() if f.rel == "S")
    s1 = next(f.args[1] for f in r1.instance.sorted_facts() if f.rel == "S")
    pinned = find_hom(comps[0], r1.instance, ["R"], pins={s2: s1}) if len(comps) == 1 else "bad"
    ok = all(bounded) and pinned is None and time.perf_counter() - start < 5
    report(2, "n-bounded homs for n <= 8, no pinned hom of the null R-component", ok, f"bounded {sum(bounded)}/9, pinned hom {'none' if pinned is None else 'found'}", start)


def test_3_triviality_against_brute_force(report):
    start = time.perf_counter()
    rng = random.Random(1)
    agree = disagree = open_ = 0
    for _ in range(500):
        rules, sd, sq = cases.rand_triviality_case(rng)
        b = cases.brute_triviality(rules, sd, sq)
        v = check_triviality(rules, sd, sq).value.value
        if b is None:
            open_ += 1
        elif b == v:
            agree += 1
        else:
            disagree += 1
    ok = disagree == 0 and time.perf_counter() - start < 300
    report(3, "linear triviality agrees with depth-8 brute force", ok, f"500 rule sets, {agree} agree, {disagree} disagree, {open_} brute force inconclusive", start)


def test_4_hardness_reduction(report):
    start = time.perf_counter()
    rng = random.Random(4)
    q = parse_cq("q() :- A(x).")
    n = bad = entailed = 0
    while n < 100:
        case = cases.rand_hardness_case(rng)
        if case is None:
            continue
        db, rules = case
        t2, sd, sq = build_hardness_instance(db, rules)
        e = cq_entailed(db, rules, q, (), Budget(10))
        assert not e.unknown
        entailed += e.holds
        bad += check_triviality(t2, sd, sq).holds != (not e.holds)
        n += 1
    report(4, "triviality of the hardness instance is the negated entailment", bad == 0, f"{n} pairs ({entailed} entailing), {bad} disagreements", start)


def test_5_chase_invariants(report):
    start = time.perf_counter()
    problems = []
    for db, rules, model in cases.model_pairs():
        if chase(model, rules, Budget(5)).instance != model:
            problems.append("no-op")
    rng = random.Random(8)
    for _ in range(40):
        rules = gen.rand_frontier_one_rules(rng, {"A": 1, "R": 2})
        res = chase(gen.rand_instance(rng, {"A": 1, "R": 2}, 3, 3), rules, Budget(5, max_facts=3000))
        for f, (_, image) in res.parents.items():
            if image and max(res.levels[g] for g in image) != res.levels[f] - 1:
                problems.append("level")
        seen = set(res.level_facts()[0])
        for fs in res.level_facts()[1:]:
            width = max(len({a for g in seen for a in g.args}), 1)
            if len(fs) > sum(width ** len(t.frontier) * len(t.head) for t in rules):
                problems.append("degree")
            seen |= set(fs)
    models = cases.lemma_chase_into_models()
    prov = cases.linear_provenance_failures()
    unr = cases.unraveling_failures()
    problems += models + prov + unr
    detail = f"20 models {len(models)} failures, 20 linear provenance {len(prov)}, 20 unravelings {len(unr)}, other {len(problems) - len(models) - len(prov) - len(unr)}"
    report(5, "chase invariants and homomorphism properties", not problems, detail, start)


def test_6_bounded_hom_at_full_size(report):
    start = time.perf_counter()
    rng = random.Random(6)
    rels = {"A": 1, "R": 2, "S": 2}
    bad = holds = 0
    for i in range(300):
        i1 = gen.rand_instance(rng, rels, rng.randint(1, 6), rng.randint(1, 7), nulls=True)
        i2 = gen.rand_instance(rng, rels, rng.randint(1, 4), rng.randint(1, 8))
        sigma = ["R", "S"] if i % 3 == 0 else None
        lim = hom_exists_n(i1, i2, sigma, len(i1.adom)).holds
        full = find_hom(i1, i2, sigma) is not None
        brute = gen.brute_hom(i1, i2, sigma) is not None
        holds += full
        bad += not (lim == full == brute)
    report(6, "n-bounded hom at n = |adom(I1)| coincides with a full hom", bad == 0, f"300 pairs ({holds} with a hom), {bad} disagreements", start)


def test_7_properness_validator(report):
    start = time.perf_counter()
    t1 = parse_rules(cases.CHAIN_T1)
    t_hat = cases.chain_t_hat()
    good = validate_proper_tree(cases.chain_tree(), t_hat, t1, Budget(8), ["R"])
    checks = good.certificate["checks"] if good.certificate else []
    good_ok = good.holds and all(c["verdict"] == "holds" for c in checks)
    wrong = TType.of(parse_cqs("q(x) :- R(x,y)."))
    mut = validate_proper_tree(cases.chain_tree({"c2": wrong}), t_hat, t1, Budget(8), ["R"])
    named = mut.fails and mut.certificate["violations"][0]["condition"] == "2"
    overlap = {"v1": Instance([Atom("R", ("c2", "c1")), Atom("R", ("c1", "c0"))])}
    try:
        validate_proper_tree(cases.chain_tree(bags=overlap), t_hat, t1, Budget(8), ["R"])
        structural = None
    except MalformedTree as e:
        structural = e.reason
    ok = good_ok and named and structural is not None and "shares 2 constants" in structural
    detail = f"{len(checks)} node checks hold; wrong type -> condition {mut.certificate['violations'][0]['condition'] if named else '?'}; overlap -> {structural}"
    report(7, "properness validator on the rootless R-chain tree", ok, detail, start)


def test_8_generated_rules(report):
    start = time.perf_counter()
    ends, full, ok_sets, res = cases.end_ancestor_sets(depth=30, max_facts=200_000)
    t0, _, _ = gen_guarded_T0(ConwaySpec(**cases.REDUCTION, reduction=True))
    guarded = all(classify(r).guarded for r in t0)
    ok = full >= 1 and ok_sets == full and guarded and time.perf_counter() - start < 120
    detail = f"{res.rounds} rounds, {len(res.instance)} facts, {ends} End facts, {full} fully materialized, {ok_sets} locally correct, {len(t0)} T0 rules guarded={guarded}"
    report(8, "generated rules: ancestor sets locally correct, T0 guarded", ok, detail, start)


def test_9_cli_determinism(report, tmp_path):
    start = time.perf_counter()
    runs = []
    for rep in range(2):
        out = tmp_path / "suite"
        outputs = [cases.run_cli(argv) for argv, _ in cases.cli_invocations(out)]
        runs.append(([(o.returncode, o.stdout, o.stderr) for o in outputs], cases.snapshot(out)))
    same = runs[0] == runs[1]
    n = len(runs[0][0])
    report(9, "CLI output byte-identical across two runs", same, f"{n} invocations, {len(runs[0][1])} generated files", start)
