"""Hand-built fixtures shared by the chase tests and the acceptance suite."""

import random

from tgdconserve.chase import Budget, chase, chase_below, chase_below_fact
from tgdconserve.frontier import unravel
from tgdconserve.hom import find_hom
from tgdconserve.model import Database, body_width
from tgdconserve.textio import parse_database, parse_instance, parse_rules

import gen

# (rules, database, [model, model]); every model is checked with gen.is_model
MODEL_CASES = [
    (
        "A(x) -> exists y. R(x,y).\nR(x,y) -> A(y).",
        "A(c).",
        ["A(c). R(c,c).", "A(c). R(c,d). A(d). R(d,c)."],
    ),
    (
        "A(x) -> exists y. S(x,y), B(y).\nB(x) -> exists y. R(x,y), B(y).",
        "A(c).",
        ["A(c). S(c,m). B(m). R(m,m).", "A(c). S(c,c). B(c). R(c,c)."],
    ),
    (
        "A(x) -> exists y. S(x,y), B(y).\nB(x) -> exists y. R(y,x), B(y).",
        "A(c).",
        ["A(c). S(c,m). B(m). R(m,m).", "A(c). S(c,m). B(m). R(k,m). B(k). R(k,k)."],
    ),
    (
        "R(x,y), R(y,z) -> R(x,z).",
        "R(a,b). R(b,c).",
        [
            "R(a,b). R(b,c). R(a,c).",
            "R(a,a). R(a,b). R(a,c). R(b,a). R(b,b). R(b,c). R(c,a). R(c,b). R(c,c).",
        ],
    ),
    (
        "R(x,y) -> exists z. R(y,z).",
        "R(a,b).",
        ["R(a,b). R(b,b).", "R(a,b). R(b,a)."],
    ),
    (
        "A(x), R(x,y) -> A(y).\nA(x) -> exists y. P(x,y).",
        "A(a). R(a,b). R(b,c).",
        [
            "A(a). A(b). A(c). R(a,b). R(b,c). P(a,a). P(b,b). P(c,c).",
            "A(a). A(b). A(c). R(a,b). R(b,c). P(a,e). P(b,e). P(c,e).",
        ],
    ),
    (
        "-> exists x. P(x).\nP(x) -> exists y. Q(x,y).",
        "",
        ["P(e). Q(e,e).", "P(e). Q(e,f)."],
    ),
    (
        "A(x) -> exists y,z. R(x,y), R(y,z), R(z,x).",
        "A(a).",
        ["A(a). R(a,a).", "A(a). R(a,b). R(b,c). R(c,a)."],
    ),
    (
        "R(x,y) -> exists z. S(x,z), S(y,z).",
        "R(a,b). R(b,c).",
        [
            "R(a,b). R(b,c). S(a,e). S(b,e). S(c,e).",
            "R(a,b). R(b,c). S(a,a). S(b,a). S(c,a).",
        ],
    ),
    (
        "E(x,y) -> E(y,x).\nE(x,y) -> exists z. L(x,z).",
        "E(a,b).",
        ["E(a,b). E(b,a). L(a,a). L(b,a).", "E(a,b). E(b,a). L(a,m). L(b,m)."],
    ),
]


def model_pairs():
    """20 (database, rules, model) triples."""
    out = []
    for rtext, dtext, models in MODEL_CASES:
        for m in models:
            out.append((parse_database(dtext), parse_rules(rtext), parse_instance(m)))
    return out


def lemma_chase_into_models() -> list[str]:
    """Failures of 'the chase maps into every model fixing the database'."""
    bad = []
    for i, (db, rules, model) in enumerate(model_pairs()):
        if not gen.is_model(model, rules) or not db.facts <= model.facts:
            bad.append(f"case {i}: not a model")
            continue
        res = chase(db, rules, Budget(10))
        if find_hom(res.instance, model, db_preserving=True) is None:
            bad.append(f"case {i}: no homomorphism")
    return bad


def saturating(rng, make_rules, rels, want, db_facts=3, depth=10):
    """`want` random (db, rules) pairs whose chase saturates within `depth`."""
    out = []
    while len(out) < want:
        rules = make_rules(rng, rels)
        db = Database(gen.rand_instance(rng, rels, 3, rng.randint(1, db_facts)).facts)
        res = chase(db, rules, Budget(depth, max_facts=2000))
        if res.saturated and len(res.instance) > len(db):
            out.append((db, rules, res))
    return out


def linear_provenance_failures(n=20, seed=11) -> list[str]:
    """Facts derived from one database fact map into the chase of that fact alone."""
    rng = random.Random(seed)
    rels = {"P": 1, "R": 2, "S": 2}
    bad = []
    for i, (db, rules, res) in enumerate(saturating(rng, lambda r, s: gen.rand_linear_rules(r, s, 4, 0), rels, n)):
        for alpha in db.sorted_facts():
            below = chase_below_fact(res, alpha)
            own = chase(Database([alpha]), rules, Budget(10)).instance
            if find_hom(below, own, db_preserving=True) is None:
                bad.append(f"case {i}: {alpha}")
    return bad


def unraveling_failures(n=20, seed=5) -> list[str]:
    """chase_below(c) maps into the chase of the unraveling, sending c to a copy near the root."""
    rng = random.Random(seed)
    rels = {"A": 1, "R": 2}
    bad = []
    for i, (db, rules, res) in enumerate(saturating(rng, gen.rand_frontier_one_rules, rels, n)):
        k = max(body_width(rules), 2)
        unr = unravel(db, k, 4)
        ures = chase(unr.database, rules, Budget(12, max_facts=20000))
        roots = {a for v in unr.tree.nodes if not any(e[1] == v for e in unr.tree.edges) for a in unr.tree.bags[v].adom}
        for c in db.sorted_adom():
            below = chase_below(res, c)
            copies = sorted((x for x in roots if unr.back_map[x] == c), key=str)
            for x in copies:
                if find_hom(below, ures.instance, pins={c: x}, db_preserving=False) is None:
                    bad.append(f"case {i}: {c} -> {x}")
    return bad


def brute_triviality(rules, sd, sq, depth=8):
    """'fails' / 'holds' when a depth-bounded chase settles it, else None."""
    from tgdconserve.linear import singleton_databases
    from tgdconserve.model import restrict

    all_sat = True
    for db in [Database()] + singleton_databases(sd):
        r = chase(db, rules, Budget(depth, max_facts=4000))
        if find_hom(restrict(r.instance, sq), db, sq) is None:
            return "fails"
        all_sat &= r.saturated
    return "holds" if all_sat else None


def rand_triviality_case(rng):
    rels = gen.rand_schema(rng)
    names = list(rels)
    rules = gen.rand_linear_rules(rng, rels)
    sd = rng.sample(names, rng.randint(0, len(names)))
    sq = rng.sample(names, rng.randint(1, len(names)))
    return rules, {n: rels[n] for n in sd}, {n: rels[n] for n in sq}


def rand_hardness_case(rng, depth=10):
    """A linear (D,T) over A/1, B/1, P/2 whose chase saturates, or None."""
    rels = {"A": 1, "B": 1, "P": 2}
    rules = gen.rand_linear_rules(rng, rels, 4, 0.1)
    db = Database(gen.rand_instance(rng, rels, rng.randint(1, 3), rng.randint(0, 3)).facts)
    if not chase(db, rules, Budget(depth, max_facts=2000)).saturated:
        return None
    return db, rules


# --- labelled R-chain tree for the properness validator -------------------

CHAIN_T1 = "A(x) -> exists y. S(x,y), B(y).\nB(x) -> exists y. R(x,y), B(y)."
CHAIN_TYPE = "q(x) :- B(x). q(x) :- R(x,y), B(y)."


def chain_tree(mu=None, bags=None):
    """Rootless tree v3 -> v2 -> v1 -> v0 with bags R(c_{i+1}, c_i)."""
    from tgdconserve.frontier import LabeledInstanceTree, TType
    from tgdconserve.model import Atom, Instance
    from tgdconserve.textio import parse_cqs

    b = {f"v{i}": Instance([Atom("R", (f"c{i + 1}", f"c{i}"))]) for i in range(4)}
    b.update(bags or {})
    t = TType.of(parse_cqs(CHAIN_TYPE))
    m = {f"c{i}": t for i in range(5)}
    m.update(mu or {})
    return LabeledInstanceTree(["v3", "v2", "v1", "v0"], [("v1", "v0"), ("v2", "v1"), ("v3", "v2")], b, m)


def chain_t_hat():
    from tgdconserve.frontier import observed_type

    return observed_type(parse_database("A(c)."), parse_rules(CHAIN_T1), "c", Budget(6))


# --- Conway rules ---------------------------------------------------------

REDUCTION = dict(gamma=2, alpha=(3, 1), beta=(2, 1))


def end_ancestor_sets(depth=30, max_facts=200_000, spec=None):
    """Chase gen_T1 and classify the ancestor sets of its End facts.

    Returns (ends, fully materialized, locally correct among those, chase result).
    """
    from tgdconserve.conway import (
        ConwaySpec,
        ancestors,
        ancestors_q,
        extract_river,
        gen_T1,
        proj_rules,
        river_correctness,
    )

    s = spec or ConwaySpec(**REDUCTION, reduction=True)
    rules = gen_T1(s)
    proj = proj_rules(s)
    res = chase(Database(), rules, Budget(depth, max_facts=max_facts))
    ends = [f for f in res.instance.sorted_facts() if f.rel == "End"]
    full = ok = 0
    for f in ends:
        aq = ancestors_q(ancestors(res, f, rules), proj)
        if not aq.facts <= res.instance.facts:
            continue
        full += 1
        ex = extract_river(aq)
        if ex is not None and river_correctness(ex[0], s).locally_correct:
            ok += 1
    return len(ends), full, ok, res


# --- CLI invocations ------------------------------------------------------

import os
import subprocess
import sys
from pathlib import Path

DATA = Path(__file__).parent / "data"


def cli_invocations(out_dir) -> list[tuple[list[str], int]]:
    """(argv, expected exit code) for every subcommand, paths relative to the data dir."""
    d = str(DATA)

    def f(name):
        return os.path.join(d, name)

    return [
        (["chase", "--rules", f("grow.tgd"), "--db", f("r.db"), "--depth", "3"], 0),
        (["chase", "--rules", f("chain_t2.tgd"), "--db", f("a.db"), "--depth", "4", "--json"], 0),
        (["eval", "--rules", f("grow.tgd"), "--db", f("r.db"), "--query", f("path2.cq"), "--tuple", "a", "--json"], 0),
        (["eval", "--rules", f("grow.tgd"), "--db", f("r.db"), "--query", "q() :- R(x,x)", "--depth", "2"], 2),
        (["check-hom", "--source", f("triangle.inst"), "--target", f("edge.inst"), "--json"], 1),
        (["check-hom", "--source", f("triangle.inst"), "--target", f("edge.inst"), "--n", "2", "--json"], 0),
        (["check-triviality", "--rules", f("grow.tgd"), "--data-schema", "R/2", "--query-schema", "R/2", "--json"], 1),
        (["check-triviality", "--rules", f("stay.tgd"), "--data-schema", "R/2", "--query-schema", "R/2"], 0),
        (["check-hom-conservative", "--t1", f("s_only.tgd"), "--t2", f("s_and_r.tgd"),
          "--data-schema", "A/1", "--query-schema", "R/2,S/2", "--json"], 1),
        (["check-hom-conservative", "--t1", f("chain_t1.tgd"), "--t2", f("chain_t2.tgd"),
          "--data-schema", "A/1", "--query-schema", "R/2", "--json"], 2),
        (["check-cq-conservative", "--t1", f("chain_t1.tgd"), "--t2", f("chain_t2.tgd"),
          "--data-schema", "A/1", "--query-schema", "R/2"], 2),
        (["check-cq-conservative", "--t1", f("s_only.tgd"), "--t2", f("s_and_r.tgd"),
          "--data-schema", "A/1", "--query-schema", "R/2,S/2", "--json"], 1),
        (["validate-tree", "--rules", f("chain_t1.tgd"), "--tree", f("chain_tree.json"), "--schema", "R", "--depth", "8"], 0),
        (["gen-conway-suite", "--gamma", "2", "--alpha", "3,1", "--beta", "2,1", "--out", str(out_dir), "--max-n", "3"], 0),
        (["chase", "--rules", f("missing.tgd"), "--db", f("r.db")], 64),
        (["check-hom", "--source", f("triangle.inst")], 64),
    ]


def run_cli(argv, env=None):
    return subprocess.run(
        [sys.executable, "-m", "tgdconserve.cli", *argv],
        capture_output=True,
        env={**os.environ, **(env or {})},
        timeout=600,
    )


def snapshot(out_dir) -> dict:
    root = Path(out_dir)
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}
