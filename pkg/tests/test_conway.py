import itertools

import pytest

from tgdconserve.chase import Budget, chase
from tgdconserve.conway import (
    QUERY_SCHEMA,
    ConwaySpec,
    InvalidSpec,
    conway_stops,
    RiverSpec,
    extract_river,
    gen_guarded_T0,
    gen_T1,
    gen_T2,
    has_defect,
    locally_correct_rivers,
    myth_chain_spec,
    myth_rules,
    river_build,
    river_correctness,
    river_derivation,
    river_witness_db,
)
from tgdconserve.hom import find_hom, infinite_chain_hom
from tgdconserve.model import Atom, classify, restrict, rules_schema
from tgdconserve.textio import format_rules, parse_rules

import cases

SIMPLE = ConwaySpec(2, (1, 1), (2, 1))
RED = ConwaySpec(**cases.REDUCTION, reduction=True)


def test_conway_eval():
    assert SIMPLE(2) == 1 and SIMPLE(3) == 3
    assert RED(2) == 3 and RED(3) == 3 and RED(1) == 1
    with pytest.raises(InvalidSpec):
        ConwaySpec(2, (1, 1), (3, 1))
    with pytest.raises(InvalidSpec):
        ConwaySpec(2, (1, 1), (2, 1), reduction=True)


def test_conway_stops():
    v = conway_stops
    assert v(SIMPLE).certificate["trajectory"] == [2, 1]
    ident = v(ConwaySpec(1, (1,), (1,)))
    assert ident.fails and ident.certificate["cycle_start"] == 0
    assert v(ConwaySpec(1, (2,), (1,)), max_steps=20).unknown


def test_small_river():
    d = river_build(RiverSpec((1,), (1,)))
    assert d.adom == {"b0", "b1", "c", "e1", "e2"}
    for f in ("Pyramus(b1,b0)", "Thisbe(b1,b0)", "Encounter(b1,b0)", "Mouth(b0)", "Channel(c,b0)", "Channel(c,b1)"):
        assert f in {str(x) for x in d}
    assert len(d) == 16
    assert len(restrict(d, ["Channel"])) == 4


def test_figure_river():
    k = RiverSpec((4, 7, 7, 1), (7, 4, 6, 2))
    chk = river_correctness(k, SIMPLE)
    assert not chk.locally_correct and chk.defect == 2 and has_defect(k)


S6 = ConwaySpec(6, (1, 1, 3, 1, 1, 1), (1, 1, 2, 3, 1, 1), reduction=True)


def test_correct_river_has_no_chain_hom():
    k = RiverSpec((2, 3, 1), (3, 1, 1))
    assert river_correctness(k, S6).correct
    assert infinite_chain_hom(myth_chain_spec(k), river_build(k), QUERY_SCHEMA).fails
    bad = RiverSpec((2, 3, 1), (3, 3, 1))
    assert infinite_chain_hom(myth_chain_spec(bad), river_build(bad), QUERY_SCHEMA).holds


def test_chain_hom_matches_defect_small():
    for n in (1, 2):
        for p in itertools.product(range(1, 4), repeat=n):
            for t in itertools.product(range(1, 4), repeat=n):
                k = RiverSpec(p, t)
                assert infinite_chain_hom(myth_chain_spec(k), river_build(k), QUERY_SCHEMA).holds == has_defect(k)


def test_locally_correct_rivers():
    ks = list(locally_correct_rivers(SIMPLE, 3))
    assert len(ks) == 5
    assert all(river_correctness(k, SIMPLE).locally_correct for k in ks)


def test_myth_rules():
    rs = myth_rules()
    assert len(rs) == 3 and all(r.is_linear for r in rs)
    assert {a.rel for a in rs[2].head} == {"Pyramus", "Thisbe", "Channel"}


def test_myth_chase_matches_chain_spec():
    k = RiverSpec((1,), (1,))
    spec = myth_chain_spec(k)
    res = chase(spec.prefix, myth_rules(), Budget(9))
    big, _ = spec.materialize(3)
    assert find_hom(big, res.instance, db_preserving=True) is not None
    longer, _ = spec.materialize(12)
    assert find_hom(restrict(res.instance, QUERY_SCHEMA), longer, QUERY_SCHEMA, db_preserving=True) is not None


def test_generated_rules_shape():
    t1 = gen_T1(RED)
    sch = rules_schema(t1)
    for i in range(2):
        for k in range(2):
            assert sch[f"WH{i}_{k}"] == RED.alpha[k] + RED.beta[k] + 5
    back = parse_rules(format_rules(t1))
    assert [(a.body, a.head) for a in back] == [(a.body, a.head) for a in t1]
    assert len(gen_T2(RED)) == len(t1) + 3
    with pytest.raises(InvalidSpec):
        gen_T1(SIMPLE)


def test_guarded_generator():
    t0, sd, sq = gen_guarded_T0(RED)
    assert all(classify(r).guarded for r in t0)
    assert set(sq) <= set(QUERY_SCHEMA) and "Encounter" not in sd


def test_reduction_witness_correct_river():
    s = S6
    k = RiverSpec((2, 3, 1), (3, 1, 1))
    t0, sd, sq = gen_guarded_T0(s)
    db = river_witness_db(s, k)
    assert (river_build(k).facts - {Atom("Encounter", ("b3", "b2"))}) <= db.facts
    res = chase(db, t0, Budget(12))
    assert Atom("Encounter", ("b3", "b2")) in res.instance
    assert infinite_chain_hom(myth_chain_spec(k), db, sq).fails


def test_reduction_witness_incorrect_river():
    k = RiverSpec((2, 2, 1), (3, 3, 1))
    assert river_correctness(k, RED).locally_correct and not river_correctness(k, RED).correct
    t0, sd, sq = gen_guarded_T0(RED)
    db = river_witness_db(RED, k)
    assert Atom("Encounter", ("b3", "b2")) in chase(db, t0, Budget(12)).instance
    assert infinite_chain_hom(myth_chain_spec(k), db, sq).holds


def test_derivation_requires_ends():
    with pytest.raises(InvalidSpec):
        river_derivation(RED, RiverSpec((1, 1), (3, 1)))


def test_extract_river_round_trip():
    for k in (RiverSpec((2, 1), (3, 1)), RiverSpec((2, 3, 1), (3, 3, 1))):
        got, ren = extract_river(river_build(k))
        assert got == k and all(a == b for a, b in ren.items())
    assert extract_river(river_build(RiverSpec((2,), (1,))) - river_build(RiverSpec((1,), (1,)))) is None


def test_t1_chase_ancestor_sets_small():
    ends, full, ok, _ = cases.end_ancestor_sets(depth=12, max_facts=20000)
    assert ends > 0 and full > 0 and ok == full
