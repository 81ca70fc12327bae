import pytest

from tgdconserve.chase import Budget
from tgdconserve.hom import cq_entailed, hom_exists_n
from tgdconserve.linear import check_triviality
from tgdconserve.textio import parse_cq, parse_database, parse_instance, parse_rules
from tgdconserve.verify import UnverifiableCertificate, verify_certificate

GROW = parse_rules("R(x,y) -> exists z. R(y,z).")


def test_entailment_certificate():
    db = parse_database("R(a,b).")
    v = cq_entailed(db, GROW, parse_cq("q(x) :- R(x,y), R(y,z)."), ("a",), Budget(3))
    ctx = {"db": db, "rules": GROW, "budget": Budget(3)}
    assert verify_certificate(v.certificate, ctx) == (True, "replay")
    bad = dict(v.certificate, tuple=["b"])
    assert verify_certificate(bad, ctx)[0] is False


def test_non_entailment_certificate():
    db = parse_database("R(a,b).")
    rules = parse_rules("R(x,y) -> R(y,x).")
    v = cq_entailed(db, rules, parse_cq("q() :- R(x,x)."), (), Budget(4))
    assert v.fails
    assert verify_certificate(v.certificate, {"db": db, "rules": rules, "budget": Budget(4)})[0]
    assert not verify_certificate(v.certificate, {"db": parse_database("R(a,a)."), "rules": rules, "budget": Budget(4)})[0]


def test_bounded_hom_certificates():
    src = parse_instance("R(_n0,_n1). R(_n1,_n2). R(_n2,_n0).")
    tgt = parse_instance("R(a,b). R(b,a).")
    ctx = {"source": src, "target": tgt}
    for n in (2, 3):
        v = hom_exists_n(src, tgt, None, n)
        assert verify_certificate(v.certificate, ctx)[0]


def test_triviality_certificate():
    v = check_triviality(GROW, {"R": 2}, {"R": 2})
    assert verify_certificate(v.certificate, {"rules": GROW})[0]
    stay = parse_rules("R(x,y) -> exists z. R(x,z).")
    assert not verify_certificate(v.certificate, {"rules": stay})[0]


def test_unknown_kind():
    with pytest.raises(UnverifiableCertificate):
        verify_certificate({"kind": "proper-tree"}, {})
    assert verify_certificate({"kind": "proper-tree"}, {}, lambda c: True) == (True, "recompute")
