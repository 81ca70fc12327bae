"""Replay of printed certificates using only the chase and homomorphism search.

Each checker takes the decoded certificate plus the inputs of the original
invocation and returns True when the certificate is confirmed.
"""

from __future__ import annotations

from typing import Callable

from .chase import Budget, chase
from .hom import cq_matches, find_hom, verify_hom
from .model import Atom, Instance, Null, schema_names
from .textio import parse_cq, parse_instance


class UnverifiableCertificate(ValueError):
    pass


def facts_from_json(items) -> Instance:
    return parse_instance("".join(f"{s}.\n" for s in items))


def _term(s: str):
    if s.startswith("_n") and s[2:].isdigit():
        return Null(int(s[2:]))
    return s


def _mapping(d: dict) -> dict:
    return {_term(k): _term(v) for k, v in d.items()}


def _depth(cert: dict, default: int) -> int:
    return max(int(cert.get("rounds", default)), 0)


def verify_cq_entailment(cert, ctx) -> bool:
    """The image of the query lies in the chase truncation and matches the mapping."""
    res = chase(ctx["db"], ctx["rules"], Budget(_depth(cert, ctx["budget"].max_depth)))
    q = parse_cq(cert["query"] + ".", allow_true=True)
    h = {k: _term(v) for k, v in cert["homomorphism"].items()}
    tup = tuple(_term(c) for c in cert["tuple"])
    if tuple(h.get(v) for v in q.answer_vars) != tup:
        return False
    image = facts_from_json(cert["image"])
    if q.is_true:
        return tup[0] in res.instance.adom
    mapped = Instance(Atom(a.rel, tuple(h[v] for v in a.args)) for a in q.atoms)
    return mapped == image and image.facts <= res.instance.facts


def verify_cq_non_entailment(cert, ctx) -> bool:
    res = chase(ctx["db"], ctx["rules"], ctx["budget"])
    q = parse_cq(cert["query"] + ".", allow_true=True)
    tup = tuple(_term(c) for c in cert["tuple"])
    return res.saturated and cq_matches(q, res.instance, tup) is None


def verify_triviality_cex(cert, ctx) -> bool:
    from .linear import verify_triviality_counterexample

    db = facts_from_json(cert["database"])
    cluster = facts_from_json(cert["cluster"])
    return verify_triviality_counterexample(ctx["rules"], db, cluster, set(cert["query_schema"]), ctx.get("depth", 8))


def verify_hom_conservativity_cex(cert, ctx) -> bool:
    db = facts_from_json(cert["database"])
    b = ctx["budget"]
    r1 = chase(db, ctx["t1"], b)
    r2 = chase(db, ctx["t2"], b)
    part = facts_from_json(cert["t2_part"])
    names = set(cert["query_schema"])
    if not r1.saturated or not part.facts <= r2.instance.facts:
        return False
    return find_hom(part, r1.instance, names, db_preserving=True) is None


def verify_cq_conservativity_cex(cert, ctx) -> bool:
    db = facts_from_json(cert["database"])
    b = ctx["budget"]
    q = parse_cq(cert["query"] + ".", allow_true=True)
    tup = tuple(_term(c) for c in cert["tuple"])
    r1 = chase(db, ctx["t1"], b)
    r2 = chase(db, ctx["t2"], b)
    return r1.saturated and cq_matches(q, r2.instance, tup) is not None and cq_matches(q, r1.instance, tup) is None


def verify_hom_cert(cert, ctx) -> bool:
    return verify_hom(_mapping(cert["homomorphism"]), ctx["source"], ctx["target"], ctx.get("sigma"), ctx.get("db_preserving", True))


def verify_no_hom(cert, ctx) -> bool:
    return find_hom(ctx["source"], ctx["target"], ctx.get("sigma"), db_preserving=ctx.get("db_preserving", True)) is None


def verify_bounded_hom(cert, ctx) -> bool:
    names = schema_names(ctx.get("sigma"))
    for item in cert["checked"]:
        dom = [_term(c) for c in item["domain"]]
        sub = ctx["source"].restrict_to_constants(dom)
        if not verify_hom(_mapping(item["homomorphism"]), sub, ctx["target"], names, ctx.get("db_preserving", True)):
            return False
    return True


def verify_bounded_hom_failure(cert, ctx) -> bool:
    sub = facts_from_json(cert["subinstance"])
    if len(sub.adom) > cert["n"] or not sub.facts <= ctx["source"].facts:
        return False
    names = schema_names(ctx.get("sigma"))
    return find_hom(sub, ctx["target"], names, db_preserving=ctx.get("db_preserving", True)) is None


CHECKERS: dict[str, Callable] = {
    "cq-entailment": verify_cq_entailment,
    "cq-non-entailment": verify_cq_non_entailment,
    "triviality-counterexample": verify_triviality_cex,
    "hom-conservativity-counterexample": verify_hom_conservativity_cex,
    "cq-conservativity-counterexample": verify_cq_conservativity_cex,
    "hom": verify_hom_cert,
    "no-hom": verify_no_hom,
    "bounded-hom": verify_bounded_hom,
    "bounded-hom-failure": verify_bounded_hom_failure,
}


def verify_certificate(cert: dict, ctx: dict, recompute: Callable | None = None) -> tuple[bool, str]:
    """(confirmed, method). Kinds without a direct replay fall back to `recompute`."""
    kind = cert.get("kind")
    check = CHECKERS.get(kind)
    if check is not None:
        return bool(check(cert, ctx)), "replay"
    if recompute is None:
        raise UnverifiableCertificate(f"no replay for certificate kind {kind!r}")
    return bool(recompute(cert)), "recompute"
