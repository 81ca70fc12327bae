"""Exact triviality for linear TGDs.

For linear rules every derived fact has exactly one parent, so the
(oblivious) chase of a singleton database is a forest whose subtrees depend
only on the equality pattern of their root. We saturate:

* fact shapes: relation plus a pattern over database constants ``('c', i)``
  and null classes ``('n', j)``;
* pair states: two shapes normalised jointly, so shared null numbers record
  which nulls the two facts have in common.

Pair states start from the diagonal (a fact paired with itself) and from
"forks" (two head atoms of the same rule application) and advance one member
by one derivation step at a time. Every state corresponds to a pair of chase
facts or to a homomorphic pre-image of one, and every pair of chase facts is
reached with its exact null sharing. Entailment of CQs is insensitive to the
chase variant, so the oblivious forest is as good as the restricted chase.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import count
from typing import Iterable, Iterator, Mapping, Sequence

from .chase import Budget, NotLinear
from .hom import cq_entailed, find_hom
from .model import (
    TGD,
    Atom,
    BudgetExceeded,
    Database,
    Instance,
    ModelError,
    Null,
    Relation,
    cq_from_instance,
    is_null,
    rules_schema,
    schema_names,
)
from .verdict import Value, Verdict, facts_json


class StateSpaceExceeded(BudgetExceeded):
    pass


class SymbolClash(ModelError):
    pass


def _schema_items(sigma) -> list[tuple[str, int]]:
    if isinstance(sigma, Mapping):
        return sorted(sigma.items())
    out = []
    for s in sigma:
        if isinstance(s, Relation):
            out.append((s.name, s.arity))
        else:
            out.append(tuple(s))
    return sorted(out)


def set_partitions(n: int) -> list[tuple[int, ...]]:
    """Restricted growth strings of length n, finest partitions first."""
    out = []

    def rec(prefix, top):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for b in range(top + 2):
            rec(prefix + [b], max(top, b))

    rec([], -1)
    out.sort(key=lambda p: (-(max(p, default=-1) + 1), p))
    return out


def singleton_databases(sigma_d, include_empty: bool = False) -> list[Database]:
    """One database {R(c1..)} per relation and equality pattern of its positions."""
    items = _schema_items(sigma_d)
    out = [Database()] if include_empty or not items else []
    for name, ar in items:
        for p in set_partitions(ar):
            out.append(Database([Atom(name, tuple(f"c{b + 1}" for b in p))]))
    return out


# --- shapes ---------------------------------------------------------------


def _normalise(*facts) -> tuple:
    """Jointly renumber nulls by first occurrence."""
    ren: dict = {}
    out = []
    for rel, args in facts:
        new = []
        for a in args:
            if a[0] == "n":
                if a not in ren:
                    ren[a] = ("n", len(ren))
                new.append(ren[a])
            else:
                new.append(a)
        out.append((rel, tuple(new)))
    return tuple(out)


class _Fresh:
    def __init__(self):
        self.c = count(10**9)

    def __call__(self):
        return ("n", next(self.c))


def _apply(rule: TGD, fact, fresh) -> list | None:
    b = rule.body[0]
    rel, args = fact
    if b.rel != rel:
        return None
    m: dict = {}
    for v, val in zip(b.args, args):
        if m.setdefault(v, val) != val:
            return None
    for v in rule.existentials:
        m[v] = fresh()
    return [(a.rel, tuple(m[v] for v in a.args)) for a in rule.head]


def _empty_body_heads(rule: TGD, fresh) -> list:
    m = {v: fresh() for v in rule.existentials}
    return [(a.rel, tuple(m[v] for v in a.args)) for a in rule.head]


@dataclass
class Saturation:
    """Reachable shapes and pair states for one singleton database."""

    database: Database
    constants: tuple
    shapes: list = field(default_factory=list)
    pairs: list = field(default_factory=list)

    def to_instance(self, facts) -> Instance:
        def term(a):
            return self.constants[a[1]] if a[0] == "c" else Null(a[1])

        return Instance(Atom(rel, tuple(term(a) for a in args)) for rel, args in facts)


def saturate(db: Database, rules: Sequence[TGD], max_states: int = 0) -> Saturation:
    rules = list(rules)
    for r in rules:
        if not r.is_linear:
            raise NotLinear(f"rule {r} is not linear")
    facts = db.sorted_facts()
    if len(facts) > 1:
        raise ModelError("saturation works on singleton databases")
    consts: list = []
    for f in facts:
        for a in f.args:
            if a not in consts:
                consts.append(a)
    cidx = {c: i for i, c in enumerate(consts)}
    sat = Saturation(db, tuple(consts))
    fresh = _Fresh()
    seen_shapes: dict = {}
    queue: deque = deque()
    forks: list = []

    def add_shape(f):
        (s,) = _normalise(f)
        if s not in seen_shapes:
            seen_shapes[s] = None
            queue.append(s)
            if max_states and len(seen_shapes) > max_states:
                raise StateSpaceExceeded("shape", max_states)

    for f in facts:
        add_shape((f.rel, tuple(("c", cidx[a]) for a in f.args)))
    for r in rules:
        if not r.body:
            heads = _empty_body_heads(r, fresh)
            forks.append(heads)
            for h in heads:
                add_shape(h)
    while queue:
        s = queue.popleft()
        for r in rules:
            if not r.body:
                continue
            heads = _apply(r, s, fresh)
            if heads is None:
                continue
            forks.append(heads)
            for h in heads:
                add_shape(h)
    sat.shapes = list(seen_shapes)

    seen_pairs: dict = {}
    pqueue: deque = deque()

    def add_pair(f1, f2):
        p = _normalise(f1, f2)
        if p not in seen_pairs:
            seen_pairs[p] = None
            pqueue.append(p)
            if max_states and len(seen_pairs) + len(seen_shapes) > max_states:
                raise StateSpaceExceeded("pair state", max_states)

    for s in sat.shapes:
        add_pair(s, s)
    for heads in forks:
        for i, h1 in enumerate(heads):
            for j, h2 in enumerate(heads):
                if i != j:
                    add_pair(h1, h2)
    body_rules = [r for r in rules if r.body]
    while pqueue:
        f1, f2 = pqueue.popleft()
        for r in body_rules:
            for h in _apply(r, f1, fresh) or ():
                add_pair(h, f2)
            for h in _apply(r, f2, fresh) or ():
                add_pair(f1, h)
    sat.pairs = list(seen_pairs)
    return sat


def _cluster_candidates(sat: Saturation) -> Iterator[Instance]:
    for s in sat.shapes:
        yield sat.to_instance([s])
    for f1, f2 in sat.pairs:
        yield sat.to_instance([f1, f2])


def linear_entails_cluster(db: Database, rules: Sequence[TGD], cluster: Instance, max_states: int = 0) -> bool:
    """Exact D,T |= q_C for a cluster C of at most two facts.

    C uses the database's named constants and nulls; the nulls act as
    existential variables. Raises StateSpaceExceeded on overflow.
    """
    if len(cluster) > 2:
        raise ModelError("clusters have at most two facts")
    if not cluster.facts:
        return True
    sat = saturate(db, rules, max_states)
    for cand in _cluster_candidates(sat):
        if find_hom(cluster, cand, db_preserving=True) is not None:
            return True
    if len(cluster) == 2:
        # members drawn from unrelated parts of the chase share no null
        singles = [sat.to_instance([s]) for s in sat.shapes]
        f1, f2 = cluster.sorted_facts()
        for a in singles:
            for b in singles:
                b2 = b.rename({n: Null(n.id + 10**6) for n in b.nulls()})
                if find_hom(cluster, a | b2, db_preserving=True) is not None:
                    return True
    return False


def _connected(inst: Instance) -> bool:
    fs = inst.sorted_facts()
    return len(fs) < 2 or bool(set(fs[0].args) & set(fs[1].args))


def check_triviality(rules: Sequence[TGD], sigma_d, sigma_q, max_states: int = 0) -> Verdict:
    """Decide whether linear `rules` are Sigma_D,Sigma_Q-trivial.

    Checks, for the empty database and every singleton Sigma_D-database D,
    that every entailed connected Sigma_Q-cluster of at most two facts maps
    into D.
    """
    rules = list(rules)
    q_names = schema_names(_names(sigma_q))
    d_items = _schema_items(_with_arities(sigma_d, rules))
    budget = {"states": max_states} if max_states else {}
    dbs = [Database()] + singleton_databases(d_items)
    states = 0
    try:
        for db in dbs:
            sat = saturate(db, rules, max_states)
            states += len(sat.shapes) + len(sat.pairs)
            for cand in _cluster_candidates(sat):
                if any(f.rel not in q_names for f in cand.facts) or not _connected(cand):
                    continue
                if find_hom(cand, db, q_names, db_preserving=True) is None:
                    cert = {
                        "kind": "triviality-counterexample",
                        "database": facts_json(db.facts),
                        "cluster": facts_json(cand.facts),
                        "query_schema": sorted(q_names),
                    }
                    return Verdict(Value.FAILS, cert, budget, witness=(db, cand))
    except StateSpaceExceeded:
        return Verdict(Value.UNKNOWN, None, budget)
    cert = {"kind": "triviality", "databases": len(dbs), "states": states}
    return Verdict(Value.HOLDS, cert, budget)


def _names(sigma) -> list[str]:
    if isinstance(sigma, Mapping):
        return list(sigma)
    return [s.name if isinstance(s, Relation) else (s[0] if isinstance(s, tuple) else s) for s in sigma]


def _with_arities(sigma, rules) -> dict:
    """Resolve a schema given by names (or name/arity pairs) against the rules."""
    if isinstance(sigma, Mapping):
        return dict(sigma)
    known = rules_schema(rules)
    out = {}
    for s in sigma:
        if isinstance(s, Relation):
            out[s.name] = s.arity
        elif isinstance(s, tuple):
            out[s[0]] = s[1]
        elif s in known:
            out[s] = known[s]
        else:
            raise ModelError(f"arity of {s} unknown; give it as {s}/k")
    return out


def verify_triviality_counterexample(rules, db: Instance, cluster: Instance, sigma_q, depth: int = 8) -> bool:
    """Re-check a FAILS certificate with plain chase and homomorphism search."""
    if len(cluster) > 2 or not _connected(cluster):
        return False
    if find_hom(cluster, db, sigma_q, db_preserving=True) is not None:
        return False
    answer = [c for c in cluster.sorted_adom() if not is_null(c)]
    q = cq_from_instance(cluster, answer)
    return cq_entailed(db, rules, q, tuple(answer), Budget(depth)).holds


def build_hardness_instance(db: Database, rules: Sequence[TGD], goal: str = "A", rel: str = "R"):
    """Rules T' with Sigma_D = Sigma_Q = {rel}: T' is trivial iff D,T does not entail some goal fact."""
    used = set(rules_schema(rules)) | set(db.relations())
    if rel in used:
        raise SymbolClash(f"relation {rel} already occurs in the input")
    out = list(rules)
    if db.facts:
        names = {c: f"v{i}" for i, c in enumerate(db.sorted_adom())}
        head = tuple(Atom(f.rel, tuple(names[a] for a in f.args)) for f in db.sorted_facts())
        out.append(TGD((), head, label="qD"))
    out.append(
        TGD(
            (Atom(goal, ("u",)),),
            (Atom(rel, ("x", "y")), Atom(rel, ("y", "z"))),
            label="goal",
        )
    )
    return out, {rel: 2}, {rel: 2}
