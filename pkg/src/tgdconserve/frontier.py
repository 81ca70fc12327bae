"""Frontier-one machinery: body CQs, types, unravelings, labelled trees, and
bounded hom-/CQ-conservativity checkers.

Global HOLDS answers are out of reach for the conservativity checks (they
quantify over all databases), so those report UNKNOWN with a summary of the
searched space unless a certified counterexample turns up. FAILS is only
reported when the T1 chase saturated, which makes the refutation exact.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .chase import Budget, ChaseResult, chase, chase_below, chase_con, null_components
from .hom import cq_entailed, cq_matches, find_hom, hom_exists_n, solutions
from .linear import set_partitions
from .model import (
    TRUE,
    CQ,
    TGD,
    Atom,
    Database,
    Instance,
    ModelError,
    Null,
    atom_vars,
    body_width,
    canonical_cq,
    connected_components,
    const_key,
    cq_from_instance,
    is_null,
    restrict,
    rules_schema,
    schema_names,
    true_cq,
)
from .verdict import Value, Verdict, facts_json


class ConstantNotFound(ModelError):
    pass


class MalformedTree(ModelError):
    def __init__(self, node, reason: str):
        super().__init__(f"node {node}: {reason}")
        self.node = node
        self.reason = reason


# --- body CQs and types ---------------------------------------------------


@dataclass(frozen=True)
class BodyCQSet:
    queries: frozenset
    partial: bool = False

    def __iter__(self):
        return iter(sorted(self.queries, key=str))

    def __len__(self):
        return len(self.queries)

    def __contains__(self, q):
        return canonical_cq(q) in self.queries


def body_cqs(rules: Iterable[TGD], cap: int = 0) -> BodyCQSet:
    """Unary and Boolean CQs obtained from rule bodies by dropping atoms,
    identifying variables and choosing at most one answer variable."""
    out = {canonical_cq(true_cq())}
    partial = False
    for r in rules:
        atoms = list(dict.fromkeys(r.body))
        for size in range(1, len(atoms) + 1):
            for sub in combinations(atoms, size):
                vs = atom_vars(sub)
                for p in set_partitions(len(vs)):
                    ren = {v: f"b{p[i]}" for i, v in enumerate(vs)}
                    merged = tuple(dict.fromkeys(Atom(a.rel, tuple(ren[v] for v in a.args)) for a in sub))
                    blocks = sorted(set(ren.values()))
                    for ans in [None] + blocks:
                        q = CQ((ans,) if ans else (), merged)
                        out.add(canonical_cq(q))
                        if cap and len(out) > cap:
                            partial = True
                            return BodyCQSet(frozenset(out), True)
    return BodyCQSet(frozenset(out), partial)


@dataclass(frozen=True)
class TType:
    """A set of unary/Boolean CQs; `exact` when read off a saturated chase."""

    members: frozenset
    exact: bool = False
    depth: int | None = None
    partial: bool = False

    @staticmethod
    def of(queries: Iterable[CQ], exact: bool = True) -> "TType":
        ms = {canonical_cq(q) for q in queries} | {canonical_cq(true_cq())}
        return TType(frozenset(ms), exact)

    @property
    def status(self) -> str:
        return "saturated-exact" if self.exact else f"observed-at-depth-{self.depth}"

    def __contains__(self, q: CQ) -> bool:
        return canonical_cq(q) in self.members

    def same_members(self, other: "TType") -> bool:
        return self.members == other.members

    def sorted_members(self) -> list[CQ]:
        return sorted(self.members, key=str)


def type_instance(t: TType, root, fresh: Callable[[], object]) -> Instance:
    """The type viewed as a database: unary members glued at `root`,
    Boolean members as disjoint copies. Other variables get fresh constants."""
    facts = []
    for q in t.sorted_members():
        if q.is_true:
            continue
        m = {v: root for v in q.answer_vars}
        for v in atom_vars(q.atoms):
            if v not in m:
                m[v] = fresh()
        facts.extend(Atom(a.rel, tuple(m[v] for v in a.args)) for a in q.atoms)
    return Instance(facts)


def named_fresh(prefix: str) -> Callable[[], str]:
    k = [0]

    def fresh():
        k[0] += 1
        return f"{prefix}{k[0]}"

    return fresh


def null_fresh(start: int) -> Callable[[], Null]:
    k = [start]

    def fresh():
        k[0] += 1
        return Null(k[0] - 1)

    return fresh


def type_database(t: TType, root: str = "t0") -> Database:
    return Database(type_instance(t, root, named_fresh(f"{root}_w")).facts)


def type_of(inst: Instance, c, queries: BodyCQSet, exact: bool, depth: int | None = None) -> TType:
    members = set()
    for q in queries:
        if q.is_true:
            members.add(q)
        elif q.arity == 1:
            if cq_matches(q, inst, (c,)) is not None:
                members.add(q)
        elif cq_matches(q, inst, ()) is not None:
            members.add(q)
    return TType(frozenset(members), exact, None if exact else depth, queries.partial)


def observed_type(db: Instance, rules, c, budget: Budget | None = None, queries: BodyCQSet | None = None) -> TType:
    budget = budget or Budget()
    if c not in db.adom:
        raise ConstantNotFound(f"{c} is not a constant of the database")
    rules = list(rules)
    queries = queries or body_cqs(rules, budget.max_candidates)
    res = chase(db, rules, budget)
    return type_of(res.instance, c, queries, res.saturated, budget.max_depth)


# --- instance trees and unraveling ----------------------------------------


@dataclass
class InstanceTree:
    nodes: list
    edges: list
    bags: dict

    def instance(self) -> Instance:
        facts = set()
        for b in self.bags.values():
            facts |= {f for f in b.facts if f.rel != TRUE}
        return Instance(facts)

    def width(self) -> int:
        return max((len(b.adom) for b in self.bags.values()), default=0)


@dataclass
class Unraveling:
    database: Database
    back_map: dict
    tree: InstanceTree

    def __iter__(self):
        return iter((self.database, self.back_map))


def unravel(db: Database, k: int, depth: int) -> Unraveling:
    """Finite part of the k-unraveling: bags for k-sequences with at most `depth` sets.

    Bags whose restriction of D has no fact are skipped: they add no facts and
    their continuations are isomorphic to continuations of their parent.
    """
    if k < 1:
        raise ModelError("k must be at least 1")
    consts = db.sorted_adom()
    sets = []
    for size in range(1, min(k, len(consts)) + 1):
        for s in combinations(consts, size):
            if db.restrict_to_constants(s).facts:
                sets.append(s)
    taken = {str(c) for c in consts}
    counter = [0]
    back: dict = {}

    def copy_of(c):
        while True:
            counter[0] += 1
            name = f"{c}_{counter[0]}"
            if name not in taken:
                taken.add(name)
                back[name] = c
                return name

    nodes, edges, bags = [], [], {}
    facts: set = set()
    frontier = []
    for s in sets:
        m = {c: copy_of(c) for c in s}
        v = len(nodes)
        nodes.append(v)
        bags[v] = db.restrict_to_constants(s).rename(m)
        frontier.append((v, s, m))
    for _ in range(depth - 1):
        nxt = []
        for v, s, m in frontier:
            for c in s:
                for s2 in sets:
                    if c not in s2:
                        continue
                    m2 = {d: (m[c] if d == c else copy_of(d)) for d in s2}
                    w = len(nodes)
                    nodes.append(w)
                    edges.append((v, w))
                    bags[w] = db.restrict_to_constants(s2).rename(m2)
                    nxt.append((w, s2, m2))
        frontier = nxt
    for b in bags.values():
        facts |= b.facts
    return Unraveling(Database(facts), back, InstanceTree(nodes, edges, bags))


# --- head fragments and labelled databases --------------------------------


@dataclass(frozen=True)
class HeadFragment:
    instance: Instance
    rule_index: int
    frontier_free: bool = True


def head_fragments(rules: Sequence[TGD], sigma) -> list[HeadFragment]:
    """Maximal Sigma-connected head components avoiding the frontier variable."""
    names = schema_names(sigma)
    out = []
    seen = set()
    for ri, r in enumerate(rules):
        atoms = [a for a in r.head if names is None or a.rel in names]
        for comp in _atom_components(atoms):
            if set(r.frontier) & set(atom_vars(comp)):
                continue
            q = canonical_cq(CQ((), tuple(comp)))
            if q in seen:
                continue
            seen.add(q)
            out.append(HeadFragment(q.canonical_database()[0], ri))
    return out


def _atom_components(atoms: list[Atom]) -> list[list[Atom]]:
    from .model import gaifman_components

    return [sorted(g) for g in gaifman_components(atoms)] if atoms else []


@dataclass
class LabeledDatabase:
    base: Instance
    mu: dict

    def expansion(self) -> Instance:
        """D_A: the base plus one disjoint copy of mu(c) glued at each constant c."""
        start = max((c.id for c in self.base.adom if is_null(c)), default=-1) + 1
        fresh = null_fresh(start)
        facts = set(f for f in self.base.facts if f.rel != TRUE)
        for c in sorted(_bag_constants(self.base), key=const_key):
            facts |= type_instance(self.mu[c], c, fresh).facts
        return Instance(facts)

    def boolean_cq(self) -> CQ:
        return cq_from_instance(self.expansion())

    def unary_cq(self, c) -> CQ:
        exp = self.expansion()
        if c not in exp.adom:
            return true_cq()
        return cq_from_instance(exp, [c])


def _bag_constants(bag: Instance) -> set:
    return set(bag.adom)


# --- proper labelled trees ------------------------------------------------


@dataclass
class LabeledInstanceTree:
    nodes: list
    edges: list
    bags: dict
    mu: dict

    def mu_v(self, v) -> dict:
        return {c: self.mu[c] for c in self.bags[v].adom}

    def validate_structure(self):
        nodes = list(self.nodes)
        nodeset = set(nodes)
        incoming: dict = {v: [] for v in nodes}
        children: dict = {v: [] for v in nodes}
        for u, v in self.edges:
            if u not in nodeset or v not in nodeset:
                raise MalformedTree((u, v), "edge mentions an unknown node")
            incoming[v].append(u)
            children[u].append(v)
        for v in nodes:
            if len(incoming[v]) > 1:
                raise MalformedTree(v, "more than one incoming edge")
            if v not in self.bags:
                raise MalformedTree(v, "node without a bag")
        # connected
        if nodes:
            seen = {nodes[0]}
            todo = [nodes[0]]
            while todo:
                x = todo.pop()
                for y in children[x] + incoming[x]:
                    if y not in seen:
                        seen.add(y)
                        todo.append(y)
            if len(seen) != len(nodes):
                raise MalformedTree(sorted(nodeset - seen, key=str)[0], "graph is not connected")
        # acyclic: with <= 1 incoming edge, a cycle means some node's ancestors loop
        for v in nodes:
            x, steps = v, 0
            while incoming[x]:
                x = incoming[x][0]
                steps += 1
                if x == v or steps > len(nodes):
                    raise MalformedTree(v, "directed cycle")
        for u, v in self.edges:
            shared = self.bags[u].adom & self.bags[v].adom
            if len(shared) > 1:
                raise MalformedTree(v, f"bag shares {len(shared)} constants with its parent {u}")
        holders: dict = {}
        for v in nodes:
            for c in self.bags[v].adom:
                holders.setdefault(c, []).append(v)
                if c not in self.mu:
                    raise MalformedTree(v, f"constant {c} has no type")
        for c, vs in holders.items():
            if len(vs) == 1:
                continue
            vset = set(vs)
            tops = [v for v in vs if not (incoming[v] and incoming[v][0] in vset)]
            if len(tops) != 1 or any(incoming[w][0] != tops[0] for w in vs if w != tops[0]):
                raise MalformedTree(vs[0], f"nodes holding {c} do not form a tree of depth at most one")


def _is_true_bag(bag: Instance):
    fs = bag.sorted_facts()
    if len(fs) == 1 and fs[0].rel == TRUE:
        return fs[0].args[0]
    return None


def isomorphic(a: Instance, b: Instance) -> bool:
    if len(a) != len(b) or len(a.adom) != len(b.adom):
        return False
    if a.relations() != b.relations():
        return False
    for h in solutions(a.sorted_facts(), b.index, {}):
        if len(set(h.values())) == len(h):
            return True
    return False


def _head_instance(r: TGD, names) -> Instance:
    atoms = [a for a in r.head if names is None or a.rel in names]
    return Instance(atoms)


def validate_proper_tree(
    tree: LabeledInstanceTree,
    t_hat: TType,
    rules: Sequence[TGD],
    budget: Budget | None = None,
    sigma=None,
) -> Verdict:
    """Check Conditions 1 and 2 of properness node by node.

    Rule heads are compared with bags after restricting them to `sigma`
    (default: all relations). Entailments are decided by bounded chases of
    the types viewed as databases.
    """
    budget = budget or Budget()
    rules = list(rules)
    names = schema_names(sigma)
    tree.validate_structure()
    incoming = {v: None for v in tree.nodes}
    for u, v in tree.edges:
        incoming[v] = u
    that_db = type_database(t_hat, "t0")
    results = []
    witnesses = []

    def record(node, cond, verdict: Verdict, detail: str = ""):
        entry = {"node": str(node), "condition": cond, "verdict": verdict.value.value}
        if detail:
            entry["detail"] = detail
        results.append(entry)
        witnesses.append((node, cond, verdict))

    for v in tree.nodes:
        bag = tree.bags[v]
        c0 = _is_true_bag(bag)
        if c0 is not None:
            ok = incoming[v] is None and tree.mu[c0].same_members(t_hat)
            why = "" if ok else ("not the root" if incoming[v] is not None else "type differs from t-hat")
            record(v, "1(a)", Verdict(Value.HOLDS if ok else Value.FAILS), why)
            continue
        if any(f.rel == TRUE for f in bag.facts):
            record(v, "1(a)", Verdict(Value.FAILS), "true() mixed with other facts")
            continue
        if not any(isomorphic(bag, _head_instance(r, names)) for r in rules):
            record(v, "1(b)", Verdict(Value.FAILS), "bag is not isomorphic to any rule head")
            continue
        q = LabeledDatabase(bag, tree.mu_v(v)).boolean_cq()
        record(v, "1(b)", cq_entailed(that_db, rules, q, (), budget))
    for u, v in tree.edges:
        shared = tree.bags[u].adom & tree.bags[v].adom
        if not shared:
            continue
        (c,) = shared
        src = type_database(tree.mu[c], "t0")
        q = LabeledDatabase(tree.bags[v], tree.mu_v(v)).unary_cq(c)
        record(f"{u}->{v}", "2", cq_entailed(src, rules, q, ("t0",), budget))
    echo = budget.echo()
    failed = [r for r in results if r["verdict"] == "fails"]
    if failed:
        return Verdict(Value.FAILS, {"kind": "improper-tree", "violations": failed, "checks": results}, echo, witnesses)
    if any(r["verdict"] == "unknown" for r in results):
        echo["undecided"] = [r["node"] for r in results if r["verdict"] == "unknown"]
        return Verdict(Value.UNKNOWN, None, echo, witnesses)
    return Verdict(Value.HOLDS, {"kind": "proper-tree", "checks": results}, echo, witnesses)


# --- candidate databases --------------------------------------------------

CANDIDATE_NAMES = ["c", "d", "e", "f", "g", "h", "i", "j"]


def _canonical_db(facts: Sequence[Atom], consts: Sequence[str]) -> tuple:
    best = None
    for perm in permutations(range(len(consts))):
        m = {c: CANDIDATE_NAMES[perm[i]] for i, c in enumerate(consts)}
        key = tuple(sorted(str(Atom(f.rel, tuple(m[a] for a in f.args))) for f in facts))
        if best is None or key < best[0]:
            best = (key, m)
    return best


def candidate_databases(sigma_d: Mapping[str, int], size: int) -> list[Database]:
    """Sigma_D-databases with at most `size` facts and constants, up to isomorphism."""
    out: dict = {(): Database()}
    items = sorted(sigma_d.items())
    for m in range(1, size + 1):
        consts = CANDIDATE_NAMES[:m]
        atoms = [Atom(r, args) for r, ar in items for args in product(consts, repeat=ar)]
        for nf in range(1, size + 1):
            for fs in combinations(atoms, nf):
                used = {a for f in fs for a in f.args}
                if len(used) != m:
                    continue
                key, ren = _canonical_db(fs, consts)
                if key not in out:
                    out[key] = Database(Atom(f.rel, tuple(ren[a] for a in f.args)) for f in fs)
    return [out[k] for k in sorted(out, key=lambda k: (len(k), len({*"".join(k)}), k))]


def _candidates_with_unravelings(sigma_d, size: int, k: int, depth: int = 2) -> list[Database]:
    base = candidate_databases(sigma_d, size)
    out = list(base)
    seen = {frozenset(str(f) for f in d.facts) for d in base}
    for d in base:
        if len(d.adom) <= k:
            continue
        u = unravel(d, k, depth).database
        key = frozenset(str(f) for f in u.facts)
        if not u.facts or key in seen:
            continue
        if any(isomorphic(u, b) for b in out if len(b) == len(u)):
            continue
        seen.add(key)
        out.append(u)
    return out


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TGD_CONSERVE_THREADS", "1")))
    except ValueError:
        return 1


def _first_failure(fn, items: Sequence) -> tuple[list, Verdict | None]:
    """Apply fn in order; stop at the first FAILS (enumeration order decides)."""
    results = []
    threads = _threads()
    if threads <= 1:
        for it in items:
            v = fn(it)
            results.append(v)
            if v.fails:
                return results, v
        return results, None
    with ThreadPoolExecutor(max_workers=threads) as ex:
        for v in ex.map(fn, items):
            results.append(v)
            if v.fails:
                return results, v
    return results, None


def _resolve(sigma, rules) -> dict:
    if isinstance(sigma, Mapping):
        return dict(sigma)
    known = {}
    for rs in rules:
        known.update(rules_schema(rs))
    out = {}
    for s in sigma:
        if isinstance(s, tuple):
            out[s[0]] = s[1]
        elif "/" in s:
            name, _, ar = s.partition("/")
            out[name] = int(ar)
        elif s in known:
            out[s] = known[s]
        else:
            raise ModelError(f"arity of {s} unknown; give it as {s}/k")
    return out


def _minimal_offender(src: Instance, target: Instance, names, limit: int = 8):
    for n in range(1, min(limit, len(src.adom)) + 1):
        v = hom_exists_n(src, target, names, n)
        if v.fails:
            return v.witness
    return src


# --- hom-conservativity ---------------------------------------------------


def check_hom_conservative(t1, t2, sigma_d, sigma_q, budget: Budget | None = None) -> Verdict:
    budget = budget or Budget()
    t1, t2 = list(t1), list(t2)
    if not all(r.is_frontier_one for r in t1 + t2):
        warnings.warn("rules are not all frontier-one; tree-like witnesses are not sufficient", stacklevel=2)
    d_schema = _resolve(sigma_d, [t1, t2])
    q_names = schema_names(_resolve(sigma_q, [t1, t2]))
    dbs = _candidates_with_unravelings(d_schema, budget.max_db_size, body_width(t1))
    stats = {"databases": len(dbs), "t1_saturated": 0, "hom_found": 0}

    def one(db):
        r1 = chase(db, t1, budget)
        r2 = chase(db, t2, budget)
        src = restrict(r2.instance, q_names)
        if not r1.saturated:
            return Verdict(Value.UNKNOWN, witness=(r1, r2, None))
        h = find_hom(src, r1.instance, q_names, db_preserving=True)
        if h is None:
            sub = _minimal_offender(src, r1.instance, q_names)
            cert = {
                "kind": "hom-conservativity-counterexample",
                "database": facts_json(db.facts),
                "t1_chase": facts_json(r1.instance.facts),
                "t2_part": facts_json(sub.facts),
                "query_schema": sorted(q_names),
            }
            return Verdict(Value.FAILS, cert, witness=(db, r1, sub))
        return Verdict(Value.HOLDS if r2.saturated else Value.UNKNOWN, witness=(r1, r2, h))

    results, failure = _first_failure(one, dbs)
    echo = budget.echo("db_size")
    if failure is not None:
        failure.budget = echo
        return failure
    for v in results:
        r1, r2, h = v.witness
        stats["t1_saturated"] += r1.saturated
        stats["hom_found"] += h is not None
    if not d_schema and results and results[0].holds:
        return Verdict(Value.HOLDS, {"kind": "hom-conservativity-empty-schema", "databases": 1}, echo)
    echo["searched"] = stats
    return Verdict(Value.UNKNOWN, None, echo)


# --- CQ-conservativity ----------------------------------------------------


def connected_cqs(sigma: Mapping[str, int], max_atoms: int) -> list[CQ]:
    """Connected Sigma-CQs of arity 0 and 1 with up to max_atoms atoms, canonical and ordered."""
    found: dict = {}
    items = sorted(sigma.items())
    for n in range(1, max_atoms + 1):
        for rels in product(items, repeat=n):
            slots = sum(ar for _, ar in rels)
            if slots > 8:
                continue
            for p in set_partitions(slots):
                args = [f"v{b}" for b in p]
                atoms, pos = [], 0
                for r, ar in rels:
                    atoms.append(Atom(r, tuple(args[pos:pos + ar])))
                    pos += ar
                if len(set(atoms)) != n or len(_atom_components(atoms)) != 1:
                    continue
                for ans in [None] + sorted(set(args)):
                    q = canonical_cq(CQ((ans,) if ans else (), tuple(atoms)))
                    found.setdefault(q, None)
    return sorted(found, key=lambda q: (q.arity, len(q.atoms), str(q)))


def check_cq_conservative(t1, t2, sigma_d, sigma_q, budget: Budget | None = None) -> Verdict:
    budget = budget or Budget()
    t1, t2 = list(t1), list(t2)
    d_schema = _resolve(sigma_d, [t1, t2])
    q_schema = _resolve(sigma_q, [t1, t2])
    q_names = schema_names(q_schema)
    dbs = _candidates_with_unravelings(d_schema, budget.max_db_size, body_width(t1))
    cqs = connected_cqs(q_schema, budget.max_db_size)
    queries = body_cqs(t1, budget.max_candidates)

    def one(db):
        r1 = chase(db, t1, budget)
        r2 = chase(db, t2, budget)
        consts = db.sorted_adom()
        # independent falsifier: small connected CQs of arity <= 1
        if r1.saturated:
            for q in cqs:
                for tup in ([()] if q.arity == 0 else [(c,) for c in consts]):
                    if cq_matches(q, r2.instance, tup) is not None and cq_matches(q, r1.instance, tup) is None:
                        return _cq_failure(db, q, tup, r1)
            src = restrict(r2.instance, q_names)
            if find_hom(src, r1.instance, q_names, db_preserving=True) is None:
                sub = _minimal_offender(src, r1.instance, q_names)
                answer = [c for c in sub.sorted_adom() if not is_null(c)]
                return _cq_failure(db, cq_from_instance(sub, answer), tuple(answer), r1)
        return Verdict(Value.UNKNOWN, witness=_evidence(db, r1, r2, t1, q_names, queries, budget))

    results, failure = _first_failure(one, dbs)
    echo = budget.echo("db_size", "hom_n")
    if failure is not None:
        failure.budget = echo
        return failure
    echo["searched"] = {"databases": len(dbs), "queries": len(cqs)}
    return Verdict(Value.UNKNOWN, None, echo, witness=[v.witness for v in results])


def _cq_failure(db, q: CQ, tup, r1: ChaseResult) -> Verdict:
    cert = {
        "kind": "cq-conservativity-counterexample",
        "database": facts_json(db.facts),
        "query": str(q),
        "tuple": [str(c) for c in tup],
        "t1_saturated": True,
        "t1_rounds": r1.rounds,
    }
    return Verdict(Value.FAILS, cert, witness=(db, q, tup))


def _evidence(db, r1, r2, t1, q_names, queries, budget: Budget) -> dict:
    """Per-condition evidence on truncations; never used to certify anything."""
    con = chase_con(r2, q_names, db).instance
    ev = {
        "database": facts_json(db.facts),
        "condition_1": find_hom(con, r1.instance, q_names, db_preserving=True) is not None,
        "components": [],
    }
    below = {}
    if r1.frontier_one:
        for c in db.sorted_adom():
            t = type_of(r1.instance, c, queries, r1.saturated, budget.max_depth)
            tdb = type_database(t, "t0")
            below[c] = chase_below(chase(tdb, t1, budget), "t0")
    for comp in null_components(r2, q_names, db):
        entry = {"facts": len(comp), "2a": find_hom(comp, r1.instance, q_names) is not None, "2b": {}}
        for c, inst in below.items():
            best = 0
            for n in range(1, budget.hom_n + 1):
                if hom_exists_n(comp, inst, q_names, n).holds:
                    best = n
                else:
                    break
            entry["2b"][str(c)] = best
        ev["components"].append(entry)
    return ev
