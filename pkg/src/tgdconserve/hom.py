"""Homomorphism search, bounded homomorphisms, CQ evaluation and entailment.

The core is an atom-at-a-time backtracking join: at each step the unmatched
source atom with the fewest candidate target facts (given the bindings so
far) is matched next. The search is iterative, so long chains do not hit the
recursion limit.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, Mapping, Sequence

from .model import (
    CQ,
    Atom,
    BudgetExceeded,
    FactIndex,
    Instance,
    ModelError,
    Null,
    const_key,
    is_null,
    restrict,
    schema_names,
)
from .verdict import Value, Verdict, facts_json, mapping_json


class Counter:
    __slots__ = ("n", "limit")

    def __init__(self, limit: int = 0):
        self.n = 0
        self.limit = limit

    def tick(self):
        self.n += 1
        if self.limit and self.n > self.limit:
            raise BudgetExceeded("candidate", self.limit)


def _bind(atom: Atom, fact: Atom, asg: dict, added: list) -> bool:
    for t, val in zip(atom.args, fact.args):
        cur = asg.get(t, _MISSING)
        if cur is _MISSING:
            asg[t] = val
            added.append(t)
        elif cur != val:
            for v in added:
                del asg[v]
            added.clear()
            return False
    return True


_MISSING = object()


def _pick(rem: list, index: FactIndex, asg: dict):
    best_k, best = -1, None
    for k, a in enumerate(rem):
        bound = [(i, asg[t]) for i, t in enumerate(a.args) if t in asg]
        cands = index.candidates(a.rel, bound)
        if not cands:
            return None
        if best is None or len(cands) < len(best):
            best_k, best = k, cands
            if len(best) == 1:
                break
    return best_k, best


def solutions(atoms: Sequence[Atom], index: FactIndex, asg: dict, counter: Counter | None = None) -> Iterator[dict]:
    """Yield every extension of `asg` mapping all atoms into `index`.

    The same dict object is yielded each time and mutated afterwards; copy it
    if you keep it. On exhaustion `asg` is restored to its initial content.
    """
    stack: list = []

    def push(rem):
        if not rem:
            return "done"
        pick = _pick(rem, index, asg)
        if pick is None:
            return "dead"
        k, cands = pick
        stack.append((rem[k], rem[:k] + rem[k + 1:], iter(list(cands)), []))
        return "pushed"

    st = push(list(atoms))
    if st == "done":
        yield asg
        return
    while stack:
        atom, rest, it, added = stack[-1]
        for v in added:
            del asg[v]
        added.clear()
        f = next(it, None)
        if f is None:
            stack.pop()
            continue
        if counter is not None:
            counter.tick()
        if not _bind(atom, f, asg, added):
            continue
        if push(rest) == "done":
            yield asg


def first_solution(atoms, index, asg, counter=None) -> dict | None:
    for s in solutions(atoms, index, dict(asg), counter):
        return dict(s)
    return None


def _components_by_free_terms(atoms: list[Atom], fixed) -> list[list[Atom]]:
    parent: dict = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k, a in enumerate(atoms):
        parent[("a", k)] = ("a", k)
        for t in a.args:
            if t in fixed:
                continue
            key = ("t", t)
            parent.setdefault(key, key)
            ra, rb = find(("a", k)), find(key)
            if ra != rb:
                parent[ra] = rb
    groups: dict = {}
    for k, a in enumerate(atoms):
        groups.setdefault(find(("a", k)), []).append(a)
    return list(groups.values())


@dataclass
class Hom:
    mapping: dict
    sigma: frozenset | None = None
    database_preserving: bool = True

    def __call__(self, c):
        return self.mapping[c]

    def image(self, inst: Instance) -> Instance:
        return Instance(Atom(f.rel, tuple(self.mapping[a] for a in f.args)) for f in restrict(inst, self.sigma).facts)

    def to_json(self) -> dict:
        return mapping_json(self.mapping)


def find_hom(
    source: Instance,
    target: Instance,
    sigma=None,
    pins: Mapping | None = None,
    db_preserving: bool = True,
    max_candidates: int = 0,
) -> Hom | None:
    """A Sigma-homomorphism from `source` to `target`, or None.

    The mapping is defined on the constants of the source's Sigma-facts plus
    the pinned constants. With `db_preserving`, named constants map to
    themselves. Raises BudgetExceeded when `max_candidates` is hit.
    """
    names = schema_names(sigma)
    src = restrict(source, names).sorted_facts()
    asg: dict = dict(pins or {})
    if db_preserving:
        for f in src:
            for a in f.args:
                if not is_null(a):
                    if asg.get(a, a) != a:
                        return None
                    asg[a] = a
    index = target.index
    counter = Counter(max_candidates)
    for comp in _components_by_free_terms(src, set(asg)):
        sol = first_solution(comp, index, asg, counter)
        if sol is None:
            return None
        asg.update(sol)
    return Hom(asg, names, db_preserving)


def verify_hom(h: Mapping, source: Instance, target: Instance, sigma=None, db_preserving=True) -> bool:
    """Independent check that `h` is a (database-preserving) Sigma-homomorphism."""
    for f in restrict(source, sigma).facts:
        try:
            img = Atom(f.rel, tuple(h[a] for a in f.args))
        except KeyError:
            return False
        if img not in target.facts:
            return False
    if db_preserving:
        return all(h[c] == c for c in h if not is_null(c))
    return True


def _gaifman_adjacency(inst: Instance) -> dict:
    adj: dict = {c: set() for c in inst.adom}
    for f in inst.facts:
        for a in f.args:
            for b in f.args:
                if a != b:
                    adj[a].add(b)
    return adj


def connected_subsets(adj: Mapping, order: Sequence, k: int) -> Iterator[tuple]:
    """All connected vertex sets of size exactly k (ESU enumeration, no duplicates)."""
    idx = {v: i for i, v in enumerate(order)}

    def extend(sub: list, subset: set, ext: list, root_i: int):
        if len(sub) == k:
            yield tuple(sorted(sub, key=idx.__getitem__))
            return
        ext = list(ext)
        while ext:
            w = ext.pop(0)
            nbhd = set()
            for s in sub:
                nbhd |= adj[s]
            new = [u for u in adj[w] if idx[u] > root_i and u not in subset and u not in nbhd and u not in ext]
            new.sort(key=idx.__getitem__)
            subset.add(w)
            sub.append(w)
            yield from extend(sub, subset, ext + new, root_i)
            sub.pop()
            subset.discard(w)

    for v in order:
        i = idx[v]
        ext = sorted((u for u in adj[v] if idx[u] > i), key=idx.__getitem__)
        yield from extend([v], {v}, ext, i)


def hom_exists_n(
    source: Instance,
    target: Instance,
    sigma=None,
    n: int = 0,
    db_preserving: bool = True,
    max_candidates: int = 0,
) -> Verdict:
    """Decide source ->^n target: every induced subinstance with <= n constants maps.

    Only connected constant sets of size min(n, component size) are checked:
    a homomorphism of a superset restricts to its subsets, and disconnected
    subinstances map iff their components do.
    """
    names = schema_names(sigma)
    src = restrict(source, names)
    budget = {"n": n}
    if max_candidates:
        budget["candidates"] = max_candidates
    if n <= 0 or not src.facts:
        return Verdict(Value.HOLDS, {"kind": "bounded-hom", "n": n, "checked": []}, budget)
    adj = _gaifman_adjacency(src)
    checked = []
    witnesses = []
    count = 0
    try:
        for comp in sorted((sorted(c, key=const_key) for c in _vertex_components(adj)), key=lambda c: const_key(c[0])):
            comp_adj = {v: adj[v] for v in comp}
            size = min(n, len(comp))
            subsets = [tuple(comp)] if size == len(comp) else connected_subsets(comp_adj, comp, size)
            for dom in subsets:
                count += 1
                if max_candidates and count > max_candidates:
                    raise BudgetExceeded("subinstance", max_candidates)
                sub = src.restrict_to_constants(dom)
                h = find_hom(sub, target, names, db_preserving=db_preserving, max_candidates=max_candidates)
                if h is None:
                    cert = {
                        "kind": "bounded-hom-failure",
                        "n": n,
                        "domain": [str(c) for c in dom],
                        "subinstance": facts_json(sub.facts),
                    }
                    return Verdict(Value.FAILS, cert, budget, witness=sub)
                checked.append({"domain": [str(c) for c in dom], "homomorphism": h.to_json()})
                witnesses.append((dom, h))
    except BudgetExceeded:
        return Verdict(Value.UNKNOWN, None, budget)
    return Verdict(Value.HOLDS, {"kind": "bounded-hom", "n": n, "checked": checked}, budget, witness=witnesses)


def _vertex_components(adj: Mapping) -> list[set]:
    seen: set = set()
    comps = []
    for v in sorted(adj, key=const_key):
        if v in seen:
            continue
        comp = {v}
        todo = [v]
        seen.add(v)
        while todo:
            x = todo.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    comp.add(y)
                    todo.append(y)
        comps.append(comp)
    return comps


def _term_domain(atoms: Sequence[Atom], index: FactIndex, term) -> set:
    dom = None
    for a in atoms:
        for i, t in enumerate(a.args):
            if t == term:
                vals = {f.args[i] for f in index.by_rel.get(a.rel, ())}
                dom = vals if dom is None else dom & vals
    return dom if dom is not None else set()


def projections(
    atoms: Sequence[Atom],
    index: FactIndex,
    base: Mapping,
    proj: Sequence,
    universe: Iterable = (),
    counter: Counter | None = None,
) -> list[tuple]:
    """Distinct images of `proj` over all extensions of `base` mapping `atoms` into `index`.

    Terms of `proj` that occur in no atom range over `universe`.
    """
    atoms = list(atoms)
    universe = sorted(set(universe), key=const_key)
    free = [t for t in proj if t not in base]
    domains = []
    for t in dict.fromkeys(free):
        d = _term_domain(atoms, index, t) if any(t in a.args for a in atoms) else set(universe)
        domains.append((t, sorted(d, key=const_key)))
    out = []
    asg = dict(base)
    for values in product(*(d for _, d in domains)):
        trial = dict(asg)
        trial.update({t: v for (t, _), v in zip(domains, values)})
        if first_solution(atoms, index, trial, counter) is not None:
            out.append(tuple(trial[t] for t in proj))
    return out


def evaluate_cq(q: CQ, inst: Instance) -> set[tuple]:
    """q(I): all answer tuples."""
    if q.is_true:
        return {(c,) for c in inst.adom}
    if not q.answer_vars:
        return {()} if first_solution(q.atoms, inst.index, {}) is not None else set()
    return set(projections(q.atoms, inst.index, {}, q.answer_vars))


def cq_matches(q: CQ, inst: Instance, tup: Sequence, counter: Counter | None = None) -> dict | None:
    """A homomorphism from q to inst sending the answer variables to `tup`."""
    if len(tup) != q.arity:
        raise ModelError("answer tuple has the wrong length")
    if q.is_true:
        return {q.answer_vars[0]: tup[0]} if tup[0] in inst.adom else None
    return first_solution(q.atoms, inst.index, dict(zip(q.answer_vars, tup)), counter)


def cq_entailed(db: Instance, rules, q: CQ, tup: Sequence = (), budget=None) -> Verdict:
    """Bounded decision of D,T |= q(tup) on the restricted chase."""
    from .chase import Budget, chase

    budget = budget or Budget()
    res = chase(db, rules, budget)
    h = cq_matches(q, res.instance, tuple(tup))
    echo = budget.echo()
    if h is not None:
        if q.is_true:
            h = {q.answer_vars[0]: tup[0]}
        image = [Atom(a.rel, tuple(h[v] for v in a.args)) for a in q.atoms]
        cert = {
            "kind": "cq-entailment",
            "query": str(q),
            "tuple": [str(c) for c in tup],
            "homomorphism": {v: str(h[v]) for v in sorted(h)},
            "image": facts_json(image),
            "rounds": res.rounds,
        }
        return Verdict(Value.HOLDS, cert, echo, witness=(res, h))
    if res.saturated:
        cert = {
            "kind": "cq-non-entailment",
            "query": str(q),
            "tuple": [str(c) for c in tup],
            "saturated": True,
            "rounds": res.rounds,
            "chase_size": len(res.instance),
        }
        return Verdict(Value.FAILS, cert, echo, witness=res)
    return Verdict(Value.UNKNOWN, None, echo, witness=res)


class SpecNotPeriodic(ModelError):
    pass


@dataclass(frozen=True)
class ChainSpec:
    """An infinite instance: `prefix` followed by infinitely many copies of `segment`.

    Copy i of the segment uses the interface constants of copy i-1 for
    `in_vars`, fresh nulls for `out_vars` (which become the next interface)
    and fresh nulls for every other variable. The first copy attaches to
    `interface`, a tuple of prefix constants.
    """

    prefix: Instance
    interface: tuple
    segment: tuple
    in_vars: tuple
    out_vars: tuple

    def validate(self):
        if not self.segment or not self.in_vars:
            raise SpecNotPeriodic("chain spec has no loop")
        if not (len(self.interface) == len(self.in_vars) == len(self.out_vars)):
            raise SpecNotPeriodic("interface, in_vars and out_vars must have equal length")
        if set(self.in_vars) & set(self.out_vars):
            raise SpecNotPeriodic("in_vars and out_vars must be disjoint")

    def materialize(self, periods: int) -> tuple[Instance, list[tuple]]:
        """Prefix plus the first `periods` segment copies, and the interface tuples."""
        self.validate()
        start = max((c.id for c in self.prefix.adom if is_null(c)), default=-1) + 1
        nxt = [start]

        def fresh():
            nxt[0] += 1
            return Null(nxt[0] - 1)

        facts = set(self.prefix.facts)
        cur = tuple(self.interface)
        ifaces = [cur]
        seg_vars = list(dict.fromkeys(v for a in self.segment for v in a.args))
        for _ in range(periods):
            m = dict(zip(self.in_vars, cur))
            for v in self.out_vars:
                m[v] = fresh()
            for v in seg_vars:
                if v not in m:
                    m[v] = fresh()
            facts.update(Atom(a.rel, tuple(m[v] for v in a.args)) for a in self.segment)
            cur = tuple(m[v] for v in self.out_vars)
            ifaces.append(cur)
        return Instance(facts), ifaces


def _chain_setup(spec: ChainSpec, target: Instance, sigma, pins, db_preserving):
    names = schema_names(sigma)
    prefix = restrict(spec.prefix, names).sorted_facts()
    seg = [a for a in spec.segment if names is None or a.rel in names]
    base = dict(pins or {})
    if db_preserving:
        for c in list(spec.prefix.adom) + list(spec.interface):
            if not is_null(c):
                base[c] = c
    return names, prefix, seg, base


def chain_successors(spec: ChainSpec, target: Instance, seg: list, state: tuple, counter=None) -> list[tuple]:
    base = dict(zip(spec.in_vars, state))
    return projections(seg, target.index, base, spec.out_vars, target.adom, counter)


def infinite_chain_hom(
    spec: ChainSpec,
    target: Instance,
    sigma=None,
    pins: Mapping | None = None,
    db_preserving: bool = True,
    max_candidates: int = 0,
) -> Verdict:
    """Exact existence of a Sigma-homomorphism from the infinite chain into a finite target.

    States are images of the interface. A homomorphism exists iff some state
    reachable from an image of the prefix lies on a cycle of the successor
    relation (an infinite path in a finite graph must revisit a state).
    """
    spec.validate()
    names, prefix, seg, base = _chain_setup(spec, target, sigma, pins, db_preserving)
    budget = {"candidates": max_candidates} if max_candidates else {}
    counter = Counter(max_candidates)
    try:
        initial = projections(prefix, target.index, base, spec.interface, target.adom, counter)
        succ: dict = {}
        parent: dict = {}
        order = []
        queue = deque()
        for s in sorted(set(initial), key=_state_key):
            parent[s] = None
            queue.append(s)
        while queue:
            s = queue.popleft()
            order.append(s)
            succ[s] = sorted(set(chain_successors(spec, target, seg, s, counter)), key=_state_key)
            for t in succ[s]:
                if t not in parent:
                    parent[t] = s
                    queue.append(t)
    except BudgetExceeded:
        return Verdict(Value.UNKNOWN, None, budget)
    cycle = _find_cycle(order, succ)
    if cycle is None:
        cert = {"kind": "chain-no-hom", "reachable": [[str(c) for c in s] for s in order]}
        return Verdict(Value.FAILS, cert, budget, witness=order)
    path = [cycle[0]]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    cert = {
        "kind": "chain-hom",
        "path": [[str(c) for c in s] for s in path],
        "cycle": [[str(c) for c in s] for s in cycle],
    }
    return Verdict(Value.HOLDS, cert, budget, witness=(path, cycle))


def _state_key(s):
    return tuple(const_key(c) for c in s)


def _find_cycle(order: list, succ: dict) -> list | None:
    """A cycle (list of states, first state repeated implicitly) in the graph, or None."""
    color: dict = {}
    for root in order:
        if root in color:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = 1
        path = [root]
        while stack:
            v, it = stack[-1]
            w = next(it, None)
            if w is None:
                color[v] = 2
                stack.pop()
                path.pop()
                continue
            c = color.get(w)
            if c == 1:
                return path[path.index(w):]
            if c is None:
                color[w] = 1
                stack.append((w, iter(succ[w])))
                path.append(w)
    return None
