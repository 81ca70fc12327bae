"""Fair restricted chase with levels and provenance.

Each round collects every trigger whose body match uses at least one fact
from the previous round, sorts them by (rule index, trigger tuple) and fires
those whose head is still unsatisfied when their turn comes. A trigger that
was fired or found satisfied stays satisfied, so it is never revisited.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .hom import first_solution
from .model import (
    TGD,
    Atom,
    FactIndex,
    Instance,
    ModelError,
    Null,
    const_key,
    fact_key,
    is_null,
    restrict,
    schema_names,
)


class NotFrontierOne(ModelError):
    pass


class NotLinear(ModelError):
    pass


DEFAULT_MAX_FACTS = 100_000


@dataclass
class Budget:
    max_depth: int = 6
    max_facts: int = DEFAULT_MAX_FACTS
    max_candidates: int = 0
    max_db_size: int = 2
    hom_n: int = 4

    def __post_init__(self):
        for k in ("max_depth", "max_facts", "max_candidates", "max_db_size", "hom_n"):
            if getattr(self, k) < 0:
                raise ValueError(f"budget field {k} must be >= 0")

    def echo(self, *extra: str) -> dict:
        out = {"depth": self.max_depth}
        if self.max_facts != DEFAULT_MAX_FACTS:
            out["facts"] = self.max_facts
        if self.max_candidates:
            out["candidates"] = self.max_candidates
        if "db_size" in extra:
            out["db_size"] = self.max_db_size
        if "hom_n" in extra:
            out["hom_n"] = self.hom_n
        return out

    def with_depth(self, d: int) -> "Budget":
        return Budget(d, self.max_facts, self.max_candidates, self.max_db_size, self.hom_n)


@dataclass
class ChaseResult:
    instance: Instance
    levels: dict
    src_const: dict
    src_fact: dict
    parents: dict  # fact -> (rule index, body image facts)
    saturated: bool
    steps_used: int
    rounds: int
    frontier_one: bool
    linear: bool
    database: Instance = field(repr=False, default=None)

    def level_facts(self) -> list[list[Atom]]:
        top = max(self.levels.values(), default=0)
        out: list = [[] for _ in range(top + 1)]
        for f, lv in self.levels.items():
            out[lv].append(f)
        return [sorted(fs, key=fact_key) for fs in out]


def _body_matches(rule: TGD, j: int, fact: Atom, index: FactIndex):
    asg: dict = {}
    for t, v in zip(rule.body[j].args, fact.args):
        if asg.setdefault(t, v) != v:
            return
    rest = rule.body[:j] + rule.body[j + 1:]
    from .hom import solutions

    yield from solutions(rest, index, asg)


def _trigger_key(ri: int, tup: tuple):
    return (ri, tuple(const_key(c) for c in tup))


def _collect(rules: Sequence[TGD], delta: Sequence[Atom], index: FactIndex, first: bool, done: set) -> dict:
    """(rule index, frontier tuple) -> body image, for triggers touching `delta`."""
    by_rel: dict = {}
    for f in delta:
        by_rel.setdefault(f.rel, []).append(f)
    found: dict = {}
    for ri, r in enumerate(rules):
        if not r.body:
            if first and (ri, ()) not in done:
                found[(ri, ())] = ()
            continue
        for j, b in enumerate(r.body):
            for f in by_rel.get(b.rel, ()):
                for m in _body_matches(r, j, f, index):
                    tup = tuple(m[v] for v in r.frontier)
                    key = (ri, tup)
                    if key in done:
                        continue
                    img = tuple(Atom(a.rel, tuple(m[v] for v in a.args)) for a in r.body)
                    old = found.get(key)
                    if old is None or [fact_key(x) for x in img] < [fact_key(x) for x in old]:
                        found[key] = img
    return found


def head_satisfied(rule: TGD, index: FactIndex, tup: tuple) -> bool:
    return first_solution(rule.head, index, dict(zip(rule.frontier, tup))) is not None


def applicable(rule: TGD, inst: Instance, tup: Sequence) -> bool:
    """Restricted applicability at frontier tuple `tup`."""
    tup = tuple(tup)
    if len(tup) != len(rule.frontier):
        raise ModelError("trigger tuple does not match the frontier")
    index = inst.index
    if first_solution(rule.body, index, dict(zip(rule.frontier, tup))) is None:
        return False
    return not head_satisfied(rule, index, tup)


def chase(db: Instance, rules: Iterable[TGD], budget: Budget | None = None) -> ChaseResult:
    """Run the restricted chase for at most budget.max_depth rounds."""
    budget = budget or Budget()
    rules = list(rules)
    start = db.sorted_facts()
    index = FactIndex(start)
    levels = {f: 0 for f in start}
    src_const = {c: c for c in db.adom}
    src_fact = {f: f for f in start}
    parents: dict = {}
    next_null = max((c.id for c in db.adom if is_null(c)), default=-1) + 1
    done: set = set()
    delta = start
    rounds = steps = 0
    saturated = False
    out_of_facts = False
    while rounds < budget.max_depth:
        found = _collect(rules, delta, index, rounds == 0, done)
        rounds += 1
        new: list = []
        fired = 0
        for key in sorted(found, key=lambda k: _trigger_key(*k)):
            ri, tup = key
            r = rules[ri]
            if head_satisfied(r, index, tup):
                done.add(key)
                continue
            if len(index.facts) >= budget.max_facts:
                out_of_facts = True
                break
            done.add(key)
            m = dict(zip(r.frontier, tup))
            origin = src_const.get(tup[0]) if r.is_frontier_one else None
            for v in r.existentials:
                n = Null(next_null)
                next_null += 1
                m[v] = n
                if origin is not None:
                    src_const[n] = origin
            body_img = found[key]
            for a in r.head:
                f = Atom(a.rel, tuple(m[v] for v in a.args))
                if index.add(f):
                    new.append(f)
                    levels[f] = rounds
                    parents[f] = (ri, body_img)
                    if len(body_img) == 1 and body_img[0] in src_fact:
                        src_fact[f] = src_fact[body_img[0]]
            fired += 1
            steps += 1
        if out_of_facts:
            break
        if fired == 0:
            saturated = True
            break
        delta = new
    if not saturated and not out_of_facts:
        # probe: nothing left to fire means the truncation is already a model
        found = _collect(rules, delta, index, rounds == 0, done)
        if all(head_satisfied(rules[ri], index, tup) for ri, tup in found):
            saturated = True
    return ChaseResult(
        instance=Instance(index.facts),
        levels=levels,
        src_const=src_const,
        src_fact=src_fact,
        parents=parents,
        saturated=saturated,
        steps_used=steps,
        rounds=rounds,
        frontier_one=all(r.is_frontier_one for r in rules),
        linear=all(r.is_linear for r in rules),
        database=db,
    )


def chase_below(r: ChaseResult, c) -> Instance:
    """The part of the chase whose constants originate at database constant c."""
    if not r.frontier_one:
        raise NotFrontierOne("chase_below needs a frontier-one rule set")
    keep = {d for d, s in r.src_const.items() if s == c} | {c}
    return r.instance.restrict_to_constants(keep)


def chase_below_fact(r: ChaseResult, alpha: Atom) -> Instance:
    """The facts derived (transitively) from database fact alpha."""
    if not r.linear:
        raise NotLinear("chase_below_fact needs a linear rule set")
    return Instance(f for f, s in r.src_fact.items() if s == alpha)


class ConPart(NamedTuple):
    instance: Instance
    approximate: bool


def chase_con(r: ChaseResult, sigma, db: Instance) -> ConPart:
    """Union of the maximal Sigma-components of the chase that touch adom(db)."""
    from .model import connected_components

    consts = db.adom
    keep = [c for c in connected_components(r.instance, sigma) if c.adom & consts]
    facts = set()
    for c in keep:
        facts |= c.facts
    return ConPart(Instance(facts), not r.saturated)


def null_components(r: ChaseResult, sigma, db: Instance) -> list[Instance]:
    """Maximal Sigma-components of the chase that contain no database constant."""
    from .model import connected_components

    return [c for c in connected_components(r.instance, sigma) if not (c.adom & db.adom)]


def restrict_result(r: ChaseResult, sigma) -> Instance:
    return restrict(r.instance, schema_names(sigma))
