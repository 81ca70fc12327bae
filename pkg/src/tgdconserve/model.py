"""Relational vocabulary: constants, facts, instances, CQs and TGDs.

Named constants are plain strings. Nulls are ``Null`` objects carrying an
integer id; the two spaces never collide. All containers are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

TRUE = "true"


class ModelError(ValueError):
    pass


class MalformedRule(ModelError):
    pass


class BudgetExceeded(RuntimeError):
    """Raised when an enumeration or search cap is hit."""

    def __init__(self, what: str, limit: int):
        super().__init__(f"{what} exceeded cap {limit}")
        self.what = what
        self.limit = limit


class Null:
    """A labelled null. Equality and hashing go through the integer id."""

    __slots__ = ("id",)

    def __init__(self, id: int):
        self.id = id

    def __eq__(self, other):
        return isinstance(other, Null) and other.id == self.id

    def __hash__(self):
        return self.id * 2654435761 % 4294967311

    def __repr__(self):
        return f"_n{self.id}"

    __str__ = __repr__


def is_null(c) -> bool:
    return isinstance(c, Null)


def const_key(c):
    """Total order on constants: named (by name) before nulls (by id)."""
    if isinstance(c, Null):
        return (1, "", c.id)
    return (0, c, 0)


class Atom(NamedTuple):
    """A relational atom. Arguments are constants for facts, variable names in rules."""

    rel: str
    args: tuple

    def __str__(self):
        return f"{self.rel}({','.join(str(a) for a in self.args)})"


Fact = Atom


def fact_key(f: Atom):
    return (f.rel, tuple(const_key(a) for a in f.args))


class Relation(NamedTuple):
    name: str
    arity: int

    def __str__(self):
        return f"{self.name}/{self.arity}"


def schema_names(sigma) -> frozenset | None:
    """Normalise a schema argument to a frozenset of names; None means 'all'."""
    if sigma is None:
        return None
    out = set()
    for s in sigma:
        out.add(s.name if isinstance(s, Relation) else s)
    return frozenset(out)


class FactIndex:
    """Mutable index over facts, by relation and by (relation, position, value)."""

    __slots__ = ("by_rel", "by_pos", "facts")

    def __init__(self, facts: Iterable[Atom] = ()):
        self.facts: set = set()
        self.by_rel: dict = {}
        self.by_pos: dict = {}
        for f in facts:
            self.add(f)

    def add(self, f: Atom) -> bool:
        if f in self.facts:
            return False
        self.facts.add(f)
        self.by_rel.setdefault(f.rel, []).append(f)
        for i, a in enumerate(f.args):
            self.by_pos.setdefault((f.rel, i, a), []).append(f)
        return True

    def candidates(self, rel: str, bound: Sequence[tuple[int, object]]):
        """Facts of `rel` agreeing with the (position, value) pairs in `bound`."""
        best = self.by_rel.get(rel, ())
        for i, v in bound:
            lst = self.by_pos.get((rel, i, v), ())
            if len(lst) < len(best):
                best = lst
                if not best:
                    break
        return best

    def __contains__(self, f):
        return f in self.facts


class Instance:
    """An immutable set of facts."""

    __slots__ = ("facts", "_adom", "_index", "_sorted")

    def __init__(self, facts: Iterable[Atom] = ()):
        fs = frozenset(f if isinstance(f, Atom) else Atom(f[0], tuple(f[1])) for f in facts)
        self.facts = fs
        self._adom = None
        self._index = None
        self._sorted = None

    @property
    def adom(self) -> frozenset:
        if self._adom is None:
            self._adom = frozenset(a for f in self.facts for a in f.args)
        return self._adom

    @property
    def index(self) -> FactIndex:
        if self._index is None:
            self._index = FactIndex(self.sorted_facts())
        return self._index

    def sorted_facts(self) -> list[Atom]:
        if self._sorted is None:
            self._sorted = sorted(self.facts, key=fact_key)
        return self._sorted

    def sorted_adom(self) -> list:
        return sorted(self.adom, key=const_key)

    def relations(self) -> dict[str, int]:
        return {f.rel: len(f.args) for f in self.facts}

    def is_database(self) -> bool:
        return not any(is_null(a) for a in self.adom)

    def nulls(self) -> frozenset:
        return frozenset(a for a in self.adom if is_null(a))

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.sorted_facts())

    def __len__(self):
        return len(self.facts)

    def __contains__(self, f):
        return f in self.facts

    def __eq__(self, other):
        return isinstance(other, Instance) and self.facts == other.facts

    def __hash__(self):
        return hash(self.facts)

    def __or__(self, other: "Instance") -> "Instance":
        return Instance(self.facts | other.facts)

    def __sub__(self, other: "Instance") -> "Instance":
        return Instance(self.facts - other.facts)

    def __le__(self, other: "Instance") -> bool:
        return self.facts <= other.facts

    def __repr__(self):
        return "{" + ", ".join(str(f) for f in self.sorted_facts()) + "}"

    def restrict_to_constants(self, consts) -> "Instance":
        cs = set(consts)
        return Instance(f for f in self.facts if all(a in cs for a in f.args))

    def rename(self, mapping: Mapping) -> "Instance":
        return Instance(Atom(f.rel, tuple(mapping.get(a, a) for a in f.args)) for f in self.facts)


class Database(Instance):
    """A finite instance over named constants only."""

    __slots__ = ()

    def __init__(self, facts: Iterable[Atom] = ()):
        super().__init__(facts)
        if any(is_null(a) for a in self.adom):
            raise ModelError("a database may not contain nulls")


def restrict(inst: Instance, sigma) -> Instance:
    names = schema_names(sigma)
    if names is None:
        return inst
    return Instance(f for f in inst.facts if f.rel in names)


def gaifman_components(facts: Iterable[Atom]) -> list[list[Atom]]:
    """Group facts into connected components of the Gaifman graph."""
    parent: dict = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    facts = list(facts)
    for f in facts:
        for a in f.args:
            parent.setdefault(a, a)
        for a, b in zip(f.args, f.args[1:]):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    groups: dict = {}
    for f in facts:
        groups.setdefault(find(f.args[0]), []).append(f)
    return list(groups.values())


def connected_components(inst: Instance, sigma=None) -> list[Instance]:
    """Maximal Sigma-connected components, in a deterministic order."""
    comps = [Instance(g) for g in gaifman_components(restrict(inst, sigma).facts)]
    comps.sort(key=lambda c: fact_key(c.sorted_facts()[0]))
    return comps


class Subinstance(NamedTuple):
    domain: tuple
    instance: Instance


def induced_subinstances(inst: Instance, n: int, cap: int = 0) -> Iterator[Subinstance]:
    """Restrictions of `inst` to every nonempty constant subset of size <= n."""
    consts = inst.sorted_adom()
    count = 0
    for size in range(1, min(n, len(consts)) + 1):
        for dom in combinations(consts, size):
            count += 1
            if cap and count > cap:
                raise BudgetExceeded("induced subinstances", cap)
            yield Subinstance(dom, inst.restrict_to_constants(dom))


def atom_vars(atoms: Iterable[Atom]) -> list[str]:
    """Variables in order of first occurrence."""
    seen: dict = {}
    for a in atoms:
        for v in a.args:
            seen.setdefault(v, None)
    return list(seen)


@dataclass(frozen=True)
class CQ:
    """A conjunctive query. An arity-1 query without atoms stands for true(x)."""

    answer_vars: tuple
    atoms: tuple

    def __post_init__(self):
        object.__setattr__(self, "answer_vars", tuple(self.answer_vars))
        object.__setattr__(self, "atoms", tuple(Atom(a[0], tuple(a[1])) for a in self.atoms))
        body = set(atom_vars(self.atoms))
        if len(set(self.answer_vars)) != len(self.answer_vars):
            raise ModelError("repeated answer variable")
        if self.atoms or len(self.answer_vars) != 1:
            missing = [v for v in self.answer_vars if v not in body]
            if missing:
                raise ModelError(f"answer variable {missing[0]} does not occur in the body")

    @property
    def arity(self) -> int:
        return len(self.answer_vars)

    @property
    def is_true(self) -> bool:
        return not self.atoms and len(self.answer_vars) == 1

    def variables(self) -> list[str]:
        vs = list(self.answer_vars)
        vs += [v for v in atom_vars(self.atoms) if v not in vs]
        return vs

    def canonical_database(self) -> tuple[Instance, dict]:
        """D_q with one fresh null per variable, plus the variable map."""
        m = {v: Null(i) for i, v in enumerate(self.variables())}
        return Instance(Atom(a.rel, tuple(m[v] for v in a.args)) for a in self.atoms), m

    def canonical(self) -> "CQ":
        return canonical_cq(self)

    def __str__(self):
        head = f"q({','.join(self.answer_vars)})"
        if self.is_true:
            return f"{head} :- {TRUE}({self.answer_vars[0]})"
        return f"{head} :- {', '.join(str(a) for a in self.atoms)}"


def true_cq(var: str = "x") -> CQ:
    return CQ((var,), ())


def cq_from_instance(inst: Instance, answer: Sequence = ()) -> CQ:
    """View an instance as a CQ: every constant becomes a variable."""
    names: dict = {}
    order = list(answer) + [c for c in inst.sorted_adom() if c not in answer]
    for i, c in enumerate(order):
        names[c] = f"v{i}"
    atoms = tuple(Atom(f.rel, tuple(names[a] for a in f.args)) for f in inst.sorted_facts())
    return CQ(tuple(names[c] for c in answer), atoms)


def canonical_cq(q: CQ, limit: int = 8) -> CQ:
    """Canonical representative of the isomorphism class of q.

    Tries every ordering of the non-answer variables (fine for the small
    queries generated from rule bodies); beyond `limit` variables it falls
    back to a refinement-ordered naming which is still a valid, if not
    necessarily minimal, representative.
    """
    from itertools import permutations

    ans = list(q.answer_vars)
    rest = [v for v in atom_vars(q.atoms) if v not in ans]
    best = None
    if len(rest) <= limit:
        orders = permutations(rest)
    else:
        sig = {v: sorted((a.rel, i) for a in q.atoms for i, x in enumerate(a.args) if x == v) for v in rest}
        orders = [sorted(rest, key=lambda v: sig[v])]
    for perm in orders:
        m = {v: f"x{i}" for i, v in enumerate(ans)}
        m.update({v: f"y{i}" for i, v in enumerate(perm)})
        atoms = tuple(sorted(set(Atom(a.rel, tuple(m[v] for v in a.args)) for a in q.atoms)))
        if best is None or atoms < best:
            best = atoms
    if best is None:
        best = ()
    return CQ(tuple(f"x{i}" for i in range(len(ans))), best)


class Flags(NamedTuple):
    linear: bool
    guarded: bool
    frontier_one: bool


@dataclass(frozen=True)
class TGD:
    """body -> exists existentials. head; frontier = body vars that occur in the head."""

    body: tuple
    head: tuple
    frontier: tuple = field(default=None)
    label: str = field(default="", compare=False)

    def __post_init__(self):
        body = tuple(Atom(a[0], tuple(a[1])) for a in self.body)
        head = tuple(Atom(a[0], tuple(a[1])) for a in self.head)
        object.__setattr__(self, "body", body)
        object.__setattr__(self, "head", head)
        if not head:
            raise MalformedRule("a rule needs at least one head atom")
        hv = set(atom_vars(head))
        if self.frontier is None:
            object.__setattr__(self, "frontier", tuple(v for v in atom_vars(body) if v in hv))
        else:
            object.__setattr__(self, "frontier", tuple(self.frontier))

    @property
    def body_vars(self) -> list[str]:
        return atom_vars(self.body)

    @property
    def existentials(self) -> tuple:
        bv = set(self.body_vars)
        return tuple(v for v in atom_vars(self.head) if v not in bv)

    @property
    def is_linear(self) -> bool:
        return len(self.body) <= 1

    @property
    def is_guarded(self) -> bool:
        if self.is_linear:
            return True
        bv = set(self.body_vars)
        return any(bv <= set(a.args) for a in self.body)

    @property
    def is_frontier_one(self) -> bool:
        return len(self.frontier) == 1

    def __str__(self):
        from .textio import format_rule

        return format_rule(self)


def classify(t: TGD) -> Flags:
    bv, hv = set(t.body_vars), set(atom_vars(t.head))
    for v in t.frontier:
        if v not in bv or v not in hv:
            raise MalformedRule(f"frontier variable {v} missing from body or head")
    return Flags(t.is_linear, t.is_guarded, t.is_frontier_one)


def rules_schema(rules: Iterable[TGD]) -> dict[str, int]:
    out: dict = {}
    for r in rules:
        for a in r.body + r.head:
            out[a.rel] = len(a.args)
    return out


def body_width(rules: Iterable[TGD]) -> int:
    return max((len(r.body_vars) for r in rules), default=1) or 1
