"""Conway functions, rivers, and the rule families built from them.

Relation names of the generated rules: ``Start``, ``Bridge``, ``End``,
``WH{i}_{k}`` (workhorse with Pyramus count i mod gamma, remainder class k)
and ``BH{k}`` (bridge head). The query schema is Pyramus, Thisbe, Channel,
Encounter and Mouth. River constants are ``b{i}`` (bridges), ``p{i}_{j}``
and ``t{i}_{j}`` (inner path nodes of segment i), ``c``, ``e1``, ``e2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, NamedTuple, Sequence

from .chase import Budget, ChaseResult
from .hom import ChainSpec, first_solution
from .model import TGD, Atom, Database, Instance, ModelError, atom_vars
from .verdict import Value, Verdict

QUERY_SCHEMA = {"Pyramus": 2, "Thisbe": 2, "Channel": 2, "Encounter": 2, "Mouth": 1}
DAGGER = ("c", "e1", "e2")


class InvalidSpec(ModelError):
    pass


# --- Conway functions -----------------------------------------------------


@dataclass(frozen=True)
class ConwaySpec:
    gamma: int
    alpha: tuple
    beta: tuple
    reduction: bool = False

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(self.alpha))
        object.__setattr__(self, "beta", tuple(self.beta))
        g = self.gamma
        if g < 1 or len(self.alpha) != g or len(self.beta) != g:
            raise InvalidSpec("alpha and beta must have length gamma >= 1")
        if any(a < 1 for a in self.alpha + self.beta):
            raise InvalidSpec("alpha and beta must be positive")
        for k in range(g):
            if g % self.beta[k] or (k * self.alpha[k]) % self.beta[k]:
                raise InvalidSpec(f"beta_{k} must divide gamma and {k}*alpha_{k}")
        if self.reduction and (self(2) != 3 or self(1) != 1):
            raise InvalidSpec("reduction mode needs F(2)=3 and F(1)=1")

    def __call__(self, n: int) -> int:
        return conway_eval(self, n)


def conway_eval(s: ConwaySpec, n: int) -> int:
    if n < 1:
        raise InvalidSpec("Conway functions are defined on positive integers")
    k = n % s.gamma
    q, r = divmod(n * s.alpha[k], s.beta[k])
    if r:
        raise InvalidSpec(f"F({n}) is not an integer")
    return q


def conway_stops(s: ConwaySpec, start: int = 2, budget: Budget | None = None, max_steps: int | None = None) -> Verdict:
    """Iterate F from `start`: HOLDS on reaching 1, FAILS on a repeat, else UNKNOWN."""
    budget = budget or Budget()
    steps = budget.max_depth if max_steps is None else max_steps
    traj = [start]
    seen = {start: 0}
    echo = {"steps": steps}
    while True:
        if traj[-1] == 1:
            return Verdict(Value.HOLDS, {"kind": "conway-trajectory", "trajectory": traj}, echo)
        if len(traj) > steps:
            return Verdict(Value.UNKNOWN, None, echo)
        nxt = conway_eval(s, traj[-1])
        if nxt in seen:
            cert = {"kind": "conway-cycle", "trajectory": traj + [nxt], "cycle_start": seen[nxt]}
            return Verdict(Value.FAILS, cert, echo)
        seen[nxt] = len(traj)
        traj.append(nxt)


# --- rivers ---------------------------------------------------------------


@dataclass(frozen=True)
class RiverSpec:
    p: tuple
    t: tuple

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(self.p))
        object.__setattr__(self, "t", tuple(self.t))
        if not self.p or len(self.p) != len(self.t):
            raise InvalidSpec("p and t must be nonempty and of equal length")
        if any(x < 1 for x in self.p + self.t):
            raise InvalidSpec("path lengths must be positive")

    @property
    def n(self) -> int:
        return len(self.p)

    def __str__(self):
        return f"<{list(self.p)},{list(self.t)}>"


def _pnode(k: RiverSpec, i: int, d: int) -> str:
    """Node at distance d (towards b_i) from b_{i-1} on the Pyramus path of segment i."""
    if d == 0:
        return f"b{i - 1}"
    if d == k.p[i - 1]:
        return f"b{i}"
    return f"p{i}_{k.p[i - 1] - d}"


def _tnode(k: RiverSpec, i: int, d: int) -> str:
    if d == 0:
        return f"b{i - 1}"
    if d == k.t[i - 1]:
        return f"b{i}"
    return f"t{i}_{k.t[i - 1] - d}"


def river_build(k: RiverSpec) -> Database:
    facts = []
    for i in range(1, k.n + 1):
        for d in range(1, k.p[i - 1] + 1):
            a = _pnode(k, i, d)
            facts.append(Atom("Pyramus", (a, _pnode(k, i, d - 1))))
            if d < k.p[i - 1]:
                facts.append(Atom("Pyramus", (a, "e2")))
                facts.append(Atom("Channel", ("c", a)))
        for d in range(1, k.t[i - 1] + 1):
            a = _tnode(k, i, d)
            facts.append(Atom("Thisbe", (a, _tnode(k, i, d - 1))))
            if d < k.t[i - 1]:
                facts.append(Atom("Thisbe", (a, "e1")))
                facts.append(Atom("Channel", ("c", a)))
    for i in range(k.n + 1):
        b = f"b{i}"
        facts += [Atom("Thisbe", (b, "e2")), Atom("Pyramus", (b, "e1")), Atom("Channel", ("c", b))]
    for e in ("e1", "e2"):
        facts += [Atom("Pyramus", (e, e)), Atom("Thisbe", (e, e)), Atom("Channel", (e, e))]
    facts += [Atom("Encounter", (f"b{k.n}", f"b{k.n - 1}")), Atom("Mouth", ("b0",))]
    return Database(facts)


class RiverCheck(NamedTuple):
    locally_correct: bool
    correct: bool
    defect: int | None


def river_correctness(k: RiverSpec, s: ConwaySpec) -> RiverCheck:
    local = k.p[0] == 2 and k.p[-1] == 1 and all(s(k.p[i]) == k.t[i] for i in range(k.n - 1))
    defect = next((m + 1 for m in range(k.n - 1) if k.t[m] != k.p[m + 1]), None)
    return RiverCheck(local, local and defect is None, defect)


def has_defect(k: RiverSpec) -> bool:
    """True iff some 1 <= m < n has t_m != p_{m+1}."""
    return any(k.t[m] != k.p[m + 1] for m in range(k.n - 1))


def locally_correct_rivers(s: ConwaySpec, max_n: int, max_val: int = 4) -> Iterator[RiverSpec]:
    """Locally correct rivers of length <= max_n with inner p_i in 1..max_val.

    t_i = F(p_i) for every i, including the last one.
    """
    for n in range(2, max_n + 1):
        for mid in product(range(1, max_val + 1), repeat=n - 2):
            p = (2,) + mid + (1,)
            yield RiverSpec(p, tuple(s(x) for x in p))


# --- T_myth ---------------------------------------------------------------


def _a(rel, *args) -> Atom:
    return Atom(rel, tuple(args))


def myth_rules() -> list[TGD]:
    return [
        TGD((_a("Encounter", "p", "t"),), (_a("M", "p", "p1", "c", "t1", "t"),), label="myth_start"),
        TGD((_a("M", "p", "p1", "c", "t1", "t"),), (_a("M", "p1", "p2", "c2", "t2", "t1"),), label="myth_step"),
        TGD(
            (_a("M", "p", "p1", "c", "t1", "t"),),
            (_a("Pyramus", "p", "p1"), _a("Thisbe", "t", "t1"), _a("Channel", "c", "p1"), _a("Channel", "c", "t1")),
            label="myth_proj",
        ),
    ]


def myth_chain_spec(encounter: Atom | RiverSpec) -> ChainSpec:
    """The T_myth chase of one Encounter fact as prefix plus repeating M-step."""
    if isinstance(encounter, RiverSpec):
        encounter = _a("Encounter", f"b{encounter.n}", f"b{encounter.n - 1}")
    p, t = encounter.args
    seg = (
        _a("M", "p", "p1", "c", "t1", "t"),
        _a("Pyramus", "p", "p1"),
        _a("Thisbe", "t", "t1"),
        _a("Channel", "c", "p1"),
        _a("Channel", "c", "t1"),
    )
    return ChainSpec(Instance([encounter]), (p, t), seg, ("p", "t"), ("p1", "t1"))


# --- T_rec and T_proj -----------------------------------------------------


def _xs(prefix: str, lo: int, hi: int) -> list[str]:
    return [f"{prefix}{j}" for j in range(lo, hi + 1)]


def _wh(i: int, k: int) -> str:
    return f"WH{i}_{k}"


def _bh(k: int) -> str:
    return f"BH{k}"


def _bh_args(s: ConwaySpec, k: int, x: str, y: str, b: str, z="z", u="u") -> list[str]:
    return list(DAGGER) + [x] + _xs(z, 1, s.beta[k] - 1) + [b, y] + _xs(u, 1, s.alpha[k] - 1) + [b]


def rec_rules(s: ConwaySpec, short_segments: bool = True) -> list[TGD]:
    g = s.gamma
    out = [
        TGD((), (_a("Start", *DAGGER, "b0", "x1", "y1", "y2", "b1"),), label="start"),
        TGD((_a("Start", *DAGGER, "b0", "x1", "y1", "y2", "b1"),), (_a("Bridge", *DAGGER, "b1"),), label="start_bridge"),
    ]
    bridge = _a("Bridge", *DAGGER, "b")
    for k in range(g):
        al, be = s.alpha[k], s.beta[k]
        head = _a(_wh(be % g, k), *DAGGER, "b", *_xs("x", 1, be), "b", *_xs("y", 1, al))
        out.append(TGD((bridge,), (head,), label=f"bridge_wh{k}"))
    for k in range(g):
        al, be = s.alpha[k], s.beta[k]
        for i in range(g):
            body = _a(_wh(i, k), *DAGGER, *_xs("x", 0, be), *_xs("y", 0, al))
            head = _a(_wh((i + be) % g, k), *DAGGER, f"x{be}", *_xs("z", 1, be), f"y{al}", *_xs("u", 1, al))
            out.append(TGD((body,), (head,), label=f"wh{i}_{k}"))
    for k in range(g):
        al, be = s.alpha[k], s.beta[k]
        body = _a(_wh((k - be) % g, k), *DAGGER, *_xs("x", 0, be), *_xs("y", 0, al))
        head = _a(_bh(k), *_bh_args(s, k, f"x{be}", f"y{al}", "b"))
        out.append(TGD((body,), (head,), label=f"wh_bh{k}"))
        out.append(TGD((head,), (_a("Bridge", *DAGGER, "b"),), label=f"bh_bridge{k}"))
    for k in range(g):
        if short_segments and s.beta[k] % g == k:
            head = _a(_bh(k), *_bh_args(s, k, "b", "b", "b1"))
            out.append(TGD((bridge,), (head,), label=f"bridge_bh{k}"))
    out.append(TGD((bridge,), (_a("End", *DAGGER, "b", "b1"),), label="end"))
    return out


def _path(rel: str, nodes: list[str], eternity: str) -> list[Atom]:
    """rel-edges nodes[j+1] -> nodes[j]; inner nodes get the eternity and channel facts."""
    out = [_a(rel, nodes[j + 1], nodes[j]) for j in range(len(nodes) - 1)]
    for a in nodes[1:-1]:
        out += [_a(rel, a, eternity), _a("Channel", "c", a)]
    return out


def proj_rules(s: ConwaySpec) -> list[TGD]:
    g = s.gamma
    start = _a("Start", *DAGGER, "b0", "x1", "y1", "y2", "b1")
    eternal = [_a(r, e, e) for e in ("e1", "e2") for r in ("Channel", "Pyramus", "Thisbe")]
    out = [
        TGD(
            (start,),
            (
                _a("Mouth", "b0"),
                *_path("Pyramus", ["b0", "x1", "b1"], "e2"),
                *_path("Thisbe", ["b0", "y1", "y2", "b1"], "e1"),
                _a("Channel", "c", "b0"), _a("Pyramus", "b0", "e1"), _a("Thisbe", "b0", "e2"),
                *eternal,
            ),
            label="proj_start",
        )
    ]
    for k in range(g):
        al, be = s.alpha[k], s.beta[k]
        xs, ys = _xs("x", 0, be), _xs("y", 0, al)
        # the last node of each path is the next interface: it gets its facts here too
        head = _path("Pyramus", xs + ["_"], "e2") + _path("Thisbe", ys + ["_"], "e1")
        head = [a for a in head if "_" not in a.args]
        for i in range(g):
            out.append(TGD((_a(_wh(i, k), *DAGGER, *xs, *ys),), tuple(head), label=f"proj_wh{i}_{k}"))
    for k in range(g):
        al, be = s.alpha[k], s.beta[k]
        ps = ["x"] + _xs("z", 1, be - 1) + ["b"]
        ts = ["y"] + _xs("u", 1, al - 1) + ["b"]
        head = _path("Pyramus", ps, "e2") + _path("Thisbe", ts, "e1")
        out.append(TGD((_a(_bh(k), *_bh_args(s, k, "x", "y", "b")),), tuple(head), label=f"proj_bh{k}"))
    out.append(
        TGD(
            (_a("Bridge", *DAGGER, "b"),),
            (_a("Channel", "c", "b"), _a("Pyramus", "b", "e1"), _a("Thisbe", "b", "e2")),
            label="proj_bridge",
        )
    )
    out.append(
        TGD(
            (_a("End", *DAGGER, "b", "b1"),),
            (
                _a("Pyramus", "b1", "b"), _a("Thisbe", "b1", "b"), _a("Encounter", "b1", "b"),
                _a("Channel", "c", "b1"), _a("Pyramus", "b1", "e1"), _a("Thisbe", "b1", "e2"),
            ),
            label="proj_end",
        )
    )
    return out


def gen_T1(s: ConwaySpec, short_segments: bool = True) -> list[TGD]:
    if not s.reduction:
        raise InvalidSpec("gen_T1 needs a reduction-mode spec (F(2)=3, F(1)=1)")
    return rec_rules(s, short_segments) + proj_rules(s)


def gen_T2(s: ConwaySpec, short_segments: bool = True) -> list[TGD]:
    return gen_T1(s, short_segments) + myth_rules()


# --- ancestors and river extraction ---------------------------------------


def project(fact: Atom, proj: Sequence[TGD]) -> set[Atom]:
    out = set()
    for r in proj:
        b = r.body[0]
        if b.rel != fact.rel:
            continue
        m: dict = {}
        if all(m.setdefault(v, c) == c for v, c in zip(b.args, fact.args)):
            out |= {Atom(a.rel, tuple(m[v] for v in a.args)) for a in r.head}
    return out


def ancestors(res: ChaseResult, fact: Atom, rules: Sequence[TGD]) -> list[Atom]:
    """The chain of T_rec facts that produced `fact`, oldest first."""
    proj_labels = {r.label for r in rules if r.label.startswith("proj_")}
    chain = [fact]
    while chain[-1] in res.parents:
        ri, body = res.parents[chain[-1]]
        if rules[ri].label in proj_labels or len(body) != 1:
            break
        chain.append(body[0])
    return chain[::-1]


def ancestors_q(chain: Sequence[Atom], proj: Sequence[TGD]) -> Instance:
    facts: set = set()
    for f in chain:
        facts |= project(f, proj)
    return Instance(facts)


def extract_river(inst: Instance) -> tuple[RiverSpec, dict] | None:
    """Read kappa off an instance isomorphic to some River_kappa; None if it is not one."""
    idx = inst.index
    mouths = [f.args[0] for f in inst.facts if f.rel == "Mouth"]
    encs = [f.args for f in inst.facts if f.rel == "Encounter"]
    chans = [f.args for f in inst.facts if f.rel == "Channel" and f.args[0] == f.args[1]]
    if len(mouths) != 1 or len(encs) != 1:
        return None
    e_loops = {a for a, _ in chans}
    to_e = {rel: {f.args[0] for f in inst.facts if f.rel == rel and f.args[1] in e_loops} - e_loops
            for rel in ("Pyramus", "Thisbe")}
    bridges = to_e["Pyramus"] & to_e["Thisbe"]
    e1 = {f.args[1] for f in inst.facts if f.rel == "Pyramus" and f.args[0] in bridges and f.args[1] in e_loops}
    e2 = {f.args[1] for f in inst.facts if f.rel == "Thisbe" and f.args[0] in bridges and f.args[1] in e_loops}
    if len(e1) != 1 or len(e2) != 1:
        return None
    (e1,), (e2,) = e1, e2

    def step(rel, a):
        nxt = [f.args[1] for f in idx.candidates(rel, [(0, a)]) if f.args[0] == a and f.args[1] not in (e1, e2)]
        return nxt[0] if len(nxt) == 1 else None

    def walk(rel, start):
        lengths, cur, d = [], start, 0
        while cur != mouths[0]:
            nxt = step(rel, cur)
            if nxt is None or d > len(inst):
                return None
            d += 1
            if nxt in bridges:
                lengths.append(d)
                d = 0
            cur = nxt
        return lengths

    bn = encs[0][0]
    p = walk("Pyramus", bn)
    t = walk("Thisbe", bn)
    if not p or not t or len(p) != len(t):
        return None
    k = RiverSpec(p[::-1], t[::-1])
    cs = {f.args[0] for f in inst.facts if f.rel == "Channel" and f.args[0] != f.args[1]}
    if len(cs) != 1:
        return None
    # rename along the walks and compare with the canonical river
    ren = {cs.pop(): "c", e1: "e1", e2: "e2"}
    for rel, lens, node in (("Pyramus", k.p, _pnode), ("Thisbe", k.t, _tnode)):
        cur = bn
        for i in range(k.n, 0, -1):
            for d in range(lens[i - 1], 0, -1):
                name = node(k, i, d)
                if ren.setdefault(cur, name) != name:
                    return None
                cur = step(rel, cur)
        if ren.setdefault(cur, "b0") != "b0":
            return None
    if len(set(ren.values())) != len(ren):
        return None
    if inst.rename(ren) != river_build(k):
        return None
    return k, ren


# --- guarded T0 and its witness database ----------------------------------


def _s_name(r: TGD) -> str:
    return f"S_{r.label}"


def _s_vars(r: TGD) -> list[str]:
    return atom_vars(r.body) + list(r.existentials)


def gen_guarded_T0(s: ConwaySpec, short_segments: bool = True) -> tuple[list[TGD], dict, dict]:
    """(rules, Sigma_D, Sigma_Q): T_myth, the End-to-Encounter rule and one guarded rule per T_rec rule."""
    if not s.reduction:
        raise InvalidSpec("gen_guarded_T0 needs a reduction-mode spec (F(2)=3, F(1)=1)")
    rec = rec_rules(s, short_segments)
    proj = proj_rules(s)
    rules = list(myth_rules())
    rules.append(
        TGD(
            (_a("End", *DAGGER, "b", "b1"), _a("Pyramus", "b1", "b"), _a("Thisbe", "b1", "b")),
            (_a("Encounter", "b1", "b"),),
            label="end_encounter",
        )
    )
    sigma_q = {r: a for r, a in QUERY_SCHEMA.items() if r != "Encounter"}
    sigma_d = dict(sigma_q)
    sigma_d["Start"] = 3 + 5
    for r in rec:
        if not r.body:
            continue
        sv = _s_vars(r)
        (p,) = r.body
        body = [_a(_s_name(r), *sv), p] + sorted(project(p, proj))
        rules.append(TGD(tuple(body), r.head, label=f"club_{r.label}"))
        sigma_d[_s_name(r)] = len(sv)
    return rules, sigma_d, sigma_q


class Derivation(NamedTuple):
    steps: list  # (rule, parent fact or None, child fact)
    river: RiverSpec


def river_derivation(s: ConwaySpec, k: RiverSpec, short_segments: bool = True) -> Derivation:
    """The T_rec derivation whose End fact projects onto River_kappa (constants named as in river_build)."""
    if k.n < 2 or k.p[0] != 2 or k.t[0] != 3 or k.p[-1] != 1 or k.t[-1] != 1:
        raise InvalidSpec("derivable rivers start with (2,3) and end with (1,1)")
    rules = {r.label: r for r in rec_rules(s, short_segments)}
    g = s.gamma
    steps = []

    def add(label, parent, child):
        steps.append((rules[label], parent, child))
        return child

    start = _a("Start", *DAGGER, "b0", _pnode(k, 1, 1), _tnode(k, 1, 1), _tnode(k, 1, 2), "b1")
    add("start", None, start)
    cur = add("start_bridge", start, _a("Bridge", *DAGGER, "b1"))
    for i in range(2, k.n):
        p, t = k.p[i - 1], k.t[i - 1]
        kk = p % g
        al, be = s.alpha[kk], s.beta[kk]
        if p % be or t * be != p * al:
            raise InvalidSpec(f"segment {i} ({p},{t}) cannot be generated")
        m = p // be
        bi = f"b{i}"

        def px(d):
            return _pnode(k, i, d)

        def ty(d):
            return _tnode(k, i, d)

        def bh(dp, dt):
            args = list(DAGGER) + [px(dp)] + [px(dp + j) for j in range(1, be)] + [bi, ty(dt)]
            return _a(_bh(kk), *args, *[ty(dt + j) for j in range(1, al)], bi)

        if m == 1:
            if f"bridge_bh{kk}" not in rules:
                raise InvalidSpec(f"segment {i} needs the short-segment rule")
            cur = add(f"bridge_bh{kk}", cur, bh(0, 0))
        else:
            wh = _a(_wh(be % g, kk), *DAGGER, *[px(d) for d in range(be + 1)], *[ty(d) for d in range(al + 1)])
            cur = add(f"bridge_wh{kk}", cur, wh)
            for j in range(1, m - 1):
                lvl = ((j + 1) * be) % g
                nxt = _a(
                    _wh(lvl, kk), *DAGGER,
                    *[px(d) for d in range(j * be, (j + 1) * be + 1)],
                    *[ty(d) for d in range(j * al, (j + 1) * al + 1)],
                )
                cur = add(f"wh{(j * be) % g}_{kk}", cur, nxt)
            cur = add(f"wh_bh{kk}", cur, bh((m - 1) * be, (m - 1) * al))
        cur = add(f"bh_bridge{kk}", cur, _a("Bridge", *DAGGER, bi))
    add("end", cur, _a("End", *DAGGER, f"b{k.n - 1}", f"b{k.n}"))
    for r, parent, child in steps:
        if parent is not None and not _instance_of(r, parent, child):
            raise InvalidSpec(f"derivation step {r.label} does not match its rule")
    return Derivation(steps, k)


def _instance_of(r: TGD, parent: Atom, child: Atom) -> bool:
    m = first_solution(r.body, Instance([parent]).index, {})
    if m is None:
        return False
    return first_solution(r.head, Instance([child]).index, {v: m[v] for v in r.frontier}) is not None


def river_witness_db(s: ConwaySpec, k: RiverSpec, short_segments: bool = True) -> Database:
    """The database guessing River_kappa: its query facts without Encounter, the Start fact and the S_R facts."""
    der = river_derivation(s, k, short_segments)
    proj = proj_rules(s)
    facts: set = set()
    for r, parent, child in der.steps:
        facts |= {f for f in project(child, proj) if f.rel != "Encounter"}
        if parent is None:
            facts.add(child)
            continue
        m = first_solution(r.body, Instance([parent]).index, {})
        h = first_solution(r.head, Instance([child]).index, m)
        facts.add(_a(_s_name(r), *[h[v] for v in _s_vars(r)]))
    return Database(facts)
