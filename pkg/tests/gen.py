"""Random generators and brute-force oracles shared by the tests."""

from itertools import product

from tgdconserve.model import TGD, Atom, Instance, Null, atom_vars, restrict, schema_names


def brute_hom(source, target, sigma=None, db_preserving=True, pins=None):
    """Exhaustive search over all maps adom(source) -> adom(target)."""
    names = schema_names(sigma)
    src = restrict(source, names)
    tgt = restrict(target, names).facts
    consts = sorted(src.adom, key=str)
    dom = sorted(target.adom, key=str)
    for img in product(dom, repeat=len(consts)):
        h = dict(zip(consts, img))
        if pins and any(h.get(k, v) != v for k, v in pins.items()):
            continue
        if db_preserving and any(not isinstance(c, Null) and h[c] != c for c in consts):
            continue
        if all(Atom(f.rel, tuple(h[a] for a in f.args)) in tgt for f in src.facts):
            return h
    return None


def is_model(inst, rules) -> bool:
    """Every body match extends to a head match (checked by brute force)."""
    dom = sorted(inst.adom, key=str)
    for r in rules:
        bv = atom_vars(r.body)
        ex = r.existentials
        for img in product(dom, repeat=len(bv)):
            m = dict(zip(bv, img))
            if not all(Atom(a.rel, tuple(m[v] for v in a.args)) in inst.facts for a in r.body):
                continue
            ok = False
            for eimg in product(dom, repeat=len(ex)):
                m2 = {**m, **dict(zip(ex, eimg))}
                if all(Atom(a.rel, tuple(m2[v] for v in a.args)) in inst.facts for a in r.head):
                    ok = True
                    break
            if not ok:
                return False
    return True


def rand_schema(rng, names="PQS", max_arity=3):
    k = rng.randint(1, len(names))
    return {n: rng.randint(1, max_arity) for n in names[:k]}


def rand_linear_rules(rng, rels, max_rules=5, empty_body=0.1):
    names = list(rels)
    rules = []
    for _ in range(rng.randint(1, max_rules)):
        if rng.random() < empty_body:
            body, bv = (), []
        else:
            r = rng.choice(names)
            ar = rels[r]
            vs = [f"x{rng.randint(0, ar - 1)}" for _ in range(ar)]
            body, bv = (Atom(r, tuple(vs)),), sorted(set(vs))
        ex = [f"z{i}" for i in range(rng.randint(0, 2))]
        pool = bv + ex or ["z0"]
        head = []
        for _ in range(rng.randint(1, 2)):
            r = rng.choice(names)
            head.append(Atom(r, tuple(rng.choice(pool) for _ in range(rels[r]))))
        rules.append(TGD(body, tuple(head)))
    return rules


def rand_frontier_one_rules(rng, rels, max_rules=4):
    """Rules with one frontier variable and connected bodies of one or two atoms."""
    names = list(rels)
    rules = []
    while len(rules) < rng.randint(1, max_rules):
        body = []
        pool = ["x0", "x1", "x2"]
        for _ in range(rng.randint(1, 2)):
            r = rng.choice(names)
            body.append(Atom(r, tuple(rng.choice(pool) for _ in range(rels[r]))))
        if len(body) == 2 and not set(body[0].args) & set(body[1].args):
            continue
        bv = atom_vars(body)
        fv = rng.choice(bv)
        ex = [f"z{i}" for i in range(rng.randint(0, 2))]
        hpool = [fv] + ex
        head = []
        for _ in range(rng.randint(1, 2)):
            r = rng.choice(names)
            head.append(Atom(r, tuple(rng.choice(hpool) for _ in range(rels[r]))))
        t = TGD(tuple(body), tuple(head))
        if t.is_frontier_one:
            rules.append(t)
    return rules


def rand_instance(rng, rels, n_consts, n_facts, nulls=False):
    consts = [Null(i) if nulls else f"c{i}" for i in range(n_consts)]
    names = list(rels)
    return Instance(
        Atom(r, tuple(rng.choice(consts) for _ in range(rels[r])))
        for r in (rng.choice(names) for _ in range(n_facts))
    )
