"""Command-line front end.

Exit codes: 0 HOLDS (or plain success), 1 FAILS, 2 UNKNOWN, 64 usage error,
65 parse error. With --json every verdict is printed as one line of
sorted-key JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .chase import Budget, chase
from .hom import cq_entailed, find_hom, hom_exists_n, infinite_chain_hom
from .model import Atom, Instance, ModelError
from .textio import (
    ParseError,
    format_instance,
    format_rules,
    parse_cq,
    parse_cqs,
    parse_database,
    parse_instance,
    parse_rules,
    parse_schema,
)
from .verdict import Value, Verdict, facts_json, mapping_json

EX_USAGE = 64
EX_DATAERR = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EX_USAGE)


class _Input:
    """Reads input files, keeping the file name for error messages."""

    def __init__(self):
        self.arities: dict = {}

    def text(self, path: str) -> tuple[str, str]:
        p = Path(path)
        if not p.is_file():
            raise UsageError(f"cannot read {path}")
        return path, p.read_text()

    def _parse(self, path, fn, *args, **kw):
        name, text = self.text(path)
        try:
            return fn(text, *args, **kw)
        except ParseError as e:
            e.file = name
            raise

    def rules(self, path):
        return self._parse(path, parse_rules, self.arities)

    def database(self, path):
        return self._parse(path, parse_database, self.arities)

    def instance(self, path):
        return self._parse(path, parse_instance, self.arities)

    def cq(self, path_or_text, inline: bool):
        if inline:
            text = path_or_text.strip()
            return parse_cq(text if text.endswith(".") else text + ".", self.arities, allow_true=True)
        return self._parse(path_or_text, parse_cq, self.arities, allow_true=True)

    def schema(self, text: str | None) -> dict | None:
        if text is None:
            return None
        try:
            names = parse_schema(text, self.arities)
        except ParseError as e:
            e.file = "<schema>"
            raise
        out = {}
        for n in names:
            if n not in self.arities:
                raise UsageError(f"relation {n} does not occur in the inputs; give its arity as {n}/k")
            out[n] = self.arities[n]
        return out


def _budget(args) -> Budget:
    return Budget(
        max_depth=args.depth,
        max_facts=args.facts,
        max_candidates=args.candidates,
        max_db_size=args.db_size,
        hom_n=args.hom_n,
    )


def _emit(args, v: Verdict) -> int:
    if args.json:
        print(v.to_json())
    else:
        print(f"verdict: {v.value.value}")
        print("budget: " + json.dumps(v.budget, sort_keys=True))
        if v.certificate is not None:
            print("certificate: " + json.dumps(v.certificate, sort_keys=True, indent=2))
    return v.exit_code


def _verify(args, ctx: dict, recompute=None) -> int:
    from .verify import verify_certificate

    _, text = _Input().text(args.verify_certificate)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        print(f"{args.verify_certificate}:{e.lineno}:{e.colno}: SYNTAX: {e.msg}", file=sys.stderr)
        return EX_DATAERR
    cert = data.get("certificate") if "verdict" in data else data
    if not cert:
        raise UsageError("the file holds no certificate")
    ok, method = verify_certificate(cert, ctx, recompute)
    out = {"kind": cert.get("kind"), "method": method, "verified": ok}
    print(json.dumps(out, sort_keys=True, separators=(",", ":")) if args.json else f"verified: {str(ok).lower()} ({method})")
    return 0 if ok else 1


def _same(cert, fresh: Verdict) -> bool:
    return fresh.certificate == cert


# --- subcommands ----------------------------------------------------------


def cmd_chase(args, inp: _Input) -> int:
    rules = inp.rules(args.rules)
    db = inp.instance(args.db)
    res = chase(db, rules, _budget(args))
    levels = res.level_facts()
    if args.json:
        out = {
            "budget": _budget(args).echo(),
            "levels": [facts_json(fs) for fs in levels],
            "rounds": res.rounds,
            "saturated": res.saturated,
        }
        print(json.dumps(out, sort_keys=True, separators=(",", ":")))
    else:
        for i, fs in enumerate(levels):
            print(f"# level {i}")
            sys.stdout.write(format_instance(fs))
        print(f"# rounds {res.rounds}, saturated {str(res.saturated).lower()}, {len(res.instance)} facts")
    return 0


def cmd_eval(args, inp: _Input) -> int:
    rules = inp.rules(args.rules)
    db = inp.instance(args.db)
    q = inp.cq(args.query, inline=not Path(args.query).is_file())
    tup = tuple(t for t in (args.tuple or "").split(",") if t)
    if len(tup) != q.arity:
        raise UsageError(f"the query has arity {q.arity} but --tuple gives {len(tup)} constants")
    b = _budget(args)
    if args.verify_certificate:
        return _verify(args, {"db": db, "rules": rules, "budget": b})
    return _emit(args, cq_entailed(db, rules, q, tup, b))


def _hom_verdict(src, tgt, sigma, n, dbp, cands) -> Verdict:
    if n is not None:
        return hom_exists_n(src, tgt, sigma, n, dbp, cands)
    h = find_hom(src, tgt, sigma, db_preserving=dbp, max_candidates=cands)
    echo = {"candidates": cands} if cands else {}
    if h is None:
        return Verdict(Value.FAILS, {"kind": "no-hom"}, echo)
    return Verdict(Value.HOLDS, {"kind": "hom", "homomorphism": mapping_json(h.mapping)}, echo, witness=h)


def cmd_check_hom(args, inp: _Input) -> int:
    src = inp.instance(args.source)
    tgt = inp.instance(args.target)
    sigma = inp.schema(args.schema)
    dbp = not args.no_db_preserving
    if args.verify_certificate:
        ctx = {"source": src, "target": tgt, "sigma": sigma, "db_preserving": dbp}
        return _verify(args, ctx)
    return _emit(args, _hom_verdict(src, tgt, sigma, args.n, dbp, args.candidates))


def cmd_check_triviality(args, inp: _Input) -> int:
    from .linear import check_triviality

    rules = inp.rules(args.rules)
    sd = inp.schema(args.data_schema)
    sq = inp.schema(args.query_schema)
    if not all(r.is_linear for r in rules):
        raise UsageError("check-triviality needs linear rules")

    def run():
        v = check_triviality(rules, sd, sq, args.max_states)
        v.budget.update(_budget(args).echo())
        return v

    if args.verify_certificate:
        return _verify(args, {"rules": rules, "depth": args.depth}, lambda c: _same(c, run()))
    return _emit(args, run())


def _conservativity(args, inp: _Input, fn) -> int:
    t1 = inp.rules(args.t1)
    t2 = inp.rules(args.t2)
    sd = inp.schema(args.data_schema)
    sq = inp.schema(args.query_schema)
    b = _budget(args)
    if args.verify_certificate:
        return _verify(args, {"t1": t1, "t2": t2, "budget": b}, lambda c: _same(c, fn(t1, t2, sd, sq, b)))
    return _emit(args, fn(t1, t2, sd, sq, b))


def cmd_check_hom_conservative(args, inp: _Input) -> int:
    import warnings

    from .frontier import check_hom_conservative

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return _conservativity(args, inp, check_hom_conservative)


def cmd_check_cq_conservative(args, inp: _Input) -> int:
    from .frontier import check_cq_conservative

    return _conservativity(args, inp, check_cq_conservative)


def load_tree(path: str, inp: _Input):
    """Tree files are JSON: nodes, edges, bags (fact text per node), types (CQ text per constant), t_hat."""
    from .frontier import LabeledInstanceTree, TType

    name, text = inp.text(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError_from_json(name, e) from None
    bags = {}
    for v, facts in data["bags"].items():
        if facts.strip().startswith("true("):
            c = facts.strip()[5:].rstrip(".").rstrip(")")
            bags[v] = Instance([Atom("true", (c,))])
        else:
            bags[v] = parse_database(facts, inp.arities)
    types = {c: TType.of(parse_cqs(t, inp.arities)) for c, t in data["types"].items()}
    tree = LabeledInstanceTree(list(data["nodes"]), [tuple(e) for e in data["edges"]], bags, types)
    t_hat = TType.of(parse_cqs(data["t_hat"], inp.arities))
    return tree, t_hat


def ParseError_from_json(name, e):
    from .textio import ErrorKind, SourceSpan

    err = ParseError(SourceSpan(e.lineno, e.colno, 1), e.msg, ErrorKind.SYNTAX)
    err.file = name
    return err


def cmd_validate_tree(args, inp: _Input) -> int:
    from .frontier import MalformedTree, validate_proper_tree

    rules = inp.rules(args.rules)
    tree, t_hat = load_tree(args.tree, inp)
    sigma = inp.schema(args.schema)
    try:
        v = validate_proper_tree(tree, t_hat, rules, _budget(args), sigma)
    except MalformedTree as e:
        v = Verdict(Value.FAILS, {"kind": "malformed-tree", "node": str(e.node), "reason": e.reason}, _budget(args).echo())
    return _emit(args, v)


def cmd_gen_conway_suite(args, inp: _Input) -> int:
    from .conway import (
        QUERY_SCHEMA,
        ConwaySpec,
        gen_guarded_T0,
        gen_T1,
        gen_T2,
        locally_correct_rivers,
        myth_chain_spec,
        myth_rules,
        has_defect,
        river_build,
        river_correctness,
    )

    try:
        alpha = [int(x) for x in args.alpha.split(",")]
        beta = [int(x) for x in args.beta.split(",")]
    except ValueError:
        raise UsageError("--alpha and --beta take comma-separated integers") from None
    s = ConwaySpec(args.gamma, alpha, beta)
    reduction = s(2) == 3 and s(1) == 1
    out = Path(args.out)
    (out / "rivers").mkdir(parents=True, exist_ok=True)
    (out / "myth.tgd").write_text(format_rules(myth_rules()))
    files = ["myth.tgd"]
    if reduction:
        s = ConwaySpec(args.gamma, alpha, beta, reduction=True)
        t0, sd, sq = gen_guarded_T0(s)
        for name, rules in (("t1.tgd", gen_T1(s)), ("t2.tgd", gen_T2(s)), ("t0.tgd", t0)):
            (out / name).write_text(format_rules(rules))
            files.append(name)
    rivers = []
    for i, k in enumerate(locally_correct_rivers(s, args.max_n, args.max_val)):
        fname = f"rivers/river_{i:04d}.db"
        (out / fname).write_text(format_instance(river_build(k)))
        chk = river_correctness(k, s)
        hom = infinite_chain_hom(myth_chain_spec(k), river_build(k), QUERY_SCHEMA)
        rivers.append(
            {
                "file": fname,
                "p": list(k.p),
                "t": list(k.t),
                "locally_correct": chk.locally_correct,
                "correct": chk.correct,
                "has_defect": has_defect(k),
                "chain_hom": hom.value.value,
            }
        )
    manifest = {
        "spec": {"gamma": s.gamma, "alpha": list(s.alpha), "beta": list(s.beta), "reduction": reduction},
        "files": files,
        "rivers": rivers,
    }
    text = json.dumps(manifest, sort_keys=True, indent=1) + "\n"
    (out / "manifest.json").write_text(text)
    if args.json:
        print(json.dumps(manifest, sort_keys=True, separators=(",", ":")))
    else:
        print(f"wrote {len(rivers)} rivers and {len(files)} rule files to {out}")
    return 0


# --- argument parsing -----------------------------------------------------


def _add_budget(p, depth=True):
    p.add_argument("--depth", type=int, default=6, help="chase rounds (default 6)")
    p.add_argument("--facts", type=int, default=100_000, help="fact cap per chase")
    p.add_argument("--candidates", type=int, default=0, help="cap on search candidates (0 = none)")
    p.add_argument("--db-size", type=int, default=2, help="facts and constants of candidate databases")
    p.add_argument("--hom-n", type=int, default=4, help="largest n for bounded homomorphism evidence")


def _common(p):
    p.add_argument("--json", action="store_true", help="print one line of JSON")
    p.add_argument("--verify-certificate", metavar="FILE", help="replay a certificate printed by this subcommand")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tgd-conserve", description="Chase, homomorphisms and conservativity checks for TGDs.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("chase", help="run the restricted chase and dump the levels")
    p.add_argument("--rules", required=True)
    p.add_argument("--db", required=True)
    _add_budget(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_chase)

    p = sub.add_parser("eval", help="bounded CQ entailment")
    p.add_argument("--rules", required=True)
    p.add_argument("--db", required=True)
    p.add_argument("--query", required=True, help="query file or inline text such as 'q(x) :- R(x,y)'")
    p.add_argument("--tuple", help="comma-separated answer constants")
    _add_budget(p)
    _common(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("check-hom", help="homomorphism or n-bounded homomorphism between instances")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--schema")
    p.add_argument("--n", type=int)
    p.add_argument("--no-db-preserving", action="store_true")
    p.add_argument("--candidates", type=int, default=0)
    _common(p)
    p.set_defaults(fn=cmd_check_hom)

    p = sub.add_parser("check-triviality", help="exact triviality for linear rules")
    p.add_argument("--rules", required=True)
    p.add_argument("--data-schema", required=True)
    p.add_argument("--query-schema", required=True)
    p.add_argument("--max-states", type=int, default=0)
    _add_budget(p)
    _common(p)
    p.set_defaults(fn=cmd_check_triviality)

    for name, fn in (("check-hom-conservative", cmd_check_hom_conservative), ("check-cq-conservative", cmd_check_cq_conservative)):
        p = sub.add_parser(name, help="bounded conservativity check of T2 over T1")
        p.add_argument("--t1", required=True)
        p.add_argument("--t2", required=True)
        p.add_argument("--data-schema", required=True)
        p.add_argument("--query-schema", required=True)
        _add_budget(p)
        _common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("validate-tree", help="check properness of a labelled instance tree")
    p.add_argument("--rules", required=True)
    p.add_argument("--tree", required=True, help="JSON file with nodes, edges, bags, types, t_hat")
    p.add_argument("--schema", help="relations kept when comparing bags with rule heads")
    _add_budget(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_validate_tree)

    p = sub.add_parser("gen-conway-suite", help="write rivers, rule files and a manifest for a Conway spec")
    p.add_argument("--gamma", type=int, required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-n", type=int, default=3)
    p.add_argument("--max-val", type=int, default=4)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_gen_conway_suite)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    for k in ("depth", "facts", "candidates", "db_size", "hom_n", "max_states", "n", "max_n", "max_val"):
        if getattr(args, k, 0) is not None and getattr(args, k, 0) < 0:
            print(f"tgd-conserve: error: --{k.replace('_', '-')} must be >= 0", file=sys.stderr)
            return EX_USAGE
    inp = _Input()
    try:
        return args.fn(args, inp)
    except ParseError as e:
        print(f"{getattr(e, 'file', '<input>')}:{e}", file=sys.stderr)
        return EX_DATAERR
    except UsageError as e:
        print(f"tgd-conserve: error: {e}", file=sys.stderr)
        return EX_USAGE
    except ModelError as e:
        print(f"tgd-conserve: error: {e}", file=sys.stderr)
        return EX_DATAERR


if __name__ == "__main__":
    sys.exit(main())
