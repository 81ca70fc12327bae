"""Text formats for rules, databases, instances and CQs, plus verdict JSON.

Grammar::

    statement := (rule | fact | query) "."
    rule      := [atomlist] "->" ["exists" varlist "."] atomlist
    query     := NAME "(" [varlist] ")" ":-" atomlist
    atom      := NAME "(" termlist ")"

``#`` starts a comment that runs to the end of the line. In rule files every
identifier is a variable; in database files every identifier is a named
constant. Instance files may additionally use ``_n<k>`` for nulls.
"""

from __future__ import annotations

import re
from enum import Enum
from typing import Iterable, NamedTuple

from .model import (
    TRUE,
    CQ,
    TGD,
    Atom,
    Database,
    Instance,
    ModelError,
    Null,
    fact_key,
    true_cq,
)
from .verdict import Verdict

RESERVED_VARIABLES = frozenset({"x", "y", "z", "u", "v", "w"})


class SourceSpan(NamedTuple):
    line: int
    column: int
    length: int

    def __str__(self):
        return f"{self.line}:{self.column}"


class ErrorKind(str, Enum):
    LEX = "LEX"
    SYNTAX = "SYNTAX"
    ARITY_MISMATCH = "ARITY_MISMATCH"
    UNBOUND_FRONTIER = "UNBOUND_FRONTIER"


class ParseError(ValueError):
    def __init__(self, span: SourceSpan, message: str, kind: ErrorKind):
        super().__init__(f"{span}: {kind.value}: {message}")
        self.span = span
        self.message = message
        self.kind = kind


class Token(NamedTuple):
    kind: str
    text: str
    span: SourceSpan


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<arrow>->)|(?P<cdash>:-)"
    r"|(?P<ident>[A-Za-z0-9_][A-Za-z0-9_']*)|(?P<punct>[(),.])"
)
_NULL_RE = re.compile(r"_n(\d+)$")


def tokenize(text: str) -> list[Token]:
    toks = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(SourceSpan(line, col, 1), f"unexpected character {text[pos]!r}", ErrorKind.LEX)
        kind, s = m.lastgroup, m.group()
        if kind not in ("ws", "comment"):
            toks.append(Token(s if kind == "punct" else kind, s, SourceSpan(line, col, len(s))))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    toks.append(Token("eof", "", SourceSpan(line, col, 1)))
    return toks


class _Parser:
    def __init__(self, text: str, arities: dict | None):
        self.toks = tokenize(text)
        self.i = 0
        self.arities = {} if arities is None else arities

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, kind=ErrorKind.SYNTAX, tok: Token | None = None):
        t = tok or self.tok
        return ParseError(t.span, msg, kind)

    def expect(self, kind: str) -> Token:
        t = self.tok
        if t.kind != kind:
            shown = t.text or "end of input"
            raise self.error(f"expected {kind!r}, found {shown!r}")
        self.i += 1
        return t

    def at_end(self) -> bool:
        return self.tok.kind == "eof"

    def atom(self, term) -> tuple[Atom, Token]:
        name = self.expect("ident")
        if not name.text[0].isalpha():
            raise self.error("relation names must start with a letter", tok=name)
        self.expect("(")
        args = [term(self.expect("ident"))]
        while self.tok.kind == ",":
            self.i += 1
            args.append(term(self.expect("ident")))
        self.expect(")")
        return Atom(name.text, tuple(args)), name

    def check_arity(self, a: Atom, tok: Token):
        known = self.arities.get(a.rel)
        if known is None:
            self.arities[a.rel] = len(a.args)
        elif known != len(a.args):
            raise self.error(
                f"relation {a.rel} used with arity {len(a.args)}, previously {known}",
                ErrorKind.ARITY_MISMATCH,
                tok,
            )

    def atomlist(self, term, allow_true=False) -> list[Atom]:
        out = []
        while True:
            a, tok = self.atom(term)
            if a.rel == TRUE and not allow_true:
                raise self.error("the relation name 'true' is reserved", tok=tok)
            if a.rel != TRUE:
                self.check_arity(a, tok)
            out.append(a)
            if self.tok.kind != ",":
                return out
            self.i += 1

    def varlist(self) -> list[Token]:
        out = [self.expect("ident")]
        while self.tok.kind == ",":
            self.i += 1
            out.append(self.expect("ident"))
        return out


def _var(tok: Token) -> str:
    return tok.text


def parse_rules(text: str, arities: dict | None = None) -> list[TGD]:
    """Parse a rule file. Rules keep their file order (it fixes the chase order)."""
    p = _Parser(text, arities)
    rules = []
    while not p.at_end():
        start = p.tok
        body = [] if p.tok.kind == "arrow" else p.atomlist(_var)
        p.expect("arrow")
        declared = None
        if p.tok.kind == "ident" and p.tok.text == "exists" and p.peek().kind == "ident":
            p.i += 1
            declared = p.varlist()
            p.expect(".")
        head_start = p.tok
        head = p.atomlist(_var)
        p.expect(".")
        body_vars = {v for a in body for v in a.args}
        head_vars = [v for a in head for v in a.args]
        if declared is not None:
            names = [t.text for t in declared]
            for t in declared:
                if t.text in body_vars:
                    raise ParseError(t.span, f"existential variable {t.text} also occurs in the body", ErrorKind.SYNTAX)
            for v in head_vars:
                if v not in body_vars and v not in names:
                    raise ParseError(
                        head_start.span, f"head variable {v} is neither in the body nor existential",
                        ErrorKind.UNBOUND_FRONTIER,
                    )
        try:
            rules.append(TGD(tuple(body), tuple(head), label=f"r{len(rules)}"))
        except ModelError as e:
            raise ParseError(start.span, str(e), ErrorKind.SYNTAX) from None
    return rules


def _ground_term(allow_nulls: bool):
    def term(tok: Token):
        m = _NULL_RE.match(tok.text)
        if m:
            if not allow_nulls:
                raise ParseError(tok.span, f"null {tok.text} not allowed in a database", ErrorKind.SYNTAX)
            return Null(int(m.group(1)))
        if tok.text in RESERVED_VARIABLES:
            raise ParseError(tok.span, f"{tok.text!r} looks like a variable; databases are ground", ErrorKind.SYNTAX)
        return tok.text

    return term


def _parse_facts(text: str, arities, allow_nulls: bool) -> list[Atom]:
    p = _Parser(text, arities)
    term = _ground_term(allow_nulls)
    facts = []
    while not p.at_end():
        a, tok = p.atom(term)
        if a.rel == TRUE:
            raise p.error("the relation name 'true' is reserved", tok=tok)
        p.check_arity(a, tok)
        p.expect(".")
        facts.append(a)
    return facts


def parse_database(text: str, arities: dict | None = None) -> Database:
    return Database(_parse_facts(text, arities, allow_nulls=False))


def parse_instance(text: str, arities: dict | None = None) -> Instance:
    return Instance(_parse_facts(text, arities, allow_nulls=True))


def _parse_one_cq(p: _Parser, allow_true: bool) -> CQ:
    p.expect("ident")
    p.expect("(")
    answer = [] if p.tok.kind == ")" else p.varlist()
    p.expect(")")
    p.expect("cdash")
    atoms = p.atomlist(_var, allow_true=allow_true)
    p.expect(".")
    names = [t.text for t in answer]
    trues = [a for a in atoms if a.rel == TRUE]
    if trues:
        if len(atoms) != 1 or len(names) != 1 or trues[0].args != (names[0],):
            raise p.error("true(x) may only appear alone, on the answer variable")
        return true_cq(names[0])
    body_vars = {v for a in atoms for v in a.args}
    for t in answer:
        if t.text not in body_vars:
            raise ParseError(t.span, f"answer variable {t.text} does not occur in the body", ErrorKind.UNBOUND_FRONTIER)
    try:
        return CQ(tuple(names), tuple(atoms))
    except ModelError as e:
        raise ParseError(answer[0].span if answer else p.tok.span, str(e), ErrorKind.SYNTAX) from None


def parse_cq(text: str, arities: dict | None = None, allow_true: bool = False) -> CQ:
    p = _Parser(text, arities)
    q = _parse_one_cq(p, allow_true)
    if not p.at_end():
        raise p.error("expected a single query")
    return q


def parse_cqs(text: str, arities: dict | None = None, allow_true: bool = True) -> list[CQ]:
    p = _Parser(text, arities)
    out = []
    while not p.at_end():
        out.append(_parse_one_cq(p, allow_true))
    return out


def parse_schema(text: str, arities: dict | None = None) -> list[str]:
    """Parse ``R/2,A,S/3``. Arity is optional when already known."""
    names = []
    for part in filter(None, (s.strip() for s in text.split(","))):
        name, _, ar = part.partition("/")
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_']*", name):
            raise ParseError(SourceSpan(1, 1, max(1, len(part))), f"bad relation name {name!r}", ErrorKind.SYNTAX)
        if ar:
            if not ar.isdigit() or int(ar) < 1:
                raise ParseError(SourceSpan(1, 1, len(part)), f"bad arity in {part!r}", ErrorKind.SYNTAX)
            if arities is not None:
                known = arities.setdefault(name, int(ar))
                if known != int(ar):
                    raise ParseError(
                        SourceSpan(1, 1, len(part)), f"relation {name} has arity {known}", ErrorKind.ARITY_MISMATCH
                    )
        names.append(name)
    return names


def format_atoms(atoms: Iterable[Atom]) -> str:
    return ", ".join(str(a) for a in atoms)


def format_rule(r: TGD) -> str:
    ex = r.existentials
    head = (f"exists {','.join(ex)}. " if ex else "") + format_atoms(r.head)
    body = format_atoms(r.body)
    return f"{body} -> {head}." if body else f"-> {head}."


def format_rules(rules: Iterable[TGD]) -> str:
    return "".join(format_rule(r) + "\n" for r in rules)


def format_instance(inst: Instance | Iterable[Atom]) -> str:
    facts = inst.sorted_facts() if isinstance(inst, Instance) else sorted(inst, key=fact_key)
    return "".join(f"{f}.\n" for f in facts)


format_database = format_instance


def format_cq(q: CQ) -> str:
    return f"{q}."


def emit_verdict(v: Verdict) -> str:
    return v.to_json()
