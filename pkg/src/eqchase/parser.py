"""Concrete syntax.

    % comments run to end of line
    A(X) -> exists W . R(X,W), B(W) .      rule with an existential head
    R(X,Y), R(X,Z) -> Y = Z .              rule equating two body variables
    A(a) .                                 fact (bare ground atom)
    ? exists X, Y . R(X,Y), B(Y) .         query

Predicates and constants are lowercase identifiers, variables start with
an uppercase letter.  The predicate name `eq` is reserved for the binary
predicate the equality axiomatisations introduce; a file may use it in
rule bodies, heads and queries, which lets axiomatised output round-trip
through the parser.

Parsing is total: any input yields either a Program or a ParseError
carrying positioned diagnostics, never a crash.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .model import (
    EQ,
    EGD,
    RESERVED_EQ_NAME,
    TGD,
    Atom,
    BCQ,
    Constant,
    Predicate,
    Rule,
    RuleSet,
    Variable,
)


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass
class Program:
    rules: RuleSet
    facts: tuple[Atom, ...]
    queries: tuple[BCQ, ...]
    rule_locations: tuple[tuple[int, int], ...] = ()
    fact_locations: tuple[tuple[int, int], ...] = ()
    query_locations: tuple[tuple[int, int], ...] = ()

    def merge(self, other: "Program") -> "Program":
        return Program(
            RuleSet(list(self.rules) + list(other.rules)),
            self.facts + other.facts,
            self.queries + other.queries,
            self.rule_locations + other.rule_locations,
            self.fact_locations + other.fact_locations,
            self.query_locations + other.query_locations,
        )


# ---------------------------------------------------------------------------
# Lexer

_PUNCT = {"(": "LPAREN", ")": "RPAREN", ",": "COMMA", ".": "DOT", "=": "EQUALS", "?": "QMARK"}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _lex(text: str) -> tuple[list[_Token], list[Diagnostic]]:
    tokens: list[_Token] = []
    diags: list[Diagnostic] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "-" and i + 1 < n and text[i + 1] == ">":
            tokens.append(_Token("ARROW", "->", line, col))
            i += 2
            col += 2
            continue
        if c in _PUNCT:
            tokens.append(_Token(_PUNCT[c], c, line, col))
            i += 1
            col += 1
            continue
        if c.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word == "exists":
                tokens.append(_Token("EXISTS", word, line, col))
            elif word[0].isupper():
                tokens.append(_Token("UIDENT", word, line, col))
            else:
                tokens.append(_Token("LIDENT", word, line, col))
            col += j - i
            i = j
            continue
        diags.append(Diagnostic(line, col, f"unexpected character {c!r}"))
        i += 1
        col += 1
    tokens.append(_Token("EOF", "", line, col))
    return tokens, diags


# ---------------------------------------------------------------------------
# Parser

# Raw syntax nodes carry names only; predicates are resolved afterwards so
# arity mismatches can be reported with their locations.


@dataclass
class _RawAtom:
    name: str
    args: list[tuple[str, str]]  # (kind, name), kind in {"const", "var"}
    line: int
    col: int


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.diags: list[Diagnostic] = []

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def error(self, tok: _Token, message: str) -> None:
        self.diags.append(Diagnostic(tok.line, tok.col, message))

    def recover(self) -> None:
        # Skip to just past the next statement terminator.
        while True:
            t = self.next()
            if t.kind in ("DOT", "EOF"):
                return

    def expect(self, kind: str, what: str) -> Optional[_Token]:
        t = self.peek()
        if t.kind == kind:
            return self.next()
        self.error(t, f"expected {what}, found {t.text!r}" if t.text else f"expected {what}")
        return None

    def parse_atom(self) -> Optional[_RawAtom]:
        # A predicate is any identifier directly followed by '('; case only
        # disambiguates term positions (lowercase constant, uppercase
        # variable), so the usual uppercase predicate names parse fine.
        name_tok = self.peek()
        if name_tok.kind not in ("LIDENT", "UIDENT"):
            self.error(name_tok, "expected a predicate name")
            return None
        self.next()
        if self.expect("LPAREN", "'('") is None:
            return None
        args: list[tuple[str, str]] = []
        while True:
            t = self.peek()
            if t.kind == "LIDENT":
                args.append(("const", t.text))
                self.next()
            elif t.kind == "UIDENT":
                args.append(("var", t.text))
                self.next()
            else:
                self.error(t, "expected a constant or variable")
                return None
            t = self.peek()
            if t.kind == "COMMA":
                self.next()
                continue
            break
        if self.expect("RPAREN", "')'") is None:
            return None
        return _RawAtom(name_tok.text, args, name_tok.line, name_tok.col)

    def parse_conjunction(self) -> Optional[list[_RawAtom]]:
        atoms = []
        while True:
            atom = self.parse_atom()
            if atom is None:
                return None
            atoms.append(atom)
            if self.peek().kind == "COMMA":
                self.next()
                continue
            return atoms

    def parse_varlist(self) -> Optional[list[_Token]]:
        out = []
        while True:
            t = self.expect("UIDENT", "a variable")
            if t is None:
                return None
            out.append(t)
            if self.peek().kind == "COMMA":
                self.next()
                continue
            return out

    def parse_statement(self):
        """Returns ("rule" | "fact" | "query", payload, line, col) or None."""
        t = self.peek()
        if t.kind == "QMARK":
            self.next()
            exists: Optional[list[_Token]] = None
            if self.peek().kind == "EXISTS":
                self.next()
                exists = self.parse_varlist()
                if exists is None or self.expect("DOT", "'.'") is None:
                    return None
            body = self.parse_conjunction()
            if body is None or self.expect("DOT", "'.'") is None:
                return None
            return ("query", (exists, body), t.line, t.col)

        body = self.parse_conjunction()
        if body is None:
            return None
        t2 = self.peek()
        if t2.kind == "DOT":
            self.next()
            if len(body) != 1:
                self.error(t2, "a fact statement holds exactly one atom")
                return None
            return ("fact", body[0], body[0].line, body[0].col)
        if t2.kind != "ARROW":
            self.error(t2, "expected '->' or '.'")
            return None
        self.next()
        t3 = self.peek()
        if t3.kind == "EXISTS":
            self.next()
            exists = self.parse_varlist()
            if exists is None or self.expect("DOT", "'.'") is None:
                return None
            head = self.parse_conjunction()
            if head is None or self.expect("DOT", "'.'") is None:
                return None
            return ("rule", ("tgd", body, exists, head), body[0].line, body[0].col)
        if t3.kind == "UIDENT" and self.tokens[self.pos + 1].kind == "EQUALS":
            x = self.next()
            self.next()  # '='
            y = self.expect("UIDENT", "a variable")
            if y is None or self.expect("DOT", "'.'") is None:
                return None
            return ("rule", ("egd", body, x, y), body[0].line, body[0].col)
        head = self.parse_conjunction()
        if head is None or self.expect("DOT", "'.'") is None:
            return None
        return ("rule", ("tgd", body, None, head), body[0].line, body[0].col)

    def parse_program(self) -> list:
        statements = []
        while self.peek().kind != "EOF":
            if self.peek().kind == "DOT":  # stray terminator
                self.error(self.peek(), "empty statement")
                self.next()
                continue
            st = self.parse_statement()
            if st is None:
                self.recover()
                continue
            statements.append(st)
        return statements


# ---------------------------------------------------------------------------
# Semantic construction


class _Builder:
    def __init__(self):
        self.arities: dict[str, tuple[int, int, int]] = {}  # name -> (arity, line, col)
        self.diags: list[Diagnostic] = []

    def predicate(self, raw: _RawAtom) -> Optional[Predicate]:
        arity = len(raw.args)
        if raw.name == RESERVED_EQ_NAME:
            if arity != 2:
                self.diags.append(
                    Diagnostic(raw.line, raw.col, f"{RESERVED_EQ_NAME!r} is the reserved equality predicate and must be binary")
                )
                return None
            return EQ
        seen = self.arities.get(raw.name)
        if seen is None:
            self.arities[raw.name] = (arity, raw.line, raw.col)
        elif seen[0] != arity:
            self.diags.append(
                Diagnostic(
                    raw.line,
                    raw.col,
                    f"predicate {raw.name!r} used with arity {arity}, but line {seen[1]} uses arity {seen[0]}",
                )
            )
            return None
        return Predicate(raw.name, arity)

    def atom(self, raw: _RawAtom) -> Optional[Atom]:
        p = self.predicate(raw)
        if p is None:
            return None
        args = [Constant(n) if k == "const" else Variable(n) for k, n in raw.args]
        return Atom(p, args)


def parse(text: str) -> Program:
    """Parse a program; raises ParseError with every diagnostic found."""
    tokens, diags = _lex(text)
    parser = _Parser(tokens)
    statements = parser.parse_program()
    diags.extend(parser.diags)

    builder = _Builder()
    rules: list[Rule] = []
    facts: list[Atom] = []
    queries: list[BCQ] = []
    rule_locs: list[tuple[int, int]] = []
    fact_locs: list[tuple[int, int]] = []
    query_locs: list[tuple[int, int]] = []

    for kind, payload, line, col in statements:
        if kind == "fact":
            atom = builder.atom(payload)
            if atom is not None:
                facts.append(atom)
                fact_locs.append((line, col))
        elif kind == "rule":
            shape = payload[0]
            body = [builder.atom(r) for r in payload[1]]
            if any(a is None for a in body):
                continue
            if shape == "tgd":
                _, _, exists, raw_head = payload
                head = [builder.atom(r) for r in raw_head]
                if any(a is None for a in head):
                    continue
                ex_vars = tuple(Variable(t.text) for t in exists) if exists else ()
                rules.append(TGD(body, ex_vars, head))
            else:
                _, _, x, y = payload
                rules.append(EGD(body, Variable(x.text), Variable(y.text)))
            rule_locs.append((line, col))
        else:
            exists, raw_body = payload
            body = [builder.atom(r) for r in raw_body]
            if any(a is None for a in body):
                continue
            if exists is not None:
                variables = tuple(Variable(t.text) for t in exists)
            else:
                seen: dict[Variable, None] = {}
                for a in body:
                    for v in a.variables():
                        seen.setdefault(v, None)
                variables = tuple(seen)
            queries.append(BCQ(variables, body))
            query_locs.append((line, col))

    diags.extend(builder.diags)
    if diags:
        raise ParseError(diags)
    return Program(
        RuleSet(rules),
        tuple(facts),
        tuple(queries),
        tuple(rule_locs),
        tuple(fact_locs),
        tuple(query_locs),
    )


# ---------------------------------------------------------------------------
# Serialisation


def serialize_rule(rule: Rule) -> str:
    body = ", ".join(str(a) for a in rule.body)
    if type(rule) is EGD:
        return f"{body} -> {rule.x.name} = {rule.y.name} ."
    if rule.existentials:
        ex = "exists " + ", ".join(v.name for v in rule.existentials) + " . "
    else:
        ex = ""
    head = ", ".join(str(a) for a in rule.head)
    return f"{body} -> {ex}{head} ."


def serialize_query(query: BCQ) -> str:
    ex = ""
    if query.variables:
        ex = "exists " + ", ".join(v.name for v in query.variables) + " . "
    body = ", ".join(str(a) for a in query.body)
    return f"? {ex}{body} ."


def serialize(program: Program) -> str:
    lines = [serialize_rule(r) for r in program.rules]
    lines.extend(f"{fact} ." for fact in program.facts)
    lines.extend(serialize_query(q) for q in program.queries)
    return "\n".join(lines) + ("\n" if lines else "")
