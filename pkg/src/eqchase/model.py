"""Core vocabulary: terms, atoms, rules, ontologies, queries.

Everything here is an immutable value with structural equality, safe to
share across threads.  The module also provides the primitive operations
the rest of the engine is built on: the total term order used to direct
merges, cyclic-term detection, the two distinct substitution semantics
(argument-level term rewriting vs. syntactic variable substitution), and
skolemisation of existential heads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

# Predicate kinds.  Equality proper (written `x = y` in rule heads) never
# appears as a data atom; the reserved binary predicate `eq` is the ordinary
# stand-in used by the equality axiomatisations.
ORDINARY = "ordinary"
EQUALITY = "equality"
AXIOM_EQ = "axiom-eq"

RESERVED_EQ_NAME = "eq"


class Predicate:
    """A predicate symbol with a fixed arity and kind."""

    __slots__ = ("name", "arity", "kind", "_hash")

    def __init__(self, name: str, arity: int, kind: str = ORDINARY):
        if arity < 1:
            raise ValueError(f"predicate {name!r} must have arity >= 1")
        if kind not in (ORDINARY, EQUALITY, AXIOM_EQ):
            raise ValueError(f"unknown predicate kind {kind!r}")
        if kind in (EQUALITY, AXIOM_EQ) and arity != 2:
            raise ValueError(f"{kind} predicate must be binary")
        self.name = name
        self.arity = arity
        self.kind = kind
        self._hash = hash((name, arity, kind))

    def __eq__(self, other: object) -> bool:
        return self is other or (
            isinstance(other, Predicate)
            and self.name == other.name
            and self.arity == other.arity
            and self.kind == other.kind
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Predicate({self.name!r}/{self.arity})"


#: The reserved predicate used by axiomatisations in place of equality.
EQ = Predicate(RESERVED_EQ_NAME, 2, AXIOM_EQ)

#: Equality itself.  Only ever materialised as an atom when a caller
#: explicitly asks for a `* = *` critical-instance fact.
EQUALS = Predicate("≈", 2, EQUALITY)

_EMPTY_SYMS: frozenset = frozenset()


class SkolemSymbol:
    """A function symbol introduced for one existential variable.

    Identity is (name, arity); `origin` records which rule and variable
    the symbol was minted for, purely as metadata.  Because existential
    variable names never repeat across the rules of one rule set, naming
    the symbol after its variable keeps it unique within the set and
    stable across the equality-elimination transforms (which copy rules
    verbatim or leave their heads untouched).
    """

    __slots__ = ("name", "arity", "origin", "_hash")

    def __init__(self, name: str, arity: int, origin: tuple[str, str] = ("", "")):
        self.name = name
        self.arity = arity
        self.origin = origin
        self._hash = hash(("sk", name, arity))

    def __eq__(self, other: object) -> bool:
        return self is other or (
            isinstance(other, SkolemSymbol)
            and self.name == other.name
            and self.arity == other.arity
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"SkolemSymbol({self.name!r}/{self.arity})"


class Constant:
    __slots__ = ("name", "_hash")

    depth = 1
    has_var = False
    cyclic = False
    fn_symbols = _EMPTY_SYMS

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("c", name))

    def __eq__(self, other: object) -> bool:
        return self is other or (type(other) is Constant and other.name == self.name)

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"Constant({self.name!r})"

    @property
    def order_key(self):
        return (1, 0, self.name)


class Variable:
    __slots__ = ("name", "_hash")

    depth = 1
    has_var = True
    cyclic = False
    fn_symbols = _EMPTY_SYMS

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("v", name))

    def __eq__(self, other: object) -> bool:
        return self is other or (type(other) is Variable and other.name == self.name)

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"Variable({self.name!r})"

    @property
    def order_key(self):
        return (1, 1, self.name)


class Functional:
    """A term built from a Skolem symbol.  Depth, variable occurrence,
    the set of function symbols inside, and cyclicity are precomputed
    bottom-up so the hot paths can read them in O(1)."""

    __slots__ = ("fn", "args", "depth", "has_var", "cyclic", "fn_symbols",
                 "_hash", "_key")

    def __init__(self, fn: SkolemSymbol, args: Sequence["Term"]):
        args = tuple(args)
        if len(args) != fn.arity:
            raise ValueError(f"{fn.name} expects {fn.arity} arguments, got {len(args)}")
        self.fn = fn
        self.args = args
        self.depth = 1 + max(a.depth for a in args)
        self.has_var = any(a.has_var for a in args)
        # Symbols are tracked by name: within one rule set a name denotes
        # exactly one symbol, so this coincides with symbol identity.
        self.fn_symbols = frozenset((fn.name,)).union(*(a.fn_symbols for a in args))
        self.cyclic = any(a.cyclic for a in args) or any(
            fn.name in a.fn_symbols for a in args
        )
        self._hash = hash(("f", fn, args))
        self._key = None

    def __eq__(self, other: object) -> bool:
        return self is other or (
            type(other) is Functional
            and other._hash == self._hash
            and other.fn == self.fn
            and other.args == self.args
        )

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return f"{self.fn.name}({','.join(str(a) for a in self.args)})"

    def __repr__(self) -> str:
        return f"Functional({self.fn.name!r}, {self.args!r})"

    @property
    def order_key(self):
        if self._key is None:
            self._key = (self.depth, 2, self.fn.name) + tuple(
                a.order_key for a in self.args
            )
        return self._key


Term = Union[Constant, Variable, Functional]

#: The distinguished constant every critical-instance fact is built from.
STAR = Constant("*")


def depth(t: Term) -> int:
    """Depth of a term: 1 for constants and variables, else one more than
    the deepest argument."""
    return t.depth


def term_key(t: Term):
    """Sort key realising the total term order.

    Depth is the primary component, so merging always renames deeper
    terms into shallower ones; ties break lexicographically on term kind,
    root symbol and then recursively on arguments.
    """
    return t.order_key


def term_compare(t: Term, u: Term) -> int:
    """Three-way comparison under the total term order (-1, 0 or 1)."""
    a, b = t.order_key, u.order_key
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


def is_cyclic(t: Term) -> bool:
    """True iff some functional subterm's symbol occurs again strictly
    inside one of that subterm's arguments, at any nesting depth."""
    return t.cyclic


class Atom:
    __slots__ = ("predicate", "args", "_hash")

    def __init__(self, predicate: Predicate, args: Sequence[Term]):
        args = tuple(args)
        if len(args) != predicate.arity:
            raise ValueError(
                f"{predicate.name} expects {predicate.arity} arguments, got {len(args)}"
            )
        self.predicate = predicate
        self.args = args
        self._hash = hash((predicate, args))

    def __eq__(self, other: object) -> bool:
        return self is other or (
            type(other) is Atom
            and other._hash == self._hash
            and other.predicate == self.predicate
            and other.args == self.args
        )

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return f"{self.predicate.name}({','.join(str(a) for a in self.args)})"

    def __repr__(self) -> str:
        return f"Atom({self})"

    @property
    def is_ground(self) -> bool:
        return not any(a.has_var for a in self.args)

    @property
    def sort_key(self):
        return (self.predicate.name, self.predicate.kind) + tuple(
            a.order_key for a in self.args
        )

    def variables(self) -> Iterator[Variable]:
        for a in self.args:
            if type(a) is Variable:
                yield a
            elif type(a) is Functional:
                yield from _functional_vars(a)


def _functional_vars(t: Functional) -> Iterator[Variable]:
    for a in t.args:
        if type(a) is Variable:
            yield a
        elif type(a) is Functional:
            yield from _functional_vars(a)


Substitution = dict  # Variable -> ground Term
GroundRewriting = dict  # ground Term -> ground Term


def apply_term_map(s, m: Mapping[Term, Term]):
    """Argument-level term rewriting.

    Replaces a predicate argument exactly when the whole argument is a
    key of `m`; occurrences nested inside functional terms are left
    untouched, e.g. P(t, f(t)) under [t/u] becomes P(u, f(t)).  Accepts a
    single atom (returns an atom) or an iterable of atoms (returns an
    AtomSet, deduplicated).
    """
    if isinstance(s, Atom):
        return _map_atom(s, m)
    out = AtomSet()
    for atom in s:
        out.add(_map_atom(atom, m))
    return out


def _map_atom(atom: Atom, m: Mapping[Term, Term]) -> Atom:
    if not m:
        return atom
    changed = False
    new_args = []
    for a in atom.args:
        b = m.get(a, a)
        if b is not a and b != a:
            changed = True
        new_args.append(b)
    return Atom(atom.predicate, new_args) if changed else atom


def apply_syntactic(s, subst: Mapping[Variable, Term]):
    """Syntactic variable substitution: descends into the arguments of
    functional terms, unlike argument-level rewriting.  This is the
    semantics used to instantiate skolemised heads.

    Raises ValueError on a variable the substitution does not bind.
    """
    if isinstance(s, Atom):
        return Atom(s.predicate, [_subst_term(a, subst) for a in s.args])
    out = AtomSet()
    for atom in s:
        out.add(Atom(atom.predicate, [_subst_term(a, subst) for a in atom.args]))
    return out


def _subst_term(t: Term, subst: Mapping[Variable, Term]) -> Term:
    kind = type(t)
    if kind is Variable:
        try:
            return subst[t]
        except KeyError:
            raise ValueError(f"unbound variable {t.name!r} during substitution") from None
    if kind is Functional:
        if not t.has_var:
            return t
        return Functional(t.fn, [_subst_term(a, subst) for a in t.args])
    return t


def star_term(t: Term) -> Term:
    """Replace every syntactic occurrence of a constant with `*`."""
    kind = type(t)
    if kind is Constant:
        return STAR
    if kind is Functional:
        return Functional(t.fn, [star_term(a) for a in t.args])
    return t


def star_atom(atom: Atom) -> Atom:
    return Atom(atom.predicate, [star_term(a) for a in atom.args])


# ---------------------------------------------------------------------------
# Rules


class TGD:
    """body -> exists w1..wk . head"""

    __slots__ = ("body", "existentials", "head", "_hash", "_universals")

    def __init__(
        self,
        body: Sequence[Atom],
        existentials: Sequence[Variable],
        head: Sequence[Atom],
    ):
        self.body = tuple(body)
        self.existentials = tuple(existentials)
        self.head = tuple(head)
        self._hash = hash(("tgd", self.body, self.existentials, self.head))
        self._universals = None

    def __eq__(self, other: object) -> bool:
        return self is other or (
            type(other) is TGD
            and other.body == self.body
            and other.existentials == self.existentials
            and other.head == self.head
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        ex = ""
        if self.existentials:
            ex = "exists " + ", ".join(v.name for v in self.existentials) + " . "
        return (
            ", ".join(str(a) for a in self.body)
            + " -> "
            + ex
            + ", ".join(str(a) for a in self.head)
        )

    @property
    def universals(self) -> tuple[Variable, ...]:
        """Body variables in first-occurrence order."""
        if self._universals is None:
            self._universals = _first_occurrence_vars(self.body)
        return self._universals

    def frontier(self) -> tuple[Variable, ...]:
        ex = set(self.existentials)
        seen = []
        for atom in self.head:
            for v in atom.variables():
                if v not in ex and v not in seen:
                    seen.append(v)
        return tuple(seen)


class EGD:
    """body -> x = y, with x and y body variables."""

    __slots__ = ("body", "x", "y", "_hash", "_universals")

    def __init__(self, body: Sequence[Atom], x: Variable, y: Variable):
        self.body = tuple(body)
        self.x = x
        self.y = y
        self._hash = hash(("egd", self.body, x, y))
        self._universals = None

    def __eq__(self, other: object) -> bool:
        return self is other or (
            type(other) is EGD
            and other.body == self.body
            and other.x == self.x
            and other.y == self.y
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return (
            ", ".join(str(a) for a in self.body)
            + f" -> {self.x.name} = {self.y.name}"
        )

    @property
    def universals(self) -> tuple[Variable, ...]:
        if self._universals is None:
            self._universals = _first_occurrence_vars(self.body)
        return self._universals


Rule = Union[TGD, EGD]


def _first_occurrence_vars(atoms: Sequence[Atom]) -> tuple[Variable, ...]:
    seen: dict[Variable, None] = {}
    for atom in atoms:
        for v in atom.variables():
            seen.setdefault(v, None)
    return tuple(seen)


class RuleSet:
    """An ordered collection of rules.

    Construction renames existential variables apart, so no existential
    name occurs in more than one rule.  Renamed variables keep their stem
    and gain a `__k` suffix; freshness is checked against every variable
    of the rule set, so user variables that happen to contain `__` can
    never be captured.
    """

    __slots__ = ("rules", "_predicates")

    def __init__(self, rules: Iterable[Rule]):
        rules = list(rules)
        taken: set[str] = set()
        for r in rules:
            if type(r) is TGD:
                for v in r.existentials:
                    taken.add(v.name)
        all_names = set(taken)
        for r in rules:
            for atom in r.body:
                for v in atom.variables():
                    all_names.add(v.name)
            if type(r) is TGD:
                for atom in r.head:
                    for v in atom.variables():
                        all_names.add(v.name)

        seen: set[str] = set()
        out: list[Rule] = []
        for r in rules:
            if type(r) is TGD and any(v.name in seen for v in r.existentials):
                ren: dict[Variable, Term] = {}
                for v in r.existentials:
                    if v.name in seen:
                        k = 2
                        while f"{v.name}__{k}" in all_names:
                            k += 1
                        fresh = f"{v.name}__{k}"
                        all_names.add(fresh)
                        ren[v] = Variable(fresh)
                new_ex = tuple(ren.get(v, v) for v in r.existentials)
                new_head = tuple(apply_syntactic_partial(a, ren) for a in r.head)
                r = TGD(r.body, new_ex, new_head)
            if type(r) is TGD:
                seen.update(v.name for v in r.existentials)
            out.append(r)
        self.rules = tuple(out)
        self._predicates = None

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def __getitem__(self, i: int) -> Rule:
        return self.rules[i]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RuleSet) and other.rules == self.rules

    def __hash__(self) -> int:
        return hash(self.rules)

    def predicates(self) -> tuple[Predicate, ...]:
        """Predicates occurring in rule atoms, in first-occurrence order.
        Equality never appears here; the reserved `eq` predicate does when
        a rule set mentions it."""
        if self._predicates is None:
            seen: dict[Predicate, None] = {}
            for r in self.rules:
                for atom in r.body:
                    seen.setdefault(atom.predicate, None)
                if type(r) is TGD:
                    for atom in r.head:
                        seen.setdefault(atom.predicate, None)
            self._predicates = tuple(seen)
        return self._predicates

    def tgds(self) -> list[TGD]:
        return [r for r in self.rules if type(r) is TGD]

    def egds(self) -> list[EGD]:
        return [r for r in self.rules if type(r) is EGD]


def apply_syntactic_partial(atom: Atom, subst: Mapping[Variable, Term]) -> Atom:
    """Like apply_syntactic but leaves unbound variables in place."""
    def sub(t: Term) -> Term:
        kind = type(t)
        if kind is Variable:
            return subst.get(t, t)
        if kind is Functional and t.has_var:
            return Functional(t.fn, [sub(a) for a in t.args])
        return t

    return Atom(atom.predicate, [sub(a) for a in atom.args])


@dataclass(frozen=True)
class Ontology:
    rules: RuleSet
    facts: tuple[Atom, ...]

    def __init__(self, rules: RuleSet, facts: Iterable[Atom]):
        deduped: dict[Atom, None] = {}
        for f in facts:
            deduped.setdefault(f, None)
        object.__setattr__(self, "rules", rules)
        object.__setattr__(self, "facts", tuple(deduped))


@dataclass(frozen=True)
class BCQ:
    """A Boolean conjunctive query: an existentially closed conjunction."""

    variables: tuple[Variable, ...]
    body: tuple[Atom, ...]

    def __init__(self, variables: Iterable[Variable], body: Iterable[Atom]):
        object.__setattr__(self, "variables", tuple(variables))
        object.__setattr__(self, "body", tuple(body))

    def __str__(self) -> str:
        ex = ""
        if self.variables:
            ex = "exists " + ", ".join(v.name for v in self.variables) + " . "
        return "? " + ex + ", ".join(str(a) for a in self.body)


# ---------------------------------------------------------------------------
# Skolemisation


@dataclass(frozen=True)
class SkolemisedTGD:
    """A TGD whose existentials have been replaced by functional terms
    over the rule's universal variables."""

    source: TGD
    body: tuple[Atom, ...]
    head: tuple[Atom, ...]
    symbols: tuple[SkolemSymbol, ...]


def skolemise(rule: TGD, rule_id: str = "r0") -> SkolemisedTGD:
    """Replace each existential variable w by f_w(x1..xn) over the rule's
    universal variables in first-occurrence order.

    Skolemising an already-skolemised rule is a type error by design:
    SkolemisedTGD is not accepted here.
    """
    if type(rule) is not TGD:
        raise TypeError(f"can only skolemise a TGD, got {type(rule).__name__}")
    univ = rule.universals
    mapping: dict[Variable, Term] = {}
    symbols = []
    for w in rule.existentials:
        sym = SkolemSymbol(f"f_{w.name}", len(univ), origin=(rule_id, w.name))
        symbols.append(sym)
        mapping[w] = Functional(sym, univ)
    head = tuple(apply_syntactic_partial(a, mapping) for a in rule.head)
    return SkolemisedTGD(rule, rule.body, head, tuple(symbols))


def skolemise_ruleset(rules: RuleSet) -> tuple[Union[SkolemisedTGD, EGD], ...]:
    out: list[Union[SkolemisedTGD, EGD]] = []
    for i, r in enumerate(rules):
        if type(r) is TGD:
            out.append(skolemise(r, rule_id=f"r{i}"))
        else:
            out.append(r)
    return tuple(out)


# ---------------------------------------------------------------------------
# Atom sets


class AtomSet:
    """The working state of a saturation: an insertion-ordered set of
    atoms with a per-predicate index.

    Mutation is confined to `add` and `rewrite_in_place`; iteration order
    is insertion order, which keeps every run deterministic.
    """

    __slots__ = ("_atoms", "_buckets", "_arg0", "add_stamp", "pred_stamp", "merge_stamp")

    def __init__(self, atoms: Iterable[Atom] = ()):
        self._atoms: dict[Atom, None] = {}
        self._buckets: dict[Predicate, dict[Atom, None]] = {}
        self._arg0: dict[tuple[Predicate, Term], list[Atom]] = {}
        self.add_stamp = 0
        self.pred_stamp: dict[Predicate, int] = {}
        self.merge_stamp = 0
        for a in atoms:
            self.add(a)

    def add(self, atom: Atom) -> bool:
        if atom in self._atoms:
            return False
        self._atoms[atom] = None
        self._buckets.setdefault(atom.predicate, {})[atom] = None
        self._arg0.setdefault((atom.predicate, atom.args[0]), []).append(atom)
        self.add_stamp += 1
        self.pred_stamp[atom.predicate] = self.add_stamp
        return True

    def __contains__(self, atom: Atom) -> bool:
        return atom in self._atoms

    def __iter__(self) -> Iterator[Atom]:
        return iter(self._atoms)

    def __len__(self) -> int:
        return len(self._atoms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, AtomSet):
            return self._atoms.keys() == other._atoms.keys()
        if isinstance(other, (set, frozenset)):
            return set(self._atoms) == other
        return NotImplemented

    def __repr__(self) -> str:
        return "{" + ", ".join(str(a) for a in self.sorted_atoms()) + "}"

    def bucket(self, predicate: Predicate) -> Sequence[Atom]:
        b = self._buckets.get(predicate)
        return list(b) if b else ()

    def arg0_bucket(self, predicate: Predicate, first: Term) -> Sequence[Atom]:
        """Atoms of the predicate whose first argument is `first`."""
        return self._arg0.get((predicate, first), ())

    def bucket_size(self, predicate: Predicate) -> int:
        b = self._buckets.get(predicate)
        return len(b) if b else 0

    def rewrite_in_place(self, m: Mapping[Term, Term]) -> None:
        """Argument-level rewriting of the whole set, preserving the
        surviving atoms' relative order (first image wins)."""
        atoms = list(self._atoms)
        self._atoms.clear()
        self._buckets.clear()
        self._arg0.clear()
        for atom in atoms:
            img = _map_atom(atom, m)
            if img not in self._atoms:
                self._atoms[img] = None
                self._buckets.setdefault(img.predicate, {})[img] = None
                self._arg0.setdefault((img.predicate, img.args[0]), []).append(img)
        self.merge_stamp += 1
        self.add_stamp += 1
        for p in self._buckets:
            self.pred_stamp[p] = self.add_stamp

    def rewritten(self, m: Mapping[Term, Term]) -> "AtomSet":
        out = AtomSet()
        for atom in self._atoms:
            out.add(_map_atom(atom, m))
        return out

    def copy(self) -> "AtomSet":
        return AtomSet(self._atoms)

    def to_frozenset(self) -> frozenset:
        return frozenset(self._atoms)

    def sorted_atoms(self) -> list[Atom]:
        return sorted(self._atoms, key=lambda a: a.sort_key)

    def terms(self) -> Iterator[Term]:
        """Distinct argument terms in first-occurrence order."""
        seen: dict[Term, None] = {}
        for atom in self._atoms:
            for t in atom.args:
                if t not in seen:
                    seen[t] = None
                    yield t

    def max_term_depth(self) -> int:
        best = 0
        for atom in self._atoms:
            for t in atom.args:
                if t.depth > best:
                    best = t.depth
        return best


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.where}: {self.message}"


def _check_rule(r: Rule, where: str, arities: dict[str, int]) -> list[Violation]:
    out = []
    if not r.body:
        out.append(Violation(where, "rule body must be non-empty"))
    atoms = list(r.body) + (list(r.head) if type(r) is TGD else [])
    for atom in atoms:
        p = atom.predicate
        if p.kind == EQUALITY:
            out.append(Violation(where, "rules must not contain equality atoms"))
        if p.kind == ORDINARY and p.name == RESERVED_EQ_NAME:
            out.append(Violation(where, f"predicate name {RESERVED_EQ_NAME!r} is reserved"))
        known = arities.setdefault(p.name, p.arity)
        if known != p.arity:
            out.append(Violation(where, f"predicate {p.name!r} used with arities {known} and {p.arity}"))
        for t in atom.args:
            if type(t) is Constant:
                out.append(Violation(where, f"rules must be constant-free (found {t})"))
            elif type(t) is Functional:
                out.append(Violation(where, f"rules must be function-free (found {t})"))
    if type(r) is TGD:
        if not r.head:
            out.append(Violation(where, "rule head must be non-empty"))
        body_vars = set(r.universals)
        ex = set(r.existentials)
        if len(ex) != len(r.existentials):
            out.append(Violation(where, "duplicate existential variable"))
        if ex & body_vars:
            clash = sorted(v.name for v in ex & body_vars)
            out.append(Violation(where, f"existential variables also occur in the body: {clash}"))
        for atom in r.head:
            for v in atom.variables():
                if v not in ex and v not in body_vars:
                    out.append(Violation(where, f"head variable {v.name!r} does not occur in the body"))
    else:
        body_vars = set(r.universals)
        for v in (r.x, r.y):
            if v not in body_vars:
                out.append(Violation(where, f"equated variable {v.name!r} does not occur in the body"))
    return out


def validate_ruleset(rules: RuleSet) -> list[Violation]:
    out: list[Violation] = []
    if not rules.rules:
        out.append(Violation("rules", "rule set must be non-empty"))
    arities: dict[str, int] = {}
    seen_ex: dict[str, int] = {}
    for i, r in enumerate(rules):
        where = f"rule {i + 1}"
        out.extend(_check_rule(r, where, arities))
        if type(r) is TGD:
            for v in r.existentials:
                if v.name in seen_ex:
                    out.append(Violation(where, f"existential variable {v.name!r} reoccurs (also in rule {seen_ex[v.name] + 1})"))
                else:
                    seen_ex[v.name] = i
    return out


def validate(ontology: Ontology) -> list[Violation]:
    """Check every well-formedness assumption; returns violations with
    their locations rather than raising."""
    out = validate_ruleset(ontology.rules)
    known = {p.name: p.arity for r in ontology.rules for p in _rule_preds(r)}
    for j, fact in enumerate(ontology.facts):
        where = f"fact {j + 1} ({fact})"
        p = fact.predicate
        if p.kind == EQUALITY:
            out.append(Violation(where, "facts must be equality-free"))
            continue
        if p.kind == AXIOM_EQ:
            out.append(Violation(where, f"facts must not use the reserved predicate {RESERVED_EQ_NAME!r}"))
            continue
        if p.name not in known:
            out.append(Violation(where, f"predicate {p.name!r} does not occur in the rule set"))
        elif known[p.name] != p.arity:
            out.append(Violation(where, f"predicate {p.name!r} used with arities {known[p.name]} and {p.arity}"))
        if not fact.is_ground:
            out.append(Violation(where, "facts must be ground"))
        for t in fact.args:
            if type(t) is Functional:
                out.append(Violation(where, "facts must be function-free"))
    return out


def _rule_preds(r: Rule) -> Iterator[Predicate]:
    for atom in r.body:
        yield atom.predicate
    if type(r) is TGD:
        for atom in r.head:
            yield atom.predicate


def validate_query(q: BCQ) -> list[Violation]:
    out: list[Violation] = []
    if not q.body:
        out.append(Violation("query", "query body must be non-empty"))
    declared = set(q.variables)
    arities: dict[str, int] = {}
    for atom in q.body:
        p = atom.predicate
        if p.kind == EQUALITY:
            out.append(Violation("query", "queries must not contain equality"))
        known = arities.setdefault(p.name, p.arity)
        if known != p.arity:
            out.append(Violation("query", f"predicate {p.name!r} used with arities {known} and {p.arity}"))
        for t in atom.args:
            if type(t) is Constant:
                out.append(Violation("query", f"queries must not contain constants (found {t})"))
            elif type(t) is Functional:
                out.append(Violation("query", f"queries must be function-free (found {t})"))
            elif t not in declared:
                out.append(Violation("query", f"variable {t.name!r} is not quantified"))
    return out
