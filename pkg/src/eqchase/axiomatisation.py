"""Equality elimination.

Two transforms turn a rule set with equality into plain TGD sets over the
reserved predicate `eq`: the standard axiomatisation (explicit
reflexivity, symmetry, transitivity and per-position replacement rules)
and singularisation (repeated body occurrences of a variable split into
fresh variables linked by `eq` atoms, one rule set per choice of kept
occurrence).

The second half of the module is the machinery for reading an eq-closed
atom set back: the rewriting that sends every term to the least member of
its eq-class, and the bracket operation that applies it and drops the eq
atoms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence

from .model import (
    EQ,
    EGD,
    TGD,
    Atom,
    AtomSet,
    BCQ,
    GroundRewriting,
    Predicate,
    Rule,
    RuleSet,
    Term,
    Variable,
    term_key,
)

#: Provenance labels.
STANDARD = "standard"
SINGULARISATION = "singularisation"


@dataclass(frozen=True)
class AxiomatisedRuleSet:
    """An equality-free rule set over `eq`, tagged with the transform that
    produced it.  For singularisations, `choices` records the kept
    occurrence index per repeated body variable, one entry per source
    rule."""

    rules: RuleSet
    kind: str
    choices: Optional[tuple[tuple[tuple[str, int], ...], ...]] = None

    def __iter__(self):
        return iter(self.rules)


def _equality_theory(predicates: Sequence[Predicate]) -> tuple[list[TGD], list[TGD], list[TGD]]:
    """Reflexivity instances per predicate, the symmetry/transitivity
    pair, and per-position replacement rules."""
    x, y, z = Variable("X"), Variable("Y"), Variable("Z")
    reflexivity = []
    replacement = []
    for p in predicates:
        xs = [Variable(f"X{i + 1}") for i in range(p.arity)]
        reflexivity.append(
            TGD([Atom(p, xs)], (), [Atom(EQ, (v, v)) for v in xs])
        )
        for i in range(p.arity):
            prime = Variable("Y")
            head_args = list(xs)
            head_args[i] = prime
            replacement.append(
                TGD(
                    [Atom(p, xs), Atom(EQ, (xs[i], prime))],
                    (),
                    [Atom(p, head_args)],
                )
            )
    symmetry = TGD([Atom(EQ, (x, y))], (), [Atom(EQ, (y, x))])
    transitivity = TGD([Atom(EQ, (x, y)), Atom(EQ, (y, z))], (), [Atom(EQ, (x, z))])
    return reflexivity, [symmetry, transitivity], replacement


def standard_axiomatisation(rules: RuleSet) -> AxiomatisedRuleSet:
    """Source TGDs kept verbatim, each EGD's head rewritten to eq(x, y),
    plus reflexivity per predicate, symmetry, transitivity, and one
    replacement rule per predicate argument position."""
    translated: list[Rule] = []
    for r in rules:
        if type(r) is TGD:
            translated.append(r)
        else:
            translated.append(TGD(r.body, (), [Atom(EQ, (r.x, r.y))]))
    reflexivity, sym_trans, replacement = _equality_theory(rules.predicates())
    return AxiomatisedRuleSet(
        RuleSet(translated + reflexivity + sym_trans + replacement), STANDARD
    )


# ---------------------------------------------------------------------------
# Singularisation


def _occurrences(body: Sequence[Atom]) -> dict[str, list[tuple[int, int]]]:
    """Variable name -> positions (atom index, argument index), scanning
    the body left to right."""
    occ: dict[str, list[tuple[int, int]]] = {}
    for i, atom in enumerate(body):
        for j, t in enumerate(atom.args):
            if type(t) is Variable:
                occ.setdefault(t.name, []).append((i, j))
    return occ


def _fresh_name(base: str, index: int, taken: set[str]) -> str:
    name = f"{base}__{index}"
    while name in taken:
        name += "_"
    return name


def singularise_conjunction(
    body: Sequence[Atom], choice: Mapping[str, int]
) -> tuple[Atom, ...]:
    """Split repeated variable occurrences apart.

    For each variable with n occurrences the choice picks the kept one
    (1-based; occurrences are numbered left to right over the atom list,
    then by argument position; variables not in the mapping keep their
    first occurrence).  Every other occurrence i becomes a fresh variable
    x__i, and an eq(x, x__i) atom is appended per fresh variable.
    """
    body = tuple(body)
    occ = _occurrences(body)
    taken = set(occ)
    renames: dict[tuple[int, int], Variable] = {}
    links: list[Atom] = []
    for name, positions in occ.items():
        n = len(positions)
        k = choice.get(name, 1)
        if not 1 <= k <= n:
            raise ValueError(
                f"occurrence choice {k} for variable {name!r} out of range 1..{n}"
            )
        if n == 1:
            continue
        for i, pos in enumerate(positions, start=1):
            if i == k:
                continue
            fresh = Variable(_fresh_name(name, i, taken))
            taken.add(fresh.name)
            renames[pos] = fresh
            links.append(Atom(EQ, (Variable(name), fresh)))
    if not renames:
        return body
    new_body = []
    for i, atom in enumerate(body):
        args = [renames.get((i, j), t) for j, t in enumerate(atom.args)]
        new_body.append(Atom(atom.predicate, args))
    return tuple(new_body) + tuple(links)


def _rule_choice_space(rule: Rule) -> list[tuple[str, int]]:
    """(variable name, occurrence count) for each repeated body variable,
    in first-occurrence order."""
    return [
        (name, len(positions))
        for name, positions in _occurrences(rule.body).items()
        if len(positions) > 1
    ]


def _singularise_rule(rule: Rule, choice: Mapping[str, int]) -> TGD:
    body = singularise_conjunction(rule.body, choice)
    if type(rule) is TGD:
        return TGD(body, rule.existentials, rule.head)
    return TGD(body, (), [Atom(EQ, (rule.x, rule.y))])


def singularisation_count(rules: RuleSet) -> int:
    n = 1
    for r in rules:
        for _, occ in _rule_choice_space(r):
            n *= occ
    return n


def singularisations(rules: RuleSet) -> Iterator[AxiomatisedRuleSet]:
    """Enumerate every singularised rule set, lazily.

    The number of sets is the product over rules of the per-rule choice
    counts; callers cap the enumeration with itertools.islice.
    """
    spaces = [_rule_choice_space(r) for r in rules]
    reflexivity, sym_trans, _ = _equality_theory(rules.predicates())
    per_rule_options = [
        list(itertools.product(*(range(1, occ + 1) for _, occ in space)))
        for space in spaces
    ]
    for combo in itertools.product(*per_rule_options):
        singularised = []
        provenance = []
        for rule, space, ks in zip(rules, spaces, combo):
            choice = {name: k for (name, _), k in zip(space, ks)}
            singularised.append(_singularise_rule(rule, choice))
            provenance.append(tuple(sorted(choice.items())))
        yield AxiomatisedRuleSet(
            RuleSet(singularised + reflexivity + sym_trans),
            SINGULARISATION,
            choices=tuple(provenance),
        )


def canonical_singularisation(rules: RuleSet) -> AxiomatisedRuleSet:
    """The singularisation keeping the first occurrence of every
    variable; fixed so results are reproducible."""
    return next(iter(singularisations(rules)))


def singularise_query(query: BCQ) -> Iterator[BCQ]:
    """Every singularisation of the query body, with the fresh variables
    added to the existential list."""
    space = [
        (name, len(positions))
        for name, positions in _occurrences(query.body).items()
        if len(positions) > 1
    ]
    for ks in itertools.product(*(range(1, occ + 1) for _, occ in space)):
        choice = {name: k for (name, _), k in zip(space, ks)}
        body = singularise_conjunction(query.body, choice)
        variables: dict[Variable, None] = {}
        for atom in body:
            for v in atom.variables():
                variables.setdefault(v, None)
        yield BCQ(tuple(variables), body)


def canonical_query_singularisation(query: BCQ) -> BCQ:
    return next(iter(singularise_query(query)))


# ---------------------------------------------------------------------------
# eq-closed sets, the class-collapsing rewriting, and bracket


class EqIncompleteError(ValueError):
    """Raised when a rewriting is requested over a set that is not closed
    under eq reflexivity, symmetry and transitivity."""


def _eq_neighbours(aset: AtomSet) -> dict[Term, set[Term]]:
    nbr: dict[Term, set[Term]] = {}
    for atom in aset.bucket(EQ):
        t, u = atom.args
        nbr.setdefault(t, set()).add(u)
    return nbr


def is_ep_complete(aset: AtomSet) -> bool:
    """True iff eq(t, t) is present for every argument term of the set
    and the set satisfies eq-symmetry and eq-transitivity."""
    nbr = _eq_neighbours(aset)
    for t in aset.terms():
        if t not in nbr or t not in nbr[t]:
            return False
    for t, us in nbr.items():
        for u in us:
            if t not in nbr.get(u, ()):
                return False  # symmetry violated
            for v in nbr.get(u, ()):
                if v not in us:
                    return False  # transitivity violated
    return True


def pi(aset: AtomSet) -> GroundRewriting:
    """The rewriting sending every term of the set to the least member of
    its eq-class under the term order."""
    if not is_ep_complete(aset):
        raise EqIncompleteError("atom set is not eq-complete")
    nbr = _eq_neighbours(aset)
    return {t: min(nbr[t], key=term_key) for t in aset.terms()}


def bracket(aset: AtomSet) -> AtomSet:
    """Apply the class-collapsing rewriting argument-level to every atom,
    then drop all eq atoms."""
    mapping = pi(aset)
    out = AtomSet()
    for atom in aset:
        if atom.predicate == EQ:
            continue
        out.add(Atom(atom.predicate, [mapping.get(t, t) for t in atom.args]))
    return out


def ep_completion(aset: AtomSet) -> AtomSet:
    """Close a set under eq reflexivity, symmetry and transitivity; handy
    for building eq-complete sets in tests and oracles."""
    out = aset.copy()
    classes: dict[Term, set[Term]] = {}
    for t in out.terms():
        classes.setdefault(t, {t})
    for atom in list(out.bucket(EQ)):
        t, u = atom.args
        merged = classes.setdefault(t, {t}) | classes.setdefault(u, {u})
        for v in merged:
            classes[v] = merged
    for t, cls in classes.items():
        for u in cls:
            out.add(Atom(EQ, (t, u)))
    return out
