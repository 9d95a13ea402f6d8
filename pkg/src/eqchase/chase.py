"""The non-oblivious "renaming" chase.

TGDs fire only when no extension of the match already embeds the head;
EGDs merge the two matched terms by renaming the deeper one to the
shallower one across the whole atom set (argument-level).  A run applies,
at every step, the first applicable (rule, substitution) pair in rule
order and deterministic match-enumeration order, recomputed against the
current state.  Every pair that stays applicable is eventually applied,
and the final set of a finished run satisfies every rule.

Boolean conjunctive queries are answered by homomorphism search into the
finished chase; a witness found in a limit-truncated state is still sound
because later growth preserves embeddings and merges only rename them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Optional, Sequence, Union

from .model import (
    EGD,
    TGD,
    Atom,
    AtomSet,
    BCQ,
    Ontology,
    Rule,
    RuleSet,
    Substitution,
    Variable,
    apply_syntactic,
    skolemise,
    term_key,
    validate,
    validate_query,
)


class InvalidInputError(ValueError):
    """Raised when an operation is handed an ontology or query that fails
    validation; carries the violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class ChaseLimits:
    """Resource caps making every run total.  None means unbounded."""

    max_steps: Optional[int] = None
    max_atoms: Optional[int] = None
    max_term_depth: Optional[int] = None
    wall_clock_ms: Optional[int] = None

    def bounded(self) -> bool:
        return any(
            v is not None
            for v in (self.max_steps, self.max_atoms, self.max_term_depth, self.wall_clock_ms)
        )


@dataclass
class ChaseTrace:
    steps: int = 0
    tgd_steps: int = 0
    egd_steps: int = 0
    max_term_depth: int = 0
    rule_fires: dict = field(default_factory=dict)


@dataclass
class Terminated:
    result: AtomSet
    steps: int
    trace: ChaseTrace


@dataclass
class LimitExceeded:
    partial: AtomSet
    limit: str
    steps: int
    trace: ChaseTrace


ChaseOutcome = Union[Terminated, LimitExceeded]


# ---------------------------------------------------------------------------
# Conjunction matching


def match_conjunction(
    body: Sequence[Atom],
    aset: AtomSet,
    init: Optional[Mapping[Variable, object]] = None,
) -> Iterator[dict]:
    """Enumerate every binding of the body variables that embeds the
    conjunction into the atom set, in deterministic order (body atoms
    left to right, candidates in insertion order).

    Yields a live dict; callers that keep a binding must copy it.
    """
    binding: dict = dict(init) if init else {}
    buckets = [aset.bucket(a.predicate) for a in body]
    n = len(body)

    def rec(i: int) -> Iterator[dict]:
        if i == n:
            yield binding
            return
        atom = body[i]
        first = binding.get(atom.args[0])
        # A bound first argument narrows the candidates via the index;
        # the filtered candidates come in the same relative order as a
        # full bucket scan, so enumeration order is unchanged.
        cands = buckets[i] if first is None else aset.arg0_bucket(atom.predicate, first)
        for cand in cands:
            trail = []
            ok = True
            for v, t in zip(atom.args, cand.args):
                bound = binding.get(v)
                if bound is None:
                    binding[v] = t
                    trail.append(v)
                elif bound != t:
                    ok = False
                    break
            if ok:
                yield from rec(i + 1)
            for v in trail:
                del binding[v]

    return rec(0)


def homomorphism(body: Sequence[Atom], aset: AtomSet) -> Optional[Substitution]:
    """A total mapping of the body's variables into the atom set, or None.

    Body atoms are reordered by bucket size (most selective first); the
    ordering is a performance choice only.
    """
    ordered = sorted(
        range(len(body)), key=lambda i: (aset.bucket_size(body[i].predicate), i)
    )
    for binding in match_conjunction([body[i] for i in ordered], aset):
        return dict(binding)
    return None


# ---------------------------------------------------------------------------
# Applicability and application


def _check_domain(rule: Rule, sigma: Mapping) -> None:
    need = set(rule.universals)
    have = set(sigma)
    if have != need:
        missing = sorted(v.name for v in need - have)
        extra = sorted(v.name for v in have - need)
        raise ValueError(
            f"substitution domain mismatch (missing {missing}, extra {extra})"
        )
    if type(rule) is TGD and any(w in sigma for w in rule.existentials):
        raise ValueError("substitution must be undefined on existential variables")


def _body_holds(rule: Rule, sigma: Mapping, aset: AtomSet) -> bool:
    for atom in rule.body:
        if Atom(atom.predicate, [sigma[v] for v in atom.args]) not in aset:
            return False
    return True


def _head_embedded(head: Sequence[Atom], sigma: Mapping, aset: AtomSet) -> bool:
    init = {}
    for atom in head:
        for v in atom.variables():
            if v in sigma:
                init[v] = sigma[v]
    for _ in match_conjunction(head, aset, init=init):
        return True
    return False


def is_applicable(rule: Rule, sigma: Substitution, aset: AtomSet) -> bool:
    """The four applicability conditions: exact substitution domain, body
    embedded, no extension of the match embeds a TGD head, and an EGD
    equates two distinct terms."""
    _check_domain(rule, sigma)
    if not _body_holds(rule, sigma, aset):
        return False
    if type(rule) is TGD:
        return not _head_embedded(rule.head, sigma, aset)
    return sigma[rule.x] != sigma[rule.y]


def apply(rule: Rule, sigma: Substitution, aset: AtomSet) -> AtomSet:
    """Apply an applicable pair, returning the successor atom set.

    TGDs add the instantiated skolemised head; EGDs rename the deeper of
    the two equated terms to the shallower one across the whole set.
    """
    if not is_applicable(rule, sigma, aset):
        raise ValueError("pair is not applicable to the atom set")
    out = aset.copy()
    if type(rule) is TGD:
        for atom in skolemise(rule).head:
            out.add(apply_syntactic(atom, sigma))
    else:
        tx, ty = sigma[rule.x], sigma[rule.y]
        if term_key(tx) < term_key(ty):
            out.rewrite_in_place({ty: tx})
        else:
            out.rewrite_in_place({tx: ty})
    return out


def find_applicable(rules: RuleSet, aset: AtomSet) -> Iterator[tuple[Rule, Substitution]]:
    """Enumerate every applicable (rule, substitution) pair exactly once,
    in rule order then match order."""
    for rule in rules:
        for binding in match_conjunction(rule.body, aset):
            sigma = dict(binding)
            if type(rule) is TGD:
                if not _head_embedded(rule.head, sigma, aset):
                    yield rule, sigma
            elif sigma[rule.x] != sigma[rule.y]:
                yield rule, sigma


def satisfies(aset: AtomSet, rule: Rule) -> bool:
    """True iff no substitution makes the rule applicable."""
    for binding in match_conjunction(rule.body, aset):
        if type(rule) is TGD:
            if not _head_embedded(rule.head, binding, aset):
                return False
        elif binding[rule.x] != binding[rule.y]:
            return False
    return True


# ---------------------------------------------------------------------------
# The engine


class _CompiledRule:
    __slots__ = (
        "idx",
        "rule",
        "kind",
        "body",
        "body_preds",
        "universals",
        "head",
        "sk_head",
        "x",
        "y",
        "dead",
        "trivial",
        "exhausted_token",
    )

    def __init__(self, idx: int, rule: Rule):
        self.idx = idx
        self.rule = rule
        self.body = rule.body
        self.body_preds = tuple({a.predicate: None for a in rule.body})
        self.universals = rule.universals
        if type(rule) is TGD:
            self.kind = "tgd"
            self.head = rule.head
            self.sk_head = skolemise(rule, rule_id=f"r{idx}").head
        else:
            self.kind = "egd"
            self.x = rule.x
            self.y = rule.y
        # dead: matches that can never become applicable again while the
        # set only grows (applied or head-blocked).  Cleared on merges.
        # trivial: EGD matches equating a term with itself; permanent.
        self.dead: set = set()
        self.trivial: set = set()
        self.exhausted_token = None


class ChaseEngine:
    """One chase run over one ontology.

    Each step applies the first applicable pair in (rule order, match
    order), recomputed against the current state.  The caches below only
    skip work that provably cannot yield an applicable pair while the set
    grows monotonically; every merge invalidates them, so the selected
    sequence is identical to a naive full rescan.
    """

    def __init__(
        self,
        ontology: Ontology,
        limits: ChaseLimits = ChaseLimits(),
        seed: int = 0,
        on_step: Optional[Callable[[int, Rule, Substitution, AtomSet], None]] = None,
    ):
        violations = validate(ontology)
        if violations:
            raise InvalidInputError(violations)
        self.limits = limits
        self.on_step = on_step
        self.state = AtomSet(ontology.facts)
        self.trace = ChaseTrace(max_term_depth=self.state.max_term_depth())
        self.compiled = [_CompiledRule(i, r) for i, r in enumerate(ontology.rules)]
        if seed:
            import random

            random.Random(seed).shuffle(self.compiled)

    def _token(self, cr: _CompiledRule):
        ps = self.state.pred_stamp
        return (
            self.state.merge_stamp,
            tuple(ps.get(p, 0) for p in cr.body_preds),
        )

    def _find_next(self):
        aset = self.state
        for cr in self.compiled:
            token = self._token(cr)
            if cr.exhausted_token == token:
                continue
            for binding in match_conjunction(cr.body, aset):
                key = tuple(binding[v] for v in cr.universals)
                if key in cr.dead or key in cr.trivial:
                    continue
                if cr.kind == "tgd":
                    if _head_embedded(cr.head, binding, aset):
                        cr.dead.add(key)
                        continue
                    return cr, dict(binding)
                tx, ty = binding[cr.x], binding[cr.y]
                if tx == ty:
                    cr.trivial.add(key)
                    continue
                return cr, dict(binding)
            cr.exhausted_token = token
        return None

    def run(self) -> ChaseOutcome:
        limits = self.limits
        deadline = None
        if limits.wall_clock_ms is not None:
            deadline = time.monotonic() + limits.wall_clock_ms / 1000.0
        while True:
            if deadline is not None and time.monotonic() > deadline:
                return LimitExceeded(self.state, "wall_clock_ms", self.trace.steps, self.trace)
            found = self._find_next()
            if found is None:
                return Terminated(self.state, self.trace.steps, self.trace)
            cr, sigma = found
            if limits.max_steps is not None and self.trace.steps >= limits.max_steps:
                return LimitExceeded(self.state, "max_steps", self.trace.steps, self.trace)
            if cr.kind == "tgd":
                new_atoms = [apply_syntactic(a, sigma) for a in cr.sk_head]
                fresh = [a for a in new_atoms if a not in self.state]
                d = max(max(t.depth for t in a.args) for a in new_atoms)
                if limits.max_term_depth is not None and d > limits.max_term_depth:
                    return LimitExceeded(self.state, "max_term_depth", self.trace.steps, self.trace)
                if (
                    limits.max_atoms is not None
                    and len(self.state) + len(fresh) > limits.max_atoms
                ):
                    return LimitExceeded(self.state, "max_atoms", self.trace.steps, self.trace)
                for a in fresh:
                    self.state.add(a)
                cr.dead.add(tuple(sigma[v] for v in cr.universals))
                self.trace.tgd_steps += 1
                if d > self.trace.max_term_depth:
                    self.trace.max_term_depth = d
            else:
                tx, ty = sigma[cr.x], sigma[cr.y]
                if term_key(tx) < term_key(ty):
                    self.state.rewrite_in_place({ty: tx})
                else:
                    self.state.rewrite_in_place({tx: ty})
                for other in self.compiled:
                    other.dead.clear()
                self.trace.egd_steps += 1
            self.trace.steps += 1
            self.trace.rule_fires[cr.idx] = self.trace.rule_fires.get(cr.idx, 0) + 1
            if self.on_step is not None:
                self.on_step(self.trace.steps, cr.rule, sigma, self.state)


def chase(
    ontology: Ontology,
    limits: ChaseLimits = ChaseLimits(),
    seed: int = 0,
    on_step: Optional[Callable[[int, Rule, Substitution, AtomSet], None]] = None,
) -> ChaseOutcome:
    """Run the chase to saturation or to a resource limit."""
    return ChaseEngine(ontology, limits, seed=seed, on_step=on_step).run()


# ---------------------------------------------------------------------------
# Entailment


@dataclass(frozen=True)
class Entailed:
    witness: dict


@dataclass(frozen=True)
class NotEntailed:
    pass


@dataclass(frozen=True)
class Unknown:
    limit: str


EntailmentVerdict = Union[Entailed, NotEntailed, Unknown]


def entails(
    ontology: Ontology,
    query: BCQ,
    limits: ChaseLimits = ChaseLimits(),
    seed: int = 0,
) -> EntailmentVerdict:
    """Decide query entailment by homomorphism into a chase.

    On a finished chase the answer is definite.  When a limit was hit,
    a witness found in the partial state is still reported as entailed
    (growth preserves embeddings and merges rename them along); absence
    of a witness is reported as unknown.
    """
    violations = validate_query(query)
    if violations:
        raise InvalidInputError(violations)
    outcome = chase(ontology, limits, seed=seed)
    if isinstance(outcome, Terminated):
        w = homomorphism(query.body, outcome.result)
        return Entailed(w) if w is not None else NotEntailed()
    w = homomorphism(query.body, outcome.partial)
    if w is not None:
        return Entailed(w)
    return Unknown(outcome.limit)
