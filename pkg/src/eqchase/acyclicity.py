"""Acyclicity checks for rule sets with equality.

The check saturates a monotone closure starting from the critical
instance (every predicate applied to the distinguished constant `*`):
each TGD body match adds the instantiated skolemised head, and each EGD
body match adds, for the whole current set, the image of every atom under
replacement of the deeper matched term by the shallower one (both images
when the depths tie).  Nothing is ever removed.  The computation stops
the moment an atom containing a cyclic term appears; a rule set passes
when the fixpoint completes without one.

Over equality-free inputs the same machinery is the classic
model-faithful check, with `eq` treated as an ordinary predicate.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

import itertools

from .model import (
    EGD,
    EQUALS,
    STAR,
    TGD,
    Atom,
    AtomSet,
    RuleSet,
    Term,
    apply_syntactic,
    skolemise,
)
from .chase import ChaseLimits, match_conjunction
from .axiomatisation import (
    AxiomatisedRuleSet,
    canonical_singularisation,
    singularisations,
    standard_axiomatisation,
)

COMPLETED = "completed"
CYCLIC = "cyclic"
LIMIT = "limit-exceeded"

ACYCLIC_VERDICT = "acyclic"
CYCLIC_VERDICT = "cyclic"
LIMIT_VERDICT = "limit-exceeded"


def critical_instance(rules: RuleSet, include_eq_star: bool = False) -> list[Atom]:
    """One fact per predicate of the rule set, every argument `*`.
    Equality itself is excluded unless explicitly requested."""
    facts = [Atom(p, (STAR,) * p.arity) for p in rules.predicates()]
    if include_eq_star and rules.egds():
        facts.append(Atom(EQUALS, (STAR, STAR)))
    return facts


@dataclass
class SaturationOutcome:
    status: str  # completed | cyclic | limit-exceeded
    atoms: AtomSet
    witness_atom: Optional[Atom] = None
    witness_term: Optional[Term] = None
    limit: Optional[str] = None
    steps: int = 0
    derivations: Optional[dict] = None


class _Stop(Exception):
    pass


class _Saturation:
    """Worklist saturation: every atom is processed once, matching each
    rule anchored at that atom with the rest of the body drawn from the
    current set, so every body match is found exactly when its last atom
    is processed.  Replacement maps from EGD matches stay active: a new
    map sweeps the whole current set, and every later atom passes through
    all active maps."""

    def __init__(self, rules: RuleSet, limits: ChaseLimits, include_eq_star: bool):
        self.limits = limits
        self.atoms = AtomSet()
        self.queue: deque[Atom] = deque()
        self.derivations: dict[Atom, tuple] = {}
        self.maps: list[tuple[Term, Term, int, tuple]] = []
        self.map_seen: set[tuple[Term, Term]] = set()
        self.compiled = []
        self.index: dict = {}
        self.witness: Optional[tuple[Atom, Term]] = None
        self.stop_reason: Optional[str] = None
        self.ci = critical_instance(rules, include_eq_star)
        for idx, rule in enumerate(rules):
            if type(rule) is TGD:
                sk = skolemise(rule, rule_id=f"r{idx}")
                entry = ("tgd", idx, rule, sk.head, set())
            else:
                entry = ("egd", idx, rule, None, set())
            self.compiled.append(entry)
            for pos, atom in enumerate(rule.body):
                self.index.setdefault(atom.predicate, []).append((entry, pos))

    def _add(self, atom: Atom, deriv: tuple) -> None:
        if not self.atoms.add(atom):
            return
        self.derivations[atom] = deriv
        self.queue.append(atom)
        for t in atom.args:
            if t.cyclic:
                self.witness = (atom, t)
                self.stop_reason = CYCLIC
                raise _Stop()
        lim = self.limits
        if lim.max_atoms is not None and len(self.atoms) > lim.max_atoms:
            self.stop_reason = "max_atoms"
            raise _Stop()
        if lim.max_term_depth is not None and any(
            t.depth > lim.max_term_depth for t in atom.args
        ):
            self.stop_reason = "max_term_depth"
            raise _Stop()

    def _anchored(self, body: Sequence[Atom], pos: int, atom: Atom) -> Iterator[dict]:
        binding: dict = {}
        for v, t in zip(body[pos].args, atom.args):
            bound = binding.get(v)
            if bound is None:
                binding[v] = t
            elif bound != t:
                return
        rest = body[:pos] + body[pos + 1 :]
        yield from match_conjunction(rest, self.atoms, init=binding)

    def _fire_tgd(self, entry, binding: dict) -> None:
        _, idx, rule, sk_head, fired = entry
        key = tuple(binding[v] for v in rule.universals)
        if key in fired:
            return
        fired.add(key)
        sigma = dict(binding)
        body_instance = tuple(
            Atom(a.predicate, [sigma[v] for v in a.args]) for a in rule.body
        )
        sig_items = tuple(sigma[v] for v in rule.universals)
        for head_atom in sk_head:
            self._add(
                apply_syntactic(head_atom, sigma),
                ("tgd", idx, sig_items, body_instance),
            )

    def _fire_egd(self, entry, binding: dict) -> None:
        _, idx, rule, _, fired = entry
        key = tuple(binding[v] for v in rule.universals)
        if key in fired:
            return
        fired.add(key)
        sigma = dict(binding)
        tx, ty = sigma[rule.x], sigma[rule.y]
        if tx == ty:
            return
        body_instance = tuple(
            Atom(a.predicate, [sigma[v] for v in a.args]) for a in rule.body
        )
        sig_items = tuple(sigma[v] for v in rule.universals)
        pairs = []
        if tx.depth <= ty.depth:
            pairs.append((ty, tx))
        if ty.depth <= tx.depth:
            pairs.append((tx, ty))
        for frm, to in pairs:
            if (frm, to) in self.map_seen:
                continue
            self.map_seen.add((frm, to))
            self.maps.append((frm, to, idx, (sig_items, body_instance)))
            for existing in list(self.atoms):
                img = Atom(
                    existing.predicate,
                    [to if t == frm else t for t in existing.args],
                )
                if img != existing:
                    self._add(img, ("egd", idx, sig_items, existing, frm, to))

    def _process(self, atom: Atom) -> None:
        for frm, to, idx, (sig_items, _body) in list(self.maps):
            img = Atom(atom.predicate, [to if t == frm else t for t in atom.args])
            if img != atom:
                self._add(img, ("egd", idx, sig_items, atom, frm, to))
        for entry, pos in self.index.get(atom.predicate, ()):
            for binding in self._anchored(entry[2].body, pos, atom):
                if entry[0] == "tgd":
                    self._fire_tgd(entry, binding)
                else:
                    self._fire_egd(entry, binding)

    def run(self) -> SaturationOutcome:
        deadline = None
        if self.limits.wall_clock_ms is not None:
            deadline = time.monotonic() + self.limits.wall_clock_ms / 1000.0
        try:
            for fact in self.ci:
                self._add(fact, ("ci",))
            while self.queue:
                if deadline is not None and time.monotonic() > deadline:
                    self.stop_reason = "wall_clock_ms"
                    raise _Stop()
                self._process(self.queue.popleft())
        except _Stop:
            steps = len(self.atoms) - len(self.ci)
            if self.stop_reason == CYCLIC:
                atom, term = self.witness
                return SaturationOutcome(
                    CYCLIC, self.atoms, atom, term,
                    steps=steps, derivations=self.derivations,
                )
            return SaturationOutcome(
                LIMIT, self.atoms, limit=self.stop_reason,
                steps=steps, derivations=self.derivations,
            )
        return SaturationOutcome(
            COMPLETED, self.atoms,
            steps=len(self.atoms) - len(self.ci), derivations=self.derivations,
        )


def emfa_set(
    rules: RuleSet,
    limits: ChaseLimits = ChaseLimits(),
    include_eq_star: bool = False,
) -> SaturationOutcome:
    """Saturate the closure from the critical instance, halting early on
    the first cyclic term.  Without limits the computation still halts:
    atoms free of cyclic terms over a finite signature are finitely many."""
    return _Saturation(rules, limits, include_eq_star).run()


@dataclass
class CheckReport:
    notion: str
    verdict: str  # acyclic | cyclic | limit-exceeded
    set_size: int
    elapsed_ms: float
    steps: int
    witness_atom: Optional[Atom] = None
    witness_term: Optional[Term] = None
    limit: Optional[str] = None
    derivation: Optional[tuple] = None

    def to_json(self, timing: bool = True) -> dict:
        out: dict = {"notion": self.notion, "verdict": self.verdict}
        if self.witness_atom is not None:
            out["witness"] = {
                "atom": str(self.witness_atom),
                "term": str(self.witness_term),
            }
        out["set_size"] = self.set_size
        if timing:
            out["elapsed_ms"] = round(self.elapsed_ms, 3)
        out["steps"] = self.steps
        if self.limit is not None:
            out["limit"] = self.limit
        return out


def _witness_chain(outcome: SaturationOutcome) -> Optional[tuple]:
    """The derivation of the witness atom back to the critical instance,
    oldest step first."""
    if outcome.witness_atom is None or outcome.derivations is None:
        return None
    chain: list[tuple] = []
    seen: set[Atom] = set()

    def walk(atom: Atom) -> None:
        if atom in seen:
            return
        seen.add(atom)
        record = outcome.derivations.get(atom)
        if record is None or record[0] == "ci":
            return
        if record[0] == "tgd":
            _, idx, _sig, body_instance = record
            for parent in body_instance:
                walk(parent)
            chain.append(("tgd", idx, str(atom)))
        else:
            _, idx, _sig, source, frm, to = record
            walk(source)
            chain.append(("egd", idx, str(atom), f"{frm}->{to}"))

    walk(outcome.witness_atom)
    return tuple(chain)


def _report(notion: str, outcome: SaturationOutcome, elapsed_ms: float) -> CheckReport:
    verdict = {
        COMPLETED: ACYCLIC_VERDICT,
        CYCLIC: CYCLIC_VERDICT,
        LIMIT: LIMIT_VERDICT,
    }[outcome.status]
    return CheckReport(
        notion=notion,
        verdict=verdict,
        set_size=len(outcome.atoms),
        elapsed_ms=elapsed_ms,
        steps=outcome.steps,
        witness_atom=outcome.witness_atom,
        witness_term=outcome.witness_term,
        limit=outcome.limit,
        derivation=_witness_chain(outcome),
    )


def is_emfa(
    rules: RuleSet,
    limits: ChaseLimits = ChaseLimits(),
    include_eq_star: bool = False,
    notion: str = "emfa",
) -> CheckReport:
    t0 = time.perf_counter()
    outcome = emfa_set(rules, limits, include_eq_star)
    return _report(notion, outcome, (time.perf_counter() - t0) * 1000.0)


def is_mfa(
    rules: Union[RuleSet, AxiomatisedRuleSet],
    limits: ChaseLimits = ChaseLimits(),
    notion: str = "mfa",
) -> CheckReport:
    """The equality-free special case; rejects rule sets with equality."""
    if isinstance(rules, AxiomatisedRuleSet):
        rules = rules.rules
    if rules.egds():
        raise ValueError("this check is defined for equality-free rule sets only")
    return is_emfa(rules, limits, notion=notion)


def check_pipeline(
    rules: RuleSet,
    limits: ChaseLimits = ChaseLimits(),
    sing_cap: int = 0,
) -> list[CheckReport]:
    """Run the direct check, the check over the standard axiomatisation,
    and the check over the canonical singularisation; optionally over up
    to sing_cap enumerated singularisations as well."""
    reports = [is_emfa(rules, limits)]
    reports.append(is_mfa(standard_axiomatisation(rules), limits, notion="mfa-st"))
    reports.append(is_mfa(canonical_singularisation(rules), limits, notion="mfa-sing"))
    if sing_cap:
        for axr in itertools.islice(singularisations(rules), sing_cap):
            reports.append(is_mfa(axr, limits, notion="mfa-sing-all"))
    return reports
