import itertools
import random

import pytest

from eqchase import (
    EGD,
    TGD,
    Atom,
    AtomSet,
    ChaseLimits,
    Constant,
    Entailed,
    Functional,
    LimitExceeded,
    NotEntailed,
    Ontology,
    Predicate,
    RuleSet,
    SkolemSymbol,
    Terminated,
    Unknown,
    Variable,
    apply,
    chase,
    entails,
    find_applicable,
    homomorphism,
    is_applicable,
    satisfies,
    standard_axiomatisation,
)
from corpus import random_ontology
from rulesets import facts, ontology, query, rules

a, b = Constant("a"), Constant("b")
X, Y, Z = Variable("X"), Variable("Y"), Variable("Z")
A1, B1, R2 = Predicate("A", 1), Predicate("B", 1), Predicate("R", 2)
FW = SkolemSymbol("f_W", 1)
fw_a = Functional(FW, [a])

RULE7, RULE8 = rules("thm2")


def test_is_applicable_egd_trivial_equality():
    aset = AtomSet([Atom(R2, [a, a])])
    assert not is_applicable(RULE8, {X: a, Y: a, Z: a}, aset)


def test_is_applicable_tgd_open_head():
    assert is_applicable(RULE7, {X: a}, AtomSet([Atom(A1, [a])]))


def test_is_applicable_tgd_blocked_head():
    aset = AtomSet([Atom(A1, [a]), Atom(R2, [a, b]), Atom(B1, [b])])
    assert not is_applicable(RULE7, {X: a}, aset)


def test_is_applicable_domain_mismatch():
    with pytest.raises(ValueError):
        is_applicable(RULE7, {}, AtomSet([Atom(A1, [a])]))
    with pytest.raises(ValueError):
        is_applicable(RULE7, {X: a, Variable("W"): a}, AtomSet([Atom(A1, [a])]))


def test_apply_tgd_adds_skolemised_head():
    out = apply(RULE7, {X: a}, AtomSet([Atom(A1, [a])]))
    assert out == {Atom(A1, [a]), Atom(R2, [a, fw_a]), Atom(B1, [fw_a])}


def test_apply_egd_merges_deeper_into_shallower():
    rule = EGD([Atom(R2, [X, Y])], X, Y)
    aset = AtomSet([Atom(R2, [a, fw_a]), Atom(B1, [fw_a])])
    out = apply(rule, {X: a, Y: fw_a}, aset)
    assert out == {Atom(R2, [a, a]), Atom(B1, [a])}


def test_apply_egd_equal_depth_deterministic():
    rule = EGD([Atom(R2, [X, Y])], X, Y)
    aset = AtomSet([Atom(R2, [a, b])])
    out = apply(rule, {X: a, Y: b}, aset)
    # the tie-break must eliminate exactly one of the two constants
    assert out in ({Atom(R2, [a, a])}, {Atom(R2, [b, b])})
    again = apply(rule, {X: a, Y: b}, AtomSet([Atom(R2, [a, b])]))
    assert out == again


def test_apply_requires_applicability():
    with pytest.raises(ValueError):
        apply(RULE8, {X: a, Y: a, Z: a}, AtomSet([Atom(R2, [a, a])]))


def test_find_applicable_enumeration():
    rs = rules("thm2")
    only7 = RuleSet([RULE7])
    only8 = RuleSet([RULE8])
    assert len(list(find_applicable(only7, AtomSet([Atom(A1, [a])])))) == 1
    assert list(find_applicable(only8, AtomSet([Atom(A1, [a])]))) == []
    pairs = list(find_applicable(rs, AtomSet([Atom(A1, [a]), Atom(R2, [a, a])])))
    assert [(r, s[X]) for r, s in pairs] == [(RULE7, a)]


def test_chase_example_terminates_with_expected_set():
    out = chase(ontology("thm2", "A(a) ."))
    assert isinstance(out, Terminated)
    assert out.result == {Atom(A1, [a]), Atom(R2, [a, fw_a]), Atom(B1, [fw_a])}


def test_chase_theorem4_all_terms_depth_one():
    out = chase(ontology("thm4", "B(a) .\nC(a) ."))
    assert isinstance(out, Terminated)
    assert out.result.max_term_depth() == 1


def test_chase_standard_axiomatisation_diverges():
    st = standard_axiomatisation(rules("thm2"))
    o = Ontology(st.rules, facts("A(a) .\nR(a,a) ."))
    for cap in (4, 6, 8):
        out = chase(o, ChaseLimits(max_term_depth=cap, max_steps=500_000))
        assert isinstance(out, LimitExceeded)
        assert out.limit == "max_term_depth"
        assert out.partial.max_term_depth() == cap


def test_chase_rejects_invalid_ontology():
    from eqchase import InvalidInputError

    bad = Ontology(rules("thm2"), (Atom(Predicate("Nope", 1), [a]),))
    with pytest.raises(InvalidInputError):
        chase(bad)


def test_satisfies_examples():
    sat = AtomSet([Atom(A1, [a]), Atom(R2, [a, b]), Atom(B1, [b])])
    assert satisfies(sat, RULE7)
    assert not satisfies(AtomSet([Atom(A1, [a])]), RULE7)
    assert satisfies(AtomSet(), RULE7)
    assert satisfies(AtomSet(), RULE8)


def test_egd_application_eliminates_term_everywhere():
    rule = EGD([Atom(R2, [X, Y])], X, Y)
    aset = AtomSet(
        [Atom(R2, [a, fw_a]), Atom(B1, [fw_a]), Atom(R2, [fw_a, b])]
    )
    out = apply(rule, {X: a, Y: fw_a}, aset)
    assert all(fw_a not in atom.args for atom in out)


def _hom_oracle(body, aset):
    """Exhaustive assignment enumeration over the set's terms."""
    variables = list({v: None for atom in body for v in atom.variables()})
    terms = list(aset.terms())
    for combo in itertools.product(terms, repeat=len(variables)):
        sigma = dict(zip(variables, combo))
        if all(
            Atom(atom.predicate, [sigma[v] for v in atom.args]) in aset
            for atom in body
        ):
            return True
    return False


def test_homomorphism_single_atom_identity():
    aset = AtomSet([Atom(R2, [a, b])])
    w = homomorphism((Atom(R2, [X, Y]),), aset)
    assert w == {X: a, Y: b}


def test_homomorphism_none_on_disjoint_predicates():
    assert homomorphism((Atom(B1, [X]),), AtomSet([Atom(A1, [a])])) is None


def test_homomorphism_matches_exhaustive_oracle():
    rng = random.Random(21)
    preds = [A1, B1, R2]
    terms = [a, b, fw_a, Functional(FW, [b])]
    for _ in range(300):
        aset = AtomSet(
            Atom(p, [rng.choice(terms) for _ in range(p.arity)])
            for p in rng.choices(preds, k=rng.randint(1, 6))
        )
        body = [
            Atom(p, [rng.choice([X, Y, Z]) for _ in range(p.arity)])
            for p in rng.choices(preds, k=rng.randint(1, 3))
        ]
        found = homomorphism(body, aset)
        assert (found is not None) == _hom_oracle(body, aset)
        if found is not None:
            for atom in body:
                assert Atom(atom.predicate, [found[v] for v in atom.args]) in aset


def test_entails_positive_and_negative():
    o = ontology("thm2", "A(a) .")
    assert isinstance(
        entails(o, query("? exists X, Y . R(X,Y), B(Y) .")), Entailed
    )
    assert isinstance(entails(o, query("? exists X . B(X), A(X) .")), NotEntailed)


def test_entails_fact_shape_trivially():
    o = ontology("thm2", "A(a) .\nR(a,a) .")
    assert isinstance(entails(o, query("? exists X, Y . R(X,Y) .")), Entailed)


def test_entails_under_limits():
    st = standard_axiomatisation(rules("thm2"))
    o = Ontology(st.rules, facts("A(a) .\nR(a,a) ."))
    limits = ChaseLimits(max_term_depth=5, max_steps=100_000)
    # the partial state already contains a witness for this query
    assert isinstance(entails(o, query("? exists X, Y . R(X,Y), B(Y) ."), limits), Entailed)
    # no D-atoms ever appear, but the run was truncated, so: unknown
    o2 = Ontology(
        RuleSet(list(st.rules) + list(rules("thm2")[0:0])
                + [TGD([Atom(Predicate("D", 1), [X])], (), [Atom(A1, [X])])]),
        facts("A(a) .\nR(a,a) ."),
    )
    v = entails(o2, query("? exists X . D(X) ."), limits)
    assert isinstance(v, Unknown) and v.limit == "max_term_depth"


def test_terminated_chase_satisfies_every_rule():
    rng = random.Random(5)
    checked = 0
    for _ in range(60):
        o = random_ontology(rng)
        out = chase(o, ChaseLimits(max_steps=3000, max_term_depth=6, max_atoms=4000))
        if isinstance(out, Terminated):
            checked += 1
            for rule in o.rules:
                assert satisfies(out.result, rule)
    assert checked >= 20


def test_fairness_on_terminating_paper_sets():
    for name, ftext in [
        ("thm2", "A(a) .\nR(a,a) ."),
        ("thm2", "A(a) .\nA(b) .\nR(a,b) ."),
        ("thm4", "B(a) .\nC(a) .\nR(a,b) .\nB(b) ."),
        ("ex3", "A(a) ."),
        ("ex4", "A(a) .\nB(b) ."),
    ]:
        out = chase(ontology(name, ftext))
        assert isinstance(out, Terminated)
        assert list(find_applicable(rules(name), out.result)) == []


def test_chase_determinism_same_seed():
    o = ontology("thm2", "A(a) .\nA(b) .\nR(a,b) .\nR(b,a) .")
    runs = [chase(o, seed=3) for _ in range(2)]
    assert [sorted(str(x) for x in r.result) for r in runs][0] == [
        sorted(str(x) for x in r.result) for r in runs
    ][1]
    assert runs[0].steps == runs[1].steps


def test_chase_on_step_observes_each_state():
    states = []
    o = ontology("thm2", "A(a) .\nR(a,a) .")
    chase(o, on_step=lambda i, rule, sigma, aset: states.append(aset.to_frozenset()))
    assert len(states) >= 2
    assert states[-1] == chase(o).result.to_frozenset()
