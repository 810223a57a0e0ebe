from __future__ import annotations

import random

import pytest

from htntutor.domain import Axiom
from htntutor.errors import MalformedFactError, SafetyError, SaturationOverflowError
from htntutor.facts import (
    Fact,
    INFERRED,
    Negated,
    Pattern,
    Positive,
    Test,
    WorkingMemory,
    check_safety,
    match,
    saturate,
)
from htntutor.values import Int, Ratio, Sym, Var


def wm_of(*facts):
    return WorkingMemory.from_facts(facts)


def test_assert_is_idempotent():
    wm = WorkingMemory()
    f = Fact("field", (Sym("addFraction"), Sym("x")))
    wm1 = wm.assert_fact(f)
    wm2 = wm1.assert_fact(f)
    assert len(wm1) == 1 and len(wm2) == 1
    assert wm1 == wm2


def test_assert_rejects_non_ground():
    with pytest.raises(MalformedFactError):
        WorkingMemory().assert_fact(Fact("p", (Var("x"),)))


def test_retract():
    f = Fact("p", (Int(1),))
    g = Fact("q", (Int(2),))
    wm = wm_of(f, g)
    assert wm.retract_fact(f).facts() == [g]
    empty = WorkingMemory()
    assert empty.retract_fact(f) == empty  # absent: no-op
    assert wm_of(f).retract_fact(f).facts() == []


def test_match_enumerates_deterministically():
    wm = wm_of(Fact("den", (Sym("f2"), Int(4))), Fact("den", (Sym("f1"), Int(2))))
    conds = [Positive(Pattern("den", (Var("f"), Var("d"))))]
    got = list(match(wm, conds))
    assert got == [{"f": Sym("f1"), "d": Int(2)}, {"f": Sym("f2"), "d": Int(4)}]


def test_match_with_test_condition():
    wm = wm_of(Fact("den", (Sym("f1"), Int(2))), Fact("den", (Sym("f2"), Int(4))))
    conds = [Positive(Pattern("den", (Var("f"), Var("d")))), Test(">", Var("d"), Int(2))]
    got = list(match(wm, conds))
    assert got == [{"f": Sym("f2"), "d": Int(4)}]


def test_match_empty_conditions_yields_seed():
    wm = wm_of(Fact("p", ()))
    assert list(match(wm, [], {"x": Int(1)})) == [{"x": Int(1)}]
    assert list(match(wm, [])) == [{}]


def test_match_ground_pattern_iff_present():
    f = Fact("p", (Int(1), Sym("a")))
    conds = [Positive(Pattern("p", (Int(1), Sym("a"))))]
    assert list(match(wm_of(f), conds)) == [{}]
    assert list(match(WorkingMemory(), conds)) == []


def test_negation_as_failure():
    wm = wm_of(Fact("den", (Sym("f1"), Int(2))))
    assert list(match(wm, [Negated(Pattern("den", (Sym("f3"), Int(2))))])) == [{}]
    assert list(match(wm, [Negated(Pattern("den", (Sym("f1"), Int(2))))])) == []


def test_safety_check_rejects_unbound_negation():
    conds = [Negated(Pattern("den", (Sym("f3"), Var("d"))))]
    with pytest.raises(SafetyError):
        check_safety(conds)
    # bound by an earlier positive: fine
    check_safety([Positive(Pattern("den", (Var("f"), Var("d")))), *conds])


def test_safety_check_rejects_unbound_test():
    with pytest.raises(SafetyError):
        check_safety([Test(">", Var("d"), Int(0))])
    check_safety([Test(">", Var("d"), Int(0))], initially_bound={"d"})


MASTERY_AXIOM = Axiom(
    Pattern("mastery", (Var("s"), Sym("high"))),
    (Positive(Pattern("pMastery", (Var("s"), Var("p")))), Test(">=", Var("p"), Ratio(4, 5))),
)


def test_saturate_single_rule():
    # hand check: 9/10 >= 4/5, so the head fires once
    wm = wm_of(Fact("pMastery", (Sym("logProduct"), Ratio(9, 10))))
    out = saturate(wm, [MASTERY_AXIOM])
    assert out.has(Fact("mastery", (Sym("logProduct"), Sym("high"))))
    assert len(out) == 2
    [derived] = out.facts_for("mastery")
    assert derived.provenance == INFERRED


def test_saturate_no_axioms_is_identity():
    wm = wm_of(Fact("p", ()))
    assert saturate(wm, []) == wm


def chain_axioms():
    a_from_b = Axiom(Pattern("a", ()), (Positive(Pattern("b", ())),))
    b_from_c = Axiom(Pattern("b", ()), (Positive(Pattern("c", ())),))
    return [a_from_b, b_from_c]


def test_saturate_chains_through_rounds():
    out = saturate(wm_of(Fact("c", ())), chain_axioms())
    assert out.has(Fact("a", ())) and out.has(Fact("b", ())) and len(out) == 3


def test_saturate_is_monotone_idempotent_and_order_independent():
    wm = wm_of(Fact("c", ()), Fact("pMastery", (Sym("s1"), Ratio(9, 10))))
    axioms = chain_axioms() + [MASTERY_AXIOM]
    once = saturate(wm, axioms)
    assert all(once.has(f) for f in wm.facts())  # monotone
    assert saturate(once, axioms) == once  # idempotent
    rng = random.Random(7)
    for _ in range(10):
        perm = axioms[:]
        rng.shuffle(perm)
        assert saturate(wm, perm) == once  # order independent


def test_saturate_overflow_guard():
    wm = wm_of(Fact("c", ()))
    with pytest.raises(SaturationOverflowError):
        saturate(wm, chain_axioms(), fact_ceiling=1)


def test_without_inferred_drops_only_derived():
    out = saturate(wm_of(Fact("c", ())), chain_axioms())
    core = out.without_inferred()
    assert core.facts() == [Fact("c", ())]


def test_assert_upgrades_inferred_to_asserted():
    out = saturate(wm_of(Fact("c", ())), chain_axioms())
    upgraded = out.assert_fact(Fact("b", ()))
    assert upgraded.without_inferred().has(Fact("b", ()))
