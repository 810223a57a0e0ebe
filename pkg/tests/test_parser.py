from __future__ import annotations

import random

import pytest

from htntutor.domain import SEQUENTIAL, UNORDERED
from htntutor.errors import DomainParseError
from htntutor.parser import parse_domain, serialize_domain
from htntutor.values import Int, Ratio, Sym, Text, Var

from domaingen import random_domain

MINI = """
# a tiny but complete domain
domain mini

skill s1 "Do the step"

root top(?x)

method split top(?x) {
  pre { item(?x, ?v) }
  subtasks { leaf(?x); leaf(?x) }
  skill s1
}

operator act leaf(?x) {
  pre { item(?x, ?v) }
  action out = ?v + 1
  effects { +seen(?x); -item(?x, ?v) }
  skill s1
}
"""


def test_parse_mini_domain():
    d = parse_domain(MINI)
    assert d.name == "mini"
    assert d.skills == {"s1": "Do the step"}
    assert d.root_schema.name == "top"
    [m] = d.methods
    assert m.name == "split" and m.ordering == SEQUENTIAL and len(m.subtasks) == 2
    [o] = d.operators
    assert o.name == "act" and o.skill == "s1"
    assert o.add_effects[0].predicate == "seen"
    assert o.del_effects[0].predicate == "item"


def test_parse_terms():
    d = parse_domain("""
domain t
root r
method m r { pre { p(?x, sym, 3, -4, 1/2, "quoted text", true, false) } subtasks { leafy } }
operator op leafy { action f = 1 }
""")
    args = d.methods[0].preconditions[0].pattern.args
    assert args == (Var("x"), Sym("sym"), Int(3), Int(-4), Ratio(1, 2), Text("quoted text"),
                    __import__("htntutor.values", fromlist=["Bool"]).Bool(True),
                    __import__("htntutor.values", fromlist=["Bool"]).Bool(False))


def test_unordered_flag():
    d = parse_domain("""
domain t
root r
method m r unordered { subtasks { a; b } }
operator oa a { action f = 1 }
operator ob b { action g = 2 }
""")
    assert d.methods[0].ordering == UNORDERED


def test_empty_file_is_missing_domain_name():
    with pytest.raises(DomainParseError) as ei:
        parse_domain("")
    assert ei.value.kind == "missing-domain-name"


def test_missing_root():
    with pytest.raises(DomainParseError) as ei:
        parse_domain("domain x\noperator o t { action f = 1 }")
    assert ei.value.kind == "missing-root"


def test_duplicate_head_across_namespaces():
    text = """
domain x
root addFractions
method m1 addFractions { subtasks { addFractions } }
operator o1 addFractions { action f = 1 }
"""
    with pytest.raises(DomainParseError) as ei:
        parse_domain(text)
    assert ei.value.kind == "duplicate-head"


def test_duplicate_record_name():
    text = """
domain x
root a
method same a { subtasks { b } }
operator same b { action f = 1 }
"""
    with pytest.raises(DomainParseError) as ei:
        parse_domain(text)
    assert ei.value.kind == "duplicate-name"


def test_unknown_skill_reference():
    text = """
domain x
root a
method m a { subtasks { b } skill ghost }
operator o b { action f = 1 }
"""
    with pytest.raises(DomainParseError) as ei:
        parse_domain(text)
    assert ei.value.kind == "unknown-skill"


def test_unsafe_negation_is_a_load_error():
    text = """
domain x
root a
method m a { pre { not den(f3, ?d) } subtasks { b } }
operator o b { action f = 1 }
"""
    with pytest.raises(DomainParseError) as ei:
        parse_domain(text)
    assert ei.value.kind == "unsafe-condition"


def test_unstratified_negation():
    text = """
domain x
root a
operator o a { action f = 1 }
axiom p(?x) { pre { q(?x) } }
axiom r(?x) { pre { q(?x); not p(?x) } }
"""
    with pytest.raises(DomainParseError) as ei:
        parse_domain(text)
    assert ei.value.kind == "unstratified-negation"


def test_syntax_error_carries_position():
    with pytest.raises(DomainParseError) as ei:
        parse_domain("domain x\nroot a\nmethod m a {\n  subtasks { }\n}")
    assert ei.value.kind == "syntax"
    assert ei.value.line is not None and ei.value.column is not None


def test_axiom_head_must_be_bound_by_positives():
    text = """
domain x
root a
operator o a { action f = 1 }
axiom p(?x, ?y) { pre { q(?x) } }
"""
    with pytest.raises(DomainParseError) as ei:
        parse_domain(text)
    assert ei.value.kind == "unsafe-condition"


def test_builtin_files_reparse_canonically(fraction_domain, log_domain):
    for d in (fraction_domain, log_domain):
        text = serialize_domain(d)
        again = parse_domain(text)
        assert serialize_domain(again) == text


@pytest.mark.parametrize("seed", range(60))
def test_round_trip_identity_on_generated_domains(seed):
    d = random_domain(random.Random(seed))
    assert parse_domain(serialize_domain(d)) == d
