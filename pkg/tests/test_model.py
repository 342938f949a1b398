import random

import pytest

from conftest import random_system
from prisyn.boolexpr import TRUE
from prisyn.model import (SHARP, CircularPriorityError, Component, ModelError,
                          PartialConfiguration, PrioritySet, System,
                          Transition, closure_and_validate, parse_system,
                          participants, split_alphabet, system_to_text)

DOC = """
// a two-component handshake
system {
  alphabet go stop tick;
  component left {
    locations idle busy;
    vars flag;
    init idle flag=0;
    on go from idle to busy set flag:=1;
    on stop from busy to idle when flag;
  }
  component right {
    locations ready;
    init ready;
    on go from ready to ready;
    on tick from ready to ready;
  }
  priority tick < go;
  risk { left@busy flag=1 }
}
"""


def test_parse_basics():
    s = parse_system(DOC)
    assert s.alphabet == ("go", "stop", "tick")
    assert [c.name for c in s.components] == ["left", "right"]
    left = s.components[0]
    assert left.locations == ("idle", "busy")
    assert left.variables == ("flag",)
    assert left.initial_valuation == {"flag": False}
    go = left.transitions_from("idle", "go")[0]
    assert go.destination == "busy"
    assert dict(go.update)["flag"] == ("const", True)
    assert s.priorities.pairs == (("tick", "go"),)
    assert s.risk_states[0].constraints == (("left", "busy", (("flag", True),)),)


def test_round_trip():
    s = parse_system(DOC)
    assert parse_system(system_to_text(s)) == s


def test_round_trip_random(rng):
    for _ in range(50):
        s = random_system(rng, with_risk=True)
        assert parse_system(system_to_text(s)) == s


@pytest.mark.parametrize("mutation,message", [
    ("alphabet go stop;", "undeclared interaction"),     # tick undeclared
    ("init lost flag=0;", "initial location"),
    ("locations idle idle busy;", "duplicate locations"),
    ("priority tick < tock;", "undeclared interaction"),
    ("risk { left@gone flag=1 }", "risk location"),
])
def test_validation_errors(mutation, message):
    broken = {
        "alphabet go stop;": DOC.replace("alphabet go stop tick;", mutation),
        "init lost flag=0;": DOC.replace("init idle flag=0;", mutation),
        "locations idle idle busy;": DOC.replace("locations idle busy;", mutation),
        "priority tick < tock;": DOC.replace("priority tick < go;", mutation),
        "risk { left@gone flag=1 }": DOC.replace("risk { left@busy flag=1 }", mutation),
    }[mutation]
    with pytest.raises(ModelError, match=message):
        parse_system(broken)


def test_unused_alphabet_letter_rejected():
    with pytest.raises(ModelError, match="not used"):
        parse_system(DOC.replace("alphabet go stop tick;",
                                 "alphabet go stop tick spare;"))


def test_priority_closure():
    p = PrioritySet((("a", "b"), ("b", "c")))
    assert ("a", "c") in p.closure()


def test_priority_cycle_rejected():
    with pytest.raises(CircularPriorityError):
        closure_and_validate(PrioritySet((("a", "b"), ("b", "c"), ("c", "a"))))
    with pytest.raises(CircularPriorityError):
        closure_and_validate(PrioritySet((("a", "a"),)))


def test_priority_set_dedup_and_union():
    p = PrioritySet((("a", "b"), ("a", "b")))
    assert p.pairs == (("a", "b"),)
    assert p.union([("b", "c")]).pairs == (("a", "b"), ("b", "c"))


def test_participants():
    s = parse_system(DOC)
    assert participants(s, "go") == {0, 1}
    assert participants(s, "stop") == {0}
    with pytest.raises(ModelError):
        participants(s, "nope")


def test_split_alphabet():
    s = parse_system(DOC)
    local1, local2, shared = split_alphabet(s, {0})
    assert local1 == {"stop"}
    assert local2 == {"tick"}
    assert shared == {"go"}
    with pytest.raises(ModelError):
        split_alphabet(s, {0, 1})    # not a strict subset


def test_with_priorities_validates():
    s = parse_system(DOC)
    s2 = s.with_priorities([("stop", "tick")])
    assert ("stop", "tick") in s2.priorities.pairs
    with pytest.raises(CircularPriorityError):
        s.with_priorities([("go", "tick")])   # closes a cycle with tick < go


def test_sharp_is_reserved_but_parseable():
    assert SHARP == "#"
