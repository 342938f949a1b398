import itertools

import pytest

from prisyn import explicit
from prisyn import generators as gen
from prisyn.aglearn import (AGProblem, ConjectureCapExceeded, EqOutcome,
                            ObservationTable, ag_synthesize, equivalence_check,
                            joint_safe, lstar, symbolic_member)
from prisyn.encoder import encode
from prisyn.model import ModelError
from prisyn.monitor import parse_dfa

RISK_RELEASE_FIRST = """
dfa {
  states q0 qbad qok;
  alphabet eat_1 release_1;
  init q0;
  accept qbad;
  q0 -eat_1-> qok;
  q0 -release_1-> qbad;
  qok -eat_1-> qok;
  qok -release_1-> qok;
  qbad -eat_1-> qbad;
  qbad -release_1-> qbad;
}
"""

RISK_B = "dfa { states q0 q1; alphabet b; init q0; accept q1; q0 -b-> q1; }"


def _words(alphabet, upto):
    for k in range(upto + 1):
        yield from itertools.product(alphabet, repeat=k)


def _brute_teacher(target, alphabet, upto=6):
    def equivalence(a):
        for w in _words(alphabet, upto):
            if a.accepts(w) != target(w):
                return w
        return None
    return equivalence


def test_lstar_learns_even_a_count():
    alphabet = ("a", "b")
    target = lambda w: w.count("a") % 2 == 0
    d = lstar(target, _brute_teacher(target, alphabet), alphabet)
    assert len(d.states) == 2
    for w in _words(alphabet, 7):
        assert d.accepts(w) == target(w)


def test_lstar_learns_suffix_language():
    alphabet = ("x", "y")
    target = lambda w: len(w) >= 2 and w[-2:] == ("x", "y")
    d = lstar(target, _brute_teacher(target, alphabet), alphabet)
    assert len(d.states) == 3
    for w in _words(alphabet, 7):
        assert d.accepts(w) == target(w)


def test_lstar_conjecture_cap():
    # a non-regular target keeps growing the table without convergence
    alphabet = ("a",)
    powers = {2 ** k for k in range(10)}
    target = lambda w: len(w) in powers
    with pytest.raises(ConjectureCapExceeded):
        lstar(target, _brute_teacher(target, alphabet, upto=40),
              alphabet, max_conjectures=3)


def test_observation_table_rows():
    t = ObservationTable(("a",), lambda w: len(w) % 2 == 0)
    t.stabilize()
    d = t.conjecture()
    assert d.accepts(()) and not d.accepts(("a",)) and d.accepts(("a", "a"))


def test_symbolic_member_agrees_with_explicit():
    s = gen.attractor_example()
    es = encode(s)
    for w in list(_words(s.alphabet[:4], 3)):
        assert symbolic_member(es, w) == explicit.member(s, list(w))


def test_problem_setup():
    p = AGProblem(gen.philosophers(2), ("phil_1", "fork_1"),
                  parse_dfa(RISK_RELEASE_FIRST))
    assert p.split == (0, 1)
    assert p.sigma1 == {"eat_1", "take_left_1"}
    assert p.sigma12 == {"release_1", "release_2",
                         "take_right_1", "take_right_2"}
    assert p.risk.name == "risk_mon"
    # each side plus a stutter stand-in for the other side
    assert [c.name for c in p.s1plus.components] == ["phil_1", "fork_1", "d1"]
    assert [c.name for c in p.s2plus.components] == ["phil_2", "fork_2", "d2"]
    assert p.s1plus.alphabet == p.system.alphabet


def test_problem_rejects_shared_high_priority():
    s = gen.shared_interaction_example().with_priorities([("b", "a")])
    with pytest.raises(ModelError, match="shared interaction on"):
        AGProblem(s, ("C1",), parse_dfa(RISK_B))


def test_problem_rejects_foreign_risk_letters():
    bad = parse_dfa("dfa { states q0 q1; alphabet zz; init q0; accept q1; }")
    with pytest.raises(ModelError, match="not in the alphabet"):
        AGProblem(gen.philosophers(2), ("phil_1", "fork_1"), bad)


def test_stutter_projection_breaks_under_shared_high_priority():
    # with b < a, the word "b" belongs to the whole system's language but
    # not to the side-1 projection: the stand-in always raises a, so b is
    # over-suppressed — exactly why such priorities are rejected up front
    s = gen.shared_interaction_example()
    sb = s.with_priorities([("b", "a")])
    assert explicit.member(sb, ["b"])
    p = AGProblem(s, ("C1",), parse_dfa(RISK_B))
    assert not explicit.member(p.s1plus.with_priorities([("b", "a")]), ["b"])


def test_ag_success_on_philosophers():
    p = AGProblem(gen.philosophers(2), ("phil_1", "fork_1"),
                  parse_dfa(RISK_RELEASE_FIRST))
    r = ag_synthesize(p)
    assert r.status == "success" and bool(r)
    assert r.p1 == [("release_1", "eat_1")]     # frozen: local suppression
    assert r.p2 == []
    assert r.conjecture_sizes == [2, 3, 5]
    assert all(b > a for a, b in zip(r.conjecture_sizes, r.conjecture_sizes[1:]))
    # undecomposed recheck: joined priorities remove the risk language
    assert joint_safe(p, r.p1 + r.p2)
    assert not joint_safe(p, [])


def test_ag_proved_safe():
    unreachable = parse_dfa(
        "dfa { states q0 q1; alphabet eat_1; init q0; accept q1; }")
    p = AGProblem(gen.philosophers(2), ("phil_1", "fork_1"), unreachable)
    r = ag_synthesize(p)
    assert r.status == "proved-safe"
    assert r.p1 == [] and r.p2 == []
    assert joint_safe(p, [])


def test_ag_fail_needs_other_split():
    # the risk word is realizable on both sides, so no assumption helps
    p = AGProblem(gen.shared_interaction_example(), ("C1",), parse_dfa(RISK_B))
    r = ag_synthesize(p)
    assert r.status == "fail" and not bool(r)
    assert "different split" in r.reason


def test_equivalence_check_outcomes():
    p = AGProblem(gen.shared_interaction_example(), ("C1",), parse_dfa(RISK_B))
    # an assumption accepting everything pushes the risk word through (a)
    full = parse_dfa(
        "dfa { states q0; alphabet b; init q0; accept q0; q0 -b-> q0; }")
    eq = equivalence_check(p, full)
    assert eq.kind == "fail" and eq.origin == "a" and eq.ce == ("b",)
    # an assumption rejecting everything breaks condition (b) instead
    empty = parse_dfa(
        "dfa { states q0; alphabet b; init q0; accept ; q0 -b-> q0; }")
    eq = equivalence_check(p, empty)
    assert eq.kind == "refine" and eq.origin == "b"


def test_ag_priorities_are_local():
    p = AGProblem(gen.philosophers(2), ("phil_1", "fork_1"),
                  parse_dfa(RISK_RELEASE_FIRST))
    r = ag_synthesize(p)
    for low, high in r.p1:
        assert high in p.sigma1 and low in p.sigma1 | p.sigma12
    for low, high in r.p2:
        assert high in p.sigma2 and low in p.sigma2 | p.sigma12
