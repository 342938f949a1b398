"""Compositional priority synthesis through assumption learning.

The system is split into two sides. Behavioral safety against a risk DFA R
decomposes into two subtasks mediated by an assumption DFA A:

  (a)  L(S1+) ∩ L(R) ∩ L(A) = ∅
  (b)  L(S2+) ∩ L(A̅)        = ∅

where Si+ extends side i with a stutter component standing in for the other
side. A is learned with L* against L(S2+). Per conjecture, the fault
pipeline runs on both subtasks; the two CNFs are solved jointly over a
shared variable space so the local priority sets cannot conflict.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import permutations

from .model import (ModelError, PrioritySet, System, closure_and_validate,
                    split_alphabet)
from .monitor import DFA, complement, product_with_monitor, stutter_component
from . import encoder, explicit, game, resolver


# --------------------------------------------------------------------------
# L* with an observation table

class ObservationTable:
    """Classic L*: prefixes S, suffixes E, membership-filled table.

    Counterexamples are processed by adding every prefix; the table is
    re-closed and made consistent before each conjecture.
    """

    def __init__(self, alphabet, membership):
        self.alphabet = tuple(dict.fromkeys(alphabet))
        self.membership = membership
        self.S = [()]
        self.E = [()]
        self.T = {}

    def _query(self, w):
        if w not in self.T:
            self.T[w] = bool(self.membership(w))
        return self.T[w]

    def row(self, s):
        return tuple(self._query(s + e) for e in self.E)

    def stabilize(self):
        while True:
            rows = {self.row(s) for s in self.S}
            ext = next((s + (a,) for s in self.S for a in self.alphabet
                        if self.row(s + (a,)) not in rows), None)
            if ext is not None:
                self.S.append(ext)
                continue
            clash = None
            for i, s1 in enumerate(self.S):
                for s2 in self.S[i + 1:]:
                    if self.row(s1) != self.row(s2):
                        continue
                    for a in self.alphabet:
                        if self.row(s1 + (a,)) != self.row(s2 + (a,)):
                            clash = next((a,) + e for e in self.E
                                         if self._query(s1 + (a,) + e)
                                         != self._query(s2 + (a,) + e))
                            break
                    if clash:
                        break
                if clash:
                    break
            if clash:
                self.E.append(clash)
                continue
            return

    def conjecture(self, name: str = "assumption") -> DFA:
        self.stabilize()
        reps, order = {}, []
        for s in self.S:
            r = self.row(s)
            if r not in reps:
                reps[r] = len(order)
                order.append(s)
        trans = {}
        for i, s in enumerate(order):
            for a in self.alphabet:
                trans[(f"q{i}", a)] = f"q{reps[self.row(s + (a,))]}"
        states = tuple(f"q{i}" for i in range(len(order)))
        accepting = frozenset(f"q{i}" for i, s in enumerate(order)
                              if self.row(s)[0])            # E[0] is ε
        return DFA(states, frozenset(self.alphabet), trans,
                   f"q{reps[self.row(())]}", accepting, name)

    def refine(self, ce):
        ce = tuple(ce)
        for k in range(1, len(ce) + 1):
            if ce[:k] not in self.S:
                self.S.append(ce[:k])


class ConjectureCapExceeded(RuntimeError):
    pass


def lstar(membership, equivalence, alphabet, max_conjectures: int = 50) -> DFA:
    """Drive the table against a teacher. `equivalence` returns None on
    agreement or a counterexample word. Conjecture sizes must strictly grow
    across refinements (asserted)."""
    table = ObservationTable(alphabet, membership)
    prev = None
    for _ in range(max_conjectures):
        a = table.conjecture()
        if prev is not None and len(a.states) <= prev:
            raise AssertionError("conjecture sizes must strictly increase")
        prev = len(a.states)
        ce = equivalence(a)
        if ce is None:
            return a
        table.refine(ce)
    raise ConjectureCapExceeded(f"no equivalence after {max_conjectures} conjectures")


# --------------------------------------------------------------------------
# Problem setup

@dataclass
class AGProblem:
    system: System
    split: tuple              # component indices forming side 1
    risk: DFA
    sigma1: frozenset = field(init=False)
    sigma2: frozenset = field(init=False)
    sigma12: frozenset = field(init=False)
    s1plus: System = field(init=False)
    s2plus: System = field(init=False)

    def __post_init__(self):
        s = self.system
        indices = tuple(sorted(i if isinstance(i, int) else s.component_index(i)
                               for i in self.split))
        object.__setattr__(self, "split", indices)
        s1, s2, s12 = split_alphabet(s, set(indices))
        self.sigma1, self.sigma2, self.sigma12 = map(frozenset, (s1, s2, s12))
        for low, high in s.priorities:
            if high in self.sigma12:
                raise ModelError(
                    f"priority {low!r} < {high!r} puts a shared interaction on "
                    "the higher side; the assume-guarantee rule is unsound for "
                    "such inputs")
        bad = self.risk.alphabet - set(s.alphabet)
        if bad:
            raise ModelError(f"risk letters {sorted(bad)} not in the alphabet")
        object.__setattr__(self, "risk", replace(self.risk, name="risk_mon"))
        self.s1plus = self._side(indices, self.sigma2, "d1")
        rest = tuple(i for i in range(len(s.components)) if i not in indices)
        self.s2plus = self._side(rest, self.sigma1, "d2")

    def _side(self, indices, stutter_letters, dname) -> System:
        s = self.system
        comps = tuple(s.components[i] for i in indices)
        comps += (stutter_component(dname, stutter_letters),)
        names = {c.name for c in comps}
        local = self.sigma1 if dname == "d1" else self.sigma2
        pairs = tuple(p for p in s.priorities if p[1] in local)
        risks = tuple(r for r in s.risk_states
                      if all(cname in names for cname, _, _ in r.constraints))
        return System(comps, s.alphabet, PrioritySet(pairs), risks)

    def member2(self, word) -> bool:
        """Membership in L(S2+), the L* target language."""
        return explicit.member(self.s2plus, word)


def symbolic_member(es: encoder.EncodedSystem, word) -> bool:
    """Stepwise symbolic word membership; agrees with the explicit engine."""
    m = es.manager
    unprimed, primed = game._names(es)
    cur = game.initial_cfg(es)
    for sigma in word:
        src = m.apply("and", cur, es.fire(sigma))
        if src.is_false:
            return False
        img = m.and_exists(src, es.step(sigma), unprimed)
        cur = m.substitute(img, primed, unprimed)
    return not cur.is_false


# --------------------------------------------------------------------------
# The assume-guarantee rule

@dataclass
class EqOutcome:
    kind: str                 # "holds", "refine", or "fail"
    ce: tuple = ()
    origin: str = ""          # "a" or "b"


def equivalence_check(p: AGProblem, a: DFA, p1=(), p2=()) -> EqOutcome:
    """Test conditions (a) and (b) by reachability on monitor products.

    An (a)-witness inside L(S2+) means the risk word survives on both sides:
    no assumption can rule it out, so the decomposition fails. Other
    witnesses refine the assumption.
    """
    s1 = p.s1plus.with_priorities(p1)
    es = encoder.encode(product_with_monitor(s1, [p.risk, a]))
    v = game.symbolic_verdict(es, "risk")
    if not v.safe:
        ce = tuple(v.trace)
        if p.member2(ce):
            return EqOutcome("fail", ce, "a")
        return EqOutcome("refine", ce, "a")
    s2 = p.s2plus.with_priorities(p2)
    es = encoder.encode(product_with_monitor(s2, [complement(a)]))
    v = game.symbolic_verdict(es, "risk")
    if not v.safe:
        return EqOutcome("refine", tuple(v.trace), "b")
    return EqOutcome("holds")


def _condition_b_ce(p: AGProblem, a: DFA):
    """A word of L(S2+) \\ L(A), or None when condition (b) holds."""
    es = encoder.encode(product_with_monitor(p.s2plus, [complement(a)]))
    v = game.symbolic_verdict(es, "risk")
    return None if v.safe else tuple(v.trace)


def _split_pairs(p: AGProblem, pairs):
    p1 = [pr for pr in pairs if pr[1] in p.sigma1]
    p2 = [pr for pr in pairs if pr[1] in p.sigma2]
    return p1, p2


def _conjecture_synthesis(p: AGProblem, a: DFA, order, repush_depth: int = 2):
    """Fault pipelines on {S1+, R, A} and {S2+, A̅}, joined in one CNF.

    Candidates stay local: side i may only raise an interaction of Σi above
    one of Σi ∪ Σ12. Conflicts repush a candidate and replay the games, as
    in the monolithic resolver. Returns (P1, P2) or None.
    """
    allow1 = lambda low, high: high in p.sigma1 and low in p.sigma1 | p.sigma12
    allow2 = lambda low, high: high in p.sigma2 and low in p.sigma2 | p.sigma12
    ac = complement(a)
    forced = []
    for attempt in range(repush_depth + 1):
        f1, f2 = _split_pairs(p, forced)
        prods = ((product_with_monitor(p.s1plus.with_priorities(f1),
                                       [p.risk, a]), allow1),
                 (product_with_monitor(p.s2plus.with_priorities(f2),
                                       [ac]), allow2))
        cnf = resolver.CNF()
        clean = True
        for prod, allow in prods:
            es = encoder.encode(prod, order)
            attr = game.attractor(es, game.bad_states(es, "risk"))
            try:
                faults = game.fault_transitions(es, attr)
            except game.Unsynthesizable:
                return None
            cubes = game.candidate_cubes(es, faults)
            if cubes:
                clean = False
            resolver.add_cubes(cnf, cubes, allow)
        if clean:
            return _split_pairs(p, forced)
        resolver.finish_cnf(cnf, list(p.system.priorities.pairs) + forced)
        model, conflict = resolver.solve(cnf)
        if model is not None:
            return _split_pairs(p, sorted(set(resolver.extract(cnf, model))
                                          | set(forced)))
        if attempt == repush_depth:
            return None
        pick = None
        for pair in resolver._repush_choices(cnf, conflict):
            try:
                closure_and_validate(p.system.priorities.union(forced + [pair]))
            except ModelError:
                continue
            pick = pair
            break
        if pick is None:
            return None
        forced.append(pick)
    return None


@dataclass
class AGResult:
    status: str               # "proved-safe", "success", or "fail"
    p1: list = field(default_factory=list)
    p2: list = field(default_factory=list)
    conjecture_sizes: list = field(default_factory=list)
    reason: str = ""

    def __bool__(self):
        return self.status in ("proved-safe", "success")


def ag_synthesize(p: AGProblem, max_conjectures: int = 50,
                  order="decl") -> AGResult:
    """Learn assumptions until the rule closes or fails.

    Per conjecture: conditions hold → proved safe without priorities;
    otherwise synthesize local sets jointly; if that fails, refine the
    assumption with the condition witness — unless the witness lives in
    L(S2+), in which case no assumption helps and another decomposition is
    needed.
    """
    table = ObservationTable(p.system.alphabet, p.member2)
    sizes = []
    for _ in range(max_conjectures):
        a = table.conjecture()
        if sizes and len(a.states) <= sizes[-1]:
            raise AssertionError("conjecture sizes must strictly increase")
        sizes.append(len(a.states))
        eq = equivalence_check(p, a)
        if eq.kind == "holds":
            return AGResult("proved-safe", conjecture_sizes=sizes)
        got = _conjecture_synthesis(p, a, order)
        if got is not None:
            p1, p2 = got
            return AGResult("success", p1, p2, sizes)
        if eq.kind == "refine":
            table.refine(eq.ce)
            continue
        # the (a)-witness lives in L(S2+), so it cannot leave L(A); the
        # assumption still helps if it overshoots L(S2+) on condition (b)
        ce_b = _condition_b_ce(p, a)
        if ce_b is None:
            return AGResult("fail", conjecture_sizes=sizes,
                            reason=f"risk word {list(eq.ce)} is realizable on "
                                   "both sides; try a different split")
        table.refine(ce_b)
    raise ConjectureCapExceeded(f"no verdict after {max_conjectures} conjectures")


def joint_safe(p: AGProblem, pairs) -> bool:
    """Oracle recheck: the undecomposed system with the joined priorities is
    risk-free against R (explicit product emptiness)."""
    s = p.system.with_priorities(pairs)
    prod = product_with_monitor(s, [p.risk])
    return bool(explicit.verdict(prod, "risk"))
