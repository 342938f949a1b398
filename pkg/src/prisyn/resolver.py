"""Priority synthesis: turn fault cubes into a SAT problem and solve it.

A Boolean variable stands for one priority pair ``low < high``. Clauses:
  * one candidate clause per fault cube: suppress the fired interaction
    below some other raised one;
  * unit clauses keeping the system's existing priorities;
  * antisymmetry and transitivity over every interaction that occurs in a
    candidate or existing pair, so any model is a strict partial order.

When the problem is unsatisfiable, one candidate is force-added to the
system ("repushed") and the whole game is replayed, up to a fixed depth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

from .model import SHARP, System
from . import encoder, game


@dataclass
class CNF:
    var_of: dict = field(default_factory=dict)    # (low, high) -> 1-based id
    pair_of: dict = field(default_factory=dict)   # id -> (low, high)
    clauses: list = field(default_factory=list)   # lists of signed ints
    kinds: list = field(default_factory=list)     # parallel tags
    candidate_pairs: set = field(default_factory=set)
    trivially_unsat: str = ""                     # reason, when a cube has no candidates

    def var(self, pair):
        v = self.var_of.get(pair)
        if v is None:
            v = len(self.var_of) + 1
            self.var_of[pair] = v
            self.pair_of[v] = pair
        return v

    def add(self, lits, kind):
        self.clauses.append(lits)
        self.kinds.append(kind)

    def to_dimacs(self) -> str:
        lines = [f"c {v} := {low} < {high}" for v, (low, high) in sorted(self.pair_of.items())]
        lines.append(f"p cnf {len(self.var_of)} {len(self.clauses)}")
        for c in self.clauses:
            lines.append(" ".join(map(str, c)) + " 0")
        return "\n".join(lines) + "\n"


def add_cubes(cnf: CNF, cubes, allow=None) -> None:
    """One candidate clause per (raised, fired) cube: suppress the fired
    interaction below some other raised one. `allow(low, high)` filters the
    candidate pairs; the abstraction label never takes the higher side."""
    for raised, fired in cubes:
        lits = []
        for other in sorted(raised):
            if other == fired or other == SHARP:
                continue
            if allow is not None and not allow(fired, other):
                continue
            pair = (fired, other)
            lits.append(cnf.var(pair))
            cnf.candidate_pairs.add(pair)
        if not lits:
            cnf.trivially_unsat = (f"fault cube (raised={sorted(raised)}, fired={fired!r}) "
                                   "admits no priority candidate")
        cnf.add(lits, "candidate")


def finish_cnf(cnf: CNF, existing) -> CNF:
    """Unit clauses for the existing pairs, then antisymmetry and transitivity
    over every used interaction; the transitivity pass repeats until no new
    implied pair appears, so chains through freshly created variables are
    covered too."""
    for low, high in existing:
        cnf.add([cnf.var((low, high))], "existing")
    used = sorted({x for pair in cnf.var_of for x in pair})
    emitted = set()
    changed = True
    while changed:
        changed = False
        for a, b, c in permutations(used, 3):
            if ((a, b) in cnf.var_of and (b, c) in cnf.var_of
                    and (a, b, c) not in emitted):
                emitted.add((a, b, c))
                cnf.add([-cnf.var_of[(a, b)], -cnf.var_of[(b, c)],
                         cnf.var((a, c))], "order")
                changed = True
    for a, b in permutations(used, 2):
        if a < b and (a, b) in cnf.var_of and (b, a) in cnf.var_of:
            cnf.add([-cnf.var_of[(a, b)], -cnf.var_of[(b, a)]], "order")
    return cnf


def build_cnf(cubes, existing, exclude=()) -> CNF:
    """`cubes` are (raised, fired) pairs; `existing` are kept priority pairs.

    Pairs in `exclude` and pairs whose high side is the abstraction label
    never become candidates.
    """
    cnf = CNF()
    exclude = set(exclude)
    add_cubes(cnf, cubes, (lambda low, high: (low, high) not in exclude))
    return finish_cnf(cnf, existing)


def solve(cnf: CNF):
    """Plain DPLL with unit propagation and chronological backtracking.

    Branches try False first, so the returned model sets as few priority
    pairs as possible. Returns ``(model, None)`` on SAT and
    ``(None, conflict_clause_index)`` on UNSAT.
    """
    nvars = len(cnf.var_of)
    assign = {}
    last_conflict = [None]

    def value(lit):
        v = assign.get(abs(lit))
        if v is None:
            return None
        return v if lit > 0 else not v

    def propagate(trail):
        changed = True
        while changed:
            changed = False
            for ci, clause in enumerate(cnf.clauses):
                unassigned = None
                satisfied = False
                count = 0
                for lit in clause:
                    val = value(lit)
                    if val is True:
                        satisfied = True
                        break
                    if val is None:
                        unassigned = lit
                        count += 1
                if satisfied:
                    continue
                if count == 0:
                    last_conflict[0] = ci
                    return False
                if count == 1:
                    assign[abs(unassigned)] = unassigned > 0
                    trail.append(abs(unassigned))
                    changed = True
        return True

    def search():
        trail = []
        if not propagate(trail):
            for v in trail:
                del assign[v]
            return False
        branch = next((v for v in range(1, nvars + 1) if v not in assign), None)
        if branch is None:
            return True
        for val in (False, True):
            assign[branch] = val
            if search():
                return True
            del assign[branch]
        for v in trail:
            del assign[v]
        return False

    if cnf.trivially_unsat:
        # locate the offending empty candidate clause for the repush rule
        for ci, (clause, kind) in enumerate(zip(cnf.clauses, cnf.kinds)):
            if kind == "candidate" and not clause:
                return None, ci
    if search():
        return dict(assign), None
    return None, last_conflict[0]


def extract(cnf: CNF, model) -> list:
    """Positively assigned candidate pairs, in deterministic order."""
    out = [pair for pair, v in cnf.var_of.items()
           if pair in cnf.candidate_pairs and model.get(v)]
    return sorted(out)


@dataclass
class SynthesisResult:
    status: str               # "success", "fail", or "unsynthesizable"
    priorities: list = field(default_factory=list)   # pairs added to the system
    repushed: list = field(default_factory=list)     # subset force-added on conflicts
    cubes: list = field(default_factory=list)        # fault cubes of the last round
    reason: str = ""
    cnf: CNF = None
    stats: dict = field(default_factory=dict)        # last-round pipeline numbers

    def __bool__(self):
        return self.status == "success"


def _repush_choices(cnf: CNF, conflict_index):
    """Candidates to force-add after UNSAT, best first: the alternatives of
    the lowest cube whose clause shares a variable with the conflict, in
    alphabet order; the first cube when nothing overlaps."""
    chosen = 0
    if conflict_index is not None:
        conflict_vars = {abs(l) for l in cnf.clauses[conflict_index]}
        for ci, (clause, kind) in enumerate(zip(cnf.clauses, cnf.kinds)):
            if kind == "candidate" and ({abs(l) for l in clause} & conflict_vars):
                chosen = ci
                break
    return sorted(cnf.pair_of[abs(l)] for l in cnf.clauses[chosen])


def synthesize(s: System, mode: str = "both", repush_depth: int = 2,
               order="decl", exclude=()) -> SynthesisResult:
    """Full pipeline: encode, solve the safety game, resolve the conflicts.

    Returns the priorities to add (repushed ones included). ``mode`` selects
    which bad states to avoid; `exclude` removes pairs from candidacy.
    """
    repushed = []
    current = s
    for attempt in range(repush_depth + 1):
        es = encoder.encode(current, order)
        attr = game.attractor(es, game.bad_states(es, mode))
        stats = {"variables": es.varmap.total_variables,
                 "attractor_rounds": len(attr.frontiers),
                 "attempts": attempt + 1}
        try:
            faults = game.fault_transitions(es, attr)
        except game.Unsynthesizable as exc:
            return SynthesisResult("unsynthesizable", repushed=repushed,
                                   reason=str(exc), stats=stats)
        if not faults.sources:
            return SynthesisResult("success", priorities=sorted(set(repushed)),
                                   repushed=repushed, stats=stats)
        cubes = game.candidate_cubes(es, faults)
        cnf = build_cnf(cubes, current.priorities.pairs, exclude)
        stats.update(cubes=len(cubes), sat_variables=len(cnf.var_of),
                     sat_clauses=len(cnf.clauses))
        model, conflict = solve(cnf)
        if model is not None:
            added = sorted(set(extract(cnf, model)) | set(repushed))
            return SynthesisResult("success", priorities=added, repushed=repushed,
                                   cubes=cubes, cnf=cnf, stats=stats)
        if attempt == repush_depth:
            return SynthesisResult("fail", repushed=repushed, cubes=cubes, cnf=cnf,
                                   stats=stats,
                                   reason="priority conflicts remain after "
                                          f"{repush_depth} repush round(s)")
        pick = None
        for pair in _repush_choices(cnf, conflict):
            try:
                current = current.with_priorities([pair])
            except Exception:
                continue
            pick = pair
            break
        if pick is None:
            return SynthesisResult("fail", repushed=repushed, cubes=cubes, cnf=cnf,
                                   stats=stats,
                                   reason="a fault cube admits no priority candidate")
        repushed.append(pick)
    raise AssertionError("unreachable")
