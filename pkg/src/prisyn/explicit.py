"""Explicit-state semantics: the reference oracle for every symbolic result.

A configuration is a tuple with one ``(location, values)`` entry per component,
where ``values`` holds the component's variable values in declaration order.
"""

from __future__ import annotations

import weakref
from collections import deque
from dataclasses import dataclass
from itertools import product

from .boolexpr import eval_expr
from .model import System

DEFAULT_BUDGET = 2_000_000


class _Index:
    """Per-system lookup tables: participants of each interaction and
    transitions keyed by (component, location, label)."""

    def __init__(self, s: System):
        self.participants = {sigma: [] for sigma in s.alphabet}
        self.trans = {}
        for i, comp in enumerate(s.components):
            labels = set()
            for t in comp.transitions:
                labels.add(t.label)
                self.trans.setdefault((i, t.source, t.label), []).append(t)
            for sigma in labels:
                if sigma in self.participants:
                    self.participants[sigma].append(i)


_INDEX_CACHE = {}


def _index(s: System) -> _Index:
    key = id(s)
    got = _INDEX_CACHE.get(key)
    if got is None:
        got = _Index(s)
        _INDEX_CACHE[key] = got
        weakref.finalize(s, _INDEX_CACHE.pop, key, None)
    return got


class BudgetExceeded(RuntimeError):
    def __init__(self, budget):
        super().__init__(f"state budget of {budget} configurations exceeded")
        self.budget = budget


def initial_configuration(s: System):
    return tuple(
        (c.initial_location, tuple(bool(c.initial_valuation[v]) for v in c.variables))
        for c in s.components
    )


def _env(component, values) -> dict:
    return dict(zip(component.variables, values))


def jointly_participating(s: System, c) -> set:
    """Interactions satisfying joint participation, before priority filtering."""
    ix = _index(s)
    raised = set()
    for sigma, members in ix.participants.items():
        if not members:
            continue
        ok = True
        for i in members:
            comp = s.components[i]
            loc, values = c[i]
            ts = ix.trans.get((i, loc, sigma))
            if not ts:
                ok = False
                break
            env = _env(comp, values)
            if not any(eval_expr(t.guard, env) for t in ts):
                ok = False
                break
        if ok:
            raised.add(sigma)
    return raised


def enabled(s: System, c) -> set:
    """Enabled interactions: joint participation minus priority-suppressed ones."""
    raised = jointly_participating(s, c)
    closure = s.priorities.closure()
    return {sig for sig in raised
            if not any((sig, other) in closure for other in raised if other != sig)}


def _successors_unchecked(s: System, ix: _Index, c, sigma: str) -> set:
    per_component = []
    for i, (comp, (loc, values)) in enumerate(zip(s.components, c)):
        if i not in ix.participants[sigma]:
            per_component.append(((loc, values),))
            continue
        env = _env(comp, values)
        choices = []
        for t in ix.trans.get((i, loc, sigma), ()):
            if eval_expr(t.guard, env):
                new_values = tuple(bool(eval_expr(f, env)) for _, f in t.update)
                choices.append((t.destination, new_values))
        per_component.append(choices)
    return {tuple(combo) for combo in product(*per_component)}


def successors(s: System, c, sigma: str) -> set:
    if sigma not in enabled(s, c):
        raise ValueError(f"interaction {sigma!r} is not enabled")
    return _successors_unchecked(s, _index(s), c, sigma)


def _moves(s: System, c):
    """{enabled interaction: successor set}, computed in one pass."""
    raised = jointly_participating(s, c)
    closure = s.priorities.closure()
    ix = _index(s)
    return {sig: _successors_unchecked(s, ix, c, sig) for sig in raised
            if not any((sig, other) in closure for other in raised
                       if other != sig)}


@dataclass
class ReachGraph:
    states: set
    edges: dict        # (configuration, interaction) -> set of configurations
    parents: dict      # configuration -> (parent configuration, interaction)
    initial: tuple


def reach(s: System, budget: int = DEFAULT_BUDGET) -> ReachGraph:
    """Breadth-first reachability; the parents map yields shortest traces."""
    init = initial_configuration(s)
    states = {init}
    edges = {}
    parents = {init: None}
    queue = deque([init])
    while queue:
        c = queue.popleft()
        for sigma, succs in _moves(s, c).items():
            edges[(c, sigma)] = succs
            for nxt in succs:
                if nxt not in states:
                    if len(states) >= budget:
                        raise BudgetExceeded(budget)
                    states.add(nxt)
                    parents[nxt] = (c, sigma)
                    queue.append(nxt)
    return ReachGraph(states, edges, parents, init)


def trace_to(graph: ReachGraph, c) -> list:
    word = []
    while graph.parents[c] is not None:
        c, sigma = graph.parents[c]
        word.append(sigma)
    word.reverse()
    return word


def matches_risk(s: System, risk, c) -> bool:
    for cname, loc, valpairs in risk.constraints:
        idx = s.component_index(cname)
        actual_loc, values = c[idx]
        if actual_loc != loc:
            return False
        env = _env(s.components[idx], values)
        if any(bool(env[v]) != b for v, b in valpairs):
            return False
    return True


@dataclass
class Verdict:
    safe: bool
    reason: str = ""          # "deadlock" or "risk" when unsafe
    trace: list = None        # shortest witness word
    state: tuple = None

    def __bool__(self):
        return self.safe


def verdict(s: System, mode: str = "both", budget: int = DEFAULT_BUDGET) -> Verdict:
    """Safe iff no reachable deadlock (mode allowing) and no reachable risk state.

    Breadth-first, so the witness trace of an Unsafe verdict is shortest.
    """
    check_deadlock = mode in ("deadlock", "both")
    check_risk = mode in ("risk", "both")
    init = initial_configuration(s)
    states = {init}
    parents = {init: None}
    queue = deque([init])
    graph = ReachGraph(states, {}, parents, init)
    while queue:
        c = queue.popleft()
        if check_risk and any(matches_risk(s, r, c) for r in s.risk_states):
            return Verdict(False, "risk", trace_to(graph, c), c)
        moves = _moves(s, c)
        if check_deadlock and not moves:
            return Verdict(False, "deadlock", trace_to(graph, c), c)
        for sigma, succs in moves.items():
            for nxt in succs:
                if nxt not in states:
                    if len(states) >= budget:
                        raise BudgetExceeded(budget)
                    states.add(nxt)
                    parents[nxt] = (c, sigma)
                    queue.append(nxt)
    return Verdict(True)


def member(s: System, word) -> bool:
    """Whether some execution realizes the interaction sequence from the start."""
    for sigma in word:
        if sigma not in s.alphabet:
            raise ValueError(f"letter {sigma!r} not in the alphabet")
    frontier = {initial_configuration(s)}
    for sigma in word:
        nxt = set()
        for c in frontier:
            if sigma in enabled(s, c):
                nxt |= successors(s, c, sigma)
        if not nxt:
            return False
        frontier = nxt
    return True


def language_upto(s: System, max_len: int, budget: int = DEFAULT_BUDGET) -> set:
    """All words of length <= max_len in the system language (enumeration oracle)."""
    words = {()}
    frontier = {(): {initial_configuration(s)}}
    for _ in range(max_len):
        nxt_frontier = {}
        for word, configs in frontier.items():
            for c in configs:
                for sigma in enabled(s, c):
                    w2 = word + (sigma,)
                    nxt_frontier.setdefault(w2, set()).update(successors(s, c, sigma))
            if len(nxt_frontier) > budget:
                raise BudgetExceeded(budget)
        words |= set(nxt_frontier)
        frontier = nxt_frontier
        if not frontier:
            break
    return words
