"""Alphabet abstraction: collapse a sub-alphabet to the may-fire label ♯.

Abstracting loosens synchronization — ♯ fires whenever at least one capable
component can move, and each capable component may move or stutter. That
makes the abstract system an over-approximation of the concrete one, so a
priority set that removes every ♯-deadlock (all non-♯ labels disabled) also
removes every concrete deadlock once ♯ ≺ σ is expanded back over the
abstracted labels.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product

from .boolexpr import eval_expr
from .model import (SHARP, Component, ModelError, PrioritySet, System,
                    Transition, closure_and_validate)
from .explicit import (_env, initial_configuration, jointly_participating,
                       BudgetExceeded, DEFAULT_BUDGET, Verdict)
from . import resolver


@dataclass
class AbstractSystem:
    system: System        # rewritten components, ♯ in place of Σ_Φ labels
    kept: tuple           # concrete labels kept as-is
    sigma_phi: tuple      # abstracted labels, for back-translation
    eliminated: tuple     # names of dropped components


def abstract(s: System, keep) -> AbstractSystem:
    """`keep` lists component indices or names whose alphabets stay concrete.

    Every other label is rewritten to ♯; variable-free components speaking
    only ♯ afterwards are dropped. Fails when the rewritten priority set is
    no longer a strict partial order.
    """
    if not keep:
        raise ModelError("keep set must be nonempty")
    indices = {k if isinstance(k, int) else s.component_index(k) for k in keep}
    kept_labels = set()
    for i in indices:
        kept_labels |= s.components[i].alphabet
    sigma_phi = tuple(a for a in s.alphabet if a not in kept_labels)
    alpha = lambda sig: SHARP if sig in sigma_phi else sig

    survivors, eliminated = [], []
    for c in s.components:
        if not c.variables and c.alphabet <= set(sigma_phi):
            eliminated.append(c.name)
            continue
        trans = tuple(Transition(t.source, t.guard, alpha(t.label), t.update,
                                 t.destination)
                      for t in c.transitions)
        survivors.append(Component(c.name, c.locations, c.variables, trans,
                                   c.initial_location, c.initial_valuation))
    new_alpha = [a for a in s.alphabet if a in kept_labels]
    if any(SHARP in c.alphabet for c in survivors):
        new_alpha.append(SHARP)
    pairs = []
    for low, high in s.priorities:
        a_low, a_high = alpha(low), alpha(high)
        if a_low == a_high:
            raise ModelError("abstraction collapses a priority to a reflexive pair")
        if (a_low == SHARP) != (low == SHARP) or (a_high == SHARP) != (high == SHARP):
            # ♯ is raised whenever ANY abstracted label is, so a rewritten pair
            # suppresses more than the concrete one did and the abstraction
            # would no longer over-approximate the system
            raise ModelError(f"priority {low!r} < {high!r} crosses the "
                             "abstraction boundary")
        pairs.append((a_low, a_high))
    prio = PrioritySet(tuple(pairs))
    closure_and_validate(prio)
    risks = tuple(r for r in s.risk_states
                  if all(any(c.name == cname for c in survivors)
                         for cname, _, _ in r.constraints))
    abstract_system = System(tuple(survivors), tuple(new_alpha), prio, risks)
    return AbstractSystem(abstract_system, tuple(a for a in new_alpha if a != SHARP),
                          sigma_phi, tuple(eliminated))


# --------------------------------------------------------------------------
# Explicit ♯-semantics

def _sharp_choices(comp, loc, values):
    env = _env(comp, values)
    out = []
    for t in comp.transitions_from(loc, SHARP):
        if eval_expr(t.guard, env):
            new_values = tuple(bool(eval_expr(f, env)) for _, f in t.update)
            out.append((t.destination, new_values))
    return out


def sharp_raised(s: System, c) -> set:
    """Joint participation under ♯-semantics: ♯ needs one capable component,
    everything else all of its participants."""
    raised = jointly_participating(s, c) - {SHARP}
    if SHARP in s.alphabet:
        for comp, (loc, values) in zip(s.components, c):
            if _sharp_choices(comp, loc, values):
                raised.add(SHARP)
                break
    return raised


def sharp_enabled(s: System, c) -> set:
    raised = sharp_raised(s, c)
    closure = s.priorities.closure()
    return {sig for sig in raised
            if not any((sig, other) in closure for other in raised if other != sig)}


def sharp_successors(s: System, c, sigma: str) -> set:
    """Under ♯, every capable component fires one enabled ♯-transition or
    stutters — except all stuttering at once."""
    if sigma != SHARP:
        from .explicit import successors
        return successors(s, c, sigma)
    if SHARP not in sharp_enabled(s, c):
        raise ValueError("the sharp interaction is not enabled")
    per_component = []
    for comp, (loc, values) in zip(s.components, c):
        choices = [(True, st) for st in _sharp_choices(comp, loc, values)]
        per_component.append(choices + [(False, (loc, values))])
    out = set()
    for combo in product(*per_component):
        if any(moved for moved, _ in combo):
            out.add(tuple(st for _, st in combo))
    return out


def sharp_deadlocked(s: System, c) -> bool:
    """♯-deadlock: every concrete (non-♯) label is jointly disabled. An
    enabled ♯ does not rescue the configuration."""
    return not (jointly_participating(s, c) - {SHARP})


def sharp_reach(s: System, budget: int = DEFAULT_BUDGET) -> set:
    init = initial_configuration(s)
    states = {init}
    queue = deque([init])
    while queue:
        c = queue.popleft()
        for sigma in sharp_enabled(s, c):
            for nxt in sharp_successors(s, c, sigma):
                if nxt not in states:
                    if len(states) >= budget:
                        raise BudgetExceeded(budget)
                    states.add(nxt)
                    queue.append(nxt)
    return states


def sharp_verdict(s: System, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Safe iff no reachable ♯-deadlocked configuration (explicit check)."""
    for c in sharp_reach(s, budget):
        if sharp_deadlocked(s, c):
            return Verdict(False, "deadlock", None, c)
    return Verdict(True)


# --------------------------------------------------------------------------
# Synthesis and back-translation

def sharp_deadlock_free_synthesize(a: AbstractSystem, repush_depth: int = 2,
                                   order="decl") -> resolver.SynthesisResult:
    """Standard pipeline against ♯-deadlock. The deadlock predicate of the
    encoder already ignores ♯, and the CNF builder never lets ♯ be the
    higher side of a candidate."""
    return resolver.synthesize(a.system, mode="deadlock",
                               repush_depth=repush_depth, order=order)


def concretize_priorities(pairs, sigma_phi, base: System) -> list:
    """Expand each ♯ ≺ σ over the abstracted labels and re-validate against
    the concrete system's priorities."""
    out = []
    for low, high in pairs:
        if high == SHARP:
            raise ModelError("cannot concretize a priority with the sharp "
                             "label on the higher side")
        if low == SHARP:
            out += [(other, high) for other in sigma_phi]
        else:
            out.append((low, high))
    closure_and_validate(base.priorities.union(out))
    return out


def abstract_synthesize(s: System, keep, repush_depth: int = 2, order="decl"):
    """End-to-end: abstract, synthesize against ♯-deadlock, concretize.

    Returns (result, concrete_pairs, abstract_system); concrete_pairs is
    None unless the result is a success.
    """
    a = abstract(s, keep)
    res = sharp_deadlock_free_synthesize(a, repush_depth, order)
    if not res:
        return res, None, a
    return res, concretize_priorities(res.priorities, a.sigma_phi, s), a
