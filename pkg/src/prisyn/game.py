"""Risk attractor, fault extraction, and symbolic safety checks.

The two-stage encoding is a safety game, but its raising stage is
deterministic: the raised set is a function of the configuration. The game
therefore collapses onto configuration space, where one controller move is
"fire an enabled interaction, pick a successor". Working there keeps every
predicate over the location/data bits, which stays compact under the
interactions-first variable layout; the monolithic stage relations are only
materialized for small models and tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bdd import Predicate
from .model import SHARP
from .encoder import EncodedSystem, location_data_names, config_pred


class Unsynthesizable(RuntimeError):
    """The initial configuration lies inside the risk attractor."""


def _names(es: EncodedSystem):
    unprimed = location_data_names(es)
    primed = [n + "'" for n in unprimed]
    return unprimed, primed


def _prime(es: EncodedSystem, p: Predicate) -> Predicate:
    unprimed, primed = _names(es)
    return es.manager.substitute(p, unprimed, primed)


def _move_pre(es: EncodedSystem, sigma, target: Predicate) -> Predicate:
    """Configurations with a sigma move into `target`."""
    m = es.manager
    unprimed, primed = _names(es)
    pre = m.and_exists(es.step(sigma), _prime(es, target), primed)
    return m.apply("and", es.fire(sigma), pre)


def initial_cfg(es: EncodedSystem) -> Predicate:
    from .explicit import initial_configuration
    return config_pred(es, initial_configuration(es.system), stage_zero=None)


@dataclass
class Attractor:
    states: Predicate        # configurations the environment wins from
    frontiers: list          # one growing predicate per fixpoint round


def bad_states(es: EncodedSystem, mode: str = "both") -> Predicate:
    m = es.manager
    parts = []
    if mode in ("deadlock", "both"):
        parts.append(es.dead_cfg)
    if mode in ("risk", "both"):
        parts.append(es.risk_cfg)
    return m.disjoin(parts)


def attractor(es: EncodedSystem, bad: Predicate = None) -> Attractor:
    """Least fixpoint: a configuration joins when it has moves but every
    move leads into the attractor (PointTo minus Escape)."""
    m = es.manager
    attr = bad_states(es) if bad is None else bad
    frontiers = [attr]
    while True:
        neg = m.negate(attr)
        point, escape = m.false, m.false
        for sigma in es.system.alphabet:
            point = m.apply("or", point, _move_pre(es, sigma, attr))
            escape = m.apply("or", escape, _move_pre(es, sigma, neg))
        nxt = m.apply("or", attr, m.apply("and", point, m.negate(escape)))
        if nxt == attr:
            return Attractor(attr, frontiers)
        attr = nxt
        frontiers.append(attr)


_CACHE_LIMIT = 2_000_000


def reachable_cfg(es: EncodedSystem) -> Predicate:
    """Forward fixpoint, iterating on the full set rather than BFS frontiers:
    frontier fragments of this benchmark family grow far larger diagrams than
    the (near-closed) reach set itself."""
    m = es.manager
    unprimed, primed = _names(es)
    reach = initial_cfg(es)
    while True:
        img = m.false
        for sigma in es.system.alphabet:
            src = m.apply("and", reach, es.fire(sigma))
            if src.is_false:
                continue
            img = m.apply("or", img, m.and_exists(src, es.step(sigma), unprimed))
        nxt = m.apply("or", reach, m.substitute(img, primed, unprimed))
        if nxt == reach:
            return reach
        reach = nxt
        if len(m._cache) > _CACHE_LIMIT:
            m._cache.clear()


@dataclass
class FaultSet:
    sources: dict            # interaction -> configurations outside the
                             # attractor whose firing can enter it


# Exact reachability is a completeness refinement: it only prunes fault
# cubes that arise from unreachable configurations. Its fixpoint dominates
# the pipeline cost on large models, so past this many variables the cubes
# are taken unrestricted (a sound over-approximation of the fault set).
EXACT_REACH_VARIABLE_LIMIT = 260


def fault_transitions(es: EncodedSystem, attr: Attractor = None,
                      restrict_reachable="auto") -> FaultSet:
    """Moves from escapable configurations into the attractor, grouped by
    the fired interaction; these are what synthesis must suppress. Raises
    Unsynthesizable when the initial configuration is already trapped.

    `restrict_reachable` is True, False, or "auto" (exact reachability only
    below EXACT_REACH_VARIABLE_LIMIT variables)."""
    m = es.manager
    if attr is None:
        attr = attractor(es)
    if not m.apply("and", initial_cfg(es), attr.states).is_false:
        raise Unsynthesizable("initial configuration lies in the risk attractor")
    outside = m.negate(attr.states)
    if restrict_reachable == "auto":
        restrict_reachable = (es.varmap.total_variables
                              <= EXACT_REACH_VARIABLE_LIMIT)
    if restrict_reachable:
        outside = m.apply("and", outside, reachable_cfg(es))
    sources = {}
    for sigma in es.system.alphabet:
        src = m.apply("and", _move_pre(es, sigma, attr.states), outside)
        if not src.is_false:
            sources[sigma] = src
    return FaultSet(sources)


def candidate_cubes(es: EncodedSystem, faults: FaultSet):
    """(raised, fired) cubes of the fault set, deduplicated and sorted.

    The raised sets are recovered by signature-splitting each source set
    against every interaction's joint-participation predicate, so only
    feasible combinations are ever enumerated.
    """
    m = es.manager
    sigmas = list(es.system.alphabet)
    cubes = set()
    for fired, src in faults.sources.items():
        stack = [(0, src, frozenset())]
        while stack:
            i, cur, raised = stack.pop()
            if cur.is_false:
                continue
            if i == len(sigmas):
                cubes.add((raised, fired))
                continue
            p = es.raised(sigmas[i])
            stack.append((i + 1, m.apply("and", cur, p), raised | {sigmas[i]}))
            stack.append((i + 1, m.apply("and", cur, m.negate(p)), raised))
    return sorted(cubes, key=lambda c: (sorted(c[0]), c[1]))


# --------------------------------------------------------------------------
# Symbolic reachability verdicts and witness extraction

def extract_trace(es: EncodedSystem, target: Predicate):
    """Shortest interaction word from the initial configuration into
    `target`, or None when unreachable. Returns (word, final_assignment)."""
    m = es.manager
    unprimed, primed = _names(es)
    rings = [initial_cfg(es)]
    visited = rings[0]
    while m.apply("and", rings[-1], target).is_false:
        img = m.false
        for sigma in es.system.alphabet:
            src = m.apply("and", rings[-1], es.fire(sigma))
            if src.is_false:
                continue
            img = m.apply("or", img, m.and_exists(src, es.step(sigma), unprimed))
        img = m.substitute(img, primed, unprimed)
        fresh = m.apply("and", img, m.negate(visited))
        if fresh.is_false:
            return None
        rings.append(fresh)
        visited = m.apply("or", visited, fresh)
    state = m.pick_cube(m.apply("and", rings[-1], target), unprimed)
    word = []
    for i in range(len(rings) - 2, -1, -1):
        succ = _prime(es, m.conjoin(m.literal(n, state[n]) for n in unprimed))
        for sigma in es.system.alphabet:
            src = m.apply("and", rings[i],
                          m.apply("and", es.fire(sigma),
                                  m.and_exists(es.step(sigma), succ, primed)))
            if not src.is_false:
                word.append(sigma)
                state = m.pick_cube(src, unprimed)
                break
        else:
            raise RuntimeError("trace reconstruction lost the predecessor")
    word.reverse()
    return word, state


@dataclass
class SymbolicVerdict:
    safe: bool
    reason: str = ""
    trace: list = None

    def __bool__(self):
        return self.safe


def symbolic_verdict(es: EncodedSystem, mode: str = "both") -> SymbolicVerdict:
    """Safe iff no reachable deadlock/risk configuration; witness is shortest."""
    targets = []
    if mode in ("risk", "both"):
        targets.append(("risk", es.risk_cfg))
    if mode in ("deadlock", "both"):
        targets.append(("deadlock", es.dead_cfg))
    best = None
    for reason, target in targets:
        if target.is_false:
            continue
        got = extract_trace(es, target)
        if got is None:
            continue
        word, _ = got
        if best is None or len(word) < len(best[1]):
            best = (reason, word)
    if best is None:
        return SymbolicVerdict(True)
    return SymbolicVerdict(False, best[0], best[1])
