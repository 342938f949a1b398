"""Two-stage symbolic encoding of a system, plus variable-order heuristics.

Stage-0 edges (environment) raise every jointly-participating interaction;
stage-1 edges (controller) execute exactly one raised interaction while
respecting priorities. Variables are laid out stage pair first, then one
Boolean pair per interaction (dense encoding), then per-component location
and data blocks, unprimed and primed interleaved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bdd import Manager, Predicate
from .model import SHARP, System, participants


@dataclass
class VarMap:
    manager: Manager
    stage: tuple                 # ("stg", "stg'")
    inter: dict                  # interaction -> (name, primed name)
    loc_bits: dict               # component name -> [(name, primed name), ...]
    data: dict                   # component name -> {var: (name, primed name)}
    component_order: list        # component names in layout order

    @property
    def unprimed(self):
        out = [self.stage[0]] + [u for u, _ in self.inter.values()]
        for cname in self.component_order:
            out += [u for u, _ in self.loc_bits[cname]]
            out += [u for u, _ in self.data[cname].values()]
        return out

    @property
    def primed(self):
        out = [self.stage[1]] + [p for _, p in self.inter.values()]
        for cname in self.component_order:
            out += [p for _, p in self.loc_bits[cname]]
            out += [p for _, p in self.data[cname].values()]
        return out

    def interaction_unprimed(self):
        return [u for u, _ in self.inter.values()]

    def interaction_primed(self):
        return [p for _, p in self.inter.values()]

    @property
    def total_variables(self) -> int:
        return self.manager.n


@dataclass
class EncodedSystem:
    """Bundles the variable map with the symbolic system predicates.

    The monolithic stage relations ``t0``/``t1`` are built on first use; the
    large benchmarks are handled through the partitioned per-interaction
    predicates (``raised``/``fire``/``step``) instead, which stay small under
    the interactions-first variable layout.
    """
    system: System
    varmap: VarMap
    p_ini: Predicate
    p_dead: Predicate
    p_risk: Predicate

    def __post_init__(self):
        self._t0 = None
        self._t1 = None
        self._raised = {}
        self._fire = {}
        self._step = {}
        self._closure = self.system.priorities.closure()

    @property
    def manager(self) -> Manager:
        return self.varmap.manager

    @property
    def t0(self) -> Predicate:
        if self._t0 is None:
            self._t0 = stage0(self.system, self.varmap)
        return self._t0

    @property
    def t1(self) -> Predicate:
        if self._t1 is None:
            self._t1 = stage1(self.system, self.varmap)
        return self._t1

    def raised(self, sigma) -> Predicate:
        """Joint participation of sigma, over unprimed location/data bits."""
        if sigma not in self._raised:
            self._raised[sigma] = _raised_pred(self.system, self.varmap, sigma)
        return self._raised[sigma]

    def fire(self, sigma) -> Predicate:
        """Configurations where sigma actually executes: raised and not
        suppressed by a raised higher-priority interaction."""
        if sigma not in self._fire:
            m = self.manager
            p = self.raised(sigma)
            for low, high in self._closure:
                if low == sigma:
                    p = m.apply("and", p, m.negate(self.raised(high)))
            self._fire[sigma] = p
        return self._fire[sigma]

    def step(self, sigma) -> Predicate:
        """Location/data transition relation of one sigma execution
        (participants move, everyone else is framed; no stage or
        interaction variables)."""
        if sigma not in self._step:
            m = self.manager
            if sigma == SHARP:
                self._step[sigma] = _stage1_sharp(self.system, self.varmap)
            else:
                parts = []
                for comp in self.system.components:
                    if sigma in comp.alphabet:
                        parts.append(m.disjoin(_transition_pred(self.varmap, comp, t)
                                               for t in comp.transitions if t.label == sigma))
                    else:
                        parts.append(_frame(self.varmap, comp))
                self._step[sigma] = m.conjoin(parts)
        return self._step[sigma]

    @property
    def dead_cfg(self) -> Predicate:
        """Deadlock over location/data bits only: nothing jointly enabled.

        Priorities never deadlock a configuration on their own — among raised
        interactions some maximal one survives suppression."""
        m = self.manager
        return m.conjoin(m.negate(self.raised(sigma))
                         for sigma in self.system.alphabet if sigma != SHARP)

    @property
    def risk_cfg(self) -> Predicate:
        return _risk_pred(self.system, self.varmap)


def _location_bit_count(n_locations: int) -> int:
    return max(0, math.ceil(math.log2(n_locations))) if n_locations > 1 else 0


def allocate(s: System, order="decl") -> VarMap:
    """Lay out the Boolean variables; `order` is 'decl', 'force', or a name list."""
    if order == "decl":
        comp_order = [c.name for c in s.components]
    elif order == "force":
        comp_order = force_order(s, [c.name for c in s.components])
    else:
        comp_order = list(order)
        if sorted(comp_order) != sorted(c.name for c in s.components):
            raise ValueError("explicit order must be a permutation of component names")
    names = ["stg", "stg'"]
    inter = {}
    for sigma in s.alphabet:
        u, p = f"i:{sigma}", f"i:{sigma}'"
        inter[sigma] = (u, p)
        names += [u, p]
    by_name = {c.name: c for c in s.components}
    loc_bits, data = {}, {}
    for cname in comp_order:
        comp = by_name[cname]
        bits = []
        for j in range(_location_bit_count(len(comp.locations))):
            u, p = f"l:{cname}:{j}", f"l:{cname}:{j}'"
            bits.append((u, p))
            names += [u, p]
        loc_bits[cname] = bits
        dvars = {}
        for v in comp.variables:
            u, p = f"d:{cname}:{v}", f"d:{cname}:{v}'"
            dvars[v] = (u, p)
            names += [u, p]
        data[cname] = dvars
    return VarMap(Manager(names), ("stg", "stg'"), inter, loc_bits, data, comp_order)


def _enc_location(vm: VarMap, comp, location, primed: bool) -> Predicate:
    m = vm.manager
    idx = comp.locations.index(location)
    bits = vm.loc_bits[comp.name]
    lits = []
    for j, (u, p) in enumerate(bits):
        name = p if primed else u
        lits.append(m.literal(name, bool((idx >> j) & 1)))
    return m.conjoin(lits)


def _guard_pred(vm: VarMap, comp, guard) -> Predicate:
    return vm.manager.from_expr(guard, lambda v: vm.data[comp.name][v][0])


def _frame(vm: VarMap, comp) -> Predicate:
    m = vm.manager
    parts = []
    for u, p in vm.loc_bits[comp.name]:
        parts.append(m.apply("iff", m.var(u), m.var(p)))
    for u, p in vm.data[comp.name].values():
        parts.append(m.apply("iff", m.var(u), m.var(p)))
    return m.conjoin(parts)


def _participation_pred(vm: VarMap, comp, sigma) -> Predicate:
    """States where comp can take a sigma-transition (some guard holds)."""
    m = vm.manager
    disj = []
    for t in comp.transitions:
        if t.label != sigma:
            continue
        disj.append(m.apply("and", _enc_location(vm, comp, t.source, False),
                            _guard_pred(vm, comp, t.guard)))
    return m.disjoin(disj)


def _transition_pred(vm: VarMap, comp, t) -> Predicate:
    """One concrete transition: source, guard, destination, updates."""
    m = vm.manager
    parts = [_enc_location(vm, comp, t.source, False),
             _guard_pred(vm, comp, t.guard),
             _enc_location(vm, comp, t.destination, True)]
    for v, f in t.update:
        fv = m.from_expr(f, lambda name: vm.data[comp.name][name][0])
        parts.append(m.apply("iff", m.var(vm.data[comp.name][v][1]), fv))
    return m.conjoin(parts)


def _raised_pred(s: System, vm: VarMap, sigma) -> Predicate:
    """P_sigma: configurations in which sigma is jointly enabled.

    The sharp interaction of an abstract system needs only one capable
    component (may-fire), every ordinary interaction needs all participants.
    """
    m = vm.manager
    per_comp = [_participation_pred(vm, comp, sigma)
                for comp in s.components if sigma in comp.alphabet]
    if sigma == SHARP:
        return m.disjoin(per_comp)
    return m.conjoin(per_comp) if per_comp else m.false


def stage0(s: System, vm: VarMap) -> Predicate:
    m = vm.manager
    parts = [m.var("stg"), m.nvar("stg'")]
    for sigma in s.alphabet:
        parts.append(m.apply("iff", m.var(vm.inter[sigma][1]), _raised_pred(s, vm, sigma)))
    for comp in s.components:
        parts.append(_frame(vm, comp))
    return m.conjoin(parts)


def _stage1_sharp(s: System, vm: VarMap) -> Predicate:
    """Sharp execution: each capable component fires one enabled sharp
    transition or stutters; at least one fires."""
    m = vm.manager
    fires, choices = [], []
    for comp in s.components:
        if SHARP not in comp.alphabet:
            continue
        fire = m.disjoin(_transition_pred(vm, comp, t)
                         for t in comp.transitions if t.label == SHARP)
        fires.append(fire)
        choices.append(m.apply("or", fire, _frame(vm, comp)))
    parts = choices + [m.disjoin(fires)]
    for comp in s.components:
        if SHARP not in comp.alphabet:
            parts.append(_frame(vm, comp))
    return m.conjoin(parts)


def stage1(s: System, vm: VarMap) -> Predicate:
    m = vm.manager
    base = m.apply("and", m.nvar("stg"), m.var("stg'"))
    per_sigma = []
    for sigma in s.alphabet:
        parts = [base, m.var(vm.inter[sigma][0]), m.var(vm.inter[sigma][1])]
        for other in s.alphabet:
            if other != sigma:
                parts.append(m.nvar(vm.inter[other][1]))
        if sigma == SHARP:
            parts.append(_stage1_sharp(s, vm))
        else:
            for comp in s.components:
                if sigma in comp.alphabet:
                    parts.append(m.disjoin(_transition_pred(vm, comp, t)
                                           for t in comp.transitions if t.label == sigma))
                else:
                    parts.append(_frame(vm, comp))
        per_sigma.append(m.conjoin(parts))
    t1 = m.disjoin(per_sigma)
    for low, high in s.priorities.closure():
        raised_both = m.apply("and", m.var(vm.inter[low][0]), m.var(vm.inter[high][0]))
        t1 = m.apply("and", t1,
                     m.apply("implies", raised_both, m.nvar(vm.inter[low][1])))
    return t1


def _risk_pred(s: System, vm: VarMap) -> Predicate:
    m = vm.manager
    risk_parts = []
    by_name = {c.name: c for c in s.components}
    for risk in s.risk_states:
        conj = []
        for cname, loc, valpairs in risk.constraints:
            comp = by_name[cname]
            conj.append(_enc_location(vm, comp, loc, False))
            for v, b in valpairs:
                conj.append(m.literal(vm.data[cname][v][0], b))
        risk_parts.append(m.conjoin(conj))
    return m.disjoin(risk_parts)


def encode(s: System, order="decl") -> EncodedSystem:
    vm = allocate(s, order)
    m = vm.manager
    ini_parts = [m.var("stg")]
    for comp in s.components:
        ini_parts.append(_enc_location(vm, comp, comp.initial_location, False))
        for v in comp.variables:
            ini_parts.append(m.literal(vm.data[comp.name][v][0], bool(comp.initial_valuation[v])))
    p_ini = m.conjoin(ini_parts)
    dead_parts = [m.nvar("stg")]
    for sigma in s.alphabet:
        if sigma != SHARP:
            dead_parts.append(m.nvar(vm.inter[sigma][0]))
    p_dead = m.conjoin(dead_parts)
    risk = _risk_pred(s, vm)
    p_risk = m.apply("and", m.nvar("stg"), risk) if not risk.is_false else m.false
    return EncodedSystem(s, vm, p_ini, p_dead, p_risk)


# --------------------------------------------------------------------------
# Variable ordering

def span_sum(s: System, order) -> int:
    pos = {name: i for i, name in enumerate(order)}
    total = 0
    for sigma in s.alphabet:
        ps = [pos[s.components[i].name] for i in participants(s, sigma)]
        total += max(ps) - min(ps)
    return total


def force_order(s: System, initial, max_iters: int = 10) -> list:
    """Center-of-gravity iteration over the component hypergraph.

    Each interaction sits at the average position of its participants; each
    component moves to the average of its interactions' positions. Stops when
    the span sum no longer decreases; returns the best order seen. Ties in
    the sort keep the previous relative order (stable), so runs are
    deterministic.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    parts = {sigma: [s.components[i].name for i in participants(s, sigma)]
             for sigma in s.alphabet}
    order = list(initial)
    best_order, best_span = order, span_sum(s, order)
    prev_span = best_span
    for _ in range(max_iters):
        pos = {name: i for i, name in enumerate(order)}
        cog = {sigma: sum(pos[c] for c in members) / len(members)
               for sigma, members in parts.items()}
        value = {}
        for comp in s.components:
            sigmas = [sig for sig in s.alphabet if comp.name in parts[sig]]
            value[comp.name] = (sum(cog[sig] for sig in sigmas) / len(sigmas)
                                if sigmas else pos[comp.name])
        order = sorted(order, key=lambda name: value[name])
        span = span_sum(s, order)
        if span < best_span:
            best_order, best_span = order, span
        if span >= prev_span:
            break
        prev_span = span
    return best_order


# --------------------------------------------------------------------------
# Bridging helpers between explicit configurations and predicates

def config_pred(es: EncodedSystem, config, stage_zero=True) -> Predicate:
    """Predicate fixing the location and data bits of an explicit
    configuration; ``stage_zero=None`` leaves the stage bit unconstrained."""
    m = es.manager
    vm = es.varmap
    parts = []
    if stage_zero is not None:
        parts.append(m.var("stg") if stage_zero else m.nvar("stg"))
    for comp, (loc, values) in zip(es.system.components, config):
        parts.append(_enc_location(vm, comp, loc, False))
        for v, b in zip(comp.variables, values):
            parts.append(m.literal(vm.data[comp.name][v][0], bool(b)))
    return m.conjoin(parts)


def decode_config(es: EncodedSystem, assignment: dict):
    """Explicit configuration from a total assignment of location/data bits."""
    out = []
    vm = es.varmap
    for comp in es.system.components:
        idx = 0
        for j, (u, _) in enumerate(vm.loc_bits[comp.name]):
            if assignment.get(u, False):
                idx |= 1 << j
        if idx >= len(comp.locations):
            raise ValueError(f"invalid location encoding for component {comp.name!r}")
        values = tuple(bool(assignment.get(vm.data[comp.name][v][0], False))
                       for v in comp.variables)
        out.append((comp.locations[idx], values))
    return tuple(out)


def location_data_names(es: EncodedSystem) -> list:
    vm = es.varmap
    out = []
    for cname in vm.component_order:
        out += [u for u, _ in vm.loc_bits[cname]]
        out += [u for u, _ in vm.data[cname].values()]
    return out


def reachable_states(es: EncodedSystem, max_iters=None):
    """Forward fixpoint over both stage relations; small models only — the
    monolithic relations grow quickly under the interactions-first layout."""
    m = es.manager
    vm = es.varmap
    unprimed, primed = vm.unprimed, vm.primed
    trans = m.apply("or", es.t0, es.t1)
    pre = es.p_ini
    count = 0
    while True:
        img = m.and_exists(pre, trans, unprimed)
        img = m.substitute(img, primed, unprimed)
        post = m.apply("or", pre, img)
        if post == pre:
            return post
        pre = post
        count += 1
        if max_iters is not None and count > max_iters:
            raise RuntimeError("reachability fixpoint exceeded the iteration bound")
