"""Deterministic monitors for behavioral safety.

A risk specification is a complete DFA over a sub-alphabet of the system's
interactions. Composing it with the system turns language membership into
state reachability: the monitor rides along as a variable-free component and
the accepting states become risk configurations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .boolexpr import TRUE
from .model import (Component, ModelError, PartialConfiguration, System,
                    Transition)

SINK = "_sink"


@dataclass(frozen=True)
class DFA:
    states: tuple
    alphabet: frozenset
    transition: dict          # (state, letter) -> state, total
    initial: str
    accepting: frozenset
    name: str = "monitor"

    def __post_init__(self):
        if self.initial not in self.states:
            raise ModelError(f"unknown initial state {self.initial!r}")
        for q in self.accepting:
            if q not in self.states:
                raise ModelError(f"unknown accepting state {q!r}")
        for (q, a), q2 in self.transition.items():
            if q not in self.states or q2 not in self.states:
                raise ModelError(f"transition {q!r} -{a}-> {q2!r} uses an "
                                 "unknown state")
            if a not in self.alphabet:
                raise ModelError(f"transition letter {a!r} not in the alphabet")

    def run(self, word) -> str:
        q = self.initial
        for a in word:
            if a in self.alphabet:
                q = self.transition[(q, a)]
        return q

    def accepts(self, word) -> bool:
        return self.run(word) in self.accepting


def make_dfa(states, alphabet, transition, initial, accepting,
             name: str = "monitor") -> DFA:
    """Build a DFA, completing a partial transition map with a rejecting
    sink."""
    states = tuple(states)
    alphabet = frozenset(alphabet)
    transition = dict(transition)
    missing = [(q, a) for q in states for a in alphabet
               if (q, a) not in transition]
    if missing:
        if SINK not in states:
            states = states + (SINK,)
        for q, a in missing:
            transition[(q, a)] = SINK
        for a in alphabet:
            transition.setdefault((SINK, a), SINK)
    return DFA(states, alphabet, transition, initial, frozenset(accepting), name)


def complement(d: DFA) -> DFA:
    return DFA(d.states, d.alphabet, d.transition, d.initial,
               frozenset(d.states) - d.accepting, d.name + "_c")


# --------------------------------------------------------------------------
# Text format

_TOKEN = re.compile(r"\s+|//[^\n]*|(->|[{};]|[A-Za-z_#][\w#]*|-)")


def _tokens(text):
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ModelError(f"bad character {text[pos]!r} in dfa text")
        pos = m.end()
        if m.group(1):
            out.append(m.group(1))
    return out


def parse_dfa(text: str, name: str = "monitor") -> DFA:
    """`dfa { states q0 q1; alphabet a b; init q0; accept q1; q0 -a-> q1; }`

    Unlisted (state, letter) pairs go to a fresh rejecting sink.
    """
    toks = _tokens(text)
    pos = 0

    def eat(expected=None):
        nonlocal pos
        if pos >= len(toks):
            raise ModelError("unexpected end of dfa text")
        tok = toks[pos]
        if expected is not None and tok != expected:
            raise ModelError(f"expected {expected!r}, got {tok!r}")
        pos += 1
        return tok

    def names_until_semi():
        out = []
        while toks[pos] != ";":
            out.append(eat())
        eat(";")
        return out

    eat("dfa")
    eat("{")
    states, alphabet, initial, accepting = [], [], None, []
    transition = {}
    while toks[pos] != "}":
        if toks[pos] == "states":
            eat()
            states = names_until_semi()
        elif toks[pos] == "alphabet":
            eat()
            alphabet = names_until_semi()
        elif toks[pos] == "init":
            eat()
            initial = eat()
            eat(";")
        elif toks[pos] == "accept":
            eat()
            accepting = names_until_semi()
        else:
            src = eat()
            eat("-")
            letter = eat()
            eat("->")
            dst = eat()
            eat(";")
            if (src, letter) in transition and transition[(src, letter)] != dst:
                raise ModelError(f"nondeterministic on ({src!r}, {letter!r})")
            transition[(src, letter)] = dst
    eat("}")
    if initial is None:
        raise ModelError("dfa text lacks an init state")
    return make_dfa(states, alphabet, transition, initial, accepting, name)


def dfa_to_text(d: DFA) -> str:
    lines = ["dfa {",
             "  states " + " ".join(d.states) + ";",
             "  alphabet " + " ".join(sorted(d.alphabet)) + ";",
             f"  init {d.initial};",
             "  accept " + " ".join(q for q in d.states if q in d.accepting) + ";"]
    for q in d.states:
        for a in sorted(d.alphabet):
            lines.append(f"  {q} -{a}-> {d.transition[(q, a)]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Products

def monitor_component(d: DFA, full_alphabet) -> Component:
    """The DFA as a variable-free component: its own letters follow the
    transition map, every other system letter self-loops (the monitor
    observes but never blocks)."""
    bad = d.alphabet - set(full_alphabet)
    if bad:
        raise ModelError(f"monitor letters {sorted(bad)} not in the system "
                         "alphabet")
    trans = [Transition(q, TRUE, a, (), d.transition[(q, a)])
             for q in d.states for a in sorted(d.alphabet)]
    trans += [Transition(q, TRUE, a, (), q)
              for q in d.states for a in full_alphabet if a not in d.alphabet]
    return Component(d.name, d.states, (), tuple(trans), d.initial, {})


def product_with_monitor(s: System, monitors) -> System:
    """Attach each DFA as an observing component and mark every
    all-monitors-accepting combination as a risk configuration. Existing
    risks and priorities carry over unchanged."""
    comps = list(s.components)
    for d in monitors:
        if any(c.name == d.name for c in comps):
            raise ModelError(f"component name {d.name!r} already taken")
        comps.append(monitor_component(d, s.alphabet))
    risks = list(s.risk_states)
    combos = [()]
    for d in monitors:
        combos = [prefix + ((d.name, q, ()),)
                  for prefix in combos
                  for q in d.states if q in d.accepting]
    if monitors and combos != [()]:
        risks += [PartialConfiguration(c) for c in combos]
    return System(tuple(comps), s.alphabet, s.priorities, tuple(risks))


def stutter_component(name: str, letters) -> Component:
    """Single location self-looping on the given letters; stands in for the
    other side of a decomposition."""
    trans = tuple(Transition("idle", TRUE, a, (), "idle") for a in sorted(letters))
    return Component(name, ("idle",), (), trans, "idle", {})
