"""System data model, the on-disk model format, and priority-set validation."""

from __future__ import annotations

from dataclasses import dataclass, field

from .boolexpr import (
    TRUE,
    ExprSyntaxError,
    eval_expr,
    expr_to_text,
    expr_vars,
    _parse_or,
)

# Interaction label introduced by alphabet abstraction; ordinary models may not
# declare it but the model format accepts it so abstract systems round-trip.
SHARP = "#"

_KEYWORDS = {
    "system", "component", "locations", "vars", "init",
    "on", "from", "to", "when", "set", "priority", "risk", "alphabet",
}


class ModelError(ValueError):
    """Invalid model document or inconsistent system structure."""


class CircularPriorityError(ModelError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("circular priorities: " + " < ".join(self.cycle + [self.cycle[0]]))


@dataclass
class Transition:
    source: str
    guard: tuple          # boolexpr
    label: str
    update: tuple         # ((var, boolexpr), ...) covering every declared variable
    destination: str


@dataclass
class Component:
    name: str
    locations: tuple
    variables: tuple
    transitions: tuple
    initial_location: str
    initial_valuation: dict

    @property
    def alphabet(self) -> set:
        return {t.label for t in self.transitions}

    def transitions_from(self, location, label):
        return [t for t in self.transitions if t.source == location and t.label == label]


@dataclass
class PrioritySet:
    pairs: tuple = ()     # ordered (low, high) pairs, duplicates removed

    def __post_init__(self):
        seen, out = set(), []
        for p in self.pairs:
            if p not in seen:
                seen.add(p)
                out.append(tuple(p))
        self.pairs = tuple(out)

    def union(self, other) -> "PrioritySet":
        return PrioritySet(self.pairs + tuple(other.pairs if isinstance(other, PrioritySet) else other))

    def closure(self) -> frozenset:
        if not hasattr(self, "_closure"):
            object.__setattr__(self, "_closure",
                               frozenset(closure_and_validate(self)))
        return self._closure

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)


@dataclass
class PartialConfiguration:
    """Constraints on a subset of components; unconstrained components match anything.

    constraints: ((component_name, location, ((var, bool), ...)), ...)
    """
    constraints: tuple

    def __post_init__(self):
        if not self.constraints:
            raise ModelError("risk configuration constrains no component")


@dataclass
class System:
    components: tuple
    alphabet: tuple       # declaration order
    priorities: PrioritySet = field(default_factory=PrioritySet)
    risk_states: tuple = ()

    def __post_init__(self):
        _validate_system(self)

    def component_index(self, name: str) -> int:
        for i, c in enumerate(self.components):
            if c.name == name:
                return i
        raise ModelError(f"unknown component {name!r}")

    def with_priorities(self, extra) -> "System":
        return System(self.components, self.alphabet,
                      self.priorities.union(extra), self.risk_states)


def _validate_system(s: System) -> None:
    if not s.components:
        raise ModelError("no components")
    names = [c.name for c in s.components]
    if len(set(names)) != len(names):
        raise ModelError("duplicate component names")
    alpha = set(s.alphabet)
    if len(alpha) != len(s.alphabet):
        raise ModelError("duplicate interaction in alphabet")
    for c in s.components:
        if len(set(c.locations)) != len(c.locations):
            raise ModelError(f"duplicate locations in component {c.name!r}")
        if len(set(c.variables)) != len(c.variables):
            raise ModelError(f"duplicate variables in component {c.name!r}")
        if c.initial_location not in c.locations:
            raise ModelError(f"initial location {c.initial_location!r} not declared in {c.name!r}")
        if set(c.initial_valuation) != set(c.variables):
            raise ModelError(f"initial valuation of {c.name!r} must assign every variable")
        declared = set(c.variables)
        for t in c.transitions:
            if t.source not in c.locations or t.destination not in c.locations:
                raise ModelError(f"transition of {c.name!r} uses undeclared location")
            if t.label not in alpha:
                raise ModelError(f"undeclared interaction {t.label!r} in component {c.name!r}")
            if not expr_vars(t.guard) <= declared:
                raise ModelError(f"guard of {c.name!r} references undeclared variable")
            if tuple(v for v, _ in t.update) != c.variables:
                raise ModelError(f"update of {c.name!r} must assign every variable in order")
            for _, f in t.update:
                if not expr_vars(f) <= declared:
                    raise ModelError(f"update of {c.name!r} references undeclared variable")
    used = set()
    for c in s.components:
        used |= c.alphabet
    for a in s.alphabet:
        if a not in used:
            raise ModelError(f"interaction {a!r} is not used by any component")
    closure_and_validate(s.priorities)
    for low, high in s.priorities:
        if low not in alpha or high not in alpha:
            raise ModelError(f"priority over undeclared interaction: {low} < {high}")
    for risk in s.risk_states:
        for cname, loc, valpairs in risk.constraints:
            c = s.components[s.component_index(cname)]
            if loc not in c.locations:
                raise ModelError(f"risk location {loc!r} not in component {cname!r}")
            for v, _ in valpairs:
                if v not in c.variables:
                    raise ModelError(f"risk variable {v!r} not in component {cname!r}")


def closure_and_validate(p: PrioritySet):
    """Transitive closure of the priority pairs; reject reflexive results.

    Raises CircularPriorityError naming one cycle when some interaction ends up
    below itself.
    """
    pairs = set(p.pairs if isinstance(p, PrioritySet) else p)
    succ = {}
    for low, high in pairs:
        succ.setdefault(low, set()).add(high)
    closed = set(pairs)
    changed = True
    while changed:
        changed = False
        for low, high in list(closed):
            for nxt in succ.get(high, ()):
                if (low, nxt) not in closed:
                    closed.add((low, nxt))
                    succ.setdefault(low, set()).add(nxt)
                    changed = True
    for low, high in closed:
        if low == high:
            raise CircularPriorityError(_find_cycle(pairs, low))
    return closed


def _find_cycle(pairs, start):
    succ = {}
    for low, high in pairs:
        succ.setdefault(low, []).append(high)
    path, seen = [start], {start}
    while True:
        cur = path[-1]
        for nxt in succ.get(cur, []):
            if nxt == start:
                return path
            if nxt not in seen:
                seen.add(nxt)
                path.append(nxt)
                break
        else:
            path.pop()
            if not path:
                return [start]


def participants(s: System, sigma: str) -> set:
    """Indices of the components that declare sigma (joint participation)."""
    if sigma not in s.alphabet:
        raise ModelError(f"unknown interaction {sigma!r}")
    return {i for i, c in enumerate(s.components) if sigma in c.alphabet}


def split_alphabet(s: System, first: set):
    """Partition the alphabet by a component split: (local-to-first, local-to-rest, shared)."""
    indices = set(range(len(s.components)))
    first = set(first)
    if not first or not first < indices:
        raise ModelError("split must be a nonempty strict subset of component indices")
    in_first, in_rest = set(), set()
    for i, c in enumerate(s.components):
        (in_first if i in first else in_rest).update(c.alphabet)
    sigma12 = in_first & in_rest
    return in_first - sigma12, in_rest - sigma12, sigma12


# --------------------------------------------------------------------------
# Model document format

def parse_system(text: str) -> System:
    return _Parser(text).parse()


def system_to_text(s: System) -> str:
    out = ["system {"]
    out.append("  alphabet " + " ".join(s.alphabet) + ";")
    for c in s.components:
        out.append(f"  component {c.name} {{")
        out.append("    locations " + " ".join(c.locations) + ";")
        if c.variables:
            out.append("    vars " + " ".join(c.variables) + ";")
        init = ["    init", c.initial_location]
        init += [f"{v}={int(c.initial_valuation[v])}" for v in c.variables]
        out.append(" ".join(init) + ";")
        for t in c.transitions:
            line = f"    on {t.label} from {t.source} to {t.destination}"
            if t.guard != TRUE:
                line += " when " + expr_to_text(t.guard)
            nontrivial = [(v, f) for v, f in t.update if f != ("var", v)]
            if nontrivial:
                line += " set " + " ".join(f"{v}:={expr_to_text(f)}" for v, f in nontrivial)
            out.append(line + ";")
        out.append("  }")
    for low, high in s.priorities:
        out.append(f"  priority {low} < {high};")
    for risk in s.risk_states:
        parts = []
        for cname, loc, valpairs in risk.constraints:
            part = f"{cname}@{loc}"
            for v, b in valpairs:
                part += f" {v}={int(b)}"
            parts.append(part)
        out.append("  risk { " + " & ".join(parts) + " }")
    out.append("}")
    return "\n".join(out) + "\n"


class _Parser:
    def __init__(self, text: str):
        self.toks = []
        self.positions = []
        self._tokenize(text)
        self.pos = 0

    def _tokenize(self, text: str) -> None:
        i, line, col = 0, 1, 1
        n = len(text)
        while i < n:
            c = text[i]
            if c == "\n":
                i += 1
                line += 1
                col = 1
                continue
            if c.isspace():
                i += 1
                col += 1
                continue
            if text.startswith("//", i):
                while i < n and text[i] != "\n":
                    i += 1
                continue
            if text.startswith(":=", i):
                self._emit(":=", line, col)
                i += 2
                col += 2
                continue
            if c in "{};<@&=()!|#":
                self._emit(c, line, col)
                i += 1
                col += 1
                continue
            if c.isalnum() or c == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                self._emit(text[i:j], line, col)
                col += j - i
                i = j
                continue
            raise ModelError(f"syntax error at line {line}, column {col}: bad character {c!r}")
        self._emit(None, line, col)

    def _emit(self, tok, line, col):
        self.toks.append(tok)
        self.positions.append((line, col))

    def _fail(self, msg):
        line, col = self.positions[self.pos]
        raise ModelError(f"syntax error at line {line}, column {col}: {msg}")

    def peek(self):
        return self.toks[self.pos]

    def take(self, expected=None):
        tok = self.toks[self.pos]
        if tok is None:
            self._fail("unexpected end of document")
        if expected is not None and tok != expected:
            self._fail(f"expected {expected!r}, found {tok!r}")
        self.pos += 1
        return tok

    def ident(self, what="identifier"):
        tok = self.peek()
        if tok == SHARP:
            self.pos += 1
            return SHARP
        if tok is None or not (tok[0].isalpha() or tok[0] == "_"):
            self._fail(f"expected {what}, found {tok!r}")
        self.pos += 1
        return tok

    def parse(self) -> System:
        self.take("system")
        self.take("{")
        alphabet = None
        components = []
        priorities = []
        risks = []
        while self.peek() != "}":
            tok = self.peek()
            if tok == "alphabet":
                self.take()
                alphabet = []
                while self.peek() != ";":
                    alphabet.append(self.ident("interaction"))
                self.take(";")
            elif tok == "component":
                components.append(self._component())
            elif tok == "priority":
                self.take()
                low = self.ident("interaction")
                self.take("<")
                high = self.ident("interaction")
                self.take(";")
                priorities.append((low, high))
            elif tok == "risk":
                risks.append(self._risk())
            else:
                self._fail(f"expected component, priority, risk, or alphabet, found {tok!r}")
        self.take("}")
        if alphabet is None:
            seen = []
            for c in components:
                for t in c.transitions:
                    if t.label not in seen:
                        seen.append(t.label)
            alphabet = seen
        return System(tuple(components), tuple(alphabet), PrioritySet(tuple(priorities)), tuple(risks))

    def _component(self) -> Component:
        self.take("component")
        name = self.ident("component name")
        self.take("{")
        self.take("locations")
        locations = []
        while self.peek() != ";":
            locations.append(self.ident("location"))
        self.take(";")
        variables = []
        if self.peek() == "vars":
            self.take()
            while self.peek() != ";":
                v = self.ident("variable")
                if v in _KEYWORDS:
                    self._fail(f"variable name {v!r} is reserved")
                variables.append(v)
            self.take(";")
        self.take("init")
        init_loc = self.ident("location")
        init_val = {}
        while self.peek() != ";":
            v = self.ident("variable")
            self.take("=")
            init_val[v] = self._bit()
        self.take(";")
        for v in variables:
            init_val.setdefault(v, False)
        transitions = []
        while self.peek() == "on":
            transitions.append(self._transition(variables))
        self.take("}")
        return Component(name, tuple(locations), tuple(variables), tuple(transitions),
                         init_loc, init_val)

    def _transition(self, variables) -> Transition:
        self.take("on")
        label = self.ident("interaction")
        self.take("from")
        src = self.ident("location")
        self.take("to")
        dst = self.ident("location")
        guard = TRUE
        if self.peek() == "when":
            self.take()
            guard = self._expr()
        updates = {}
        if self.peek() == "set":
            self.take()
            while self.peek() not in (";", None):
                v = self.ident("variable")
                self.take(":=")
                updates[v] = self._expr()
        self.take(";")
        full = tuple((v, updates.get(v, ("var", v))) for v in variables)
        return Transition(src, guard, label, full, dst)

    def _risk(self) -> PartialConfiguration:
        self.take("risk")
        self.take("{")
        constraints = []
        while True:
            cname = self.ident("component name")
            self.take("@")
            loc = self.ident("location")
            valpairs = []
            while self.peek() not in ("&", "}"):
                v = self.ident("variable")
                self.take("=")
                valpairs.append((v, self._bit()))
            constraints.append((cname, loc, tuple(valpairs)))
            if self.peek() == "&":
                self.take()
            else:
                break
        self.take("}")
        return PartialConfiguration(tuple(constraints))

    def _bit(self) -> bool:
        tok = self.take()
        if tok not in ("0", "1"):
            self._fail(f"expected 0 or 1, found {tok!r}")
        return tok == "1"

    def _expr(self):
        try:
            e, pos = _parse_or(self.toks[:-1], self.pos)
        except ExprSyntaxError as exc:
            self._fail(str(exc))
        self.pos = pos
        return e
