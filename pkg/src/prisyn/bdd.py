"""Reduced ordered binary decision diagrams with a hash-consed unique table.

Nodes are integers: 0 and 1 are the terminals, every other id indexes the
manager's node store. Canonicity: two predicates over the same manager denote
the same function iff their root ids are equal.
"""

from __future__ import annotations

FALSE_ID = 0
TRUE_ID = 1

_OPS = ("and", "or", "xor", "implies", "iff")


class BddError(ValueError):
    pass


class Predicate:
    __slots__ = ("manager", "root")

    def __init__(self, manager, root):
        self.manager = manager
        self.root = root

    def __eq__(self, other):
        return (isinstance(other, Predicate)
                and other.manager is self.manager and other.root == self.root)

    def __hash__(self):
        return hash((id(self.manager), self.root))

    def __repr__(self):
        return f"Predicate(root={self.root})"

    @property
    def is_false(self):
        return self.root == FALSE_ID

    @property
    def is_true(self):
        return self.root == TRUE_ID


class Manager:
    """Owns the variable order, unique table, and operation cache."""

    def __init__(self, names):
        names = list(names)
        if len(set(names)) != len(names):
            raise BddError("duplicate variable names")
        self.names = names
        self.level_of = {n: i for i, n in enumerate(names)}
        self.n = len(names)
        # node store: id -> (level, lo, hi); terminals live at level self.n
        self._level = [self.n, self.n]
        self._lo = [0, 1]
        self._hi = [0, 1]
        self._unique = {}
        self._cache = {}

    # -- construction -------------------------------------------------------

    def _mk(self, level, lo, hi):
        if lo == hi:
            return lo
        key = (level, lo, hi)
        node = self._unique.get(key)
        if node is None:
            node = len(self._level)
            self._level.append(level)
            self._lo.append(lo)
            self._hi.append(hi)
            self._unique[key] = node
        return node

    @property
    def false(self):
        return Predicate(self, FALSE_ID)

    @property
    def true(self):
        return Predicate(self, TRUE_ID)

    def var(self, name):
        level = self.level_of.get(name)
        if level is None:
            raise BddError(f"unknown variable {name!r}")
        return Predicate(self, self._mk(level, FALSE_ID, TRUE_ID))

    def nvar(self, name):
        return Predicate(self, self._mk(self.level_of[name], TRUE_ID, FALSE_ID))

    def literal(self, name, value: bool):
        return self.var(name) if value else self.nvar(name)

    def _check(self, *preds):
        for p in preds:
            if p.manager is not self:
                raise BddError("predicate belongs to a different manager")

    # -- boolean algebra ----------------------------------------------------

    def apply(self, op, p: Predicate, q: Predicate) -> Predicate:
        if op not in _OPS:
            raise BddError(f"unknown operation {op!r}")
        self._check(p, q)
        return Predicate(self, self._apply(op, p.root, q.root))

    def _apply(self, op, a, b):
        if op == "and":
            if a == FALSE_ID or b == FALSE_ID:
                return FALSE_ID
            if a == TRUE_ID:
                return b
            if b == TRUE_ID:
                return a
            if a == b:
                return a
        elif op == "or":
            if a == TRUE_ID or b == TRUE_ID:
                return TRUE_ID
            if a == FALSE_ID:
                return b
            if b == FALSE_ID:
                return a
            if a == b:
                return a
        elif op == "xor":
            if a == FALSE_ID:
                return b
            if b == FALSE_ID:
                return a
            if a == b:
                return FALSE_ID
            if a == TRUE_ID:
                return self._neg(b)
            if b == TRUE_ID:
                return self._neg(a)
        elif op == "implies":
            if a == FALSE_ID or b == TRUE_ID:
                return TRUE_ID
            if a == TRUE_ID:
                return b
            if b == FALSE_ID:
                return self._neg(a)
            if a == b:
                return TRUE_ID
        elif op == "iff":
            if a == TRUE_ID:
                return b
            if b == TRUE_ID:
                return a
            if a == FALSE_ID:
                return self._neg(b)
            if b == FALSE_ID:
                return self._neg(a)
            if a == b:
                return TRUE_ID
        key = (op, a, b)
        res = self._cache.get(key)
        if res is not None:
            return res
        la, lb = self._level[a], self._level[b]
        if la <= lb:
            lo_a, hi_a, lev = self._lo[a], self._hi[a], la
        else:
            lo_a, hi_a, lev = a, a, lb
        if lb <= la:
            lo_b, hi_b = self._lo[b], self._hi[b]
        else:
            lo_b, hi_b = b, b
        res = self._mk(lev, self._apply(op, lo_a, lo_b), self._apply(op, hi_a, hi_b))
        self._cache[key] = res
        return res

    def negate(self, p: Predicate) -> Predicate:
        self._check(p)
        return Predicate(self, self._neg(p.root))

    def _neg(self, a):
        if a == FALSE_ID:
            return TRUE_ID
        if a == TRUE_ID:
            return FALSE_ID
        key = ("not", a)
        res = self._cache.get(key)
        if res is None:
            res = self._mk(self._level[a], self._neg(self._lo[a]), self._neg(self._hi[a]))
            self._cache[key] = res
        return res

    def ite(self, c: Predicate, t: Predicate, e: Predicate) -> Predicate:
        self._check(c, t, e)
        return Predicate(self, self._ite(c.root, t.root, e.root))

    def _ite(self, c, t, e):
        if c == TRUE_ID:
            return t
        if c == FALSE_ID:
            return e
        if t == e:
            return t
        if t == TRUE_ID and e == FALSE_ID:
            return c
        if t == FALSE_ID and e == TRUE_ID:
            return self._neg(c)
        key = ("ite", c, t, e)
        res = self._cache.get(key)
        if res is not None:
            return res
        lev = min(self._level[c], self._level[t], self._level[e])
        c0, c1 = self._cofactors(c, lev)
        t0, t1 = self._cofactors(t, lev)
        e0, e1 = self._cofactors(e, lev)
        res = self._mk(lev, self._ite(c0, t0, e0), self._ite(c1, t1, e1))
        self._cache[key] = res
        return res

    def _cofactors(self, a, lev):
        if self._level[a] == lev:
            return self._lo[a], self._hi[a]
        return a, a

    # -- quantification and renaming ---------------------------------------

    def _levels_key(self, names):
        levels = frozenset(self.level_of[n] for n in names)
        return levels

    def exists(self, names, p: Predicate) -> Predicate:
        self._check(p)
        levels = self._levels_key(names)
        if not levels:
            return p
        return Predicate(self, self._exists(p.root, levels, max(levels)))

    def _exists(self, a, levels, maxlev):
        if a <= TRUE_ID or self._level[a] > maxlev:
            return a
        key = ("ex", a, levels)
        res = self._cache.get(key)
        if res is not None:
            return res
        lev = self._level[a]
        lo = self._exists(self._lo[a], levels, maxlev)
        hi = self._exists(self._hi[a], levels, maxlev)
        if lev in levels:
            res = self._apply("or", lo, hi)
        else:
            res = self._mk(lev, lo, hi)
        self._cache[key] = res
        return res

    def and_exists(self, p: Predicate, q: Predicate, names) -> Predicate:
        """exists(names, p & q) without building the full conjunction."""
        self._check(p, q)
        levels = self._levels_key(names)
        if not levels:
            return self.apply("and", p, q)
        return Predicate(self, self._and_exists(p.root, q.root, levels, max(levels)))

    def _and_exists(self, a, b, levels, maxlev):
        if a == FALSE_ID or b == FALSE_ID:
            return FALSE_ID
        if a == TRUE_ID and b == TRUE_ID:
            return TRUE_ID
        if self._level[a] > maxlev and self._level[b] > maxlev:
            return self._apply("and", a, b)
        if a > b:
            a, b = b, a
        key = ("ae", a, b, levels)
        res = self._cache.get(key)
        if res is not None:
            return res
        lev = min(self._level[a], self._level[b])
        a0, a1 = self._cofactors(a, lev)
        b0, b1 = self._cofactors(b, lev)
        lo = self._and_exists(a0, b0, levels, maxlev)
        if lev in levels:
            if lo == TRUE_ID:
                res = TRUE_ID
            else:
                hi = self._and_exists(a1, b1, levels, maxlev)
                res = self._apply("or", lo, hi)
        else:
            hi = self._and_exists(a1, b1, levels, maxlev)
            res = self._mk(lev, lo, hi)
        self._cache[key] = res
        return res

    def substitute(self, p: Predicate, from_names, to_names) -> Predicate:
        """Simultaneous renaming; the mapping must preserve the variable order."""
        self._check(p)
        if len(from_names) != len(to_names):
            raise BddError("substitute: name lists differ in length")
        if set(from_names) & set(to_names):
            raise BddError("substitute: overlapping name lists")
        mapping = {}
        for f, t in zip(from_names, to_names):
            mapping[self.level_of[f]] = self.level_of[t]
        pairs = sorted(mapping.items())
        images = [t for _, t in pairs]
        if images != sorted(images):
            raise BddError("substitute: renaming does not preserve the variable order")
        key_map = tuple(pairs)
        return Predicate(self, self._rename(p.root, mapping, key_map))

    def _rename(self, a, mapping, key_map):
        if a <= TRUE_ID:
            return a
        key = ("ren", a, key_map)
        res = self._cache.get(key)
        if res is not None:
            return res
        lev = self._level[a]
        lo = self._rename(self._lo[a], mapping, key_map)
        hi = self._rename(self._hi[a], mapping, key_map)
        res = self._mk(mapping.get(lev, lev), lo, hi)
        self._cache[key] = res
        return res

    def restrict(self, p: Predicate, name, value: bool) -> Predicate:
        self._check(p)
        return Predicate(self, self._restrict(p.root, self.level_of[name], value))

    def _restrict(self, a, lev, value):
        if a <= TRUE_ID or self._level[a] > lev:
            return a
        key = ("rs", a, lev, value)
        res = self._cache.get(key)
        if res is not None:
            return res
        if self._level[a] == lev:
            res = self._hi[a] if value else self._lo[a]
        else:
            res = self._mk(self._level[a],
                           self._restrict(self._lo[a], lev, value),
                           self._restrict(self._hi[a], lev, value))
        self._cache[key] = res
        return res

    # -- evaluation, cubes, enumeration ------------------------------------

    def evaluate(self, p: Predicate, env) -> bool:
        self._check(p)
        node = p.root
        while node > TRUE_ID:
            name = self.names[self._level[node]]
            node = self._hi[node] if env[name] else self._lo[node]
        return node == TRUE_ID

    def pick_cube(self, p: Predicate, care=None) -> dict:
        """One partial assignment implying p; error when p is unsatisfiable."""
        self._check(p)
        if p.root == FALSE_ID:
            raise BddError("pick_cube of an unsatisfiable predicate")
        cube = {}
        node = p.root
        while node > TRUE_ID:
            name = self.names[self._level[node]]
            if self._hi[node] != FALSE_ID:
                cube[name] = True
                node = self._hi[node]
            else:
                cube[name] = False
                node = self._lo[node]
        if care:
            for name in care:
                cube.setdefault(name, False)
        return cube

    def enumerate_cubes(self, p: Predicate):
        """Disjoint cubes (partial assignments) whose disjunction equals p."""
        self._check(p)

        def walk(node, cube):
            if node == FALSE_ID:
                return
            if node == TRUE_ID:
                yield dict(cube)
                return
            name = self.names[self._level[node]]
            cube[name] = False
            yield from walk(self._lo[node], cube)
            cube[name] = True
            yield from walk(self._hi[node], cube)
            del cube[name]

        yield from walk(p.root, {})

    def assignments_over(self, p: Predicate, names):
        """All total valuations of `names` admitted by p (other vars projected away)."""
        self._check(p)
        others = [n for n in self.names if n not in set(names)]
        proj = self.exists(others, p)
        ordered = [n for n in self.names if n in set(names)]

        def walk(i, pred, env):
            if pred.is_false:
                return
            if i == len(ordered):
                yield dict(env)
                return
            name = ordered[i]
            for value in (False, True):
                env[name] = value
                yield from walk(i + 1, self.restrict(pred, name, value), env)
            del env[name]

        yield from walk(0, proj, {})

    def from_expr(self, expr, name_of_var) -> Predicate:
        """Build a predicate from a boolexpr tuple; name_of_var maps AST names."""
        tag = expr[0]
        if tag == "const":
            return self.true if expr[1] else self.false
        if tag == "var":
            return self.var(name_of_var(expr[1]))
        if tag == "not":
            return self.negate(self.from_expr(expr[1], name_of_var))
        if tag in ("and", "or"):
            return self.apply(tag, self.from_expr(expr[1], name_of_var),
                              self.from_expr(expr[2], name_of_var))
        raise BddError(f"bad expression node {expr!r}")

    def conjoin(self, preds) -> Predicate:
        """Balanced conjunction of a list of predicates."""
        preds = list(preds)
        if not preds:
            return self.true
        while len(preds) > 1:
            nxt = []
            for i in range(0, len(preds) - 1, 2):
                nxt.append(self.apply("and", preds[i], preds[i + 1]))
            if len(preds) % 2:
                nxt.append(preds[-1])
            preds = nxt
        return preds[0]

    def disjoin(self, preds) -> Predicate:
        preds = list(preds)
        if not preds:
            return self.false
        while len(preds) > 1:
            nxt = []
            for i in range(0, len(preds) - 1, 2):
                nxt.append(self.apply("or", preds[i], preds[i + 1]))
            if len(preds) % 2:
                nxt.append(preds[-1])
            preds = nxt
        return preds[0]

    def node_count(self, p: Predicate) -> int:
        self._check(p)
        seen = set()
        stack = [p.root]
        while stack:
            node = stack.pop()
            if node <= TRUE_ID or node in seen:
                continue
            seen.add(node)
            stack.append(self._lo[node])
            stack.append(self._hi[node])
        return len(seen)

    def to_dot(self, p: Predicate) -> str:
        self._check(p)
        lines = ["digraph bdd {"]
        seen = set()
        stack = [p.root]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            if node == FALSE_ID:
                lines.append('  n0 [shape=box label="0"];')
            elif node == TRUE_ID:
                lines.append('  n1 [shape=box label="1"];')
            else:
                lines.append(f'  n{node} [label="{self.names[self._level[node]]}"];')
                lines.append(f"  n{node} -> n{self._lo[node]} [style=dashed];")
                lines.append(f"  n{node} -> n{self._hi[node]};")
                stack.append(self._lo[node])
                stack.append(self._hi[node])
        lines.append("}")
        return "\n".join(lines)


def make_vars(names) -> Manager:
    return Manager(names)
