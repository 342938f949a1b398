"""Small Boolean expression language used in guards and updates.

Expressions are immutable nested tuples:
    ("const", bool) | ("var", name) | ("not", e) | ("and", e1, e2) | ("or", e1, e2)
"""

from __future__ import annotations

TRUE = ("const", True)
FALSE = ("const", False)


def var(name: str):
    return ("var", name)


def eval_expr(e, env) -> bool:
    """Evaluate under a mapping variable name -> bool."""
    tag = e[0]
    if tag == "const":
        return e[1]
    if tag == "var":
        return bool(env[e[1]])
    if tag == "not":
        return not eval_expr(e[1], env)
    if tag == "and":
        return eval_expr(e[1], env) and eval_expr(e[2], env)
    if tag == "or":
        return eval_expr(e[1], env) or eval_expr(e[2], env)
    raise ValueError(f"bad expression node: {e!r}")


def expr_vars(e) -> set:
    tag = e[0]
    if tag == "const":
        return set()
    if tag == "var":
        return {e[1]}
    if tag == "not":
        return expr_vars(e[1])
    return expr_vars(e[1]) | expr_vars(e[2])


def expr_to_text(e) -> str:
    tag = e[0]
    if tag == "const":
        return "1" if e[1] else "0"
    if tag == "var":
        return e[1]
    if tag == "not":
        return "!" + _atom_text(e[1])
    if tag == "and":
        return " & ".join(_atom_text(x) if x[0] == "or" else expr_to_text(x) for x in e[1:])
    if tag == "or":
        return " | ".join(expr_to_text(x) for x in e[1:])
    raise ValueError(f"bad expression node: {e!r}")


def _atom_text(e) -> str:
    if e[0] in ("const", "var", "not"):
        return expr_to_text(e)
    return "(" + expr_to_text(e) + ")"


class ExprSyntaxError(ValueError):
    pass


def parse_expr(text: str):
    """Parse a standalone expression string; grammar: or > and > not > atom."""
    toks = _tokenize(text)
    e, pos = _parse_or(toks, 0)
    if pos != len(toks):
        raise ExprSyntaxError(f"trailing tokens in expression: {toks[pos:]}")
    return e


def _tokenize(text: str):
    toks = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()!&|":
            toks.append(c)
            i += 1
        elif c.isalnum() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(text[i:j])
            i = j
        else:
            raise ExprSyntaxError(f"bad character {c!r} in expression")
    return toks


def _parse_or(toks, pos):
    e, pos = _parse_and(toks, pos)
    while pos < len(toks) and toks[pos] == "|":
        rhs, pos = _parse_and(toks, pos + 1)
        e = ("or", e, rhs)
    return e, pos


def _parse_and(toks, pos):
    e, pos = _parse_not(toks, pos)
    while pos < len(toks) and toks[pos] == "&":
        rhs, pos = _parse_not(toks, pos + 1)
        e = ("and", e, rhs)
    return e, pos


def _parse_not(toks, pos):
    if pos < len(toks) and toks[pos] == "!":
        e, pos = _parse_not(toks, pos + 1)
        return ("not", e), pos
    return _parse_atom(toks, pos)


def _parse_atom(toks, pos):
    if pos >= len(toks):
        raise ExprSyntaxError("unexpected end of expression")
    t = toks[pos]
    if t == "(":
        e, pos = _parse_or(toks, pos + 1)
        if pos >= len(toks) or toks[pos] != ")":
            raise ExprSyntaxError("missing closing parenthesis")
        return e, pos + 1
    if t in ("0", "false"):
        return FALSE, pos + 1
    if t in ("1", "true"):
        return TRUE, pos + 1
    if not (t[0].isalpha() or t[0] == "_"):
        raise ExprSyntaxError(f"expected expression, found {t!r}")
    return ("var", t), pos + 1
