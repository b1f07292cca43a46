"""Subatomic formulae: AST, parser/printer, substitutions, classification."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

AND = "&"
OR = "|"
CONNECTIVES = (AND, OR)


class FormulaError(Exception):
    pass


class ParseError(FormulaError):
    pass


class SubstitutionInNegation(FormulaError):
    pass


class VariableCapture(FormulaError):
    pass


class BudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class Unit:
    value: int

    def __str__(self):
        return show(self)


@dataclass(frozen=True)
class Var:
    name: str
    rng: frozenset = field(default_factory=frozenset)

    def __str__(self):
        return show(self)


@dataclass(frozen=True)
class Bin:
    conn: str  # "&", "|" or an atom name
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return show(self)


@dataclass(frozen=True)
class ESub:
    arg: "Formula"
    var: str
    body: "Formula"

    def __str__(self):
        return show(self)


@dataclass(frozen=True)
class GSub:
    arg: Unit
    var: str
    guard: str
    body: "Formula"

    def __post_init__(self):
        if not isinstance(self.arg, Unit):
            raise FormulaError("guarded substitution argument must be a unit")

    def __str__(self):
        return show(self)


Formula = Unit | Var | Bin | ESub | GSub

ZERO = Unit(0)
ONE = Unit(1)


def is_atom(conn):
    return conn not in CONNECTIVES


def up(conn):
    return conn if is_atom(conn) else AND


def down(conn):
    return conn if is_atom(conn) else OR


def dual(conn):
    if conn == AND:
        return OR
    if conn == OR:
        return AND
    return conn


def var(name, *guards):
    return Var(name, frozenset(guards))


# ---------------------------------------------------------------- printing

def _rng(r):
    return "{" + ",".join(sorted(r)) + "}" if r else ""


def show(f) -> str:
    if isinstance(f, Unit):
        return str(f.value)
    if isinstance(f, Var):
        return f.name + _rng(f.rng)
    if isinstance(f, Bin):
        op = f.conn if not is_atom(f.conn) else f"<{f.conn}>"
        return f"({show(f.left)} {op} {show(f.right)})"
    if isinstance(f, ESub):
        return f"[{show(f.arg)} / {f.var}] {show(f.body)}"
    if isinstance(f, GSub):
        return f"[{show(f.arg)} / {f.var}]^{f.guard} {show(f.body)}"
    raise TypeError(f)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(<[A-Za-z_][\w.']*>)|(~?[A-Za-z_][\w.']*)|([01])|(.))")
NAME = re.compile(r"~?[A-Za-z_][\w.']*$")


def tokenize(text):
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        pos = m.end()
        if m.group(1):
            out.append(("conn", m.group(1)[1:-1]))
        elif m.group(2):
            out.append(("name", m.group(2)))
        elif m.group(3):
            out.append(("unit", m.group(3)))
        elif m.group(4).strip():
            out.append(("sym", m.group(4)))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, val=None):
        k, v = self.peek()
        if k is None or (kind and k != kind) or (val and v != val):
            raise ParseError(f"expected {val or kind}, got {v!r} at token {self.i}")
        self.i += 1
        return v

    def binop(self):
        k, v = self.peek()
        if k == "conn":
            self.i += 1
            return v
        if k == "sym" and v in CONNECTIVES:
            self.i += 1
            return v
        return None

    def formula(self):
        left = self.primary()
        op = self.binop()
        if op is None:
            return left
        right = self.primary()
        if self.binop() is not None:
            raise ParseError("ambiguous unparenthesised binary chain")
        return Bin(op, left, right)

    def primary(self):
        k, v = self.peek()
        if k == "unit":
            self.i += 1
            return Unit(int(v))
        if k == "name":
            self.i += 1
            rng = frozenset()
            if self.peek() == ("sym", "{"):
                self.i += 1
                gs = []
                while self.peek() != ("sym", "}"):
                    gs.append(self.guard())
                    if self.peek() == ("sym", ","):
                        self.i += 1
                self.take("sym", "}")
                rng = frozenset(gs)
            return Var(v, rng)
        if (k, v) == ("sym", "("):
            self.i += 1
            f = self.formula()
            self.take("sym", ")")
            return f
        if (k, v) == ("sym", "["):
            self.i += 1
            arg = self.formula()
            self.take("sym", "/")
            x = self.take("name")
            self.take("sym", "]")
            if self.peek() == ("sym", "^"):
                self.i += 1
                g = self.guard()
                if not isinstance(arg, Unit):
                    raise ParseError("guarded substitution needs a unit argument")
                return GSub(arg, x, g, self.primary())
            return ESub(arg, x, self.primary())
        raise ParseError(f"unexpected token {v!r}")

    def guard(self):
        k, v = self.peek()
        if k in ("name", "unit"):
            self.i += 1
            # guards like g.1 tokenise as a name; bare digits are allowed too
            return v
        raise ParseError(f"bad guard {v!r}")


def parse(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    if p.i != len(p.toks):
        raise ParseError(f"trailing input at token {p.i}: {p.toks[p.i:]}")
    return f


# ---------------------------------------------------------------- basics

def size(f) -> int:
    if isinstance(f, Unit):
        return 1
    if isinstance(f, Var):
        return 1 + len(f.rng)
    if isinstance(f, Bin):
        return size(f.left) + size(f.right)
    return size(f.arg) + size(f.body)


def negate(f):
    if isinstance(f, Unit):
        return Unit(1 - f.value)
    if isinstance(f, Var):
        return f
    if isinstance(f, Bin):
        return Bin(dual(f.conn), negate(f.left), negate(f.right))
    raise SubstitutionInNegation(show(f))


def saturate(f, fn):
    if isinstance(f, Bin):
        return Bin(fn(f.conn), saturate(f.left, fn), saturate(f.right, fn))
    if isinstance(f, ESub):
        return ESub(saturate(f.arg, fn), f.var, saturate(f.body, fn))
    if isinstance(f, GSub):
        return GSub(f.arg, f.var, f.guard, saturate(f.body, fn))
    return f


def sat_up(f):
    return saturate(f, up)


def sat_down(f):
    return saturate(f, down)


def free_vars(f, bound=frozenset()) -> set:
    out = set()
    _fv(f, bound, out)
    return out


def _fv(f, bound, out):
    if isinstance(f, Var):
        if f.name not in bound:
            out.add(f.name)
    elif isinstance(f, Bin):
        _fv(f.left, bound, out)
        _fv(f.right, bound, out)
    elif isinstance(f, ESub):
        _fv(f.arg, bound, out)
        _fv(f.body, bound | {f.var}, out)
    elif isinstance(f, GSub):
        _fv(f.body, bound | {f.var}, out)


def occurrences(f, bound=frozenset()):
    """Yield (var, free?) for every variable occurrence."""
    if isinstance(f, Var):
        yield f, f.name not in bound
    elif isinstance(f, Bin):
        yield from occurrences(f.left, bound)
        yield from occurrences(f.right, bound)
    elif isinstance(f, ESub):
        yield from occurrences(f.arg, bound)
        yield from occurrences(f.body, bound | {f.var})
    elif isinstance(f, GSub):
        yield from occurrences(f.body, bound | {f.var})


def mentions(f, name) -> bool:
    """Does `name` occur in f, bound or free (binder positions excluded)."""
    return any(v.name == name for v, _ in occurrences(f))


def is_flat(f) -> bool:
    if isinstance(f, (ESub, GSub)):
        return False
    if isinstance(f, Bin):
        return is_flat(f.left) and is_flat(f.right)
    return True


def has_gsub(f) -> bool:
    if isinstance(f, GSub):
        return True
    if isinstance(f, Bin):
        return has_gsub(f.left) or has_gsub(f.right)
    if isinstance(f, ESub):
        return has_gsub(f.arg) or has_gsub(f.body)
    return False


def has_unit(f) -> bool:
    if isinstance(f, (Unit, GSub)):
        return True
    if isinstance(f, Bin):
        return has_unit(f.left) or has_unit(f.right)
    if isinstance(f, ESub):
        return has_unit(f.arg) or has_unit(f.body)
    return False


def atoms(f, out=None) -> list:
    out = [] if out is None else out
    if isinstance(f, Bin):
        if is_atom(f.conn) and f.conn not in out:
            out.append(f.conn)
        atoms(f.left, out)
        atoms(f.right, out)
    elif isinstance(f, ESub):
        atoms(f.arg, out)
        atoms(f.body, out)
    elif isinstance(f, GSub):
        atoms(f.body, out)
    return out


def classify(f) -> dict:
    return {"flat": is_flat(f), "open": not has_unit(f), "closed": not free_vars(f)}


def leaves(f):
    if isinstance(f, (Unit, Var)):
        yield f
    elif isinstance(f, Bin):
        yield from leaves(f.left)
        yield from leaves(f.right)
    else:
        raise FormulaError("leaves() expects a flat formula")


# ---------------------------------------------------------------- substitution

def add_range(f, s, bound=frozenset()):
    s = frozenset(s)
    if not s:
        return f
    if isinstance(f, Var):
        return f if f.name in bound else Var(f.name, f.rng | s)
    if isinstance(f, Unit):
        return f
    if isinstance(f, Bin):
        return Bin(f.conn, add_range(f.left, s, bound), add_range(f.right, s, bound))
    if isinstance(f, ESub):
        return ESub(add_range(f.arg, s, bound), f.var, add_range(f.body, s, bound | {f.var}))
    return GSub(f.arg, f.var, f.guard, add_range(f.body, s, bound | {f.var}))


def substitute(bindings: dict, f):
    """Simultaneous actual substitution with range inheritance."""
    if not bindings:
        return f
    fvs = {x: free_vars(a) for x, a in bindings.items()}
    return _subst(bindings, fvs, f)


def _subst(b, fvs, f):
    if isinstance(f, Var):
        a = b.get(f.name)
        return f if a is None else add_range(a, f.rng)
    if isinstance(f, Unit):
        return f
    if isinstance(f, Bin):
        return Bin(f.conn, _subst(b, fvs, f.left), _subst(b, fvs, f.right))
    arg = _subst(b, fvs, f.arg) if isinstance(f, ESub) else f.arg
    inner = {x: a for x, a in b.items() if x != f.var}
    live = {x: a for x, a in inner.items() if x in free_vars(f.body, frozenset({f.var}))}
    for x in live:
        if f.var in fvs[x]:
            raise VariableCapture(f"{f.var} would capture a free variable of the binding for {x}")
    body = _subst(live, fvs, f.body) if live else f.body
    if isinstance(f, ESub):
        return ESub(arg, f.var, body)
    return GSub(f.arg, f.var, f.guard, body)


def subst1(a, x, f):
    return substitute({x: a}, f)


def guarded_substitute(u: Unit, y: str, p: str, f):
    if isinstance(f, Var):
        return u if f.name == y and p in f.rng else f
    if isinstance(f, Unit):
        return f
    if isinstance(f, Bin):
        return Bin(f.conn, guarded_substitute(u, y, p, f.left), guarded_substitute(u, y, p, f.right))
    if isinstance(f, ESub):
        arg = guarded_substitute(u, y, p, f.arg)
        body = f.body if f.var == y else guarded_substitute(u, y, p, f.body)
        return ESub(arg, f.var, body)
    body = f.body if f.var == y else guarded_substitute(u, y, p, f.body)
    return GSub(f.arg, f.var, f.guard, body)


def explicit(pairs: Iterable, f):
    """[A1/x1]...[An/xn] f, first pair outermost."""
    for x, a in reversed(list(pairs)):
        f = ESub(a, x, f)
    return f


def guarded(triples: Iterable, f):
    """Guarded chain from (var, unit, guard) triples, first outermost."""
    for x, u, g in reversed(list(triples)):
        f = GSub(u, x, g, f)
    return f


def actualize(f, budget=10**6):
    """Carry out every substitution, innermost first."""
    counter = [budget]
    return _act(f, counter)


def _charge(counter, f):
    counter[0] -= size(f)
    if counter[0] < 0:
        raise BudgetExceeded("substitution budget exhausted")


def _act(f, counter):
    if isinstance(f, (Unit, Var)):
        return f
    if isinstance(f, Bin):
        return Bin(f.conn, _act(f.left, counter), _act(f.right, counter))
    body = _act(f.body, counter)
    if isinstance(f, ESub):
        out = substitute({f.var: _act(f.arg, counter)}, body)
    else:
        out = guarded_substitute(f.arg, f.var, f.guard, body)
    _charge(counter, out)
    return out


# ---------------------------------------------------------------- factorisation

class Fresh:
    """Deterministic fresh-name supply, shared across calls when passed in."""

    def __init__(self, prefix="v", start=1):
        self.prefix = prefix
        self.n = start - 1

    def __call__(self):
        self.n += 1
        return f"{self.prefix}{self.n}"


def factorise(q, fresh: Fresh | None = None):
    """Split a flat substitution-free formula into (eta, linear open A)."""
    fresh = fresh or Fresh()
    eta = {}

    def go(f):
        if isinstance(f, (Unit, Var)):
            v = fresh()
            eta[v] = f
            return Var(v)
        if isinstance(f, Bin):
            l = go(f.left)
            return Bin(f.conn, l, go(f.right))
        raise FormulaError("factorise expects a flat formula")

    a = go(q)
    return eta, a


def pseudo_dual(f, pairs):
    swap = {}
    for x, xb in pairs:
        swap[x] = xb
        swap[xb] = x

    def go(g):
        if isinstance(g, Var):
            return Var(swap.get(g.name, g.name), g.rng)
        if isinstance(g, Bin):
            return Bin(g.conn, go(g.left), go(g.right))
        return g

    return go(negate(f))


def subformula_at(f, path):
    for step in path:
        f = children(f)[step]
    return f


def children(f):
    if isinstance(f, Bin):
        return (f.left, f.right)
    if isinstance(f, ESub):
        return (f.arg, f.body)
    if isinstance(f, GSub):
        return (f.body,)
    return ()


def conj(*fs):
    out = fs[0]
    for g in fs[1:]:
        out = Bin(AND, out, g)
    return out
