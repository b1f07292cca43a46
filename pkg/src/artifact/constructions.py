"""Derivation-producing constructions: merges, extraction, eversion, guarded
application, projections and superpositions."""
from __future__ import annotations

from dataclasses import dataclass

from . import derivation as D
from . import formula as F
from .derivation import DBin, DESub, DGSub, Exp, Inf, Leaf
from .formula import AND, OR, Bin, ESub, GSub, Unit, Var, down, up


class ConstructionError(Exception):
    pass


class ArityMismatch(ConstructionError):
    pass


class NotOpen(ConstructionError):
    pass


class NotFlat(ConstructionError):
    pass


class FreshnessViolation(ConstructionError):
    pass


class IndexOutOfRange(ConstructionError):
    pass


class PreimageMismatch(ConstructionError):
    pass


class GuardError(ConstructionError):
    pass


# ---------------------------------------------------------------- helpers

def names(*fs):
    """Every variable name occurring in the formulae, binders included."""
    out = set()
    for f in fs:
        _names(f, out)
    return out


def _names(f, out):
    if isinstance(f, Var):
        out.add(f.name)
    elif isinstance(f, Bin):
        _names(f.left, out)
        _names(f.right, out)
    elif isinstance(f, ESub):
        out.add(f.var)
        _names(f.arg, out)
        _names(f.body, out)
    elif isinstance(f, GSub):
        out.add(f.var)
        _names(f.body, out)


def fresh_name(base, avoid):
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def ordered_vars(f):
    """Free variables in order of first occurrence."""
    seen = []
    for v, free in F.occurrences(f):
        if free and v.name not in seen:
            seen.append(v.name)
    return seen


def _restrict(m, f, drop=None):
    fv = F.free_vars(f)
    return {x: a for x, a in m.items() if x in fv and x != drop}


def _bind(m, f):
    return F.substitute(_restrict(m, f), f)


def _has_unit_leaf(f):
    if isinstance(f, Unit):
        return True
    if isinstance(f, Bin):
        return _has_unit_leaf(f.left) or _has_unit_leaf(f.right)
    if isinstance(f, ESub):
        return _has_unit_leaf(f.arg) or _has_unit_leaf(f.body)
    if isinstance(f, GSub):
        return _has_unit_leaf(f.body)
    return False


def rows(*fs):
    """Vertical chain of formulae, each step an expansion; repeats are skipped."""
    out = []
    for f in fs:
        if not out or out[-1] != f:
            out.append(f)
    return D.exp_chain(*out)


def seq(*ds):
    return D.seq(*ds)


def reverse(d):
    """Upside-down copy of a derivation whose vertical steps are all expansions."""
    if isinstance(d, Leaf):
        return d
    if isinstance(d, DBin):
        return DBin(d.conn, reverse(d.left), reverse(d.right))
    if isinstance(d, DESub):
        return DESub(reverse(d.arg), d.var, reverse(d.body))
    if isinstance(d, DGSub):
        return DGSub(d.arg, d.var, d.guard, reverse(d.body))
    if isinstance(d, Exp):
        return Exp(reverse(d.bottom), reverse(d.top))
    raise ConstructionError("inference steps are not invertible")


def _inf(p, d):
    """Inference from formula p onto derivation d, omitted when nothing changes."""
    return d if D.premise(d) == p else Inf(Leaf(p), d)


def _inf_to(d, c):
    return d if D.conclusion(d) == c else Inf(d, Leaf(c))


def dsubst(mapping, d):
    """Actual substitution applied throughout a derivation."""
    if not mapping:
        return d
    if isinstance(d, Leaf):
        return Leaf(F.substitute(mapping, d.f))
    if isinstance(d, DBin):
        return DBin(d.conn, dsubst(mapping, d.left), dsubst(mapping, d.right))
    if isinstance(d, (DESub, DGSub)):
        inner = {x: a for x, a in mapping.items() if x != d.var}
        for a in inner.values():
            if d.var in F.free_vars(a):
                raise F.VariableCapture(d.var)
        body = dsubst(inner, d.body)
        if isinstance(d, DESub):
            return DESub(dsubst(mapping, d.arg), d.var, body)
        return DGSub(d.arg, d.var, d.guard, body)
    top, bot = dsubst(mapping, d.top), dsubst(mapping, d.bottom)
    return Inf(top, bot, d.label) if isinstance(d, Inf) else Exp(top, bot)


def _align(a, B, C):
    xs = ordered_vars(a)
    if isinstance(B, dict):
        Bm, Cm = dict(B), dict(C)
        if set(Bm) != set(Cm) or not set(xs) <= set(Bm):
            raise ArityMismatch("bindings must cover the free variables")
    else:
        if len(B) != len(xs) or len(C) != len(xs):
            raise ArityMismatch(f"expected {len(xs)} bindings, got {len(B)} and {len(C)}")
        Bm, Cm = dict(zip(xs, B)), dict(zip(xs, C))
    return Bm, Cm


# ---------------------------------------------------------------- constructor lemmas

def merge_constructor(A, B, C, Dd, alpha, side, x="x", y=None, z=None):
    """Left: <A\\x>B a <C\\x>D to <A\\y><C\\z>([y/x]B a [z/x]D), seven rows.
    Right: <A\\y><C\\z>[y a z/x]B to <A a C\\x>B, four rows."""
    fs = (A, B, C, Dd)
    if any(F.has_gsub(f) for f in fs):
        raise ConstructionError("guarded substitutions are not allowed here")
    avoid = names(*fs) | {x}
    y = y or fresh_name("y", avoid)
    z = z or fresh_name("z", avoid | {y})
    if y == z or any(n in F.free_vars(f) for f in fs for n in (y, z)):
        raise FreshnessViolation(f"{y}, {z} must not occur free in the inputs")
    if side == "left":
        return _mc_left(A, x, B, C, Dd, alpha, y, z)
    if side == "right":
        return _mc_right(A, C, x, B, alpha, y, z)
    raise ValueError(side)


def _mc_left(A, x, B, C, Dd, alpha, y, z):
    B1 = F.subst1(Var(y), x, B)
    D1 = F.subst1(Var(z), x, Dd)
    left = rows(ESub(A, x, B), ESub(A, x, ESub(Var(x), y, B1)), ESub(A, y, B1))
    right = rows(ESub(C, x, Dd), ESub(C, x, ESub(Var(x), z, D1)), ESub(C, z, D1),
                 ESub(A, y, ESub(C, z, D1)))
    top = DBin(alpha, left, right)
    return seq(top, rows(Bin(alpha, ESub(A, y, B1), ESub(A, y, ESub(C, z, D1))),
                         ESub(A, y, Bin(alpha, B1, ESub(C, z, D1))),
                         ESub(A, y, Bin(alpha, ESub(C, z, B1), ESub(C, z, D1))),
                         ESub(A, y, ESub(C, z, Bin(alpha, B1, D1)))))


def _mc_right(A, C, x, B, alpha, y, z):
    yz = Bin(alpha, Var(y), Var(z))
    return rows(ESub(A, y, ESub(C, z, F.subst1(yz, x, B))),
                ESub(A, y, ESub(C, z, ESub(yz, x, B))),
                ESub(A, y, ESub(Bin(alpha, Var(y), C), x, B)),
                ESub(Bin(alpha, A, C), x, B))


def extract_tau(C, Dd, A, E, z, y="y", alpha=OR):
    """From <<C\\z>D a A\\y>E to <C\\z><D a A\\y>E, four rows."""
    if any(F.has_gsub(f) for f in (C, Dd, A, E)):
        raise ConstructionError("guarded substitutions are not allowed here")
    if z in F.free_vars(A) or z in F.free_vars(E) or y in F.free_vars(C) or y == z:
        raise FreshnessViolation(f"{z} must not occur free in A or E, and {y} not in C")
    arg = rows(Bin(alpha, ESub(C, z, Dd), A), Bin(alpha, ESub(C, z, Dd), ESub(C, z, A)),
               ESub(C, z, Bin(alpha, Dd, A)))
    body = rows(E, ESub(C, z, E))
    top = DESub(arg, y, body)
    return seq(top, rows(D.conclusion(top), ESub(C, z, ESub(Bin(alpha, Dd, A), y, E))))


# ---------------------------------------------------------------- merge medial

def merge_medial(a, direction, alpha, B, C):
    """Down: [B/x]a v [C/x]a to [B v C/x]a.  Up: [B ^ C/x]a to [B/x]a ^ [C/x]a.
    v and ^ are the down and up saturations of alpha."""
    if _has_unit_leaf(a):
        raise NotOpen(F.show(a))
    Bm, Cm = _align(a, B, C)
    if direction not in ("down", "up"):
        raise ValueError(direction)
    return _mm(a, Bm, Cm, direction, alpha)


def merge_medial_endpoints(a, direction, alpha, B, C):
    Bm, Cm = _align(a, B, C)
    k = down(alpha) if direction == "down" else up(alpha)
    joined = {x: Bin(k, Bm[x], Cm[x]) for x in Bm}
    sides = Bin(k, _bind(Bm, a), _bind(Cm, a))
    merged = _bind(joined, a)
    return (sides, merged) if direction == "down" else (merged, sides)


def _mm(a, Bm, Cm, dirn, alpha):
    k = down(alpha) if dirn == "down" else up(alpha)
    if isinstance(a, Var):
        return Leaf(Bin(k, _bind(Bm, a), _bind(Cm, a)))
    if isinstance(a, Bin):
        beta, Dd, E = a.conn, a.left, a.right
        inner = D.dbin(beta, _mm(Dd, Bm, Cm, dirn, alpha), _mm(E, Bm, Cm, dirn, alpha))
        if dirn == "down":
            p = Bin(k, Bin(beta, _bind(Bm, Dd), _bind(Bm, E)), Bin(beta, _bind(Cm, Dd), _bind(Cm, E)))
            return _inf(p, inner)
        c = Bin(k, Bin(beta, _bind(Bm, Dd), _bind(Bm, E)), Bin(beta, _bind(Cm, Dd), _bind(Cm, E)))
        return _inf_to(inner, c)
    if isinstance(a, ESub):
        return _mm_esub(a, Bm, Cm, dirn, alpha, k)
    if isinstance(a, GSub):
        return _mm_gsub(a, Bm, Cm, dirn, alpha, k)
    raise NotOpen(F.show(a))


def _mm_esub(a, Bm, Cm, dirn, alpha, k):
    Dd, y, E = a.arg, a.var, a.body
    P, Q = _bind(Bm, Dd), _bind(Cm, Dd)
    joined = {x: Bin(k, Bm[x], Cm[x]) for x in Bm}
    R = _bind(joined, Dd)
    if E == Var(y):
        if dirn == "down":
            top = DBin(k, rows(ESub(P, y, E), P), rows(ESub(Q, y, E), Q))
            return seq(top, _mm(Dd, Bm, Cm, dirn, alpha), rows(R, ESub(R, y, E)))
        arg = seq(_mm(Dd, Bm, Cm, dirn, alpha),
                  DBin(k, rows(P, ESub(P, y, E)), rows(Q, ESub(Q, y, E))))
        top = DESub(arg, y, Leaf(E))
        return seq(top, rows(D.conclusion(top), Bin(k, ESub(P, y, E), ESub(Q, y, E))))
    EB, EC = _bind(_restrict(Bm, E, y), E), _bind(_restrict(Cm, E, y), E)
    B0 = _bind(_restrict(joined, E, y), E)
    avoid = names(a, *Bm.values(), *Cm.values())
    y1 = fresh_name("y", avoid)
    y2 = fresh_name("y", avoid | {y1})
    Bx = dict(_restrict(Bm, E, y), **{y: Var(y1)})
    Cx = dict(_restrict(Cm, E, y), **{y: Var(y2)})
    body = DESub(Leaf(P), y1, DESub(Leaf(Q), y2, _mm(E, Bx, Cx, dirn, alpha)))
    if dirn == "down":
        return seq(_mc_left(P, y, EB, Q, EC, k, y1, y2), body,
                   _mc_right(P, Q, y, B0, k, y1, y2),
                   DESub(_mm(Dd, Bm, Cm, dirn, alpha), y, Leaf(B0)))
    return seq(DESub(_mm(Dd, Bm, Cm, dirn, alpha), y, Leaf(B0)),
               reverse(_mc_right(P, Q, y, B0, k, y1, y2)), body,
               reverse(_mc_left(P, y, EB, Q, EC, k, y1, y2)))


def _mm_gsub(a, Bm, Cm, dirn, alpha, k):
    u, y, p, E = a.arg, a.var, a.guard, a.body
    Br, Cr = _restrict(Bm, E, y), _restrict(Cm, E, y)
    EB, EC = _bind(Br, E), _bind(Cr, E)
    split = Bin(k, GSub(u, y, p, EB), GSub(u, y, p, EC))
    joined = GSub(u, y, p, Bin(k, EB, EC))
    inner = D.dgsub(u, y, p, _mm(E, Br, Cr, dirn, alpha))
    if dirn == "down":
        return seq(rows(split, joined), inner)
    return seq(inner, rows(joined, split))


# ---------------------------------------------------------------- merge switch

def merge_switch(a, direction, alpha, B, C):
    """Down: [B a C/x]^a to [B/x]a a [C/x]~a.  Up: [B/x]a a [C/x]~a to [B a C/x]_a.
    ^a and _a are the up and down saturations of the formula a."""
    if not F.is_flat(a):
        raise F.SubstitutionInNegation("merge switch needs a flat formula")
    if _has_unit_leaf(a):
        raise NotOpen(F.show(a))
    Bm, Cm = _align(a, B, C)
    if direction not in ("down", "up"):
        raise ValueError(direction)
    return _ms(a, Bm, Cm, direction, alpha)


def merge_switch_endpoints(a, direction, alpha, B, C):
    Bm, Cm = _align(a, B, C)
    joined = {x: Bin(alpha, Bm[x], Cm[x]) for x in Bm}
    sides = Bin(alpha, _bind(Bm, a), _bind(Cm, F.negate(a)))
    if direction == "down":
        return _bind(joined, F.sat_up(a)), sides
    return sides, _bind(joined, F.sat_down(a))


def _ms(a, Bm, Cm, dirn, alpha):
    if isinstance(a, Var):
        return Leaf(Bin(alpha, _bind(Bm, a), _bind(Cm, a)))
    beta, Dd, E = a.conn, a.left, a.right
    nb = F.dual(beta)
    sides = Bin(alpha, Bin(beta, _bind(Bm, Dd), _bind(Bm, E)),
                Bin(nb, _bind(Cm, F.negate(Dd)), _bind(Cm, F.negate(E))))
    if dirn == "down":
        inner = D.dbin(up(beta), _ms(Dd, Bm, Cm, dirn, alpha), _ms(E, Bm, Cm, dirn, alpha))
        return _inf_to(inner, sides)
    inner = D.dbin(down(beta), _ms(Dd, Bm, Cm, dirn, alpha), _ms(E, Bm, Cm, dirn, alpha))
    return _inf(sides, inner)


# ---------------------------------------------------------------- atom enumeration

@dataclass(frozen=True)
class EnumGuards:
    """Atoms a_1..a_n with guards l_j, r_j and variable pairs (x_j, ~x_j)."""
    atoms: tuple
    xs: tuple = ()
    lguards: tuple = ()
    rguards: tuple = ()

    def __post_init__(self):
        n = len(self.atoms)
        if not self.lguards:
            object.__setattr__(self, "lguards", tuple(f"l.{j}" for j in range(1, n + 1)))
        if not self.rguards:
            object.__setattr__(self, "rguards", tuple(f"r.{j}" for j in range(1, n + 1)))
        gs = self.lguards + self.rguards
        if len(set(gs)) != len(gs) or len(self.lguards) != n or len(self.rguards) != n:
            raise ConstructionError("guards must be distinct, two per atom")
        if self.xs and len(self.xs) != n:
            raise ConstructionError("one variable pair per atom")

    @property
    def n(self):
        return len(self.atoms)

    def l(self, j):
        return self.lguards[j - 1]

    def r(self, j):
        return self.rguards[j - 1]

    def a(self, j):
        return self.atoms[j - 1]

    def x(self, j):
        return self.xs[j - 1]

    def term(self, j, v):
        return Bin(self.a(j), F.var(v, self.l(j)), F.var(v, self.r(j)))

    def nu(self, j):
        """nu_j as (variable, unit, guard) triples, outermost first."""
        x, xb = self.x(j)
        return [(x, F.ZERO, self.l(j)), (xb, F.ONE, self.l(j)),
                (x, F.ONE, self.r(j)), (xb, F.ZERO, self.r(j))]

    def nus(self):
        """nu_n ... nu_1, outermost first."""
        out = []
        for j in range(self.n, 0, -1):
            out += self.nu(j)
        return out


def expr_build(eg: EnumGuards, v, omit=None, upto=None):
    """[v{l1}<a1>v{r1}/v]...[v{ln}<an>v{rn}/v]v, optionally dropping term `omit`
    or keeping only the first `upto` terms."""
    last = eg.n if upto is None else upto
    idx = [j for j in range(1, last + 1) if j != omit]
    return F.explicit([(v, eg.term(j, v)) for j in idx], Var(v))


def _sub_eg(eg, first):
    """Enumeration of the atoms first..n."""
    k = first - 1
    return EnumGuards(eg.atoms[k:], eg.xs[k:] if eg.xs else (), eg.lguards[k:], eg.rguards[k:])


# ---------------------------------------------------------------- range shifting

def _shift_range(args, v, body, p):
    """From <Y1\\v>...<Yk\\v>(body{p}) to <Y1{p}\\v><Y2\\v>...<Yk\\v>body.

    The body's free occurrences of v must all be in the head argument
    (or the body is v itself)."""
    if not args:
        return Leaf(F.add_range(body, {p}))
    inner = _shift_range(args[1:], v, body, p)
    wrapped = DESub(Leaf(args[0]), v, inner)
    mid = D.conclusion(inner)
    Y = args[0]
    if mid == F.add_range(Var(v), {p}):
        step = rows(ESub(Y, v, mid), F.add_range(Y, {p}), ESub(F.add_range(Y, {p}), v, Var(v)))
    else:
        Z, R = (args[1] if len(args) > 1 else body.arg), mid.body
        vp = F.add_range(Var(v), {p})
        step = rows(ESub(Y, v, mid),
                    ESub(Y, v, ESub(ESub(vp, v, Z), v, R)),
                    ESub(Y, v, ESub(vp, v, ESub(Z, v, R))),
                    ESub(ESub(Y, v, vp), v, ESub(Z, v, R)),
                    ESub(F.add_range(Y, {p}), v, ESub(Z, v, R)))
    return seq(wrapped, step)


# ---------------------------------------------------------------- eversion

def everted(a, eg: EnumGuards):
    return F.substitute({v: expr_build(eg, v) for v in F.free_vars(a)}, a)


def eversion(a, y, eg: EnumGuards):
    """From [a/y]E^n(y) to a with every free v replaced by E^n(v)."""
    if not F.is_flat(a):
        raise NotFlat(F.show(a))
    if _has_unit_leaf(a):
        raise NotOpen(F.show(a))
    if y in F.free_vars(a):
        raise FreshnessViolation(f"{y} occurs free in the formula")
    return _ev(a, y, eg)


def _ev(a, y, eg):
    if eg.n == 0:
        return rows(ESub(a, y, Var(y)), a)
    X = lambda v: eg.term(1, v)
    rest = expr_build(eg, y, omit=1)
    xs = ordered_vars(a)
    lv = {v: F.var(v, eg.l(1)) for v in xs}
    rv = {v: F.var(v, eg.r(1)) for v in xs}
    M = F.substitute({v: X(v) for v in xs}, a)
    start = rows(ESub(a, y, ESub(eg.term(1, y), y, rest)),
                 ESub(Bin(eg.a(1), F.add_range(a, {eg.l(1)}), F.add_range(a, {eg.r(1)})), y, rest))
    merged = DESub(_mm(a, lv, rv, "down", eg.a(1)), y, Leaf(rest))
    if eg.n == 1:
        finish = seq(rows(ESub(M, y, Var(y)), M), _leafwise(a, lambda v, rng: rows(
            F.add_range(X(v), rng), ESub(F.add_range(X(v), rng), v, Var(v)))))
        return seq(start, merged, finish)
    # factor the head term out of every variable, outermost variable first
    facts = [ESub(M, y, rest)]
    for k in range(1, len(xs) + 1):
        inner = F.substitute({v: X(v) for v in xs[k:]}, a)
        facts.append(F.explicit([(v, X(v)) for v in xs[:k]], ESub(inner, y, rest)))
    ih = _ev(a, y, _sub_eg(eg, 2))
    for v in reversed(xs):
        ih = DESub(Leaf(X(v)), v, ih)
    # actualize the factored terms back into the leaves, innermost first
    T = D.conclusion(_ev_target(a, _sub_eg(eg, 2)))
    acts = [F.explicit([(v, X(v)) for v in xs], T)]
    cur = T
    for k in range(len(xs) - 1, -1, -1):
        cur = F.subst1(X(xs[k]), xs[k], cur)
        acts.append(F.explicit([(v, X(v)) for v in xs[:k]], cur))
    sub = _sub_eg(eg, 2)

    def leaf(v, rng):
        Y = F.add_range(X(v), rng)
        rest_v = expr_build(sub, v)
        pushed = F.subst1(X(v), v, F.add_range(rest_v, rng))
        return rows(pushed, ESub(ESub(Y, v, rest_v.arg), v, rest_v.body), ESub(Y, v, rest_v))

    return seq(start, merged, rows(*facts), ih, rows(*acts), _leafwise(a, leaf))


def _ev_target(a, eg):
    return Leaf(everted(a, eg))


def _leafwise(a, fn):
    if isinstance(a, Var):
        return fn(a.name, a.rng)
    return D.dbin(a.conn, _leafwise(a.left, fn), _leafwise(a.right, fn))


# ---------------------------------------------------------------- atom merge

def atom_merge(eg: EnumGuards, j, v):
    """From E^n(v) to E^n_j(v){l_j} <a_j> E^n_j(v){r_j}."""
    if not 1 <= j <= eg.n:
        raise IndexOutOfRange(j)
    heads = [eg.term(k, v) for k in range(1, j)]
    tail = expr_build(eg, v, omit=None, upto=eg.n)
    for _ in range(j - 1):
        tail = tail.body
    # tail = <X_j\v>E'
    E1 = tail.body
    lj, rj, aj = eg.l(j), eg.r(j), eg.a(j)
    Xj = eg.term(j, v)
    if E1 == Var(v):
        core = rows(tail, Xj)
    else:
        core = seq(rows(tail, F.subst1(Xj, v, E1)),
                   _mm(E1, {v: F.var(v, lj)}, {v: F.var(v, rj)}, "up", aj))
    L, R = F.add_range(E1, {lj}), F.add_range(E1, {rj})
    d = core
    for Y in reversed(heads):
        d = DESub(Leaf(Y), v, d)
    # distribute the head substitutions over the atom, innermost first
    dist = []
    for k in range(len(heads), -1, -1):
        outer, inner = heads[:k], heads[k:]
        dist.append(F.explicit([(v, Y) for Y in outer],
                               Bin(aj, F.explicit([(v, Y) for Y in inner], L),
                                   F.explicit([(v, Y) for Y in inner], R))))
    shifted = DBin(aj, _shift_range(heads, v, E1, lj), _shift_range(heads, v, E1, rj))
    return seq(d, rows(*dist), shifted)


def atom_merge_endpoints(eg, j, v):
    e = expr_build(eg, v, omit=j)
    return expr_build(eg, v), Bin(eg.a(j), F.add_range(e, {eg.l(j)}), F.add_range(e, {eg.r(j)}))


# ---------------------------------------------------------------- guarded application

def _droppable(f, y, p):
    return not F.mentions(f, y) or D._lacks_guard(f, p)


def apply_guards(gs, f):
    """Derivation from the guarded chain gs (outermost first) over f down to the
    result of applying it, using only expansion steps."""
    gs = list(gs)
    out = [F.guarded([(y, u, p) for y, u, p in gs], f)]
    cur = f

    def emit():
        out.append(F.guarded(gs, cur))

    while gs:
        dropped = True
        while dropped:
            dropped = False
            for i in range(len(gs) - 1, -1, -1):
                y, u, p = gs[i]
                if _droppable(cur, y, p):
                    del gs[i]
                    emit()
                    dropped = True
                    break
        if not gs:
            break
        y, u, p = gs[-1]
        if F.is_flat(cur):
            cur = F.guarded_substitute(u, y, p, cur)
            gs.pop()
            emit()
        elif isinstance(cur, ESub) and F.is_flat(cur.arg) and (
                D._lacks_guard(cur.body, p)
                or (not F.mentions(cur.body, cur.var) and not F.mentions(cur.body, y))):
            cur = ESub(F.guarded_substitute(u, y, p, cur.arg), cur.var, cur.body)
            gs.pop()
            emit()
        elif isinstance(cur, Bin):
            for i in range(len(gs) - 1, -1, -1):
                out.append(F.guarded(gs[:i], Bin(cur.conn, F.guarded(gs[i:], cur.left),
                                                 F.guarded(gs[i:], cur.right))))
            top = rows(*out)
            return seq(top, D.dbin(cur.conn, apply_guards(gs, cur.left), apply_guards(gs, cur.right)))
        else:
            raise GuardError(f"cannot apply guard {p} for {y} to {F.show(cur)}")
    return rows(*out)


def guards_applied(gs, f):
    """Conclusion of apply_guards, computed directly."""
    return D.conclusion(apply_guards(gs, f))


def apply_nu(eg: EnumGuards, j, v, eta_mu, rng=frozenset()):
    """From nu_n..nu_1 eta_mu((E_j(v){l_j} <a_j> E_j(v){r_j}){rng}) to the closed form."""
    if not 1 <= j <= eg.n:
        raise IndexOutOfRange(j)
    img = eta_mu(v) if callable(eta_mu) else eta_mu[v]
    x, xb = eg.x(j)
    if not F.free_vars(img) or not F.free_vars(img) <= {x, xb} or len(F.free_vars(img)) != 1:
        raise PreimageMismatch(f"{v} maps to {F.show(img)}, not into {{{x}, {xb}}}")
    e = expr_build(eg, v, omit=j)
    body = F.add_range(Bin(eg.a(j), F.add_range(e, {eg.l(j)}), F.add_range(e, {eg.r(j)})), rng)
    body = F.substitute({v: img}, body)
    return apply_guards(eg.nus(), body)


# ---------------------------------------------------------------- projections

def project_formula(f, atom, side):
    if isinstance(f, (Unit, Var)):
        return f
    if isinstance(f, Bin):
        if f.conn == atom:
            return project_formula(f.left if side == "left" else f.right, atom, side)
        return Bin(f.conn, project_formula(f.left, atom, side), project_formula(f.right, atom, side))
    raise NotFlat(F.show(f))


def project(d, atom, side):
    """Keep only the chosen argument of every occurrence of the atom, dropping
    inference steps that become trivial."""
    if side not in ("left", "right"):
        raise ValueError(side)
    if not D.is_flat(d) or _has_exp(d):
        raise NotFlat("projection needs a flat derivation without substitutions")
    return D.normalize(_proj(d, atom, side))


def _has_exp(d):
    if isinstance(d, Leaf):
        return False
    if isinstance(d, Exp):
        return True
    if isinstance(d, DBin):
        return _has_exp(d.left) or _has_exp(d.right)
    return _has_exp(d.top) or _has_exp(d.bottom)


def _proj(d, atom, side):
    if isinstance(d, Leaf):
        return Leaf(project_formula(d.f, atom, side))
    if isinstance(d, DBin):
        if d.conn == atom:
            return _proj(d.left if side == "left" else d.right, atom, side)
        return D.dbin(d.conn, _proj(d.left, atom, side), _proj(d.right, atom, side))
    top, bot = _proj(d.top, atom, side), _proj(d.bottom, atom, side)
    if D.conclusion(top) == D.premise(bot):
        return D.glue(top, bot)
    try:
        label = D.match_rule(D.conclusion(top), D.premise(bot))
    except D.KernelError:
        label = None
    return Inf(top, bot, label)


def _strip_labels(d):
    if isinstance(d, Leaf):
        return d
    if isinstance(d, DBin):
        return DBin(d.conn, _strip_labels(d.left), _strip_labels(d.right))
    return Inf(_strip_labels(d.top), _strip_labels(d.bottom)) if isinstance(d, Inf) else \
        Exp(_strip_labels(d.top), _strip_labels(d.bottom))


def same_derivation(d1, d2):
    """Structural equality ignoring stored rule labels and leaf splitting."""
    return _strip_labels(D.normalize(d1)) == _strip_labels(D.normalize(d2))


def is_superposition(psi, phi, atom, x, y):
    fv = _dfree(psi)
    if x not in fv or y not in fv:
        return False
    lp = dsubst({x: F.ZERO, y: F.ONE}, psi)
    rp = dsubst({x: F.ONE, y: F.ZERO}, psi)
    return (same_derivation(lp, project(phi, atom, "left"))
            and same_derivation(rp, project(phi, atom, "right")))


def _dfree(d):
    return F.free_vars(D.premise(d)) | F.free_vars(D.conclusion(d))


def recombine(psi, x, y, atom, l="l", r="r", z=None):
    """<0\\x>^l<1\\y>^l<1\\x>^r<0\\y>^r applied over [psi/z](z{l} <atom> z{r})."""
    fv = _dfree(psi)
    if x not in fv or y not in fv:
        raise ConstructionError("recombine needs both variables free")
    z = z or fresh_name("z", names(D.premise(psi), D.conclusion(psi)))
    gs = [(x, F.ZERO, l), (y, F.ONE, l), (x, F.ONE, r), (y, F.ZERO, r)]
    c = D.conclusion(psi)
    body = Bin(atom, F.var(z, l), F.var(z, r))
    top = DESub(psi, z, Leaf(body))
    inner = seq(top, rows(D.conclusion(top), Bin(atom, F.add_range(c, {l}), F.add_range(c, {r}))))
    for yy, u, p in reversed(gs):
        inner = DGSub(u, yy, p, inner)
    return seq(inner, apply_guards(gs, _strip_gs(D.conclusion(inner))))


def _strip_gs(f):
    while isinstance(f, GSub):
        f = f.body
    return f
