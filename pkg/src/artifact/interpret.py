"""Standard formulae, SKS checking, synchronal composition, interpretation."""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

from . import formula as F
from . import derivation as D
from .formula import AND, OR, BudgetExceeded


# ---------------------------------------------------------------- standard formulae

@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class NegAtom:
    name: str


@dataclass(frozen=True)
class SBin:
    conn: str
    left: object
    right: object


@dataclass(frozen=True)
class SInf:
    top: object
    bottom: object
    label: str


S0, S1 = Const(0), Const(1)

# rule labels
AI_DN, AC_DN, AW_DN = "ai_dn", "ac_dn", "aw_dn"
AI_UP, AC_UP, AW_UP = "ai_up", "ac_up", "aw_up"
SWITCH, MEDIAL, EQUIV, MIX = "s", "m", "eq", "mix"
SKS_RULES = (AI_DN, AC_DN, AW_DN, AI_UP, AC_UP, AW_UP, SWITCH, MEDIAL, MIX)


def is_formula(d):
    if isinstance(d, SInf):
        return False
    if isinstance(d, SBin):
        return is_formula(d.left) and is_formula(d.right)
    return True


def std_negate(f):
    if isinstance(f, Const):
        return Const(1 - f.value)
    if isinstance(f, Atom):
        return NegAtom(f.name)
    if isinstance(f, NegAtom):
        return Atom(f.name)
    if isinstance(f, SBin):
        return SBin(F.dual(f.conn), std_negate(f.left), std_negate(f.right))
    raise TypeError("negation of a derivation")


def std_premise(d):
    if isinstance(d, SInf):
        return std_premise(d.top)
    if isinstance(d, SBin):
        return SBin(d.conn, std_premise(d.left), std_premise(d.right))
    return d


def std_conclusion(d):
    if isinstance(d, SInf):
        return std_conclusion(d.bottom)
    if isinstance(d, SBin):
        return SBin(d.conn, std_conclusion(d.left), std_conclusion(d.right))
    return d


def std_show(f):
    if isinstance(f, Const):
        return str(f.value)
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, NegAtom):
        return "~" + f.name
    if isinstance(f, SBin):
        return f"({std_show(f.left)} {f.conn} {std_show(f.right)})"
    raise TypeError("std_show expects a formula")


def std_atoms(f, out=None):
    out = [] if out is None else out
    if isinstance(f, (Atom, NegAtom)):
        if f.name not in out:
            out.append(f.name)
    elif isinstance(f, (SBin, SInf)):
        a, b = (f.left, f.right) if isinstance(f, SBin) else (f.top, f.bottom)
        std_atoms(a, out)
        std_atoms(b, out)
    return out


def std_parse(text):
    return _std_from(F.parse(text))


def _std_from(f):
    if isinstance(f, F.Unit):
        return Const(f.value)
    if isinstance(f, F.Var):
        if f.rng:
            raise F.ParseError("standard atoms carry no range")
        return NegAtom(f.name[1:]) if f.name.startswith("~") else Atom(f.name)
    if isinstance(f, F.Bin) and not F.is_atom(f.conn):
        return SBin(f.conn, _std_from(f.left), _std_from(f.right))
    raise F.ParseError(f"not a standard formula: {F.show(f)}")


def std_eval(f, env):
    if isinstance(f, Const):
        return bool(f.value)
    if isinstance(f, Atom):
        return env[f.name]
    if isinstance(f, NegAtom):
        return not env[f.name]
    l, r = std_eval(f.left, env), std_eval(f.right, env)
    return (l and r) if f.conn == AND else (l or r)


def is_tautology(f):
    names = std_atoms(f)
    return all(std_eval(f, dict(zip(names, bits)))
               for bits in itertools.product((False, True), repeat=len(names)))


# ---------------------------------------------------------------- SKS

def nf(f):
    """Normal form modulo the unit/associativity/commutativity equivalence."""
    if isinstance(f, SBin):
        k = f.conn
        unit = S1 if k == AND else S0
        items = []
        for g in (nf(f.left), nf(f.right)):
            if isinstance(g, tuple) and g[0] == k:
                items.extend(g[1])
            else:
                items.append(g)
        items = [g for g in items if g != ("c", unit.value)]
        absorb = ("c", 1 - unit.value)
        # (0 & 0) == 0 and (1 | 1) == 1 collapse duplicate absorbing units
        n_abs = items.count(absorb)
        if n_abs > 1:
            items = [g for g in items if g != absorb] + [absorb]
        if not items:
            return ("c", unit.value)
        if len(items) == 1:
            return items[0]
        return (k, tuple(sorted(items, key=repr)))
    if isinstance(f, Const):
        return ("c", f.value)
    if isinstance(f, Atom):
        return ("a", f.name)
    if isinstance(f, NegAtom):
        return ("n", f.name)
    raise TypeError(f)


def equivalent(a, b):
    return nf(a) == nf(b)


def _atomic(f):
    return isinstance(f, (Atom, NegAtom))


def _root_rule(p, c):
    """SKS rules whose instance is exactly p -> c at the root."""
    out = []
    if p == S1 and isinstance(c, SBin) and c.conn == OR and _atomic(c.left) and c.right == std_negate(c.left):
        out.append(AI_DN)
    if isinstance(p, SBin) and p.conn == OR and _atomic(c) and p.left == c and p.right == c:
        out.append(AC_DN)
    if p == S0 and _atomic(c):
        out.append(AW_DN)
    if isinstance(p, SBin) and p.conn == AND and _atomic(p.left) and p.right == std_negate(p.left) and c == S0:
        out.append(AI_UP)
    if _atomic(p) and isinstance(c, SBin) and c.conn == AND and c.left == p and c.right == p:
        out.append(AC_UP)
    if _atomic(p) and c == S1:
        out.append(AW_UP)
    if (isinstance(p, SBin) and p.conn == AND and isinstance(p.right, SBin) and p.right.conn == OR
            and c == SBin(OR, SBin(AND, p.left, p.right.left), p.right.right)):
        out.append(SWITCH)
    if (isinstance(p, SBin) and p.conn == OR and all(isinstance(g, SBin) and g.conn == AND for g in (p.left, p.right))
            and c == SBin(AND, SBin(OR, p.left.left, p.right.left), SBin(OR, p.left.right, p.right.right))):
        out.append(MEDIAL)
    if p == S0 and c == S1:
        out.append(MIX)
    return out


def exact_step(p, c):
    """Label of a single rule instance turning p into c in an exact context."""
    while True:
        rules = _root_rule(p, c)
        if rules:
            return rules[0]
        if not (isinstance(p, SBin) and isinstance(c, SBin) and p.conn == c.conn):
            return None
        if p.left == c.left:
            p, c = p.right, c.right
        elif p.right == c.right:
            p, c = p.left, c.left
        else:
            return None


def sks_step(p, c):
    """Label justifying p -> c as one step, or None."""
    if p != c:
        lab = exact_step(p, c)
        if lab:
            return lab
    if equivalent(p, c):
        return EQUIV
    return None


# ---------------------------------------------------------------- witness search
# States are formulae; moves are rule instances in context applied to some
# representative of the state's equivalence class.

def _tofml(n):
    if n[0] == "c":
        return Const(n[1])
    if n[0] == "a":
        return Atom(n[1])
    if n[0] == "n":
        return NegAtom(n[1])
    return _mk(n[0], [_tofml(g) for g in n[1]])


def _mk(k, fs):
    out = None
    for g in fs:
        out = g if out is None else SBin(k, out, g)
    return out if out is not None else (S1 if k == AND else S0)


def _splits(items, empty_left=False, empty_right=False):
    idx = range(len(items))
    lo = 0 if empty_left else 1
    hi = len(items) if empty_right else len(items) - 1
    for r in range(lo, hi + 1):
        for comb in itertools.combinations(idx, r):
            yield [items[i] for i in comb], [items[i] for i in idx if i not in comb]


def _lits(univ):
    for a in univ:
        yield Atom(a)
        yield NegAtom(a)


def _moves(n, univ, rules):
    """Yield (before, after, label) with before equivalent to the node n."""
    f = _tofml(n)
    tag = n[0]
    if tag in ("a", "n"):
        if AW_UP in rules:
            yield f, S1, AW_UP
        if AC_UP in rules:
            yield f, SBin(AND, f, f), AC_UP
    if n == ("c", 0):
        if MIX in rules:
            yield S0, S1, MIX
        if AW_DN in rules:
            for l in _lits(univ):
                yield S0, l, AW_DN
                yield SBin(AND, S0, S0), SBin(AND, S0, l), AW_DN
    if n == ("c", 1) and AI_DN in rules:
        for a in univ:
            yield S1, SBin(OR, Atom(a), NegAtom(a)), AI_DN
    # units made visible by the equivalence
    if tag != "c":
        if AW_DN in rules:
            for l in _lits(univ):
                yield SBin(OR, f, S0), SBin(OR, f, l), AW_DN
        if MIX in rules and tag != OR:
            yield SBin(OR, f, S0), SBin(OR, f, S1), MIX
    if tag not in (AND, OR):
        return
    k, items = tag, list(n[1])
    fs = [_tofml(g) for g in items]
    for i in range(len(items)):
        rest = fs[:i] + fs[i + 1:]
        for b, a, lab in _moves(items[i], univ, rules):
            yield _mk(k, [b] + rest), _mk(k, [a] + rest), lab
    for i, j in itertools.combinations(range(len(items)), 2):
        gi, gj = items[i], items[j]
        rest = [fs[t] for t in range(len(items)) if t not in (i, j)]
        if k == OR and gi == gj and gi[0] in ("a", "n") and AC_DN in rules:
            yield _mk(OR, [SBin(OR, fs[i], fs[j])] + rest), _mk(OR, [fs[i]] + rest), AC_DN
        if k == AND and gi[0] in ("a", "n") and fs[j] == std_negate(fs[i]) and AI_UP in rules:
            yield _mk(AND, [SBin(AND, fs[i], fs[j])] + rest), _mk(AND, [S0] + rest), AI_UP
        if k == OR and gi[0] == AND and gj[0] == AND and MEDIAL in rules:
            for la, lb in _splits(list(gi[1])):
                for ra, rb in _splits(list(gj[1])):
                    A, B = _tofml((AND, tuple(la))) if len(la) > 1 else _tofml(la[0]), _mk(AND, [_tofml(g) for g in lb])
                    C, Dd = _tofml((AND, tuple(ra))) if len(ra) > 1 else _tofml(ra[0]), _mk(AND, [_tofml(g) for g in rb])
                    before = SBin(OR, SBin(AND, A, B), SBin(AND, C, Dd))
                    yield _mk(OR, [before] + rest), _mk(OR, [SBin(AND, SBin(OR, A, C), SBin(OR, B, Dd))] + rest), MEDIAL
    if k == AND and SWITCH in rules:
        for i in range(len(items)):
            o = items[i]
            others = [t for t in range(len(items)) if t != i]
            o_items = list(o[1]) if o[0] == OR else [o]
            for sel, unsel in _splits(others, empty_right=True):
                A = _mk(AND, [fs[t] for t in sel])
                rest = [fs[t] for t in unsel]
                for b_items, c_items in _splits(o_items, empty_left=True):
                    B = _mk(OR, [_tofml(g) for g in b_items])
                    C = _mk(OR, [_tofml(g) for g in c_items])
                    before = SBin(AND, A, SBin(OR, B, C))
                    yield _mk(AND, [before] + rest), _mk(AND, [SBin(OR, SBin(AND, A, B), C)] + rest), SWITCH


ALL_RULES = frozenset(SKS_RULES)
_SEARCH_CAP = 50000
LINEAR_RULES = frozenset({SWITCH, MEDIAL, MIX})


def witness(p, c, rules=ALL_RULES, depth=4, univ=None):
    """A list of (formula, label) rows from p to c, each row justified by one
    step from the previous one, or None if none is found within depth."""
    return _witness(p, c, frozenset(rules), depth, tuple(univ) if univ else tuple(std_atoms(SBin(AND, p, c))))


@functools.lru_cache(maxsize=4096)
def _witness(p, c, rules, depth, univ):
    target = nf(c)
    start = nf(p)
    if start == target:
        return [] if p == c else [(c, EQUIV)]
    frontier = [(start, p, [])]
    seen = {start}
    for _ in range(depth):
        nxt = []
        for node, rep, path in frontier:
            for before, after, lab in _moves(node, univ, rules):
                key = nf(after)
                if key in seen:
                    continue
                if len(seen) > _SEARCH_CAP:
                    return None
                seen.add(key)
                steps = path + ([] if before == rep else [(before, EQUIV)]) + [(after, lab)]
                if key == target:
                    if after != c:
                        steps.append((c, EQUIV))
                    return steps
                nxt.append((key, after, steps))
        frontier = nxt
    return None


def chain(top, rows, bottom=None):
    """Stack rows (formula, label) under a derivation, optionally ending in bottom."""
    if not rows:
        return top if bottom is None else _join(top, bottom)
    if bottom is not None:
        last_f, last_lab = rows[-1]
        rows = rows[:-1] + [(bottom, last_lab)]
    out = rows[-1][0]
    for i in range(len(rows) - 1, 0, -1):
        out = SInf(rows[i - 1][0], out, rows[i][1])
    return SInf(top, out, rows[0][1])


def _join(top, bottom):
    lab = sks_step(std_conclusion(top), std_premise(bottom))
    return SInf(top, bottom, lab or "?")


def check_sks(d) -> D.CheckReport:
    steps = []
    todo = [(d, "")]
    while todo:
        x, path = todo.pop()
        if isinstance(x, SBin):
            todo += [(x.right, path + "R"), (x.left, path + "L")]
        elif isinstance(x, SInf):
            p, c = std_conclusion(x.top), std_premise(x.bottom)
            lab = sks_step(p, c)
            entry = {"path": path or ".", "kind": "inference"}
            if lab is None:
                entry["error"] = f"no SKS step from {std_show(p)} to {std_show(c)}"
            elif x.label and x.label != lab and not _label_ok(x.label, p, c):
                entry["error"] = f"label {x.label} does not justify {std_show(p)} -> {std_show(c)}"
            else:
                entry["label"] = x.label or lab
            steps.append(entry)
            todo += [(x.bottom, path + "b"), (x.top, path + "t")]
    w = _std_width(d)
    return D.CheckReport(not any("error" in s for s in steps), w, _std_height(d), _std_size(d), steps)


def _label_ok(label, p, c):
    if label == EQUIV:
        return equivalent(p, c)
    return exact_step(p, c) == label or label in _root_rule(p, c)


def _std_size(d):
    if isinstance(d, SBin):
        return _std_size(d.left) + _std_size(d.right)
    if isinstance(d, SInf):
        return _std_size(d.top) + _std_size(d.bottom)
    return 1


def _std_width(d):
    if isinstance(d, SBin):
        return _std_width(d.left) + _std_width(d.right)
    if isinstance(d, SInf):
        return max(_std_width(d.top), _std_width(d.bottom))
    return 1


def _std_height(d):
    if isinstance(d, SBin):
        return max(_std_height(d.left), _std_height(d.right))
    if isinstance(d, SInf):
        return _std_height(d.top) + _std_height(d.bottom)
    return 1


class EndpointMismatch(Exception):
    pass


def synchronal(phi, psi):
    if std_conclusion(phi) != std_premise(psi):
        raise EndpointMismatch(f"{std_show(std_conclusion(phi))} vs {std_show(std_premise(psi))}")
    return _sync(phi, psi)


def _sync(phi, psi):
    if is_formula(phi):
        return psi
    if is_formula(psi):
        return phi
    if isinstance(phi, SInf):
        return SInf(phi.top, _sync(phi.bottom, psi), phi.label)
    if isinstance(psi, SInf):
        return SInf(_sync(phi, psi.top), psi.bottom, psi.label)
    return SBin(phi.conn, _sync(phi.left, psi.left), _sync(phi.right, psi.right))


def sks_stack(top, bottom):
    lab = sks_step(std_conclusion(top), std_premise(bottom))
    return SInf(top, bottom, lab or "?")


# ---------------------------------------------------------------- interpretation

class Undefined(Exception):
    """Raised internally; `interpret` returns None for undefined results."""


def actualize_derivation(d, budget=10**6):
    counter = [budget]
    return _actd(d, counter)


def _charge(counter, n):
    counter[0] -= n
    if counter[0] < 0:
        raise BudgetExceeded("substitution budget exhausted")


def _actd(d, counter):
    if isinstance(d, D.Leaf):
        f = F.actualize(d.f, counter[0])
        _charge(counter, F.size(f))
        return D.Leaf(f)
    if isinstance(d, D.DBin):
        return D.DBin(d.conn, _actd(d.left, counter), _actd(d.right, counter))
    if isinstance(d, D.DESub):
        arg, body = _actd(d.arg, counter), _actd(d.body, counter)
        out = _dsubst(arg, d.var, body, counter)
        return out
    if isinstance(d, D.DGSub):
        body = _actd(d.body, counter)
        return _dgsubst(d.arg, d.var, d.guard, body)
    top, bot = _actd(d.top, counter), _actd(d.bottom, counter)
    return D.Inf(top, bot, d.label) if isinstance(d, D.Inf) else D.Exp(top, bot)


def _drange(d, s):
    if isinstance(d, D.Leaf):
        return D.Leaf(F.add_range(d.f, s))
    if isinstance(d, D.DBin):
        return D.DBin(d.conn, _drange(d.left, s), _drange(d.right, s))
    if isinstance(d, D.Inf):
        return D.Inf(_drange(d.top, s), _drange(d.bottom, s), d.label)
    if isinstance(d, D.Exp):
        return D.Exp(_drange(d.top, s), _drange(d.bottom, s))
    raise TypeError("range addition expects a flat derivation")


def _dsubst(arg, x, body, counter):
    """Actual substitution of a flat derivation into a flat derivation."""
    if isinstance(arg, D.Leaf):
        return _map_leaves(body, lambda f: F.subst1(arg.f, x, f), counter)
    return _dsub_struct(arg, x, body, counter)


def _dsub_struct(arg, x, body, counter):
    if isinstance(body, D.Leaf):
        f = body.f
        if x not in F.free_vars(f):
            return body
        if isinstance(f, F.Var):
            out = _drange(arg, f.rng)
            _charge(counter, D.dsize(out))
            return out
        if isinstance(f, F.Bin):
            return D.DBin(f.conn, _dsub_struct(arg, x, D.Leaf(f.left), counter),
                          _dsub_struct(arg, x, D.Leaf(f.right), counter))
        raise TypeError("flat derivation expected")
    if isinstance(body, D.DBin):
        return D.DBin(body.conn, _dsub_struct(arg, x, body.left, counter), _dsub_struct(arg, x, body.right, counter))
    top, bot = _dsub_struct(arg, x, body.top, counter), _dsub_struct(arg, x, body.bottom, counter)
    return D.Inf(top, bot, body.label) if isinstance(body, D.Inf) else D.Exp(top, bot)


def _map_leaves(d, fn, counter):
    if isinstance(d, D.Leaf):
        out = fn(d.f)
        _charge(counter, F.size(out))
        return D.Leaf(out)
    if isinstance(d, D.DBin):
        return D.DBin(d.conn, _map_leaves(d.left, fn, counter), _map_leaves(d.right, fn, counter))
    top, bot = _map_leaves(d.top, fn, counter), _map_leaves(d.bottom, fn, counter)
    return D.Inf(top, bot, d.label) if isinstance(d, D.Inf) else D.Exp(top, bot)


def _dgsubst(u, y, p, d):
    return _map_leaves(d, lambda f: F.guarded_substitute(u, y, p, f), [float("inf")])


def interpret_formula(f, budget=10**6):
    """Interpretation of a subatomic formula; None when undefined."""
    try:
        return _ifml(F.actualize(f, budget))
    except Undefined:
        return None


def _ifml(f):
    if isinstance(f, F.Unit):
        return Const(f.value)
    if isinstance(f, F.Var):
        raise Undefined("free variable")
    l, r = _ifml(f.left), _ifml(f.right)
    if F.is_atom(f.conn):
        if l in (S0, S1) and r in (S0, S1):
            return _ATOM_VALUES[(l.value, r.value)](f.conn)
        raise Undefined("atom connective over non-units")
    return _combine(f.conn, l, r)


_ATOM_VALUES = {
    (1, 1): lambda a: S1,
    (1, 0): lambda a: NegAtom(a),
    (0, 1): lambda a: Atom(a),
    (0, 0): lambda a: S0,
}


def _combine(k, l, r):
    unit, absorb = (S1, S0) if k == AND else (S0, S1)
    if r == unit:
        return l
    if l == unit:
        return r
    if l == absorb and r == absorb:
        return absorb
    return SBin(k, l, r)


def interpret(d, budget=10**6, literal=False):
    """Interpretation of a subatomic derivation (or formula); None when undefined.

    With literal=True every inference step becomes one standard inference,
    whether or not it is a single SKS instance; otherwise such steps are
    replaced by a short explicit SKS derivation.
    """
    if not isinstance(d, (D.Leaf, D.DBin, D.DESub, D.DGSub, D.Inf, D.Exp)):
        return interpret_formula(d, budget)
    flat = actualize_derivation(d, budget)
    try:
        return _ider(flat, literal)
    except Undefined:
        return None


def _cls(d, value):
    if value == S1:
        return "1"
    if value == S0:
        return "0"
    if _ifml(D.premise(d)) == S0 and _ifml(D.conclusion(d)) == S1:
        return "01"
    raise Undefined("atom connective argument has no unit class")


_TABLE = {
    ("1", "1"): lambda a: S1,
    ("1", "0"): lambda a: NegAtom(a),
    ("1", "01"): lambda a: SInf(NegAtom(a), S1, AW_UP),
    ("0", "1"): lambda a: Atom(a),
    ("0", "0"): lambda a: S0,
    ("0", "01"): lambda a: SInf(S0, Atom(a), AW_DN),
    ("01", "1"): lambda a: SInf(Atom(a), S1, AW_UP),
    ("01", "0"): lambda a: SInf(S0, NegAtom(a), AW_DN),
    ("01", "01"): lambda a: SInf(S0, S1, MIX),
}


def _ider(d, literal=False):
    if isinstance(d, D.Leaf):
        return _ifml(d.f)
    if isinstance(d, D.DBin):
        l, r = _ider(d.left, literal), _ider(d.right, literal)
        if F.is_atom(d.conn):
            return _TABLE[(_cls(d.left, l), _cls(d.right, r))](d.conn)
        return _combine(d.conn, l, r)
    top, bot = _ider(d.top, literal), _ider(d.bottom, literal)
    c, p = std_conclusion(top), std_premise(bot)
    if c == p:
        return _sync(top, bot)
    if isinstance(d, D.Exp):
        raise Undefined("expansion with different interpreted endpoints")
    if literal or sks_step(c, p):
        return sks_stack(top, bot)
    rows = expand_step(c, p, D.conclusion(d.top), D.premise(d.bottom))
    if rows is None:
        return sks_stack(top, bot)
    return chain(top, rows, bot)


_META = ("?x", "?y", "?z", "?w")


def _schematic(p_sub, c_sub):
    """Schematic premise and conclusion of a connective-only rule matching p_sub -> c_sub."""
    mv = [F.Var(n, frozenset()) for n in _META]
    for fam, alpha, beta in D._scheme_matches(p_sub, c_sub):
        if F.is_atom(alpha) or F.is_atom(beta):
            continue
        sp, sc = D.instantiate(fam, alpha, beta, *mv)
        args = (p_sub.left.left, p_sub.left.right, p_sub.right.left, p_sub.right.right)
        return sp, sc, args
    for name in D._algebraic_matches(p_sub, c_sub):
        sp, sc = D.instantiate_algebraic(name, *mv[:3])
        if name == "mix":
            args = (p_sub.left, p_sub.right)
        else:
            args = (p_sub.left, p_sub.right.left, p_sub.right.right)
        return sp, sc, args
    return None


def _std_subst(f, env):
    if isinstance(f, Atom) and f.name in env:
        return env[f.name]
    if isinstance(f, SBin):
        return SBin(f.conn, _std_subst(f.left, env), _std_subst(f.right, env))
    return f


def expand_step(c, p, c_sub=None, p_sub=None):
    """Rows (formula, label) of an SKS derivation from c to p, or None.

    For connective-only rules the derivation is found once on schematic
    arguments and then instantiated; otherwise the formulae are small and a
    direct bounded search is used.
    """
    rows = None
    sch = _schematic(c_sub, p_sub) if c_sub is not None else None
    if sch is not None:
        sp, sc, args = sch
        gen = witness(_std_from(sp), _std_from(sc), LINEAR_RULES, 3, ())
        if gen is not None:
            env = {}
            for name, a in zip(_META, args):
                val = _ifml(a)
                env[name] = val
            start = _std_subst(_std_from(sp), env)
            rows = [(start, EQUIV)] + [(_std_subst(f, env), lab) for f, lab in gen]
            rows.append((p, EQUIV))
    if rows is None:
        rows = witness(c, p)
        if rows is None:
            return None
        rows = list(rows)
    return _tidy(c, rows)


def _tidy(start, rows):
    """Drop repeated rows and merge adjacent equivalence steps."""
    out = []
    for f, lab in rows:
        prev = out[-1][0] if out else start
        if f == prev:
            continue
        if lab == EQUIV and out and out[-1][1] == EQUIV:
            out.pop()
            if f == (out[-1][0] if out else start):
                continue
        out.append((f, lab))
    return out


# ---------------------------------------------------------------- shortcuts

def interpret_unit_shortcut(a, bindings, budget=10**6):
    """Unit value of [B_i/v_i]a when every B_i interprets to the same unit."""
    vals = set()
    for v in F.free_vars(a):
        if v not in bindings:
            return None
        val = interpret_formula(bindings[v], budget)
        if val not in (S0, S1):
            return None
        vals.add(val)
    if len(vals) != 1:
        return None
    return vals.pop()


def std_to_sexpr(d, indent=0):
    pad = "  " * indent
    if is_formula(d):
        return f'{pad}(leaf "{std_show(d)}")'
    if isinstance(d, SBin):
        head = "and" if d.conn == AND else "or"
        return f"{pad}({head}\n{std_to_sexpr(d.left, indent + 1)}\n{std_to_sexpr(d.right, indent + 1)})"
    return (f"{pad}(inf\n{std_to_sexpr(d.top, indent + 1)}\n{std_to_sexpr(d.bottom, indent + 1)}"
            f" :rule {d.label})")


def std_from_sexpr(x):
    head, args = x[0], x[1:]
    if head == "leaf":
        return std_parse(args[0][1])
    if head in ("and", "or"):
        return SBin(AND if head == "and" else OR, std_from_sexpr(args[0]), std_from_sexpr(args[1]))
    if head == "inf":
        label = args[3] if len(args) == 4 and args[2] == ":rule" else None
        return SInf(std_from_sexpr(args[0]), std_from_sexpr(args[1]), label)
    raise F.ParseError(f"unknown standard derivation constructor {head!r}")


def parse_std_derivation(text):
    return std_from_sexpr(D.read_sexpr(text))
