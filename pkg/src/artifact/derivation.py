"""Subatomic pre-derivations and the checking kernel."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from . import formula as F
from .formula import AND, OR, Bin, ESub, GSub, Unit, Var, is_atom, up, down


class KernelError(Exception):
    pass


class NoRuleMatches(KernelError):
    pass


class RuleExcluded(KernelError):
    pass


class NoExpansionApplies(KernelError):
    pass


class IdenticalFormulas(KernelError):
    pass


@dataclass(frozen=True)
class Leaf:
    f: object


@dataclass(frozen=True)
class DBin:
    conn: str
    left: object
    right: object


@dataclass(frozen=True)
class DESub:
    arg: object
    var: str
    body: object


@dataclass(frozen=True)
class DGSub:
    arg: Unit
    var: str
    guard: str
    body: object


@dataclass(frozen=True)
class Inf:
    top: object
    bottom: object
    label: str | None = None


@dataclass(frozen=True)
class Exp:
    top: object
    bottom: object


VERTICAL = (Inf, Exp)


# ---------------------------------------------------------------- maps

def premise(d):
    return _end(d, True)


def conclusion(d):
    return _end(d, False)


def _end(d, pr):
    if isinstance(d, Leaf):
        return d.f
    if isinstance(d, DBin):
        return Bin(d.conn, _end(d.left, pr), _end(d.right, pr))
    if isinstance(d, DESub):
        return ESub(_end(d.arg, pr), d.var, _end(d.body, pr))
    if isinstance(d, DGSub):
        return GSub(d.arg, d.var, d.guard, _end(d.body, pr))
    return _end(d.top, True) if pr else _end(d.bottom, False)


def endpoints(d):
    return premise(d), conclusion(d)


def width_height(d):
    """Width and height; height counts formula rows, so a leaf has height 1."""
    if isinstance(d, Leaf):
        return F.size(d.f), 1
    if isinstance(d, (DBin, DESub)):
        a, b = (d.left, d.right) if isinstance(d, DBin) else (d.arg, d.body)
        w1, h1 = width_height(a)
        w2, h2 = width_height(b)
        return w1 + w2, max(h1, h2)
    if isinstance(d, DGSub):
        w, h = width_height(d.body)
        return w + 1, h
    w1, h1 = width_height(d.top)
    w2, h2 = width_height(d.bottom)
    return max(w1, w2), h1 + h2


def dsize(d):
    if isinstance(d, Leaf):
        return F.size(d.f)
    if isinstance(d, DBin):
        return dsize(d.left) + dsize(d.right)
    if isinstance(d, DESub):
        return dsize(d.arg) + dsize(d.body)
    if isinstance(d, DGSub):
        return 1 + dsize(d.body)
    return dsize(d.top) + dsize(d.bottom)


def is_flat(d):
    if isinstance(d, Leaf):
        return F.is_flat(d.f)
    if isinstance(d, (DESub, DGSub)):
        return False
    if isinstance(d, DBin):
        return is_flat(d.left) and is_flat(d.right)
    return is_flat(d.top) and is_flat(d.bottom)


def lift(f):
    """A formula seen as a derivation with no vertical nodes."""
    return Leaf(f)


def expand_leaf(f):
    if isinstance(f, Bin):
        return DBin(f.conn, Leaf(f.left), Leaf(f.right))
    if isinstance(f, ESub):
        return DESub(Leaf(f.arg), f.var, Leaf(f.body))
    if isinstance(f, GSub):
        return DGSub(f.arg, f.var, f.guard, Leaf(f.body))
    return Leaf(f)


def normalize(d):
    """Collapse vertical-free composites into single leaves."""
    if isinstance(d, Leaf):
        return d
    if isinstance(d, DBin):
        l, r = normalize(d.left), normalize(d.right)
        if isinstance(l, Leaf) and isinstance(r, Leaf):
            return Leaf(Bin(d.conn, l.f, r.f))
        return DBin(d.conn, l, r)
    if isinstance(d, DESub):
        a, b = normalize(d.arg), normalize(d.body)
        if isinstance(a, Leaf) and isinstance(b, Leaf):
            return Leaf(ESub(a.f, d.var, b.f))
        return DESub(a, d.var, b)
    if isinstance(d, DGSub):
        b = normalize(d.body)
        if isinstance(b, Leaf):
            return Leaf(GSub(d.arg, d.var, d.guard, b.f))
        return DGSub(d.arg, d.var, d.guard, b)
    if isinstance(d, Inf):
        return Inf(normalize(d.top), normalize(d.bottom), d.label)
    return Exp(normalize(d.top), normalize(d.bottom))


def dbin(conn, l, r):
    if isinstance(l, Leaf) and isinstance(r, Leaf):
        return Leaf(Bin(conn, l.f, r.f))
    return DBin(conn, l, r)


def desub(a, x, b):
    if isinstance(a, Leaf) and isinstance(b, Leaf):
        return Leaf(ESub(a.f, x, b.f))
    return DESub(a, x, b)


def dgsub(u, x, p, b):
    if isinstance(b, Leaf):
        return Leaf(GSub(u, x, p, b.f))
    return DGSub(u, x, p, b)


def as_der(x):
    return x if isinstance(x, (Leaf, DBin, DESub, DGSub, Inf, Exp)) else Leaf(x)


def stack(*ds):
    """Vertically compose a sequence, inserting Exp or Inf by the caller's tags.

    Items are derivations; consecutive items are joined by Exp."""
    ds = [as_der(x) for x in ds]
    out = ds[-1]
    for d in reversed(ds[:-1]):
        out = Exp(d, out)
    return out


def vert(top, bottom, kind="exp", label=None):
    top, bottom = as_der(top), as_der(bottom)
    if kind == "exp":
        return Exp(top, bottom)
    return Inf(top, bottom, label)


def exp_chain(*fs):
    """Stack formulae top to bottom as single expansion steps."""
    return stack(*fs)


def seq(*ds):
    """Compose derivations d1..dn top to bottom by expansion where
    cn(d_i) = pr(d_{i+1}) is glued by sharing the formula: the result is
    built as nested Exp only when endpoints differ."""
    ds = [as_der(x) for x in ds]
    out = ds[-1]
    for d in reversed(ds[:-1]):
        out = glue(d, out)
    return out


def glue(a, b):
    """Vertical composition of a over b assuming cn(a) == pr(b)."""
    if isinstance(a, Leaf) and premise(b) == a.f:
        return b
    if isinstance(b, Leaf) and b.f == conclusion(a):
        return a
    if conclusion(a) != premise(b):
        raise KernelError(f"glue mismatch:\n  {F.show(conclusion(a))}\n  {F.show(premise(b))}")
    return _glue(a, b)


def _glue(a, b):
    # graft b underneath a by replacing the bottom-most formula of a
    if isinstance(a, (Inf, Exp)):
        nb = glue(a.bottom, b)
        return type(a)(a.top, nb, a.label) if isinstance(a, Inf) else Exp(a.top, nb)
    if isinstance(b, (Inf, Exp)):
        nt = glue(a, b.top)
        return type(b)(nt, b.bottom, b.label) if isinstance(b, Inf) else Exp(nt, b.bottom)
    # both horizontal: zip when shapes agree
    if isinstance(a, DBin) and isinstance(b, DBin) and a.conn == b.conn:
        return DBin(a.conn, glue(a.left, b.left), glue(a.right, b.right))
    if isinstance(a, DESub) and isinstance(b, DESub) and a.var == b.var:
        return DESub(glue(a.arg, b.arg), a.var, glue(a.body, b.body))
    if isinstance(a, DGSub) and isinstance(b, DGSub) and (a.arg, a.var, a.guard) == (b.arg, b.var, b.guard):
        return DGSub(a.arg, a.var, a.guard, glue(a.body, b.body))
    a2, b2 = _split(a), _split(b)
    if a2 is not a or b2 is not b:
        return _glue(a2, b2)
    raise KernelError("cannot glue derivations of different shapes")


def _split(d):
    return expand_leaf(d.f) if isinstance(d, Leaf) else d


# ---------------------------------------------------------------- rules

UP1, UP2, DN1, DN2 = "up1", "up2", "dn1", "dn2"
FAMILIES = (UP1, UP2, DN1, DN2)
ALGEBRAIC = ("s", "assoc|", "assoc&", "mix", "com|", "com&")


def _tok(c):
    return c if not is_atom(c) else f"<{c}>"


def scheme_label(fam, alpha, beta):
    a, b = _tok(alpha), _tok(beta)
    return {UP1: f"{a}^{b}", UP2: f"{b}{a}^", DN1: f"{a}_{b}", DN2: f"{b}{a}_"}[fam]


_LABEL_TOK = r"(<[^>]+>|[&|])"
_LABEL = [
    (UP1, re.compile(rf"^{_LABEL_TOK}\^{_LABEL_TOK}$"), False),
    (UP2, re.compile(rf"^{_LABEL_TOK}{_LABEL_TOK}\^$"), True),
    (DN1, re.compile(rf"^{_LABEL_TOK}_{_LABEL_TOK}$"), False),
    (DN2, re.compile(rf"^{_LABEL_TOK}{_LABEL_TOK}_$"), True),
]


def parse_label(label):
    """Return (family, alpha, beta) for a scheme label, or None for algebraic."""
    for fam, rx, swapped in _LABEL:
        m = rx.match(label)
        if m:
            t1, t2 = [t.strip("<>") for t in m.groups()]
            return (fam, t2, t1) if swapped else (fam, t1, t2)
    return None


def is_cut_label(label):
    p = parse_label(label) if label else None
    return bool(p) and p[0] in (UP1, UP2) and is_atom(p[1]) and p[2] == AND


@dataclass(frozen=True)
class RuleSet:
    name: str
    algebraic: frozenset = frozenset(ALGEBRAIC)
    exclude_cut: bool = False
    families: frozenset = frozenset(FAMILIES)

    def allows(self, fam, alpha, beta):
        if fam not in self.families:
            return False
        if self.exclude_cut and fam in (UP1, UP2) and is_atom(alpha) and beta == AND:
            return False
        return True


TBLS = RuleSet("tbls")
TBLSCF = RuleSet("tblscf", exclude_cut=True)
RULESETS = {"tbls": TBLS, "tblscf": TBLSCF}


def instantiate(fam, alpha, beta, x, y, z, w):
    """Premise and conclusion of a scheme instance."""
    if fam == UP1:
        return Bin(beta, Bin(up(alpha), x, y), Bin(alpha, z, w)), Bin(alpha, Bin(beta, x, z), Bin(beta, y, w))
    if fam == UP2:
        return Bin(beta, Bin(alpha, x, y), Bin(up(alpha), z, w)), Bin(alpha, Bin(beta, x, z), Bin(beta, y, w))
    if fam == DN1:
        return Bin(alpha, Bin(beta, x, y), Bin(beta, z, w)), Bin(beta, Bin(down(alpha), x, z), Bin(alpha, y, w))
    if fam == DN2:
        return Bin(alpha, Bin(beta, x, y), Bin(beta, z, w)), Bin(beta, Bin(alpha, x, z), Bin(down(alpha), y, w))
    raise ValueError(fam)


def instantiate_algebraic(name, x, y, z=None):
    if name == "s":
        return Bin(AND, x, Bin(OR, y, z)), Bin(OR, Bin(AND, x, y), z)
    if name in ("assoc|", "assoc&"):
        c = name[-1]
        return Bin(c, x, Bin(c, y, z)), Bin(c, Bin(c, x, y), z)
    if name == "mix":
        return Bin(AND, x, y), Bin(OR, x, y)
    if name in ("com|", "com&"):
        c = name[-1]
        return Bin(c, x, y), Bin(c, y, x)
    raise ValueError(name)


def _scheme_matches(p, c):
    """All (family, alpha, beta) whose instance is p -> c."""
    out = []
    if not (isinstance(p, Bin) and isinstance(c, Bin)):
        return out
    pl, pr_, cl, cr = p.left, p.right, c.left, c.right
    if not all(isinstance(t, Bin) for t in (pl, pr_, cl, cr)):
        return out
    # up families: p = (x ? y) beta (z ? w), c = (x beta z) alpha (y beta w)
    beta, alpha = p.conn, c.conn
    if (cl.conn == beta and cr.conn == beta and cl.left == pl.left and cl.right == pr_.left
            and cr.left == pl.right and cr.right == pr_.right):
        if pl.conn == up(alpha) and pr_.conn == alpha:
            out.append((UP1, alpha, beta))
        if pl.conn == alpha and pr_.conn == up(alpha):
            out.append((UP2, alpha, beta))
    # down families: p = (x beta y) alpha (z beta w), c = (x ? z) beta (y ? w)
    alpha, beta = p.conn, c.conn
    if (pl.conn == beta and pr_.conn == beta and cl.left == pl.left and cl.right == pr_.left
            and cr.left == pl.right and cr.right == pr_.right):
        if cl.conn == down(alpha) and cr.conn == alpha:
            out.append((DN1, alpha, beta))
        if cl.conn == alpha and cr.conn == down(alpha):
            out.append((DN2, alpha, beta))
    return out


def _algebraic_matches(p, c):
    out = []
    if not (isinstance(p, Bin) and isinstance(c, Bin)):
        return out
    if (p.conn == AND and c.conn == OR and isinstance(p.right, Bin) and p.right.conn == OR
            and isinstance(c.left, Bin) and c.left.conn == AND
            and c.left.left == p.left and c.left.right == p.right.left and c.right == p.right.right):
        out.append("s")
    for k in (OR, AND):
        if (p.conn == k and c.conn == k and isinstance(p.right, Bin) and p.right.conn == k
                and isinstance(c.left, Bin) and c.left.conn == k and c.left.left == p.left
                and c.left.right == p.right.left and c.right == p.right.right):
            out.append("assoc" + k)
    if p.conn == AND and c.conn == OR and p.left == c.left and p.right == c.right:
        out.append("mix")
    for k in (OR, AND):
        if p.conn == k and c.conn == k and p.left == c.right and p.right == c.left:
            out.append("com" + k)
    return out


def match_rule(p, c, rs: RuleSet = TBLS) -> str:
    excluded = []
    for fam, alpha, beta in _scheme_matches(p, c):
        if rs.allows(fam, alpha, beta):
            return scheme_label(fam, alpha, beta)
        excluded.append(scheme_label(fam, alpha, beta))
    for name in _algebraic_matches(p, c):
        if name in rs.algebraic:
            return name
        excluded.append(name)
    if excluded:
        raise RuleExcluded(f"only excluded rules match: {', '.join(excluded)}")
    raise NoRuleMatches(_near_miss(p, c))


def _near_miss(p, c):
    def shape(f):
        if isinstance(f, Bin):
            inner = [g.conn if isinstance(g, Bin) else "_" for g in (f.left, f.right)]
            return f"({inner[0]}){_tok(f.conn)}({inner[1]})"
        return "leaf"
    return f"no rule instance: premise shape {shape(p)}, conclusion shape {shape(c)}"


# ---------------------------------------------------------------- expansion

def _sigma_parts(f):
    if isinstance(f, ESub):
        return ("e", f.arg, f.var, None)
    if isinstance(f, GSub):
        return ("g", f.arg, f.var, f.guard)
    return None


def _rebuild_sigma(parts, body):
    kind, arg, x, g = parts
    return ESub(arg, x, body) if kind == "e" else GSub(arg, x, g, body)


def _eq_root(t, b):
    """Is t == b a root instance of one of the directed equivalence clauses?"""
    sp = _sigma_parts(t)
    if sp is not None:
        # sigma(A alpha B) == sigma A alpha sigma B
        if isinstance(t.body, Bin) and isinstance(b, Bin) and b.conn == t.body.conn:
            if b.left == _rebuild_sigma(sp, t.body.left) and b.right == _rebuild_sigma(sp, t.body.right):
                return "distribute"
    if isinstance(t, ESub) and isinstance(t.body, ESub):
        c, x, inner = t.arg, t.var, t.body
        if isinstance(b, ESub) and b.var == inner.var and b.arg == ESub(c, x, inner.arg):
            if x != inner.var:
                if inner.var not in F.free_vars(c) and b.body == ESub(c, x, inner.body):
                    return "push"
            elif b.body == inner.body:
                return "push-shadowed"
    if isinstance(t, ESub) and not F.has_gsub(t.body):
        try:
            if F.subst1(t.arg, t.var, t.body) == b:
                return "actualize"
        except F.VariableCapture:
            pass
    return None


def _lacks_guard(e, p):
    return all(p not in v.rng for v, _ in F.occurrences(e))


def _to_root(t, b):
    if not isinstance(t, GSub):
        return None
    u, y, p = t.arg, t.var, t.guard
    body = t.body
    if F.is_flat(body) and F.guarded_substitute(u, y, p, body) == b:
        return "guard-fire"
    if isinstance(body, ESub) and F.is_flat(body.arg):
        fx, x, e = body.arg, body.var, body.body
        if isinstance(b, ESub) and b.var == x and b.body == e and b.arg == F.guarded_substitute(u, y, p, fx):
            if _lacks_guard(e, p) or (not F.mentions(e, x) and not F.mentions(e, y)):
                return "guard-enter"
    if body == b and (not F.mentions(body, y) or _lacks_guard(body, p)):
        return "guard-drop"
    return None


def _root_step(t, b):
    r = _to_root(t, b)
    if r:
        return "~>" + r
    r = _eq_root(t, b)
    if r:
        return "==" + r
    r = _eq_root(b, t)
    if r:
        return "=<" + r
    return None


def _same_head(t, b):
    if type(t) is not type(b):
        return False
    if isinstance(t, Bin):
        return t.conn == b.conn
    if isinstance(t, ESub):
        return t.var == b.var
    if isinstance(t, GSub):
        return (t.arg, t.var, t.guard) == (b.arg, b.var, b.guard)
    return False


def check_expansion_step(top, bottom) -> str:
    if top == bottom:
        raise IdenticalFormulas("expansion with identical premise and conclusion")
    path = []
    t, b = top, bottom
    while True:
        r = _root_step(t, b)
        if r:
            return r + ("@" + ".".join(map(str, path)) if path else "")
        if not _same_head(t, b):
            break
        tc, bc = F.children(t), F.children(b)
        diff = [i for i in range(len(tc)) if tc[i] != bc[i]]
        if len(diff) != 1:
            break
        path.append(diff[0])
        t, b = tc[diff[0]], bc[diff[0]]
    raise NoExpansionApplies(f"no single expansion step relates\n  {F.show(top)}\n  {F.show(bottom)}")


# ---------------------------------------------------------------- checking

@dataclass
class CheckReport:
    ok: bool
    width: int
    height: int
    size: int
    steps: list = field(default_factory=list)

    def to_json(self, **kw):
        return json.dumps({"ok": self.ok, "width": self.width, "height": self.height,
                           "size": self.size, "steps": self.steps}, **kw)

    def labels(self):
        return [s["label"] for s in self.steps if s["kind"] == "inference" and "label" in s]

    def errors(self):
        return [s for s in self.steps if "error" in s]


def check_derivation(d, rs: RuleSet = TBLS) -> CheckReport:
    steps = []
    _walk(d, rs, "", steps)
    w, h = width_height(d)
    return CheckReport(not any("error" in s for s in steps), w, h, dsize(d), steps)


def _walk(d, rs, path, steps):
    todo = [(d, path)]
    while todo:
        d, path = todo.pop()
        if isinstance(d, Leaf):
            continue
        if isinstance(d, DBin):
            todo += [(d.right, path + "R"), (d.left, path + "L")]
        elif isinstance(d, DESub):
            todo += [(d.body, path + "B"), (d.arg, path + "A")]
        elif isinstance(d, DGSub):
            todo.append((d.body, path + "B"))
        else:
            c, p = conclusion(d.top), premise(d.bottom)
            if isinstance(d, Inf):
                try:
                    steps.append({"path": path or ".", "kind": "inference", "label": match_rule(c, p, rs)})
                except KernelError as e:
                    steps.append({"path": path or ".", "kind": "inference", "error": f"{type(e).__name__}: {e}"})
            else:
                try:
                    steps.append({"path": path or ".", "kind": "expansion", "label": check_expansion_step(c, p)})
                except KernelError as e:
                    steps.append({"path": path or ".", "kind": "expansion", "error": f"{type(e).__name__}: {e}"})
            todo += [(d.bottom, path + "b"), (d.top, path + "t")]


def is_cut_free(d) -> bool:
    return not any(is_cut_label(l) for l in check_derivation(d, TBLS).labels())


def inference_labels(d, rs=TBLS):
    return check_derivation(d, rs).labels()


# ---------------------------------------------------------------- S-expressions

_SX = re.compile(r'\s*(?:(\()|(\))|"((?:[^"\\]|\\.)*)"|([^\s()"]+))')


def _sx_tokens(text):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _SX.match(text, pos)
        if not m or m.end() == pos:
            raise F.ParseError(f"bad s-expression near {text[pos:pos + 20]!r}")
        pos = m.end()
        if m.group(1):
            out.append("(")
        elif m.group(2):
            out.append(")")
        elif m.group(3) is not None:
            out.append(("str", m.group(3)))
        else:
            out.append(m.group(4))
    return out


def read_sexpr(text):
    toks = _sx_tokens(text)
    stack_ = [[]]
    for t in toks:
        if t == "(":
            stack_.append([])
        elif t == ")":
            if len(stack_) < 2:
                raise F.ParseError("unbalanced parentheses")
            top = stack_.pop()
            stack_[-1].append(top)
        else:
            stack_[-1].append(t)
    if len(stack_) != 1 or len(stack_[0]) != 1:
        raise F.ParseError("expected exactly one s-expression")
    return stack_[0][0]


def from_sexpr(x):
    if not isinstance(x, list) or not x:
        raise F.ParseError(f"bad derivation node {x!r}")
    head, args = x[0], x[1:]
    if head == "leaf":
        if len(args) != 1 or not isinstance(args[0], tuple):
            raise F.ParseError("leaf expects one quoted formula")
        return Leaf(F.parse(args[0][1]))
    if head in ("and", "or"):
        _arity(head, args, 2)
        return DBin(AND if head == "and" else OR, from_sexpr(args[0]), from_sexpr(args[1]))
    if head == "atom":
        _arity(head, args, 3)
        return DBin(args[0], from_sexpr(args[1]), from_sexpr(args[2]))
    if head == "esub":
        _arity(head, args, 3)
        return DESub(from_sexpr(args[0]), args[1], from_sexpr(args[2]))
    if head == "gsub":
        _arity(head, args, 4)
        return DGSub(Unit(int(args[0])), args[1], args[2], from_sexpr(args[3]))
    if head in ("inf", "exp"):
        label = None
        if len(args) == 4 and args[2] == ":rule":
            label = args[3]
            args = args[:2]
        _arity(head, args, 2)
        if head == "exp":
            return Exp(from_sexpr(args[0]), from_sexpr(args[1]))
        return Inf(from_sexpr(args[0]), from_sexpr(args[1]), label)
    raise F.ParseError(f"unknown derivation constructor {head!r}")


def _arity(head, args, n):
    if len(args) != n:
        raise F.ParseError(f"{head} expects {n} arguments, got {len(args)}")


def parse_derivation(text):
    return from_sexpr(read_sexpr(text))


def show_derivation(d, indent=0, pretty=True):
    pad = "  " * indent if pretty else ""
    nl = "\n" if pretty else " "
    if isinstance(d, Leaf):
        return f'{pad}(leaf "{F.show(d.f)}")'
    sub = lambda e: show_derivation(e, indent + 1, pretty)
    if isinstance(d, DBin):
        if is_atom(d.conn):
            return f"{pad}(atom {d.conn}{nl}{sub(d.left)}{nl}{sub(d.right)})"
        head = "and" if d.conn == AND else "or"
        return f"{pad}({head}{nl}{sub(d.left)}{nl}{sub(d.right)})"
    if isinstance(d, DESub):
        return f"{pad}(esub{nl}{sub(d.arg)}{nl}{pad}  {d.var}{nl}{sub(d.body)})"
    if isinstance(d, DGSub):
        return f"{pad}(gsub {d.arg.value} {d.var} {d.guard}{nl}{sub(d.body)})"
    if isinstance(d, Inf):
        lab = f" :rule {d.label}" if d.label else ""
        return f"{pad}(inf{nl}{sub(d.top)}{nl}{sub(d.bottom)}{lab})"
    return f"{pad}(exp{nl}{sub(d.top)}{nl}{sub(d.bottom)})"


def label_all(d, rs=TBLS):
    """Fill every Inf label with the kernel's inferred rule name."""
    if isinstance(d, Leaf):
        return d
    if isinstance(d, DBin):
        return DBin(d.conn, label_all(d.left, rs), label_all(d.right, rs))
    if isinstance(d, DESub):
        return DESub(label_all(d.arg, rs), d.var, label_all(d.body, rs))
    if isinstance(d, DGSub):
        return DGSub(d.arg, d.var, d.guard, label_all(d.body, rs))
    top, bot = label_all(d.top, rs), label_all(d.bottom, rs)
    if isinstance(d, Exp):
        return Exp(top, bot)
    return Inf(top, bot, match_rule(conclusion(top), premise(bot), rs))
